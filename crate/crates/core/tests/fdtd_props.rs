mod common;

use hn_core::fastconv::FastParams;
use hn_core::fdtd1d::{physical_weights, run_fdtd, FdtdOptions, Grid1D, PhysicalMedium, C0, EPS0};
use hn_core::prabhakar::{weights, KernelSpec};
use hn_core::timestepper::HistoryMode;
use proptest::prelude::*;

const TAU0: f64 = 1.53e-10;

fn cole(alpha: f64, beta: f64) -> PhysicalMedium {
    PhysicalMedium::new(50.0, 2.0, TAU0, alpha, beta).unwrap()
}

// Smooth bump vanishing at both ends plus a random H.
fn smooth_init(cells: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut e: Vec<f64> = (0..=cells)
        .map(|m| {
            let x = m as f64 / cells as f64;
            (std::f64::consts::PI * x).sin().powi(2) * (7.0 * x).cos()
        })
        .collect();
    e[0] = 0.0;
    e[cells] = 0.0;
    let h = common::uniform(seed, cells).iter().map(|v| v * 2e-3).collect();
    (e, h)
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0
}

#[test]
fn vacuum_arrival_delay() {
    // long enough domain that the far-end echo never reaches the probes
    let cells = 1200;
    let dz = 1.1e-3;
    let dt = 0.5 * dz / C0;
    let g = Grid1D::new(0.0, cells as f64 * dz, cells, dt, 100, vec![200, 220]).unwrap();
    let med = PhysicalMedium::new(1.0, 1.0, TAU0, 0.8, 0.9).unwrap();
    let out = run_fdtd(&g, &med, &FdtdOptions::new(1600, HistoryMode::Direct)).unwrap();
    let (a, b) = (&out.series.data[0], &out.series.data[1]);

    // lag maximizing the cross-correlation
    let n = a.len();
    let corr = |lag: usize| (0..n - lag).map(|k| a[k] * b[k + lag]).sum::<f64>();
    let best = (0..200).max_by(|&x, &y| corr(x).total_cmp(&corr(y))).unwrap();
    let expect = 20.0 * dz / C0 / dt;
    assert!((best as f64 - expect).abs() <= 1.0, "lag {best} vs {expect}");
}

#[test]
fn causality_ahead_of_front() {
    let cells = 1000;
    let dz = 1.1e-3;
    let dt = 1.768e-12;
    let src = 500;
    let probes = vec![520, 530, 560];
    let g = Grid1D::new(0.0, 1.1, cells, dt, src, probes.clone()).unwrap();
    let out = run_fdtd(&g, &cole(0.8, 0.9), &FdtdOptions::new(600, HistoryMode::Direct)).unwrap();
    for (series, &q) in out.series.data.iter().zip(&probes) {
        let peak = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak > 0.0);
        let d = (q - src) as f64 * dz;
        let kmax = ((d / C0 - 2.0 * dt) / dt).floor() as usize;
        let early = series[..=kmax].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(early <= 1e-13 * peak, "probe {q}: {early:e} vs {peak:e}");
    }
}

#[test]
fn physical_weights_match_scaled_variables() {
    let med = cole(0.7, 0.6);
    let dt = 1.768e-12;
    let phys = physical_weights(&med, dt, 300).unwrap();
    let scaled = weights(KernelSpec::scaled(0.7, 0.6).unwrap(), dt / TAU0, 300).unwrap();
    let de = EPS0 * med.delta_eps();
    for (p, s) in phys.w.iter().zip(&scaled.w) {
        let rel = (p - de * s).abs() / (de * s).abs();
        assert!(rel <= 4e-12, "{p} {s} {rel:e}");
    }
}

#[test]
fn polarization_is_the_discrete_convolution() {
    let cells = 80;
    let dt = 1.768e-12;
    let g = Grid1D::new(0.0, cells as f64 * 1.1e-3, cells, dt, 40, vec![45]).unwrap();
    let med = cole(0.9, 0.6);
    let mut o = FdtdOptions::new(150, HistoryMode::Direct);
    o.keep_history = true;
    o.pulse = None;
    o.init = Some(smooth_init(cells, 3));
    let out = run_fdtd(&g, &med, &o).unwrap();
    let hist = out.history.unwrap();
    let w = physical_weights(&med, dt, 150).unwrap().w;
    let k = hist.len();
    for m in 1..cells {
        let p: f64 = (1..=k).map(|j| w[k - j] * hist[j - 1][m]).sum();
        assert!((p - out.p[m]).abs() <= 1e-12 * p.abs().max(1e-14), "{m}: {p} {}", out.p[m]);
    }
}

#[test]
fn fast_matches_direct() {
    let cells = 200;
    let dt = 1.768e-12;
    let g = Grid1D::new(0.0, cells as f64 * 1.1e-3, cells, dt, 100, vec![100, 120, 130]).unwrap();
    for (a, b) in [(0.8, 0.9), (0.9, 0.6)] {
        let med = cole(a, b);
        let d = run_fdtd(&g, &med, &FdtdOptions::new(1500, HistoryMode::Direct)).unwrap();
        let f = run_fdtd(&g, &med, &FdtdOptions::new(1500, HistoryMode::Fast(FastParams::default()))).unwrap();
        for (sd, sf) in d.series.data.iter().zip(&f.series.data) {
            let peak = sd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gap = sd.iter().zip(sf).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(gap <= 1e-10 * peak, "({a},{b}): {gap:e} of {peak:e}");
        }
    }
}

#[test]
fn dielectric_slows_the_pulse() {
    // ε∞ = ε_s = 4 halves the speed
    let cells = 600;
    let dz = 1.1e-3;
    let dt = 0.5 * dz / C0;
    let g = Grid1D::new(0.0, cells as f64 * dz, cells, dt, 100, vec![200, 220]).unwrap();
    let med = PhysicalMedium::new(4.0, 4.0, TAU0, 1.0, 1.0).unwrap();
    let out = run_fdtd(&g, &med, &FdtdOptions::new(2400, HistoryMode::Direct)).unwrap();
    let shift = argmax(&out.series.data[1]) as f64 - argmax(&out.series.data[0]) as f64;
    assert!((shift - 80.0).abs() <= 2.0, "{shift}");
}

fn energy_monotone(alpha: f64, beta: f64, seed: u64, dt: f64) {
    let cells = 60;
    let g = Grid1D::new(0.0, cells as f64 * 1.1e-3, cells, dt, 30, vec![]).unwrap();
    let mut o = FdtdOptions::new(300, HistoryMode::Direct);
    o.pulse = None;
    o.init = Some(smooth_init(cells, seed));
    let out = run_fdtd(&g, &cole(alpha, beta), &o).unwrap();
    let v = &out.energy.values;
    for k in 1..v.len() {
        assert!(v[k] - v[k - 1] <= 1e-12 * v[0], "k={k}: {} -> {}", v[k - 1], v[k]);
    }
    assert!(v[v.len() - 1] < v[0]);
}

#[test]
fn energy_decays_at_default_step() {
    for (a, b) in [(0.8, 0.9), (0.9, 0.6), (1.0, 1.0), (0.3, 0.3)] {
        energy_monotone(a, b, 11, 1.768e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn energy_nonincreasing(a in 0.1f64..=1.0, b in 0.1f64..=1.0, seed in 0u64..1000) {
        energy_monotone(a, b, seed, 1.768e-12);
    }
}
