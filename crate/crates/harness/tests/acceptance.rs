//! Acceptance suite. One PASS/FAIL line per criterion; run with
//!
//! ```text
//! cargo test -p hn-harness --release --test acceptance
//! ```
//!
//! Criterion names given as arguments restrict the run, e.g. `-- AC4 AC6`.
//! The process exits nonzero if any selected criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hn_core::fdtd1d::{source_pulse, PhysicalMedium};
use hn_core::prabhakar::{kernel_e, laplace_symbol, ml3, weight_sum, weights, KernelSpec, MLParams};
use hn_core::recovery::{analytic_permittivity, dft_grid, recover, synthetic_far};
use hn_core::Complex64;
use hn_harness::config::{Checks, FdtdConfig, Medium};
use hn_harness::{drivers, Experiment, Mode, RunConfig};
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;

const TABLE1_DT: [i32; 3] = [4, 6, 8];
const TABLE1_E: [f64; 3] = [6.4914e-03, 1.6836e-03, 4.1803e-04];
const TABLE1_H: [f64; 3] = [2.0905e-03, 4.0510e-04, 8.3436e-05];
const TABLE1_P: [f64; 3] = [6.1861e-03, 1.7062e-03, 4.5249e-04];

fn grid9() -> Vec<(f64, f64)> {
    let g: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    g.iter().flat_map(|&a| g.iter().map(move |&b| (a, b))).collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn failed_checks(rec: &hn_harness::ResultRecord) -> Vec<String> {
    rec.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect()
}

fn table1_config() -> RunConfig {
    let mut c = RunConfig::new(Experiment::TimeConvergence);
    c.mode = Mode::Direct;
    (c.n, c.t) = (Some(50), Some(1.0));
    c.dts = (4..=8).map(|p| 2f64.powi(-p)).collect();
    c.compare_modes = true;
    c.medium = Medium { alpha: 0.5, beta: 0.5, eps_s: 2.0, eps_inf: 1.0, ..Medium::default() };
    c
}

fn ac1_ac2() -> (Outcome, Outcome) {
    let rec = match drivers::run(&table1_config()) {
        Ok(r) => r,
        Err(e) => return (Err(err(&e)), Err(err(e))),
    };
    let t = &rec.tables[0];
    let col = |n: &str| t.column(n).expect("column");
    let (dts, e, h, p) = (col("dt"), col("err_e"), col("err_h"), col("err_p"));

    let mut worst: f64 = 0.0;
    for (i, q) in TABLE1_DT.iter().enumerate() {
        let r = dts.iter().position(|&d| d == 2f64.powi(-q)).expect("reference step");
        for (got, want) in [(e[r], TABLE1_E[i]), (h[r], TABLE1_H[i]), (p[r], TABLE1_P[i])] {
            worst = worst.max((got - want).abs() / want);
        }
    }
    let orders: Vec<f64> =
        ["order_e", "order_h", "order_p"].iter().flat_map(|n| col(n)).filter(|v| !v.is_nan()).collect();
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &o| (a.min(o), b.max(o)));
    let ac1 = Ok((
        worst <= 0.02 && !orders.is_empty() && lo >= 0.9 && hi <= 1.2,
        format!("worst table deviation {:.2}%, orders in [{lo:.3}, {hi:.3}]", 100.0 * worst),
    ));

    let gap = ["gap_e", "gap_h", "gap_p"].iter().flat_map(|n| col(n)).fold(0.0f64, f64::max);
    let ac2 = Ok((gap <= 1e-10, format!("max direct/fast L2 gap {gap:.3e} over dt = 2^-4..2^-8")));
    (ac1, ac2)
}

fn energy_config(dt: f64, nt: usize) -> RunConfig {
    let mut c = RunConfig::new(Experiment::Energy);
    (c.n, c.nt, c.dt) = (Some(50), Some(nt), Some(dt));
    c.panels = vec![[0.3, 0.3], [0.3, 0.7], [0.7, 0.3], [0.7, 0.7]];
    c.checks = Checks { energy_tol: 1e-12, ..Checks::default() };
    c
}

fn ac3() -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for (dt, nt) in [(0.01, 500), (1.0, 200)] {
        let rec = drivers::run(&energy_config(dt, nt)).map_err(err)?;
        runs += rec.checks.len();
        bad.extend(failed_checks(&rec).into_iter().map(|s| format!("dt={dt} {s}")));
    }
    Ok((bad.is_empty() && runs == 8, if bad.is_empty() { format!("{runs} traces monotone") } else { bad.join("; ") }))
}

fn ac4() -> Outcome {
    let cases: Vec<(f64, f64, f64)> =
        grid9().into_iter().flat_map(|(a, b)| [1e-3, 1e-1].map(move |dt| (a, b, dt))).collect();
    let res: Vec<Result<(bool, bool, f64), String>> = cases
        .par_iter()
        .map(|&(a, b, dt)| {
            let spec = KernelSpec::scaled(a, b).map_err(err)?;
            let w = weights(spec, dt, 10_000).map_err(err)?;
            let nonneg = w.w.iter().all(|&v| v >= 0.0);
            let mono = w.w.windows(2).all(|p| p[1] <= p[0]);
            let gap = (w.partial_sum(w.len()) - weight_sum(spec, dt, w.len()).map_err(err)?).abs();
            Ok((nonneg, mono, gap))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let (mut neg, mut rise) = (0, 0);
    for r in res {
        let (n, m, g) = r?;
        neg += usize::from(!n);
        rise += usize::from(!m);
        worst = worst.max(g);
    }
    Ok((
        neg == 0 && rise == 0 && worst <= 1e-11,
        format!("{} tables: {neg} with negatives, {rise} non-monotone, max |sum - weight_sum| {worst:.2e}", cases.len()),
    ))
}

fn ac5() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/ml3_series.csv");
    let mut rdr = csv::Reader::from_path(path).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for row in rdr.records() {
        let r: Vec<f64> = row.map_err(err)?.iter().map(|x| x.trim().parse().unwrap()).collect();
        let got = ml3(MLParams::new(r[0], r[1], r[2]), Complex64::new(r[3], r[4])).map_err(err)?;
        let want = Complex64::new(r[5], r[6]);
        worst = worst.max((got - want).norm() / want.norm());
        n += 1;
    }

    let mut debye: f64 = 0.0;
    for i in 0..=300 {
        let z = -0.1 * i as f64;
        let v = ml3(MLParams::new(1.0, 1.0, 1.0), Complex64::new(z, 0.0)).map_err(err)?;
        debye = debye.max((v.re - z.exp()).abs());
    }
    let spec = KernelSpec::new(1.0, 1.0, -1.0).map_err(err)?;
    let dt = 0.1;
    let w = weights(spec, dt, 50).map_err(err)?;
    for (j, &v) in w.w.iter().enumerate() {
        debye = debye.max((v - (-(j as f64) * dt).exp() * (1.0 - (-dt).exp())).abs());
    }
    for t in [0.5, 2.0, 5.0] {
        debye = debye.max((kernel_e(spec, 1.0, 1.0, t).map_err(err)? - (-t).exp()).abs());
    }
    Ok((
        n > 0 && worst <= 1e-12 && debye <= 1e-13,
        format!("{n} series points, worst relative {worst:.2e}; Debye identities {debye:.2e}"),
    ))
}

fn ac6() -> Outcome {
    let omegas: Vec<f64> = (0..1000).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0)).collect();
    let mut low = f64::INFINITY;
    for (a, b) in grid9() {
        for &w in &omegas {
            low = low.min(laplace_symbol(a, b, 1.0, w).map_err(err)?.re);
        }
    }
    Ok((low >= -1e-15, format!("min Re symbol {low:.3e} over 81 pairs x 1000 frequencies")))
}

fn ac7() -> Outcome {
    let mut c = RunConfig::new(Experiment::SpaceConvergence);
    (c.dt, c.t) = (Some(1e-5), Some(1.0));
    c.ns = vec![4, 8, 12, 16];
    c.panels = vec![[0.3, 0.6], [0.6, 0.3]];
    let rec = drivers::run(&c).map_err(err)?;
    let bad = failed_checks(&rec);
    let decay: Vec<String> = rec
        .tables
        .iter()
        .map(|t| {
            let e = t.column("err_e").expect("err_e");
            format!("{} err_e {:.1e}..{:.1e}", t.name, e[0], e[e.len() - 1])
        })
        .collect();
    Ok((bad.is_empty() && rec.checks.len() == 2, if bad.is_empty() { decay.join("; ") } else { bad.join("; ") }))
}

fn ac8() -> Outcome {
    const DT: f64 = 1.768e-12;
    const DZ: f64 = 1.1e-3;
    let n = 4096;
    let near: Vec<f64> = (0..n).map(|k| if k < 3000 { source_pulse(k as f64 * DT) } else { 0.0 }).collect();
    let omegas = dft_grid(n, DT, 2.0 * PI * 0.1e9, 2.0 * PI * 10e9);
    let mut synth: f64 = 0.0;
    for (a, b) in [(0.8, 0.9), (0.9, 0.6)] {
        let m = PhysicalMedium::new(50.0, 2.0, 1.53e-10, a, b).map_err(err)?;
        for cells in [20.0, 30.0] {
            let far = synthetic_far(&near, DT, cells * DZ, &m);
            let r = recover(&near, &far, DT, cells * DZ, &omegas).map_err(err)?;
            for (j, &w) in omegas.iter().enumerate() {
                let e = analytic_permittivity(&m, w);
                synth = synth.max((r.eps_approx[j] - e).norm() / e.norm());
            }
        }
    }

    let mut c = RunConfig::new(Experiment::FdtdRecover);
    c.mode = Mode::Fast;
    c.panels = vec![[0.8, 0.9], [0.9, 0.6]];
    c.medium = Medium { eps_s: 50.0, eps_inf: 2.0, tau0: 1.53e-10, ..Medium::default() };
    c.fdtd = Some(FdtdConfig::default());
    c.checks.recovery_tol = Some(0.05);
    let rec = drivers::run(&c).map_err(err)?;
    let bad = failed_checks(&rec);
    let pipeline = if bad.is_empty() { "pipeline within 5%".to_owned() } else { bad.join("; ") };
    Ok((synth <= 1e-10 && bad.is_empty(), format!("synthetic {synth:.2e}; {pipeline}")))
}

fn ac9() -> Outcome {
    let mut c = RunConfig::new(Experiment::Timing);
    (c.n, c.t) = (Some(50), Some(1.0));
    c.nts = (7..=12).map(|p| 1usize << p).collect();
    c.checks.direct_ratio = Some([3.8, 4.2]);
    c.checks.fast_ratio_max = Some(2.4);
    let rec = drivers::run(&c).map_err(err)?;
    let detail: Vec<String> = rec.checks.iter().map(|k| format!("{} {}", k.name, k.detail)).collect();
    Ok((rec.passed() && rec.checks.len() == 2, detail.join("; ")))
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let want = |name: &str| filter.is_empty() || filter.iter().any(|f| f == name);

    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let time = |name: &'static str, f: &dyn Fn() -> Outcome, results: &mut Vec<(&str, Outcome, f64)>| {
        if want(name) {
            let t0 = Instant::now();
            let o = f();
            report(name, &o, t0.elapsed().as_secs_f64());
            results.push((name, o, t0.elapsed().as_secs_f64()));
        }
    };

    if want("AC1") || want("AC2") {
        let t0 = Instant::now();
        let (a1, a2) = ac1_ac2();
        let s = t0.elapsed().as_secs_f64();
        for (name, o) in [("AC1", a1), ("AC2", a2)] {
            if want(name) {
                report(name, &o, s);
                results.push((name, o, s));
            }
        }
    }
    time("AC3", &ac3, &mut results);
    time("AC4", &ac4, &mut results);
    time("AC5", &ac5, &mut results);
    time("AC6", &ac6, &mut results);
    time("AC7", &ac7, &mut results);
    time("AC8", &ac8, &mut results);
    time("AC9", &ac9, &mut results);

    let passed = results.iter().filter(|r| matches!(r.1, Ok((true, _)))).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(name: &str, o: &Outcome, secs: f64) {
    match o {
        Ok((true, d)) => println!("{name} PASS ({secs:.1}s) {d}"),
        Ok((false, d)) => println!("{name} FAIL ({secs:.1}s) {d}"),
        Err(e) => println!("{name} FAIL ({secs:.1}s) error: {e}"),
    }
}
