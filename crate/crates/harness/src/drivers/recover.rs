use std::f64::consts::PI;

use hn_core::fdtd1d::{run_fdtd, source_pulse, FdtdOptions, FdtdOutput, Grid1D, PhysicalMedium};
use hn_core::recovery::{analytic_permittivity, analytic_reflection, analytic_transfer, dft, recover, FrequencyResponse};
use hn_core::timestepper::HistoryMode;
use rayon::prelude::*;

use crate::config::{FdtdConfig, RunConfig};
use crate::error::Result;
use crate::record::{ResultRecord, Table};

/// Source samples below this fraction of their in-band peak are not trusted.
pub const SOURCE_FLOOR: f64 = 1e-4;

/// Worst relative errors over the trusted band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryErrors {
    pub eps_re: f64,
    pub eps_im: f64,
    pub refl: f64,
    pub t_re: f64,
    pub t_im: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub trusted: usize,
}

impl RecoveryErrors {
    pub fn worst(&self) -> f64 {
        [self.eps_re, self.eps_im, self.refl, self.t_re, self.t_im].into_iter().fold(0.0, f64::max)
    }
}

pub fn omegas(f: &FdtdConfig) -> Vec<f64> {
    let n = f.n_omega;
    (0..n).map(|j| 2.0 * PI * (f.f_min + (f.f_max - f.f_min) * j as f64 / (n - 1) as f64)).collect()
}

/// Trust mask: recovery's own near-probe floor and the source spectrum floor.
pub fn trusted_mask(r: &FrequencyResponse, dt: f64, steps: usize) -> Vec<bool> {
    let src: Vec<f64> = (0..=steps).map(|k| source_pulse(k as f64 * dt)).collect();
    let spec: Vec<f64> = r.omegas.iter().map(|&w| dft(&src, dt, w).norm()).collect();
    let peak = spec.iter().copied().fold(0.0, f64::max);
    (0..r.omegas.len()).map(|j| r.trusted(j) && spec[j] >= SOURCE_FLOOR * peak).collect()
}

/// ε′ and ε″ errors are relative to |ε′|, |ε″| (to |ε_r| when ε″ vanishes);
/// Re T and Im T errors are relative to |T| since both components cross zero.
pub fn recovery_errors(m: &PhysicalMedium, r: &FrequencyResponse, mask: &[bool]) -> RecoveryErrors {
    let mut e = RecoveryErrors { eps_re: 0.0, eps_im: 0.0, refl: 0.0, t_re: 0.0, t_im: 0.0, f_lo: f64::NAN, f_hi: f64::NAN, trusted: 0 };
    for (j, &w) in r.omegas.iter().enumerate() {
        if !mask[j] {
            continue;
        }
        let ex = analytic_permittivity(m, w);
        let t = analytic_transfer(ex, w, r.d);
        let refl = analytic_reflection(ex).unwrap_or(f64::NAN);
        let got = r.eps_approx[j];
        let im_scale = if ex.im.abs() > 1e-12 * ex.norm() { ex.im.abs() } else { ex.norm() };
        let refl_scale = if refl > 0.0 { refl } else { 1.0 };
        e.eps_re = e.eps_re.max((got.re - ex.re).abs() / ex.re.abs());
        e.eps_im = e.eps_im.max((got.im - ex.im).abs() / im_scale);
        e.refl = e.refl.max((r.refl_approx[j] - refl).abs() / refl_scale);
        e.t_re = e.t_re.max((r.t_approx[j].re - t.re).abs() / t.norm());
        e.t_im = e.t_im.max((r.t_approx[j].im - t.im).abs() / t.norm());
        let f = w / (2.0 * PI);
        e.f_lo = if e.trusted == 0 { f } else { e.f_lo.min(f) };
        e.f_hi = if e.trusted == 0 { f } else { e.f_hi.max(f) };
        e.trusted += 1;
    }
    e
}

/// Runs the FDTD problem for one medium with probes at the source and at
/// every configured offset.
pub fn simulate(f: &FdtdConfig, m: &PhysicalMedium, mode: HistoryMode) -> Result<FdtdOutput> {
    let src = f.source_index();
    let probes: Vec<usize> = std::iter::once(src).chain(f.offsets.iter().map(|&l| src + l)).collect();
    let grid = Grid1D::new(f.a, f.b, f.cells(), f.dt, src, probes)?;
    Ok(run_fdtd(&grid, m, &FdtdOptions::new(f.steps(), mode))?)
}

pub fn run_fdtd_recover(cfg: &RunConfig) -> Result<ResultRecord> {
    let f = cfg.fdtd_config();
    let om = omegas(&f);
    let panels = cfg.panel_list();
    let outs: Vec<(PhysicalMedium, FdtdOutput)> = panels
        .par_iter()
        .map(|&(a, b)| {
            let m = cfg.medium.with(a, b).physical()?;
            Ok((m, simulate(&f, &m, cfg.history_mode())?))
        })
        .collect::<Result<_>>()?;

    let mut rec = ResultRecord::new(cfg);
    let mut summary = Table::new(
        "recovery_summary",
        &["alpha", "beta", "l", "f_lo_hz", "f_hi_hz", "trusted", "err_eps_re", "err_eps_im", "err_refl", "err_t_re", "err_t_im"],
    );
    for (&(a, b), (m, out)) in panels.iter().zip(&outs) {
        let tag = super::tag(a, b);
        let s = &out.series;
        let mut cols = vec!["k".to_string(), "t_seconds".to_string()];
        cols.extend(s.probes.iter().map(|p| format!("E_{p}")));
        let mut probes = Table { name: format!("probes_{tag}"), columns: cols, rows: Vec::new() };
        for k in 0..s.data[0].len() {
            let mut row = vec![k as f64, k as f64 * s.dt];
            row.extend(s.data.iter().map(|d| d[k]));
            probes.push(row);
        }
        rec.tables.push(probes);

        for (i, &l) in f.offsets.iter().enumerate() {
            let d = l as f64 * f.dz;
            let r = recover(&s.data[0], &s.data[i + 1], f.dt, d, &om)?;
            let mask = trusted_mask(&r, f.dt, f.steps());
            let mut t = Table::new(
                format!("recovery_{tag}_l{l}"),
                &[
                    "freq_hz", "re_t_approx", "im_t_approx", "re_t", "im_t", "eps_re_approx", "eps_im_approx", "eps_re", "eps_im",
                    "refl_approx", "refl", "trusted",
                ],
            );
            for (j, &w) in om.iter().enumerate() {
                let ex = analytic_permittivity(m, w);
                let tr = analytic_transfer(ex, w, d);
                // ε = ε′ - iε″: the columns hold ε′ and ε″
                t.push(vec![
                    w / (2.0 * PI),
                    r.t_approx[j].re,
                    r.t_approx[j].im,
                    tr.re,
                    tr.im,
                    r.eps_approx[j].re,
                    -r.eps_approx[j].im,
                    ex.re,
                    -ex.im,
                    r.refl_approx[j],
                    analytic_reflection(ex).unwrap_or(f64::NAN),
                    if mask[j] { 1.0 } else { 0.0 },
                ]);
            }
            rec.tables.push(t);
            let causal = r.upsilon.iter().zip(&mask).filter(|(_, &ok)| ok).all(|(u, _)| u.1 < 0.0);
            rec.check(format!("causal {tag} l={l}"), causal, "Im Υ < 0 on the trusted band");
            let e = recovery_errors(m, &r, &mask);
            summary.push(vec![a, b, l as f64, e.f_lo, e.f_hi, e.trusted as f64, e.eps_re, e.eps_im, e.refl, e.t_re, e.t_im]);
            if let Some(tol) = cfg.checks.recovery_tol {
                rec.check(
                    format!("agreement {tag} l={l}"),
                    e.worst() <= tol,
                    format!(
                        "eps' {:.3e} eps'' {:.3e} |R| {:.3e} ReT {:.3e} ImT {:.3e} (tol {tol})",
                        e.eps_re, e.eps_im, e.refl, e.t_re, e.t_im
                    ),
                );
            }
        }
    }
    rec.tables.push(summary);
    Ok(rec)
}
