use hn_core::spectral2d::{assemble, build_space, Rect};
use hn_core::timestepper::HistoryMode;

use super::convergence::manufactured_run;
use crate::config::RunConfig;
use crate::error::Result;
use crate::record::{ResultRecord, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub nt: usize,
    pub direct_seconds: f64,
    pub fast_seconds: f64,
    pub direct_ops: u64,
    pub fast_ops: u64,
}

/// Ratios of consecutive op counts, NaN unless N_t doubled.
pub fn doubling_ratios(nts: &[usize], ops: &[u64]) -> Vec<f64> {
    let mut r = vec![f64::NAN; ops.len()];
    for i in 1..ops.len() {
        if nts[i] == 2 * nts[i - 1] {
            r[i] = ops[i] as f64 / ops[i - 1] as f64;
        }
    }
    r
}

/// Runs the manufactured problem in both modes for every N_t, one after
/// the other so wall times are not skewed by sharing cores.
pub fn timing_rows(cfg: &RunConfig) -> Result<Vec<TimingRow>> {
    let n = cfg.n_required()?;
    let t_end = cfg.t_required()?;
    let m = cfg.medium.scaled()?;
    let ops = assemble(build_space(n, Rect::REFERENCE)?);
    cfg.nts
        .iter()
        .map(|&nt| {
            let d = manufactured_run(&ops, m, t_end, nt, HistoryMode::Direct)?;
            let f = manufactured_run(&ops, m, t_end, nt, HistoryMode::Fast(cfg.fast.params()))?;
            Ok(TimingRow { nt, direct_seconds: d.seconds, fast_seconds: f.seconds, direct_ops: d.history_ops, fast_ops: f.history_ops })
        })
        .collect()
}

pub fn run_timing(cfg: &RunConfig) -> Result<ResultRecord> {
    let rows = timing_rows(cfg)?;
    let nts: Vec<usize> = rows.iter().map(|r| r.nt).collect();
    let rd = doubling_ratios(&nts, &rows.iter().map(|r| r.direct_ops).collect::<Vec<_>>());
    let rf = doubling_ratios(&nts, &rows.iter().map(|r| r.fast_ops).collect::<Vec<_>>());
    let mut t = Table::new(
        "timing",
        &["Nt", "direct_seconds", "fast_seconds", "time_ratio", "direct_ops", "fast_ops", "direct_ops_ratio", "fast_ops_ratio"],
    );
    for (i, r) in rows.iter().enumerate() {
        t.push(vec![
            r.nt as f64,
            r.direct_seconds,
            r.fast_seconds,
            r.fast_seconds / r.direct_seconds,
            r.direct_ops as f64,
            r.fast_ops as f64,
            rd[i],
            rf[i],
        ]);
    }
    let mut rec = ResultRecord::new(cfg);
    if let Some([lo, hi]) = cfg.checks.direct_ratio {
        let obs: Vec<f64> = rd.iter().copied().filter(|v| !v.is_nan()).collect();
        rec.check("direct op ratio", obs.iter().all(|&v| v >= lo && v <= hi), format!("{obs:.3?} in [{lo}, {hi}]"));
    }
    if let Some(hi) = cfg.checks.fast_ratio_max {
        let obs: Vec<f64> = rf.iter().copied().filter(|v| !v.is_nan()).collect();
        rec.check("fast op ratio", obs.iter().all(|&v| v <= hi), format!("{obs:.3?} <= {hi}"));
    }
    rec.tables.push(t);
    Ok(rec)
}
