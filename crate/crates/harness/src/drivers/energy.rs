use std::f64::consts::{FRAC_1_SQRT_2, PI};

use hn_core::spectral2d::{assemble, build_space, GalerkinOperators, Rect};
use hn_core::timestepper::{run, EnergyTrace, FieldState, HistoryMode, MediumParams, RunOptions};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::Result;
use crate::record::{ResultRecord, Table};

/// E0 = (cos πx sin πy, -sin πx cos πy)/√2, H0 = 0.
pub fn decay_initial(ops: &GalerkinOperators) -> Result<FieldState> {
    Ok(ops.space.interpolate_init(
        |x, y| {
            (FRAC_1_SQRT_2 * (PI * x).cos() * (PI * y).sin(), -FRAC_1_SQRT_2 * (PI * x).sin() * (PI * y).cos())
        },
        |_, _| 0.0,
    )?)
}

/// Source-free run from `init`, returning the per-step energy trace.
pub fn energy_trace(ops: &GalerkinOperators, m: MediumParams, init: FieldState, dt: f64, steps: usize, mode: HistoryMode) -> Result<EnergyTrace> {
    let mut opts = RunOptions::new(dt, steps, mode);
    opts.memory_budget = usize::MAX;
    Ok(run(ops, m, init, &opts, None)?.trace)
}

pub fn run_energy(cfg: &RunConfig) -> Result<ResultRecord> {
    let n = cfg.n_required()?;
    let steps = cfg.nt.expect("validated");
    let dts: Vec<f64> = if cfg.dts.is_empty() { vec![cfg.dt.expect("validated")] } else { cfg.dts.clone() };
    let ops = assemble(build_space(n, Rect::REFERENCE)?);
    let init = decay_initial(&ops)?;
    let jobs: Vec<((f64, f64), f64)> = cfg.panel_list().into_iter().flat_map(|p| dts.iter().map(move |&d| (p, d))).collect();
    let traces: Vec<EnergyTrace> = jobs
        .par_iter()
        .map(|&((a, b), dt)| energy_trace(&ops, cfg.medium.with(a, b).scaled()?, init.clone(), dt, steps, cfg.history_mode()))
        .collect::<Result<_>>()?;

    let mut rec = ResultRecord::new(cfg);
    for (((a, b), dt), tr) in jobs.iter().zip(&traces) {
        let name = format!("energy_{}_dt{dt}", super::tag(*a, *b));
        let mut t = Table::new(&name, &["k", "t", "energy", "plain", "norm_e", "norm_h", "norm_p", "p_bound"]);
        for r in &tr.rows {
            t.push(vec![r.k as f64, r.t, r.energy, r.plain, r.norm_e, r.norm_h, r.norm_p, r.p_bound]);
        }
        let rise = tr.max_increase();
        let allowed = cfg.checks.energy_tol * tr.initial();
        rec.check(format!("monotone {name}"), rise <= allowed, format!("max increase {rise:.3e}, allowed {allowed:.3e}"));
        rec.tables.push(t);
    }
    Ok(rec)
}
