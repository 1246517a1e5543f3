use std::time::Instant;

use hn_core::spectral2d::{assemble, build_space, GalerkinOperators, Rect};
use hn_core::timestepper::{run, FieldState, HistoryMode, MediumParams, RunOptions};
use rayon::prelude::*;

use crate::config::{Mode, RunConfig};
use crate::error::Result;
use crate::manufactured::{exact_e, exact_h, exact_p, ManufacturedSource};
use crate::record::{orders, ResultRecord, Table};

/// Errors of one manufactured-solution run at its final time.
#[derive(Debug, Clone)]
pub struct ManufacturedRun {
    pub dt: f64,
    pub steps: usize,
    pub err: [f64; 3],
    pub state: FieldState,
    pub history_ops: u64,
    pub seconds: f64,
}

/// Solves the manufactured problem to `t_end` with `steps` steps.
pub fn manufactured_run(ops: &GalerkinOperators, m: MediumParams, t_end: f64, steps: usize, mode: HistoryMode) -> Result<ManufacturedRun> {
    let sp = &ops.space;
    let dt = t_end / steps as f64;
    let src = ManufacturedSource::new(ops, m);
    let init = sp.interpolate_init(|_, _| (0.0, 0.0), |_, _| 0.0)?;
    let t0 = Instant::now();
    let mut opts = RunOptions::new(dt, steps, mode);
    opts.memory_budget = usize::MAX;
    let out = run(ops, m, init, &opts, Some(&src))?;
    let seconds = t0.elapsed().as_secs_f64();
    let s = out.final_state;
    let t = s.t;
    let err = [
        sp.l2_error_e(&s.e, exact_e(&m, t)),
        sp.l2_error_h(&s.h, exact_h(&m, t)),
        sp.l2_error_e(&s.p, exact_p(&m, t)),
    ];
    Ok(ManufacturedRun { dt, steps, err, state: s, history_ops: out.history_ops, seconds })
}

/// Discrete L² norms of the (E, H, P) differences of two runs.
pub fn field_gap(ops: &GalerkinOperators, a: &FieldState, b: &FieldState) -> [f64; 3] {
    let sp = &ops.space;
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| u - v).collect::<Vec<_>>();
    [
        sp.l2_error_e(&d(&a.e, &b.e), |_, _| (0.0, 0.0)),
        sp.l2_error_h(&d(&a.h, &b.h), |_, _| 0.0),
        sp.l2_error_e(&d(&a.p, &b.p), |_, _| (0.0, 0.0)),
    ]
}

fn steps_for(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round().max(1.0) as usize
}

pub fn run_time_convergence(cfg: &RunConfig) -> Result<ResultRecord> {
    let n = cfg.n_required()?;
    let t_end = cfg.t_required()?;
    let ops = assemble(build_space(n, Rect::REFERENCE)?);
    let mode = cfg.history_mode();
    let other = match cfg.mode {
        Mode::Direct => HistoryMode::Fast(cfg.fast.params()),
        Mode::Fast => HistoryMode::Direct,
    };
    let mut rec = ResultRecord::new(cfg);
    let mut cols = vec!["dt", "steps", "err_e", "order_e", "err_h", "order_h", "err_p", "order_p", "ref_slope"];
    if cfg.compare_modes {
        cols.extend(["gap_e", "gap_h", "gap_p"]);
    }

    for (a, b) in cfg.panel_list() {
        let m = cfg.medium.with(a, b).scaled()?;
        let rows: Vec<(ManufacturedRun, Option<[f64; 3]>)> = cfg
            .dts
            .par_iter()
            .map(|&dt| {
                let steps = steps_for(t_end, dt);
                let r = manufactured_run(&ops, m, t_end, steps, mode)?;
                let gap = if cfg.compare_modes {
                    let o = manufactured_run(&ops, m, t_end, steps, other)?;
                    Some(field_gap(&ops, &r.state, &o.state))
                } else {
                    None
                };
                Ok((r, gap))
            })
            .collect::<Result<_>>()?;

        let dts: Vec<f64> = rows.iter().map(|r| r.0.dt).collect();
        let ord: Vec<Vec<f64>> = (0..3).map(|f| orders(&dts, &rows.iter().map(|r| r.0.err[f]).collect::<Vec<_>>())).collect();
        let mut t = Table::new(format!("errors_{}", super::tag(a, b)), &cols);
        for (i, (r, gap)) in rows.iter().enumerate() {
            let mut row = vec![r.dt, r.steps as f64, r.err[0], ord[0][i], r.err[1], ord[1][i], r.err[2], ord[2][i], 0.5 * r.dt];
            if let Some(g) = gap {
                row.extend(g);
            }
            t.push(row);
        }
        if let Some([lo, hi]) = cfg.checks.order_range {
            let obs: Vec<f64> = ord.iter().flatten().copied().filter(|v| !v.is_nan()).collect();
            let ok = obs.iter().all(|&o| o >= lo && o <= hi);
            rec.check(format!("orders {}", super::tag(a, b)), ok, format!("observed {obs:.3?} vs [{lo}, {hi}]"));
        }
        if let Some(tol) = cfg.checks.mode_gap {
            let worst = rows.iter().filter_map(|r| r.1).flatten().fold(0.0f64, f64::max);
            rec.check(format!("mode gap {}", super::tag(a, b)), worst <= tol, format!("{worst:.3e} <= {tol:.1e}"));
        }
        rec.tables.push(t);
    }
    Ok(rec)
}

pub fn run_space_convergence(cfg: &RunConfig) -> Result<ResultRecord> {
    let dt = cfg.dt_required()?;
    let t_end = cfg.t_required()?;
    let steps = steps_for(t_end, dt);
    let mode = cfg.history_mode();
    let mut rec = ResultRecord::new(cfg);
    let mut ns = cfg.ns.clone();
    ns.sort_unstable();
    let spaces: Vec<GalerkinOperators> = ns
        .iter()
        .map(|&n| Ok(assemble(build_space(n, Rect::REFERENCE)?)))
        .collect::<Result<_>>()?;
    let fine = spaces.last().expect("validated");

    let panels = cfg.panel_list();
    // one job per (panel, N) plus a 2Δt run at the largest N for the temporal floor
    let jobs: Vec<(usize, Option<usize>)> = (0..panels.len())
        .flat_map(|p| (0..ns.len()).map(move |i| (p, Some(i))).chain([(p, None)]))
        .collect();
    let results: Vec<ManufacturedRun> = jobs
        .par_iter()
        .map(|&(p, i)| {
            let m = cfg.medium.with(panels[p].0, panels[p].1).scaled()?;
            match i {
                Some(i) => manufactured_run(&spaces[i], m, t_end, steps, mode),
                None => manufactured_run(fine, m, t_end, steps.div_ceil(2), mode),
            }
        })
        .collect::<Result<_>>()?;

    for (p, &(a, b)) in panels.iter().enumerate() {
        let base = p * (ns.len() + 1);
        let runs = &results[base..base + ns.len()];
        let coarse = &results[base + ns.len()];
        let floor: Vec<f64> = (0..3).map(|f| (coarse.err[f] - runs[ns.len() - 1].err[f]).abs()).collect();
        let mut t = Table::new(
            format!("space_{}", super::tag(a, b)),
            &["N", "err_e", "err_h", "err_p", "floor_e", "floor_h", "floor_p", "seconds"],
        );
        for (r, &n) in runs.iter().zip(&ns) {
            t.push(vec![n as f64, r.err[0], r.err[1], r.err[2], floor[0], floor[1], floor[2], r.seconds]);
        }
        let (ok, detail) = spectral_decay(&ns, runs, &floor);
        rec.check(format!("spectral decay {}", super::tag(a, b)), ok, detail);
        rec.tables.push(t);
    }
    Ok(rec)
}

/// Each +4 step in N must cut the error tenfold or land within 10× of the
/// temporal floor.
pub fn spectral_decay(ns: &[usize], runs: &[ManufacturedRun], floor: &[f64]) -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for i in 0..ns.len() {
        for j in i + 1..ns.len() {
            if ns[j] != ns[i] + 4 {
                continue;
            }
            for f in 0..3 {
                let (e0, e1) = (runs[i].err[f], runs[j].err[f]);
                let pass = e1.is_finite() && (e1 <= e0 / 10.0 || e1 <= 10.0 * floor[f]);
                ok &= pass;
                if !pass {
                    notes.push(format!("field {f}: N={} {e0:.3e} -> N={} {e1:.3e} (floor {:.3e})", ns[i], ns[j], floor[f]));
                }
            }
        }
    }
    let detail = if notes.is_empty() { "ok".to_string() } else { notes.join("; ") };
    (ok, detail)
}
