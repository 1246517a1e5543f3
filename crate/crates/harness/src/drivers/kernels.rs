use hn_core::fastconv::HistoryLadder;
use hn_core::prabhakar::{kernel_e, weight_sum, weights, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::Result;
use crate::record::{ResultRecord, Table};

pub fn run_kernel_eval(cfg: &RunConfig) -> Result<ResultRecord> {
    let k = cfg.kernel_config();
    let mut rec = ResultRecord::new(cfg);
    for (a, b) in cfg.panel_list() {
        let spec = KernelSpec::new(a, b, k.sigma)?;
        let (mu, gamma) = (k.mu.unwrap_or(a * b), k.gamma.unwrap_or(b));
        let mut t = Table::new(format!("kernel_{}", super::tag(a, b)), &["t", "value"]);
        for &x in &k.times {
            t.push(vec![x, kernel_e(spec, mu, gamma, x)?]);
        }
        rec.tables.push(t);
    }
    Ok(rec)
}

pub fn run_weights_dump(cfg: &RunConfig) -> Result<ResultRecord> {
    let dt = cfg.dt_required()?;
    let kk = cfg.k.expect("validated");
    let sigma = cfg.kernel_config().sigma;
    let mut rec = ResultRecord::new(cfg);
    for (a, b) in cfg.panel_list() {
        let spec = KernelSpec::new(a, b, sigma)?;
        let w = weights(spec, dt, kk)?;
        let mut t = Table::new(format!("weights_{}", super::tag(a, b)), &["j", "w", "partial_sum"]);
        let mut s = 0.0;
        for (j, &v) in w.w.iter().enumerate() {
            s += v;
            t.push(vec![j as f64, v, s]);
        }
        let closed = weight_sum(spec, dt, kk)?;
        let tag = super::tag(a, b);
        let tol = cfg.checks.weight_sum_tol;
        let min = w.w.iter().copied().fold(f64::INFINITY, f64::min);
        rec.check(format!("nonnegative {tag}"), min >= 0.0, format!("min w = {min:e}"));
        let rises = w.w.windows(2).filter(|p| p[1] > p[0]).count();
        rec.check(format!("nonincreasing {tag}"), rises == 0, format!("{rises} increases"));
        rec.check(format!("sum {tag}"), (s - closed).abs() <= tol, format!("|{s:.15e} - {closed:.15e}| <= {tol:.1e}"));
        rec.tables.push(t);
    }
    Ok(rec)
}

/// Drives a history ladder over seeded uniform data and compares it with
/// the direct sum at every step.
pub fn run_fastconv_verify(cfg: &RunConfig) -> Result<ResultRecord> {
    let dt = cfg.dt_required()?;
    let steps = cfg.nt.expect("validated");
    let kc = cfg.kernel_config();
    let dofs = kc.dofs.max(1);
    let p = cfg.fast.params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seq: Vec<Vec<f64>> = (0..steps).map(|_| (0..dofs).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();

    let mut rec = ResultRecord::new(cfg);
    for (a, b) in cfg.panel_list() {
        let spec = KernelSpec::new(a, b, -kc.varrho)?;
        let w = weights(spec, dt, steps + 1)?;
        let mut lad = HistoryLadder::new(a, b, kc.varrho, dt, dofs, steps, p)?;
        let mut levels = Table::new(format!("levels_{}", super::tag(a, b)), &["level", "t_lo", "t_hi", "achieved"]);
        for c in lad.contours() {
            levels.push(vec![c.level as f64, c.interval.0, c.interval.1, c.achieved]);
        }
        let mut gaps = Table::new(format!("gap_{}", super::tag(a, b)), &["k", "max_abs_gap"]);
        let mut worst: f64 = 0.0;
        let mut fast = vec![0.0; dofs];
        for k in 1..=steps {
            fast.iter_mut().for_each(|v| *v = 0.0);
            lad.history_eval(k, &mut fast)?;
            let mut g: f64 = 0.0;
            for (d, fv) in fast.iter().enumerate() {
                let direct: f64 = (1..k).map(|j| w.w[k - j] * seq[j - 1][d]).sum();
                g = g.max((fv - direct).abs());
            }
            worst = worst.max(g);
            gaps.push(vec![k as f64, g]);
            lad.push(&seq[k - 1], k)?;
        }
        let tol = cfg.checks.fastconv_tol.unwrap_or(10.0 * p.eps_f * steps as f64);
        rec.check(format!("fast history {}", super::tag(a, b)), worst <= tol, format!("{worst:.3e} <= {tol:.1e}"));
        rec.tables.push(levels);
        rec.tables.push(gaps);
    }
    Ok(rec)
}
