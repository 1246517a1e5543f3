//! Fast evaluation of the convolution history Σ_{j<k} ϖ_{k-j} E^j.
//!
//! The kernel t^{αβ-1} E^β_{α,αβ}(-ϱ t^α) is written as an inverse Laplace
//! integral of 1/(λ^α + ϱ)^β and discretized on one hyperbolic contour per
//! time window I_ℓ = [B^{ℓ-1}Δt, (2B^ℓ - 1)Δt]. Each contour node carries an
//! ODE state y' = λy + E(s) advanced exactly for piecewise-constant input, so
//! the work per step is O(N_col log_B N_t) vectors instead of O(N_t).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::prabhakar::{kernel_e, KernelSpec};
use crate::{Error, Result};

/// Sample points per window used by the reconstruction gate.
pub const GATE_SAMPLES: usize = 50;

const THETA_GRID: usize = 4000;

/// Ladder parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastParams {
    pub base: usize,
    pub ncol: usize,
    pub eps_f: f64,
}

impl Default for FastParams {
    fn default() -> Self {
        Self { base: 5, ncol: 30, eps_f: 1e-10 }
    }
}

/// One contour: nodes, folded trapezoid weights and symbol values.
#[derive(Debug, Clone)]
pub struct ContourLevel {
    pub level: usize,
    /// Covered window [t0, t1] in seconds (or scaled time).
    pub interval: (f64, f64),
    pub nodes: Vec<Complex64>,
    pub qweights: Vec<Complex64>,
    pub symbol_values: Vec<Complex64>,
    /// Gate error: max |error| / max(1, max |kernel|) over the window.
    pub achieved: f64,
}

impl ContourLevel {
    /// Im Σ_j ŵ_j e^{tλ_j} F_j.
    pub fn kernel_approx(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for ((&z, &w), &f) in self.nodes.iter().zip(&self.qweights).zip(&self.symbol_values) {
            acc += (w * f * (z * t).exp()).im;
        }
        acc
    }
}

// Weideman-Trefethen hyperbola z(u) = μ(1 + sin(iu - θ)) tuned for t ∈ [t0, Λ t0].
fn hyperbola(lambda: f64, n: usize) -> Option<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..THETA_GRID {
        let th = PI / 4.0 + 1e-3 + (PI / 4.0 - 2e-3) * i as f64 / (THETA_GRID - 1) as f64;
        let arg = ((PI - 2.0 * th) * lambda + (4.0 * th - PI)) / ((4.0 * th - PI) * th.sin());
        if arg < 1.0 {
            continue;
        }
        let a = arg.acosh();
        let score = (PI - 2.0 * th) / a;
        if best.map_or(true, |b| score > b.0) {
            best = Some((score, th, a));
        }
    }
    let (_, th, a) = best?;
    let h = a / n as f64;
    let r = PI * (4.0 * th - PI) * n as f64 / (lambda * a);
    Some((th, h, r))
}

/// Builds the contour for window ℓ and checks it against the kernel.
#[allow(clippy::too_many_arguments)]
pub fn build_level(
    alpha: f64,
    beta: f64,
    varrho: f64,
    dt: f64,
    level: usize,
    base: usize,
    ncol: usize,
    eps_f: f64,
) -> Result<ContourLevel> {
    if !(alpha.is_finite() && beta.is_finite() && varrho.is_finite() && dt.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(varrho > 0.0 && dt > 0.0) {
        return Err(Error::Domain("varrho and dt must be positive"));
    }
    if level == 0 || base < 2 || ncol == 0 {
        return Err(Error::Domain("need level >= 1, base >= 2, ncol >= 1"));
    }
    if !(eps_f > 0.0) {
        return Err(Error::Domain("eps_f must be positive"));
    }
    let spec = KernelSpec::new(alpha, beta, -varrho)?;
    let bl1 = (base as f64).powi(level as i32 - 1);
    let t0 = bl1 * dt;
    let t1 = (2.0 * bl1 * base as f64 - 1.0) * dt;
    let (th, h, r) = hyperbola(t1 / t0, ncol).ok_or(Error::Contour("no contour for window"))?;
    let mu = r / t0;

    let mut nodes = Vec::with_capacity(ncol);
    let mut qweights = Vec::with_capacity(ncol);
    let mut symbol_values = Vec::with_capacity(ncol);
    for k in 0..ncol {
        let u = (k as f64 + 0.5) * h;
        let arg = Complex64::new(-th, u);
        let z = (arg.sin() + 1.0) * mu;
        let dz = Complex64::new(0.0, mu) * arg.cos();
        nodes.push(z);
        qweights.push(dz * (h / PI));
        symbol_values.push((z.powf(alpha) + varrho).powf(-beta));
    }
    let mut lvl = ContourLevel {
        level,
        interval: (t0, t1),
        nodes,
        qweights,
        symbol_values,
        achieved: f64::INFINITY,
    };

    let mut err: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for i in 0..GATE_SAMPLES {
        let t = t0 + (t1 - t0) * i as f64 / (GATE_SAMPLES - 1) as f64;
        let exact = kernel_e(spec, alpha * beta, beta, t)?;
        err = err.max((lvl.kernel_approx(t) - exact).abs());
        scale = scale.max(exact.abs());
    }
    let achieved = err / scale;
    if !(achieved <= eps_f) {
        return Err(Error::Reconstruction { level, achieved, target: eps_f });
    }
    lvl.achieved = achieved;
    Ok(lvl)
}

// e^z - 1 without cancellation for small |z|.
fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(libm::expm1(z.re) * c - 2.0 * half * half, z.re.exp() * s)
}

// Per-level state. Positions are step indices b, with y(b) = ∫ over (start, b].
#[derive(Debug, Clone)]
struct LevelState {
    contour: ContourLevel,
    block: usize,
    stride: usize,
    limit: usize,
    decay: Vec<Complex64>,
    gain: Vec<Complex64>,
    acc_start: usize,
    acc: Vec<Complex64>,
    // last two multiples of `stride` inside the running block
    snaps: [(usize, Vec<Complex64>); 2],
    prev_total: Vec<Complex64>,
    prev_penult: Vec<Complex64>,
}

/// Contour ladder holding the compressed E history of one simulation.
#[derive(Debug, Clone)]
pub struct HistoryLadder {
    params: FastParams,
    dt: f64,
    dofs: usize,
    k_max: usize,
    next: usize,
    levels: Vec<LevelState>,
    ops: u64,
}

impl HistoryLadder {
    /// Ladder for `dofs` unknowns, able to serve history_eval up to `k_max`.
    pub fn new(alpha: f64, beta: f64, varrho: f64, dt: f64, dofs: usize, k_max: usize, params: FastParams) -> Result<Self> {
        let b = params.base;
        if b < 2 {
            return Err(Error::Domain("base must be at least 2"));
        }
        let mut depth = 1;
        while k_max >= 2 * b.pow(depth as u32) {
            depth += 1;
        }
        let n = params.ncol * dofs;
        let mut levels = Vec::with_capacity(depth);
        for l in 1..=depth {
            let contour = build_level(alpha, beta, varrho, dt, l, b, params.ncol, params.eps_f)?;
            let block = b.pow(l as u32);
            let stride = b.pow(l as u32 - 1);
            let limit = if l == 1 { k_max.saturating_sub(1) } else { stride * (k_max / stride).saturating_sub(1) };
            let decay = contour.nodes.iter().map(|&z| (z * dt).exp()).collect();
            let gain = contour.nodes.iter().map(|&z| expm1(z * dt) / z).collect();
            levels.push(LevelState {
                contour,
                block,
                stride,
                limit,
                decay,
                gain,
                acc_start: 0,
                acc: vec![Complex64::new(0.0, 0.0); n],
                snaps: [(0, vec![Complex64::new(0.0, 0.0); n]), (0, vec![Complex64::new(0.0, 0.0); n])],
                prev_total: vec![Complex64::new(0.0, 0.0); n],
                prev_penult: vec![Complex64::new(0.0, 0.0); n],
            });
        }
        Ok(Self { params, dt, dofs, k_max, next: 1, levels, ops: 0 })
    }

    pub fn params(&self) -> FastParams {
        self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn contours(&self) -> impl Iterator<Item = &ContourLevel> {
        self.levels.iter().map(|l| &l.contour)
    }

    /// Number of (level, node) ODE states.
    pub fn state_count(&self) -> usize {
        self.levels.len() * self.params.ncol
    }

    /// Complex node-times-dof updates performed so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Feeds E^k once step k has been completed.
    pub fn push(&mut self, e: &[f64], k: usize) -> Result<()> {
        if k != self.next {
            return Err(Error::OutOfOrder { expected: self.next, got: k });
        }
        if e.len() != self.dofs {
            return Err(Error::Dimension { expected: self.dofs, got: e.len() });
        }
        let dofs = self.dofs;
        for lv in &mut self.levels {
            if k > lv.limit {
                continue;
            }
            for (j, y) in lv.acc.chunks_exact_mut(dofs.max(1)).enumerate() {
                let (a, g) = (lv.decay[j], lv.gain[j]);
                for (yd, &ed) in y.iter_mut().zip(e) {
                    *yd = a * *yd + g * ed;
                }
            }
            self.ops += (lv.contour.nodes.len() * dofs) as u64;
            if k % lv.stride == 0 {
                // keep the two most recent stride multiples
                let older = if lv.snaps[0].0 <= lv.snaps[1].0 { 0 } else { 1 };
                lv.snaps[older].0 = k;
                lv.snaps[older].1.copy_from_slice(&lv.acc);
            }
            if k == lv.acc_start + lv.block {
                let pen = lv.acc_start + lv.block - lv.stride;
                if pen == lv.acc_start {
                    lv.prev_penult.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                } else {
                    let src = lv.snaps.iter().position(|s| s.0 == pen).ok_or(Error::Capacity(k))?;
                    let (pp, snaps) = (&mut lv.prev_penult, &lv.snaps);
                    pp.copy_from_slice(&snaps[src].1);
                }
                core::mem::swap(&mut lv.prev_total, &mut lv.acc);
                lv.acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                lv.acc_start = k;
            }
        }
        self.next += 1;
        Ok(())
    }

    /// Adds Σ_{j=1}^{k-1} ϖ_{k-j} E^j (up to the contour error) into `out`.
    pub fn history_eval(&mut self, k: usize, out: &mut [f64]) -> Result<()> {
        if k != self.next {
            return Err(Error::OutOfOrder { expected: self.next, got: k });
        }
        if k > self.k_max {
            return Err(Error::Capacity(k));
        }
        if out.len() != self.dofs {
            return Err(Error::Dimension { expected: self.dofs, got: out.len() });
        }
        let dofs = self.dofs;
        let dt = self.dt;
        for (idx, lv) in self.levels.iter().enumerate() {
            let l = idx + 1;
            let bl = lv.block;
            let bl1 = lv.stride;
            let s_prev = if l == 1 { k - 1 } else { (bl1 * (k / bl1)).saturating_sub(bl1) };
            let s_cur = (bl * (k / bl)).saturating_sub(bl);
            if s_prev <= s_cur {
                continue;
            }
            let lag = (k - s_prev) as f64 * dt;
            let cur = k - 1;
            // Y(s_cur, s_prev) = carry * prev + snap(s_prev)
            let (prev, carry_steps): (Option<&[Complex64]>, usize) = if s_cur == lv.acc_start {
                (None, 0)
            } else if s_prev + bl1 == lv.acc_start {
                (Some(&lv.prev_penult), usize::MAX)
            } else if s_prev == lv.acc_start {
                (Some(&lv.prev_total), usize::MAX)
            } else {
                (Some(&lv.prev_total), s_prev - lv.acc_start)
            };
            let snap: Option<&[Complex64]> = if carry_steps == usize::MAX || s_prev == lv.acc_start {
                None
            } else if s_prev == cur {
                Some(&lv.acc)
            } else {
                let i = lv.snaps.iter().position(|s| s.0 == s_prev).ok_or(Error::Capacity(k))?;
                Some(&lv.snaps[i].1)
            };
            for j in 0..lv.contour.nodes.len() {
                let z = lv.contour.nodes[j];
                let c = lv.contour.qweights[j] * lv.contour.symbol_values[j] * (z * lag).exp();
                let rng = j * dofs..(j + 1) * dofs;
                if let Some(p) = prev {
                    let cp = if carry_steps == usize::MAX { c } else { c * (z * (carry_steps as f64 * dt)).exp() };
                    for (o, y) in out.iter_mut().zip(&p[rng.clone()]) {
                        *o += cp.re * y.im + cp.im * y.re;
                    }
                }
                if let Some(s) = snap {
                    for (o, y) in out.iter_mut().zip(&s[rng]) {
                        *o += c.re * y.im + c.im * y.re;
                    }
                }
            }
            self.ops += (lv.contour.nodes.len() * dofs) as u64;
        }
        Ok(())
    }
}
