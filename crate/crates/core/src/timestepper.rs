//! Backward-Euler convolution-quadrature stepping of the E/H/P system.
//!
//! With coefficient vectors E, H, mass matrices M_E, M_H and the weak curl
//! C (E-space to H-test space), one step solves
//!
//! ```text
//! [ c M_E   -dt Cᵀ ] [E^k]   [ M_E(ε∞E^{k-1} + P^{k-1} - Δε(hist + h^k)) + dt F ]
//! [ dt C     M_H   ] [H^k] = [ M_H H^{k-1} + dt G                              ]
//! ```
//!
//! with c = ε∞ + Δε ϖ_0, hist = Σ_{j<k} ϖ_{k-j} E^j, and then sets
//! P^k = Δε(ϖ_0 E^k + hist + h^k).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
#[allow(unused_imports)]
use num_traits::Float;

use crate::fastconv::{FastParams, HistoryLadder};
use crate::prabhakar::{weights, KernelSpec, WeightTable};
use crate::{Error, Result};

/// Default cap on stored history values in direct mode (8 bytes each).
pub const DEFAULT_MEMORY_BUDGET: usize = 200_000_000;

/// Scaled H-N medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    pub eps_inf: f64,
    pub eps_s: f64,
    pub delta_eps: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl MediumParams {
    pub fn new(eps_inf: f64, eps_s: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(eps_inf.is_finite() && eps_s.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(eps_inf >= 1.0 && eps_s > eps_inf) {
            return Err(Error::Domain("need eps_s > eps_inf >= 1"));
        }
        KernelSpec::scaled(alpha, beta)?;
        Ok(Self { eps_inf, eps_s, delta_eps: eps_s - eps_inf, alpha, beta })
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec { alpha: self.alpha, beta: self.beta, sigma: -1.0 }
    }
}

/// Fields at step k.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    pub p: Vec<f64>,
    pub k: usize,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(ne: usize, nh: usize) -> Self {
        Self { e: vec![0.0; ne], h: vec![0.0; nh], p: vec![0.0; ne], k: 0, t: 0.0 }
    }

    /// Initial state with P^0 = 0.
    pub fn initial(e: Vec<f64>, h: Vec<f64>) -> Self {
        let p = vec![0.0; e.len()];
        Self { e, h, p, k: 0, t: 0.0 }
    }
}

/// Solver of the per-step saddle system for fixed (c, dt).
pub trait StepSolver {
    fn solve(&self, re: &[f64], rh: &[f64], e: &mut [f64], h: &mut [f64]) -> Result<()>;
}

/// Spatial discretization seen by the stepper.
pub trait SpatialOps {
    type Solver: StepSolver;

    fn dofs_e(&self) -> usize;
    fn dofs_h(&self) -> usize;
    fn mass_e(&self, x: &[f64], out: &mut [f64]);
    fn mass_h(&self, x: &[f64], out: &mut [f64]);
    /// out = C e, the pairing (curl E, ψ).
    fn curl(&self, e: &[f64], out: &mut [f64]);
    /// out = Cᵀ h, the pairing (H, curl φ).
    fn curl_t(&self, h: &[f64], out: &mut [f64]);
    fn factor(&self, c: f64, dt: f64) -> Result<Self::Solver>;

    fn norm2_e(&self, x: &[f64]) -> f64 {
        let mut m = vec![0.0; x.len()];
        self.mass_e(x, &mut m);
        dot(x, &m)
    }

    fn norm2_h(&self, x: &[f64]) -> f64 {
        let mut m = vec![0.0; x.len()];
        self.mass_h(x, &mut m);
        dot(x, &m)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loads at t_k: f and g are test-space load vectors, h is a P-space
/// coefficient vector.
pub trait Forcing {
    fn eval(&self, k: usize, t: f64, f: &mut [f64], g: &mut [f64], h: &mut [f64]);

    fn has_h(&self) -> bool {
        false
    }
}

/// Dense mock backend: arbitrary SPD masses and curl matrix.
#[derive(Debug, Clone)]
pub struct DenseOps {
    pub me: DMatrix<f64>,
    pub mh: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl DenseOps {
    pub fn new(me: DMatrix<f64>, mh: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let (ne, nh) = (me.nrows(), mh.nrows());
        if me.ncols() != ne || mh.ncols() != nh {
            return Err(Error::Dimension { expected: ne, got: me.ncols() });
        }
        if c.nrows() != nh || c.ncols() != ne {
            return Err(Error::Dimension { expected: nh * ne, got: c.nrows() * c.ncols() });
        }
        Ok(Self { me, mh, c })
    }
}

/// Schur complement in E: (c M_E + dt² Cᵀ M_H⁻¹ C) E = re + dt Cᵀ M_H⁻¹ rh.
#[derive(Debug, Clone)]
pub struct DenseSolver {
    schur: Cholesky<f64, Dyn>,
    mh: Cholesky<f64, Dyn>,
    c: DMatrix<f64>,
    dt: f64,
}

impl StepSolver for DenseSolver {
    fn solve(&self, re: &[f64], rh: &[f64], e: &mut [f64], h: &mut [f64]) -> Result<()> {
        let rh = DVector::from_column_slice(rh);
        let w = self.mh.solve(&rh);
        let rhs = DVector::from_column_slice(re) + self.c.tr_mul(&w) * self.dt;
        let ev = self.schur.solve(&rhs);
        let hv = self.mh.solve(&(rh - &self.c * &ev * self.dt));
        e.copy_from_slice(ev.as_slice());
        h.copy_from_slice(hv.as_slice());
        Ok(())
    }
}

impl SpatialOps for DenseOps {
    type Solver = DenseSolver;

    fn dofs_e(&self) -> usize {
        self.me.nrows()
    }

    fn dofs_h(&self) -> usize {
        self.mh.nrows()
    }

    fn mass_e(&self, x: &[f64], out: &mut [f64]) {
        let v = &self.me * DVector::from_column_slice(x);
        out.copy_from_slice(v.as_slice());
    }

    fn mass_h(&self, x: &[f64], out: &mut [f64]) {
        let v = &self.mh * DVector::from_column_slice(x);
        out.copy_from_slice(v.as_slice());
    }

    fn curl(&self, e: &[f64], out: &mut [f64]) {
        let v = &self.c * DVector::from_column_slice(e);
        out.copy_from_slice(v.as_slice());
    }

    fn curl_t(&self, h: &[f64], out: &mut [f64]) {
        let v = self.c.tr_mul(&DVector::from_column_slice(h));
        out.copy_from_slice(v.as_slice());
    }

    fn factor(&self, c: f64, dt: f64) -> Result<DenseSolver> {
        let mh = Cholesky::new(self.mh.clone()).ok_or(Error::Solver("H mass not positive definite"))?;
        let w = mh.solve(&self.c);
        let schur = &self.me * c + self.c.tr_mul(&w) * (dt * dt);
        let schur = Cholesky::new(schur).ok_or(Error::Solver("step matrix not positive definite"))?;
        Ok(DenseSolver { schur, mh, c: self.c.clone(), dt })
    }
}

/// How the convolution history is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryMode {
    Direct,
    Fast(FastParams),
}

enum History {
    Direct { past: Vec<f64> },
    Fast(HistoryLadder),
}

/// One row of the energy trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub k: usize,
    pub t: f64,
    /// Modified energy ε∞‖E‖² + ‖H‖² + Δε Σ ϖ_{k-j}‖E^j‖².
    pub energy: f64,
    /// ε∞‖E‖² + ‖H‖².
    pub plain: f64,
    pub norm_e: f64,
    pub norm_h: f64,
    pub norm_p: f64,
    /// Δε (Σ_{j<k} ϖ_j) max_{1≤j≤k} ‖E^j‖.
    pub p_bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub rows: Vec<EnergyRow>,
}

impl EnergyTrace {
    /// Largest ℰ^k - ℰ^{k-1}.
    pub fn max_increase(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].energy - w[0].energy).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn initial(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.energy)
    }
}

/// Run controls.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub dt: f64,
    pub steps: usize,
    pub mode: HistoryMode,
    /// Step indices to keep full snapshots of.
    pub snapshots: Vec<usize>,
    pub memory_budget: usize,
}

impl RunOptions {
    pub fn new(dt: f64, steps: usize, mode: HistoryMode) -> Self {
        Self { dt, steps, mode, snapshots: Vec::new(), memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

/// Sequential stepper owning the history of one simulation.
pub struct Stepper<'a, O: SpatialOps> {
    ops: &'a O,
    medium: MediumParams,
    dt: f64,
    weights: WeightTable,
    solver: O::Solver,
    history: History,
    state: FieldState,
    norms2: Vec<f64>,
    max_norm_e: f64,
    history_ops: u64,
    buf: Scratch,
}

struct Scratch {
    hist: Vec<f64>,
    tmp: Vec<f64>,
    re: Vec<f64>,
    rh: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    hh: Vec<f64>,
}

impl<'a, O: SpatialOps> Stepper<'a, O> {
    /// Prepares a run of at most `steps` steps from `init`.
    pub fn new(ops: &'a O, medium: MediumParams, init: FieldState, dt: f64, steps: usize, mode: HistoryMode, budget: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain("dt must be positive"));
        }
        let (ne, nh) = (ops.dofs_e(), ops.dofs_h());
        if init.e.len() != ne || init.p.len() != ne {
            return Err(Error::Dimension { expected: ne, got: init.e.len() });
        }
        if init.h.len() != nh {
            return Err(Error::Dimension { expected: nh, got: init.h.len() });
        }
        let weights = weights(medium.kernel(), dt, steps.max(1))?;
        let c = medium.eps_inf + medium.delta_eps * weights.w[0];
        let solver = ops.factor(c, dt)?;
        let history = match mode {
            HistoryMode::Direct => {
                let needed = steps.saturating_mul(ne);
                if needed > budget {
                    return Err(Error::MemoryBudget { needed, budget });
                }
                History::Direct { past: Vec::with_capacity(needed) }
            }
            HistoryMode::Fast(p) => History::Fast(HistoryLadder::new(medium.alpha, medium.beta, 1.0, dt, ne, steps.max(1), p)?),
        };
        Ok(Self {
            ops,
            medium,
            dt,
            weights,
            solver,
            history,
            state: init,
            norms2: Vec::with_capacity(steps),
            max_norm_e: 0.0,
            history_ops: 0,
            buf: Scratch {
                hist: vec![0.0; ne],
                tmp: vec![0.0; ne],
                re: vec![0.0; ne],
                rh: vec![0.0; nh],
                f: vec![0.0; ne],
                g: vec![0.0; nh],
                hh: vec![0.0; ne],
            },
        })
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    /// Complex (or real, in direct mode) history updates performed so far.
    pub fn history_ops(&self) -> u64 {
        match &self.history {
            History::Direct { .. } => self.history_ops,
            History::Fast(l) => l.ops(),
        }
    }

    /// Advances one step.
    pub fn step(&mut self, forcing: Option<&dyn Forcing>) -> Result<()> {
        let k = self.state.k + 1;
        if k > self.weights.len() {
            return Err(Error::Capacity(k));
        }
        let ne = self.state.e.len();
        let w = &self.weights.w;
        let b = &mut self.buf;
        b.hist.iter_mut().for_each(|v| *v = 0.0);
        match &mut self.history {
            History::Direct { past } => {
                for j in 1..k {
                    let wj = w[k - j];
                    let ej = &past[(j - 1) * ne..j * ne];
                    for (hv, &ev) in b.hist.iter_mut().zip(ej) {
                        *hv += wj * ev;
                    }
                }
                self.history_ops += ((k - 1) * ne) as u64;
            }
            History::Fast(l) => l.history_eval(k, &mut b.hist)?,
        }

        let t = k as f64 * self.dt;
        let (de, ei) = (self.medium.delta_eps, self.medium.eps_inf);
        let with_h = match forcing {
            Some(fc) => {
                b.f.iter_mut().for_each(|v| *v = 0.0);
                b.g.iter_mut().for_each(|v| *v = 0.0);
                b.hh.iter_mut().for_each(|v| *v = 0.0);
                fc.eval(k, t, &mut b.f, &mut b.g, &mut b.hh);
                fc.has_h()
            }
            None => false,
        };

        for i in 0..ne {
            let hk = if with_h { b.hh[i] } else { 0.0 };
            b.tmp[i] = ei * self.state.e[i] + self.state.p[i] - de * (b.hist[i] + hk);
        }
        self.ops.mass_e(&b.tmp, &mut b.re);
        self.ops.mass_h(&self.state.h, &mut b.rh);
        if forcing.is_some() {
            for (r, f) in b.re.iter_mut().zip(&b.f) {
                *r += self.dt * f;
            }
            for (r, g) in b.rh.iter_mut().zip(&b.g) {
                *r += self.dt * g;
            }
        }
        let mut e = vec![0.0; ne];
        let mut h = vec![0.0; self.state.h.len()];
        self.solver.solve(&b.re, &b.rh, &mut e, &mut h)?;
        for i in 0..ne {
            let hk = if with_h { b.hh[i] } else { 0.0 };
            self.state.p[i] = de * (w[0] * e[i] + b.hist[i] + hk);
        }
        match &mut self.history {
            History::Direct { past } => past.extend_from_slice(&e),
            History::Fast(l) => l.push(&e, k)?,
        }
        let n2 = self.ops.norm2_e(&e);
        self.norms2.push(n2);
        self.max_norm_e = self.max_norm_e.max(n2.sqrt());
        self.state.e = e;
        self.state.h = h;
        self.state.k = k;
        self.state.t = t;
        Ok(())
    }

    /// Energy row for the current state.
    pub fn energy_row(&mut self) -> EnergyRow {
        let s = &self.state;
        let k = s.k;
        let ne2 = match self.norms2.last() {
            Some(&n) if k > 0 => n,
            _ => self.ops.norm2_e(&s.e),
        };
        let nh2 = self.ops.norm2_h(&s.h);
        let plain = self.medium.eps_inf * ne2 + nh2;
        let mut mem = 0.0;
        for j in 1..=k {
            mem += self.weights.w[k - j] * self.norms2[j - 1];
        }
        let energy = plain + self.medium.delta_eps * mem;
        let norm_p = self.ops.norm2_e(&s.p).sqrt();
        let p_bound = if k == 0 { 0.0 } else { self.medium.delta_eps * self.weights.partial_sum(k) * self.max_norm_e };
        EnergyRow { k, t: s.t, energy, plain, norm_e: ne2.sqrt(), norm_h: nh2.sqrt(), norm_p, p_bound }
    }

    pub fn into_state(self) -> FieldState {
        self.state
    }
}

/// Snapshots, energy trace and history cost of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<FieldState>,
    pub trace: EnergyTrace,
    pub final_state: FieldState,
    pub history_ops: u64,
}

/// Advances `init` by `opts.steps` steps, recording energy every step.
pub fn run<O: SpatialOps>(ops: &O, medium: MediumParams, init: FieldState, opts: &RunOptions, forcing: Option<&dyn Forcing>) -> Result<RunOutput> {
    let mut snapshots = Vec::new();
    if opts.snapshots.contains(&0) {
        snapshots.push(init.clone());
    }
    let mut st = Stepper::new(ops, medium, init, opts.dt, opts.steps, opts.mode, opts.memory_budget)?;
    let mut trace = EnergyTrace::default();
    trace.rows.push(st.energy_row());
    for _ in 0..opts.steps {
        st.step(forcing)?;
        let row = st.energy_row();
        if !row.energy.is_finite() {
            return Err(Error::BlowUp(row.k));
        }
        trace.rows.push(row);
        if opts.snapshots.contains(&row.k) {
            snapshots.push(st.state().clone());
        }
    }
    let history_ops = st.history_ops();
    Ok(RunOutput { snapshots, trace, final_state: st.into_state(), history_ops })
}

/// ℰ^k from an explicit E history E^1..E^k (E^0 alone when the history is empty).
pub fn energy<O: SpatialOps>(ops: &O, medium: &MediumParams, w: &WeightTable, history: &[Vec<f64>], e0: &[f64], h: &[f64]) -> Result<f64> {
    let k = history.len();
    if k > w.len() {
        return Err(Error::Dimension { expected: w.len(), got: k });
    }
    let hn = ops.norm2_h(h);
    if k == 0 {
        return Ok(medium.eps_inf * ops.norm2_e(e0) + hn);
    }
    let mut mem = 0.0;
    for (j, ej) in history.iter().enumerate() {
        mem += w.w[k - 1 - j] * ops.norm2_e(ej);
    }
    Ok(medium.eps_inf * ops.norm2_e(&history[k - 1]) + hn + medium.delta_eps * mem)
}
