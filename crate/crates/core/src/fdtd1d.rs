//! 1D Yee grid in SI units with H-N polarization and PEC ends.
//!
//! E lives on nodes z_m = a + mΔz (m = 0..M, E_0 = E_M = 0), H on half
//! nodes. H is leapfrogged explicitly; E and P take the backward-Euler
//! convolution step, which is pointwise in space:
//!
//! ```text
//! c E^k_m = ε0ε∞ E^{k-1}_m + P^{k-1}_m - κ hist_m - (Δt/Δz)(H_{m+1/2} - H_{m-1/2}) + Δt s^k_m
//! P^k_m   = κ (ϖ_0 E^k_m + hist_m),      c = ε0ε∞ + κ ϖ_0,  κ = ε0Δε/τ0^{αβ}
//! ```
//!
//! with weights of e^β_{α,αβ}(t; -τ0^{-α}) at the physical step Δt.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fastconv::HistoryLadder;
use crate::prabhakar::{weights, KernelSpec, WeightTable};
use crate::timestepper::HistoryMode;
use crate::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 3.0e8;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0e-7 * PI;
/// Vacuum permittivity consistent with C0 and MU0 (F/m).
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

const BLOWUP_GROWTH: f64 = 1e6;

/// Dispersive medium in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalMedium {
    pub eps_s: f64,
    pub eps_inf: f64,
    pub tau0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PhysicalMedium {
    /// `eps_s == eps_inf` is accepted as the nondispersive limit.
    pub fn new(eps_s: f64, eps_inf: f64, tau0: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(eps_s.is_finite() && eps_inf.is_finite() && tau0.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(eps_inf >= 1.0 && eps_s >= eps_inf) {
            return Err(Error::Domain("need eps_s >= eps_inf >= 1"));
        }
        if !(tau0 > 0.0) {
            return Err(Error::Domain("tau0 must be positive"));
        }
        KernelSpec::scaled(alpha, beta)?;
        Ok(Self { eps_s, eps_inf, tau0, alpha, beta })
    }

    pub fn delta_eps(&self) -> f64 {
        self.eps_s - self.eps_inf
    }

    /// -1/τ0^α.
    pub fn sigma(&self) -> f64 {
        -self.tau0.powf(-self.alpha)
    }

    /// ε0Δε/τ0^{αβ}.
    pub fn scale(&self) -> f64 {
        EPS0 * self.delta_eps() / self.tau0.powf(self.alpha * self.beta)
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec { alpha: self.alpha, beta: self.beta, sigma: self.sigma() }
    }
}

/// Modulated Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Envelope rate a_e (1/s).
    pub rate: f64,
    /// Carrier f_e (Hz).
    pub freq: f64,
}

impl Default for Pulse {
    fn default() -> Self {
        Self { rate: 5e9, freq: 6e9 }
    }
}

impl Pulse {
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let s = t - 4.0 / self.rate;
        (-(self.rate * s).powi(2)).exp() * (2.0 * PI * self.freq * s).sin()
    }
}

/// E_inc(t) with the default pulse.
pub fn source_pulse(t: f64) -> f64 {
    Pulse::default().eval(t)
}

/// Uniform grid with a soft source node and probe nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub dz: f64,
    pub dt: f64,
    pub cells: usize,
    pub source: usize,
    pub probes: Vec<usize>,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, cells: usize, dt: f64, source: usize, probes: Vec<usize>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && dt.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(b > a && dt > 0.0 && cells >= 2) {
            return Err(Error::Domain("need b > a, dt > 0 and at least two cells"));
        }
        if source == 0 || source >= cells || probes.iter().any(|&p| p > cells) {
            return Err(Error::Domain("source must be interior and probes on the grid"));
        }
        Ok(Self { a, b, dz: (b - a) / cells as f64, dt, cells, source, probes })
    }

    pub fn z(&self, m: usize) -> f64 {
        self.a + m as f64 * self.dz
    }
}

/// Probe samples E^k at every step k = 0..=N_t.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub dt: f64,
    pub probes: Vec<usize>,
    pub data: Vec<Vec<f64>>,
}

/// Energy bookkeeping of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FdtdEnergy {
    /// Δz[ε0ε∞ΣE² + μ0ΣH^{k+1/2}H^{k-1/2} + κ Σ_j ϖ_{k-j}ΣE_j²] per step.
    pub values: Vec<f64>,
}

/// Field data after a run.
#[derive(Debug, Clone)]
pub struct FdtdOutput {
    pub series: ProbeSeries,
    pub energy: FdtdEnergy,
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    pub p: Vec<f64>,
    pub history: Option<Vec<Vec<f64>>>,
}

/// Run options beyond grid and medium.
#[derive(Debug, Clone)]
pub struct FdtdOptions {
    pub steps: usize,
    pub mode: HistoryMode,
    pub pulse: Option<Pulse>,
    /// Initial E on nodes (PEC ends must be zero) and H on half nodes.
    pub init: Option<(Vec<f64>, Vec<f64>)>,
    /// Keep every E^k; only meant for small checks.
    pub keep_history: bool,
}

impl FdtdOptions {
    pub fn new(steps: usize, mode: HistoryMode) -> Self {
        Self { steps, mode, pulse: Some(Pulse::default()), init: None, keep_history: false }
    }
}

/// Physical weights κ ϖ_j at step Δt.
pub fn physical_weights(medium: &PhysicalMedium, dt: f64, k: usize) -> Result<WeightTable> {
    let mut t = weights(medium.kernel(), dt, k)?;
    let s = medium.scale();
    t.w.iter_mut().for_each(|w| *w *= s);
    Ok(t)
}

enum History {
    Direct(Vec<f64>),
    Fast(HistoryLadder),
    None,
}

pub fn run_fdtd(grid: &Grid1D, medium: &PhysicalMedium, opts: &FdtdOptions) -> Result<FdtdOutput> {
    let m = grid.cells;
    let n = m - 1; // interior E nodes 1..M-1
    let (dt, dz) = (grid.dt, grid.dz);
    let steps = opts.steps;
    let kappa = medium.scale();
    let w = if kappa > 0.0 { physical_weights(medium, dt, steps.max(1))?.w } else { vec![0.0; steps.max(1)] };
    let c = EPS0 * medium.eps_inf + w[0];

    let mut history = if kappa == 0.0 {
        History::None
    } else {
        match opts.mode {
            HistoryMode::Direct => History::Direct(Vec::with_capacity(steps * n)),
            HistoryMode::Fast(p) => {
                History::Fast(HistoryLadder::new(medium.alpha, medium.beta, -medium.sigma(), dt, n, steps.max(1), p)?)
            }
        }
    };

    let mut e = vec![0.0; m + 1];
    let mut h = vec![0.0; m];
    if let Some((e0, h0)) = &opts.init {
        if e0.len() != m + 1 || h0.len() != m {
            return Err(Error::Dimension { expected: 2 * m + 1, got: e0.len() + h0.len() });
        }
        if e0[0] != 0.0 || e0[m] != 0.0 {
            return Err(Error::Boundary(e0[0].abs().max(e0[m].abs())));
        }
        e.copy_from_slice(e0);
        h.copy_from_slice(h0);
    }
    let mut p = vec![0.0; m + 1];
    let mut hist = vec![0.0; n];
    let mut kept: Option<Vec<Vec<f64>>> = opts.keep_history.then(Vec::new);

    let mut data: Vec<Vec<f64>> = grid.probes.iter().map(|&q| {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(e[q]);
        v
    }).collect();

    // H^{1/2} from E^0, then energy 𝒲^0 pairs H^{1/2} with H^{-1/2} := H^0
    let hc = dt / (MU0 * dz);
    let ec = dt / dz;
    let mut h_new = h.clone();
    for j in 0..m {
        h_new[j] = h[j] - hc * (e[j + 1] - e[j]);
    }
    let mut norms2: Vec<f64> = Vec::with_capacity(steps);
    let mut energy = FdtdEnergy { values: Vec::with_capacity(steps + 1) };
    let cross = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let w0 = dz * (EPS0 * medium.eps_inf * cross(&e, &e) + MU0 * cross(&h_new, &h));
    energy.values.push(w0);
    h = h_new.clone();
    let mut peak = w0;

    for k in 1..=steps {
        let t = k as f64 * dt;
        hist.iter_mut().for_each(|v| *v = 0.0);
        match &mut history {
            History::Direct(past) => {
                for j in 1..k {
                    let wj = w[k - j];
                    for (hv, ev) in hist.iter_mut().zip(&past[(j - 1) * n..j * n]) {
                        *hv += wj * ev;
                    }
                }
            }
            History::Fast(l) => {
                l.history_eval(k, &mut hist)?;
                hist.iter_mut().for_each(|v| *v *= kappa);
            }
            History::None => {}
        }
        let s = opts.pulse.map_or(0.0, |pl| pl.eval(t));
        for i in 1..m {
            let mut r = EPS0 * medium.eps_inf * e[i] + p[i] - hist[i - 1] - ec * (h[i] - h[i - 1]);
            if i == grid.source {
                r += dt * s;
            }
            e[i] = r / c;
            p[i] = w[0] * e[i] + hist[i - 1];
        }
        let interior = &e[1..m];
        match &mut history {
            History::Direct(past) => past.extend_from_slice(interior),
            History::Fast(l) => l.push(interior, k)?,
            History::None => {}
        }
        if let Some(kv) = kept.as_mut() {
            kv.push(e.clone());
        }
        norms2.push(cross(interior, interior));
        for j in 0..m {
            h_new[j] = h[j] - hc * (e[j + 1] - e[j]);
        }
        let mut mem = 0.0;
        for j in 1..=k {
            mem += w[k - j] * norms2[j - 1];
        }
        let wk = dz * (EPS0 * medium.eps_inf * norms2[k - 1] + MU0 * cross(&h_new, &h) + mem);
        if !wk.is_finite() || (peak > 0.0 && wk > BLOWUP_GROWTH * peak) {
            return Err(Error::BlowUp(k));
        }
        peak = peak.max(wk);
        energy.values.push(wk);
        core::mem::swap(&mut h, &mut h_new);
        for (d, &q) in data.iter_mut().zip(&grid.probes) {
            d.push(e[q]);
        }
    }
    Ok(FdtdOutput {
        series: ProbeSeries { dt, probes: grid.probes.clone(), data },
        energy,
        e,
        h,
        p,
        history: kept,
    })
}
