//! Frequency-domain extraction of ε_r from two probe series, and the
//! analytic H-N reference curves.
//!
//! Conventions: Ê(ω) = Δt Σ_k E^k e^{-iωt_k}, T̃ = Ê_far / Ê_near,
//! Υ̃ = (ln|T̃| + i arg T̃)/d with the phase unwrapped along the trusted
//! samples (see [`unwrap_anchored`]), and ε̃_r = -(c0 Υ̃/ω)².

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fdtd1d::{PhysicalMedium, C0};
use crate::{Complex64, Error, Result};

/// Samples whose near-probe spectrum falls below this fraction of the
/// in-band peak are not trusted.
pub const NOISE_FLOOR: f64 = 1e-4;

/// ε_∞ + Δε / (1 + (iωτ0)^α)^β on the principal branch.
pub fn analytic_permittivity(medium: &PhysicalMedium, omega: f64) -> Complex64 {
    let iwt = Complex64::new(0.0, omega * medium.tau0);
    let denom = (Complex64::new(1.0, 0.0) + iwt.powf(medium.alpha)).powf(medium.beta);
    Complex64::new(medium.eps_inf, 0.0) + medium.delta_eps() / denom
}

/// |(1 - √ε_r)/(1 + √ε_r)|.
pub fn analytic_reflection(eps_r: Complex64) -> Result<f64> {
    if !(eps_r.re.is_finite() && eps_r.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let s = eps_r.sqrt();
    let den = Complex64::new(1.0, 0.0) + s;
    if den.norm() == 0.0 {
        return Err(Error::Domain("1 + sqrt(eps_r) vanishes"));
    }
    Ok(((Complex64::new(1.0, 0.0) - s) / den).norm())
}

/// Propagation constant Υ(ω) = -iω√ε_r / c0.
pub fn propagation(eps_r: Complex64, omega: f64) -> Complex64 {
    Complex64::new(0.0, -omega / C0) * eps_r.sqrt()
}

/// exp(Υ(ω) d).
pub fn analytic_transfer(eps_r: Complex64, omega: f64, d: f64) -> Complex64 {
    (propagation(eps_r, omega) * d).exp()
}

/// Δt Σ_k x_k e^{-iω kΔt}.
pub fn dft(series: &[f64], dt: f64, omega: f64) -> Complex64 {
    // rotate a phasor, re-anchoring every 256 steps to keep the drift down
    let step = Complex64::new((omega * dt).cos(), -(omega * dt).sin());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut ph = Complex64::new(1.0, 0.0);
    for (k, &x) in series.iter().enumerate() {
        if k % 256 == 0 {
            let a = omega * dt * k as f64;
            ph = Complex64::new(a.cos(), -a.sin());
        }
        acc += ph * x;
        ph *= step;
    }
    acc * dt
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFlag {
    Trusted,
    /// Near-probe spectrum under the noise floor.
    BelowFloor,
    /// T̃ = 1 exactly, so ε̃_r collapses to zero.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    /// Angular frequencies (rad/s), ascending.
    pub omegas: Vec<f64>,
    pub d: f64,
    pub t_approx: Vec<Complex64>,
    /// (Υ̃_R, Υ̃_I) in 1/m.
    pub upsilon: Vec<(f64, f64)>,
    pub eps_approx: Vec<Complex64>,
    pub refl_approx: Vec<f64>,
    pub flags: Vec<SampleFlag>,
}

impl FrequencyResponse {
    pub fn trusted(&self, j: usize) -> bool {
        self.flags[j] == SampleFlag::Trusted
    }

    /// Υ̃_I < 0 on every trusted sample, i.e. the field lags downstream
    /// whichever way round the probes were passed.
    pub fn causal(&self) -> bool {
        self.upsilon
            .iter()
            .zip(&self.flags)
            .filter(|(_, f)| **f == SampleFlag::Trusted)
            .all(|(u, _)| u.1 < 0.0)
    }
}

/// Unwraps a phase sequence in place so adjacent jumps stay within π.
/// Non-finite entries are left alone and skipped over.
pub fn unwrap_phase(phase: &mut [f64]) {
    let mut last: Option<f64> = None;
    for p in phase.iter_mut() {
        if !p.is_finite() {
            continue;
        }
        if let Some(q) = last {
            let mut d = *p - q;
            d -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
            *p = q + d;
        }
        last = Some(*p);
    }
}

/// Unwraps `phase` along the trusted samples, then fixes the 2π branch so
/// a straight line through the first few trusted samples meets zero at
/// ω = 0, where T = 1. Untrusted samples are unwrapped from their
/// neighbours. Without any trusted sample this is a plain unwrap.
pub fn unwrap_anchored(omegas: &[f64], phase: &mut [f64], trusted: &[bool]) {
    let idx: Vec<usize> = (0..phase.len()).filter(|&j| trusted[j] && phase[j].is_finite()).collect();
    if idx.is_empty() {
        unwrap_phase(phase);
        return;
    }
    let mut sub: Vec<f64> = idx.iter().map(|&j| phase[j]).collect();
    unwrap_phase(&mut sub);
    let fit = &idx[..idx.len().min(ANCHOR_SAMPLES)];
    let shift = if fit.len() >= 2 {
        let n = fit.len() as f64;
        let (mw, mp) = fit.iter().zip(&sub).fold((0.0, 0.0), |(a, b), (&j, &p)| (a + omegas[j] / n, b + p / n));
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (&j, &p) in fit.iter().zip(&sub) {
            sxy += (omegas[j] - mw) * (p - mp);
            sxx += (omegas[j] - mw) * (omegas[j] - mw);
        }
        let intercept = mp - sxy / sxx * mw;
        -2.0 * PI * (intercept / (2.0 * PI)).round()
    } else {
        0.0
    };
    for (&j, &p) in idx.iter().zip(&sub) {
        phase[j] = p + shift;
    }
    let wrap = |p: f64, q: f64| {
        let mut d = p - q;
        d -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
        q + d
    };
    for j in idx[0] + 1..phase.len() {
        if !trusted[j] && phase[j].is_finite() && phase[j - 1].is_finite() {
            phase[j] = wrap(phase[j], phase[j - 1]);
        }
    }
    for j in (0..idx[0]).rev() {
        if phase[j].is_finite() && phase[j + 1].is_finite() {
            phase[j] = wrap(phase[j], phase[j + 1]);
        }
    }
}

/// Trusted samples used to place the phase branch.
pub const ANCHOR_SAMPLES: usize = 8;

/// Extracts T̃, Υ̃, ε̃_r and |R̃| at `omegas` from the series at two probes
/// a signed distance `d` apart.
pub fn recover(near: &[f64], far: &[f64], dt: f64, d: f64, omegas: &[f64]) -> Result<FrequencyResponse> {
    recover_with_floor(near, far, dt, d, omegas, NOISE_FLOOR)
}

pub fn recover_with_floor(
    near: &[f64],
    far: &[f64],
    dt: f64,
    d: f64,
    omegas: &[f64],
    floor: f64,
) -> Result<FrequencyResponse> {
    if near.len() != far.len() {
        return Err(Error::Dimension { expected: near.len(), got: far.len() });
    }
    if !(dt.is_finite() && d.is_finite()) || omegas.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(dt > 0.0) || d == 0.0 {
        return Err(Error::Domain("need dt > 0 and d != 0"));
    }
    if omegas.iter().any(|&w| w <= 0.0) || omegas.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Domain("omegas must be positive and strictly ascending"));
    }

    let en: Vec<Complex64> = omegas.iter().map(|&w| dft(near, dt, w)).collect();
    let ef: Vec<Complex64> = omegas.iter().map(|&w| dft(far, dt, w)).collect();
    let peak = en.iter().fold(0.0f64, |m, z| m.max(z.norm()));

    let n = omegas.len();
    let mut flags = vec![SampleFlag::Trusted; n];
    let mut t_approx = Vec::with_capacity(n);
    for j in 0..n {
        let ok = peak > 0.0 && en[j].norm() >= floor * peak;
        if !ok {
            flags[j] = SampleFlag::BelowFloor;
        }
        let t = if en[j].norm() > 0.0 { ef[j] / en[j] } else { Complex64::new(f64::NAN, f64::NAN) };
        if ok && t == Complex64::new(1.0, 0.0) {
            flags[j] = SampleFlag::Degenerate;
        }
        t_approx.push(t);
    }

    let mut phase: Vec<f64> = t_approx.iter().map(|t| t.arg()).collect();
    let mask: Vec<bool> = flags.iter().map(|&f| f == SampleFlag::Trusted).collect();
    unwrap_anchored(omegas, &mut phase, &mask);

    let mut upsilon = Vec::with_capacity(n);
    let mut eps_approx = Vec::with_capacity(n);
    let mut refl_approx = Vec::with_capacity(n);
    for j in 0..n {
        let u = Complex64::new(t_approx[j].norm().ln() / d, phase[j] / d);
        let s = u * (C0 / omegas[j]);
        let eps = -(s * s);
        upsilon.push((u.re, u.im));
        eps_approx.push(eps);
        refl_approx.push(analytic_reflection(eps).unwrap_or(f64::NAN));
    }
    Ok(FrequencyResponse { omegas: omegas.to_vec(), d, t_approx, upsilon, eps_approx, refl_approx, flags })
}

/// Angular frequencies of the length-`n` DFT grid that fall in [lo, hi].
pub fn dft_grid(n: usize, dt: f64, lo: f64, hi: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * dt);
    (1..=n / 2).map(|j| j as f64 * base).filter(|&w| w >= lo && w <= hi).collect()
}

/// Far-probe series obtained by applying the exact transfer function of
/// `medium` over distance `d` to `near` on the length-n DFT grid.
///
/// Only meant for round-trip checks: the transform is a direct O(n²) sum.
pub fn synthetic_far(near: &[f64], dt: f64, d: f64, medium: &PhysicalMedium) -> Vec<f64> {
    let n = near.len();
    let base = 2.0 * PI / n as f64;
    let spec: Vec<Complex64> = (0..=n / 2)
        .map(|j| {
            let x = dft(near, 1.0, base * j as f64);
            if j == 0 {
                return x;
            }
            let w = base * j as f64 / dt;
            let y = x * analytic_transfer(analytic_permittivity(medium, w), w, d);
            if 2 * j == n {
                Complex64::new(y.re, 0.0)
            } else {
                y
            }
        })
        .collect();
    (0..n)
        .map(|k| {
            let mut acc = spec[0].re;
            for (j, y) in spec.iter().enumerate().skip(1) {
                let a = base * ((j * k) % n) as f64;
                let v = y.re * a.cos() - y.im * a.sin();
                acc += if 2 * j == n { v } else { 2.0 * v };
            }
            acc / n as f64
        })
        .collect()
}
