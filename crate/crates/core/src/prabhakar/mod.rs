//! Three-parameter Mittag-Leffler (Prabhakar) function
//!
//! E^γ_{ρ,μ}(z) = Σ_k (γ)_k z^k / (Γ(ρk+μ) k!)
//!
//! together with the kernel e^γ_{ρ,μ}(t;σ) = t^{μ-1} E^γ_{ρ,μ}(σ t^ρ) and the
//! piecewise-constant convolution quadrature weights built from it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::{Error, Result};

mod opc;

/// Default target accuracy of the contour quadrature.
pub const DEFAULT_TOL: f64 = 1e-15;

/// |z| at or below which the power series is summed directly.
pub const SERIES_RADIUS: f64 = 1.0;

const MAX_SERIES_TERMS: usize = 4000;
const RELAX_DECADES: usize = 3;

/// Parameters (ρ, μ, γ) of E^γ_{ρ,μ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub rho: f64,
    pub mu: f64,
    pub gamma: f64,
}

impl MLParams {
    pub const fn new(rho: f64, mu: f64, gamma: f64) -> Self {
        Self { rho, mu, gamma }
    }
}

/// H-N kernel parameters. `alpha = 1` is accepted so that the Debye
/// closed forms can be used as checks; the solvers require `alpha < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && sigma.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain("kernel alpha must lie in (0, 1]"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain("kernel beta must lie in (0, 1]"));
        }
        if !(sigma < 0.0) {
            return Err(Error::Domain("kernel sigma must be negative"));
        }
        Ok(Self { alpha, beta, sigma })
    }

    /// Kernel of the scaled system, σ = −1.
    pub fn scaled(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, -1.0)
    }
}

/// Convolution quadrature weights ϖ_0 … ϖ_{K-1} for one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub spec: KernelSpec,
    pub dt: f64,
    pub w: Vec<f64>,
}

impl WeightTable {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Σ_{j<k} ϖ_j, the telescoped counterpart of [`weight_sum`].
    pub fn partial_sum(&self, k: usize) -> f64 {
        self.w[..k].iter().sum()
    }
}

/// 1/Γ(x), zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return (-libm::lgamma(x)).exp();
    }
    1.0 / libm::tgamma(x)
}

/// E^γ_{ρ,μ}(z) at the default tolerance.
pub fn ml3(p: MLParams, z: Complex64) -> Result<Complex64> {
    ml3_tol(p, z, DEFAULT_TOL)
}

/// E^γ_{ρ,μ}(z) with an explicit contour tolerance.
pub fn ml3_tol(p: MLParams, z: Complex64, tol: f64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(p.rho.is_finite() && p.mu.is_finite() && p.gamma.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(p.rho > 0.0) {
        return Err(Error::Domain("rho must be positive"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain("tolerance must lie in (0, 1)"));
    }
    let v = if z.norm() <= SERIES_RADIUS {
        series(p, z)?.0
    } else {
        match opc::invert(p, z, tol.ln()) {
            Ok(v) => v,
            Err(e) => relaxed(p, z, tol).ok_or(e)?,
        }
    };
    if z.im == 0.0 {
        Ok(Complex64::new(v.re, 0.0))
    } else {
        Ok(v)
    }
}

// Branch points far to the right leave no contour inside the round-off
// budget. Try the series if it sums without heavy cancellation, then widen
// the budget a decade at a time.
fn relaxed(p: MLParams, z: Complex64, tol: f64) -> Option<Complex64> {
    if let Ok((v, spread)) = series(p, z) {
        if spread < 1e3 {
            return Some(v);
        }
    }
    let mut t = tol;
    for _ in 0..RELAX_DECADES {
        t *= 10.0;
        if let Ok(v) = opc::invert(p, z, t.ln()) {
            return Some(v);
        }
    }
    None
}

/// Partial sums of the power series and the ratio Σ|term| / |sum|.
fn series(p: MLParams, z: Complex64) -> Result<(Complex64, f64)> {
    let mut sum = Complex64::zero();
    let mut abs_sum = 0.0;
    let mut c = 1.0;
    let mut zk = Complex64::new(1.0, 0.0);
    let mut small = 0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let term = zk * (c * rgamma(p.rho * kf + p.mu));
        sum += term;
        abs_sum += term.norm();
        // (γ)_k vanishes for good once γ is a nonpositive integer
        if c == 0.0 {
            return Ok((sum, abs_sum / sum.norm()));
        }
        if term.norm() < 1e-16 * sum.norm() && p.rho * kf + p.mu > 1.0 {
            small += 1;
            if small == 2 {
                return Ok((sum, abs_sum / sum.norm()));
            }
        } else {
            small = 0;
        }
        c *= (p.gamma + kf) / (kf + 1.0);
        zk *= z;
        if zk.norm() == 0.0 {
            return Ok((sum, abs_sum / sum.norm()));
        }
    }
    Err(Error::Contour("power series did not converge"))
}

/// e^γ_{ρ,μ}(t;σ) with ρ = spec.alpha.
pub fn kernel_e(spec: KernelSpec, mu: f64, gamma: f64, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(t > 0.0) {
        return Err(Error::Domain("kernel time must be positive"));
    }
    let z = spec.sigma * t.powf(spec.alpha);
    let e = ml3(MLParams::new(spec.alpha, mu, gamma), Complex64::new(z, 0.0))?;
    Ok(t.powf(mu - 1.0) * e.re)
}

/// e^β_{α,αβ+1}(t;σ), zero at t = 0.
fn kernel_integral(spec: KernelSpec, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    kernel_e(spec, spec.alpha * spec.beta + 1.0, spec.beta, t)
}

/// ϖ_j = e^β_{α,αβ+1}((j+1)Δt;σ) − e^β_{α,αβ+1}(jΔt;σ) for j < k.
pub fn weights(spec: KernelSpec, dt: f64, k: usize) -> Result<WeightTable> {
    if !dt.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(dt > 0.0) {
        return Err(Error::Domain("dt must be positive"));
    }
    if k == 0 {
        return Err(Error::Domain("weight table length must be positive"));
    }
    let mut w = Vec::with_capacity(k);
    let mut prev = 0.0;
    for j in 0..k {
        let next = kernel_integral(spec, (j + 1) as f64 * dt)?;
        w.push(next - prev);
        prev = next;
    }
    Ok(WeightTable { spec, dt, w })
}

/// Σ_{j=0}^{k-1} ϖ_j in closed form: e^β_{α,αβ+1}(kΔt;σ).
pub fn weight_sum(spec: KernelSpec, dt: f64, k: usize) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::Domain("dt must be positive"));
    }
    if k == 0 {
        return Err(Error::Domain("weight_sum needs k >= 1"));
    }
    kernel_integral(spec, k as f64 * dt)
}

/// (ϱ + (iω)^α)^β / (iω) through the polar form of ϱ + ω^α e^{iπα/2}.
pub fn laplace_symbol(alpha: f64, beta: f64, varrho: f64, omega: f64) -> Result<Complex64> {
    if !(alpha.is_finite() && beta.is_finite() && varrho.is_finite() && omega.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain("symbol exponents must lie in (0, 1]"));
    }
    if !(varrho > 0.0 && omega > 0.0) {
        return Err(Error::Domain("varrho and omega must be positive"));
    }
    let wa = omega.powf(alpha);
    let (s, c) = (0.5 * PI * alpha).sin_cos();
    let x = varrho + wa * c;
    let y = wa * s;
    let r = x.hypot(y);
    let theta = y.atan2(x);
    let mag = r.powf(beta) / omega;
    let (sb, cb) = (beta * theta).sin_cos();
    // division by iω rotates by −π/2
    Ok(Complex64::new(mag * sb, -mag * cb))
}
