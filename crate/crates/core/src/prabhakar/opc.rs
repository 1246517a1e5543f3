//! Inverse Laplace transform of s^{ργ-μ}/(s^ρ - z)^γ at t = 1 along an
//! optimal parabolic contour s(u) = μ(1 + iu)^2, with the step, node count
//! and contour position chosen region by region between singularities.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::MLParams;
use crate::{Error, Result};

const LOG_MACH_EPS: f64 = -36.043653389117154;
const MAX_NODES: f64 = 5000.0;

struct Params {
    mu: f64,
    h: f64,
    n: f64,
}

pub(super) fn invert(p: MLParams, z: Complex64, log_eps: f64) -> Result<Complex64> {
    let t = 1.0;
    let (rho, beta, gamma) = (p.rho, p.mu, p.gamma);

    let theta = z.arg();
    let kmin = (-rho / 2.0 - theta / (2.0 * PI)).ceil() as i64;
    let kmax = (rho / 2.0 - theta / (2.0 * PI)).floor() as i64;
    let radius = z.norm().powf(1.0 / rho);
    let mut poles: Vec<(f64, Complex64)> = (kmin..=kmax)
        .map(|k| {
            let s = Complex64::from_polar(radius, (theta + 2.0 * PI * k as f64) / rho);
            ((s.re + s.norm()) / 2.0, s)
        })
        .filter(|(phi, _)| *phi > 1e-15)
        .collect();
    poles.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut s_star = Vec::with_capacity(poles.len() + 1);
    let mut phi = Vec::with_capacity(poles.len() + 2);
    let mut pp = Vec::with_capacity(poles.len() + 1);
    let mut qq = Vec::with_capacity(poles.len() + 1);
    s_star.push(Complex64::new(0.0, 0.0));
    phi.push(0.0);
    pp.push((-2.0 * (rho * gamma - beta + 1.0)).max(0.0));
    for &(f, s) in &poles {
        s_star.push(s);
        phi.push(f);
        // a negative γ makes the pole a bounded branch point
        pp.push(gamma.max(0.0));
        qq.push(gamma.max(0.0));
    }
    qq.push(f64::INFINITY);
    phi.push(f64::INFINITY);
    let j1 = s_star.len();

    let threshold = (log_eps - LOG_MACH_EPS) / t;
    let branch_points = gamma != 1.0 && j1 > 1;
    let mut best: Option<(usize, Params)> = None;
    for j in 0..j1 {
        if !(phi[j] < threshold && phi[j] < phi[j + 1]) {
            continue;
        }
        // for γ ≠ 1 the poles are branch points: stay right of all of them
        if branch_points && j + 1 != j1 {
            continue;
        }
        let par = if j + 1 < j1 {
            optimal_rb(t, phi[j], phi[j + 1], pp[j], qq[j], log_eps)
        } else {
            optimal_ru(t, phi[j], pp[j], log_eps)
        };
        if let Some(par) = par {
            if best.as_ref().map_or(true, |(_, b)| par.n < b.n) {
                best = Some((j, par));
            }
        }
    }
    let (region, par) = best.ok_or(Error::Contour("no admissible integration region"))?;
    if !(par.n <= MAX_NODES) {
        return Err(Error::Contour("node count exceeds limit"));
    }
    let n = par.n as i64;

    // s^{-μ}(1 - z s^{-ρ})^{-γ} keeps the cut on the arc from 0 to the poles
    let f = |u: f64| -> Complex64 {
        let iu1 = Complex64::new(1.0, u);
        let s = iu1 * iu1 * par.mu;
        let ds = Complex64::new(-2.0 * par.mu * u, 2.0 * par.mu);
        let ls = s.ln();
        let w = Complex64::new(1.0, 0.0) - z * (-ls * rho).exp();
        let val = (-ls * beta - w.ln() * gamma + s * t).exp();
        val * ds
    };

    let mut integral = if z.im == 0.0 {
        // conjugate symmetry: S(-u) = -conj S(u)
        let mut acc = f(0.0).im;
        for k in 1..=n {
            acc += 2.0 * f(par.h * k as f64).im;
        }
        Complex64::new(par.h * acc / (2.0 * PI), 0.0)
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            acc += f(par.h * k as f64);
        }
        acc * par.h / Complex64::new(0.0, 2.0 * PI)
    };

    if gamma == 1.0 {
        for s in &s_star[region + 1..] {
            integral += s.powf(1.0 - beta) * (s * t).exp() / rho;
        }
    }
    if !(integral.re.is_finite() && integral.im.is_finite()) {
        return Err(Error::Contour("non-finite quadrature result"));
    }
    Ok(integral)
}

fn optimal_rb(t: f64, phi_j: f64, phi_j1: f64, pj: f64, qj: f64, log_eps: f64) -> Option<Params> {
    let fac = 1.01;
    let f_max = (log_eps - LOG_MACH_EPS).exp();
    let sq_j = phi_j.sqrt();
    let threshold = 2.0 * ((log_eps - LOG_MACH_EPS) / t).sqrt();
    let sq_j1 = phi_j1.sqrt().min(threshold - sq_j);

    let (sqb_j, sqb_j1, f_bar) = if pj < 1e-14 && qj < 1e-14 {
        (sq_j, sq_j1, 1.0)
    } else if pj < 1e-14 {
        let f_min = if sq_j > 0.0 { fac * (sq_j / (sq_j1 - sq_j)).powf(qj) } else { fac };
        if f_min >= f_max {
            return None;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fq = f_bar.powf(-1.0 / qj);
        (sq_j, (2.0 * sq_j1 - fq * sq_j) / (2.0 + fq), f_bar)
    } else if qj < 1e-14 {
        let f_min = fac * (sq_j1 / (sq_j1 - sq_j)).powf(pj);
        if f_min >= f_max {
            return None;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        ((2.0 * sq_j + fp * sq_j1) / (2.0 - fp), sq_j1, f_bar)
    } else {
        let f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j).powf(pj.max(qj));
        if f_min >= f_max {
            return None;
        }
        let f_min = f_min.max(1.5);
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        let fq = f_bar.powf(-1.0 / qj);
        let w = -phi_j1 * t / log_eps;
        let den = 2.0 + w - (1.0 + w) * fp + fq;
        let a = ((2.0 + w + fq) * sq_j + fp * sq_j1) / den;
        let b = (-(1.0 + w) * fq * sq_j + (2.0 + w - (1.0 + w) * fp) * sq_j1) / den;
        (a, b, f_bar)
    };

    let log_eps = log_eps - f_bar.ln();
    let w = -sqb_j1 * sqb_j1 * t / log_eps;
    let mu = (((1.0 + w) * sqb_j + sqb_j1) / (2.0 + w)).powi(2);
    let h = -2.0 * PI / log_eps * (sqb_j1 - sqb_j) / ((1.0 + w) * sqb_j + sqb_j1);
    let n = ((1.0 - log_eps / t / mu).sqrt() / h).ceil();
    if !(mu > 0.0 && h > 0.0 && n.is_finite()) {
        return None;
    }
    Some(Params { mu, h, n })
}

fn optimal_ru(t: f64, phi_j: f64, pj: f64, log_eps: f64) -> Option<Params> {
    let sq_phi = phi_j.sqrt();
    let mut phibar = if phi_j > 0.0 { phi_j * 1.01 } else { 0.01 };
    let mut sq_phibar = phibar.sqrt();
    let (f_min, f_max, f_tar) = (1.0, 10.0, 5.0);

    let mut n;
    let mut a_par;
    let mut sq_mu;
    let mut iter = 0;
    loop {
        let phi_t = phibar * t;
        let log_eps_phi_t = log_eps / phi_t;
        n = (phi_t / PI * (1.0 - 3.0 * log_eps_phi_t / 2.0 + (1.0 - 2.0 * log_eps_phi_t).sqrt())).ceil();
        a_par = PI * n / phi_t;
        sq_mu = sq_phibar * (4.0 - a_par).abs() / (7.0 - (1.0 + 12.0 * a_par).sqrt()).abs();
        let fbar = ((sq_phibar - sq_phi) / sq_mu).powf(-pj);
        if pj < 1e-14 || (f_min < fbar && fbar < f_max) {
            break;
        }
        sq_phibar = f_tar.powf(-1.0 / pj) * sq_mu + sq_phi;
        phibar = sq_phibar * sq_phibar;
        iter += 1;
        if iter > 200 {
            return None;
        }
    }
    let mut mu = sq_mu * sq_mu;
    let mut h = (-3.0 * a_par - 2.0 + 2.0 * (1.0 + 12.0 * a_par).sqrt()) / (4.0 - a_par) / n;

    // keep round-off under control
    let threshold = (log_eps - LOG_MACH_EPS) / t;
    if mu > threshold {
        let q = if pj.abs() < 1e-14 { 0.0 } else { f_tar.powf(-1.0 / pj) * mu.sqrt() };
        let phibar = (q + phi_j.sqrt()).powi(2);
        if phibar < threshold {
            let w = (LOG_MACH_EPS / (LOG_MACH_EPS - log_eps)).sqrt();
            let u = (-phibar * t / LOG_MACH_EPS).sqrt();
            mu = threshold;
            n = (w * log_eps / 2.0 / PI / (u * w - 1.0)).ceil();
            h = w / n;
        } else {
            return None;
        }
    }
    if !(mu > 0.0 && h > 0.0 && n.is_finite() && n >= 1.0) {
        return None;
    }
    Some(Params { mu, h, n })
}
