//! Closed-form test solution on (-1, 1)² with zero initial data.
//!
//! With w = (-cos πx sin πy, sin πx cos πy) and e_μ(t) = e^β_{α,μ}(t;-1):
//!
//! ```text
//! E = t⁴/24 w
//! H = (4ε∞t³/(24π) + (Δε/π) e_{αβ+4}(t)) cos πx cos πy
//! P = Δε e_{αβ+5}(t) w
//! g = (2πt⁴/24 + 12ε∞t²/(24π) + (Δε/π) e_{αβ+3}(t)) cos πx cos πy
//! ```
//!
//! g is the only source and drives the H equation.

use std::f64::consts::PI;

use hn_core::prabhakar::kernel_e;
use hn_core::spectral2d::GalerkinOperators;
use hn_core::timestepper::{Forcing, MediumParams};

fn e_mu(m: &MediumParams, shift: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    kernel_e(m.kernel(), m.alpha * m.beta + shift, m.beta, t).expect("kernel evaluation")
}

pub fn w(x: f64, y: f64) -> (f64, f64) {
    (-(PI * x).cos() * (PI * y).sin(), (PI * x).sin() * (PI * y).cos())
}

fn cc(x: f64, y: f64) -> f64 {
    (PI * x).cos() * (PI * y).cos()
}

/// Time amplitudes (E, H, P) at t.
#[derive(Debug, Clone, Copy)]
pub struct Amplitudes {
    pub e: f64,
    pub h: f64,
    pub p: f64,
}

pub fn amplitudes(m: &MediumParams, t: f64) -> Amplitudes {
    Amplitudes {
        e: t.powi(4) / 24.0,
        h: 4.0 * m.eps_inf * t.powi(3) / (24.0 * PI) + m.delta_eps / PI * e_mu(m, 4.0, t),
        p: m.delta_eps * e_mu(m, 5.0, t),
    }
}

pub fn source_amplitude(m: &MediumParams, t: f64) -> f64 {
    2.0 * PI * t.powi(4) / 24.0 + 12.0 * m.eps_inf * t * t / (24.0 * PI) + m.delta_eps / PI * e_mu(m, 3.0, t)
}

/// Exact fields at t as closures.
pub fn exact_e(m: &MediumParams, t: f64) -> impl Fn(f64, f64) -> (f64, f64) {
    let a = amplitudes(m, t).e;
    move |x, y| {
        let (u, v) = w(x, y);
        (a * u, a * v)
    }
}

pub fn exact_p(m: &MediumParams, t: f64) -> impl Fn(f64, f64) -> (f64, f64) {
    let a = amplitudes(m, t).p;
    move |x, y| {
        let (u, v) = w(x, y);
        (a * u, a * v)
    }
}

pub fn exact_h(m: &MediumParams, t: f64) -> impl Fn(f64, f64) -> f64 {
    let a = amplitudes(m, t).h;
    move |x, y| a * cc(x, y)
}

/// Load vector M_H g(t_k) on the LGL grid.
pub struct ManufacturedSource {
    medium: MediumParams,
    shape: Vec<f64>,
}

impl ManufacturedSource {
    pub fn new(ops: &GalerkinOperators, medium: MediumParams) -> Self {
        let sp = &ops.space;
        let mut shape = vec![0.0; sp.dofs_h()];
        for i in 0..=sp.n {
            for j in 0..=sp.n {
                let q = sp.h(i, j);
                shape[q] = ops.mh[q] * cc(sp.x.nodes[i], sp.y.nodes[j]);
            }
        }
        Self { medium, shape }
    }
}

impl Forcing for ManufacturedSource {
    fn eval(&self, _k: usize, t: f64, _f: &mut [f64], g: &mut [f64], _h: &mut [f64]) {
        let a = source_amplitude(&self.medium, t);
        for (gv, s) in g.iter_mut().zip(&self.shape) {
            *gv = a * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_from_rest() {
        let m = MediumParams::new(1.0, 2.0, 0.5, 0.5).unwrap();
        let a = amplitudes(&m, 0.0);
        assert_eq!((a.e, a.h, a.p), (0.0, 0.0, 0.0));
    }

    #[test]
    fn h_equation_balances() {
        // ∂t H + curl E = g with curl E = 2π t⁴/24 cos cos
        let m = MediumParams::new(1.0, 2.0, 0.5, 0.5).unwrap();
        let (t, d) = (0.7, 1e-5);
        let dh = (amplitudes(&m, t + d).h - amplitudes(&m, t - d).h) / (2.0 * d);
        let r = dh + 2.0 * PI * t.powi(4) / 24.0 - source_amplitude(&m, t);
        assert!(r.abs() < 1e-8, "{r}");
    }

    #[test]
    fn e_equation_balances() {
        // ε∞ ∂t E + ∂t P = π A_H
        let m = MediumParams::new(1.0, 2.0, 0.3, 0.6).unwrap();
        let (t, d) = (0.4, 1e-5);
        let de = (amplitudes(&m, t + d).e - amplitudes(&m, t - d).e) / (2.0 * d);
        let dp = (amplitudes(&m, t + d).p - amplitudes(&m, t - d).p) / (2.0 * d);
        let r = m.eps_inf * de + dp - PI * amplitudes(&m, t).h;
        assert!(r.abs() < 1e-8, "{r}");
    }
}
