//! Legendre-Galerkin discretization of the 2D TE system on a rectangle.
//!
//! Fields are stored by their values at the tensor LGL nodes (a nodal
//! Legendre basis), so every form is evaluated with the LGL rule and both
//! mass matrices are diagonal. Ex lives on all x nodes and interior y nodes,
//! Ey on interior x nodes and all y nodes, which builds the tangential
//! boundary condition into the space. H uses all nodes.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::timestepper::{FieldState, SpatialOps, StepSolver};
use crate::{Error, Result};

const NEWTON_ITERS: usize = 100;

/// Legendre polynomial P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = ±^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Legendre-Gauss-Lobatto nodes (ascending) and weights on [-1, 1].
pub fn lgl(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::Domain("LGL rule needs N >= 2"));
    }
    let nf = n as f64;
    let mut x = vec![0.0; n + 1];
    let mut w = vec![0.0; n + 1];
    x[0] = -1.0;
    x[n] = 1.0;
    for i in 1..n {
        // Chebyshev-Gauss-Lobatto start, Newton on (1-x²)P_n'
        let mut xi = -(core::f64::consts::PI * i as f64 / nf).cos();
        for _ in 0..NEWTON_ITERS {
            let (p, dp) = legendre(n, xi);
            // q = (1-x²)P_n', q' = -n(n+1)P_n
            let q = (1.0 - xi * xi) * dp;
            let dq = -nf * (nf + 1.0) * p;
            let step = q / dq;
            xi -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = xi;
    }
    for i in 0..=n {
        let (p, _) = legendre(n, x[i]);
        w[i] = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    // symmetrize against round-off
    for i in 0..=n / 2 {
        let (a, b) = (0.5 * (x[n - i] - x[i]), 0.5 * (w[i] + w[n - i]));
        x[i] = -a;
        x[n - i] = a;
        w[i] = b;
        w[n - i] = b;
    }
    if n % 2 == 0 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// Nodal differentiation matrix on the reference LGL nodes, D[i][j] = l_j'(x_i).
pub fn lgl_diff(x: &[f64]) -> DMatrix<f64> {
    let n = x.len() - 1;
    let nf = n as f64;
    let pn: Vec<f64> = x.iter().map(|&xi| legendre(n, xi).0).collect();
    DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i != j {
            pn[i] / (pn[j] * (x[i] - x[j]))
        } else if i == 0 {
            -nf * (nf + 1.0) / 4.0
        } else if i == n {
            nf * (nf + 1.0) / 4.0
        } else {
            0.0
        }
    })
}

/// Axis-aligned rectangle (a, b) × (c, d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Rect {
    pub const REFERENCE: Rect = Rect { a: -1.0, b: 1.0, c: -1.0, d: 1.0 };
}

/// One mapped LGL direction.
#[derive(Debug, Clone)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub diff: DMatrix<f64>,
    bary: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(n: usize, lo: f64, hi: f64) -> Result<Self> {
        let (r, w) = lgl(n)?;
        let jac = 0.5 * (hi - lo);
        let d = lgl_diff(&r) / jac;
        let nodes: Vec<f64> = r.iter().map(|&s| lo + jac * (s + 1.0)).collect();
        let bary = (0..=n)
            .map(|j| 1.0 / (0..=n).filter(|&k| k != j).map(|k| r[j] - r[k]).product::<f64>())
            .collect();
        Ok(Self { nodes, weights: w.iter().map(|v| v * jac).collect(), diff: d, bary, lo, hi })
    }

    /// Values of all Lagrange cardinal functions at x.
    pub fn cardinals(&self, x: f64) -> Result<Vec<f64>> {
        let tol = 1e-12 * (self.hi - self.lo);
        if !(x >= self.lo - tol && x <= self.hi + tol) {
            return Err(Error::Domain("evaluation point outside the domain"));
        }
        let s = 2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0;
        let r: Vec<f64> = self.nodes.iter().map(|&v| 2.0 * (v - self.lo) / (self.hi - self.lo) - 1.0).collect();
        let mut out = vec![0.0; r.len()];
        if let Some(j) = r.iter().position(|&rj| rj == s) {
            out[j] = 1.0;
            return Ok(out);
        }
        let mut den = 0.0;
        for j in 0..r.len() {
            let t = self.bary[j] / (s - r[j]);
            out[j] = t;
            den += t;
        }
        out.iter_mut().for_each(|v| *v /= den);
        Ok(out)
    }
}

/// Degree, domain and LGL data per direction.
#[derive(Debug, Clone)]
pub struct SpectralSpace {
    pub n: usize,
    pub rect: Rect,
    pub x: Axis,
    pub y: Axis,
}

pub fn build_space(n: usize, rect: Rect) -> Result<SpectralSpace> {
    if !(rect.b > rect.a && rect.d > rect.c) {
        return Err(Error::Domain("empty rectangle"));
    }
    Ok(SpectralSpace { n, rect, x: Axis::new(n, rect.a, rect.b)?, y: Axis::new(n, rect.c, rect.d)? })
}

impl SpectralSpace {
    pub fn n_ex(&self) -> usize {
        (self.n + 1) * (self.n - 1)
    }

    pub fn dofs_e(&self) -> usize {
        2 * self.n_ex()
    }

    pub fn dofs_h(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    /// Index of Ex at node (i, j), 1 ≤ j ≤ N-1.
    pub fn ex(&self, i: usize, j: usize) -> usize {
        i * (self.n - 1) + (j - 1)
    }

    /// Index of Ey at node (i, j), 1 ≤ i ≤ N-1.
    pub fn ey(&self, i: usize, j: usize) -> usize {
        self.n_ex() + (i - 1) * (self.n + 1) + j
    }

    pub fn h(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }

    fn w(&self, i: usize, j: usize) -> f64 {
        self.x.weights[i] * self.y.weights[j]
    }

    /// Full nodal grids (Ex, Ey), zeros on the constrained edges, row i = x index.
    pub fn e_grids(&self, e: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut gx = vec![0.0; (n + 1) * (n + 1)];
        let mut gy = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..=n {
            for j in 1..n {
                gx[self.h(i, j)] = e[self.ex(i, j)];
            }
        }
        for i in 1..n {
            for j in 0..=n {
                gy[self.h(i, j)] = e[self.ey(i, j)];
            }
        }
        (gx, gy)
    }

    /// Discrete LGL norm of a vector field against (fx, fy).
    pub fn l2_error_e(&self, e: &[f64], exact: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
        let (gx, gy) = self.e_grids(e);
        let mut s = 0.0;
        for i in 0..=self.n {
            for j in 0..=self.n {
                let (ux, uy) = exact(self.x.nodes[i], self.y.nodes[j]);
                let k = self.h(i, j);
                s += self.w(i, j) * ((gx[k] - ux).powi(2) + (gy[k] - uy).powi(2));
            }
        }
        s.sqrt()
    }

    /// Discrete LGL norm of a scalar field against f.
    pub fn l2_error_h(&self, h: &[f64], exact: impl Fn(f64, f64) -> f64) -> f64 {
        let mut s = 0.0;
        for i in 0..=self.n {
            for j in 0..=self.n {
                let d = h[self.h(i, j)] - exact(self.x.nodes[i], self.y.nodes[j]);
                s += self.w(i, j) * d * d;
            }
        }
        s.sqrt()
    }

    /// Nodal values of (E0, H0); fails when E0 violates the tangential condition.
    pub fn interpolate_init(&self, e0: impl Fn(f64, f64) -> (f64, f64), h0: impl Fn(f64, f64) -> f64) -> Result<FieldState> {
        let n = self.n;
        let mut e = vec![0.0; self.dofs_e()];
        let mut h = vec![0.0; self.dofs_h()];
        let mut peak: f64 = 0.0;
        let mut resid: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (self.x.nodes[i], self.y.nodes[j]);
                let (ex, ey) = e0(x, y);
                peak = peak.max(ex.abs()).max(ey.abs());
                if j == 0 || j == n {
                    resid = resid.max(ex.abs());
                } else {
                    e[self.ex(i, j)] = ex;
                }
                if i == 0 || i == n {
                    resid = resid.max(ey.abs());
                } else {
                    e[self.ey(i, j)] = ey;
                }
                h[self.h(i, j)] = h0(x, y);
            }
        }
        if resid > 1e-12 * peak.max(f64::MIN_POSITIVE) {
            return Err(Error::Boundary(resid));
        }
        Ok(FieldState::initial(e, h))
    }

    /// Point values of a nodal grid (row i = x index).
    pub fn evaluate(&self, grid: &[f64], points: &[(f64, f64)]) -> Result<Vec<f64>> {
        if grid.len() != self.dofs_h() {
            return Err(Error::Dimension { expected: self.dofs_h(), got: grid.len() });
        }
        let n = self.n;
        points
            .iter()
            .map(|&(x, y)| {
                let lx = self.x.cardinals(x)?;
                let ly = self.y.cardinals(y)?;
                let mut v = 0.0;
                for i in 0..=n {
                    if lx[i] == 0.0 {
                        continue;
                    }
                    let row: f64 = (0..=n).map(|j| grid[self.h(i, j)] * ly[j]).sum();
                    v += lx[i] * row;
                }
                Ok(v)
            })
            .collect()
    }
}

/// Diagonal masses and the weak curl pair on a [`SpectralSpace`].
#[derive(Debug, Clone)]
pub struct GalerkinOperators {
    pub space: SpectralSpace,
    pub me: Vec<f64>,
    pub mh: Vec<f64>,
}

pub fn assemble(space: SpectralSpace) -> GalerkinOperators {
    let n = space.n;
    let mut me = vec![0.0; space.dofs_e()];
    let mut mh = vec![0.0; space.dofs_h()];
    for i in 0..=n {
        for j in 0..=n {
            let w = space.w(i, j);
            mh[space.h(i, j)] = w;
            if j > 0 && j < n {
                me[space.ex(i, j)] = w;
            }
            if i > 0 && i < n {
                me[space.ey(i, j)] = w;
            }
        }
    }
    GalerkinOperators { space, me, mh }
}

// R = W D0 W0⁻¹ D0ᵀ W with D0 the interior columns of D
fn stiffness(ax: &Axis) -> DMatrix<f64> {
    let m = ax.nodes.len();
    let mut r = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            let mut s = 0.0;
            for i in 1..m - 1 {
                s += ax.diff[(p, i)] * ax.diff[(q, i)] / ax.weights[i];
            }
            r[(p, q)] = ax.weights[p] * s * ax.weights[q];
        }
    }
    r
}

// V with Vᵀ W V = I and Vᵀ R V = diag(λ)
fn gen_eigen(ax: &Axis) -> (DMatrix<f64>, Vec<f64>) {
    let r = stiffness(ax);
    let m = r.nrows();
    let s: Vec<f64> = ax.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let a = DMatrix::from_fn(m, m, |i, j| s[i] * r[(i, j)] * s[j]);
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let v = DMatrix::from_fn(m, m, |i, j| s[i] * eig.eigenvectors[(i, j)]);
    (v, eig.eigenvalues.iter().copied().collect())
}

/// Fast-diagonalization solver of the per-step system, eliminating E.
#[derive(Debug, Clone)]
pub struct SpectralSolver {
    ops: GalerkinOperators,
    c: f64,
    dt: f64,
    vx: DMatrix<f64>,
    vy: DMatrix<f64>,
    inv_diag: DMatrix<f64>,
}

impl StepSolver for SpectralSolver {
    fn solve(&self, re: &[f64], rh: &[f64], e: &mut [f64], h: &mut [f64]) -> Result<()> {
        let sp = &self.ops.space;
        let m = sp.n + 1;
        let (ne, nh) = (sp.dofs_e(), sp.dofs_h());
        if re.len() != ne || e.len() != ne || rh.len() != nh || h.len() != nh {
            return Err(Error::Dimension { expected: ne + nh, got: re.len() + rh.len() });
        }
        // [M_H + (dt²/c) C M_E⁻¹ Cᵀ] H = rh - (dt/c) C M_E⁻¹ re
        let scaled: Vec<f64> = re.iter().zip(&self.ops.me).map(|(r, w)| r / w).collect();
        let mut ce = vec![0.0; nh];
        self.ops.curl(&scaled, &mut ce);
        let k = self.dt / self.c;
        let rhs = DMatrix::from_fn(m, m, |i, j| {
            let q = sp.h(i, j);
            rh[q] - k * ce[q]
        });
        let t = self.vx.tr_mul(&rhs) * &self.vy;
        let t = t.component_mul(&self.inv_diag);
        let hm = &self.vx * t * self.vy.transpose();
        for i in 0..m {
            for j in 0..m {
                h[sp.h(i, j)] = hm[(i, j)];
            }
        }
        // E = (c M_E)⁻¹ (re + dt Cᵀ H)
        self.ops.curl_t(h, e);
        for ((ev, r), w) in e.iter_mut().zip(re).zip(&self.ops.me) {
            *ev = (r + self.dt * *ev) / (self.c * w);
        }
        if e.iter().chain(h.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution"));
        }
        Ok(())
    }
}

impl SpatialOps for GalerkinOperators {
    type Solver = SpectralSolver;

    fn dofs_e(&self) -> usize {
        self.space.dofs_e()
    }

    fn dofs_h(&self) -> usize {
        self.space.dofs_h()
    }

    fn mass_e(&self, x: &[f64], out: &mut [f64]) {
        for ((o, v), w) in out.iter_mut().zip(x).zip(&self.me) {
            *o = v * w;
        }
    }

    fn mass_h(&self, x: &[f64], out: &mut [f64]) {
        for ((o, v), w) in out.iter_mut().zip(x).zip(&self.mh) {
            *o = v * w;
        }
    }

    fn curl(&self, e: &[f64], out: &mut [f64]) {
        let sp = &self.space;
        let n = sp.n;
        let (dx, dy) = (&sp.x.diff, &sp.y.diff);
        for i in 0..=n {
            for j in 0..=n {
                let mut v = 0.0;
                for ip in 1..n {
                    v += dx[(i, ip)] * e[sp.ey(ip, j)];
                }
                for jp in 1..n {
                    v -= dy[(j, jp)] * e[sp.ex(i, jp)];
                }
                out[sp.h(i, j)] = sp.w(i, j) * v;
            }
        }
    }

    fn curl_t(&self, h: &[f64], out: &mut [f64]) {
        let sp = &self.space;
        let n = sp.n;
        let (dx, dy) = (&sp.x.diff, &sp.y.diff);
        for i in 0..=n {
            for j in 1..n {
                let mut v = 0.0;
                for jp in 0..=n {
                    v -= dy[(jp, j)] * sp.w(i, jp) * h[sp.h(i, jp)];
                }
                out[sp.ex(i, j)] = v;
            }
        }
        for i in 1..n {
            for j in 0..=n {
                let mut v = 0.0;
                for ip in 0..=n {
                    v += dx[(ip, i)] * sp.w(ip, j) * h[sp.h(ip, j)];
                }
                out[sp.ey(i, j)] = v;
            }
        }
    }

    fn factor(&self, c: f64, dt: f64) -> Result<SpectralSolver> {
        if !(c > 0.0 && dt > 0.0) {
            return Err(Error::Solver("step coefficient must be positive"));
        }
        let (vx, lx) = gen_eigen(&self.space.x);
        let (vy, ly) = gen_eigen(&self.space.y);
        let kappa = dt * dt / c;
        let m = self.space.n + 1;
        let inv_diag = DMatrix::from_fn(m, m, |i, j| 1.0 / (1.0 + kappa * (lx[i] + ly[j])));
        if inv_diag.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Solver("step matrix not positive definite"));
        }
        Ok(SpectralSolver { ops: self.clone(), c, dt, vx, vy, inv_diag })
    }

    fn norm2_e(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.me).map(|(v, w)| w * v * v).sum()
    }

    fn norm2_h(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.mh).map(|(v, w)| w * v * v).sum()
    }
}
