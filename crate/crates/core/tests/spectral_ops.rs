mod common;

use std::f64::consts::PI;

use hn_core::spectral2d::{assemble, build_space, Rect};
use hn_core::timestepper::{run, DenseOps, HistoryMode, MediumParams, RunOptions, SpatialOps, StepSolver};
use hn_core::Error;
use nalgebra::DMatrix;

fn dense(ops: &impl SpatialOps) -> DenseOps {
    let (ne, nh) = (ops.dofs_e(), ops.dofs_h());
    let mut c = DMatrix::zeros(nh, ne);
    let mut me = DMatrix::zeros(ne, ne);
    let mut mh = DMatrix::zeros(nh, nh);
    let mut unit = vec![0.0; ne];
    let mut col = vec![0.0; nh];
    let mut mcol = vec![0.0; ne];
    for j in 0..ne {
        unit[j] = 1.0;
        ops.curl(&unit, &mut col);
        c.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        ops.mass_e(&unit, &mut mcol);
        me.set_column(j, &nalgebra::DVector::from_column_slice(&mcol));
        unit[j] = 0.0;
    }
    let mut uh = vec![0.0; nh];
    for j in 0..nh {
        uh[j] = 1.0;
        ops.mass_h(&uh, &mut col);
        mh.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        uh[j] = 0.0;
    }
    DenseOps::new(me, mh, c).unwrap()
}

#[test]
fn curl_pair_is_adjoint() {
    let ops = assemble(build_space(9, Rect { a: -0.5, b: 2.0, c: 0.0, d: 1.5 }).unwrap());
    let e = common::uniform(1, ops.dofs_e());
    let h = common::uniform(2, ops.dofs_h());
    let mut ce = vec![0.0; ops.dofs_h()];
    let mut cth = vec![0.0; ops.dofs_e()];
    ops.curl(&e, &mut ce);
    ops.curl_t(&h, &mut cth);
    let a: f64 = h.iter().zip(&ce).map(|(x, y)| x * y).sum();
    let b: f64 = e.iter().zip(&cth).map(|(x, y)| x * y).sum();
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn fast_diagonalization_matches_dense_solve() {
    let ops = assemble(build_space(6, Rect { a: 0.0, b: 2.0, c: -1.0, d: 0.5 }).unwrap());
    let d = dense(&ops);
    let (c, dt) = (1.7, 0.3);
    let fast = ops.factor(c, dt).unwrap();
    let slow = d.factor(c, dt).unwrap();
    let re = common::uniform(3, ops.dofs_e());
    let rh = common::uniform(4, ops.dofs_h());
    let (mut e1, mut h1) = (vec![0.0; ops.dofs_e()], vec![0.0; ops.dofs_h()]);
    let (mut e2, mut h2) = (e1.clone(), h1.clone());
    fast.solve(&re, &rh, &mut e1, &mut h1).unwrap();
    slow.solve(&re, &rh, &mut e2, &mut h2).unwrap();
    for (a, b) in e1.iter().zip(&e2).chain(h1.iter().zip(&h2)) {
        assert!((a - b).abs() < 1e-11, "{a} vs {b}");
    }
}

#[test]
fn weak_curl_matches_derivatives_on_mapped_domain() {
    let sp = build_space(14, Rect { a: 1.0, b: 3.0, c: -2.0, d: -0.5 }).unwrap();
    let (a, c) = (sp.rect.a, sp.rect.c);
    // Ex = (y-c)(y-d)·x², Ey = (x-a)(x-b)·y so curl = ∂x Ey - ∂y Ex
    let st = sp
        .interpolate_init(
            |x, y| ((y - c) * (y + 0.5) * x * x, (x - a) * (x - 3.0) * y),
            |_, _| 0.0,
        )
        .unwrap();
    let ops = assemble(sp.clone());
    let mut ce = vec![0.0; ops.dofs_h()];
    ops.curl(&st.e, &mut ce);
    for i in 0..=sp.n {
        for j in 0..=sp.n {
            let (x, y) = (sp.x.nodes[i], sp.y.nodes[j]);
            let exact = (2.0 * x - a - 3.0) * y - (2.0 * y - c + 0.5) * x * x;
            let q = sp.h(i, j);
            assert!((ce[q] / ops.mh[q] - exact).abs() < 1e-10);
        }
    }
}

#[test]
fn interpolation_and_evaluation() {
    let sp = build_space(50, Rect::REFERENCE).unwrap();
    let f = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let st = sp.interpolate_init(|_, _| (0.0, 0.0), f).unwrap();
    let pts: Vec<(f64, f64)> = common::uniform(5, 40).chunks(2).map(|c| (c[0], c[1])).collect();
    let vals = sp.evaluate(&st.h, &pts).unwrap();
    for (&(x, y), v) in pts.iter().zip(vals) {
        assert!((v - f(x, y)).abs() < 1e-12);
    }
    assert!(st.p.iter().all(|&v| v == 0.0));
    assert!(matches!(sp.evaluate(&st.h, &[(1.5, 0.0)]), Err(Error::Domain(_))));

    let sp = build_space(5, Rect::REFERENCE).unwrap();
    let poly = |x: f64, y: f64| x.powi(5) - 2.0 * x * y.powi(4) + 0.5;
    let st = sp.interpolate_init(|_, _| (0.0, 0.0), poly).unwrap();
    let vals = sp.evaluate(&st.h, &[(0.3, -0.7), (1.0, 1.0), (-0.11, 0.92)]).unwrap();
    for (v, (x, y)) in vals.iter().zip([(0.3, -0.7), (1.0, 1.0), (-0.11, 0.92)]) {
        assert!((v - poly(x, y)).abs() < 1e-13);
    }
}

#[test]
fn boundary_incompatible_data_is_rejected() {
    let sp = build_space(8, Rect::REFERENCE).unwrap();
    let r = sp.interpolate_init(|x, y| (x + y, 0.0), |_, _| 0.0);
    assert!(matches!(r, Err(Error::Boundary(_))));
    let s = 0.5f64.sqrt();
    let st = sp
        .interpolate_init(
            |x, y| ((PI * x).cos() * (PI * y).sin() * s, -(PI * x).sin() * (PI * y).cos() * s),
            |_, _| 0.0,
        )
        .unwrap();
    let (gx, gy) = sp.e_grids(&st.e);
    for i in 0..=8 {
        assert_eq!(gx[sp.h(i, 0)], 0.0);
        assert_eq!(gy[sp.h(0, i)], 0.0);
    }
}

#[test]
fn small_homogeneous_run_dissipates() {
    let sp = build_space(12, Rect::REFERENCE).unwrap();
    let s = 0.5f64.sqrt();
    let init = sp
        .interpolate_init(
            |x, y| ((PI * x).cos() * (PI * y).sin() * s, -(PI * x).sin() * (PI * y).cos() * s),
            |_, _| 0.0,
        )
        .unwrap();
    let ops = assemble(sp);
    let m = MediumParams::new(1.0, 2.0, 0.3, 0.7).unwrap();
    for dt in [0.01, 1.0] {
        let out = run(&ops, m, init.clone(), &RunOptions::new(dt, 100, HistoryMode::Direct), None).unwrap();
        let e0 = out.trace.initial();
        assert!(out.trace.max_increase() <= 1e-12 * e0);
        assert!(out.trace.rows.iter().all(|r| r.plain <= 10.0 * e0));
    }
}
