//! Property-based invariants across modules.

use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use crate::boxop::{SampledPath, Signal, Stencil, TimeWindow};
use crate::dynamics::{specific_force, Coupling, Potential};
use crate::equilibria::EquilibriumProblem;
use crate::rotframe::RotatingOperators;
use crate::{Vec2, C64};

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

/// A random stencil of half-width 1..=3 with step in `[0.05, 0.5]`.
fn stencil() -> impl Strategy<Value = Stencil> {
    (1usize..=3, 0.05..0.5f64)
        .prop_flat_map(|(n, eps)| (prop::collection::vec(complex(), 2 * n + 1), Just(eps)))
        .prop_map(|(g, eps)| Stencil::new(g, eps).unwrap())
}

/// A window of `len` steps starting at 0 and a path sampled on
/// `[-pad·ε, (len+pad)·ε]`.
fn path(eps: f64, len: usize, pad: usize, values: &[C64]) -> SampledPath {
    SampledPath::from_scalars(-(pad as f64) * eps, eps, values[..len + 2 * pad + 1].to_vec()).unwrap()
}

fn nodes(window: &TimeWindow, eps: f64) -> Vec<f64> {
    let k = ((window.tf - window.t0) / eps).round() as usize;
    (0..=k).map(|i| window.t0 + i as f64 * eps).collect()
}

fn at<S: Signal>(op: &Stencil, f: &S, w: &TimeWindow, t: f64) -> C64 {
    op.apply_box(f, w, t).unwrap()[0]
}

fn planar(points: &[(f64, f64)]) -> Vec<Vec2> {
    points.iter().map(|&(a, b)| [C64::new(a, 0.0), C64::new(b, 0.0)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn box_is_linear(op in stencil(), a in complex(), b in complex(),
                     fv in prop::collection::vec(complex(), 60), gv in prop::collection::vec(complex(), 60)) {
        let eps = op.eps();
        let len = 8 * op.halfwidth() + 4;
        let w = TimeWindow::new(0.0, len as f64 * eps).unwrap();
        let pad = 2 * op.halfwidth();
        let (f, g) = (path(eps, len, pad, &fv), path(eps, len, pad, &gv));
        let mix: Vec<C64> = fv.iter().zip(&gv).map(|(x, y)| a * x + b * y).collect();
        let h = path(eps, len, pad, &mix);
        for t in nodes(&w, eps) {
            let lhs = at(&op, &h, &w, t);
            let rhs = a * at(&op, &f, &w, t) + b * at(&op, &g, &w, t);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()) / eps);
        }
    }

    #[test]
    fn adjoint_is_the_grid_transpose(op in stencil(),
                                     fv in prop::collection::vec(complex(), 60), gv in prop::collection::vec(complex(), 60)) {
        prop_assert_eq!(op.adjoint().adjoint(), op.clone());
        let eps = op.eps();
        let len = 8 * op.halfwidth() + 4;
        let w = TimeWindow::new(0.0, len as f64 * eps).unwrap();
        let (f, g) = (path(eps, len, 0, &fv), path(eps, len, 0, &gv));
        let adj = op.adjoint();
        let (mut lhs, mut rhs) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (k, t) in nodes(&w, eps).into_iter().enumerate() {
            lhs += at(&op, &f, &w, t) * gv[k];
            rhs += fv[k] * at(&adj, &g, &w, t);
        }
        prop_assert!((lhs - rhs).norm() <= 1e-11 * len as f64 / eps);
    }

    #[test]
    fn box_ignores_values_outside_the_window(op in stencil(), fv in prop::collection::vec(complex(), 80),
                                             noise in prop::collection::vec(complex(), 80)) {
        let eps = op.eps();
        let n = op.halfwidth();
        let len = 8 * n + 4;
        let pad = 2 * n;
        let w = TimeWindow::new(0.0, len as f64 * eps).unwrap();
        let f = path(eps, len, pad, &fv);
        let mut changed = fv.clone();
        for k in (0..pad).chain(len + pad + 1..len + 2 * pad + 1) {
            changed[k] += noise[k];
        }
        let g = path(eps, len, pad, &changed);
        for t in nodes(&w, eps) {
            prop_assert_eq!(at(&op, &f, &w, t), at(&op, &g, &w, t));
            prop_assert_eq!(op.apply_box_star_box(&f, &w, t).unwrap(), op.apply_box_star_box(&g, &w, t).unwrap());
        }
    }

    #[test]
    fn ws_is_skew(op in stencil(), omega in 0.0..3.0f64,
                  fv in prop::collection::vec(complex(), 60), gv in prop::collection::vec(complex(), 60)) {
        let eps = op.eps();
        let len = 8 * op.halfwidth() + 4;
        let w = TimeWindow::new(0.0, len as f64 * eps).unwrap();
        let rot = RotatingOperators::new(op, omega).unwrap();
        let r = rot.skew_symmetry_residual(&path(eps, len, 0, &fv), &path(eps, len, 0, &gv), &w).unwrap();
        prop_assert!(r <= 1e-12, "residual {r}");
    }

    #[test]
    fn force_is_rotation_equivariant(pts in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3..6),
                                     angle in 0.0..6.3f64, beta in prop::sample::select(vec![-3.0, -1.0, 1.0, 3.0])) {
        let n = pts.len();
        let masses: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let pot = Potential::homogeneous(beta, Coupling::Gravitational { g: 1.0, masses: masses.clone() }).unwrap();
        let (c, s) = (angle.cos(), angle.sin());
        let rotated: Vec<(f64, f64)> = pts.iter().map(|&(a, b)| (c * a - s * b, s * a + c * b)).collect();
        let (x, y) = (planar(&pts), planar(&rotated));
        for i in 0..n {
            let (Ok(f), Ok(g)) = (specific_force(&masses, &x, &pot, i), specific_force(&masses, &y, &pot, i)) else {
                return Ok(());
            };
            let expect = [f[0] * c - f[1] * s, f[0] * s + f[1] * c];
            let scale = 1.0 + f[0].norm() + f[1].norm();
            prop_assert!((g[0] - expect[0]).norm() <= 1e-10 * scale);
            prop_assert!((g[1] - expect[1]).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn potential_is_homogeneous(r in 0.1..5.0f64, k in 0.2..5.0f64, beta in prop::sample::select(vec![-3.0, -1.0, 0.5, 3.0])) {
        let pot = Potential::homogeneous(beta, Coupling::Gravitational { g: 2.0, masses: vec![1.5, 0.5] }).unwrap();
        let v = pot.value(0, 1, C64::new(k * r, 0.0));
        let expect = pot.value(0, 1, C64::new(r, 0.0)) * k.powf(beta);
        prop_assert!((v - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn force_is_the_gradient_of_the_pair_energy(pts in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3..5),
                                                beta in prop::sample::select(vec![-1.0, 1.0, 3.0])) {
        let n = pts.len();
        let masses: Vec<f64> = (0..n).map(|i| 0.5 + i as f64).collect();
        let pot = Potential::homogeneous(beta, Coupling::Gravitational { g: 1.0, masses: masses.clone() }).unwrap();
        let x = planar(&pts);
        let energy = |x: &[Vec2]| -> Option<f64> {
            let mut u = 0.0;
            for j in 1..n {
                let (da, db) = (x[0][0] - x[j][0], x[0][1] - x[j][1]);
                let r = (da * da + db * db).sqrt();
                if r.norm() < 0.05 {
                    return None;
                }
                u += pot.specific_value(0, j, r, masses[0]).ok()?.re;
            }
            Some(u)
        };
        let Some(_) = energy(&x) else { return Ok(()) };
        let f = specific_force(&masses, &x, &pot, 0).unwrap();
        let h = 1e-6;
        for d in 0..2 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[0][d] += h;
            xm[0][d] -= h;
            let grad = (energy(&xp).unwrap() - energy(&xm).unwrap()) / (2.0 * h);
            prop_assert!((f[d].re - grad).abs() <= 1e-5 * (1.0 + grad.abs()), "{} vs {}", f[d].re, grad);
        }
    }

    #[test]
    fn algeq_residual_rotates_with_the_configuration(pts in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3),
                                                     angle in 0.0..6.3f64) {
        let masses = vec![1.0, 2.0, 3.0];
        let problem = EquilibriumProblem::new(masses.clone(), Potential::newtonian(1.0, masses).unwrap(), 1.5).unwrap();
        let x: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        let (c, s) = (angle.cos(), angle.sin());
        let y: Vec<[f64; 2]> = x.iter().map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect();
        let (Ok(rx), Ok(ry)) = (problem.algeq_residual(&x), problem.algeq_residual(&y)) else { return Ok(()) };
        for (a, b) in rx.iter().zip(&ry) {
            let scale = 1.0 + a[0].abs() + a[1].abs();
            prop_assert!((b[0] - (c * a[0] - s * a[1])).abs() <= 1e-10 * scale);
            prop_assert!((b[1] - (s * a[0] + c * a[1])).abs() <= 1e-10 * scale);
        }
    }
}
