//! Relative equilibria: the algebraic system
//!
//! ```text
//! -λ m_i x_i = Σ_{j≠i} f'_ij(s_ij) (x_i - x_j) / s_ij
//! ```
//!
//! (and its `y` analogue), a gauge-fixed Gauss-Newton solver, three-body
//! classification, the L4/L5 points of the restricted problem and the
//! homothety between classical (`λ = ω²`) and discrete (`λ = Ω²(ε)`)
//! solutions.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{effective_mass, specific_force, ConstantsOfMotion, PlanarConfiguration, Potential};
use crate::linalg::least_squares;
use crate::math;
use crate::rotframe::ExpansionFactor;
use crate::{Error, Result, Vec2, C64};

pub const MAX_ITERATIONS: usize = 100;
pub const SOLVER_TOLERANCE: f64 = 1e-10;
pub const CLASSIFY_TOLERANCE: f64 = 1e-8;
/// Relative tolerance of the residual check in [`scale_equilibrium`].
pub const SCALING_TOLERANCE: f64 = 1e-10;

/// Masses, potential and multiplier `λ` of the algebraic system.
#[derive(Debug, Clone)]
pub struct EquilibriumProblem {
    pub masses: Vec<f64>,
    pub potential: Potential,
    pub lambda: f64,
}

/// How the rotation and translation freedom was removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gauge {
    /// The body placed on the positive `x` axis, the centre of mass of the
    /// massive bodies being at the origin.
    pub anchor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub coords: Vec<[f64; 2]>,
    pub lambda: f64,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub gauge: Option<Gauge>,
}

impl EquilibriumProblem {
    pub fn new(masses: Vec<f64>, potential: Potential, lambda: f64) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidConfiguration("need at least two bodies"));
        }
        if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) || masses.iter().all(|m| *m == 0.0) {
            return Err(Error::InvalidConfiguration("masses must be nonnegative with one positive"));
        }
        if let Some(n) = potential.bodies() {
            if n != masses.len() {
                return Err(Error::DimensionMismatch {
                    expected: masses.len(),
                    found: n,
                });
            }
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter("multiplier must be positive and finite"));
        }
        Ok(EquilibriumProblem { masses, potential, lambda })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Same masses and potential with another multiplier.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        EquilibriumProblem::new(self.masses.clone(), self.potential.clone(), lambda)
    }

    /// Per body, `-λ m̃_i x_i - m̃_i F_i` where `m̃_i F_i` is the pair sum.
    /// Test particles use unit mass.
    pub fn algeq_residual(&self, coords: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        if coords.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coords.len(),
            });
        }
        let c = complexify(coords);
        (0..self.len())
            .map(|i| {
                let f = specific_force(&self.masses, &c, &self.potential, i)?;
                let m = effective_mass(self.masses[i]);
                Ok([
                    m * (-self.lambda * coords[i][0] - f[0].re),
                    m * (-self.lambda * coords[i][1] - f[1].re),
                ])
            })
            .collect()
    }

    /// Largest `|λ m̃_i x_i|`, the natural size of the residual terms.
    fn force_scale(&self, coords: &[[f64; 2]]) -> f64 {
        coords
            .iter()
            .zip(&self.masses)
            .map(|(p, m)| self.lambda * effective_mass(*m) * math::sqrt(p[0] * p[0] + p[1] * p[1]))
            .fold(0.0, f64::max)
    }

    pub fn residual_norm(&self, coords: &[[f64; 2]]) -> Result<f64> {
        Ok(norm(self.algeq_residual(coords)?.iter().flatten()))
    }
}

fn complexify(coords: &[[f64; 2]]) -> Vec<Vec2> {
    coords
        .iter()
        .map(|p| [C64::new(p[0], 0.0), C64::new(p[1], 0.0)])
        .collect()
}

fn norm<'a>(v: impl Iterator<Item = &'a f64>) -> f64 {
    math::sqrt(v.map(|x| x * x).sum())
}

fn center_of_mass(masses: &[f64], coords: &[[f64; 2]]) -> [f64; 2] {
    let total: f64 = masses.iter().sum();
    let mut c = [0.0; 2];
    for (m, p) in masses.iter().zip(coords) {
        c[0] += m * p[0] / total;
        c[1] += m * p[1] / total;
    }
    c
}

fn rotate(coords: &mut [[f64; 2]], angle: f64) {
    let (s, c) = (math::sin(angle), math::cos(angle));
    for p in coords {
        *p = [c * p[0] - s * p[1], s * p[0] + c * p[1]];
    }
}

/// Damped Gauss-Newton on the residual augmented with the two centre-of-mass
/// rows and one rotation row.
///
/// The guess is first centred and rotated so that the body farthest from the
/// centre of mass lies on the positive `x` axis; that body's `y` is then held
/// at zero. The Jacobian uses central differences with step `1e-7` times the
/// configuration size, and each step is halved until the residual decreases.
pub fn solve_relative_equilibrium(
    problem: &EquilibriumProblem,
    initial_guess: &[[f64; 2]],
) -> Result<EquilibriumSolution> {
    let n = problem.len();
    if initial_guess.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: initial_guess.len(),
        });
    }
    if initial_guess.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfiguration("initial guess must be finite"));
    }
    let mut coords = initial_guess.to_vec();
    let com = center_of_mass(&problem.masses, &coords);
    for p in coords.iter_mut() {
        p[0] -= com[0];
        p[1] -= com[1];
    }
    let radius = |p: &[f64; 2]| p[0] * p[0] + p[1] * p[1];
    let anchor = (0..n)
        .max_by(|&a, &b| radius(&coords[a]).total_cmp(&radius(&coords[b])))
        .expect("at least two bodies");
    if radius(&coords[anchor]) == 0.0 {
        return Err(Error::Collision { i: 0, j: 1 });
    }
    let angle = libm::atan2(coords[anchor][1], coords[anchor][0]);
    rotate(&mut coords, -angle);
    coords[anchor][1] = 0.0;

    let total_mass: f64 = problem.masses.iter().sum();
    let size = math::sqrt(radius(&coords[anchor]));
    let gauge_weight = problem.lambda * total_mass / n as f64;
    let rows = 2 * n + 3;
    let cols = 2 * n;
    let system = |z: &[f64]| -> Result<Vec<f64>> {
        let c: Vec<[f64; 2]> = z.chunks(2).map(|p| [p[0], p[1]]).collect();
        let mut out: Vec<f64> = problem.algeq_residual(&c)?.into_iter().flatten().collect();
        let mut mx = 0.0;
        let mut my = 0.0;
        for (m, p) in problem.masses.iter().zip(&c) {
            mx += m * p[0];
            my += m * p[1];
        }
        out.push(gauge_weight * mx / total_mass);
        out.push(gauge_weight * my / total_mass);
        out.push(gauge_weight * c[anchor][1]);
        Ok(out)
    };

    let mut z: Vec<f64> = coords.iter().flatten().copied().collect();
    let mut r = system(&z)?;
    let r0 = norm(r.iter());
    let tol = SOLVER_TOLERANCE * r0.max(1.0);
    let h = 1e-7 * size;
    let mut jac = vec![0.0; rows * cols];
    let mut iterations = 0;
    while norm(r.iter()) > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NotConverged {
                iterations,
                residual: norm(r.iter()),
            });
        }
        iterations += 1;
        for k in 0..cols {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let (rp, rm) = (system(&zp)?, system(&zm)?);
            for i in 0..rows {
                jac[i * cols + k] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let dz = least_squares(&jac, rows, cols, &neg).ok_or(Error::SingularJacobian)?;
        let current = norm(r.iter());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a + t * d).collect();
            if let Ok(rt) = system(&trial) {
                if norm(rt.iter()) < current {
                    z = trial;
                    r = rt;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::NotConverged {
                    iterations,
                    residual: current,
                });
            }
        }
    }
    let mut coords: Vec<[f64; 2]> = z.chunks(2).map(|p| [p[0], p[1]]).collect();
    if coords[anchor][0] < 0.0 {
        rotate(&mut coords, core::f64::consts::PI);
        coords[anchor][1] = 0.0;
    }
    let residual_norm = problem.residual_norm(&coords)?;
    Ok(EquilibriumSolution {
        coords,
        lambda: problem.lambda,
        residual_norm,
        gauge: Some(Gauge { anchor }),
    })
}

/// Shape of a three-body configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeBodyShape {
    Colinear,
    Equilateral,
    Other,
}

/// `Colinear` if the triangle area is at most `tol·diameter²`, `Equilateral`
/// if the sides agree to `tol` relative, `Other` otherwise.
pub fn classify_three_body(coords: &[[f64; 2]; 3], tol: f64) -> ThreeBodyShape {
    let side = |i: usize, j: usize| {
        let (dx, dy) = (coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
        math::sqrt(dx * dx + dy * dy)
    };
    let sides = [side(0, 1), side(1, 2), side(0, 2)];
    let diam = sides.iter().copied().fold(0.0, f64::max);
    let (ux, uy) = (coords[1][0] - coords[0][0], coords[1][1] - coords[0][1]);
    let (vx, vy) = (coords[2][0] - coords[0][0], coords[2][1] - coords[0][1]);
    let area = 0.5 * (ux * vy - uy * vx).abs();
    if area <= tol * diam * diam {
        return ThreeBodyShape::Colinear;
    }
    let shortest = sides.iter().copied().fold(f64::INFINITY, f64::min);
    if (diam - shortest) / diam <= tol {
        ThreeBodyShape::Equilateral
    } else {
        ThreeBodyShape::Other
    }
}

/// L4 `(μ-½, √3/2)` and L5 `(μ-½, -√3/2)` for primaries `1-μ` at `(μ, 0)` and
/// `μ` at `(μ-1, 0)`.
pub fn lagrange_points_l45(mu: f64) -> Result<[[f64; 2]; 2]> {
    if !(mu > 0.0 && mu < 0.5) {
        return Err(Error::InvalidParameter("mass ratio must lie in (0, 1/2)"));
    }
    let h = math::sqrt(3.0) / 2.0;
    Ok([[mu - 0.5, h], [mu - 0.5, -h]])
}

/// The restricted problem (`ω = 1`, `g = 1`, unit separation) with the test
/// particle at L4: masses `(1-μ, μ, 0)` and the classical problem `λ = 1`.
pub fn restricted_l4(mu: f64) -> Result<(EquilibriumProblem, EquilibriumSolution)> {
    let [l4, _] = lagrange_points_l45(mu)?;
    let masses = vec![1.0 - mu, mu, 0.0];
    let potential = Potential::newtonian(1.0, masses.clone())?;
    let problem = EquilibriumProblem::new(masses, potential, 1.0)?;
    let coords = vec![[mu, 0.0], [mu - 1.0, 0.0], l4];
    let residual_norm = problem.residual_norm(&coords)?;
    Ok((
        problem,
        EquilibriumSolution {
            coords,
            lambda: 1.0,
            residual_norm,
            gauge: None,
        },
    ))
}

/// A discrete relative equilibrium obtained by homothety.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledEquilibrium {
    pub solution: EquilibriumSolution,
    pub classical: ConstantsOfMotion,
    pub discrete: ConstantsOfMotion,
    /// Largest relative gap in `T_D = φ²T_C`, `U_D = φ^β U_C`, `σ_D = φ²σ_C`.
    pub law_error: f64,
}

/// Multiplies a classical solution (`λ = ω²`) by `φ` and checks that the
/// result solves the system with `λ = Ω²(ε)`.
pub fn scale_equilibrium(
    problem: &EquilibriumProblem,
    classical: &EquilibriumSolution,
    phi: &ExpansionFactor,
) -> Result<ScaledEquilibrium> {
    let beta = problem
        .potential
        .beta()
        .ok_or(Error::InvalidPotential("homothety needs a homogeneous potential"))?;
    let mismatch = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let checks = [
        mismatch(beta, phi.beta),
        mismatch(classical.lambda, phi.omega * phi.omega),
        mismatch(problem.lambda, classical.lambda),
    ];
    for d in checks {
        if d > 1e-12 {
            return Err(Error::VerificationFailed {
                residual: d,
                tolerance: 1e-12,
            });
        }
    }
    let coords: Vec<[f64; 2]> = classical
        .coords
        .iter()
        .map(|p| [p[0] * phi.value, p[1] * phi.value])
        .collect();
    let discrete_problem = problem.with_lambda(phi.omega_sq_eps)?;
    let residual_norm = discrete_problem.residual_norm(&coords)?;
    let tolerance = SCALING_TOLERANCE * discrete_problem.force_scale(&coords).max(1.0);
    if residual_norm > tolerance {
        return Err(Error::VerificationFailed {
            residual: residual_norm,
            tolerance,
        });
    }
    let constants = |c: &[[f64; 2]]| {
        PlanarConfiguration::from_real(problem.masses.clone(), c, phi.omega)?.constants_of_motion(&problem.potential)
    };
    let kc = constants(&classical.coords)?;
    let kd = constants(&coords)?;
    let rel = |d: C64, c: C64, factor: f64| {
        let target = c * factor;
        (d - target).norm() / target.norm().max(f64::MIN_POSITIVE)
    };
    let phi2 = phi.value * phi.value;
    let law_error = rel(kd.t, kc.t, phi2)
        .max(rel(kd.u, kc.u, math::powf(phi.value, beta)))
        .max(rel(kd.sigma, kc.sigma, phi2));
    Ok(ScaledEquilibrium {
        solution: EquilibriumSolution {
            coords,
            lambda: phi.omega_sq_eps,
            residual_norm,
            gauge: classical.gauge,
        },
        classical: kc,
        discrete: kd,
        law_error,
    })
}
