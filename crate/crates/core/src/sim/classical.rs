use alloc::vec;
use alloc::vec::Vec;

use super::{GridSpec, Scenario};
use crate::dynamics::specific_force;
use crate::math;
use crate::{Error, Result, Vec2, C64};

/// Endpoint change under step halving below which the reference is accepted.
pub const REFINEMENT_TOLERANCE: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 4;

/// RK4 solution of the classical rotating-frame equations, sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrajectory {
    pub t: Vec<f64>,
    /// `positions[k][i]`.
    pub positions: Vec<Vec<[f64; 2]>>,
    pub velocities: Vec<Vec<[f64; 2]>>,
    /// RK4 steps per grid interval.
    pub substeps: usize,
    /// Endpoint change between the accepted run and the one with twice the step.
    pub refinement_gap: f64,
}

impl ClassicalTrajectory {
    /// Whether halving the step changed the endpoint by less than
    /// [`REFINEMENT_TOLERANCE`].
    pub fn converged(&self) -> bool {
        self.refinement_gap < REFINEMENT_TOLERANCE
    }

    /// Same metric as [`super::error_norm`]: for each `M`, the euclidean norm
    /// of `x(t_M) - x(t_0)` over the evolving bodies.
    pub fn error_norm(&self, evolving: &[bool], m_values: &[usize]) -> Result<Vec<f64>> {
        let len = self.positions.len();
        m_values
            .iter()
            .map(|&m| {
                if m >= len {
                    return Err(Error::IndexOutOfRange { index: m, len });
                }
                let mut s = 0.0;
                for ((p, q), e) in self.positions[m].iter().zip(&self.positions[0]).zip(evolving) {
                    if *e {
                        s += (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]);
                    }
                }
                Ok(math::sqrt(s))
            })
            .collect()
    }

    /// Largest distance of an evolving body from `reference`.
    pub fn max_excursion(&self, evolving: &[bool], reference: &[[f64; 2]]) -> f64 {
        let mut out = 0.0f64;
        for row in &self.positions {
            for ((p, r), e) in row.iter().zip(reference).zip(evolving) {
                if *e {
                    let (dx, dy) = (p[0] - r[0], p[1] - r[1]);
                    out = out.max(math::sqrt(dx * dx + dy * dy));
                }
            }
        }
        out
    }
}

/// Integrates `ä - 2ωḃ - ω²a = F_a`, `b̈ + 2ωȧ - ω²b = F_b` for the evolving
/// bodies, starting at rest from the classical equilibrium plus the
/// perturbation, and samples it at the nodes of `grid`.
///
/// The initial step is `min(ε/20, 10⁻³·2π/ω)`; it is halved until the endpoint
/// moves by less than [`REFINEMENT_TOLERANCE`], at most four times.
pub fn classical_reference(scenario: &Scenario, grid: &GridSpec) -> Result<ClassicalTrajectory> {
    let mut h = grid.eps / 20.0;
    if scenario.omega > 0.0 {
        h = h.min(1e-3 * 2.0 * core::f64::consts::PI / scenario.omega);
    }
    let mut substeps = math::ceil(grid.eps / h) as usize;
    let mut coarse = run(scenario, grid, substeps)?;
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        substeps *= 2;
        let fine = run(scenario, grid, substeps)?;
        gap = endpoint_gap(&coarse, &fine);
        coarse = fine;
        if gap < REFINEMENT_TOLERANCE {
            break;
        }
    }
    let (positions, velocities) = coarse;
    Ok(ClassicalTrajectory {
        t: (0..grid.len()).map(|k| grid.node(k)).collect(),
        positions,
        velocities,
        substeps,
        refinement_gap: gap,
    })
}

type Samples = (Vec<Vec<[f64; 2]>>, Vec<Vec<[f64; 2]>>);

fn endpoint_gap(a: &Samples, b: &Samples) -> f64 {
    let (pa, pb) = (a.0.last().unwrap(), b.0.last().unwrap());
    pa.iter()
        .zip(pb)
        .map(|(x, y)| {
            let (dx, dy) = (x[0] - y[0], x[1] - y[1]);
            math::sqrt(dx * dx + dy * dy)
        })
        .fold(0.0, f64::max)
}

fn run(scenario: &Scenario, grid: &GridSpec, substeps: usize) -> Result<Samples> {
    let n = scenario.len();
    let w = scenario.omega;
    let h = grid.eps / substeps as f64;
    let mut x: Vec<[f64; 2]> = scenario
        .equilibrium
        .coords
        .iter()
        .zip(&scenario.perturbation)
        .map(|(p, d)| [p[0] + d[0], p[1] + d[1]])
        .collect();
    let mut v = vec![[0.0; 2]; n];
    let mut coords: Vec<Vec2> = vec![[C64::new(0.0, 0.0); 2]; n];
    let mut accel = |x: &[[f64; 2]], v: &[[f64; 2]], out: &mut [[f64; 2]]| -> Result<()> {
        for (c, p) in coords.iter_mut().zip(x) {
            *c = [C64::new(p[0], 0.0), C64::new(p[1], 0.0)];
        }
        for i in 0..n {
            out[i] = if scenario.evolving[i] {
                let f = specific_force(&scenario.masses, &coords, &scenario.potential, i)?;
                [
                    f[0].re + 2.0 * w * v[i][1] + w * w * x[i][0],
                    f[1].re - 2.0 * w * v[i][0] + w * w * x[i][1],
                ]
            } else {
                [0.0; 2]
            };
        }
        Ok(())
    };
    let axpy = |base: &[[f64; 2]], k: &[[f64; 2]], s: f64| -> Vec<[f64; 2]> {
        base.iter().zip(k).map(|(b, d)| [b[0] + s * d[0], b[1] + s * d[1]]).collect()
    };
    let mut positions = Vec::with_capacity(grid.len());
    let mut velocities = Vec::with_capacity(grid.len());
    positions.push(x.clone());
    velocities.push(v.clone());
    let (mut k1a, mut k2a, mut k3a, mut k4a) =
        (vec![[0.0; 2]; n], vec![[0.0; 2]; n], vec![[0.0; 2]; n], vec![[0.0; 2]; n]);
    for _ in 0..grid.steps {
        for _ in 0..substeps {
            accel(&x, &v, &mut k1a)?;
            let (x2, v2) = (axpy(&x, &v, 0.5 * h), axpy(&v, &k1a, 0.5 * h));
            accel(&x2, &v2, &mut k2a)?;
            let (x3, v3) = (axpy(&x, &v2, 0.5 * h), axpy(&v, &k2a, 0.5 * h));
            accel(&x3, &v3, &mut k3a)?;
            let (x4, v4) = (axpy(&x, &v3, h), axpy(&v, &k3a, h));
            accel(&x4, &v4, &mut k4a)?;
            for i in 0..n {
                if !scenario.evolving[i] {
                    continue;
                }
                for d in 0..2 {
                    x[i][d] += h / 6.0 * (v[i][d] + 2.0 * v2[i][d] + 2.0 * v3[i][d] + v4[i][d]);
                    v[i][d] += h / 6.0 * (k1a[i][d] + 2.0 * k2a[i][d] + 2.0 * k3a[i][d] + k4a[i][d]);
                }
            }
        }
        positions.push(x.clone());
        velocities.push(v.clone());
    }
    Ok((positions, velocities))
}
