//! Grid integrators in the rotating frame.
//!
//! Both schemes march per-unit-mass equations on the grid `t_ν + kε`,
//! `k = 0..=M`, which lies in the interior of the time window so that every
//! cutoff factor equals one:
//!
//! * DEL: `-(W_c A - W_s B) = F_A`, `-(W_s A + W_c B) = F_B`;
//! * DHE: the momenta `C = m̃(V_c A - V_s B)`, `D = m̃(V_s A + V_c B)` together
//!   with `V_c* C + V_s* D = -m̃ F_A`, `V_c* D - V_s* C = -m̃ F_B`.
//!
//! Each step solves a 2×2 block for the newest node reached by the stencil,
//! with forces frozen at the evaluation node. Every run re-evaluates its
//! equations with the operators of [`crate::rotframe`] before returning.

mod classical;
mod march;
mod restricted;

pub use classical::{classical_reference, ClassicalTrajectory};
pub use march::{init_from_equilibrium, integrate_del, integrate_dhe, march_del, march_dhe, Seed};
pub use restricted::{restricted_grid, restricted_three_body, RestrictedParams, RestrictedRun};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::boxop::{Stencil, TimeWindow, GRID_TOLERANCE};
use crate::dynamics::Potential;
use crate::equilibria::EquilibriumSolution;
use crate::math;
use crate::rotframe::{canonical_window, ExpansionFactor, RotatingOperators};
use crate::{Error, Result, Vec2, C64};

/// Largest relative equation residual accepted when certifying a run.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Del,
    Dhe,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Del => "DEL",
            Scheme::Dhe => "DHE",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DEL" | "del" => Ok(Scheme::Del),
            "DHE" | "dhe" => Ok(Scheme::Dhe),
            _ => Err(Error::InvalidParameter("scheme must be DEL or DHE")),
        }
    }
}

/// The marching grid `t_ν + kε`, `k = 0..=steps`, and a window whose interior
/// is exactly `[t_ν, t_ν + steps·ε]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_nu: f64,
    pub eps: f64,
    pub steps: usize,
    pub window: TimeWindow,
}

impl GridSpec {
    pub fn new(op: &Stencil, t_nu: f64, steps: usize) -> Result<Self> {
        let n = op.halfwidth();
        let eps = op.eps();
        if steps < (4 * n).max(1) {
            return Err(Error::InvalidParameter("grid needs at least 4N steps"));
        }
        if !t_nu.is_finite() {
            return Err(Error::InvalidParameter("start time must be finite"));
        }
        let margin = 2.0 * n as f64 * eps;
        let window = TimeWindow::new(t_nu - margin, t_nu + steps as f64 * eps + margin)?;
        Ok(GridSpec { t_nu, eps, steps, window })
    }

    pub fn node(&self, k: usize) -> f64 {
        self.t_nu + k as f64 * self.eps
    }

    /// Number of grid nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_operator(&self, op: &Stencil) -> Result<()> {
        if (op.eps() - self.eps).abs() > GRID_TOLERANCE * self.eps {
            return Err(Error::StepMismatch {
                path: self.eps,
                operator: op.eps(),
            });
        }
        let margin = 2.0 * op.halfwidth() as f64 * op.eps();
        let inside = self.window.t0 <= self.t_nu - margin + GRID_TOLERANCE * self.eps
            && self.window.tf >= self.node(self.steps) + margin - GRID_TOLERANCE * self.eps;
        if !inside {
            return Err(Error::InvalidParameter("marching range must lie in the window interior"));
        }
        Ok(())
    }
}

/// Everything a marching run needs besides the grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub masses: Vec<f64>,
    pub potential: Potential,
    pub omega: f64,
    pub operator: Stencil,
    /// Classical relative equilibrium (`λ = ω²`).
    pub equilibrium: EquilibriumSolution,
    pub phi: ExpansionFactor,
    /// `(δ, δ')` added to each body's scaled position.
    pub perturbation: Vec<[f64; 2]>,
    /// Bodies that are marched; the others stay at their seed position.
    pub evolving: Vec<bool>,
}

impl Scenario {
    /// Checks lengths and that `phi` matches the operator, `ω` and `β`.
    /// A potential without exponent, or `ω = 0`, requires `φ = 1`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        masses: Vec<f64>,
        potential: Potential,
        omega: f64,
        operator: Stencil,
        equilibrium: EquilibriumSolution,
        phi: ExpansionFactor,
        perturbation: Vec<[f64; 2]>,
        evolving: Vec<bool>,
    ) -> Result<Self> {
        let n = masses.len();
        for len in [equilibrium.coords.len(), perturbation.len(), evolving.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if let Some(k) = potential.bodies() {
            if k != n {
                return Err(Error::DimensionMismatch { expected: n, found: k });
            }
        }
        if n < 2 || masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) || masses.iter().all(|m| *m == 0.0) {
            return Err(Error::InvalidConfiguration("masses must be nonnegative with one positive"));
        }
        if !evolving.iter().any(|e| *e) {
            return Err(Error::InvalidConfiguration("no evolving body"));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter("pulsation must be finite and nonnegative"));
        }
        if equilibrium.coords.iter().chain(&perturbation).flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfiguration("coordinates must be finite"));
        }
        let inconsistent = Error::InvalidParameter("expansion factor inconsistent with operator, pulsation or exponent");
        match potential.beta() {
            Some(beta) if omega > 0.0 => {
                let expected = RotatingOperators::new(operator.clone(), omega)?
                    .expansion_factor(beta, &canonical_window(&operator))?;
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
                if !(close(phi.value, expected.value) && close(phi.omega, omega) && close(phi.beta, beta)) {
                    return Err(inconsistent);
                }
            }
            _ => {
                if phi.value != 1.0 {
                    return Err(inconsistent);
                }
            }
        }
        Ok(Scenario {
            masses,
            potential,
            omega,
            operator,
            equilibrium,
            phi,
            perturbation,
            evolving,
        })
    }

    /// The restricted problem with the test particle perturbed from L4 by
    /// `(δ, δ')`; primaries pinned, `ω = 1`, newtonian with `g = 1`.
    pub fn restricted(mu: f64, operator: Stencil, delta: f64, delta_prime: f64) -> Result<Self> {
        let (problem, equilibrium) = crate::equilibria::restricted_l4(mu)?;
        let omega = 1.0;
        let phi = RotatingOperators::new(operator.clone(), omega)?.expansion_factor(-1.0, &canonical_window(&operator))?;
        Scenario::new(
            problem.masses,
            problem.potential,
            omega,
            operator,
            equilibrium,
            phi,
            alloc::vec![[0.0, 0.0], [0.0, 0.0], [delta, delta_prime]],
            alloc::vec![false, false, true],
        )
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// `φ·(a_i, b_i)`, the discrete relative equilibrium.
    pub fn scaled_equilibrium(&self) -> Vec<[f64; 2]> {
        self.equilibrium
            .coords
            .iter()
            .map(|p| [p[0] * self.phi.value, p[1] * self.phi.value])
            .collect()
    }

    /// `φ·(a_i, b_i) + (δ_i, δ'_i)`.
    pub fn seed_positions(&self) -> Vec<Vec2> {
        self.scaled_equilibrium()
            .iter()
            .zip(&self.perturbation)
            .map(|(p, d)| [C64::new(p[0] + d[0], 0.0), C64::new(p[1] + d[1], 0.0)])
            .collect()
    }
}

/// Momenta `(C_i, D_i)` on the nodes `first..first + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Momenta {
    pub first: usize,
    /// `values[k][i]` is body `i` at node `first + k`.
    pub values: Vec<Vec<Vec2>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotatingTrajectory {
    pub scheme: Scheme,
    pub grid: GridSpec,
    pub masses: Vec<f64>,
    pub evolving: Vec<bool>,
    /// `positions[k][i]` is `(A_i, B_i)` at node `k`.
    pub positions: Vec<Vec<Vec2>>,
    /// DHE only.
    pub momenta: Option<Momenta>,
    /// Largest `|Im A|`, `|Im B|` over all nodes and bodies.
    pub imag_max: f64,
    /// Largest relative residual found by re-evaluating the equations.
    pub residual: f64,
}

impl RotatingTrajectory {
    pub fn bodies(&self) -> usize {
        self.masses.len()
    }

    pub fn momentum(&self, k: usize, body: usize) -> Option<Vec2> {
        let m = self.momenta.as_ref()?;
        let idx = k.checked_sub(m.first)?;
        m.values.get(idx).map(|v| v[body])
    }

    /// Largest distance between the real positions of evolving bodies and
    /// `reference`.
    pub fn max_excursion(&self, reference: &[[f64; 2]]) -> f64 {
        let mut out = 0.0f64;
        for row in &self.positions {
            for (i, p) in row.iter().enumerate() {
                if self.evolving[i] {
                    let (dx, dy) = (p[0].re - reference[i][0], p[1].re - reference[i][1]);
                    out = out.max(math::sqrt(dx * dx + dy * dy));
                }
            }
        }
        out
    }
}

/// For each `M`, the euclidean norm of `Re x(t_ν + Mε) - Re x(t_ν)` over all
/// evolving bodies.
pub fn error_norm(traj: &RotatingTrajectory, m_values: &[usize]) -> Result<Vec<f64>> {
    let len = traj.positions.len();
    m_values
        .iter()
        .map(|&m| {
            if m >= len {
                return Err(Error::IndexOutOfRange { index: m, len });
            }
            let mut s = 0.0;
            for (i, (p, q)) in traj.positions[m].iter().zip(&traj.positions[0]).enumerate() {
                if traj.evolving[i] {
                    let (da, db) = (p[0].re - q[0].re, p[1].re - q[1].re);
                    s += da * da + db * db;
                }
            }
            Ok(math::sqrt(s))
        })
        .collect()
}
