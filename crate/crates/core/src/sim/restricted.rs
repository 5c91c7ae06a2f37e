use alloc::vec::Vec;

use super::{error_norm, integrate_del, integrate_dhe, GridSpec, RotatingTrajectory, Scenario, Scheme};
use crate::boxop::Stencil;
use crate::{Error, Result};

/// One restricted three-body run.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedParams {
    pub mu: f64,
    /// Stencil shape; its step is replaced by `2π/(ω m)`.
    pub operator: Stencil,
    pub steps_per_period: usize,
    /// Horizon in multiples of `π`.
    pub half_periods: usize,
    pub delta: f64,
    pub delta_prime: f64,
    pub scheme: Scheme,
    /// Overrides the number of steps `⌈k m / 2⌉` implied by the horizon.
    pub steps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RestrictedRun {
    pub scenario: Scenario,
    pub trajectory: RotatingTrajectory,
    /// `err(M)` for `M = 0..=steps`.
    pub errors: Vec<f64>,
    /// Largest distance of the test particle from the scaled L4 point.
    pub max_excursion: f64,
}

/// The stencil with `ε = 2π/m` (`ω = 1`) and the grid `[0, Mε]` with
/// `M = ⌈k m / 2⌉`, so that `Mε ≥ kπ`.
pub fn restricted_grid(shape: &Stencil, steps_per_period: usize, half_periods: usize) -> Result<(Stencil, GridSpec)> {
    if steps_per_period < 8 {
        return Err(Error::InvalidParameter("need at least 8 steps per period"));
    }
    let eps = 2.0 * core::f64::consts::PI / steps_per_period as f64;
    let op = shape.with_eps(eps)?;
    let steps = (half_periods * steps_per_period).div_ceil(2);
    let grid = GridSpec::new(&op, 0.0, steps)?;
    Ok((op, grid))
}

pub fn restricted_three_body(params: &RestrictedParams) -> Result<RestrictedRun> {
    let (op, mut grid) = restricted_grid(&params.operator, params.steps_per_period, params.half_periods.max(1))?;
    if let Some(steps) = params.steps {
        grid = GridSpec::new(&op, 0.0, steps)?;
    } else if params.half_periods == 0 {
        return Err(Error::InvalidParameter("horizon must be positive"));
    }
    let scenario = Scenario::restricted(params.mu, op, params.delta, params.delta_prime)?;
    let trajectory = match params.scheme {
        Scheme::Del => integrate_del(&scenario, &grid)?,
        Scheme::Dhe => integrate_dhe(&scenario, &grid)?,
    };
    let ms: Vec<usize> = (0..grid.len()).collect();
    let errors = error_norm(&trajectory, &ms)?;
    let max_excursion = trajectory.max_excursion(&scenario.scaled_equilibrium());
    Ok(RestrictedRun {
        scenario,
        trajectory,
        errors,
        max_excursion,
    })
}
