use alloc::vec;
use alloc::vec::Vec;

use super::{GridSpec, Momenta, RotatingTrajectory, Scenario, Scheme, CERTIFICATION_TOLERANCE};
use crate::boxop::{SampledPath, Stencil};
use crate::dynamics::{effective_mass, specific_force};
use crate::linalg::solve2;
use crate::math;
use crate::rotframe::RotatingOperators;
use crate::{Error, Result, Vec2, C64};

/// Positions on the first grid nodes: `history[k][i]` is body `i` at node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub history: Vec<Vec<Vec2>>,
}

impl Seed {
    /// Twice the span of the stencil support, the number of nodes both
    /// schemes need before their first step.
    pub fn required_len(op: &Stencil) -> Result<usize> {
        Ok(2 * del_offset(op)?)
    }
}

/// Largest `ℓ` with `w_ℓ ≠ 0`; equals the span of the stencil support.
fn del_offset(op: &Stencil) -> Result<usize> {
    let n = op.halfwidth();
    let w = op.autocorrelation();
    match (1..=2 * n).rev().find(|&l| w[l + 2 * n] != C64::new(0.0, 0.0)) {
        Some(p) => Ok(p),
        None => Err(Error::NoMarchingForm),
    }
}

/// `(p_f, p_m)`: the highest nonzero offsets of `γ_{-k}` and `γ_j`.
fn dhe_offsets(op: &Stencil) -> Result<(usize, usize)> {
    let (lo, hi) = op.support().ok_or(Error::NoMarchingForm)?;
    if lo > 0 || hi < 0 || lo == hi {
        return Err(Error::NoMarchingForm);
    }
    Ok(((-lo) as usize, hi as usize))
}

/// A constant seed at the scenario's perturbed, `φ`-scaled equilibrium, of
/// length [`Seed::required_len`].
pub fn init_from_equilibrium(scenario: &Scenario, grid: &GridSpec) -> Result<Seed> {
    grid.check_operator(&scenario.operator)?;
    let len = Seed::required_len(&scenario.operator)?;
    if len > grid.len() {
        return Err(Error::InvalidParameter("grid shorter than the seed"));
    }
    Ok(Seed {
        history: vec![scenario.seed_positions(); len],
    })
}

pub fn integrate_del(scenario: &Scenario, grid: &GridSpec) -> Result<RotatingTrajectory> {
    march_del(scenario, grid, &init_from_equilibrium(scenario, grid)?)
}

pub fn integrate_dhe(scenario: &Scenario, grid: &GridSpec) -> Result<RotatingTrajectory> {
    march_dhe(scenario, grid, &init_from_equilibrium(scenario, grid)?)
}

fn check_seed(scenario: &Scenario, grid: &GridSpec, seed: &Seed) -> Result<()> {
    grid.check_operator(&scenario.operator)?;
    let need = Seed::required_len(&scenario.operator)?;
    let len = seed.history.len();
    if len < need || len > grid.len() {
        return Err(Error::InvalidParameter("seed length must lie between twice the stencil span and the grid length"));
    }
    for row in &seed.history {
        if row.len() != scenario.len() {
            return Err(Error::DimensionMismatch {
                expected: scenario.len(),
                found: row.len(),
            });
        }
        if row.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidConfiguration("seed must be finite"));
        }
    }
    Ok(())
}

fn at(node: usize, offset: isize) -> usize {
    (node as isize + offset) as usize
}

fn finite(v: &Vec2) -> bool {
    v.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Marches `-(W_c A - W_s B) = F_A`, `-(W_s A + W_c B) = F_B` from `seed`.
///
/// At node `n` the values at `n + p` are obtained from the 2×2 block
/// `[[c_p, -s_p], [s_p, c_p]]` of the leading `W_c`, `W_s` coefficients.
pub fn march_del(scenario: &Scenario, grid: &GridSpec, seed: &Seed) -> Result<RotatingTrajectory> {
    check_seed(scenario, grid, seed)?;
    let op = &scenario.operator;
    let rot = RotatingOperators::new(op.clone(), scenario.omega)?;
    let (c, s) = (rot.wc_interior(), rot.ws_interior());
    let centre = 2 * op.halfwidth() as isize;
    let coef = |v: &[C64], l: isize| v[(l + centre) as usize];
    let p = del_offset(op)? as isize;
    let block = [[coef(&c, p), -coef(&s, p)], [coef(&s, p), coef(&c, p)]];

    let mut pos = seed.history.clone();
    let first = pos.len() - p as usize;
    for node in first..=grid.steps - p as usize {
        let mut next = pos[at(node, p - 1)].clone();
        for i in (0..scenario.len()).filter(|&i| scenario.evolving[i]) {
            let f = specific_force(&scenario.masses, &pos[node], &scenario.potential, i)?;
            let (mut ra, mut rb) = (-f[0], -f[1]);
            for l in -p..p {
                let [a, b] = pos[at(node, l)][i];
                ra -= coef(&c, l) * a - coef(&s, l) * b;
                rb -= coef(&s, l) * a + coef(&c, l) * b;
            }
            let x = solve2(block, [ra, rb]).ok_or(Error::SingularStep { node })?;
            if !finite(&x) {
                return Err(Error::SingularStep { node });
            }
            next[i] = x;
        }
        pos.push(next);
    }
    let residual = certify_del(scenario, grid, &rot, &pos, p as usize)?;
    Ok(trajectory(scenario, grid, Scheme::Del, pos, None, residual))
}

/// Marches positions and momenta from `seed`.
///
/// Seed momenta come from `(C, D) = m̃(V_c A - V_s B, V_s A + V_c B)` on the
/// seed. Then, alternately, the momentum relation at the newest node with a
/// known momentum gives positions at `n + p_m`, and the starred force
/// equation at the newest node with known position gives momenta at `n + p_f`.
pub fn march_dhe(scenario: &Scenario, grid: &GridSpec, seed: &Seed) -> Result<RotatingTrajectory> {
    check_seed(scenario, grid, seed)?;
    let op = &scenario.operator;
    let (pf, pm) = dhe_offsets(op)?;
    let (pfi, pmi) = (pf as isize, pm as isize);
    let eps = op.eps();
    let w = scenario.omega;
    let vc = |j: isize| op.coeff(j) * (math::cos(w * j as f64 * eps) / eps);
    let vs = |j: isize| op.coeff(j) * (math::sin(w * j as f64 * eps) / eps);
    let n_bodies = scenario.len();
    let mass: Vec<f64> = scenario.masses.iter().map(|m| effective_mass(*m)).collect();

    let mut pos = seed.history.clone();
    let len = pos.len();
    let momentum_at = |pos: &[Vec<Vec2>], node: usize, i: usize| -> Vec2 {
        let (mut cc, mut dd) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for j in -pfi..=pmi {
            let [a, b] = pos[at(node, j)][i];
            cc += vc(j) * a - vs(j) * b;
            dd += vs(j) * a + vc(j) * b;
        }
        [cc * mass[i], dd * mass[i]]
    };
    // mom[k][i] holds node pf + k
    let mut mom: Vec<Vec<Vec2>> = (pf..len - pm)
        .map(|node| (0..n_bodies).map(|i| momentum_at(&pos, node, i)).collect())
        .collect();

    let mut a = len - 1;
    let mut c = len - 1 - pm;
    let lead_m = [[vc(pmi), -vs(pmi)], [vs(pmi), vc(pmi)]];
    // adjoint coefficients u_k = v_{-k}
    let lead_f = [[vc(-pfi), vs(-pfi)], [-vs(-pfi), vc(-pfi)]];
    while a < grid.steps {
        if a < c + pm {
            let node = a + 1 - pm;
            let mut next = pos[a].clone();
            for i in (0..n_bodies).filter(|&i| scenario.evolving[i]) {
                let m = mass[i];
                let [mut rc, mut rd] = mom[node - pf][i];
                for j in -pfi..pmi {
                    let [x, y] = pos[at(node, j)][i];
                    rc -= (vc(j) * x - vs(j) * y) * m;
                    rd -= (vs(j) * x + vc(j) * y) * m;
                }
                let block = [[lead_m[0][0] * m, lead_m[0][1] * m], [lead_m[1][0] * m, lead_m[1][1] * m]];
                let x = solve2(block, [rc, rd]).ok_or(Error::SingularStep { node })?;
                if !finite(&x) {
                    return Err(Error::SingularStep { node });
                }
                next[i] = x;
            }
            pos.push(next);
            a += 1;
        } else {
            let node = c + 1 - pf;
            let mut next = mom[c - pf].clone();
            for i in (0..n_bodies).filter(|&i| scenario.evolving[i]) {
                let m = mass[i];
                let f = specific_force(&scenario.masses, &pos[node], &scenario.potential, i)?;
                let (mut ra, mut rb) = (-f[0] * m, -f[1] * m);
                for k in -pmi..pfi {
                    let [cc, dd] = mom[at(node, k) - pf][i];
                    ra -= vc(-k) * cc + vs(-k) * dd;
                    rb -= vc(-k) * dd - vs(-k) * cc;
                }
                let x = solve2(lead_f, [ra, rb]).ok_or(Error::SingularStep { node })?;
                if !finite(&x) {
                    return Err(Error::SingularStep { node });
                }
                next[i] = x;
            }
            mom.push(next);
            c += 1;
        }
    }

    let rot = RotatingOperators::new(op.clone(), scenario.omega)?;
    let p = del_offset(op)?;
    let mut residual = certify_del(scenario, grid, &rot, &pos, p)?;
    residual = residual.max(certify_dhe(scenario, grid, &rot, &pos, &mom, pf, pm)?);
    let momenta = Momenta { first: pf, values: mom };
    Ok(trajectory(scenario, grid, Scheme::Dhe, pos, Some(momenta), residual))
}

fn trajectory(
    scenario: &Scenario,
    grid: &GridSpec,
    scheme: Scheme,
    positions: Vec<Vec<Vec2>>,
    momenta: Option<Momenta>,
    residual: f64,
) -> RotatingTrajectory {
    let imag_max = positions
        .iter()
        .flatten()
        .flatten()
        .map(|v| v.im.abs())
        .fold(0.0, f64::max);
    RotatingTrajectory {
        scheme,
        grid: *grid,
        masses: scenario.masses.clone(),
        evolving: scenario.evolving.clone(),
        positions,
        momenta,
        imag_max,
        residual,
    }
}

/// Body `i` of node-major rows as a 2-vector path starting at `origin`.
fn body_path(rows: &[Vec<Vec2>], i: usize, origin: f64, eps: f64) -> Result<SampledPath> {
    let values = rows.iter().flat_map(|r| r[i]).collect();
    SampledPath::new(origin, eps, 2, values)
}

fn check(worst: f64) -> Result<f64> {
    if worst > CERTIFICATION_TOLERANCE {
        return Err(Error::VerificationFailed {
            residual: worst,
            tolerance: CERTIFICATION_TOLERANCE,
        });
    }
    Ok(worst)
}

/// `|residual| / Σ|terms|`.
fn relative(residual: C64, terms: &[C64]) -> f64 {
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    residual.norm() / scale.max(f64::MIN_POSITIVE)
}

/// Re-evaluates the Lagrangian equations at nodes `p..=steps-p`.
#[allow(clippy::needless_range_loop)]
fn certify_del(
    scenario: &Scenario,
    grid: &GridSpec,
    rot: &RotatingOperators,
    pos: &[Vec<Vec2>],
    p: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in (0..scenario.len()).filter(|&i| scenario.evolving[i]) {
        let path = body_path(pos, i, grid.t_nu, grid.eps)?;
        for node in p..=grid.steps - p {
            let t = grid.node(node);
            let wc = rot.apply_wc(&path, &grid.window, t)?;
            let ws = rot.apply_ws(&path, &grid.window, t)?;
            let f = specific_force(&scenario.masses, &pos[node], &scenario.potential, i)?;
            let ra = -(wc[0] - ws[1]) - f[0];
            let rb = -(ws[0] + wc[1]) - f[1];
            worst = worst
                .max(relative(ra, &[wc[0], ws[1], f[0]]))
                .max(relative(rb, &[ws[0], wc[1], f[1]]));
        }
    }
    check(worst)
}

/// Re-evaluates the momentum relation and the starred force equations.
#[allow(clippy::needless_range_loop)]
fn certify_dhe(
    scenario: &Scenario,
    grid: &GridSpec,
    rot: &RotatingOperators,
    pos: &[Vec<Vec2>],
    mom: &[Vec<Vec2>],
    pf: usize,
    pm: usize,
) -> Result<f64> {
    let (vc, vs) = (rot.vc(), rot.vs());
    let (vc_adj, vs_adj) = (vc.adjoint(), vs.adjoint());
    let last = pf + mom.len() - 1;
    let mut worst = 0.0f64;
    for i in (0..scenario.len()).filter(|&i| scenario.evolving[i]) {
        let m = effective_mass(scenario.masses[i]);
        let path = body_path(pos, i, grid.t_nu, grid.eps)?;
        let mpath = body_path(mom, i, grid.node(pf), grid.eps)?;
        for node in pf..=last.min(grid.steps - pm) {
            let t = grid.node(node);
            let x = vc.apply_box(&path, &grid.window, t)?;
            let y = vs.apply_box(&path, &grid.window, t)?;
            let [cc, dd] = mom[node - pf][i];
            let rc = cc - (x[0] - y[1]) * m;
            let rd = dd - (y[0] + x[1]) * m;
            worst = worst
                .max(relative(rc, &[cc, x[0] * m, y[1] * m]))
                .max(relative(rd, &[dd, y[0] * m, x[1] * m]));
        }
        for node in pf + pm..=last.saturating_sub(pf) {
            let t = grid.node(node);
            let x = vc_adj.apply_box(&mpath, &grid.window, t)?;
            let y = vs_adj.apply_box(&mpath, &grid.window, t)?;
            let f = specific_force(&scenario.masses, &pos[node], &scenario.potential, i)?;
            let ra = x[0] + y[1] + f[0] * m;
            let rb = x[1] - y[0] + f[1] * m;
            worst = worst
                .max(relative(ra, &[x[0], y[1], f[0] * m]))
                .max(relative(rb, &[x[1], y[0], f[1] * m]));
        }
    }
    check(worst)
}
