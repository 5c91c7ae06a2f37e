//! Pairwise potentials, energies and classical equations of motion.
//!
//! The force function is `U = Σ_{i<j} f_ij(r_ij)` and the classical equations
//! read `m_i ẍ_i = Σ_{j≠i} f'_ij(r_ij) (x_i - x_j) / r_ij`. With the newtonian
//! law `f_ij(r) = g m_i m_j / r` the derivative is negative and the force is
//! attractive.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::{Error, Result, Vec2, C64};

/// Distances below this fraction of the configuration diameter are collisions.
pub const COLLISION_TOLERANCE: f64 = 1e-12;

/// A pair function `(i, j, r) ↦ value`.
pub type PairFn = Arc<dyn Fn(usize, usize, C64) -> C64 + Send + Sync>;

/// Interaction strengths `μ_ij` of a homogeneous potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// Symmetric `n × n` matrix, row-major; the diagonal is ignored.
    Matrix { n: usize, mu: Vec<f64> },
    /// `μ_ij = g m_i m_j`. Massless bodies still feel `g m_j` per unit mass.
    Gravitational { g: f64, masses: Vec<f64> },
}

impl Coupling {
    fn len(&self) -> usize {
        match self {
            Coupling::Matrix { n, .. } => *n,
            Coupling::Gravitational { masses, .. } => masses.len(),
        }
    }

    fn mu(&self, i: usize, j: usize) -> f64 {
        match self {
            Coupling::Matrix { n, mu } => mu[i * n + j],
            Coupling::Gravitational { g, masses } => g * masses[i] * masses[j],
        }
    }
}

#[derive(Clone)]
pub enum Potential {
    /// `f_ij(r) = μ_ij r^β`.
    Homogeneous { beta: f64, coupling: Coupling },
    /// Arbitrary `f_ij` with its derivative.
    Custom { value: PairFn, derivative: PairFn },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Homogeneous { beta, coupling } => f
                .debug_struct("Homogeneous")
                .field("beta", beta)
                .field("coupling", coupling)
                .finish(),
            Potential::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl Potential {
    /// The newtonian law `g m_i m_j / r`.
    pub fn newtonian(g: f64, masses: Vec<f64>) -> Result<Self> {
        Potential::homogeneous(-1.0, Coupling::Gravitational { g, masses })
    }

    pub fn homogeneous(beta: f64, coupling: Coupling) -> Result<Self> {
        if !beta.is_finite() || beta == 0.0 || beta == 2.0 {
            return Err(Error::InvalidPotential("exponent must be finite and not 0 or 2"));
        }
        match &coupling {
            Coupling::Matrix { n, mu } => {
                if mu.len() != n * n {
                    return Err(Error::InvalidPotential("coupling matrix must be n×n"));
                }
                for i in 0..*n {
                    for j in 0..*n {
                        let (a, b) = (mu[i * n + j], mu[j * n + i]);
                        if i != j && (!(a >= 0.0 && a.is_finite()) || a != b) {
                            return Err(Error::InvalidPotential(
                                "coupling matrix must be symmetric, finite and nonnegative",
                            ));
                        }
                    }
                }
            }
            Coupling::Gravitational { g, masses } => {
                if !(*g > 0.0 && g.is_finite()) {
                    return Err(Error::InvalidPotential("gravitational constant must be positive"));
                }
                if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
                    return Err(Error::InvalidPotential("masses must be finite and nonnegative"));
                }
            }
        }
        Ok(Potential::Homogeneous { beta, coupling })
    }

    pub fn custom(value: PairFn, derivative: PairFn) -> Self {
        Potential::Custom { value, derivative }
    }

    /// Exponent of a homogeneous potential.
    pub fn beta(&self) -> Option<f64> {
        match self {
            Potential::Homogeneous { beta, .. } => Some(*beta),
            Potential::Custom { .. } => None,
        }
    }

    /// Number of bodies the potential is defined for, if fixed.
    pub fn bodies(&self) -> Option<usize> {
        match self {
            Potential::Homogeneous { coupling, .. } => Some(coupling.len()),
            Potential::Custom { .. } => None,
        }
    }

    /// `f_ij(r)`.
    pub fn value(&self, i: usize, j: usize, r: C64) -> C64 {
        match self {
            Potential::Homogeneous { beta, coupling } => math::cpowf(r, *beta) * coupling.mu(i, j),
            Potential::Custom { value, .. } => value(i, j, r),
        }
    }

    /// `f'_ij(r)`.
    pub fn derivative(&self, i: usize, j: usize, r: C64) -> C64 {
        match self {
            Potential::Homogeneous { beta, coupling } => {
                math::cpowf(r, beta - 1.0) * (beta * coupling.mu(i, j))
            }
            Potential::Custom { derivative, .. } => derivative(i, j, r),
        }
    }

    /// `f'_ij(r) / (m̃_i r)`: the coefficient of `x_i - x_j` in the
    /// acceleration of body `i`.
    pub fn force_factor(&self, i: usize, j: usize, r: C64, mass_i: f64) -> Result<C64> {
        if mass_i > 0.0 {
            return Ok(self.derivative(i, j, r) / (r * mass_i));
        }
        match self {
            Potential::Homogeneous {
                beta,
                coupling: Coupling::Gravitational { g, masses },
            } => Ok(math::cpowf(r, beta - 2.0) * (g * masses[j] * beta)),
            _ => Err(Error::MasslessBody(i)),
        }
    }

    /// `f_ij(r) / m̃_i`, the pair energy per unit mass of body `i`.
    pub fn specific_value(&self, i: usize, j: usize, r: C64, mass_i: f64) -> Result<C64> {
        if mass_i > 0.0 {
            return Ok(self.value(i, j, r) / mass_i);
        }
        match self {
            Potential::Homogeneous {
                beta,
                coupling: Coupling::Gravitational { g, masses },
            } => Ok(math::cpowf(r, *beta) * (g * masses[j])),
            _ => Err(Error::MasslessBody(i)),
        }
    }
}

/// `m` for massive bodies, `1` for test particles, whose equations are
/// written per unit mass.
pub fn effective_mass(m: f64) -> f64 {
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Largest pairwise coordinate gap, used to scale the collision test.
fn diameter(coords: &[Vec2]) -> f64 {
    let mut d = 0.0f64;
    for (i, p) in coords.iter().enumerate() {
        for q in &coords[i + 1..] {
            d = d.max((p[0] - q[0]).norm().max((p[1] - q[1]).norm()));
        }
    }
    d
}

fn distance(coords: &[Vec2], i: usize, j: usize, diam: f64) -> Result<C64> {
    let (da, db) = (coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
    let r = math::csqrt(da * da + db * db);
    if !(r.norm() > COLLISION_TOLERANCE * diam) {
        return Err(Error::Collision { i: i.min(j), j: i.max(j) });
    }
    Ok(r)
}

/// Acceleration of body `i` per unit (effective) mass:
/// `Σ_{j≠i} f'_ij(r_ij)(x_i - x_j) / (m̃_i r_ij)`.
pub fn specific_force(masses: &[f64], coords: &[Vec2], potential: &Potential, i: usize) -> Result<Vec2> {
    let diam = diameter(coords);
    let mut out = [C64::new(0.0, 0.0); 2];
    for j in 0..coords.len() {
        if j == i {
            continue;
        }
        let r = distance(coords, i, j, diam)?;
        let k = potential.force_factor(i, j, r, masses[i])?;
        out[0] += k * (coords[i][0] - coords[j][0]);
        out[1] += k * (coords[i][1] - coords[j][1]);
    }
    Ok(out)
}

/// Rotating-frame velocities and accelerations of one body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingDerivs {
    pub da: C64,
    pub db: C64,
    pub dda: C64,
    pub ddb: C64,
}

/// Energies and angular momentum of a rigidly rotating configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsOfMotion {
    /// Kinetic energy `ω² I0`.
    pub t: C64,
    /// Force function `Σ_{i<j} f_ij`.
    pub u: C64,
    /// `½ Σ m_i (a_i² + b_i²)`.
    pub i0: C64,
    /// `ω Σ m_i (a_i² + b_i²)`.
    pub sigma: C64,
    /// `T - U`.
    pub h: C64,
}

/// Masses and rotating-frame coordinates `(a_i, b_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarConfiguration {
    pub masses: Vec<f64>,
    pub coords: Vec<Vec2>,
    pub omega: f64,
}

impl PlanarConfiguration {
    /// Masses may be zero (test particles) but not all of them.
    pub fn new(masses: Vec<f64>, coords: Vec<Vec2>, omega: f64) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidConfiguration("need at least two bodies"));
        }
        if coords.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                expected: masses.len(),
                found: coords.len(),
            });
        }
        if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) || masses.iter().all(|m| *m == 0.0) {
            return Err(Error::InvalidConfiguration("masses must be nonnegative with one positive"));
        }
        if coords.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidConfiguration("coordinates must be finite"));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidParameter("pulsation must be finite"));
        }
        Ok(PlanarConfiguration { masses, coords, omega })
    }

    /// Builds a configuration from real coordinates.
    pub fn from_real(masses: Vec<f64>, coords: &[[f64; 2]], omega: f64) -> Result<Self> {
        let coords = coords
            .iter()
            .map(|p| [C64::new(p[0], 0.0), C64::new(p[1], 0.0)])
            .collect();
        PlanarConfiguration::new(masses, coords, omega)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Principal square root of `(a_i-a_j)² + (b_i-b_j)²`.
    pub fn pair_distance(&self, i: usize, j: usize) -> Result<C64> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
        }
        if i == j {
            return Err(Error::InvalidParameter("pair distance needs two distinct bodies"));
        }
        distance(&self.coords, i, j, diameter(&self.coords))
    }

    /// `U = Σ_{i<j} f_ij(r_ij)`.
    pub fn potential_energy(&self, potential: &Potential) -> Result<C64> {
        let diam = diameter(&self.coords);
        let mut u = C64::new(0.0, 0.0);
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                u += potential.value(i, j, distance(&self.coords, i, j, diam)?);
            }
        }
        Ok(u)
    }

    /// `ẍ_i` from the classical equations (per unit mass for test particles).
    pub fn classical_acceleration(&self, potential: &Potential, i: usize) -> Result<Vec2> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        specific_force(&self.masses, &self.coords, potential, i)
    }

    /// Per body, `m̃_i(ä - 2ωḃ - ω²a) - m̃_i F_a` and
    /// `m̃_i(b̈ + 2ωȧ - ω²b) - m̃_i F_b`, where `F` is [`Self::classical_acceleration`].
    pub fn rotating_residual_classical(
        &self,
        potential: &Potential,
        derivs: &[RotatingDerivs],
    ) -> Result<Vec<Vec2>> {
        if derivs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: derivs.len(),
            });
        }
        let w = self.omega;
        (0..self.len())
            .map(|i| {
                let f = self.classical_acceleration(potential, i)?;
                let m = effective_mass(self.masses[i]);
                let [a, b] = self.coords[i];
                let d = derivs[i];
                Ok([
                    (d.dda - d.db * (2.0 * w) - a * (w * w) - f[0]) * m,
                    (d.ddb + d.da * (2.0 * w) - b * (w * w) - f[1]) * m,
                ])
            })
            .collect()
    }

    /// `{T, U, I0, σ, H}` for the configuration rotating rigidly at `ω`.
    pub fn constants_of_motion(&self, potential: &Potential) -> Result<ConstantsOfMotion> {
        let i0: C64 = self
            .masses
            .iter()
            .zip(&self.coords)
            .map(|(m, [a, b])| (a * a + b * b) * (0.5 * m))
            .sum();
        let w = self.omega;
        let t = i0 * (w * w);
        let u = self.potential_energy(potential)?;
        Ok(ConstantsOfMotion {
            t,
            u,
            i0,
            sigma: i0 * (2.0 * w),
            h: t - u,
        })
    }

    /// The rotating-frame Hamiltonian of body `i` per unit mass, the others
    /// being held fixed: `½|v|² - ½ω²|x_i|² - Σ_j f_ij/m̃_i`. For a test
    /// particle in the field of rigidly rotating primaries this is the
    /// Jacobi-type constant.
    pub fn rotating_hamiltonian(&self, potential: &Potential, i: usize, velocity: Vec2) -> Result<C64> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        let diam = diameter(&self.coords);
        let [a, b] = self.coords[i];
        let w = self.omega;
        let mut h = (velocity[0] * velocity[0] + velocity[1] * velocity[1]) * 0.5
            - (a * a + b * b) * (0.5 * w * w);
        for j in 0..self.len() {
            if j != i {
                let r = distance(&self.coords, i, j, diam)?;
                h -= potential.specific_value(i, j, r, self.masses[i])?;
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn distances() {
        let cfg = PlanarConfiguration::from_real(vec![1.0, 1.0], &[[0.0, 0.0], [3.0, 4.0]], 1.0).unwrap();
        assert_eq!(cfg.pair_distance(0, 1).unwrap(), c(5.0));
        let cfg = PlanarConfiguration::new(
            vec![1.0, 1.0],
            vec![[C64::new(1.0, 1.0), c(0.0)], [c(0.0), c(0.0)]],
            1.0,
        )
        .unwrap();
        assert!((cfg.pair_distance(0, 1).unwrap() - C64::new(1.0, 1.0)).norm() < 1e-15);
        let cfg = PlanarConfiguration::from_real(vec![1.0, 1.0], &[[1.0, 1.0], [1.0, 1.0]], 1.0).unwrap();
        assert_eq!(cfg.pair_distance(0, 1), Err(Error::Collision { i: 0, j: 1 }));
    }

    #[test]
    fn newtonian_energies() {
        let pot = Potential::newtonian(1.0, vec![1.0, 1.0]).unwrap();
        let cfg = PlanarConfiguration::from_real(vec![1.0, 1.0], &[[-1.0, 0.0], [1.0, 0.0]], 1.0).unwrap();
        assert!((cfg.potential_energy(&pot).unwrap() - 0.5).norm() < 1e-15);

        let h = libm::sqrt(3.0) / 2.0;
        let pot = Potential::newtonian(1.0, vec![1.0; 3]).unwrap();
        let cfg = PlanarConfiguration::from_real(vec![1.0; 3], &[[0.0, 0.0], [1.0, 0.0], [0.5, h]], 1.0).unwrap();
        assert!((cfg.potential_energy(&pot).unwrap() - 3.0).norm() < 1e-14);
    }

    #[test]
    fn two_body_acceleration() {
        let pot = Potential::newtonian(1.0, vec![1.0, 1.0]).unwrap();
        let cfg = PlanarConfiguration::from_real(vec![1.0, 1.0], &[[0.5, 0.0], [-0.5, 0.0]], 0.0).unwrap();
        let a = cfg.classical_acceleration(&pot, 0).unwrap();
        assert!((a[0] + 1.0).norm() < 1e-15 && a[1].norm() < 1e-15);
        let b = cfg.classical_acceleration(&pot, 1).unwrap();
        assert!((a[0] + b[0]).norm() < 1e-15);
    }

    #[test]
    fn constants_for_two_unit_masses() {
        let pot = Potential::newtonian(1.0, vec![1.0, 1.0]).unwrap();
        let cfg = PlanarConfiguration::from_real(vec![1.0, 1.0], &[[0.5, 0.0], [-0.5, 0.0]], 1.0).unwrap();
        let k = cfg.constants_of_motion(&pot).unwrap();
        assert!((k.i0 - 0.25).norm() < 1e-15);
        assert!((k.t - 0.25).norm() < 1e-15);
        assert!((k.sigma - 0.5).norm() < 1e-15);
        assert!((k.h - (0.25 - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn test_particle_feels_primaries_only() {
        let masses = vec![0.9, 0.1, 0.0];
        let pot = Potential::newtonian(1.0, masses.clone()).unwrap();
        let cfg = PlanarConfiguration::from_real(masses, &[[0.1, 0.0], [-0.9, 0.0], [0.0, 2.0]], 1.0).unwrap();
        let a = cfg.classical_acceleration(&pot, 2).unwrap();
        let mut expected = [0.0; 2];
        for (m, p) in [(0.9, [0.1, 0.0]), (0.1, [-0.9, 0.0])] {
            let (dx, dy) = (0.0 - p[0], 2.0 - p[1]);
            let r3 = libm::pow(dx * dx + dy * dy, 1.5);
            expected[0] -= m * dx / r3;
            expected[1] -= m * dy / r3;
        }
        assert!((a[0] - expected[0]).norm() < 1e-15 && (a[1] - expected[1]).norm() < 1e-15);
        // the primaries do not feel it
        let a0 = cfg.classical_acceleration(&pot, 0).unwrap();
        assert!((a0[0] * 0.9 + 0.9 * 0.1 / 1.0).norm() < 1e-15);
    }

    #[test]
    fn matrix_coupling_rejects_massless_body() {
        let pot = Potential::homogeneous(-1.0, Coupling::Matrix { n: 2, mu: vec![0.0, 1.0, 1.0, 0.0] }).unwrap();
        let cfg = PlanarConfiguration::from_real(vec![1.0, 0.0], &[[0.0, 0.0], [1.0, 0.0]], 1.0).unwrap();
        assert_eq!(cfg.classical_acceleration(&pot, 1), Err(Error::MasslessBody(1)));
        assert!(cfg.classical_acceleration(&pot, 0).is_ok());
    }

    #[test]
    fn rejects_bad_potentials() {
        assert!(Potential::homogeneous(2.0, Coupling::Gravitational { g: 1.0, masses: vec![1.0] }).is_err());
        assert!(Potential::homogeneous(0.0, Coupling::Gravitational { g: 1.0, masses: vec![1.0] }).is_err());
        assert!(Potential::homogeneous(-1.0, Coupling::Matrix { n: 2, mu: vec![0.0, 1.0, 2.0, 0.0] }).is_err());
        assert!(PlanarConfiguration::from_real(vec![0.0, 0.0], &[[0.0, 0.0], [1.0, 0.0]], 1.0).is_err());
    }
}
