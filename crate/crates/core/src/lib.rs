//! Discrete (scale-derivative) calculus of variations for the n-body problem.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`boxop`]: generalized scale-derivative stencils `Box`, their adjoint and
//!   the second-order composition `Box*Box`, all with a characteristic-function
//!   cutoff on a finite time window;
//! * [`rotframe`]: the rotating-frame operators `V_c`, `V_s`, `W_c`, `W_s`, the
//!   discrete pulsation `Ω²(ε)` and the expansion factor `φ(ε)`;
//! * [`dynamics`]: pairwise potentials, energies and classical equations of
//!   motion in inertial and rotating frames;
//! * [`equilibria`]: the algebraic relative-equilibrium system, a damped
//!   Gauss-Newton solver, three-body classification and the L4/L5 points;
//! * [`sim`]: grid marching of the discrete Euler-Lagrange (DEL) and discrete
//!   Hamiltonian (DHE) equations, an RK4 classical reference and the restricted
//!   three-body experiments.
//!
//! Coordinates and stencil coefficients are complex throughout. Bodies with
//! zero mass are test particles: they feel the field of the massive bodies but
//! exert no force, and their equations are reported per unit mass.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boxop;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod linalg;
mod math;
pub mod rotframe;
pub mod sim;

#[cfg(test)]
mod proptests;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// A planar point `(a, b)` with complex components.
pub type Vec2 = [C64; 2];
