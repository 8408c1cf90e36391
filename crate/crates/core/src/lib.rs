//! Hill four-body problem with an oblate tertiary, regularized at the
//! tertiary collision with McGehee coordinates.
//!
//! * [`equilibrium`]: triangular relative equilibrium of the primaries and
//!   the rotating-frame coefficients λ₁, λ₂.
//! * [`dynamics`]: planar quasi-homogeneous Hamiltonian
//!   `H = ½|y|² + x₂y₁ − x₁y₂ + Ax₁² + Bx₂² − |x|^{−ν} − c|x|^{−α}`.
//! * [`mcgehee`]: blow-up coordinates, regularized field, energy condition.
//! * [`collision`]: reduced flow on the collision manifold, equilibria,
//!   bifurcation in `c`, regularizability predicates.
//! * [`integrator`]: adaptive Dormand–Prince 5(4) with dense output and
//!   events.

pub mod collision;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod integrator;
pub mod mcgehee;
pub mod rational;

pub use dynamics::{CartesianState, HillParams};
pub use error::{Error, Result};
pub use mcgehee::{ExponentMode, McGeheeState};
pub use rational::Rational;
