//! Numerical laboratory for entropy solutions of anisotropic degenerate
//! parabolic-hyperbolic equations
//!
//! ```text
//! u_t + div f(u) = D^2 : A(u),   u(0, x) = u0(x)
//! ```
//!
//! with almost-periodic initial data. The crate provides
//!
//! * [`ap`]: trigonometric-polynomial signals (mean value, Bohr-Fourier
//!   coefficients, Besicovitch seminorms, ε-almost periods, lattice projection);
//! * [`model`]: polynomial constitutive data and the non-degeneracy functional;
//! * [`solver`]: a monotone Engquist-Osher finite-volume scheme on a periodic
//!   super-cell;
//! * [`diagnostics`]: decay, contraction, monotonicity and entropy checks;
//! * [`kinetic`]: kinetic-formulation identities and multiplier probes.

pub mod ap;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod kinetic;
pub mod model;
pub mod poly;
pub mod quadrature;
pub mod solver;

pub use ap::{ApSignal, FrequencySet};
pub use error::{Error, Result};
pub use model::{Model, ModelSpec};
pub use solver::{Field, GridSpec, Solver, SolverConfig, Trajectory};

pub const VERSION: &str = concat!("baplab ", env!("CARGO_PKG_VERSION"));
