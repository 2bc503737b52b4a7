//! Spectral numerics for the linearized quantum-hydrodynamic acoustic
//! system on periodic lattices.
//!
//! * [`dispersion`]: the radial symbols `phi`, `phi_eps`, the Bogoliubov law
//!   and the Hessian determinant of the radial phase.
//! * [`grid`] and [`spectral`]: lattices, unitary FFTs and Fourier
//!   multipliers (Helmholtz, Littlewood-Paley, fractional operators).
//! * [`propagator`]: exact per-mode evolution of the symmetrized system.
//! * [`oscillatory`]: radial quadrature of the frequency-localized kernel.
//! * [`norms`]: admissible exponents and the space-time norms they feed.
//! * [`gpe`]: a split-step Gross-Pitaevskii solver for cross-checks.
//! * [`experiments`]: config-driven verification campaigns.
//!
//! With the default `parallel` feature the lattice kernels run on rayon;
//! disabling it gives a sequential build with bitwise identical reductions.

// `!(x >= 0.0)` is used on purpose to reject NaN alongside negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod dispersion;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod gpe;
pub mod grid;
pub mod norms;
pub mod oscillatory;
mod par;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
