//! U(1)-gauged discrete-time quantum walks on periodic 1D and 2D lattices.
//!
//! The walker is a two-component (coin) amplitude field. One time step applies a
//! coin rotation followed by a coin-dependent shift in which the gauge phases are
//! applied before the translation for the `R` component and after it for the `L`
//! component. In 2D the walk alternates such substeps along `x` and `y`.
//!
//! Besides the evolution kernels the crate provides:
//!
//! * [`gauge`]: sampling of continuum potentials into lattice phases, the one-link
//!   sum/difference operators, discrete derivatives, gauge transformations and the
//!   lattice field tensor;
//! * [`observables`]: probability density, the two-step lattice currents and the
//!   continuity residual;
//! * [`dirac`]: a spectral reference solver for the minimally coupled Dirac equation
//!   and continuum-limit convergence studies;
//! * [`expr`]: a small arithmetic expression language for potentials and gauge
//!   functions.

pub mod dirac;
pub mod error;
pub mod expr;
pub mod field;
pub mod gauge;
pub mod lattice;
pub mod observables;
pub mod random;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::{Coin, CoinOperator, GaussianPacket, LatticeGeom, Mat2, WalkerState};

pub use num_complex::Complex64 as C64;
