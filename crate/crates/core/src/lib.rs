//! Exact Haar-averaged moments of two-point correlations in random solvable
//! tensor networks, with an independent Monte Carlo cross-check.
//!
//! The library is organised bottom-up:
//!
//! * [`permgroup`] and [`weingarten`] provide symmetric-group combinatorics and
//!   exact Weingarten calculus.
//! * [`densealg`] is the dense complex tensor substrate (named-leg contraction,
//!   Haar sampling, spectra).
//! * [`dualunitary`] builds and checks dual-unitary gates and the maps that
//!   evolve local operators.
//! * [`mps`] and [`peps`] evaluate correlation diagrams of disordered solvable
//!   MPS and PEPS for concrete unitaries; [`mps_moments`] and [`peps_moments`]
//!   compute the same quantities averaged over the Haar ensemble, exactly.
//! * [`mc_oracle`] samples the ensembles and compares against the analytic
//!   values; [`cli`] is the command-line front end.
//!
//! See the `examples/` directory for one runnable program per capability.

#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod cli;
pub mod densealg;
pub mod dualunitary;
mod error;
pub mod exact;
pub mod mc_oracle;
pub mod mps;
pub mod mps_moments;
pub mod operators;
pub mod peps;
pub mod peps_moments;
pub mod permgroup;
pub mod weingarten;

pub use error::{Error, Result};
