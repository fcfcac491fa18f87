//! Continuous-time embeddings of one-dimensional maps.
//!
//! A map `x -> f(x)` is embedded in continuous time by truncating the unit
//! time-evolution operator `exp(d/dt)` after the `N`-th derivative, which gives
//! the order-`N` ODE
//!
//! ```text
//! sum_{j=0..N} x^(j)(t) / j! = f(x(t))
//! ```
//!
//! The crate builds these truncations ([`embedding`]), decides their linear
//! stability with exact Routh-Hurwitz determinants ([`stability`]), solves the
//! linearized inhomogeneous system in closed form ([`linear_solution`]),
//! integrates the nonlinear systems and classifies their attractors
//! ([`dynamics`]), and scans parameter space ([`sweep`]).
//!
//! Named end-to-end checks live in [`scenarios`]; the CLI `reproduce`
//! subcommand and the acceptance test suite both run them from there.

pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod linear_solution;
pub mod maps;
pub mod scenarios;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};
