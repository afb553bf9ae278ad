//! hypolab: a numerical laboratory for convergence rates of degenerate
//! diffusion semigroups.
//!
//! The crate has three legs:
//!
//! * **Rate calculus** ([`rates`]): weak-Poincaré rate functions, the
//!   implicit inversion that turns a rate pair into a decay envelope
//!   `xi(t)`, the closed-form envelopes for the standard potential
//!   families, and asymptotic class fitting.
//! * **Monte Carlo** ([`measure`], [`sde`]): exact product-measure sampling
//!   by radial inverse CDF, and a two-copy Euler-Maruyama estimator for the
//!   decay of `Var(P_t f)` along the degenerate SDE.
//! * **Operator lab** ([`oplab`]): a divergence-form discretization of the
//!   generator `L = S - A` on a 2-d tensor grid that turns the abstract
//!   operator inequalities (auxiliary operator `B`, subordination, the
//!   hypocoercive Gronwall bound) into machine-checkable linear algebra.
//!
//! Everything stochastic is driven by `(seed, stream)` pairs and is
//! bit-reproducible for any thread count; see [`rng`].

// Parameter gates are written as `!(x > 0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod measure;
pub mod oplab;
pub mod potential;
pub mod quad;
pub mod rates;
pub mod report;
pub mod rng;
pub mod sde;

pub use error::{Error, Result};
