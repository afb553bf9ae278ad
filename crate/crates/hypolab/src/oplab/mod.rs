//! Operator laboratory: divergence-form discretization of the generator on
//! a 2-d tensor grid, the auxiliary operator algebra, and the checks that
//! turn the abstract decay machinery into finite linear algebra.
//!
//! The lab runs the scalar (`d1 = d2 = 1`) system: a two-dimensional grid
//! keeps dense algebra cheap while exercising every operator identity, and
//! nothing in the checks is dimension-specific.

pub mod checks;
pub mod decay;
pub mod grid;
pub mod ode;
pub mod operators;

pub use checks::{
    check_g_formula, check_m_constant, check_sa_relation, discrete_wpi, subordination_check,
    verify_mixed_bounds, verify_structure, DiscreteWpi,
};
pub use decay::{decay_constants, hypocoercive_decay, i_eps};
pub use grid::{Grid1d, GridMeasure};
pub use operators::DiscreteOperatorSet;
