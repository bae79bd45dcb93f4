//! Steady states of Poisson–Nernst–Planck systems with steric (finite-size)
//! coupling between ion species.

pub mod branch_algebra;
pub mod bvp_solver;
pub mod error;
pub mod excess_current;
pub mod exec;
pub mod grid;
pub mod quadrature;
pub mod rhs_assembly;
pub mod roots;

pub use error::{Error, Result};
pub use exec::Execution;
