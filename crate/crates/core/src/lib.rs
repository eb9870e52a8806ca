//! Genetic optimization of quantum annealing schedules and counter-diabatic
//! style driving terms, simulated on the collective-spin sector of the
//! p-spin model and on small Ising instances.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod ga;
pub mod ising;
pub mod operator;
pub mod par;
pub mod schedule;
pub mod spin;

pub use error::{Error, Result};
pub use operator::{HermitianOperator, StateVector, C64};
