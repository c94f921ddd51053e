pub mod distributions;
pub mod error;
pub mod exact;
mod extended;
pub mod model;
pub mod quadrature;

pub use distributions::{Distribution, Family};
pub use error::{Error, Result};
pub use model::{
    evaluate_welfare, g_eval, solve_equilibrium, EquilibriumProfile, Preferences, StoppingProblem,
    TerminalValue, WelfareReport,
};
pub mod hazard;
pub mod simulate;
pub mod rationalize;
pub mod identification;
pub mod estimation;
pub mod cli;
