//! Solver for the covenant accounting adjustment game.
//!
//! A borrower-manager who may privately learn the error in a default
//! covenant measurement rule decides whether to disclose it before the debt
//! is priced. The crate computes the break-even face values, the disclosure
//! threshold, first-best and equilibrium information-acquisition effort, and
//! the comparative statics of the threshold, and ships independent checks for
//! each: closed forms, brute-force best-response scans and a Monte Carlo
//! simulator of the full game.
//!
//! ```
//! use covenant_core::{equilibrium, ErrorDensity, ModelParams};
//!
//! let params = ModelParams::benchmark();
//! let eq = equilibrium::solve_equilibrium(&params, &ErrorDensity::Uniform).unwrap();
//! assert!((eq.d1 - 4.4).abs() < 1e-12);
//! assert!(eq.x_star < 0.0 && eq.d0 > eq.d1);
//! ```

pub mod effort;
pub mod equilibrium;
mod error;
pub mod fixtures;
pub mod model;
pub mod quadrature;
pub mod roots;
pub mod simulate;
pub mod statics;

pub use error::{Error, Result};
pub use model::{
    derived_constants, payoff_table, validate_params, DerivedConstants, ErrorDensity, ModelParams,
    ParamName, PayoffCell, Regime, Signal, State, ValidationReport,
};
