//! Model primitives: parameters and their validation, the error density,
//! the date-2 payoff tables and the constants the threshold equation uses.

mod constants;
mod density;
mod params;
mod payoff;

pub use constants::{derived_constants, DerivedConstants};
pub use density::{ErrorDensity, TabulatedDensity};
pub use params::{validate_params, Check, ModelParams, ParamName, ValidationReport};
pub use payoff::{payoff_cell, payoff_table, PayoffCell, Regime, Signal, State};
