use serde::{Deserialize, Serialize};

use super::{ErrorDensity, ModelParams};
use crate::Result;

/// Constants of the indifference condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub l_b: f64,
    pub l_g: f64,
    /// Half the lender's loss per unit of undue-optimism degree.
    pub c1: f64,
    /// Half the manager's gain per unit of undue-optimism degree.
    pub c2: f64,
    /// Half the lender's gain per unit of false-alarm degree.
    pub c3: f64,
    /// `(c3 - c1) ∫_0^1 x f(x) dx`: the uninformed lender's expected transfer
    /// relative to a perfect rule. Negative whenever `tau > 0` or `kappa > 0`.
    pub c: f64,
}

pub fn derived_constants(params: &ModelParams, density: &ErrorDensity) -> Result<DerivedConstants> {
    let p = params;
    let l_b = p.l_b();
    let l_g = p.l_g();
    let keep = (1.0 - p.tau) * (1.0 - p.kappa);
    let c1 = 0.5 * ((1.0 - p.gamma_b) * p.restructure_value - keep * l_b);
    let c2 = 0.5 * (p.private_benefit + p.tau * (1.0 - p.kappa) * l_b);
    let c3 = 0.5 * ((1.0 - p.gamma_g) * p.restructure_value + keep * l_g);
    let c = (c3 - c1) * density.half_moment()?;
    Ok(DerivedConstants {
        l_b,
        l_g,
        c1,
        c2,
        c3,
        c,
    })
}
