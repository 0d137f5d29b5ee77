//! Comparative statics of the disclosure threshold.
//!
//! Three routes: the closed-form threshold under a uniform density, central
//! differences of the full numerical solve (Richardson-refined), and
//! hand-derived partial derivatives of `C1`, `C2`, `C3`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_threshold, Corner};
use crate::model::{derived_constants, ErrorDensity, ModelParams, ParamName};
use crate::{Error, Result};

/// Largest `kappa` at which sign tables are trusted.
pub const SMALL_KAPPA: f64 = 0.05;
/// Default relative step of the central difference.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Derivatives smaller than this in magnitude count as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Parameters that appear in the sign tables, in table order.
pub const TABLE_PARAMS: [ParamName; 7] = [
    ParamName::GammaG,
    ParamName::GammaB,
    ParamName::RestructureValue,
    ParamName::PrivateBenefit,
    ParamName::Tau,
    ParamName::Kappa,
    ParamName::InfoProb,
];

/// Closed-form root of the threshold equation under a uniform density.
pub fn closed_form_threshold_uniform(params: &ModelParams) -> Result<f64> {
    params.ensure_solvable()?;
    let k = derived_constants(params, &ErrorDensity::Uniform)?;
    let (c, c1, c2, p) = (k.c, k.c1, k.c2, params.info_prob);
    let disc = c2 * c2 * (p - 2.0).powi(2) + (c1 - 2.0 * c2) * p * (4.0 * c * (p - 1.0) + c1 * p);
    if disc < 0.0 {
        return Err(Error::ClosedForm(format!("negative discriminant {disc}")));
    }
    let x = -(c2 * p + disc.sqrt() - 2.0 * c2) / ((c1 - 2.0 * c2) * p);
    if !(-1.0..=0.0).contains(&x) {
        return Err(Error::ClosedForm(format!(
            "root {x} outside [-1, 0]; corner regime"
        )));
    }
    Ok(x)
}

fn interior_threshold(params: &ModelParams, density: &ErrorDensity) -> Result<f64> {
    let th = solve_threshold(params, density)?;
    if th.corner != Corner::Interior {
        return Err(Error::Statics(
            "threshold is at the full-disclosure corner".into(),
        ));
    }
    Ok(th.x_star)
}

/// Plain central difference of `x*` in `which` with absolute step `h`.
pub fn central_difference(
    params: &ModelParams,
    density: &ErrorDensity,
    which: ParamName,
    h: f64,
) -> Result<f64> {
    let v = params.get(which);
    let up = interior_threshold(&params.with(which, v + h), density)?;
    let down = interior_threshold(&params.with(which, v - h), density)?;
    Ok((up - down) / (2.0 * h))
}

/// `∂x*/∂which` by one Richardson step over central differences at `h` and
/// `h / 2`. `h` defaults to `DEFAULT_STEP` scaled by `max(1, |value|)`.
pub fn dxstar_dparam(
    params: &ModelParams,
    density: &ErrorDensity,
    which: ParamName,
    h: Option<f64>,
) -> Result<f64> {
    let h = h.unwrap_or(DEFAULT_STEP * params.get(which).abs().max(1.0));
    let coarse = central_difference(params, density, which, h)?;
    let fine = central_difference(params, density, which, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Which of `C1`, `C2`, `C3` a derivative refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficient {
    C1,
    C2,
    C3,
}

/// Hand-derived `∂C_i/∂which`. Returns exactly zero where the coefficient
/// does not depend on the parameter.
pub fn coefficient_derivative(params: &ModelParams, coef: Coefficient, which: ParamName) -> f64 {
    let p = params;
    let keep = (1.0 - p.tau) * (1.0 - p.kappa);
    let y = p.restructure_value;
    let (lb, lg) = (p.l_b(), p.l_g());
    use Coefficient::*;
    use ParamName::*;
    match (coef, which) {
        (C1, GammaB) => -0.5 * y * (1.0 - keep),
        (C1, RestructureValue) => 0.5 * (1.0 - p.gamma_b) * (1.0 - keep),
        (C1, PrivateBenefit) => 0.5 * keep,
        (C1, Tau) => 0.5 * (1.0 - p.kappa) * lb,
        (C1, Kappa) => 0.5 * (1.0 - p.tau) * lb,
        (C2, GammaB) => -0.5 * p.tau * (1.0 - p.kappa) * y,
        (C2, RestructureValue) => 0.5 * p.tau * (1.0 - p.kappa) * (1.0 - p.gamma_b),
        (C2, PrivateBenefit) => 0.5 * (1.0 - p.tau * (1.0 - p.kappa)),
        (C2, Tau) => 0.5 * (1.0 - p.kappa) * lb,
        (C2, Kappa) => -0.5 * p.tau * lb,
        (C3, GammaG) => -0.5 * y * (1.0 - keep),
        (C3, RestructureValue) => 0.5 * (1.0 - p.gamma_g) * (1.0 - keep),
        (C3, PrivateBenefit) => 0.5 * keep,
        (C3, Tau) => -0.5 * (1.0 - p.kappa) * lg,
        (C3, Kappa) => -0.5 * (1.0 - p.tau) * lg,
        _ => 0.0,
    }
}

/// Limits of `∂x*/∂which` as `kappa -> 0` under a uniform density, for the
/// four parameters whose general-density sign is ambiguous.
pub fn kappa_zero_limit(params: &ModelParams, which: ParamName) -> Option<f64> {
    let (gg, gb, y, x, tau, p) = (
        params.gamma_g,
        params.gamma_b,
        params.restructure_value,
        params.private_benefit,
        params.tau,
        params.info_prob,
    );
    let base = tau * y * (gb - 1.0) + (tau - 1.0) * x;
    let root =
        ((p - 1.0) * base * (tau * y * ((p - 2.0) * gb - p * gg + 2.0) - 2.0 * (tau - 1.0) * x))
            .sqrt();
    let numer = match which {
        ParamName::Tau => (p - 1.0) * x * y * (gb - gg),
        ParamName::GammaB => -(p - 1.0) * tau * y * (tau * y * (gg - 1.0) + (tau - 1.0) * x),
        ParamName::PrivateBenefit => (p - 1.0) * (tau - 1.0) * tau * y * (gb - gg),
        ParamName::RestructureValue => -(p - 1.0) * (tau - 1.0) * tau * x * (gb - gg),
        _ => return None,
    };
    Some(numer / root / (2.0 * base))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "?")]
    Ambiguous,
}

impl Sign {
    pub fn of(v: f64, tol: f64) -> Sign {
        if v > tol {
            Sign::Positive
        } else if v < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Ambiguous => "?",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableTarget {
    C1,
    C2,
    C3,
    XStarGeneral,
    XStarUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub param: ParamName,
    pub expected: Sign,
    /// `None` for cells expected to be ambiguous, which are not tested.
    pub observed: Option<Sign>,
    pub value: Option<f64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTable {
    pub target: TableTarget,
    pub rows: Vec<SignRow>,
}

impl SignTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &SignRow> {
        self.rows.iter().filter(|r| !r.matches)
    }
}

use Sign::{Ambiguous as Q, Negative as N, Positive as P, Zero as Z};

/// Expected signs of `∂(C1, C2, C3)/∂β` for β in the first six table
/// parameters.
pub const EXPECTED_COEFFICIENT_SIGNS: [(ParamName, [Sign; 3]); 6] = [
    (ParamName::GammaG, [Z, Z, N]),
    (ParamName::GammaB, [N, N, Z]),
    (ParamName::RestructureValue, [P, P, P]),
    (ParamName::PrivateBenefit, [P, P, P]),
    (ParamName::Tau, [P, P, N]),
    (ParamName::Kappa, [P, N, N]),
];

/// Expected signs of `∂x*/∂β` under any symmetric density.
pub const EXPECTED_GENERAL: [Sign; 7] = [N, Q, Q, Q, Q, N, N];
/// Expected signs of `∂x*/∂β` under a uniform density.
pub const EXPECTED_UNIFORM: [Sign; 7] = [N, P, N, P, N, N, N];

/// Coefficient sign tables evaluated at `params`.
pub fn coefficient_tables(params: &ModelParams) -> Vec<SignTable> {
    [
        (TableTarget::C1, Coefficient::C1),
        (TableTarget::C2, Coefficient::C2),
        (TableTarget::C3, Coefficient::C3),
    ]
    .iter()
    .enumerate()
    .map(|(col, &(target, coef))| SignTable {
        target,
        rows: EXPECTED_COEFFICIENT_SIGNS
            .iter()
            .map(|&(param, signs)| {
                let v = coefficient_derivative(params, coef, param);
                let observed = Sign::of(v, 0.0);
                SignRow {
                    param,
                    expected: signs[col],
                    observed: Some(observed),
                    value: Some(v),
                    matches: observed == signs[col],
                }
            })
            .collect(),
    })
    .collect()
}

fn threshold_table(
    params: &ModelParams,
    density: &ErrorDensity,
    target: TableTarget,
    expected: &[Sign; 7],
) -> Result<SignTable> {
    let rows = TABLE_PARAMS
        .iter()
        .zip(expected)
        .map(|(&param, &expected)| {
            if expected == Sign::Ambiguous {
                return Ok(SignRow {
                    param,
                    expected,
                    observed: None,
                    value: None,
                    matches: true,
                });
            }
            let v = dxstar_dparam(params, density, param, None)?;
            let observed = Sign::of(v, ZERO_TOL);
            Ok(SignRow {
                param,
                expected,
                observed: Some(observed),
                value: Some(v),
                matches: observed == expected,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignTable { target, rows })
}

/// All five sign tables at `params`.
///
/// The uniform table always uses the uniform density. The general table
/// uses `density`, or the triangular density when `density` is uniform, and
/// tests only its unambiguous cells. Requires `kappa <= SMALL_KAPPA` and an
/// interior, unique threshold.
pub fn sign_tables(params: &ModelParams, density: &ErrorDensity) -> Result<Vec<SignTable>> {
    if params.kappa > SMALL_KAPPA {
        return Err(Error::Statics(format!(
            "kappa = {} exceeds the small-kappa bound {SMALL_KAPPA}",
            params.kappa
        )));
    }
    let general = match density {
        ErrorDensity::Uniform => ErrorDensity::Triangular,
        other => other.clone(),
    };
    for d in [&ErrorDensity::Uniform, &general] {
        let th = solve_threshold(params, d)?;
        if th.corner != Corner::Interior || !th.unique {
            return Err(Error::Statics(format!(
                "threshold under the {} density is not interior and unique",
                d.kind_name()
            )));
        }
    }
    let mut tables = coefficient_tables(params);
    tables.push(threshold_table(
        params,
        &general,
        TableTarget::XStarGeneral,
        &EXPECTED_GENERAL,
    )?);
    tables.push(threshold_table(
        params,
        &ErrorDensity::Uniform,
        TableTarget::XStarUniform,
        &EXPECTED_UNIFORM,
    )?);
    Ok(tables)
}
