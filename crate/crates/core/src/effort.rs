//! Information-acquisition effort.
//!
//! Effort `p` costs `c(p) = c0 p^2 / 2`. The first-best level trades the
//! renegotiation loss that disclosure avoids against marginal cost. The
//! manager's privately optimal level also values the option to withhold
//! undue-optimism errors, holding the lender's pricing (which depends on the
//! conjectured `p`) fixed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{self, EquilibriumSolution};
use crate::model::{derived_constants, payoff_cell, ErrorDensity, ModelParams, Signal, State};
use crate::roots::{try_bisect, GridScan};
use crate::{Error, Result};

/// Effort bracket is `[EPS, 1 - EPS]`.
pub const EPS: f64 = 1e-6;
/// Cells in the marginal-benefit scan used to bracket the first-order condition.
pub const EFFORT_GRID: usize = 64;
/// Bisection stops once the effort bracket is this narrow.
pub const EFFORT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortSolution {
    pub p_fb: f64,
    pub p_star: f64,
    /// `(p, MB(p))` on the bracketing grid.
    pub mb_trace: Vec<(f64, f64)>,
    pub w_fb: f64,
    /// Every crossing of marginal cost and marginal benefit found on the
    /// grid, ascending; `p_star` is the first.
    pub crossings: Vec<f64>,
    pub foc_residual_fb: f64,
    pub foc_residual_star: f64,
    pub over_investment: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedUtilities {
    /// `E[u | t = ∅]` via the first-best surplus decomposition.
    pub u_uninformed: f64,
    /// `E[u | t = ∅]` by direct quadrature of the table payoffs.
    pub u_uninformed_direct: f64,
    /// `∫_{-1}^{x*} E[u | x, d = 0] f(x) dx`.
    pub u_withhold_avg: f64,
    /// `E[u | x, d = 1] = W_FB - K`, the same for every disclosed degree.
    pub u_disclose: f64,
    /// `E[v | t = ∅]`.
    pub lender_uninformed: f64,
    /// Probability an informed manager withholds, `F(x*)`.
    pub withhold_mass: f64,
}

impl ExpectedUtilities {
    /// Informed manager's expected payoff before learning `x`.
    pub fn u_informed(&self) -> f64 {
        self.u_withhold_avg + (1.0 - self.withhold_mass) * self.u_disclose
    }

    /// Gain from becoming informed; the right-hand side of the effort FOC.
    pub fn marginal_benefit(&self) -> f64 {
        self.u_informed() - self.u_uninformed
    }

    /// `E[u]` at effort `p` with pricing held fixed, net of effort cost.
    pub fn net_payoff(&self, params: &ModelParams, p: f64) -> f64 {
        (1.0 - p) * self.u_uninformed + p * self.u_informed() - cost(params, p)
    }
}

pub fn cost(params: &ModelParams, p: f64) -> f64 {
    0.5 * params.cost_scale * p * p
}

pub fn marginal_cost(params: &ModelParams, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            what: "effort",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(params.cost_scale * p)
}

/// Social value of information: the renegotiation loss avoided per unit of
/// effort, `κ (L_G + L_B) ∫_0^1 x f / 2`.
pub fn social_value_of_information(params: &ModelParams, density: &ErrorDensity) -> Result<f64> {
    Ok(0.5 * params.kappa * (params.l_g() + params.l_b()) * density.half_moment()?)
}

pub fn first_best_effort(params: &ModelParams, density: &ErrorDensity) -> Result<f64> {
    params.ensure_solvable()?;
    let p = social_value_of_information(params, density)? / params.cost_scale;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::NonInterior {
            what: "first-best",
            value: p,
        })
    }
}

/// Payoffs by information status at a solved equilibrium. `eq` must be
/// solved at `params.info_prob`.
pub fn expected_utilities(
    params: &ModelParams,
    density: &ErrorDensity,
    eq: &EquilibriumSolution,
) -> Result<ExpectedUtilities> {
    let k = derived_constants(params, density)?;
    let d0 = eq.d0;
    let lender_uninformed = 0.5 * (params.gamma_g + params.gamma_b) * d0
        + 0.5 * (1.0 - params.gamma_b) * params.restructure_value
        + k.c;
    let u_uninformed =
        params.w_fb() - social_value_of_information(params, density)? - lender_uninformed;

    let u_uninformed_direct = {
        density.expectation(
            |x| equilibrium::manager_payoff_withhold(params, d0, x),
            -1.0,
            1.0,
        )?
    };

    // On x <= 0 the withheld payoff is affine: a + b x.
    let ug = payoff_cell(params, d0, State::G, Signal::Good).manager;
    let ubb = payoff_cell(params, d0, State::B, Signal::Bad).manager;
    let ubg = payoff_cell(params, d0, State::B, Signal::Good).manager;
    let a = 0.5 * ug + 0.5 * ubb;
    let b = 0.5 * (ubb - ubg);
    let withhold_mass = density.cdf(eq.x_star)?;
    let u_withhold_avg = a * withhold_mass + b * density.partial_x_moment(-1.0, eq.x_star)?;

    Ok(ExpectedUtilities {
        u_uninformed,
        u_uninformed_direct,
        u_withhold_avg,
        u_disclose: params.w_fb() - params.setup_cost,
        lender_uninformed,
        withhold_mass,
    })
}

/// Solves the subgame at effort `p` and returns the value of information.
pub fn marginal_benefit(params: &ModelParams, density: &ErrorDensity, p: f64) -> Result<f64> {
    let at_p = ModelParams {
        info_prob: p,
        ..*params
    };
    let eq = equilibrium::solve_equilibrium(&at_p, density)?;
    Ok(expected_utilities(&at_p, density, &eq)?.marginal_benefit())
}

/// Solves `c'(p) = MB(p)`.
///
/// MB is scanned on a grid over `[EPS, 1 - EPS]`; the first sign change of
/// `c' - MB` (the lowest equilibrium, always a stable one since `c' < MB`
/// at `EPS`) is bisected. Later crossings are bisected and reported too.
pub fn solve_effort(params: &ModelParams, density: &ErrorDensity) -> Result<EffortSolution> {
    let p_fb = first_best_effort(params, density)?;
    let foc = |p: f64| -> Result<f64> {
        Ok(marginal_cost(params, p)? - marginal_benefit(params, density, p)?)
    };

    let xs: Vec<f64> = (0..=EFFORT_GRID)
        .map(|i| EPS + (1.0 - 2.0 * EPS) * i as f64 / EFFORT_GRID as f64)
        .collect();
    let mbs = xs
        .par_iter()
        .map(|&p| marginal_benefit(params, density, p))
        .collect::<Result<Vec<f64>>>()?;
    let values: Vec<f64> = xs
        .iter()
        .zip(&mbs)
        .map(|(&p, mb)| params.cost_scale * p - mb)
        .collect();
    let mb_trace: Vec<(f64, f64)> = xs.iter().cloned().zip(mbs.iter().cloned()).collect();

    if values[0] >= 0.0 {
        return Err(Error::NoInteriorCrossing(format!(
            "marginal cost {} exceeds marginal benefit {} at p = {EPS}",
            params.cost_scale * EPS,
            mbs[0]
        )));
    }
    let scan = GridScan { xs, values };
    let brackets = scan.brackets();
    if brackets.is_empty() {
        return Err(Error::NoInteriorCrossing(format!(
            "marginal benefit {} still exceeds marginal cost {} at p = {}",
            mbs[EFFORT_GRID],
            params.cost_scale * (1.0 - EPS),
            1.0 - EPS
        )));
    }
    let crossings = brackets
        .iter()
        .map(|&b| try_bisect(foc, b, EFFORT_TOL))
        .collect::<Result<Vec<f64>>>()?;
    let p_star = crossings[0];

    Ok(EffortSolution {
        p_fb,
        p_star,
        mb_trace,
        w_fb: params.w_fb(),
        foc_residual_fb: (marginal_cost(params, p_fb)?
            - social_value_of_information(params, density)?)
        .abs(),
        foc_residual_star: foc(p_star)?.abs(),
        over_investment: p_star > p_fb,
        crossings,
    })
}

/// Grid-search best response: holding the lender's pricing at the
/// equilibrium for `conjectured_p`, the effort on a `grid_size`-point grid
/// over `[0, 1]` that maximizes `E[u] - c(p)`.
pub fn grid_best_response(
    params: &ModelParams,
    density: &ErrorDensity,
    conjectured_p: f64,
    grid_size: usize,
) -> Result<f64> {
    let at_p = ModelParams {
        info_prob: conjectured_p,
        ..*params
    };
    let eq = equilibrium::solve_equilibrium(&at_p, density)?;
    let eu = expected_utilities(&at_p, density, &eq)?;
    let n = grid_size.max(2);
    let best = (0..n)
        .map(|i| i as f64 / (n - 1) as f64)
        .map(|p| (p, eu.net_payoff(params, p)))
        .fold((0.0, f64::NEG_INFINITY), |acc, cur| {
            if cur.1 > acc.1 {
                cur
            } else {
                acc
            }
        });
    Ok(best.0)
}
