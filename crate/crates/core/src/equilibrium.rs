//! The disclosure subgame: break-even face values, the incremental payoff of
//! disclosure and the threshold below which an informed manager withholds.
//!
//! The indifference condition at the threshold already has the
//! non-disclosure face value substituted out, so the threshold is a root of a
//! scalar function `J` of `x*` alone and `D0` is recovered afterwards from its
//! (linear) break-even condition.

use serde::{Deserialize, Serialize};

use crate::model::{
    derived_constants, payoff_cell, DerivedConstants, ErrorDensity, ModelParams, Signal, State,
};
use crate::roots::{try_bisect, GridScan};
use crate::{Error, Result};

/// Grid cells used to bracket sign changes of `J` on `[-1, 0]`.
pub const THRESHOLD_GRID: usize = 2048;
/// Width at which bisection of a bracket stops.
pub const THRESHOLD_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    Interior,
    /// Every informed type discloses: `x* = -1`.
    FullDisclosure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSolution {
    pub x_star: f64,
    pub corner: Corner,
    pub unique: bool,
    /// Every root of `J` on `[-1, 0]`, ascending.
    pub roots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub d1: f64,
    pub d0: f64,
    pub x_star: f64,
    pub corner: Corner,
    pub unique: bool,
    /// `|J(x*)|`; zero at the corner, where only `J(-1) >= 0` is required.
    pub residual_j: f64,
    /// `|Δ(x*)|` from the returned face values; interior solutions only.
    pub residual_delta: Option<f64>,
    pub roots: Vec<f64>,
}

/// Face value that breaks the lender even under a perfect rule.
pub fn solve_d1(params: &ModelParams) -> Result<f64> {
    params.ensure_solvable()?;
    let d1 = (params.setup_cost - 0.5 * (1.0 - params.gamma_b) * params.restructure_value)
        / params.mean_gamma();
    check_face_value("D1", d1, params)?;
    Ok(d1)
}

fn check_face_value(what: &'static str, d: f64, params: &ModelParams) -> Result<()> {
    if d > params.restructure_value && d <= params.payout {
        Ok(())
    } else {
        Err(Error::Infeasible {
            what,
            value: d,
            lo: params.restructure_value,
            hi: params.payout,
        })
    }
}

fn check_threshold(x_star: f64) -> Result<()> {
    if (-1.0..=0.0).contains(&x_star) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "x_star",
            value: x_star,
            lo: -1.0,
            hi: 0.0,
        })
    }
}

/// Face value that breaks the lender even after no disclosure, given that
/// informed managers withhold exactly the degrees in `[-1, x_star]`.
pub fn solve_d0(params: &ModelParams, density: &ErrorDensity, x_star: f64) -> Result<f64> {
    params.ensure_solvable()?;
    check_threshold(x_star)?;
    let k = derived_constants(params, density)?;
    let d0 = d0_from_constants(params, &k, density, x_star)?;
    check_face_value("D0", d0, params)?;
    Ok(d0)
}

fn d0_from_constants(
    params: &ModelParams,
    k: &DerivedConstants,
    density: &ErrorDensity,
    x_star: f64,
) -> Result<f64> {
    let p = params.info_prob;
    let withheld = density.cdf(x_star)?;
    // The withheld-region lender transfer integrates to C1 ∫ x f over [-1, x*].
    let transfer = (p * k.c1 * density.partial_x_moment(-1.0, x_star)? + (1.0 - p) * k.c)
        / (1.0 - p + p * withheld);
    Ok(
        (params.setup_cost - 0.5 * (1.0 - params.gamma_b) * params.restructure_value - transfer)
            / params.mean_gamma(),
    )
}

/// Manager's gain from disclosing degree `x` rather than withholding it.
pub fn delta(params: &ModelParams, d0: f64, d1: f64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            lo: -1.0,
            hi: 1.0,
        });
    }
    let p = params;
    let repricing = p.mean_gamma() * (d0 - d1);
    let slope = if x <= 0.0 {
        p.private_benefit + p.tau * (1.0 - p.kappa) * p.l_b()
    } else {
        p.private_benefit - p.tau * (1.0 - p.kappa) * p.l_g()
    };
    Ok(repricing + 0.5 * x * slope)
}

/// The indifference function `J(x*)`; the threshold is its root.
pub fn threshold_residual(
    params: &ModelParams,
    density: &ErrorDensity,
    x_star: f64,
) -> Result<f64> {
    check_threshold(x_star)?;
    let k = derived_constants(params, density)?;
    j_value(&k, params.info_prob, density, x_star)
}

fn j_value(k: &DerivedConstants, p: f64, density: &ErrorDensity, x: f64) -> Result<f64> {
    Ok(p * k.c1 * density.integral_cdf(x)?
        + p * (k.c2 - k.c1) * x * density.cdf(x)?
        + (1.0 - p) * (k.c2 * x - k.c))
}

/// Locates the disclosure threshold.
///
/// If `J(-1) >= 0` every informed type discloses. Otherwise all sign changes
/// of `J` on a uniform grid are bisected and the largest root (the equilibrium
/// with the most disclosure) is returned; `unique` records whether that root
/// is the only one and `J` increases across the grid.
pub fn solve_threshold(params: &ModelParams, density: &ErrorDensity) -> Result<ThresholdSolution> {
    params.ensure_solvable()?;
    let k = derived_constants(params, density)?;
    let p = params.info_prob;
    let j = |x: f64| j_value(&k, p, density, x);

    let scan = GridScan::try_new(j, -1.0, 0.0, THRESHOLD_GRID)?;
    let j0 = *scan.values.last().unwrap();
    if j0 <= 0.0 {
        return Err(Error::NonPositiveAtZero(j0));
    }
    let roots = scan
        .brackets()
        .into_iter()
        .map(|b| try_bisect(j, b, THRESHOLD_TOL))
        .collect::<Result<Vec<f64>>>()?;
    let increasing = scan.strictly_increasing();

    if scan.values[0] >= 0.0 {
        return Ok(ThresholdSolution {
            x_star: -1.0,
            corner: Corner::FullDisclosure,
            unique: roots.is_empty() && increasing,
            roots,
        });
    }
    // J(-1) < 0 < J(0), so there is at least one bracket.
    let x_star = *roots.last().expect("sign change between -1 and 0");
    Ok(ThresholdSolution {
        x_star,
        corner: Corner::Interior,
        unique: roots.len() == 1 && increasing,
        roots,
    })
}

pub fn solve_equilibrium(
    params: &ModelParams,
    density: &ErrorDensity,
) -> Result<EquilibriumSolution> {
    density.validate()?;
    let d1 = solve_d1(params)?;
    let th = solve_threshold(params, density)?;
    let d0 = solve_d0(params, density, th.x_star)?;
    let (residual_j, residual_delta) = match th.corner {
        Corner::Interior => (
            threshold_residual(params, density, th.x_star)?.abs(),
            Some(delta(params, d0, d1, th.x_star)?.abs()),
        ),
        Corner::FullDisclosure => (0.0, None),
    };
    Ok(EquilibriumSolution {
        d1,
        d0,
        x_star: th.x_star,
        corner: th.corner,
        unique: th.unique,
        residual_j,
        residual_delta,
        roots: th.roots,
    })
}

/// `E[u | x, d = 1]`: a perfect rule gives control to the manager iff `G`.
pub fn manager_payoff_disclose(params: &ModelParams, d1: f64) -> f64 {
    0.5 * payoff_cell(params, d1, State::G, Signal::Good).manager
        + 0.5 * payoff_cell(params, d1, State::B, Signal::Bad).manager
}

/// Probabilities of the four (state, signal) cells under the default rule
/// with signed error degree `x`.
fn cell_weights(x: f64) -> [(State, Signal, f64); 4] {
    let fa = x.max(0.0);
    let uo = (-x).max(0.0);
    [
        (State::G, Signal::Good, 0.5 * (1.0 - fa)),
        (State::G, Signal::Bad, 0.5 * fa),
        (State::B, Signal::Good, 0.5 * uo),
        (State::B, Signal::Bad, 0.5 * (1.0 - uo)),
    ]
}

/// `E[u | x, d = 0]`: payoffs under the default rule with error `x`, priced
/// at the non-disclosure face value.
pub fn manager_payoff_withhold(params: &ModelParams, d0: f64, x: f64) -> f64 {
    cell_weights(x)
        .iter()
        .map(|&(s, r, w)| w * payoff_cell(params, d0, s, r).manager)
        .sum()
}

/// Lender's expected payoff under the default rule with error `x` at `d0`.
pub fn lender_payoff_default_rule(params: &ModelParams, d0: f64, x: f64) -> f64 {
    cell_weights(x)
        .iter()
        .map(|&(s, r, w)| w * payoff_cell(params, d0, s, r).lender)
        .sum()
}

/// `E[v | t = ∅]` by quadrature of the table payoffs.
pub fn lender_value_uninformed(
    params: &ModelParams,
    density: &ErrorDensity,
    d0: f64,
) -> Result<f64> {
    density.expectation(|x| lender_payoff_default_rule(params, d0, x), -1.0, 1.0)
}

/// `E[v | m = ∅]`: the lender's payoff after no disclosure, mixing uninformed
/// managers with informed ones who withheld `x <= x_star`. Built by
/// quadrature of the table payoffs, independently of [`solve_d0`].
pub fn lender_value_nondisclosure(
    params: &ModelParams,
    density: &ErrorDensity,
    d0: f64,
    x_star: f64,
) -> Result<f64> {
    check_threshold(x_star)?;
    let p = params.info_prob;
    let uninformed = lender_value_uninformed(params, density, d0)?;
    let withheld =
        density.expectation(|x| lender_payoff_default_rule(params, d0, x), -1.0, x_star)?;
    let mass = density.cdf(x_star)?;
    Ok(((1.0 - p) * uninformed + p * withheld) / (1.0 - p + p * mass))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseReport {
    pub grid_size: usize,
    pub checked: usize,
    /// Grid points within `1e-6` of the threshold, where either choice is
    /// (nearly) optimal.
    pub skipped: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub passed: bool,
}

/// Brute-force check that disclosing iff `x > x*` is a best response to the
/// solved face values, using the table payoffs directly.
pub fn verify_best_response(
    params: &ModelParams,
    eq: &EquilibriumSolution,
    grid_size: usize,
) -> BestResponseReport {
    let grid_size = grid_size.max(2);
    let disclose = manager_payoff_disclose(params, eq.d1);
    let mut report = BestResponseReport {
        grid_size,
        checked: 0,
        skipped: 0,
        violations: 0,
        max_violation: 0.0,
        passed: true,
    };
    for i in 0..grid_size {
        let x = -1.0 + 2.0 * i as f64 / (grid_size - 1) as f64;
        if (x - eq.x_star).abs() < 1e-6 {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let gain = disclose - manager_payoff_withhold(params, eq.d0, x);
        let should_disclose = x > eq.x_star;
        let wrong = if should_disclose {
            gain <= 0.0
        } else {
            gain > 0.0
        };
        if wrong {
            report.violations += 1;
            report.max_violation = report.max_violation.max(gain.abs());
        }
    }
    report.passed = report.violations == 0;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamName;

    /// Independent oracle: expand the uniform-density `J` into a quadratic
    /// and bisect it with plain interval halving.
    fn uniform_oracle_root(params: &ModelParams) -> f64 {
        let p = params.info_prob;
        let keep = (1.0 - params.tau) * (1.0 - params.kappa);
        let lb = params.l_b();
        let lg = params.l_g();
        let c1 = 0.5 * ((1.0 - params.gamma_b) * params.restructure_value - keep * lb);
        let c2 = 0.5 * (params.private_benefit + params.tau * (1.0 - params.kappa) * lb);
        let c3 = 0.5 * ((1.0 - params.gamma_g) * params.restructure_value + keep * lg);
        let c = 0.25 * (c3 - c1);
        let j = |x: f64| {
            0.25 * p * c1 * (1.0 + x) * (1.0 + x)
                + 0.5 * p * (c2 - c1) * x * (x + 1.0)
                + (1.0 - p) * (c2 * x - c)
        };
        let (mut lo, mut hi) = (-1.0f64, 0.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if j(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn d1_benchmark() {
        let p = ModelParams::benchmark();
        let d1 = solve_d1(&p).unwrap();
        assert!((d1 - 4.4).abs() < 1e-12);
        let lhs = 0.5 * p.gamma_g * d1
            + 0.5 * p.gamma_b * d1
            + 0.5 * (1.0 - p.gamma_b) * p.restructure_value;
        assert!((lhs - p.setup_cost).abs() < 1e-14);
    }

    #[test]
    fn d1_boundary_is_feasible() {
        let mut p = ModelParams::benchmark();
        p.setup_cost = p.mean_gamma() * p.payout + 0.5 * (1.0 - p.gamma_b) * p.restructure_value;
        let d1 = solve_d1(&p).unwrap();
        assert!((d1 - p.payout).abs() < 1e-12);
        p.setup_cost += 1e-6;
        assert!(matches!(solve_d1(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn d1_breaks_lender_even() {
        let p = ModelParams {
            gamma_g: 0.7,
            gamma_b: 0.3,
            restructure_value: 1.5,
            private_benefit: 0.8,
            ..ModelParams::benchmark()
        };
        let d1 = solve_d1(&p).unwrap();
        let lender =
            0.5 * p.gamma_g * d1 + 0.5 * (p.gamma_b * d1 + (1.0 - p.gamma_b) * p.restructure_value);
        assert!((lender - p.setup_cost).abs() < 1e-12);
    }

    #[test]
    fn benchmark_equilibrium() {
        let p = ModelParams::benchmark();
        let eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        let oracle = uniform_oracle_root(&p);
        assert!(
            (eq.x_star - oracle).abs() < 1e-12,
            "{} vs {oracle}",
            eq.x_star
        );
        assert!((eq.x_star + 0.255312039).abs() < 1e-9);
        assert!((eq.d0 - 4.754883734).abs() < 1e-8);
        assert_eq!(eq.corner, Corner::Interior);
        assert!(eq.unique);
        assert!(eq.residual_j <= 1e-10);
        assert!(eq.residual_delta.unwrap() <= 1e-8);
        assert_eq!(eq.roots.len(), 1);
    }

    #[test]
    fn d0_hand_value() {
        let p = ModelParams::benchmark();
        let d0 = solve_d0(&p, &ErrorDensity::Uniform, -0.25531).unwrap();
        assert!((d0 - 4.75489).abs() < 1e-5);
    }

    #[test]
    fn d0_uninformed_limit() {
        let p = ModelParams::benchmark().with(ParamName::InfoProb, 1e-12);
        let k = derived_constants(&p, &ErrorDensity::Uniform).unwrap();
        let d0 = solve_d0(&p, &ErrorDensity::Uniform, -0.3).unwrap();
        let expect =
            (p.setup_cost - 0.5 * (1.0 - p.gamma_b) * p.restructure_value - k.c) / p.mean_gamma();
        assert!((d0 - expect).abs() < 1e-9);
        assert!(d0 > solve_d1(&p).unwrap());
    }

    #[test]
    fn d0_full_disclosure_informed_limit() {
        let p = ModelParams::benchmark().with(ParamName::InfoProb, 1.0 - 1e-10);
        // Nobody informed withholds, so silence means uninformed.
        let k = derived_constants(&p, &ErrorDensity::Uniform).unwrap();
        let d0 = solve_d0(&p, &ErrorDensity::Uniform, -1.0).unwrap();
        let expect =
            (p.setup_cost - 0.5 * (1.0 - p.gamma_b) * p.restructure_value - k.c) / p.mean_gamma();
        assert!((d0 - expect).abs() < 1e-9);
    }

    #[test]
    fn d0_rejects_bad_threshold() {
        let p = ModelParams::benchmark();
        assert!(solve_d0(&p, &ErrorDensity::Uniform, 0.1).is_err());
        assert!(solve_d0(&p, &ErrorDensity::Uniform, -1.1).is_err());
    }

    #[test]
    fn delta_values() {
        let p = ModelParams::benchmark();
        let (d0, d1) = (4.75489, 4.4);
        assert!(delta(&p, d0, d1, -0.25531).unwrap().abs() < 1e-5);
        let at_zero = delta(&p, d0, d1, 0.0).unwrap();
        assert!((at_zero - 0.5 * (d0 - d1)).abs() < 1e-15);
        // 0.177445 + 0.25 * (1.2 - 0.5 * 0.95 * 0.8)
        let half = delta(&p, d0, d1, 0.5).unwrap();
        assert!((half - (0.177445 + 0.205)).abs() < 1e-12);
        assert!(delta(&p, d0, d1, 1.5).is_err());
        let eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        let solved = delta(&p, eq.d0, eq.d1, 0.5).unwrap();
        assert!((solved - 0.3824419).abs() < 1e-6, "{solved}");
    }

    #[test]
    fn delta_continuous_at_zero() {
        let p = ModelParams::benchmark();
        let l = delta(&p, 4.7, 4.4, -1e-12).unwrap();
        let r = delta(&p, 4.7, 4.4, 1e-12).unwrap();
        assert!((l - r).abs() < 1e-11);
    }

    #[test]
    fn j_endpoints() {
        let p = ModelParams::benchmark();
        let k = derived_constants(&p, &ErrorDensity::Uniform).unwrap();
        let j0 = threshold_residual(&p, &ErrorDensity::Uniform, 0.0).unwrap();
        assert!((j0 - (0.5 * k.c1 * 0.25 - 0.5 * k.c)).abs() < 1e-15);
        assert!(j0 > 0.0);
        let jm1 = threshold_residual(&p, &ErrorDensity::Uniform, -1.0).unwrap();
        assert!((jm1 - 0.5 * (-k.c2 - k.c)).abs() < 1e-15);
        assert!(
            threshold_residual(&p, &ErrorDensity::Uniform, -0.25531)
                .unwrap()
                .abs()
                < 1e-4
        );
    }

    #[test]
    fn corner_when_renegotiation_is_costly() {
        // Only reachable with L_G < L_B: see `validate_params`.
        let p = corner_params();
        let k = derived_constants(&p, &ErrorDensity::Uniform).unwrap();
        assert!(k.c2 + k.c < 0.0);
        let eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        assert_eq!(eq.corner, Corner::FullDisclosure);
        assert_eq!(eq.x_star, -1.0);
        assert!(eq.residual_delta.is_none());
        assert!(eq.d0 > eq.d1);
        assert!((eq.d0 - 4.5275).abs() < 1e-12);
        let br = verify_best_response(&p, &eq, 2001);
        assert!(br.passed, "{br:?}");
    }

    pub(crate) fn corner_params() -> ModelParams {
        ModelParams {
            gamma_g: 0.95,
            gamma_b: 0.05,
            private_benefit: 0.2,
            tau: 0.0,
            kappa: 0.95,
            ..ModelParams::benchmark()
        }
    }

    #[test]
    fn threshold_approaches_minus_one_when_always_informed() {
        let mut last = 0.0;
        for p_info in [0.9, 0.99, 0.999] {
            let p = ModelParams::benchmark()
                .with(ParamName::Kappa, 0.01)
                .with(ParamName::InfoProb, p_info);
            let th = solve_threshold(&p, &ErrorDensity::Uniform).unwrap();
            assert!(th.x_star < last);
            last = th.x_star;
        }
        assert!(last < -0.9, "{last}");
    }

    #[test]
    fn best_response_holds_on_benchmark() {
        let p = ModelParams::benchmark();
        let eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        let r = verify_best_response(&p, &eq, 10001);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.checked + r.skipped, 10001);
        let below = manager_payoff_disclose(&p, eq.d1)
            - manager_payoff_withhold(&p, eq.d0, eq.x_star - 1e-3);
        let above = manager_payoff_disclose(&p, eq.d1)
            - manager_payoff_withhold(&p, eq.d0, eq.x_star + 1e-3);
        assert!(below < 0.0 && above > 0.0);
        assert!(manager_payoff_disclose(&p, eq.d1) > manager_payoff_withhold(&p, eq.d0, 1.0));
    }

    #[test]
    fn best_response_flags_wrong_threshold() {
        let p = ModelParams::benchmark();
        let mut eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        eq.x_star = -0.6;
        let r = verify_best_response(&p, &eq, 1001);
        assert!(!r.passed);
        assert!(r.violations > 0 && r.max_violation > 0.0);
    }

    #[test]
    fn table_payoffs_reproduce_delta() {
        let p = ModelParams::benchmark();
        for &x in &[-0.9, -0.3, 0.0, 0.4, 1.0] {
            let via_tables = manager_payoff_disclose(&p, 4.4) - manager_payoff_withhold(&p, 4.8, x);
            assert!((via_tables - delta(&p, 4.8, 4.4, x).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn break_even_back_substitution() {
        let p = ModelParams::benchmark();
        for d in [ErrorDensity::Uniform, ErrorDensity::Triangular] {
            let eq = solve_equilibrium(&p, &d).unwrap();
            let v = lender_value_nondisclosure(&p, &d, eq.d0, eq.x_star).unwrap();
            assert!((v - p.setup_cost).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn invalid_params_refused() {
        let p = ModelParams::benchmark().with(ParamName::PrivateBenefit, 2.0);
        assert!(matches!(
            solve_equilibrium(&p, &ErrorDensity::Uniform),
            Err(Error::InvalidParams(_))
        ));
    }
}
