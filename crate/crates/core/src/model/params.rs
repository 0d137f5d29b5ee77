use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exogenous primitives of the game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Success probability of a continued project in the good state.
    pub gamma_g: f64,
    /// Success probability of a continued project in the bad state.
    pub gamma_b: f64,
    /// High cash flow `Y`.
    pub payout: f64,
    /// Cash flow `y` a restructured project pays on failure.
    pub restructure_value: f64,
    /// Manager's private benefit `X` from continuation.
    pub private_benefit: f64,
    /// Funding need `K`.
    pub setup_cost: f64,
    /// Manager's share of renegotiation surplus.
    pub tau: f64,
    /// Fraction of the efficiency gain lost to renegotiation.
    pub kappa: f64,
    /// Probability the manager learns the rule's error.
    pub info_prob: f64,
    /// Coefficient `c0` of the effort cost `c(p) = c0 p^2 / 2`.
    pub cost_scale: f64,
}

impl ModelParams {
    /// Baseline calibration used throughout the tests and docs.
    pub fn benchmark() -> Self {
        Self {
            gamma_g: 0.8,
            gamma_b: 0.2,
            payout: 10.0,
            restructure_value: 2.0,
            private_benefit: 1.2,
            setup_cost: 3.0,
            tau: 0.5,
            kappa: 0.05,
            info_prob: 0.5,
            cost_scale: 0.5,
        }
    }

    /// Efficiency loss from continuing in the bad state.
    pub fn l_b(&self) -> f64 {
        (1.0 - self.gamma_b) * self.restructure_value - self.private_benefit
    }

    /// Efficiency loss from restructuring in the good state.
    pub fn l_g(&self) -> f64 {
        self.private_benefit - (1.0 - self.gamma_g) * self.restructure_value
    }

    /// `(gamma_g + gamma_b) / 2`, the face-value loading of the lender's payoff.
    pub fn mean_gamma(&self) -> f64 {
        0.5 * (self.gamma_g + self.gamma_b)
    }

    /// First-best total surplus: continue when good, restructure when bad.
    pub fn w_fb(&self) -> f64 {
        0.5 * (self.gamma_g * self.payout + self.private_benefit)
            + 0.5 * (self.gamma_b * self.payout + (1.0 - self.gamma_b) * self.restructure_value)
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::GammaG => self.gamma_g,
            ParamName::GammaB => self.gamma_b,
            ParamName::Payout => self.payout,
            ParamName::RestructureValue => self.restructure_value,
            ParamName::PrivateBenefit => self.private_benefit,
            ParamName::SetupCost => self.setup_cost,
            ParamName::Tau => self.tau,
            ParamName::Kappa => self.kappa,
            ParamName::InfoProb => self.info_prob,
            ParamName::CostScale => self.cost_scale,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        let slot = match name {
            ParamName::GammaG => &mut self.gamma_g,
            ParamName::GammaB => &mut self.gamma_b,
            ParamName::Payout => &mut self.payout,
            ParamName::RestructureValue => &mut self.restructure_value,
            ParamName::PrivateBenefit => &mut self.private_benefit,
            ParamName::SetupCost => &mut self.setup_cost,
            ParamName::Tau => &mut self.tau,
            ParamName::Kappa => &mut self.kappa,
            ParamName::InfoProb => &mut self.info_prob,
            ParamName::CostScale => &mut self.cost_scale,
        };
        *slot = value;
    }

    pub fn with(mut self, name: ParamName, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Fails unless every check the solvers depend on passes.
    pub fn ensure_solvable(&self) -> Result<()> {
        let report = validate_params(self);
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| c.required && !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(failed))
        }
    }
}

/// Field names of [`ModelParams`], used by sweeps and comparative statics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    GammaG,
    GammaB,
    Payout,
    RestructureValue,
    PrivateBenefit,
    SetupCost,
    Tau,
    Kappa,
    InfoProb,
    CostScale,
}

impl ParamName {
    pub const ALL: [ParamName; 10] = [
        ParamName::GammaG,
        ParamName::GammaB,
        ParamName::Payout,
        ParamName::RestructureValue,
        ParamName::PrivateBenefit,
        ParamName::SetupCost,
        ParamName::Tau,
        ParamName::Kappa,
        ParamName::InfoProb,
        ParamName::CostScale,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::GammaG => "gamma_g",
            ParamName::GammaB => "gamma_b",
            ParamName::Payout => "payout",
            ParamName::RestructureValue => "restructure_value",
            ParamName::PrivateBenefit => "private_benefit",
            ParamName::SetupCost => "setup_cost",
            ParamName::Tau => "tau",
            ParamName::Kappa => "kappa",
            ParamName::InfoProb => "info_prob",
            ParamName::CostScale => "cost_scale",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}

/// One line of a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Solvers refuse parameters that fail a required check.
    pub required: bool,
    pub detail: String,
}

/// Outcome of [`validate_params`]. Validation never aborts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Informational notes that never fail validation.
    pub diagnostics: Vec<String>,
    pub l_b: f64,
    pub l_g: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn solvable(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.required)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks ranges, both modelling assumptions, financeability under a perfect
/// rule, the conflict-of-interest preferences, and the no-information action.
///
/// Every check except `assumption1.l_g_exceeds_l_b` and
/// `no_information_action` is required by the solvers. Both only decide the
/// action absent any signal, which the disclosure subgame never uses.
pub fn validate_params(params: &ModelParams) -> ValidationReport {
    let p = params;
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, required: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            required,
            detail,
        });
    };

    let finite = ParamName::ALL.iter().all(|&n| p.get(n).is_finite());
    push(
        "finite",
        finite,
        true,
        "all parameters are finite".to_string(),
    );

    let in_open = |v: f64| v > 0.0 && v < 1.0;
    push(
        "range.gamma",
        p.gamma_b >= 0.0 && p.gamma_b < p.gamma_g && p.gamma_g < 1.0,
        true,
        format!("0 <= gamma_b ({}) < gamma_g ({}) < 1", p.gamma_b, p.gamma_g),
    );
    push(
        "range.cash_flows",
        p.restructure_value > 0.0 && p.restructure_value < p.payout,
        true,
        format!(
            "0 < restructure_value ({}) < payout ({})",
            p.restructure_value, p.payout
        ),
    );
    push(
        "range.private_benefit",
        p.private_benefit > 0.0,
        true,
        format!("private_benefit ({}) > 0", p.private_benefit),
    );
    push(
        "range.setup_cost",
        p.setup_cost > 0.0,
        true,
        format!("setup_cost ({}) > 0", p.setup_cost),
    );
    push(
        "range.tau",
        (0.0..=1.0).contains(&p.tau),
        true,
        format!("tau ({}) in [0, 1]", p.tau),
    );
    push(
        "range.kappa",
        in_open(p.kappa),
        true,
        format!("kappa ({}) in (0, 1)", p.kappa),
    );
    push(
        "range.info_prob",
        in_open(p.info_prob),
        true,
        format!("info_prob ({}) in (0, 1)", p.info_prob),
    );
    push(
        "range.cost_scale",
        p.cost_scale > 0.0,
        true,
        format!("cost_scale ({}) > 0", p.cost_scale),
    );

    let l_b = p.l_b();
    let l_g = p.l_g();
    push(
        "assumption1.l_b_positive",
        l_b > 0.0,
        true,
        format!("Assumption 1: L_B = (1 - gamma_b) y - X = {l_b} > 0"),
    );
    push(
        "assumption1.l_g_positive",
        l_g > 0.0,
        true,
        format!("Assumption 1: L_G = X - (1 - gamma_g) y = {l_g} > 0"),
    );
    push(
        "assumption1.l_g_exceeds_l_b",
        l_g > l_b,
        false,
        format!("Assumption 1: L_G ({l_g}) > L_B ({l_b})"),
    );
    push(
        "assumption2",
        p.setup_cost > p.restructure_value,
        true,
        format!(
            "Assumption 2: K ({}) > y ({})",
            p.setup_cost, p.restructure_value
        ),
    );

    let d1 = (p.setup_cost - 0.5 * (1.0 - p.gamma_b) * p.restructure_value) / p.mean_gamma();
    push(
        "feasibility.d1",
        d1 > p.restructure_value && d1 <= p.payout,
        true,
        format!(
            "y ({}) < D1 ({d1}) <= Y ({})",
            p.restructure_value, p.payout
        ),
    );

    // For any D in [K, Y], the manager gains X from continuation and
    // the lender gains (1 - gamma) y from restructuring, in both states.
    let conflict = [p.gamma_g, p.gamma_b].iter().all(|&gamma| {
        [p.setup_cost, p.payout].iter().all(|&d| {
            let wm = |a: f64| gamma * (p.payout - d) + a * p.private_benefit;
            let wl = |a: f64| gamma * d + (1.0 - a) * (1.0 - gamma) * p.restructure_value;
            wm(1.0) - wm(0.0) > 0.0 && wl(0.0) - wl(1.0) > 0.0
        })
    });
    push(
        "preferences.conflict",
        conflict,
        true,
        "manager prefers continuation, lender prefers restructuring, in both states".to_string(),
    );
    push(
        "no_information_action",
        0.5 * l_g - 0.5 * l_b > 0.0,
        false,
        format!(
            "continuation optimal absent information: (L_G - L_B) / 2 = {} > 0",
            0.5 * (l_g - l_b)
        ),
    );

    let mut diagnostics = Vec::new();
    if l_b > 0.0 && l_g > 0.0 && l_g > l_b {
        // With false-alarm degree x, Pr(G | r = b) = x / (1 + x), so a b
        // signal still favours continuation once x L_G > L_B.
        diagnostics.push(format!(
            "a b-signal favours restructuring only for false-alarm degrees below L_B / L_G = {:.6}; \
             larger degrees leave lender control on b inefficient ex ante",
            l_b / l_g
        ));
    }

    ValidationReport {
        checks,
        diagnostics,
        l_b,
        l_g,
    }
}
