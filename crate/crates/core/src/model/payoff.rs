use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    G,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signal {
    #[serde(rename = "g")]
    Good,
    #[serde(rename = "b")]
    Bad,
}

/// Which kind of error the default rule carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `Pr(r = b | G) = x`, `Pr(r = g | B) = 0`.
    FalseAlarm,
    /// `Pr(r = b | G) = 0`, `Pr(r = g | B) = -x`.
    UndueOptimism,
}

/// Date-2 expected payoffs in one (state, signal) cell, after any
/// renegotiation. The lender controls the project exactly when `r = b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffCell {
    pub state: State,
    pub signal: Signal,
    pub manager: f64,
    pub lender: f64,
    pub social: f64,
}

/// Payoffs of one cell at face value `face_value`.
///
/// Off-diagonal cells are the renegotiated ones: in `(G, b)` the lender would
/// restructure and is bought out of it, in `(B, g)` the manager would continue
/// and is bought out of that. Either way `(1 - kappa) L_theta` is split with
/// share `tau` to the manager.
pub fn payoff_cell(
    params: &ModelParams,
    face_value: f64,
    state: State,
    signal: Signal,
) -> PayoffCell {
    let p = params;
    let d = face_value;
    let (big_y, small_y, x) = (p.payout, p.restructure_value, p.private_benefit);
    let share = 1.0 - p.kappa;
    let (manager, lender, social) = match (state, signal) {
        (State::G, Signal::Good) => (
            p.gamma_g * (big_y - d) + x,
            p.gamma_g * d,
            p.gamma_g * big_y + x,
        ),
        (State::G, Signal::Bad) => (
            p.gamma_g * (big_y - d) + p.tau * share * p.l_g(),
            p.gamma_g * d + (1.0 - p.gamma_g) * small_y + (1.0 - p.tau) * share * p.l_g(),
            p.gamma_g * big_y + x - p.kappa * p.l_g(),
        ),
        (State::B, Signal::Bad) => (
            p.gamma_b * (big_y - d),
            p.gamma_b * d + (1.0 - p.gamma_b) * small_y,
            p.gamma_b * big_y + (1.0 - p.gamma_b) * small_y,
        ),
        (State::B, Signal::Good) => (
            p.gamma_b * (big_y - d) + x + p.tau * share * p.l_b(),
            p.gamma_b * d + (1.0 - p.tau) * share * p.l_b(),
            p.gamma_b * big_y + x + share * p.l_b(),
        ),
    };
    PayoffCell {
        state,
        signal,
        manager,
        lender,
        social,
    }
}

/// The three reachable cells of a regime's payoff table, in table order.
pub fn payoff_table(
    params: &ModelParams,
    face_value: f64,
    regime: Regime,
) -> Result<Vec<PayoffCell>> {
    let y = params.restructure_value;
    if !(face_value > y && face_value <= params.payout) {
        return Err(Error::Infeasible {
            what: "face value",
            value: face_value,
            lo: y,
            hi: params.payout,
        });
    }
    let rows = match regime {
        Regime::FalseAlarm => [
            (State::G, Signal::Good),
            (State::G, Signal::Bad),
            (State::B, Signal::Bad),
        ],
        Regime::UndueOptimism => [
            (State::G, Signal::Good),
            (State::B, Signal::Good),
            (State::B, Signal::Bad),
        ],
    };
    Ok(rows
        .iter()
        .map(|&(s, r)| payoff_cell(params, face_value, s, r))
        .collect())
}
