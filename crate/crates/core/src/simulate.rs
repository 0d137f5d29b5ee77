//! Monte Carlo simulation of the full game.
//!
//! Every path owns a ChaCha stream selected by its index, so results depend
//! only on `(seed, n)`. Paths are grouped into fixed-size blocks whose
//! statistics are merged in block order, which keeps the floating-point sums
//! identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumSolution;
use crate::model::{ErrorDensity, ModelParams, Signal, State};
use crate::{effort, Error, Result};

/// Paths per block.
pub const BLOCK: u64 = 4096;

/// Sample mean with its standard error (sample std / sqrt(n)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

impl Estimate {
    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_error
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: u64,
    pub seed: u64,
    /// Lender payoff over paths without disclosure. `None` if there were none.
    pub lender_mean_nondisclosure: Option<Estimate>,
    /// Lender payoff over paths with disclosure. `None` if there were none.
    pub lender_mean_disclosure: Option<Estimate>,
    pub manager_mean: Estimate,
    pub reneg_freq: Estimate,
    pub informed: u64,
    pub disclosed: u64,
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub informed: bool,
    pub disclosed: bool,
    pub error: f64,
    pub state: State,
    pub signal: Signal,
    pub renegotiated: bool,
    pub manager: f64,
    pub lender: f64,
}

/// Payoffs of `(manager, lender)` when `state` is realised, the face value is
/// `face_value` and `signal` assigns control. Returns whether renegotiation
/// took place.
pub fn settle(
    params: &ModelParams,
    face_value: f64,
    state: State,
    signal: Signal,
) -> (f64, f64, bool) {
    let p = params;
    let (gamma, loss) = match state {
        State::G => (p.gamma_g, p.l_g()),
        State::B => (p.gamma_b, p.l_b()),
    };
    let continue_payoffs = (
        gamma * (p.payout - face_value) + p.private_benefit,
        gamma * face_value,
    );
    let restructure_payoffs = (
        gamma * (p.payout - face_value),
        gamma * face_value + (1.0 - gamma) * p.restructure_value,
    );
    // The manager always prefers to continue and the lender always prefers
    // to restructure, so the control holder picks its own favourite.
    let (status_quo, continues) = match signal {
        Signal::Good => (continue_payoffs, true),
        Signal::Bad => (restructure_payoffs, false),
    };
    let efficient_continue = state == State::G;
    if continues == efficient_continue {
        return (status_quo.0, status_quo.1, false);
    }
    let surplus = (1.0 - p.kappa) * loss;
    (
        status_quo.0 + p.tau * surplus,
        status_quo.1 + (1.0 - p.tau) * surplus,
        true,
    )
}

fn simulate_path(
    params: &ModelParams,
    density: &ErrorDensity,
    eq: &EquilibriumSolution,
    seed: u64,
    index: u64,
) -> PathOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let informed = rng.random::<f64>() < params.info_prob;
    let error = density.inverse_cdf(rng.random::<f64>());
    let disclosed = informed && error > eq.x_star;
    let state = if rng.random::<f64>() < 0.5 {
        State::G
    } else {
        State::B
    };
    let flip = rng.random::<f64>();
    let signal = if disclosed {
        match state {
            State::G => Signal::Good,
            State::B => Signal::Bad,
        }
    } else {
        match state {
            State::G if flip < error.max(0.0) => Signal::Bad,
            State::G => Signal::Good,
            State::B if flip < (-error).max(0.0) => Signal::Good,
            State::B => Signal::Bad,
        }
    };
    let face_value = if disclosed { eq.d1 } else { eq.d0 };
    let (manager, lender, renegotiated) = settle(params, face_value, state, signal);
    PathOutcome {
        informed,
        disclosed,
        error,
        state,
        signal,
        renegotiated,
        manager,
        lender,
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (a, b) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + d * b / n as f64,
            m2: self.m2 + other.m2 + d * d * a * b / n as f64,
        }
    }

    fn estimate(&self) -> Option<Estimate> {
        if self.n == 0 {
            return None;
        }
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        Some(Estimate {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            count: self.n,
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Block {
    lender_nd: Moments,
    lender_d: Moments,
    manager: Moments,
    reneg: Moments,
    informed: u64,
}

impl Block {
    fn merge(self, o: Block) -> Block {
        Block {
            lender_nd: self.lender_nd.merge(o.lender_nd),
            lender_d: self.lender_d.merge(o.lender_d),
            manager: self.manager.merge(o.manager),
            reneg: self.reneg.merge(o.reneg),
            informed: self.informed + o.informed,
        }
    }
}

/// Simulates `n` paths of the game at the solved equilibrium `eq`.
pub fn simulate(
    params: &ModelParams,
    density: &ErrorDensity,
    eq: &EquilibriumSolution,
    n: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sample count",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    params.ensure_solvable()?;
    density.validate()?;
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<Block> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Block::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let o = simulate_path(params, density, eq, seed, i);
                if o.disclosed {
                    acc.lender_d.push(o.lender);
                } else {
                    acc.lender_nd.push(o.lender);
                }
                acc.manager.push(o.manager);
                acc.reneg.push(if o.renegotiated { 1.0 } else { 0.0 });
                acc.informed += o.informed as u64;
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Block::default(), Block::merge);
    Ok(SimulationReport {
        n,
        seed,
        lender_mean_nondisclosure: total.lender_nd.estimate(),
        lender_mean_disclosure: total.lender_d.estimate(),
        manager_mean: total.manager.estimate().expect("n >= 1"),
        reneg_freq: total.reneg.estimate().expect("n >= 1"),
        informed: total.informed,
        disclosed: total.lender_d.n,
    })
}

/// Simulates a single path. Exposed for inspection and testing.
pub fn path(
    params: &ModelParams,
    density: &ErrorDensity,
    eq: &EquilibriumSolution,
    seed: u64,
    index: u64,
) -> PathOutcome {
    simulate_path(params, density, eq, seed, index)
}

/// Expected renegotiation frequency: half of the withheld error mass plus
/// half of the uninformed error mass, each weighted by `|x|`.
pub fn analytic_reneg_freq(
    params: &ModelParams,
    density: &ErrorDensity,
    eq: &EquilibriumSolution,
) -> Result<f64> {
    let p = params.info_prob;
    let withheld = -density.partial_x_moment(-1.0, eq.x_star)?;
    let uninformed = -density.partial_x_moment(-1.0, 0.0)? + density.partial_x_moment(0.0, 1.0)?;
    Ok(0.5 * p * withheld + 0.5 * (1.0 - p) * uninformed)
}

/// Expected manager payoff over all paths at the solved equilibrium.
pub fn analytic_manager_mean(
    params: &ModelParams,
    density: &ErrorDensity,
    eq: &EquilibriumSolution,
) -> Result<f64> {
    let u = effort::expected_utilities(params, density, eq)?;
    let p = params.info_prob;
    Ok((1.0 - p) * u.u_uninformed + p * u.u_informed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;
    use crate::model::{payoff_cell, ParamName};

    #[test]
    fn settle_matches_payoff_cells() {
        for kappa in [0.0, 0.05, 0.7, 1.0] {
            for tau in [0.0, 0.3, 1.0] {
                let p = ModelParams::benchmark()
                    .with(ParamName::Kappa, kappa)
                    .with(ParamName::Tau, tau);
                for state in [State::G, State::B] {
                    for signal in [Signal::Good, Signal::Bad] {
                        let (m, l, reneg) = settle(&p, 4.7, state, signal);
                        let cell = payoff_cell(&p, 4.7, state, signal);
                        assert!((m - cell.manager).abs() < 1e-12);
                        assert!((l - cell.lender).abs() < 1e-12);
                        assert_eq!(reneg, (state == State::G) != (signal == Signal::Good));
                    }
                }
            }
        }
    }

    #[test]
    fn full_deadweight_still_takes_efficient_action() {
        let p = ModelParams::benchmark().with(ParamName::Kappa, 1.0);
        let (m, l, reneg) = settle(&p, 4.4, State::G, Signal::Bad);
        assert!(reneg);
        let w = p.gamma_g * p.payout + p.private_benefit - p.l_g();
        assert!((m + l - w).abs() < 1e-12);
    }

    #[test]
    fn perfect_rule_never_renegotiates() {
        let p = ModelParams::benchmark().with(ParamName::InfoProb, 0.999);
        let eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        for i in 0..2000 {
            let o = path(&p, &ErrorDensity::Uniform, &eq, 3, i);
            if o.disclosed {
                assert!(!o.renegotiated);
                assert!(o.error > eq.x_star);
            }
        }
    }

    #[test]
    fn breaks_even_on_benchmark() {
        let p = ModelParams::benchmark();
        let d = ErrorDensity::Uniform;
        let eq = solve_equilibrium(&p, &d).unwrap();
        let r = simulate(&p, &d, &eq, 200_000, 11).unwrap();
        assert!(r.lender_mean_nondisclosure.unwrap().z_score(p.setup_cost) < 4.0);
        assert!(r.lender_mean_disclosure.unwrap().z_score(p.setup_cost) < 4.0);
        assert!(
            r.manager_mean
                .z_score(analytic_manager_mean(&p, &d, &eq).unwrap())
                < 4.0
        );
        assert!(
            r.reneg_freq
                .z_score(analytic_reneg_freq(&p, &d, &eq).unwrap())
                < 4.0
        );
        assert_eq!(
            r.informed,
            r.disclosed + r.lender_mean_nondisclosure.unwrap().count - (r.n - r.informed)
        );
    }

    #[test]
    fn deterministic_and_block_independent() {
        let p = ModelParams::benchmark();
        let d = ErrorDensity::Triangular;
        let eq = solve_equilibrium(&p, &d).unwrap();
        let a = simulate(&p, &d, &eq, 10_001, 5).unwrap();
        let b = simulate(&p, &d, &eq, 10_001, 5).unwrap();
        assert_eq!(a, b);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = one.install(|| simulate(&p, &d, &eq, 10_001, 5).unwrap());
        assert_eq!(a, c);
        let other = simulate(&p, &d, &eq, 10_001, 6).unwrap();
        assert_ne!(a.manager_mean, other.manager_mean);
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.m2 - all.m2).abs() < 1e-8);
    }

    #[test]
    fn zero_paths_rejected() {
        let p = ModelParams::benchmark();
        let eq = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        assert!(simulate(&p, &ErrorDensity::Uniform, &eq, 0, 1).is_err());
    }
}
