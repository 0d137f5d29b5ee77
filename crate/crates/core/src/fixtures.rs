//! Reproducible parameter fixtures for tests and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::effort::solve_effort;
use crate::equilibrium::{solve_equilibrium, Corner};
use crate::model::{validate_params, ErrorDensity, ModelParams};

/// Upper bound on draws per accepted set before giving up.
const MAX_TRIES_PER_SET: usize = 200;

/// Benchmark economy with `kappa = 0.01`, inside the small-kappa region.
pub fn small_kappa_benchmark() -> ModelParams {
    ModelParams {
        kappa: 0.01,
        ..ModelParams::benchmark()
    }
}

/// A valid economy whose threshold sits at the full-disclosure corner under
/// the uniform density. It has `L_B > L_G`, which the disclosure subgame
/// tolerates.
pub fn corner_params() -> ModelParams {
    ModelParams {
        gamma_g: 0.95,
        gamma_b: 0.05,
        private_benefit: 0.2,
        tau: 0.0,
        kappa: 0.95,
        ..ModelParams::benchmark()
    }
}

/// Draws one parameter set satisfying every range and modelling assumption
/// (including `L_G > L_B`), with `kappa` drawn from `kappa_range`.
pub fn draw(rng: &mut impl Rng, kappa_range: (f64, f64)) -> ModelParams {
    let gamma_g = rng.random_range(0.6..0.95);
    let gamma_b = rng.random_range(0.02..gamma_g - 0.2);
    let y = rng.random_range(0.5..3.0);
    let mean_gamma = 0.5 * (gamma_g + gamma_b);
    let x_lo = (1.0 - mean_gamma) * y;
    let x_hi = (1.0 - gamma_b) * y;
    let private_benefit = x_lo + rng.random_range(0.15..0.85) * (x_hi - x_lo);
    let payout = y * rng.random_range(3.0..10.0);
    let k_hi = mean_gamma * payout + 0.5 * (1.0 - gamma_b) * y;
    let setup_cost = y + rng.random_range(0.1..0.8) * (k_hi - y);
    ModelParams {
        gamma_g,
        gamma_b,
        payout,
        restructure_value: y,
        private_benefit,
        setup_cost,
        tau: rng.random_range(0.05..0.95),
        kappa: rng.random_range(kappa_range.0..kappa_range.1),
        info_prob: rng.random_range(0.05..0.95),
        cost_scale: rng.random_range(1.0..4.0),
    }
}

/// Which solves an accepted set must pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Require {
    /// Interior, unique threshold.
    Threshold,
    /// Interior, unique threshold and an interior effort equilibrium.
    Effort,
}

/// `count` parameter sets drawn from `seed` that pass every check and the
/// solves in `require` under `density`. Panics if acceptance is so rare that
/// the draw budget is exhausted.
pub fn valid_sets(
    seed: u64,
    count: usize,
    density: &ErrorDensity,
    kappa_range: (f64, f64),
    require: Require,
) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(
            tries <= MAX_TRIES_PER_SET * count.max(1),
            "fixture acceptance too rare"
        );
        let p = draw(&mut rng, kappa_range);
        if accepts(&p, density, require) {
            out.push(p);
        }
    }
    out
}

fn accepts(p: &ModelParams, density: &ErrorDensity, require: Require) -> bool {
    if !validate_params(p).all_passed() {
        return false;
    }
    let Ok(eq) = solve_equilibrium(p, density) else {
        return false;
    };
    if eq.corner != Corner::Interior || !eq.unique || eq.d0 > p.payout {
        return false;
    }
    match require {
        Require::Threshold => true,
        Require::Effort => solve_effort(p, density).is_ok(),
    }
}
