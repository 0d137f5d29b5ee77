use covenant_core::effort::{first_best_effort, solve_effort};
use covenant_core::equilibrium::{delta, solve_equilibrium, verify_best_response, Corner};
use covenant_core::fixtures::{draw, valid_sets, Require};
use covenant_core::simulate::simulate;
use covenant_core::statics::closed_form_threshold_uniform;
use covenant_core::{validate_params, ErrorDensity, ModelParams, ParamName};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn triangle_knots() -> ErrorDensity {
    ErrorDensity::tabulated(vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]).unwrap()
}

fn flat_knots() -> ErrorDensity {
    ErrorDensity::tabulated(vec![(-1.0, 0.5), (-0.3, 0.5), (0.3, 0.5), (1.0, 0.5)]).unwrap()
}

fn solvable(seed: u64) -> Option<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = draw(&mut rng, (0.01, 0.6));
    validate_params(&p).all_passed().then_some(p)
}

#[test]
fn tabulated_shapes_reproduce_builtin_densities() {
    for p in valid_sets(
        3,
        20,
        &ErrorDensity::Triangular,
        (0.01, 0.5),
        Require::Threshold,
    ) {
        let a = solve_equilibrium(&p, &ErrorDensity::Triangular).unwrap();
        let b = solve_equilibrium(&p, &triangle_knots()).unwrap();
        assert!(
            (a.x_star - b.x_star).abs() < 1e-9,
            "{} vs {}",
            a.x_star,
            b.x_star
        );
        assert!((a.d0 - b.d0).abs() < 1e-9);
        let u = solve_equilibrium(&p, &ErrorDensity::Uniform).unwrap();
        let f = solve_equilibrium(&p, &flat_knots()).unwrap();
        assert!((u.x_star - f.x_star).abs() < 1e-9);
    }
}

#[test]
fn best_response_scan_finds_no_profitable_deviation() {
    for d in [ErrorDensity::Uniform, ErrorDensity::Triangular] {
        for p in valid_sets(4, 30, &d, (0.01, 0.6), Require::Threshold) {
            let eq = solve_equilibrium(&p, &d).unwrap();
            let r = verify_best_response(&p, &eq, 1001);
            assert!(r.passed, "{p:?}: {r:?}");
        }
    }
}

#[test]
fn effort_cost_scaling() {
    let d = ErrorDensity::Uniform;
    let base = ModelParams::benchmark();
    let steep = base.with(ParamName::CostScale, 10.0 * base.cost_scale);
    let a = solve_effort(&base, &d).unwrap();
    let b = solve_effort(&steep, &d).unwrap();
    assert!((a.p_fb / b.p_fb - 10.0).abs() < 1e-9);
    assert!(a.p_star / b.p_star > 5.0);
    assert!(b.p_star > b.p_fb);
}

#[test]
fn simulation_does_not_depend_on_block_boundaries() {
    let p = ModelParams::benchmark();
    let d = ErrorDensity::Uniform;
    let eq = solve_equilibrium(&p, &d).unwrap();
    let short = simulate(&p, &d, &eq, 4095, 1).unwrap();
    let long = simulate(&p, &d, &eq, 4097, 1).unwrap();
    // The first 4095 paths are shared; two more paths shift the mean by at most
    // their payoff range over n.
    assert!((short.manager_mean.mean - long.manager_mean.mean).abs() < 10.0 / 4095.0);
    assert_eq!(short.n, 4095);
    assert!(long.informed >= short.informed && long.informed <= short.informed + 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_from_disclosure_increasing_and_zero_at_threshold(seed in any::<u64>()) {
        let Some(p) = solvable(seed) else { return Ok(()) };
        let d = ErrorDensity::Uniform;
        let Ok(eq) = solve_equilibrium(&p, &d) else { return Ok(()) };
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            let v = delta(&p, eq.d0, eq.d1, x).unwrap();
            prop_assert!(v > prev);
            prev = v;
        }
        if eq.corner == Corner::Interior {
            prop_assert!(delta(&p, eq.d0, eq.d1, eq.x_star).unwrap().abs() < 1e-9);
            let cf = closed_form_threshold_uniform(&p).unwrap();
            prop_assert!((cf - eq.x_star).abs() < 1e-9);
        }
    }

    #[test]
    fn more_information_lowers_threshold(seed in any::<u64>()) {
        let Some(p) = solvable(seed) else { return Ok(()) };
        let d = ErrorDensity::Triangular;
        let lo = p.with(ParamName::InfoProb, 0.2);
        let hi = p.with(ParamName::InfoProb, 0.8);
        if let (Ok(a), Ok(b)) = (solve_equilibrium(&lo, &d), solve_equilibrium(&hi, &d)) {
            prop_assert!(b.x_star <= a.x_star + 1e-12);
        }
    }

    #[test]
    fn first_best_proportional_to_kappa(seed in any::<u64>(), scale in 1.5..4.0f64) {
        let Some(p) = solvable(seed) else { return Ok(()) };
        let q = p.with(ParamName::Kappa, (p.kappa * scale).min(0.99));
        let ratio = q.kappa / p.kappa;
        let (a, b) = (
            first_best_effort(&p, &ErrorDensity::Uniform),
            first_best_effort(&q, &ErrorDensity::Uniform),
        );
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((b / a - ratio).abs() < 1e-9 * ratio);
        }
    }
}
