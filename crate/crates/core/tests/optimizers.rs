use std::cell::RefCell;

use feupdate::optim::{
    ga_optimize, geometric_probabilities, metropolis_accept, nonuniform_mutate, sa_optimize, Bounds, EvalBudget,
    GaConfig, GeometricSelector, OptimResult, SaConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn metropolis_uphill_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 100_000;
    let accepted = (0..trials)
        .filter(|_| metropolis_accept(0.5, 1.0, rng.random()))
        .count();
    let rate = accepted as f64 / trials as f64;
    assert!((rate - (-0.5f64).exp()).abs() < 0.01, "{rate}");
}

#[test]
fn geometric_best_rank_frequency() {
    let q_norm = 0.08 / (1.0 - 0.92f64.powi(50));
    let p = geometric_probabilities(50, 0.08);
    assert!((p[0] - q_norm).abs() < 1e-15);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let sel = GeometricSelector::new(50, 0.08);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let hits = (0..100_000).filter(|_| sel.select(&mut rng) == 0).count();
    assert!((hits as f64 / 1e5 - q_norm).abs() < 0.01);
}

#[test]
fn two_rank_selection_odds() {
    let p = geometric_probabilities(2, 0.5);
    assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
    assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn mutation_contracts_with_generation() {
    let b = Bounds::uniform(1, 0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let means: Vec<f64> = (1..10)
        .map(|tenth| {
            let total: f64 = (0..10_000)
                .map(|_| (nonuniform_mutate(&[0.5], tenth, 10, &b, 2.0, &mut rng)[0] - 0.5).abs())
                .sum();
            total / 1e4
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn ga_finds_sphere_minimum() {
    let b = Bounds::uniform(5, 0.0, 1.0).unwrap();
    // At a 0.3% mutation rate the population collapses early on this function.
    for seed in 0..10 {
        let cfg = GaConfig {
            seed,
            mutation_rate: 0.05,
            ..GaConfig::default()
        };
        let r = ga_optimize(
            |x| x.iter().map(|v| (v - 0.3).powi(2)).sum(),
            &b,
            &cfg,
            &EvalBudget::unlimited(),
        )
        .unwrap();
        assert!(r.best_cost < 1e-3, "seed {seed}: {}", r.best_cost);
    }
}

#[test]
fn ga_one_dimensional_minimizer_agrees_with_grid() {
    let f = |x: &[f64]| (x[0] - 0.5).powi(2);
    let grid_best = (0..=10_000)
        .map(|i| i as f64 / 1e4)
        .min_by(|a, b| f(&[*a]).total_cmp(&f(&[*b])))
        .unwrap();
    let b = Bounds::uniform(1, 0.0, 1.0).unwrap();
    let r = ga_optimize(f, &b, &GaConfig::default(), &EvalBudget::unlimited()).unwrap();
    assert!((r.best[0] - grid_best).abs() < 0.01);
}

/// Runs an optimizer with a recording objective and returns the result and every
/// point it evaluated.
fn recorded(
    bounds: &Bounds,
    run: impl FnOnce(&mut dyn FnMut(&[f64]) -> f64, &EvalBudget) -> OptimResult,
) -> (OptimResult, Vec<Vec<f64>>, u64) {
    let seen = RefCell::new(Vec::new());
    let budget = EvalBudget::unlimited();
    let mut objective = |x: &[f64]| {
        seen.borrow_mut().push(x.to_vec());
        x.iter()
            .enumerate()
            .map(|(i, v)| (v - 0.1 * i as f64).powi(2))
            .sum::<f64>()
            + (5.0 * x[0]).sin()
    };
    let r = run(&mut objective, &budget);
    assert!(bounds.dim() > 0);
    (r, seen.into_inner(), budget.calls())
}

fn check(r: &OptimResult, seen: &[Vec<f64>], calls: u64, bounds: &Bounds) -> Result<(), TestCaseError> {
    prop_assert!(seen.iter().all(|x| bounds.contains(x)));
    prop_assert_eq!(calls, seen.len() as u64);
    prop_assert_eq!(r.evaluations, calls);
    prop_assert!(r.history.windows(2).all(|w| w[1].best_cost <= w[0].best_cost));
    Ok(())
}

fn arb_bounds() -> impl Strategy<Value = Bounds> {
    proptest::collection::vec((-5.0f64..5.0, 0.01f64..10.0), 1..5)
        .prop_map(|v| Bounds::new(v.iter().map(|p| p.0).collect(), v.iter().map(|p| p.0 + p.1).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ga_invariants(bounds in arb_bounds(), pop in 2usize..12, gens in 1usize..12, seed in any::<u64>()) {
        let cfg = GaConfig { population_size: pop, generations: gens, mutation_rate: 0.3, seed, ..GaConfig::default() };
        let go = |f: &mut dyn FnMut(&[f64]) -> f64, b: &EvalBudget| ga_optimize(f, &bounds, &cfg, b).unwrap();
        let (r, seen, calls) = recorded(&bounds, go);
        check(&r, &seen, calls, &bounds)?;
        prop_assert_eq!(calls, (pop * gens) as u64);
        let (again, seen_again, _) = recorded(&bounds, go);
        prop_assert_eq!(r, again);
        prop_assert_eq!(seen, seen_again);
    }

    #[test]
    fn sa_invariants(bounds in arb_bounds(), runs in 1usize..4, steps in 1usize..6, seed in any::<u64>()) {
        let cfg = SaConfig {
            n_runs: runs,
            steps_per_temperature: steps,
            min_temperature: 1e-2,
            step_scale: 0.5,
            seed,
            ..SaConfig::for_dimension(bounds.dim())
        };
        let go = |f: &mut dyn FnMut(&[f64]) -> f64, b: &EvalBudget| sa_optimize(f, &bounds, &cfg, b).unwrap();
        let (r, seen, calls) = recorded(&bounds, go);
        check(&r, &seen, calls, &bounds)?;
        prop_assert_eq!(calls, (runs * (1 + cfg.levels() * steps)) as u64);
        prop_assert_eq!(r.run_evaluations.iter().sum::<u64>(), calls);
        let (again, seen_again, _) = recorded(&bounds, go);
        prop_assert_eq!(r, again);
        prop_assert_eq!(seen, seen_again);
    }
}
