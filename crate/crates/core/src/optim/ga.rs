//! Real-coded genetic algorithm.
//!
//! Each generation ranks the population, draws parents with the normalized
//! geometric distribution over ranks, applies arithmetic crossover and
//! non-uniform mutation, and carries the best individual found so far into the
//! next population. Every member of every population is evaluated, so a run costs
//! exactly `population_size × generations` evaluations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mean_finite, Bounds, EvalBudget, HistoryRow, OptimError, OptimResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    /// Evaluated populations, the random initial one included.
    pub generations: usize,
    /// Probability of selecting the best-ranked individual (before normalization).
    pub selection_q: f64,
    /// Per-individual mutation probability.
    pub mutation_rate: f64,
    /// Per-pair crossover probability.
    pub crossover_rate: f64,
    /// Non-uniformity exponent of the mutation.
    pub mutation_shape_b: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 200,
            selection_q: 0.08,
            mutation_rate: 0.003,
            crossover_rate: 0.6,
            mutation_shape_b: 2.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::InvalidConfig(m.into()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.generations < 1 {
            return bad("generations must be at least 1");
        }
        if !(self.selection_q > 0.0 && self.selection_q <= 1.0) {
            return bad("selection_q must lie in (0, 1]");
        }
        for (name, p) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(OptimError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.mutation_shape_b > 0.0 && self.mutation_shape_b.is_finite()) {
            return bad("mutation_shape_b must be positive");
        }
        Ok(())
    }
}

/// Children `a·p1 + (1−a)·p2` and `(1−a)·p1 + a·p2` for a given `a ∈ [0, 1]`.
pub fn blend(p1: &[f64], p2: &[f64], a: f64) -> (Vec<f64>, Vec<f64>) {
    let c1 = p1.iter().zip(p2).map(|(x, y)| a * x + (1.0 - a) * y).collect();
    let c2 = p1.iter().zip(p2).map(|(x, y)| (1.0 - a) * x + a * y).collect();
    (c1, c2)
}

/// Arithmetic crossover with `a` drawn uniformly from [0, 1].
pub fn arithmetic_crossover<R: Rng + ?Sized>(p1: &[f64], p2: &[f64], rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let a: f64 = rng.random();
    blend(p1, p2, a)
}

/// Mutation step `y · (1 − r^((1 − t/T)^b))` toward a bound at distance `y`.
pub fn nonuniform_delta(y: f64, t: usize, max_t: usize, b: f64, r: f64) -> f64 {
    let frac = (t as f64 / max_t as f64).min(1.0);
    y * (1.0 - r.powf((1.0 - frac).powf(b)))
}

/// Moves one random coordinate toward its upper or lower bound (fair coin) by
/// [`nonuniform_delta`]. The step shrinks to zero as `t` approaches `max_t`.
pub fn nonuniform_mutate<R: Rng + ?Sized>(
    x: &[f64],
    t: usize,
    max_t: usize,
    bounds: &Bounds,
    b: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = x.to_vec();
    let i = rng.random_range(0..x.len());
    let r: f64 = rng.random();
    if rng.random_bool(0.5) {
        let y = bounds.upper()[i] - x[i];
        out[i] = (x[i] + nonuniform_delta(y, t, max_t, b, r)).min(bounds.upper()[i]);
    } else {
        let y = x[i] - bounds.lower()[i];
        out[i] = (x[i] - nonuniform_delta(y, t, max_t, b, r)).max(bounds.lower()[i]);
    }
    out
}

/// `P(rank r) = q′ (1 − q)^(r−1)` with `q′ = q / (1 − (1 − q)^n)`, rank 1 first.
pub fn geometric_probabilities(n: usize, q: f64) -> Vec<f64> {
    let qn = q / (1.0 - (1.0 - q).powi(n as i32));
    (0..n).map(|r| qn * (1.0 - q).powi(r as i32)).collect()
}

/// Cumulative table for repeated normalized-geometric draws over `n` ranks.
#[derive(Debug, Clone)]
pub struct GeometricSelector {
    cdf: Vec<f64>,
}

impl GeometricSelector {
    pub fn new(n: usize, q: f64) -> Self {
        let mut acc = 0.0;
        let cdf = geometric_probabilities(n, q)
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cdf }
    }

    /// Rank index, 0 being the best.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Index into `ranked_costs` (sorted ascending) drawn by normalized geometric ranking.
pub fn geometric_select<R: Rng + ?Sized>(ranked_costs: &[f64], q: f64, rng: &mut R) -> usize {
    GeometricSelector::new(ranked_costs.len(), q).select(rng)
}

/// Minimizes `objective` over `bounds`.
pub fn ga_optimize<F>(
    mut objective: F,
    bounds: &Bounds,
    cfg: &GaConfig,
    budget: &EvalBudget,
) -> Result<OptimResult, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.population_size;
    let selector = GeometricSelector::new(n, cfg.selection_q);
    let start_calls = budget.calls();

    let mut population: Vec<Vec<f64>> = (0..n).map(|_| bounds.sample_uniform(&mut rng)).collect();
    let mut costs = vec![f64::INFINITY; n];
    let mut best = population[0].clone();
    let mut best_cost = f64::INFINITY;
    let mut history = Vec::with_capacity(cfg.generations);
    let mut truncated = false;
    let mut non_finite = 0;

    for generation in 0..cfg.generations {
        if generation > 0 {
            population = next_population(&population, &costs, &best, bounds, cfg, &selector, generation, &mut rng);
        }
        for (x, c) in population.iter().zip(costs.iter_mut()) {
            if !budget.try_charge() {
                truncated = true;
                break;
            }
            let v = objective(x);
            *c = if v.is_finite() {
                v
            } else {
                non_finite += 1;
                f64::INFINITY
            };
            if *c < best_cost {
                best_cost = *c;
                best.clone_from(x);
            }
        }
        if truncated {
            break;
        }
        history.push(HistoryRow {
            run: 0,
            step: generation,
            best_cost,
            mean_cost: mean_finite(&costs),
            evaluations: budget.calls() - start_calls,
            temperature: None,
        });
    }

    let evaluations = budget.calls() - start_calls;
    Ok(OptimResult {
        best,
        best_cost,
        history,
        evaluations,
        truncated,
        run_evaluations: vec![evaluations],
        non_finite,
    })
}

#[allow(clippy::too_many_arguments)]
fn next_population(
    population: &[Vec<f64>],
    costs: &[f64],
    best: &[f64],
    bounds: &Bounds,
    cfg: &GaConfig,
    selector: &GeometricSelector,
    generation: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let n = population.len();
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));

    let parents: Vec<&Vec<f64>> = (0..n).map(|_| &population[ranked[selector.select(rng)]]).collect();
    let mut children = Vec::with_capacity(n);
    for pair in parents.chunks(2) {
        match pair {
            [a, b] if rng.random_bool(cfg.crossover_rate) => {
                let (c1, c2) = arithmetic_crossover(a, b, rng);
                children.push(c1);
                children.push(c2);
            }
            _ => children.extend(pair.iter().map(|p| (*p).clone())),
        }
    }
    for child in children.iter_mut() {
        if rng.random_bool(cfg.mutation_rate) {
            *child = nonuniform_mutate(child, generation, cfg.generations, bounds, cfg.mutation_shape_b, rng);
        }
        // Interpolation can round a hair outside the box.
        bounds.clip(child);
    }
    children[0] = best.to_vec();
    children
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_examples() {
        let p1 = [0.2, 0.9];
        let p2 = [0.7, 0.1];
        assert_eq!(blend(&p1, &p2, 1.0), (p1.to_vec(), p2.to_vec()));
        let (c1, c2) = blend(&p1, &p2, 0.5);
        assert_eq!(c1, c2);
        let (c1, c2) = blend(&[0.0, 0.0], &[1.0, 2.0], 0.25);
        assert_eq!(c1, vec![0.75, 1.5]);
        assert_eq!(c2, vec![0.25, 0.5]);
    }

    #[test]
    fn mutation_is_identity_at_final_generation() {
        let b = Bounds::uniform(3, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![0.2, 0.5, 0.8];
        for _ in 0..100 {
            assert_eq!(nonuniform_mutate(&x, 10, 10, &b, 2.0, &mut rng), x);
        }
        assert_eq!(nonuniform_delta(0.0, 1, 10, 2.0, 0.3), 0.0);
    }

    #[test]
    fn mutation_at_bound_toward_bound_is_noop() {
        let b = Bounds::uniform(1, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let up = nonuniform_mutate(&[1.0], 0, 10, &b, 2.0, &mut rng);
            assert!(up[0] <= 1.0 && up[0] >= 0.0);
        }
    }

    #[test]
    fn geometric_probabilities_examples() {
        assert!((geometric_probabilities(1, 0.3)[0] - 1.0).abs() < 1e-15);
        let p = geometric_probabilities(2, 0.5);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        let p = geometric_probabilities(50, 0.08);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| geometric_select(&[3.0], 0.08, &mut rng) == 0));
    }

    #[test]
    fn constant_objective_returns_constant() {
        let b = Bounds::uniform(3, -1.0, 1.0).unwrap();
        let cfg = GaConfig {
            generations: 5,
            population_size: 6,
            ..GaConfig::default()
        };
        let r = ga_optimize(|_| 4.5, &b, &cfg, &EvalBudget::unlimited()).unwrap();
        assert_eq!(r.best_cost, 4.5);
        assert!(b.contains(&r.best));
        assert_eq!(r.evaluations, 30);
    }

    #[test]
    fn budget_truncation_keeps_best() {
        let b = Bounds::uniform(2, 0.0, 1.0).unwrap();
        let budget = EvalBudget::limited(75);
        let r = ga_optimize(|x| x[0] + x[1], &b, &GaConfig::default(), &budget).unwrap();
        assert!(r.truncated);
        assert_eq!(r.evaluations, 75);
        assert!(r.best_cost.is_finite());
    }

    #[test]
    fn rejects_invalid_config() {
        let b = Bounds::uniform(1, 0.0, 1.0).unwrap();
        for cfg in [
            GaConfig {
                generations: 0,
                ..GaConfig::default()
            },
            GaConfig {
                population_size: 1,
                ..GaConfig::default()
            },
            GaConfig {
                mutation_rate: 1.5,
                ..GaConfig::default()
            },
        ] {
            assert!(ga_optimize(|x| x[0], &b, &cfg, &EvalBudget::unlimited()).is_err());
        }
    }
}
