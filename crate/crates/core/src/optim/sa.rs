//! Simulated annealing with the Metropolis acceptance rule and geometric cooling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{mean_finite, Bounds, EvalBudget, HistoryRow, OptimError, OptimResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaConfig {
    /// Starting temperature, in cost units.
    pub initial_temperature: f64,
    /// Temperature multiplier applied after each level.
    pub cooling_factor: f64,
    pub steps_per_temperature: usize,
    /// Independent annealing runs, each from a fresh random start.
    pub n_runs: usize,
    /// Proposal standard deviation as a fraction of each coordinate's range.
    pub step_scale: f64,
    /// Annealing stops once the temperature falls below this.
    pub min_temperature: f64,
    pub seed: u64,
}

impl SaConfig {
    /// Defaults for a `dim`-dimensional search: four proposals per dimension at
    /// each temperature, cooling by 0.9.
    pub fn for_dimension(dim: usize) -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_factor: 0.9,
            steps_per_temperature: 4 * dim,
            n_runs: 3,
            step_scale: 0.1,
            min_temperature: 1e-6,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::InvalidConfig(m.into()));
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling_factor must lie in (0, 1)");
        }
        if self.n_runs < 1 {
            return bad("n_runs must be at least 1");
        }
        if self.steps_per_temperature < 1 {
            return bad("steps_per_temperature must be at least 1");
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return bad("step_scale must lie in (0, 1]");
        }
        if !(self.initial_temperature > 0.0 && self.min_temperature > 0.0) {
            return bad("temperatures must be positive");
        }
        Ok(())
    }

    /// Temperature levels visited by each run.
    pub fn levels(&self) -> usize {
        let mut t = self.initial_temperature;
        let mut n = 0;
        while t >= self.min_temperature {
            n += 1;
            t *= self.cooling_factor;
        }
        n
    }
}

/// Probability of moving to a state whose energy differs by `delta` at `temperature`.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta < 0.0 {
        1.0
    } else {
        (-delta / temperature).exp()
    }
}

/// Metropolis rule given a uniform draw `u ∈ [0, 1)`.
pub fn metropolis_accept(delta: f64, temperature: f64, u: f64) -> bool {
    delta < 0.0 || u < acceptance_probability(delta, temperature)
}

/// Minimizes `objective` with `cfg.n_runs` independent annealing runs and returns
/// the best state over all of them.
pub fn sa_optimize<F>(
    mut objective: F,
    bounds: &Bounds,
    cfg: &SaConfig,
    budget: &EvalBudget,
) -> Result<OptimResult, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start_calls = budget.calls();
    let sigma: Vec<f64> = (0..bounds.dim()).map(|i| cfg.step_scale * bounds.range(i)).collect();

    let mut best = bounds.lower().to_vec();
    let mut best_cost = f64::INFINITY;
    let mut history = Vec::new();
    let mut run_evaluations = Vec::with_capacity(cfg.n_runs);
    let mut truncated = false;
    let mut non_finite = 0;

    'runs: for run in 0..cfg.n_runs {
        let run_start = budget.calls();
        if !budget.try_charge() {
            truncated = true;
            break;
        }
        let mut x = bounds.sample_uniform(&mut rng);
        let mut e = objective(&x);
        if !e.is_finite() {
            non_finite += 1;
            log::warn!("annealing run {run} started at a non-finite cost");
            e = f64::INFINITY;
        }
        if e < best_cost {
            best_cost = e;
            best.clone_from(&x);
        }

        let mut temperature = cfg.initial_temperature;
        let mut level = 0;
        let mut level_costs = Vec::with_capacity(cfg.steps_per_temperature);
        while temperature >= cfg.min_temperature {
            level_costs.clear();
            for _ in 0..cfg.steps_per_temperature {
                if !budget.try_charge() {
                    truncated = true;
                    run_evaluations.push(budget.calls() - run_start);
                    break 'runs;
                }
                let mut cand: Vec<f64> = x
                    .iter()
                    .zip(&sigma)
                    .map(|(v, s)| v + s * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                bounds.clip(&mut cand);
                let e_new = objective(&cand);
                let u: f64 = rng.random();
                if !e_new.is_finite() {
                    non_finite += 1;
                    log::debug!("rejected proposal with non-finite cost");
                    continue;
                }
                level_costs.push(e_new);
                if metropolis_accept(e_new - e, temperature, u) {
                    x = cand;
                    e = e_new;
                    if e < best_cost {
                        best_cost = e;
                        best.clone_from(&x);
                    }
                }
            }
            history.push(HistoryRow {
                run,
                step: level,
                best_cost,
                mean_cost: mean_finite(&level_costs),
                evaluations: budget.calls() - start_calls,
                temperature: Some(temperature),
            });
            temperature *= cfg.cooling_factor;
            level += 1;
        }
        run_evaluations.push(budget.calls() - run_start);
    }

    Ok(OptimResult {
        best,
        best_cost,
        history,
        evaluations: budget.calls() - start_calls,
        truncated,
        run_evaluations,
        non_finite,
    })
}
