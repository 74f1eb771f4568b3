//! GA and SA run directly on the full model.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{Method, Outcome, UpdateReport};
use super::{full_objective, UpdateError, UpdatingProblem};
use crate::optim::{ga_optimize, sa_optimize, EvalBudget, GaConfig, SaConfig};

pub fn ga_update(problem: &UpdatingProblem, cfg: &GaConfig) -> Result<UpdateReport, UpdateError> {
    let started = Instant::now();
    // The optimizer keeps its own call count; `budget` counts full-model runs.
    let budget = EvalBudget::unlimited();
    let r = ga_optimize(
        |x| full_objective(problem, x, &budget),
        &problem.bounds,
        cfg,
        &EvalBudget::unlimited(),
    )?;
    if r.non_finite > 0 {
        log::warn!("{} GA candidates had no valid model solution", r.non_finite);
    }
    let outcome = Outcome {
        best: r.best,
        evaluations: budget.calls(),
        run_evaluations: r.run_evaluations,
        reached_target: false,
        truncated: r.truncated,
        diagnostic: None,
        history: r.history,
    };
    let seeds = BTreeMap::from([("ga".to_string(), cfg.seed)]);
    let config = serde_json::to_value(cfg).expect("GA config serializes");
    UpdateReport::build(problem, Method::Ga, outcome, seeds, config, started)
}

/// Annealing settings for updating. Temperatures are multiples of the initial
/// model's cost when `relative_temperature` is set, which keeps the schedule
/// meaningful whatever the cost weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaUpdateConfig {
    pub initial_temperature: f64,
    pub min_temperature: f64,
    pub relative_temperature: bool,
    pub cooling_factor: f64,
    /// Proposals per temperature level; four per parameter when unset.
    pub steps_per_temperature: Option<usize>,
    pub n_runs: usize,
    /// Proposal standard deviation as a fraction of each parameter's range.
    pub step_scale: f64,
    pub seed: u64,
}

impl Default for SaUpdateConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            min_temperature: 1e-6,
            relative_temperature: true,
            cooling_factor: 0.9,
            steps_per_temperature: None,
            n_runs: 3,
            step_scale: 0.1,
            seed: 0,
        }
    }
}

impl SaUpdateConfig {
    pub fn validate(&self) -> Result<(), UpdateError> {
        if self.min_temperature >= self.initial_temperature {
            return Err(UpdateError::InvalidConfig(
                "[sa] min_temperature must be below initial_temperature".into(),
            ));
        }
        let probe = SaConfig {
            initial_temperature: self.initial_temperature,
            min_temperature: self.min_temperature,
            cooling_factor: self.cooling_factor,
            steps_per_temperature: self.steps_per_temperature.unwrap_or(1),
            n_runs: self.n_runs,
            step_scale: self.step_scale,
            seed: self.seed,
        };
        probe
            .validate()
            .map_err(|e| UpdateError::InvalidConfig(format!("[sa] {e}")))
    }

    /// Absolute annealing settings for `problem`.
    pub fn resolve(&self, problem: &UpdatingProblem) -> SaConfig {
        let scale = if self.relative_temperature {
            let c = problem.evaluate(&problem.initial);
            if c > 0.0 && c.is_finite() {
                c
            } else {
                log::warn!("initial cost is {c}; using unit temperature scale");
                1.0
            }
        } else {
            1.0
        };
        SaConfig {
            initial_temperature: self.initial_temperature * scale,
            min_temperature: self.min_temperature * scale,
            cooling_factor: self.cooling_factor,
            steps_per_temperature: self.steps_per_temperature.unwrap_or(4 * problem.dim()),
            n_runs: self.n_runs,
            step_scale: self.step_scale,
            seed: self.seed,
        }
    }
}

pub fn sa_update(problem: &UpdatingProblem, cfg: &SaUpdateConfig) -> Result<UpdateReport, UpdateError> {
    let started = Instant::now();
    cfg.validate()?;
    let resolved = cfg.resolve(problem);
    let budget = EvalBudget::unlimited();
    let r = sa_optimize(
        |x| full_objective(problem, x, &budget),
        &problem.bounds,
        &resolved,
        &EvalBudget::unlimited(),
    )?;
    if r.non_finite > 0 {
        log::warn!("{} SA proposals had no valid model solution", r.non_finite);
    }
    let outcome = Outcome {
        best: r.best,
        evaluations: budget.calls(),
        run_evaluations: r.run_evaluations,
        reached_target: false,
        truncated: r.truncated,
        diagnostic: None,
        history: r.history,
    };
    let seeds = BTreeMap::from([("sa".to_string(), cfg.seed)]);
    let config = serde_json::json!({ "settings": cfg, "resolved": resolved });
    UpdateReport::build(problem, Method::Sa, outcome, seeds, config, started)
}
