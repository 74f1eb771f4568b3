//! Response-surface updating: fit a surrogate of the cost on a design of
//! full-model runs, optimize the surrogate with the GA, check the optimum on the
//! full model, feed it back into the training set and refit.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::design::{sample_design, Sampling};
use super::report::{Method, Outcome, UpdateReport};
use super::{full_objective, UpdateError, UpdatingProblem};
use crate::optim::{ga_optimize, EvalBudget, GaConfig, HistoryRow};
use crate::surrogate::{init_net, train, Trainer, TrainingSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsmConfig {
    /// Full-model runs in the initial design.
    pub n_samples: usize,
    /// Outer iterations, each costing one full-model run.
    pub max_iterations: usize,
    pub hidden_units: usize,
    /// Training cycles for the first fit.
    pub initial_cycles: usize,
    /// Training cycles for each refit after a sample is replaced.
    pub incremental_cycles: usize,
    pub sampling: Sampling,
    pub sampler_seed: u64,
    /// Seed of the surrogate's initial weights.
    pub net_seed: u64,
    pub trainer: Trainer,
    /// GA run on the surrogate. Iteration `k` uses seed `ga.seed + k`.
    pub ga: GaConfig,
}

impl Default for RsmConfig {
    fn default() -> Self {
        Self {
            n_samples: 150,
            max_iterations: 10,
            hidden_units: 8,
            initial_cycles: 150,
            incremental_cycles: 5,
            sampling: Sampling::LatinHypercube,
            sampler_seed: 0,
            net_seed: 0,
            trainer: Trainer::default(),
            ga: GaConfig::default(),
        }
    }
}

impl RsmConfig {
    pub fn validate(&self) -> Result<(), UpdateError> {
        let bad = |m: &str| Err(UpdateError::InvalidConfig(m.into()));
        if self.max_iterations < 1 {
            return bad("rsm max_iterations must be at least 1");
        }
        if self.initial_cycles < 1 || self.incremental_cycles < 1 {
            return bad("rsm training cycles must be at least 1");
        }
        if self.hidden_units < 1 {
            return bad("rsm hidden_units must be at least 1");
        }
        self.ga.validate()?;
        Ok(())
    }
}

/// Record of one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsmIteration {
    pub iteration: usize,
    pub ga_seed: u64,
    pub point: Vec<f64>,
    /// Surrogate prediction at the GA optimum.
    pub predicted_cost: f64,
    /// Full-model cost at the GA optimum.
    pub full_cost: f64,
    /// Best full-model cost seen so far, design included.
    pub best_cost: f64,
    /// Training-set row overwritten by this point, if any.
    pub replaced: Option<usize>,
    /// Surrogate training loss after the refit that followed (or, for the last
    /// iteration, the fit the GA used).
    pub training_loss: f64,
    /// Cumulative full-model evaluations.
    pub evaluations: u64,
}

/// Runs the full loop, starting with a fresh design of `cfg.n_samples` points.
pub fn rsm_update(problem: &UpdatingProblem, cfg: &RsmConfig) -> Result<UpdateReport, UpdateError> {
    let started = Instant::now();
    cfg.validate()?;
    let budget = EvalBudget::unlimited();
    let design = sample_design(&problem.bounds, cfg.n_samples, cfg.sampling, cfg.sampler_seed);
    let costs: Vec<f64> = design.iter().map(|x| full_objective(problem, x, &budget)).collect();
    run_loop(problem, cfg, design, costs, budget, started)
}

/// Runs the loop from an already evaluated design, e.g. one written by an earlier
/// sampling run. The design rows count towards the reported evaluations.
pub fn rsm_update_from(
    problem: &UpdatingProblem,
    cfg: &RsmConfig,
    design: Vec<Vec<f64>>,
    costs: Vec<f64>,
) -> Result<UpdateReport, UpdateError> {
    let started = Instant::now();
    cfg.validate()?;
    if design.len() != costs.len() {
        return Err(UpdateError::InvalidConfig("design and cost counts differ".into()));
    }
    if let Some(x) = design.iter().find(|x| !problem.bounds.contains(x)) {
        return Err(UpdateError::InvalidConfig(format!("design point {x:?} outside bounds")));
    }
    let budget = EvalBudget::unlimited();
    for _ in 0..design.len() {
        budget.try_charge();
    }
    run_loop(problem, cfg, design, costs, budget, started)
}

fn run_loop(
    problem: &UpdatingProblem,
    cfg: &RsmConfig,
    design: Vec<Vec<f64>>,
    costs: Vec<f64>,
    budget: EvalBudget,
    started: Instant,
) -> Result<UpdateReport, UpdateError> {
    let mut best = problem.initial.clone();
    let mut best_cost = f64::INFINITY;
    for (x, &c) in design.iter().zip(&costs) {
        if c < best_cost {
            best_cost = c;
            best.clone_from(x);
        }
    }

    let (inputs, targets): (Vec<_>, Vec<_>) = design.into_iter().zip(costs).filter(|(_, c)| c.is_finite()).unzip();
    if inputs.len() < cfg.n_samples {
        log::warn!(
            "{} design points failed and were dropped",
            cfg.n_samples.saturating_sub(inputs.len())
        );
    }
    let mut data = TrainingSet::new(inputs, targets)?;
    let mut net = init_net(
        problem.dim(),
        cfg.hidden_units,
        problem.bounds.lower(),
        problem.bounds.upper(),
        data.len(),
        cfg.net_seed,
    )?;
    net.fit_output_scaling(data.targets());
    let fit = train(&net, &data, cfg.initial_cycles, cfg.trainer)?;
    net = fit.net;
    let mut training_loss = fit.final_loss;

    let mut iterations = Vec::with_capacity(cfg.max_iterations);
    let mut history = Vec::with_capacity(cfg.max_iterations);
    let mut reached_target = false;
    let mut truncated = false;
    let mut diagnostic = None;

    for k in 0..cfg.max_iterations {
        let ga_cfg = GaConfig {
            seed: cfg.ga.seed.wrapping_add(k as u64),
            ..cfg.ga.clone()
        };
        let surrogate_calls = EvalBudget::unlimited();
        let found = ga_optimize(
            |x| net.forward(x).unwrap_or(f64::INFINITY),
            &problem.bounds,
            &ga_cfg,
            &surrogate_calls,
        )?;
        let full_cost = full_objective(problem, &found.best, &budget);
        if full_cost < best_cost {
            best_cost = full_cost;
            best.clone_from(&found.best);
        }
        let mut record = RsmIteration {
            iteration: k,
            ga_seed: ga_cfg.seed,
            point: found.best.clone(),
            predicted_cost: found.best_cost,
            full_cost,
            best_cost,
            replaced: None,
            training_loss,
            evaluations: budget.calls(),
        };
        history.push(HistoryRow {
            run: 0,
            step: k,
            best_cost,
            mean_cost: full_cost,
            evaluations: budget.calls(),
            temperature: None,
        });

        if full_cost <= problem.target_cost {
            reached_target = true;
            iterations.push(record);
            break;
        }
        if k + 1 == cfg.max_iterations {
            iterations.push(record);
            break;
        }

        // Only a better point displaces the worst one, so the worst cost in the
        // training set never rises.
        let worst = data.worst();
        if full_cost < data.targets()[worst] {
            data.replace(worst, found.best, full_cost)?;
            record.replaced = Some(worst);
        }
        match train(&net, &data, cfg.incremental_cycles, cfg.trainer) {
            Ok(fit) => {
                net = fit.net;
                training_loss = fit.final_loss;
                record.training_loss = training_loss;
                iterations.push(record);
            }
            Err(e) => {
                log::error!("surrogate refit failed at iteration {k}: {e}");
                truncated = true;
                diagnostic = Some(format!("surrogate refit failed at iteration {k}: {e}"));
                iterations.push(record);
                break;
            }
        }
    }

    let outcome = Outcome {
        best,
        evaluations: budget.calls(),
        run_evaluations: vec![budget.calls()],
        reached_target,
        truncated,
        diagnostic,
        history,
    };
    let seeds = BTreeMap::from([
        ("rsm_sampler".to_string(), cfg.sampler_seed),
        ("rsm_net".to_string(), cfg.net_seed),
        ("rsm_ga".to_string(), cfg.ga.seed),
    ]);
    let config = serde_json::to_value(cfg).expect("RSM config serializes");
    let mut report = UpdateReport::build(problem, Method::Rsm, outcome, seeds, config, started)?;
    report.rsm_iterations = iterations;
    report.surrogate = Some(net);
    Ok(report)
}
