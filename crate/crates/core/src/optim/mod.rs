//! Box-bounded genetic algorithm and simulated annealing.

mod ga;
mod sa;

pub use ga::{
    arithmetic_crossover, blend, ga_optimize, geometric_probabilities, geometric_select, nonuniform_delta,
    nonuniform_mutate, GaConfig, GeometricSelector,
};
pub use sa::{acceptance_probability, metropolis_accept, sa_optimize, SaConfig};

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimError> {
        if lower.len() != upper.len() {
            return Err(OptimError::InvalidBounds("length mismatch".into()));
        }
        if lower.is_empty() {
            return Err(OptimError::InvalidBounds("zero dimensions".into()));
        }
        if let Some(i) =
            (0..lower.len()).find(|&i| !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite())
        {
            return Err(OptimError::InvalidBounds(format!("coordinate {i} needs lower < upper")));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, OptimError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| rng.random_range(self.lower[i]..=self.upper[i]))
            .collect()
    }
}

/// Counts objective evaluations against an optional cap. Safe to share across threads.
#[derive(Debug, Default)]
pub struct EvalBudget {
    calls: AtomicU64,
    limit: Option<u64>,
}

impl EvalBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn limited(limit: u64) -> Self {
        Self {
            calls: AtomicU64::new(0),
            limit: Some(limit),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    /// Records one evaluation; returns false (and records nothing) once the cap is reached.
    pub fn try_charge(&self) -> bool {
        match self.limit {
            None => {
                self.calls.fetch_add(1, Ordering::SeqCst);
                true
            }
            Some(limit) => self
                .calls
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| (c < limit).then_some(c + 1))
                .is_ok(),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.limit.is_some_and(|l| self.calls() >= l)
    }
}

/// One progress record: a GA generation or an SA temperature level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    /// Annealing run (always 0 for the GA).
    pub run: usize,
    pub step: usize,
    /// Best cost seen so far.
    pub best_cost: f64,
    /// Mean finite cost of the candidates evaluated in this step.
    pub mean_cost: f64,
    /// Cumulative evaluations.
    pub evaluations: u64,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best: Vec<f64>,
    pub best_cost: f64,
    pub history: Vec<HistoryRow>,
    /// Evaluations performed by this call.
    pub evaluations: u64,
    /// Set when the budget ran out before the schedule completed.
    pub truncated: bool,
    /// Per-run evaluation counts (SA); a single entry for the GA.
    pub run_evaluations: Vec<u64>,
    /// Candidates rejected because the objective returned a non-finite value.
    pub non_finite: u64,
}

fn mean_finite(values: &[f64]) -> f64 {
    let (s, n) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::INFINITY
    } else {
        s / n as f64
    }
}
