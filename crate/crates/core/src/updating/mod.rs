//! Model updating: the shared full-model objective and the three search strategies
//! built on it (surrogate-driven response surface, GA and SA on the full model).

mod design;
mod direct;
mod report;
mod rsm;

pub use design::{latin_hypercube, read_design_csv, sample_design, uniform_design, write_design_csv, Sampling};
pub use direct::{ga_update, sa_update, SaUpdateConfig};
pub use report::{comparison_table, write_history_csv, Method, ModalComparison, UpdateReport};
pub use rsm::{rsm_update, rsm_update_from, RsmConfig, RsmIteration};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{assemble, cost, pair_modes, solve_modes, BeamStructure, CostWeights, ModalData, ModelError};
use crate::optim::{Bounds, EvalBudget, OptimError};
use crate::surrogate::SurrogateError;

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Extra calculated modes beyond the measured ones, so pairing has candidates
/// to choose from when modes swap order.
const PAIRING_SPARE_MODES: usize = 3;

/// An updating problem over per-element elastic moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdatingProblem {
    pub structure: BeamStructure,
    /// One coordinate per element, N·m⁻².
    pub bounds: Bounds,
    /// Starting moduli of the search and the "before" state of reports.
    pub initial: Vec<f64>,
    /// Measured elastic modes at the observed coordinates.
    pub measured: ModalData,
    pub weights: CostWeights,
    /// The response-surface loop stops once a full-model cost reaches this.
    pub target_cost: f64,
}

impl UpdatingProblem {
    pub fn new(
        structure: BeamStructure,
        bounds: Bounds,
        initial: Vec<f64>,
        measured: ModalData,
        weights: CostWeights,
        target_cost: f64,
    ) -> Result<Self, UpdateError> {
        let n_el = structure.elements.len();
        if bounds.dim() != n_el || initial.len() != n_el {
            return Err(UpdateError::InvalidConfig(format!(
                "bounds and initial moduli need {n_el} entries"
            )));
        }
        if !bounds.contains(&initial) {
            return Err(UpdateError::InvalidConfig("initial moduli outside bounds".into()));
        }
        measured.check()?;
        if measured.rigid_body.iter().any(|&r| r) {
            return Err(UpdateError::InvalidConfig(
                "measured data must hold elastic modes only".into(),
            ));
        }
        if weights.gamma.len() != measured.n_modes() {
            return Err(ModelError::DimensionMismatch {
                expected: measured.n_modes(),
                found: weights.gamma.len(),
            }
            .into());
        }
        if !(target_cost >= 0.0) {
            return Err(UpdateError::InvalidConfig("target_cost must be non-negative".into()));
        }
        Ok(Self {
            structure,
            bounds,
            initial,
            measured,
            weights,
            target_cost,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.measured.n_modes()
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Calculated modes at the observed coordinates, paired column-for-column with
    /// the measured modes.
    pub fn paired_modes(&self, moduli: &[f64]) -> Result<ModalData, ModelError> {
        let matrices = assemble(&self.structure, moduli)?;
        let wanted = (self.n_modes() + self.structure.layout.rigid_body_modes() + PAIRING_SPARE_MODES)
            .min(matrices.free_dofs.len());
        let calc = solve_modes(&matrices, wanted)?.restrict(&self.measured.coordinates)?;
        let pairing = pair_modes(&calc, &self.measured)?;
        Ok(calc.select_modes(&pairing.calc_index))
    }

    /// Updating cost of `moduli`, or +∞ when the model cannot be solved. Not charged
    /// to any budget.
    pub fn evaluate(&self, moduli: &[f64]) -> f64 {
        match self
            .paired_modes(moduli)
            .and_then(|calc| cost(&calc, &self.measured, &self.weights))
        {
            Ok(c) => c,
            Err(e) => {
                log::warn!("full-model evaluation failed: {e}");
                f64::INFINITY
            }
        }
    }
}

/// One charged full-model evaluation.
pub fn full_objective(problem: &UpdatingProblem, moduli: &[f64], budget: &EvalBudget) -> f64 {
    if !budget.try_charge() {
        log::warn!("evaluation budget exhausted");
        return f64::INFINITY;
    }
    problem.evaluate(moduli)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// Squared relative frequency error, dimensionless.
    Relative,
    /// Squared frequency difference in Hz².
    Absolute,
}

/// Per-mode frequency weights from the initial model's mismatch, read as the
/// squared relative error. See [`compute_gamma_weights_with`] for the Hz² form.
pub fn compute_gamma_weights(initial: &ModalData, measured: &ModalData) -> Result<Vec<f64>, ModelError> {
    compute_gamma_weights_with(initial, measured, GammaMode::Relative)
}

pub fn compute_gamma_weights_with(
    initial: &ModalData,
    measured: &ModalData,
    mode: GammaMode,
) -> Result<Vec<f64>, ModelError> {
    if initial.n_modes() != measured.n_modes() {
        return Err(ModelError::ModeCountMismatch {
            expected: measured.n_modes(),
            found: initial.n_modes(),
        });
    }
    let to_hz = 1.0 / (2.0 * std::f64::consts::PI);
    measured
        .frequencies
        .iter()
        .zip(&initial.frequencies)
        .enumerate()
        .map(|(i, (&wm, &w0))| {
            if wm == 0.0 {
                return Err(ModelError::ZeroMeasuredFrequency(i));
            }
            Ok(match mode {
                GammaMode::Relative => ((wm - w0) / wm).powi(2),
                GammaMode::Absolute => ((wm - w0) * to_hz).powi(2),
            })
        })
        .collect()
}
