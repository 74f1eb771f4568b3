//! Euler-Bernoulli beam models, the undamped eigenproblem, FRF synthesis and the
//! modal-distance cost.

mod assembly;
mod eigen;
mod frf;
mod modal;
mod structure;

pub use assembly::{assemble, bending_mass, bending_stiffness, element_matrices, SystemMatrices};
pub use eigen::{cholesky, residual, solve_modes, solve_modes_with, symmetric_eigen, EigenOptions};
pub use frf::frf_inertance;
pub use modal::{cost, mac, mac_diagonal, pair_modes, CostWeights, ModalData, ModePairing};
pub use structure::{BeamElement, BeamStructure, Boundary, DofLayout};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element {element} has non-positive modulus {value}")]
    NonPositiveModulus { element: usize, value: f64 },
    #[error("matrices asymmetric (relative {0:e})")]
    Asymmetric(f64),
    #[error("mass matrix not positive definite (pivot {pivot})")]
    MassNotPositiveDefinite { pivot: usize },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },
    #[error("requested {requested} modes but only {available} DOFs")]
    TooManyModes { requested: usize, available: usize },
    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeCountMismatch { expected: usize, found: usize },
    #[error("mode shape {0} has zero norm")]
    ZeroModeShape(usize),
    #[error("measured frequency of mode {0} is zero")]
    ZeroMeasuredFrequency(usize),
    #[error("coordinate {0} is not part of the modal data")]
    UnknownCoordinate(usize),
    #[error("invalid modal data: {0}")]
    InvalidModalData(String),
    #[error("cost weights must be finite and non-negative")]
    InvalidWeights,
    #[error("undamped resonance at grid point {index} (ω = {omega})")]
    SingularFrequency { index: usize, omega: f64 },
}
