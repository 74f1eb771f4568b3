//! Neural-network response surface of the updating cost.

mod data;
mod net;
mod train;

pub use data::TrainingSet;
pub use net::{grad, init_net, loss, weight_count, InputScaling, OutputScaling, SurrogateNet};
pub use train::{train, TrainOutcome, Trainer};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite value in input or weights")]
    NonFinite,
    #[error("training set is empty")]
    EmptyData,
    #[error("{weights} weights need more than {samples} training samples")]
    TooManyWeights { weights: usize, samples: usize },
    #[error("input and hidden counts must be positive")]
    Architecture,
    #[error("bounds must be finite with lower < upper")]
    InvalidBounds,
    #[error("training needs at least one cycle")]
    ZeroCycles,
}
