//! Finite element model updating of beam structures from modal data.
//!
//! Element elastic moduli are tuned so that model natural frequencies and mode
//! shapes match measured ones. Three strategies are provided: a response surface
//! method (a neural-network surrogate of the updating cost optimized by a genetic
//! algorithm and refined against the full model), a genetic algorithm on the full
//! model, and simulated annealing on the full model.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod model;
pub mod optim;
pub mod scenario;
pub mod surrogate;
pub mod updating;
