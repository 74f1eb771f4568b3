//! Modal data, the modal assurance criterion, mode pairing and the updating cost.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Natural frequencies (rad/s) with their mode shapes at a set of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalData {
    /// Ascending, rad/s.
    pub frequencies: Vec<f64>,
    /// One column per mode; rows follow `coordinates`.
    pub shapes: DMatrix<f64>,
    /// Per-mode damping ratio ζ, used only for FRF synthesis.
    pub damping: Vec<f64>,
    /// Global DOF index of each shape row.
    pub coordinates: Vec<usize>,
    pub rigid_body: Vec<bool>,
}

impl ModalData {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.frequencies
            .iter()
            .map(|w| w / (2.0 * std::f64::consts::PI))
            .collect()
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let n = self.n_modes();
        if self.shapes.ncols() != n || self.damping.len() != n || self.rigid_body.len() != n {
            return Err(ModelError::ModeCountMismatch {
                expected: n,
                found: self.shapes.ncols(),
            });
        }
        if self.shapes.nrows() != self.coordinates.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.coordinates.len(),
                found: self.shapes.nrows(),
            });
        }
        if self.frequencies.iter().any(|w| !(*w >= 0.0)) {
            return Err(ModelError::InvalidModalData("negative or NaN frequency".into()));
        }
        if self.frequencies.windows(2).any(|w| w[1] < w[0]) {
            return Err(ModelError::InvalidModalData("frequencies not ascending".into()));
        }
        Ok(())
    }

    /// Keeps only the rows for the given global DOFs, in that order.
    pub fn restrict(&self, dofs: &[usize]) -> Result<ModalData, ModelError> {
        let rows = dofs
            .iter()
            .map(|d| {
                self.coordinates
                    .iter()
                    .position(|c| c == d)
                    .ok_or(ModelError::UnknownCoordinate(*d))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ModalData {
            shapes: self.shapes.select_rows(&rows),
            coordinates: dofs.to_vec(),
            ..self.clone()
        })
    }

    /// Keeps the listed modes in the listed order.
    pub fn select_modes(&self, modes: &[usize]) -> ModalData {
        ModalData {
            frequencies: modes.iter().map(|&i| self.frequencies[i]).collect(),
            shapes: self.shapes.select_columns(modes),
            damping: modes.iter().map(|&i| self.damping[i]).collect(),
            coordinates: self.coordinates.clone(),
            rigid_body: modes.iter().map(|&i| self.rigid_body[i]).collect(),
        }
    }

    pub fn elastic_indices(&self) -> Vec<usize> {
        (0..self.n_modes()).filter(|&i| !self.rigid_body[i]).collect()
    }

    pub fn elastic(&self) -> ModalData {
        self.select_modes(&self.elastic_indices())
    }
}

/// Frequency weights γ and mode-shape weight β of the updating cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub gamma: Vec<f64>,
    pub beta: f64,
}

impl CostWeights {
    pub fn new(gamma: Vec<f64>, beta: f64) -> Result<Self, ModelError> {
        if gamma.iter().chain([&beta]).any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(ModelError::InvalidWeights);
        }
        Ok(Self { gamma, beta })
    }
}

/// Full MAC matrix between the columns of `a` and `b`.
pub fn mac(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>, ModelError> {
    if a.nrows() != b.nrows() {
        return Err(ModelError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let na = column_norms_sq(a)?;
    let nb = column_norms_sq(b)?;
    let cross = a.transpose() * b;
    Ok(DMatrix::from_fn(a.ncols(), b.ncols(), |i, j| {
        let c = cross[(i, j)];
        (c * c / (na[i] * nb[j])).min(1.0)
    }))
}

/// MAC of column `i` of `a` against column `i` of `b`.
pub fn mac_diagonal(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>, ModelError> {
    if a.nrows() != b.nrows() {
        return Err(ModelError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if a.ncols() != b.ncols() {
        return Err(ModelError::ModeCountMismatch {
            expected: b.ncols(),
            found: a.ncols(),
        });
    }
    let na = column_norms_sq(a)?;
    let nb = column_norms_sq(b)?;
    Ok((0..a.ncols())
        .map(|i| {
            let c = a.column(i).dot(&b.column(i));
            (c * c / (na[i] * nb[i])).min(1.0)
        })
        .collect())
}

fn column_norms_sq(m: &DMatrix<f64>) -> Result<Vec<f64>, ModelError> {
    m.column_iter()
        .enumerate()
        .map(|(i, c)| {
            let n = c.norm_squared();
            if n > 0.0 && n.is_finite() {
                Ok(n)
            } else {
                Err(ModelError::ZeroModeShape(i))
            }
        })
        .collect()
}

/// Result of matching calculated modes to measured ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePairing {
    /// `calc_index[i]` is the calculated mode paired with measured mode `i`.
    pub calc_index: Vec<usize>,
    pub mac: Vec<f64>,
    /// Measured modes whose best available MAC fell below 0.5.
    pub weak: Vec<usize>,
}

/// Greedy MAC pairing: measured modes in order each take the unused elastic
/// calculated mode with the highest MAC.
pub fn pair_modes(calc: &ModalData, measured: &ModalData) -> Result<ModePairing, ModelError> {
    let m = mac(&calc.shapes, &measured.shapes)?;
    let mut used = vec![false; calc.n_modes()];
    let mut pairing = ModePairing {
        calc_index: Vec::with_capacity(measured.n_modes()),
        mac: Vec::with_capacity(measured.n_modes()),
        weak: Vec::new(),
    };
    for j in 0..measured.n_modes() {
        let best = (0..calc.n_modes())
            .filter(|&i| !used[i] && !calc.rigid_body[i])
            .max_by(|&a, &b| m[(a, j)].total_cmp(&m[(b, j)]).then(b.cmp(&a)));
        let Some(i) = best else {
            return Err(ModelError::ModeCountMismatch {
                expected: measured.n_modes(),
                found: calc.elastic_indices().len(),
            });
        };
        used[i] = true;
        if m[(i, j)] < 0.5 {
            log::debug!("measured mode {j} paired with MAC {:.3}", m[(i, j)]);
            pairing.weak.push(j);
        }
        pairing.calc_index.push(i);
        pairing.mac.push(m[(i, j)]);
    }
    Ok(pairing)
}

/// Squared relative frequency error weighted by γ plus β times the MAC deficit,
/// summed over modes already paired column-for-column.
pub fn cost(calc: &ModalData, measured: &ModalData, weights: &CostWeights) -> Result<f64, ModelError> {
    let n = measured.n_modes();
    if calc.n_modes() != n {
        return Err(ModelError::ModeCountMismatch {
            expected: n,
            found: calc.n_modes(),
        });
    }
    if weights.gamma.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: weights.gamma.len(),
        });
    }
    let mut freq_term = 0.0;
    for i in 0..n {
        let wm = measured.frequencies[i];
        if wm == 0.0 {
            return Err(ModelError::ZeroMeasuredFrequency(i));
        }
        let rel = (wm - calc.frequencies[i]) / wm;
        freq_term += weights.gamma[i] * rel * rel;
    }
    let diag = mac_diagonal(&calc.shapes, &measured.shapes)?;
    let shape_term: f64 = diag.iter().map(|m| 1.0 - m).sum();
    Ok(freq_term + weights.beta * shape_term)
}
