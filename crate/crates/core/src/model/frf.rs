//! Inertance frequency response by modal summation.

use num_complex::Complex64;

use super::modal::ModalData;
use super::ModelError;

/// `H_kl(ω) = Σᵢ −ω² φₖⁱ φₗⁱ / (ωᵢ² − ω² + 2jζᵢωᵢω)` at every grid point.
///
/// `k` and `l` index rows of the mode-shape matrix (observed coordinates).
pub fn frf_inertance(modal: &ModalData, k: usize, l: usize, freq_grid: &[f64]) -> Result<Vec<Complex64>, ModelError> {
    let rows = modal.shapes.nrows();
    for c in [k, l] {
        if c >= rows {
            return Err(ModelError::UnknownCoordinate(c));
        }
    }
    if modal.damping.iter().any(|z| !(*z >= 0.0)) {
        return Err(ModelError::InvalidModalData("negative damping ratio".into()));
    }

    freq_grid
        .iter()
        .enumerate()
        .map(|(g, &w)| {
            if w == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut h = Complex64::new(0.0, 0.0);
            for i in 0..modal.n_modes() {
                let wi = modal.frequencies[i];
                let den = Complex64::new(wi * wi - w * w, 2.0 * modal.damping[i] * wi * w);
                if den.norm() == 0.0 {
                    return Err(ModelError::SingularFrequency { index: g, omega: w });
                }
                let num = -w * w * modal.shapes[(k, i)] * modal.shapes[(l, i)];
                h += num / den;
            }
            Ok(h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn single(wn: f64, zeta: f64) -> ModalData {
        ModalData {
            frequencies: vec![wn],
            shapes: DMatrix::from_element(1, 1, 1.0),
            damping: vec![zeta],
            coordinates: vec![0],
            rigid_body: vec![false],
        }
    }

    #[test]
    fn zero_frequency_gives_zero() {
        let h = frf_inertance(&single(3.0, 0.02), 0, 0, &[0.0]).unwrap();
        assert_eq!(h[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn undamped_value_above_resonance() {
        let h = frf_inertance(&single(1.0, 0.0), 0, 0, &[2f64.sqrt()]).unwrap();
        assert!((h[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn peak_sits_at_resonance() {
        let wn = 40.0;
        let grid: Vec<f64> = (0..=2000).map(|i| wn * (0.5 + i as f64 / 2000.0)).collect();
        let h = frf_inertance(&single(wn, 0.01), 0, 0, &grid).unwrap();
        let (imax, _) = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((grid[imax] - wn).abs() / wn < 0.02);
        assert!(h.iter().all(|v| v.norm().is_finite()));
    }

    #[test]
    fn undamped_resonance_is_singular() {
        let r = frf_inertance(&single(5.0, 0.0), 0, 0, &[1.0, 5.0]);
        assert!(matches!(r, Err(ModelError::SingularFrequency { index: 1, .. })));
    }
}
