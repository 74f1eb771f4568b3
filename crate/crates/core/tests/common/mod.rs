//! Independent reference computations shared by the integration tests and the
//! acceptance runner. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random symmetric positive definite pencil `(K, M)` of order `n`.
pub fn random_pencil<R: Rng>(rng: &mut R, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rand_mat = || DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = rand_mat();
    let b = rand_mat();
    let k = a.transpose() * &a + DMatrix::identity(n, n) * 0.1;
    let m = b.transpose() * &b + DMatrix::identity(n, n) * 0.5;
    (k, m)
}

/// Number of eigenvalues of the pencil below `lambda`: the count of negative
/// pivots in an unpivoted LDLᵀ of `K − λM` (Sylvester's law of inertia), i.e.
/// the sign changes of the characteristic polynomial's leading minors.
pub fn count_below(k: &DMatrix<f64>, m: &DMatrix<f64>, lambda: f64) -> usize {
    let mut a = k - m * lambda;
    let n = a.nrows();
    let mut negatives = 0;
    // Only the lower triangle is read and updated.
    for j in 0..n {
        let d = a[(j, j)];
        if d < 0.0 {
            negatives += 1;
        }
        for i in j + 1..n {
            let l = a[(i, j)] / d;
            for c in j + 1..=i {
                a[(i, c)] -= l * a[(c, j)];
            }
        }
    }
    negatives
}

/// All eigenvalues of the pencil by bisection on the characteristic polynomial,
/// bracketed by `[0, tr(M⁻¹K)]`.
pub fn oracle_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let upper = (m.clone().try_inverse().expect("M invertible") * k).trace() * 1.01;
    (1..=k.nrows())
        .map(|j| {
            let (mut lo, mut hi) = (0.0, upper);
            while hi - lo > 1e-15 * hi {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(k, m, mid) >= j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Right singular vector of `K − λM` for its smallest singular value.
pub fn null_vector(k: &DMatrix<f64>, m: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let svd = (k - m * lambda).svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    v_t.row(imin).transpose()
}

pub fn mac_vectors(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    dot * dot / (na * nb)
}

/// Central finite difference of `f` at `x` with step `h` per coordinate.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// Closed-form Euler-Bernoulli angular frequency for eigenvalue parameter `beta_l`.
pub fn euler_bernoulli_omega(beta_l: f64, length: f64, ei: f64, rho_a: f64) -> f64 {
    beta_l * beta_l / (length * length) * (ei / rho_a).sqrt()
}

/// Roots of `cos βL cosh βL = −1` (clamped-free) and `= 1` (free-free), first two each.
pub const CANTILEVER_BETA_L: [f64; 2] = [1.875104069, 4.694091133];
pub const FREE_FREE_BETA_L: [f64; 2] = [4.730040745, 7.853204624];
