//! Undamped generalized eigenproblem `K φ = ω² M φ`.
//!
//! `M = L Lᵀ` reduces the pencil to the symmetric standard problem
//! `L⁻¹ K L⁻ᵀ y = λ y`, which is solved by Householder tridiagonalization followed
//! by implicit QL with accumulated rotations. Shapes come back as `φ = L⁻ᵀ y`, so
//! they are mass-normalized by construction.

use nalgebra::{DMatrix, DVector};

use super::assembly::SystemMatrices;
use super::modal::ModalData;
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// ω² below this fraction of the first elastic ω² is flagged rigid-body.
    pub rigid_body_ratio: f64,
    /// ω² below this fraction of the largest ω² counts as numerically zero when
    /// locating the first elastic mode.
    pub zero_floor: f64,
    /// Accepted relative residual for returned elastic modes.
    pub residual_tol: f64,
    /// QL iteration cap per eigenvalue.
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            rigid_body_ratio: 1e-6,
            zero_floor: 1e-11,
            residual_tol: 1e-8,
            max_iterations: 60,
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>, ModelError> {
    let n = a.nrows();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(ModelError::MassNotPositiveDefinite { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L X = B` in place for lower-triangular `L`.
fn forward_solve(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    let n = l.nrows();
    for c in 0..b.ncols() {
        for i in 0..n {
            let mut s = b[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * b[(k, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
    }
}

/// Solves `Lᵀ X = B` in place for lower-triangular `L`.
fn backward_solve_transposed(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    let n = l.nrows();
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = b[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * b[(k, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a symmetric matrix.
pub fn symmetric_eigen(a: &DMatrix<f64>, max_iterations: usize) -> Result<(Vec<f64>, DMatrix<f64>), ModelError> {
    let n = a.nrows();
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e, max_iterations)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.select_columns(&order);
    Ok((values, vectors))
}

// Householder reduction to tridiagonal form with accumulated transforms.
fn tridiagonalize(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d[..i].iter_mut() {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);
            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), rotating the columns of v along.
fn tridiagonal_ql(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64], max_iterations: usize) -> Result<(), ModelError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iterations {
                    return Err(ModelError::EigenNonConvergence {
                        iterations: iter - 1,
                        residual: e[l].abs() / tst1.max(f64::MIN_POSITIVE),
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s: f64 = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Relative residual `‖K φ − λ M φ‖ / ‖K φ‖`, falling back to `‖K‖·‖φ‖` for
/// (near-)null modes.
pub fn residual(matrices: &SystemMatrices, lambda: f64, phi: &DVector<f64>) -> f64 {
    let kphi = &matrices.stiffness * phi;
    let mphi = &matrices.mass * phi;
    let r = (&kphi - &mphi * lambda).norm();
    let floor = matrices.stiffness.amax() * phi.norm() * 1e-6;
    r / kphi.norm().max(floor)
}

/// Lowest `n_modes` eigenpairs of the pencil with default options.
pub fn solve_modes(matrices: &SystemMatrices, n_modes: usize) -> Result<ModalData, ModelError> {
    solve_modes_with(matrices, n_modes, &EigenOptions::default())
}

pub fn solve_modes_with(
    matrices: &SystemMatrices,
    n_modes: usize,
    opts: &EigenOptions,
) -> Result<ModalData, ModelError> {
    let n = matrices.dof_count;
    if n_modes > n {
        return Err(ModelError::TooManyModes {
            requested: n_modes,
            available: n,
        });
    }
    if n == 0 {
        return Err(ModelError::InvalidStructure("no free degrees of freedom".into()));
    }
    let l = cholesky(&matrices.mass)?;
    let mut a = matrices.stiffness.clone();
    forward_solve(&l, &mut a);
    a.transpose_mut();
    forward_solve(&l, &mut a);
    let a = (&a + a.transpose()) * 0.5;

    let (lambda, y) = symmetric_eigen(&a, opts.max_iterations)?;

    let lambda_max = lambda.last().copied().unwrap_or(0.0).max(0.0);
    let first_elastic = lambda
        .iter()
        .copied()
        .find(|&l| l > opts.zero_floor * lambda_max)
        .unwrap_or(lambda_max);
    let rigid_limit = opts.rigid_body_ratio * first_elastic;

    let mut shapes = y.columns(0, n_modes).into_owned();
    backward_solve_transposed(&l, &mut shapes);

    let mut rigid = Vec::with_capacity(n_modes);
    let mut frequencies = Vec::with_capacity(n_modes);
    for (i, &l) in lambda.iter().take(n_modes).enumerate() {
        let is_rigid = l < rigid_limit;
        if !is_rigid {
            let res = residual(matrices, l, &shapes.column(i).into_owned());
            if !(res <= opts.residual_tol) {
                return Err(ModelError::EigenNonConvergence {
                    iterations: opts.max_iterations,
                    residual: res,
                });
            }
        }
        rigid.push(is_rigid);
        frequencies.push(l.max(0.0).sqrt());
    }

    Ok(ModalData {
        frequencies,
        shapes,
        damping: vec![0.0; n_modes],
        coordinates: matrices.free_dofs.clone(),
        rigid_body: rigid,
    })
}
