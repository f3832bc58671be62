//! Dense linear algebra sized for tomography systems.
//!
//! Everything here operates on small dense matrices (at most a few hundred
//! rows): routing incidence systems, tree-asymmetry systems and the interior
//! point iterations built on them. The kernels are written out by hand so the
//! rank decisions and iteration order are exactly the documented ones; no
//! BLAS-style backend is involved.
//!
//! ```
//! use netomo_core::linsolve::{Matrix, min_norm_least_squares};
//!
//! // Two measurements of one unknown disagree; the least-squares value
//! // splits the difference.
//! let a = Matrix::from_rows(&[&[1.0], &[1.0]]);
//! let delta = min_norm_least_squares(&a, &[0.0, 2.0]).unwrap();
//! assert!((delta[0] - 1.0).abs() < 1e-12);
//! ```

mod decomp;
mod matrix;
mod qp;

pub use matrix::Matrix;
pub use qp::{solve_qp_barrier, IpmOptions, IpmState, QpProblem, QpSolution};

pub(crate) use decomp::{cholesky_decompose, cholesky_solve};
pub(crate) use matrix::norm2;

use decomp::{jacobi_eigen_sym, svd};

use alloc::vec::Vec;

/// Relative magnitude below which a dropped row of `Q z` still counts as
/// consistent in [`qr_row_reduce`], scaled by `max(1, ||z||)`.
pub const ROW_REDUCE_CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinError {
    #[error("matrix entry at ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("matrix is singular: {0}")]
    SingularSystem(&'static str),
    #[error("equality system is inconsistent (dropped component {0:.3e} exceeds tolerance)")]
    InconsistentSystem(f64),
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("no strictly feasible point found (best equality residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("interior point method did not converge within {0} iterations")]
    MaxIterations(usize),
}

fn ensure_finite(a: &Matrix) -> Result<(), LinError> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if !a[(i, j)].is_finite() {
                return Err(LinError::NonFinite(i, j));
            }
        }
    }
    Ok(())
}

/// Moore-Penrose pseudoinverse via SVD.
///
/// Singular values at or below `sigma_max * max(rows, cols) * f64::EPSILON`
/// are treated as zero, so rank decisions match [`qr_row_reduce`] and the
/// solvers built on this routine.
pub fn moore_penrose(a: &Matrix) -> Result<Matrix, LinError> {
    ensure_finite(a)?;
    let dec = svd(a);
    let tol = rank_threshold(a, &dec.sigma);
    let (m, n) = (a.rows(), a.cols());
    // A' = sum over kept singular triplets of v_i u_i^T / sigma_i.
    let mut pinv = Matrix::zeros(n, m);
    for (k, &sigma) in dec.sigma.iter().enumerate() {
        if sigma <= tol {
            continue;
        }
        for i in 0..n {
            let vi = dec.v[(i, k)] / sigma;
            if vi == 0.0 {
                continue;
            }
            for j in 0..m {
                pinv[(i, j)] += vi * dec.u[(j, k)];
            }
        }
    }
    Ok(pinv)
}

/// Minimum-norm least-squares solution of `A delta ~ eta`.
///
/// Among all minimizers of `||A delta - eta||` returns the one of smallest
/// Euclidean norm, i.e. the pseudoinverse applied to `eta`, without forming
/// the pseudoinverse.
pub fn min_norm_least_squares(a: &Matrix, eta: &[f64]) -> Result<Vec<f64>, LinError> {
    if eta.len() != a.rows() {
        return Err(LinError::DimensionMismatch(
            "right-hand side length must equal the row count",
        ));
    }
    ensure_finite(a)?;
    let dec = svd(a);
    let tol = rank_threshold(a, &dec.sigma);
    let mut x = alloc::vec![0.0; a.cols()];
    for (k, &sigma) in dec.sigma.iter().enumerate() {
        if sigma <= tol {
            continue;
        }
        let mut proj = 0.0;
        for j in 0..a.rows() {
            proj += dec.u[(j, k)] * eta[j];
        }
        let coeff = proj / sigma;
        for i in 0..a.cols() {
            x[i] += coeff * dec.v[(i, k)];
        }
    }
    Ok(x)
}

/// Outcome of [`qr_row_reduce`]: a full-row-rank system with the same
/// solution set as the input.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReduced {
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
    pub rank: usize,
}

/// Reduces `A x = z` to an equivalent full-row-rank system by one orthogonal
/// row transform.
///
/// A Householder QR with column pivoting supplies the transform; the retained
/// row count equals the SVD rank of `A`. The transform is applied to `z` as
/// well, and the components of `Q z` belonging to dropped (numerically zero)
/// rows must themselves be negligible, otherwise the system had no solution
/// and [`LinError::InconsistentSystem`] reports the offending magnitude.
pub fn qr_row_reduce(a: &Matrix, z: &[f64]) -> Result<RowReduced, LinError> {
    if z.len() != a.rows() {
        return Err(LinError::DimensionMismatch(
            "right-hand side length must equal the row count",
        ));
    }
    ensure_finite(a)?;
    let dec = svd(a);
    let tol = rank_threshold(a, &dec.sigma);
    let rank = dec.sigma.iter().filter(|&&s| s > tol).count();

    let qr = decomp::qr_pivoted(a);
    // Q^T A = R P^T: un-permute the columns of R.
    let mut reduced = Matrix::zeros(rank, a.cols());
    for i in 0..rank {
        for (k, &col) in qr.perm.iter().enumerate() {
            reduced[(i, col)] = qr.r[(i, k)];
        }
    }
    let qtz = qr.qt.matvec(z);
    let mut dropped_max = 0.0_f64;
    for &v in &qtz[rank..] {
        dropped_max = dropped_max.max(v.abs());
    }
    let mut z_norm = 0.0;
    for &v in z {
        z_norm += v * v;
    }
    let allowed = ROW_REDUCE_CONSISTENCY_TOL * libm::sqrt(z_norm).max(1.0);
    if dropped_max > allowed {
        return Err(LinError::InconsistentSystem(dropped_max));
    }
    Ok(RowReduced {
        matrix: reduced,
        rhs: qtz[..rank].to_vec(),
        rank,
    })
}

/// Smallest eigenvalue of a symmetric matrix, by cyclic Jacobi rotations.
pub fn smallest_eigenvalue(m: &Matrix) -> Result<f64, LinError> {
    if m.rows() != m.cols() {
        return Err(LinError::DimensionMismatch(
            "eigenvalues need a square matrix",
        ));
    }
    ensure_finite(m)?;
    let mut asym = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            scale = scale.max(m[(i, j)].abs());
        }
    }
    if asym > 1e-12 * scale.max(1.0) {
        return Err(LinError::NotSymmetric(asym));
    }
    let (eigenvalues, _) = jacobi_eigen_sym(m);
    eigenvalues
        .first()
        .copied()
        .ok_or(LinError::DimensionMismatch("matrix is empty"))
}

/// Rank cutoff shared by every routine in this module:
/// `sigma_max * max(m, n) * machine epsilon`.
fn rank_threshold(a: &Matrix, sigma: &[f64]) -> f64 {
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    sigma_max * (a.rows().max(a.cols()) as f64) * f64::EPSILON
}
