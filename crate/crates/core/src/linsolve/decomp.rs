//! Factorizations: one-sided Jacobi SVD, pivoted Householder QR, cyclic
//! Jacobi eigendecomposition, Cholesky. All deterministic: fixed sweep
//! orders, ties broken by lowest index.

use alloc::vec::Vec;

use super::matrix::{dot, norm2, Matrix};
use super::LinError;

const MAX_JACOBI_SWEEPS: usize = 64;

/// Thin SVD `A = U diag(sigma) V^T` with `k = min(rows, cols)` columns.
/// Singular values are sorted descending. Columns of `U` belonging to zero
/// singular values are zero vectors; consumers must skip entries below their
/// rank threshold.
pub(crate) struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

pub(crate) fn svd(a: &Matrix) -> Svd {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.transpose());
        Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    }
}

/// One-sided Jacobi on a matrix with `rows >= cols`: rotates column pairs
/// until all are mutually orthogonal, which yields `A V = U diag(sigma)`.
fn svd_tall(a: &Matrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    // Work on columns: b[j] is the j-th column of the evolving matrix.
    let mut b: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v = Matrix::identity(n);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&b[p], &b[p]);
                let beta = dot(&b[q], &b[q]);
                let gamma = dot(&b[p], &b[q]);
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let bp = b[p][i];
                    let bq = b[q][i];
                    b[p][i] = c * bp - s * bq;
                    b[q][i] = s * bp + c * bq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = b.iter().map(|col| norm2(col)).collect();
    // Descending by magnitude; stable on ties.
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut u = Matrix::zeros(m, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut sigma = alloc::vec![0.0; n];
    for (k, &src) in order.iter().enumerate() {
        sigma[k] = norms[src];
        if norms[src] > 0.0 {
            for i in 0..m {
                u[(i, k)] = b[src][i] / norms[src];
            }
        }
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, src)];
        }
    }
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// Householder QR with column pivoting: `A P = Q R`.
pub(crate) struct PivotedQr {
    /// Upper-trapezoidal factor, in pivoted column order.
    pub r: Matrix,
    /// `Q^T`, accumulated explicitly.
    pub qt: Matrix,
    /// `perm[k]` is the original column index placed at position `k`.
    pub perm: Vec<usize>,
}

pub(crate) fn qr_pivoted(a: &Matrix) -> PivotedQr {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut qt = Matrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();

    let steps = m.min(n);
    for k in 0..steps {
        // Pivot: bring the remaining column of largest norm to position k.
        let mut best = k;
        let mut best_norm = 0.0_f64;
        for j in k..n {
            let mut s = 0.0;
            for i in k..m {
                s += r[(i, j)] * r[(i, j)];
            }
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, best)];
                r[(i, best)] = tmp;
            }
            perm.swap(k, best);
        }

        // Householder reflector annihilating r[k+1.., k].
        let mut x_norm_sq = 0.0;
        for i in k..m {
            x_norm_sq += r[(i, k)] * r[(i, k)];
        }
        let x_norm = libm::sqrt(x_norm_sq);
        if x_norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -x_norm } else { x_norm };
        let mut v = alloc::vec![0.0; m];
        v[k] = r[(k, k)] - alpha;
        for i in (k + 1)..m {
            v[i] = r[(i, k)];
        }
        let v_norm_sq = dot(&v[k..], &v[k..]);
        if v_norm_sq == 0.0 {
            continue;
        }
        let scale = 2.0 / v_norm_sq;

        // Apply H = I - scale * v v^T from the left to R and Q^T.
        for j in k..n {
            let mut proj = 0.0;
            for i in k..m {
                proj += v[i] * r[(i, j)];
            }
            let proj = proj * scale;
            for i in k..m {
                r[(i, j)] -= proj * v[i];
            }
        }
        for j in 0..m {
            let mut proj = 0.0;
            for i in k..m {
                proj += v[i] * qt[(i, j)];
            }
            let proj = proj * scale;
            for i in k..m {
                qt[(i, j)] -= proj * v[i];
            }
        }
        r[(k, k)] = alpha;
        for i in (k + 1)..m {
            r[(i, k)] = 0.0;
        }
    }
    PivotedQr { r, qt, perm }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with matching eigenvector columns.
pub(crate) fn jacobi_eigen_sym(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.rows();
    let mut a = m.clone();
    let mut vecs = Matrix::identity(n);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        let scale = a.max_abs().max(1e-300);
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;

                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - s * aqj;
                    a[(q, j)] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = vecs[(i, p)];
                    let viq = vecs[(i, q)];
                    vecs[(i, p)] = c * vip - s * viq;
                    vecs[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut sorted_vecs = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vecs[(i, k)] = vecs[(i, src)];
        }
    }
    (values, sorted_vecs)
}

/// Cholesky factor `L` (lower triangular) of a symmetric positive definite
/// matrix, or `SingularSystem` when a pivot collapses.
pub(crate) fn cholesky_decompose(a: &Matrix) -> Result<Matrix, LinError> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "Cholesky needs a square matrix");
    let mut l = Matrix::zeros(n, n);
    let scale = a.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if acc <= 1e-14 * scale {
                    return Err(LinError::SingularSystem(
                        "Cholesky pivot vanished; matrix is not positive definite",
                    ));
                }
                l[(i, j)] = libm::sqrt(acc);
            } else {
                l[(i, j)] = acc / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the Cholesky factor.
pub(crate) fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    debug_assert_eq!(b.len(), n);
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[(i, k)] * y[k];
        }
        y[i] = acc / l[(i, i)];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in (i + 1)..n {
            acc -= l[(k, i)] * x[k];
        }
        x[i] = acc / l[(i, i)];
    }
    x
}
