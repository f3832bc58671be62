//! Log-barrier primal-dual path following for equality-constrained QPs with
//! nonnegative variables:
//!
//! ```text
//!     minimize   (1/2) x^T H x + c^T x
//!     subject to B x = b,   x >= 0
//! ```
//!
//! Each iteration solves the perturbed KKT conditions
//!
//! ```text
//!     B x = b
//!     B^T lambda + s - H x - c = 0
//!     X s = mu e
//! ```
//!
//! by a Newton step. With `K = H + X^{-1} S`, `g = s + r_d - mu X^{-1} e`
//! and `y = K^{-1} g` the increments are
//!
//! ```text
//!     d_lambda = (B K^{-1} B^T)^{-1} (B y - r_p)
//!     d_x      = K^{-1} B^T d_lambda - y
//!     d_s      = r_d + H d_x - B^T d_lambda
//! ```
//!
//! where `r_p = B x - b` and `r_d = H x + c - B^T lambda - s` are the primal
//! and dual residuals. With both residuals zero this is exactly the textbook
//! feasible-start iteration; carrying them lets the solver start from any
//! positive `(x, s)` with `lambda = 0`. The step keeps `x` and `s` strictly
//! positive with a fraction-to-boundary factor, and the barrier target is
//! driven by `mu = x^T s / (n + rho)` with `rho >= sqrt(n)`.

use alloc::vec::Vec;

use super::decomp::{cholesky_decompose, cholesky_solve};
use super::matrix::Matrix;
use super::{min_norm_least_squares, LinError};

/// Equality- and nonnegativity-constrained quadratic program.
#[derive(Debug, Clone)]
pub struct QpProblem {
    /// Symmetric positive semidefinite Hessian `H` (n x n).
    pub hessian: Matrix,
    /// Linear cost `c` (n).
    pub linear: Vec<f64>,
    /// Equality constraint matrix `B` (m x n), full row rank.
    pub constraints: Matrix,
    /// Equality right-hand side `b` (m).
    pub rhs: Vec<f64>,
}

impl QpProblem {
    pub fn new(
        hessian: Matrix,
        linear: Vec<f64>,
        constraints: Matrix,
        rhs: Vec<f64>,
    ) -> Result<Self, LinError> {
        let n = hessian.rows();
        if hessian.cols() != n {
            return Err(LinError::DimensionMismatch("Hessian must be square"));
        }
        if linear.len() != n {
            return Err(LinError::DimensionMismatch(
                "linear cost length must match the Hessian",
            ));
        }
        if constraints.cols() != n {
            return Err(LinError::DimensionMismatch(
                "constraint columns must match the Hessian",
            ));
        }
        if rhs.len() != constraints.rows() {
            return Err(LinError::DimensionMismatch(
                "constraint right-hand side length must match its rows",
            ));
        }
        let mut asym = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((hessian[(i, j)] - hessian[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * hessian.max_abs().max(1.0) {
            return Err(LinError::NotSymmetric(asym));
        }
        Ok(QpProblem {
            hessian,
            linear,
            constraints,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.hessian.rows()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let hx = self.hessian.matvec(x);
        let mut obj = 0.0;
        for i in 0..x.len() {
            obj += 0.5 * x[i] * hx[i] + self.linear[i] * x[i];
        }
        obj
    }
}

/// Interior point iteration controls.
#[derive(Debug, Clone)]
pub struct IpmOptions {
    /// Convergence tolerance on the duality measure and the residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Barrier divisor offset `rho`; defaults to `sqrt(n)` when `None`.
    pub rho: Option<f64>,
    /// Fraction of the step to the positivity boundary that may be taken.
    pub boundary_fraction: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            tol: 1e-8,
            max_iter: 200,
            rho: None,
            boundary_fraction: 0.995,
        }
    }
}

/// Primal-dual iterate.
#[derive(Debug, Clone)]
pub struct IpmState {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    /// Duality measure `x^T s / n` at the final iterate.
    pub mu: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub state: IpmState,
    pub objective: f64,
}

impl QpSolution {
    pub fn x(&self) -> &[f64] {
        &self.state.x
    }
}

/// Solves the QP by the path-following iteration described at module level.
///
/// Phase 1 finds a strictly positive point of `B x = b` (minimum-norm point
/// shifted along the null space toward `max(x, 1)`, then an artificial
/// variable fallback); `Infeasible` reports the best equality residual
/// achieved on failure.
pub fn solve_qp_barrier(problem: &QpProblem, opts: &IpmOptions) -> Result<QpSolution, LinError> {
    let x0 = strictly_feasible_point(&problem.constraints, &problem.rhs, opts)?;
    let x = path_follow(problem, x0, opts)?;
    let objective = problem.objective(&x.x);
    Ok(QpSolution {
        state: x,
        objective,
    })
}

fn path_follow(
    problem: &QpProblem,
    x0: Vec<f64>,
    opts: &IpmOptions,
) -> Result<IpmState, LinError> {
    let h = &problem.hessian;
    let b = &problem.constraints;
    let n = problem.num_vars();
    let m = b.rows();
    let rho = opts.rho.unwrap_or_else(|| libm::sqrt(n as f64));

    let mut x = x0;
    let mut lambda = alloc::vec![0.0; m];
    let hx0 = h.matvec(&x);
    let mut s: Vec<f64> = (0..n)
        .map(|i| (hx0[i] + problem.linear[i]).abs().max(1.0))
        .collect();

    for iter in 0..opts.max_iter {
        let hx = h.matvec(&x);
        let btl = b.tr_matvec(&lambda);
        let r_d: Vec<f64> = (0..n)
            .map(|i| hx[i] + problem.linear[i] - btl[i] - s[i])
            .collect();
        let bx = b.matvec(&x);
        let r_p: Vec<f64> = (0..m).map(|i| bx[i] - problem.rhs[i]).collect();

        let gap = if n == 0 {
            0.0
        } else {
            x.iter().zip(&s).map(|(xi, si)| xi * si).sum::<f64>() / n as f64
        };
        let r_p_max = r_p.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let r_d_max = r_d.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let scale = 1.0
            + hx.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
            + problem.linear.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if gap <= opts.tol && r_p_max <= opts.tol && r_d_max <= opts.tol * scale {
            return Ok(IpmState {
                x,
                lambda,
                s,
                mu: gap,
                iterations: iter,
            });
        }

        let mu_target = x.iter().zip(&s).map(|(xi, si)| xi * si).sum::<f64>() / (n as f64 + rho);

        // K = H + X^{-1} S, symmetric positive definite.
        let mut k = h.clone();
        for i in 0..n {
            k[(i, i)] += s[i] / x[i];
        }
        let l = factorize_spd(&k)?;

        let g: Vec<f64> = (0..n)
            .map(|i| s[i] + r_d[i] - mu_target / x[i])
            .collect();
        let y = cholesky_solve(&l, &g);

        // W = K^{-1} B^T, one solve per constraint row.
        let mut w = Matrix::zeros(n, m);
        for j in 0..m {
            let col: Vec<f64> = (0..n).map(|i| b[(j, i)]).collect();
            let sol = cholesky_solve(&l, &col);
            for i in 0..n {
                w[(i, j)] = sol[i];
            }
        }
        // M = B W = B K^{-1} B^T.
        let mut mmat = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for t in 0..n {
                    acc += b[(i, t)] * w[(t, j)];
                }
                mmat[(i, j)] = acc;
            }
        }
        // Symmetrize against rounding before factorizing.
        for i in 0..m {
            for j in (i + 1)..m {
                let avg = 0.5 * (mmat[(i, j)] + mmat[(j, i)]);
                mmat[(i, j)] = avg;
                mmat[(j, i)] = avg;
            }
        }
        let by = b.matvec(&y);
        let rhs_lambda: Vec<f64> = (0..m).map(|i| by[i] - r_p[i]).collect();
        let d_lambda = if m == 0 {
            Vec::new()
        } else {
            let lm = factorize_spd(&mmat)?;
            cholesky_solve(&lm, &rhs_lambda)
        };

        let mut d_x = w.matvec(&d_lambda);
        for i in 0..n {
            d_x[i] -= y[i];
        }
        let h_dx = h.matvec(&d_x);
        let bt_dl = b.tr_matvec(&d_lambda);
        let d_s: Vec<f64> = (0..n).map(|i| r_d[i] + h_dx[i] - bt_dl[i]).collect();

        let mut alpha_max = f64::INFINITY;
        for i in 0..n {
            if d_x[i] < 0.0 {
                alpha_max = alpha_max.min(-x[i] / d_x[i]);
            }
            if d_s[i] < 0.0 {
                alpha_max = alpha_max.min(-s[i] / d_s[i]);
            }
        }
        let alpha = (opts.boundary_fraction * alpha_max).min(1.0);

        for i in 0..n {
            x[i] += alpha * d_x[i];
            s[i] += alpha * d_s[i];
        }
        for i in 0..m {
            lambda[i] += alpha * d_lambda[i];
        }
    }
    Err(LinError::MaxIterations(opts.max_iter))
}

/// Cholesky with escalating diagonal regularization. Near a degenerate
/// optimum the smallest pivot of a mathematically positive definite
/// system can sink below the factorization's relative floor (free
/// coordinates of a singular Hessian drive `s_i / x_i` toward zero while
/// active ones blow the scale up). Boosting the diagonal restores
/// definiteness and only damps the one Newton step the factor feeds;
/// convergence is still judged on the exact residuals.
fn factorize_spd(a: &Matrix) -> Result<Matrix, LinError> {
    let plain = cholesky_decompose(a);
    if plain.is_ok() {
        return plain;
    }
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    let mut delta = 1e-13 * scale;
    for _ in 0..4 {
        let mut boosted = a.clone();
        for i in 0..n {
            boosted[(i, i)] += delta;
        }
        if let Ok(l) = cholesky_decompose(&boosted) {
            return Ok(l);
        }
        delta *= 1e3;
    }
    plain
}

/// Floor on phase-1 positivity, relative to the largest component.
const STRICT_POSITIVITY_FLOOR: f64 = 1e-10;

/// Finds `x > 0` with `B x = b`.
fn strictly_feasible_point(
    b_mat: &Matrix,
    b_rhs: &[f64],
    opts: &IpmOptions,
) -> Result<Vec<f64>, LinError> {
    let n = b_mat.cols();
    let x_mn = min_norm_least_squares(b_mat, b_rhs)?;
    let residual_of = |x: &[f64]| -> f64 {
        b_mat
            .matvec(x)
            .iter()
            .zip(b_rhs)
            .map(|(l, r)| (l - r) * (l - r))
            .sum::<f64>()
    };
    let base_residual = libm::sqrt(residual_of(&x_mn));
    let rhs_scale = b_rhs.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if base_residual > 1e-8 * rhs_scale {
        // Even unconstrained least squares cannot satisfy the equalities.
        return Err(LinError::Infeasible {
            residual: base_residual,
        });
    }

    // Project targets max(x_mn, t) onto the affine space; the projection is
    // x_mn plus a null-space shift, so equalities stay satisfied.
    for k in 0..6 {
        let t = libm::pow(10.0, k as f64);
        let target: Vec<f64> = x_mn.iter().map(|&v| v.max(t)).collect();
        let bt = b_mat.matvec(&target);
        let excess: Vec<f64> = bt.iter().zip(b_rhs).map(|(l, r)| l - r).collect();
        let correction = min_norm_least_squares(b_mat, &excess)?;
        let candidate: Vec<f64> = target
            .iter()
            .zip(&correction)
            .map(|(t, c)| t - c)
            .collect();
        if strictly_positive(&candidate) {
            return Ok(candidate);
        }
    }

    // Artificial-variable fallback: minimize t^2 over
    //   B x + t (b - B x_start) = b,  (x, t) >= 0
    // starting from the interior point (x_start, 1).
    let x_start: Vec<f64> = x_mn.iter().map(|&v| v.max(1.0)).collect();
    let bx_start = b_mat.matvec(&x_start);
    let m = b_mat.rows();
    let aug = Matrix::from_fn(m, n + 1, |i, j| {
        if j < n {
            b_mat[(i, j)]
        } else {
            b_rhs[i] - bx_start[i]
        }
    });
    let mut hess = Matrix::zeros(n + 1, n + 1);
    hess[(n, n)] = 2.0;
    let aug_problem = QpProblem {
        hessian: hess,
        linear: alloc::vec![0.0; n + 1],
        constraints: aug,
        rhs: b_rhs.to_vec(),
    };
    let mut x0 = x_start.clone();
    x0.push(1.0);
    let phase_opts = IpmOptions {
        tol: (opts.tol * 1e-2).max(1e-12),
        ..opts.clone()
    };
    let state = path_follow(&aug_problem, x0, &phase_opts).map_err(|e| match e {
        LinError::MaxIterations(k) => LinError::MaxIterations(k + 1000),
        other => other,
    })?;
    let (x_feas, theta) = (&state.x[..n], state.x[n]);
    // Remove the artificial component's contribution exactly.
    let bx = b_mat.matvec(x_feas);
    let excess: Vec<f64> = bx.iter().zip(b_rhs).map(|(l, r)| l - r).collect();
    let correction = min_norm_least_squares(b_mat, &excess)?;
    let candidate: Vec<f64> = x_feas
        .iter()
        .zip(&correction)
        .map(|(x, c)| x - c)
        .collect();
    if strictly_positive(&candidate) {
        return Ok(candidate);
    }
    let residual = theta.abs()
        * libm::sqrt(
            bx_start
                .iter()
                .zip(b_rhs)
                .map(|(l, r)| (l - r) * (l - r))
                .sum::<f64>(),
        );
    Err(LinError::Infeasible {
        residual: residual.max(libm::sqrt(residual_of(&candidate))),
    })
}

fn strictly_positive(x: &[f64]) -> bool {
    let scale = x.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    x.iter().all(|&v| v > STRICT_POSITIVITY_FLOOR * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls_problem(w: &[f64], b_mat: Matrix, rhs: Vec<f64>) -> QpProblem {
        // min ||x - w||^2 written as (1/2) x^T (2 I) x - 2 w^T x + const.
        let n = w.len();
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = 2.0;
        }
        let c: Vec<f64> = w.iter().map(|&v| -2.0 * v).collect();
        QpProblem::new(h, c, b_mat, rhs).unwrap()
    }

    #[test]
    fn projects_onto_simplex_segment() {
        // min ||x - (3, -1)||^2 with x1 + x2 = 2, x >= 0: optimum (2, 0).
        let p = ls_problem(&[3.0, -1.0], Matrix::from_rows(&[&[1.0, 1.0]]), alloc::vec![2.0]);
        let sol = solve_qp_barrier(&p, &IpmOptions::default()).unwrap();
        assert!((sol.x()[0] - 2.0).abs() < 1e-6);
        assert!(sol.x()[1].abs() < 1e-6);
        assert!(sol.x()[1] >= 0.0);
    }

    #[test]
    fn interior_optimum_matches_unconstrained_projection() {
        // Projecting (2, 1) onto x1 + x2 = 2 gives (1.5, 0.5), which stays
        // positive, so the equality alone binds.
        let p = ls_problem(&[2.0, 1.0], Matrix::from_rows(&[&[1.0, 1.0]]), alloc::vec![2.0]);
        let sol = solve_qp_barrier(&p, &IpmOptions::default()).unwrap();
        assert!((sol.x()[0] - 1.5).abs() < 1e-6);
        assert!((sol.x()[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn reports_infeasible_when_no_nonnegative_solution_exists() {
        // x1 + x2 = -1 has no nonnegative solution.
        let p = ls_problem(&[1.0, 1.0], Matrix::from_rows(&[&[1.0, 1.0]]), alloc::vec![-1.0]);
        match solve_qp_barrier(&p, &IpmOptions::default()) {
            Err(LinError::Infeasible { .. }) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn equality_residual_meets_tolerance() {
        let p = ls_problem(
            &[0.3, -0.2, 1.7],
            Matrix::from_rows(&[&[1.0, 2.0, 0.5]]),
            alloc::vec![3.0],
        );
        let sol = solve_qp_barrier(&p, &IpmOptions::default()).unwrap();
        let bx = p.constraints.matvec(sol.x());
        assert!((bx[0] - 3.0).abs() < 1e-8);
        assert!(sol.x().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn unconstrained_nonnegative_least_squares() {
        // No equality rows at all: clamp each coordinate at zero.
        let p = ls_problem(&[2.0, -3.0], Matrix::zeros(0, 2), Vec::new());
        let sol = solve_qp_barrier(&p, &IpmOptions::default()).unwrap();
        assert!((sol.x()[0] - 2.0).abs() < 1e-5);
        assert!(sol.x()[1].abs() < 1e-5);
    }
}
