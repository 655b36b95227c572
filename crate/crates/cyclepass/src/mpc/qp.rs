//! Dense box-constrained quadratic programs and a projected accelerated
//! gradient solver.
//!
//! Problems have the form
//!
//! ```text
//! min  0.5 u' H u + g' u + constant
//! s.t. lb <= u <= ub   (elementwise)
//! ```
//!
//! with H symmetric positive semidefinite. The solver is FISTA with
//! gradient-based adaptive restart and backtracking on the step size;
//! projection onto a box is a clamp, so an iteration costs two
//! matrix-vector products. Convergence is declared on the
//! projected-gradient fixed-point residual, which is zero exactly at a
//! KKT point.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct BoxQp {
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
    pub lb: DVector<f64>,
    pub ub: DVector<f64>,
    /// Constant cost offset, carried so objectives match the modeled cost.
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub u: DVector<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BoxQp {
    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        0.5 * (&self.h * u).dot(u) + self.g.dot(u) + self.constant
    }

    pub fn project(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(u.len(), |i, _| u[i].clamp(self.lb[i], self.ub[i]))
    }

    /// Infinity norm of `u - proj(u - grad(u))`; zero iff `u` satisfies the
    /// KKT conditions of the box problem.
    pub fn kkt_residual(&self, u: &DVector<f64>) -> f64 {
        let grad = &self.h * u + &self.g;
        let step = self.project(&(u - grad));
        (u - step).amax()
    }

    /// Estimate of the largest eigenvalue of H: power iteration tightened
    /// against the Gershgorin row-sum bound. An estimate, not a bound; the
    /// solver's backtracking corrects any remaining underestimate.
    fn lipschitz(&self) -> f64 {
        let n = self.h.nrows();
        let gersh = (0..n)
            .map(|i| self.h.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        if gersh <= 0.0 {
            return 1e-12;
        }
        // a non-uniform start: the all-ones vector is an exact eigenvector
        // of any rescaled 2x2 problem, and not the dominant one when the
        // coupling is negative
        let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * (1.0 + i as f64).sin());
        v /= v.norm();
        let mut lambda = 0.0f64;
        for _ in 0..100 {
            let w = &self.h * &v;
            let norm = w.norm();
            if norm <= 1e-300 {
                break;
            }
            v = w / norm;
            let next = (&self.h * &v).dot(&v);
            if (next - lambda).abs() <= 1e-12 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        (lambda * 1.1).min(gersh).max(1e-12)
    }
}

/// Solve a box QP to the given fixed-point tolerance.
///
/// The iteration runs on a Jacobi-rescaled copy of the problem (diagonal
/// scaling keeps the feasible set a box), while the convergence test and
/// the reported residual use the original variables. The step size starts
/// from an eigenvalue estimate and backtracks whenever the measured
/// curvature along a step exceeds it, so convergence does not depend on
/// the estimate being an upper bound. Always returns the best iterate
/// found; `converged` reports whether the residual dropped below `tol`
/// within `max_iter` iterations.
pub fn solve_box_qp(qp: &BoxQp, tol: f64, max_iter: usize) -> QpSolution {
    let n = qp.g.len();
    let d = DVector::from_fn(n, |i, _| qp.h[(i, i)].max(1e-12).sqrt());
    let dinv = d.map(|v| 1.0 / v);
    let scaled = BoxQp {
        h: DMatrix::from_fn(n, n, |i, j| qp.h[(i, j)] * dinv[i] * dinv[j]),
        g: qp.g.component_mul(&dinv),
        lb: qp.lb.component_mul(&d),
        ub: qp.ub.component_mul(&d),
        constant: qp.constant,
    };
    let mut lip = scaled.lipschitz();

    // residual of the original problem at a scaled-space iterate, reusing
    // the scaled gradient: H u + g = d .* (Hs x) + g
    let residual_at = |x: &DVector<f64>, grad_s: &DVector<f64>| -> f64 {
        let u = x.component_mul(&dinv);
        let grad = grad_s.component_mul(&d) + &qp.g;
        (&u - qp.project(&(&u - grad))).amax()
    };

    let finish = |x: DVector<f64>, res: f64, k: usize, conv: bool| -> QpSolution {
        let u = x.component_mul(&dinv);
        QpSolution {
            objective: qp.objective(&u),
            kkt_residual: res,
            iterations: k,
            converged: conv,
            u,
        }
    };

    let mut x_prev = scaled.project(&DVector::zeros(n));
    let res0 = residual_at(&x_prev, &(&scaled.h * &x_prev));
    if res0 <= tol {
        return finish(x_prev, res0, 0, true);
    }

    let mut y = x_prev.clone();
    let mut t = 1.0f64;
    let mut best = x_prev.clone();
    let mut best_res = res0;

    for k in 1..=max_iter {
        let grad_y = &scaled.h * &y + &scaled.g;
        // backtracking: the quadratic model with curvature `lip` must
        // majorize the objective along the step actually taken, otherwise
        // the step is too long for this Hessian and `lip` doubles
        let (x, grad_s) = loop {
            let x = scaled.project(&(&y - (1.0 / lip) * &grad_y));
            let grad_s = &scaled.h * &x;
            let dx = &x - &y;
            let curvature = dx.dot(&(&grad_s + &scaled.g - &grad_y));
            if curvature <= lip * dx.norm_squared() * (1.0 + 1e-12) + f64::MIN_POSITIVE {
                break (x, grad_s);
            }
            lip *= 2.0;
        };
        let res = residual_at(&x, &grad_s);
        if res < best_res {
            best_res = res;
            best.copy_from(&x);
        }
        if res <= tol {
            return finish(x, res, k, true);
        }
        let momentum = &x - &x_prev;
        if (&y - &x).dot(&momentum) > 0.0 {
            // momentum points uphill: restart
            t = 1.0;
            y.copy_from(&x);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &x + ((t - 1.0) / t_next) * momentum;
            t = t_next;
        }
        x_prev = x;
    }

    finish(best, best_res, max_iter, false)
}
