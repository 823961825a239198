//! Primal reference solver for small instances.
//!
//! Minimizes the entropy over `{xi in box interior : A xi = y}` directly in
//! the primal: a feasible interior start, projected gradient on the affine
//! feasible set, then Newton on kernel coordinates. It evaluates the entropy
//! and its derivatives from their own formulas and uses none of the dual
//! machinery, so it can cross-check [`crate::solver::solve`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::problem::InverseProblem;

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 64;
/// Feasibility required of a returned point.
pub const ORACLE_FEASIBILITY_TOL: f64 = 1e-9;
/// Interior margin, relative to the box width, kept by gradient steps.
const STEP_MARGIN: f64 = 1e-9;
const GRADIENT_ITERS: usize = 60;
const NEWTON_ITERS: usize = 100;
const PHASE_ONE_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// Started from the projected midpoint.
    ProjectedGradient,
    /// Needed a barrier Newton phase to find an interior feasible start.
    LogBarrierNewton,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            OracleMethod::ProjectedGradient => "projected-gradient",
            OracleMethod::LogBarrierNewton => "log-barrier-newton",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub xi: DVector<f64>,
    /// Entropy at `xi`.
    pub objective: f64,
    /// Infinity norm of the entropy gradient projected onto `ker(A)`.
    pub kkt_residual: f64,
    pub method: OracleMethod,
}

/// Box data and constraints in the orthonormal form `Q xi = c`, `Q Q^t = I`.
struct Setup {
    lower: DVector<f64>,
    upper: DVector<f64>,
    q: DMatrix<f64>,
    c: DVector<f64>,
    /// Columns span `ker(A)`.
    kernel: DMatrix<f64>,
}

impl Setup {
    fn new(problem: &InverseProblem) -> Result<Self> {
        let a = problem.matrix();
        let y = problem.datum();
        let (k, n) = a.shape();
        let svd = a.clone().svd(true, true);
        let u = svd.u.as_ref().expect("u requested");
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let smax = svd.singular_values.max();
        let cut = k.max(n) as f64 * f64::EPSILON * smax;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > cut)
            .collect();
        let r = keep.len();
        let q = DMatrix::from_fn(r, n, |i, j| v_t[(keep[i], j)]);
        let u_r = DMatrix::from_fn(k, r, |i, c| u[(i, keep[c])]);
        let uy = u_r.transpose() * y;
        let inconsistency = (y - &u_r * &uy).norm();
        if inconsistency > 1e-9 * (1.0 + y.norm()) {
            return Err(Error::OracleInfeasible(format!(
                "datum is not in the range of A (distance {inconsistency:e})"
            )));
        }
        let c = DVector::from_fn(r, |i, _| uy[i] / svd.singular_values[keep[i]]);
        let kernel = if r == n {
            DMatrix::zeros(n, 0)
        } else {
            let complement = DMatrix::identity(n, n) - q.transpose() * &q;
            let eig = SymmetricEigen::new(complement);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
            DMatrix::from_fn(n, n - r, |i, col| eig.eigenvectors[(i, idx[col])])
        };
        Ok(Self {
            lower: problem.domain().lower().clone(),
            upper: problem.domain().upper().clone(),
            q,
            c,
            kernel,
        })
    }

    fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    fn inside(&self, x: &DVector<f64>, margin: f64) -> bool {
        (0..x.len()).all(|j| {
            let m = margin * self.width(j);
            x[j] - self.lower[j] > m && self.upper[j] - x[j] > m
        })
    }

    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        x - self.q.transpose() * (&self.q * x - &self.c)
    }

    /// `sum_j p ln p + q ln q`, `p = (x - a)/D`, `q = (b - x)/D`.
    fn entropy(&self, x: &DVector<f64>) -> f64 {
        (0..x.len())
            .map(|j| {
                let d = self.width(j);
                let p = (x[j] - self.lower[j]) / d;
                let q = (self.upper[j] - x[j]) / d;
                p * p.ln() + q * q.ln()
            })
            .sum()
    }

    fn entropy_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |j, _| {
            ((x[j] - self.lower[j]) / (self.upper[j] - x[j])).ln() / self.width(j)
        })
    }

    fn entropy_curvature(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |j, _| 1.0 / ((x[j] - self.lower[j]) * (self.upper[j] - x[j])))
    }
}

/// Infeasible-start Newton on the log barrier `-sum ln(x - a) + ln(b - x)`
/// subject to `Q x = c`, from the box midpoint. Each step keeps the iterate
/// strictly inside the box and cuts the constraint residual by the step
/// fraction, so the loop ends feasible unless the feasible set has no
/// interior, in which case steps shrink until the iteration gives up.
fn barrier_start(setup: &Setup) -> Result<DVector<f64>> {
    let n = setup.lower.len();
    let mut x = DVector::from_fn(n, |j, _| 0.5 * (setup.lower[j] + setup.upper[j]));
    for _ in 0..PHASE_ONE_ITERS {
        let residual = &setup.q * &x - &setup.c;
        if residual.amax() <= 1e-13 * (1.0 + setup.c.amax()) {
            let x = setup.project(&x);
            if setup.inside(&x, 0.0) {
                return Ok(x);
            }
        }
        let grad = DVector::from_fn(n, |j, _| -1.0 / (x[j] - setup.lower[j]) + 1.0 / (setup.upper[j] - x[j]));
        let hinv = DVector::from_fn(n, |j, _| {
            let lo = x[j] - setup.lower[j];
            let hi = setup.upper[j] - x[j];
            1.0 / (1.0 / (lo * lo) + 1.0 / (hi * hi))
        });
        let mut qhq = setup.q.clone();
        for (j, mut col) in qhq.column_iter_mut().enumerate() {
            col *= hinv[j];
        }
        let schur = &qhq * setup.q.transpose();
        let rhs = &residual - &qhq * &grad;
        let w = schur
            .cholesky()
            .ok_or_else(|| Error::OracleInfeasible("barrier system is singular".into()))?
            .solve(&rhs);
        let dx = -(&grad + setup.q.transpose() * &w).component_mul(&hinv);
        let mut t = 1.0;
        while !setup.inside(&(&x + &dx * t), 0.0) {
            t *= 0.5;
            if t < 1e-14 {
                return Err(Error::OracleInfeasible(
                    "no interior point satisfies the constraints".into(),
                ));
            }
        }
        x += dx * t;
    }
    Err(Error::OracleInfeasible(format!(
        "no interior feasible point after {PHASE_ONE_ITERS} barrier steps"
    )))
}

/// Largest step in `[0, cap]` keeping `x + s d` inside the box with `margin`.
fn max_interior_step(setup: &Setup, x: &DVector<f64>, d: &DVector<f64>, margin: f64, cap: f64) -> f64 {
    let mut s = cap;
    for j in 0..x.len() {
        let m = margin * setup.width(j);
        if d[j] > 0.0 {
            s = s.min((setup.upper[j] - m - x[j]) / d[j]);
        } else if d[j] < 0.0 {
            s = s.min((setup.lower[j] + m - x[j]) / d[j]);
        }
    }
    s.max(0.0)
}

fn reduced_grad(setup: &Setup, x: &DVector<f64>) -> DVector<f64> {
    setup.kernel.transpose() * setup.entropy_grad(x)
}

/// Solves the instance by the primal route.
pub fn oracle_solve(problem: &InverseProblem) -> Result<OracleResult> {
    let n = problem.cols();
    if n > ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "oracle is limited to {ORACLE_MAX_DIM} unknowns, got {n}"
        )));
    }
    let setup = Setup::new(problem)?;
    let midpoint = DVector::from_fn(n, |j, _| 0.5 * (setup.lower[j] + setup.upper[j]));
    let projected = setup.project(&midpoint);
    let (mut x, method) = if setup.inside(&projected, STEP_MARGIN) {
        (projected, OracleMethod::ProjectedGradient)
    } else {
        (barrier_start(&setup)?, OracleMethod::LogBarrierNewton)
    };

    if setup.kernel.ncols() > 0 {
        // Projected gradient with decreasing trial steps.
        let min_width = (0..n).map(|j| setup.width(j)).fold(f64::INFINITY, f64::min);
        for k in 0..GRADIENT_ITERS {
            let gr = reduced_grad(&setup, &x);
            if gr.amax() <= 1e-6 {
                break;
            }
            let d = -(&setup.kernel * &gr);
            let trial = min_width * min_width / (k as f64 + 1.0).sqrt();
            let mut s = max_interior_step(&setup, &x, &d, STEP_MARGIN, trial);
            let f0 = setup.entropy(&x);
            let slope = -gr.norm_squared();
            while s > 0.0 && setup.entropy(&(&x + &d * s)) > f0 + 1e-4 * s * slope {
                s *= 0.5;
                if s < 1e-18 {
                    s = 0.0;
                }
            }
            if s == 0.0 {
                break;
            }
            x += d * s;
        }

        // Newton on kernel coordinates.
        for _ in 0..NEWTON_ITERS {
            let gr = reduced_grad(&setup, &x);
            let curv = setup.entropy_curvature(&x);
            let mut zc = setup.kernel.clone();
            for (j, mut row) in zc.row_iter_mut().enumerate() {
                row *= curv[j];
            }
            let hess = setup.kernel.transpose() * zc;
            let Some(chol) = hess.cholesky() else { break };
            let ds = -chol.solve(&gr);
            let decrement = -gr.dot(&ds);
            if !(decrement > 1e-30) {
                break;
            }
            let d = &setup.kernel * &ds;
            let mut s = max_interior_step(&setup, &x, &d, 0.0, 1.0);
            if s < 1.0 {
                s *= 0.99;
            }
            let f0 = setup.entropy(&x);
            let noise = 64.0 * f64::EPSILON * (1.0 + f0.abs());
            loop {
                let cand = &x + &d * s;
                let f1 = setup.entropy(&cand);
                if f1 <= f0 - 1e-4 * s * decrement || decrement * s < noise {
                    break;
                }
                s *= 0.5;
                if s < 1e-16 {
                    break;
                }
            }
            if s < 1e-16 {
                break;
            }
            x += d * s;
            // Keep rounding drift off the constraint set.
            let back = setup.project(&x);
            if setup.inside(&back, 0.0) {
                x = back;
            }
        }
    }

    let feasibility = (problem.matrix() * &x - problem.datum()).amax();
    if !(feasibility <= ORACLE_FEASIBILITY_TOL) || !setup.inside(&x, 0.0) {
        return Err(Error::OracleInfeasible(format!(
            "final point violates the constraints by {feasibility:e}"
        )));
    }
    let kkt_residual = if setup.kernel.ncols() == 0 {
        0.0
    } else {
        reduced_grad(&setup, &x).amax()
    };
    Ok(OracleResult {
        objective: setup.entropy(&x),
        xi: x,
        kkt_residual,
        method,
    })
}
