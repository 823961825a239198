//! Entropy minimization through its concave dual.
//!
//! The minimizer of `Psi` over `{xi in Omega : A xi = y}` is `xi* = phi(A^t lambda*)`
//! where `lambda*` maximizes
//!
//! ```text
//! Sigma(lambda) = <lambda, y> - M(A^t lambda)
//! ```
//!
//! over `R^K`. The gradient is `y - A phi(A^t lambda)` and the Hessian is
//! `-G(lambda)` with `G = A h(A^t lambda) A^t`, so the ascent below is a damped
//! Newton method with Armijo backtracking, started from `lambda = 0`.
//! At the optimum `Psi(xi*) = Sigma(lambda*)`; the difference is reported as the
//! duality gap.

use nalgebra::{DMatrix, DVector};

use crate::entropy::{entropy_psi, hessian_m, log_partition, phi, InteriorPoint, TauPoint};
use crate::error::{check_finite, check_len, Error, Result};
use crate::geometry::induced_metric_g;
use crate::linalg::{damped_spd_solve, RowSpace};
use crate::problem::InverseProblem;

/// Largest Tikhonov shift tried, relative to the Newton matrix diagonal.
const DAMPING_CEILING: f64 = 1e8;
/// Backtracking gives up below this step length.
const MIN_STEP: f64 = 1e-16;
/// Newton polishing steps taken after the residual first meets tolerance.
const POLISH_STEPS: usize = 2;

/// Outcome class of a dual solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// The multipliers diverge: `y` is not an interior point of `A(K)`.
    InfeasibleDatum,
    /// No damping level produced an ascent step.
    RankDeficient,
    IterationLimit,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::InfeasibleDatum => "InfeasibleDatum",
            SolveStatus::RankDeficient => "RankDeficient",
            SolveStatus::IterationLimit => "IterationLimit",
        }
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub lambda_star: DVector<f64>,
    pub xi_star: InteriorPoint,
    /// `Psi(xi*)`.
    pub psi_value: f64,
    /// `<lambda*, y> - M(A^t lambda*)`.
    pub dual_value: f64,
    /// `psi_value - dual_value`.
    pub gap: f64,
    /// `||A xi* - y||_inf`.
    pub residual_inf: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl DualSolution {
    pub fn is_converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// `Sigma(lambda)` and its gradient `y - A phi(A^t lambda)`.
pub fn dual_objective(lambda: &DVector<f64>, problem: &InverseProblem) -> Result<(f64, DVector<f64>)> {
    problem.check_multiplier(lambda)?;
    let a = problem.matrix();
    let tau = TauPoint::new(a.transpose() * lambda)?;
    let value = lambda.dot(problem.datum()) - log_partition(&tau, problem.domain())?;
    let xi = phi(&tau, problem.domain())?;
    let gradient = problem.datum() - a * xi.coords();
    Ok((value, gradient))
}

/// The surface chart `S(lambda) = phi(A^t lambda)`.
pub fn solution_surface_point(lambda: &DVector<f64>, problem: &InverseProblem) -> Result<InteriorPoint> {
    problem.check_multiplier(lambda)?;
    phi(&TauPoint::new(problem.matrix().transpose() * lambda)?, problem.domain())
}

fn finish(
    lambda: DVector<f64>,
    problem: &InverseProblem,
    iterations: usize,
    status: SolveStatus,
) -> Result<DualSolution> {
    let (dual_value, gradient) = dual_objective(&lambda, problem)?;
    let xi_star = solution_surface_point(&lambda, problem)?;
    let psi_value = entropy_psi(&xi_star, problem.domain())?;
    Ok(DualSolution {
        lambda_star: lambda,
        xi_star,
        psi_value,
        dual_value,
        gap: psi_value - dual_value,
        residual_inf: gradient.amax(),
        iterations,
        status,
    })
}

/// Projects a rank-deficient problem's Newton direction back onto the row space
/// of `A`, keeping the multiplier at minimum norm.
fn restrict_to_range(step: DVector<f64>, row_space_of_at: Option<&RowSpace>) -> DVector<f64> {
    match row_space_of_at {
        Some(rs) => rs.project(&step),
        None => step,
    }
}

/// Maximizes the dual by damped Newton ascent.
///
/// Statuses other than `Converged` are reported in the returned solution, which
/// then carries the last iterate. Errors are reserved for malformed input.
pub fn solve(problem: &InverseProblem) -> Result<DualSolution> {
    let opts = *problem.options();
    let k = problem.rows();
    // For rank-deficient A the multipliers are only determined modulo ker(A^t);
    // steps are kept in range(A) so lambda stays the minimum-norm multiplier.
    let a_range = RowSpace::new(&problem.matrix().transpose());
    let projector = (a_range.rank() < k).then_some(&a_range);

    let mut lambda = DVector::zeros(k);
    let (mut value, mut grad) = dual_objective(&lambda, problem)?;
    let mut polished = 0;
    for iter in 0..opts.max_iter {
        let grad_norm = grad.amax();
        if grad_norm <= opts.grad_tol {
            if polished >= POLISH_STEPS {
                return finish(lambda, problem, iter, SolveStatus::Converged);
            }
            polished += 1;
        }
        if lambda.norm() > opts.divergence_norm {
            return finish(lambda, problem, iter, SolveStatus::InfeasibleDatum);
        }

        let metric = induced_metric_g(&lambda, problem)?.matrix;
        let step = match damped_spd_solve(&metric, &grad, opts.damping_floor, DAMPING_CEILING) {
            Some((step, _mu)) => restrict_to_range(step, projector),
            None => return finish(lambda, problem, iter, SolveStatus::RankDeficient),
        };
        let (step, slope) = {
            let slope = grad.dot(&step);
            if slope > 0.0 && step.iter().all(|v| v.is_finite()) {
                (step, slope)
            } else {
                // Gradient ascent fallback.
                let s = grad.dot(&grad);
                (grad.clone(), s)
            }
        };

        // Once the predicted increase is below the rounding level of Sigma the
        // Armijo test is meaningless; take the full Newton step.
        let noise = 64.0 * f64::EPSILON * (1.0 + value.abs());
        let mut alpha = 1.0;
        let accepted = loop {
            let trial = &lambda + &step * alpha;
            let (trial_value, trial_grad) = dual_objective(&trial, problem)?;
            if slope * alpha <= noise {
                if trial_grad.amax() <= grad_norm || alpha == 1.0 {
                    break Some((trial, trial_value, trial_grad));
                }
            } else if trial_value.is_finite() && trial_value >= value + opts.armijo_c * alpha * slope {
                break Some((trial, trial_value, trial_grad));
            }
            alpha *= opts.backtrack;
            if alpha < MIN_STEP {
                break None;
            }
        };
        match accepted {
            Some((next, next_value, next_grad)) => {
                lambda = next;
                value = next_value;
                grad = next_grad;
            }
            None => {
                // No ascent along the step: either converged to rounding level
                // or the problem is degenerate.
                let status = if grad_norm <= opts.grad_tol {
                    SolveStatus::Converged
                } else {
                    SolveStatus::RankDeficient
                };
                return finish(lambda, problem, iter, status);
            }
        }
    }
    let status = if grad.amax() <= opts.grad_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::IterationLimit
    };
    finish(lambda, problem, opts.max_iter, status)
}

/// `Psi(xi*) - (<lambda*, y> - M(A^t lambda*))`, recomputed from the solution.
pub fn duality_gap(solution: &DualSolution, problem: &InverseProblem) -> Result<f64> {
    let (dual, _) = dual_objective(&solution.lambda_star, problem)?;
    Ok(entropy_psi(&solution.xi_star, problem.domain())? - dual)
}

/// Result of [`feasibility_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    InteriorCertified,
    BoundaryOrExterior,
    Unknown,
}

/// The interval `A(K)` for a single-row matrix.
pub fn attainable_interval(row: &[f64], lower: &[f64], upper: &[f64]) -> (f64, f64) {
    row.iter()
        .zip(lower.iter().zip(upper))
        .fold((0.0, 0.0), |(lo, hi), (&c, (&a, &b))| {
            let (x, y) = (c * a, c * b);
            (lo + x.min(y), hi + x.max(y))
        })
}

/// Decides whether `y` lies in the interior of `A(K)` where this is cheap:
/// exactly for `K = 1`, otherwise only if a solve converges.
pub fn feasibility_probe(problem: &InverseProblem) -> Feasibility {
    if problem.rows() == 1 {
        let row: Vec<f64> = problem.matrix().row(0).iter().copied().collect();
        let domain = problem.domain();
        let (lo, hi) = attainable_interval(&row, domain.lower().as_slice(), domain.upper().as_slice());
        let y = problem.datum()[0];
        return if y > lo && y < hi {
            Feasibility::InteriorCertified
        } else {
            Feasibility::BoundaryOrExterior
        };
    }
    Feasibility::Unknown
}

/// [`feasibility_probe`] upgraded by a solver outcome: convergence certifies
/// interiority.
pub fn feasibility_after_solve(problem: &InverseProblem, solution: &DualSolution) -> Feasibility {
    match (feasibility_probe(problem), solution.status) {
        (Feasibility::Unknown, SolveStatus::Converged) => Feasibility::InteriorCertified,
        (probe, _) => probe,
    }
}

fn require_sensitivity_ready(solution: &DualSolution, problem: &InverseProblem) -> Result<DMatrix<f64>> {
    if !solution.is_converged() {
        return Err(Error::NotConverged(format!(
            "sensitivity needs a converged solution, status is {}",
            solution.status.name()
        )));
    }
    let rs = problem.row_space();
    if !rs.is_full_row_rank() {
        return Err(Error::RankDeficient {
            rank: rs.rank(),
            required: problem.rows(),
        });
    }
    let g = induced_metric_g(&solution.lambda_star, problem)?.matrix;
    let k = g.nrows();
    let inverse = g.clone().cholesky().map(|c| c.inverse());
    match inverse {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => Ok(inv),
        _ => Err(Error::RankDeficient {
            rank: RowSpace::new(&g).rank(),
            required: k,
        }),
    }
}

/// Jacobian `d lambda / d y = G(lambda*)^{-1}`.
pub fn sensitivity_lambda(solution: &DualSolution, problem: &InverseProblem) -> Result<DMatrix<f64>> {
    require_sensitivity_ready(solution, problem)
}

/// First-order change of the solution under `y -> y + dy`:
/// `h(A^t lambda*) A^t G^{-1} dy`.
pub fn sensitivity_xi(
    solution: &DualSolution,
    problem: &InverseProblem,
    delta_y: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_len("datum perturbation", problem.rows(), delta_y.len())?;
    check_finite("datum perturbation", delta_y.as_slice())?;
    let g_inv = require_sensitivity_ready(solution, problem)?;
    let at = problem.matrix().transpose();
    let tau = TauPoint::new(&at * &solution.lambda_star)?;
    let h = hessian_m(&tau, problem.domain())?;
    Ok(h.component_mul(&(at * (g_inv * delta_y))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::BoxDomain;
    use approx::assert_relative_eq;

    fn pair_sum(y: f64) -> InverseProblem {
        InverseProblem::from_rows(&[vec![1.0, 1.0]], &[y], BoxDomain::unit(2)).unwrap()
    }

    fn identity(y: &[f64]) -> InverseProblem {
        InverseProblem::new(DMatrix::identity(2, 2), DVector::from_column_slice(y), BoxDomain::unit(2)).unwrap()
    }

    #[test]
    fn dual_objective_at_origin() {
        let p = InverseProblem::from_rows(&[vec![1.0, 2.0, -1.0]], &[0.3], BoxDomain::unit(3)).unwrap();
        let (v, _) = dual_objective(&DVector::zeros(1), &p).unwrap();
        assert_relative_eq!(v, -3.0 * 2f64.ln(), epsilon = 1e-15);
        let (_, g) = dual_objective(&DVector::zeros(1), &pair_sum(1.0)).unwrap();
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn symmetric_instance() {
        let p = pair_sum(1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert_eq!(s.lambda_star[0], 0.0);
        assert_eq!(s.xi_star.as_slice(), &[0.5, 0.5]);
        assert_relative_eq!(s.psi_value, 2.0 * 0.5f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(s.dual_value, -2.0 * 2f64.ln(), epsilon = 1e-15);
        assert_eq!(duality_gap(&s, &p).unwrap(), 0.0);
    }

    #[test]
    fn identity_instance_recovers_logits() {
        let p = identity(&[0.3, 0.7]);
        let s = solve(&p).unwrap();
        assert!(s.is_converged());
        assert_relative_eq!(s.lambda_star[0], (3.0f64 / 7.0).ln(), epsilon = 1e-10);
        assert_relative_eq!(s.lambda_star[1], (7.0f64 / 3.0).ln(), epsilon = 1e-10);
        assert!((s.xi_star.coords() - DVector::from_vec(vec![0.3, 0.7])).amax() < 1e-10);
        assert!(duality_gap(&s, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn exterior_datum_is_infeasible() {
        let s = solve(&pair_sum(3.0)).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleDatum);
        let s = solve(&pair_sum(-0.5)).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleDatum);
    }

    #[test]
    fn probe_k1() {
        assert_eq!(feasibility_probe(&pair_sum(1.0)), Feasibility::InteriorCertified);
        assert_eq!(feasibility_probe(&pair_sum(2.0)), Feasibility::BoundaryOrExterior);
        assert_eq!(feasibility_probe(&pair_sum(0.0)), Feasibility::BoundaryOrExterior);
        let p = identity(&[0.2, 0.4]);
        assert_eq!(feasibility_probe(&p), Feasibility::Unknown);
        let s = solve(&p).unwrap();
        assert_eq!(feasibility_after_solve(&p, &s), Feasibility::InteriorCertified);
        assert_eq!(attainable_interval(&[1.0, -2.0], &[0.0, 0.0], &[1.0, 1.0]), (-2.0, 1.0));
    }

    #[test]
    fn sensitivity_examples() {
        let p = identity(&[0.5, 0.5]);
        let s = solve(&p).unwrap();
        let j = sensitivity_lambda(&s, &p).unwrap();
        assert_relative_eq!(j, DMatrix::from_diagonal_element(2, 2, 4.0), epsilon = 1e-12);
        let dy = DVector::from_vec(vec![1e-3, -2e-3]);
        assert_relative_eq!(sensitivity_xi(&s, &p, &dy).unwrap(), dy.clone(), epsilon = 1e-15);
        assert_eq!(sensitivity_xi(&s, &p, &DVector::zeros(2)).unwrap(), DVector::zeros(2));

        let p = pair_sum(1.0);
        let s = solve(&p).unwrap();
        assert_relative_eq!(sensitivity_lambda(&s, &p).unwrap()[(0, 0)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn sensitivity_rejects_rank_deficient_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = InverseProblem::new(a, DVector::from_vec(vec![1.0, 1.0]), BoxDomain::unit(2)).unwrap();
        let s = solve(&p).unwrap();
        assert!(s.is_converged());
        assert!(matches!(sensitivity_lambda(&s, &p), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn surface_point_at_origin_is_center() {
        let p = pair_sum(1.2);
        let x = solution_surface_point(&DVector::zeros(1), &p).unwrap();
        assert_eq!(x.as_slice(), &[0.5, 0.5]);
        let s = solve(&p).unwrap();
        assert_eq!(solution_surface_point(&s.lambda_star, &p).unwrap(), s.xi_star);
    }
}
