//! Geometry of the solution surface `S(lambda) = phi(A^t lambda)`.

use nalgebra::DVector;

use super::path::{GeodesicPath, PathSpace};
use super::{u_map, v_map, MetricKind, MetricTensor};
use crate::entropy::{chi, hessian_m, hessian_psi, phi, InteriorPoint, TauPoint};
use crate::error::{check_finite, check_len, Error, Result};
use crate::problem::InverseProblem;

/// Default tolerance for an endpoint to count as a point of the solution
/// surface, relative to `1 + ||chi(xi)||`.
pub const DEFAULT_SURFACE_TOL: f64 = 1e-8;

/// The induced metric `G(lambda) = A h(A^t lambda) A^t` (`K x K`).
pub fn induced_metric_g(lambda: &DVector<f64>, problem: &InverseProblem) -> Result<MetricTensor> {
    problem.check_multiplier(lambda)?;
    let a = problem.matrix();
    let tau = TauPoint::new(a.transpose() * lambda)?;
    let h = hessian_m(&tau, problem.domain())?;
    let mut scaled = a.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= h[j];
    }
    let mut g = &scaled * a.transpose();
    // Symmetrize away rounding.
    let gt = g.transpose();
    g = (g + gt) * 0.5;
    Ok(MetricTensor {
        kind: MetricKind::GInduced,
        point: lambda.clone(),
        matrix: g,
    })
}

/// Geodesic of the induced metric between two multipliers.
///
/// `A^t lambda(t)` must follow the `h`-geodesic from `A^t lambda0` to
/// `A^t lambda1`. The multiplier at `t` is the least-squares preimage under
/// `A^t` of that geodesic point; the distance of the point from `range(A^t)`
/// is reported by [`GeodesicPath::audit_residual`].
pub fn geodesic_lambda(
    lambda0: &DVector<f64>,
    lambda1: &DVector<f64>,
    problem: &InverseProblem,
) -> Result<GeodesicPath> {
    problem.check_multiplier(lambda0)?;
    problem.check_multiplier(lambda1)?;
    let row_space = problem.row_space();
    if !row_space.is_full_row_rank() {
        return Err(Error::RankDeficient {
            rank: row_space.rank(),
            required: problem.rows(),
        });
    }
    let at = problem.matrix().transpose();
    let domain = problem.domain();
    let v0 = v_map(&TauPoint::new(&at * lambda0)?, domain)?;
    let v1 = v_map(&TauPoint::new(&at * lambda1)?, domain)?;
    Ok(GeodesicPath::on_surface(
        PathSpace::Lambda,
        (lambda0.clone(), lambda1.clone()),
        (v0, v1),
        domain,
        problem.matrix(),
        row_space,
    ))
}

/// Geodesic of the ambient `g`-metric between two points of the solution
/// surface, with the default surface tolerance.
pub fn surface_geodesic(
    xi_a: &InteriorPoint,
    xi_b: &InteriorPoint,
    problem: &InverseProblem,
) -> Result<GeodesicPath> {
    surface_geodesic_with_tolerance(xi_a, xi_b, problem, DEFAULT_SURFACE_TOL)
}

/// As [`surface_geodesic`]; endpoints whose `chi`-image lies farther than
/// `tol * (1 + ||chi(xi)||)` from `range(A^t)` are rejected.
pub fn surface_geodesic_with_tolerance(
    xi_a: &InteriorPoint,
    xi_b: &InteriorPoint,
    problem: &InverseProblem,
    tol: f64,
) -> Result<GeodesicPath> {
    let domain = problem.domain();
    let row_space = problem.row_space();
    for (which, xi) in [("start", xi_a), ("end", xi_b)] {
        let tau = chi(xi, domain)?;
        let residual = row_space.range_residual(&tau);
        let tolerance = tol * (1.0 + tau.norm());
        if residual > tolerance {
            return Err(Error::NotOnSurface {
                which,
                residual,
                tolerance,
            });
        }
    }
    Ok(GeodesicPath::on_surface(
        PathSpace::Surface,
        (xi_a.coords().clone(), xi_b.coords().clone()),
        (u_map(xi_a, domain)?, u_map(xi_b, domain)?),
        domain,
        problem.matrix(),
        row_space,
    ))
}

/// A point of a multiplier curve together with its velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub lambda: DVector<f64>,
    pub velocity: DVector<f64>,
}

/// Largest `|<w, g(xi) dxi/dt>|` over an orthonormal basis `w` of `ker(A)` and
/// the given samples of a multiplier curve, where `xi = phi(A^t lambda)` and
/// `dxi/dt = h(A^t lambda) A^t lambda'`. Zero when the kernel is trivial.
pub fn orthogonality_defect(problem: &InverseProblem, samples: &[CurveSample]) -> Result<f64> {
    let kernel = problem.row_space().kernel_basis();
    if kernel.ncols() == 0 {
        return Ok(0.0);
    }
    let a = problem.matrix();
    let domain = problem.domain();
    let mut worst: f64 = 0.0;
    for sample in samples {
        problem.check_multiplier(&sample.lambda)?;
        check_len("curve velocity", problem.rows(), sample.velocity.len())?;
        check_finite("curve velocity", sample.velocity.as_slice())?;
        let tau = TauPoint::new(a.transpose() * &sample.lambda)?;
        let xi = phi(&tau, domain)?;
        let h = hessian_m(&tau, domain)?;
        let g = hessian_psi(&xi, domain)?;
        let dxi = h.component_mul(&(a.transpose() * &sample.velocity));
        let weighted = g.component_mul(&dxi);
        for w in kernel.column_iter() {
            worst = worst.max(w.dot(&weighted).abs());
        }
    }
    Ok(worst)
}
