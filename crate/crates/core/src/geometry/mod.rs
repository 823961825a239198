//! Hessian-Riemannian geometry on `R^N` (metric `Hess M`) and on the open box
//! (metric `Hess Psi`).
//!
//! Both metrics are diagonal with square-root factorizations `h = (v')^2` and
//! `g = (u')^2`, where the charts
//!
//! * `v(tau) = 2 arctan(exp(d tau))`
//! * `u(xi) = arcsin(2 (xi - m) / D) + pi/2`
//!
//! map each coordinate onto `(0, pi)`. In these charts both metrics become
//! Euclidean, so geodesics are straight lines and distances are Euclidean
//! norms of chart differences. The charts agree along `phi`: `u(phi(tau)) = v(tau)`.

mod bounds;
mod path;
mod surface;

pub use bounds::{bound_lower_family, bound_upper_logit, BoundCheck, BOUND_SLACK, LowerBoundOrder, LowerBoundReport};
pub use path::{GeodesicPath, PathSpace};
pub use surface::{
    geodesic_lambda, induced_metric_g, orthogonality_defect, surface_geodesic,
    surface_geodesic_with_tolerance, CurveSample, DEFAULT_SURFACE_TOL,
};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::entropy::{hessian_m, hessian_psi, phi, BoxDomain, InteriorPoint, TauPoint};
use crate::error::{check_finite, check_len, Error, Result};

/// Default number of points in audit grids over `t in [0, 1]`.
pub const DEFAULT_GRID: usize = 33;

/// `v_j(tau) = 2 arctan(exp(d_j tau_j))`, valued in `(0, pi)`.
pub fn v_map(tau: &TauPoint, domain: &BoxDomain) -> Result<DVector<f64>> {
    check_len("tau point", domain.dim(), tau.len())?;
    Ok(DVector::from_fn(tau.len(), |j, _| {
        let s = domain.half_width(j) * tau[j];
        if s > 0.0 {
            PI - 2.0 * (-s).exp().atan()
        } else {
            2.0 * s.exp().atan()
        }
    }))
}

fn check_chart(w: &DVector<f64>, domain: &BoxDomain) -> Result<()> {
    check_len("chart point", domain.dim(), w.len())?;
    check_finite("chart point", w.as_slice())?;
    match w.iter().position(|&x| !(x > 0.0 && x < PI)) {
        Some(index) => Err(Error::DomainViolation {
            index,
            value: w[index],
            lower: 0.0,
            upper: PI,
        }),
        None => Ok(()),
    }
}

/// Inverse of [`v_map`]: `tau_j = ln(tan(w_j / 2)) / d_j`.
pub fn v_inverse(w: &DVector<f64>, domain: &BoxDomain) -> Result<TauPoint> {
    check_chart(w, domain)?;
    let tau = DVector::from_fn(w.len(), |j, _| {
        let d = domain.half_width(j);
        let delta = w[j] - FRAC_PI_2;
        if delta.abs() <= FRAC_PI_4 {
            // ln tan(pi/4 + delta/2) = asinh(tan delta), exact at delta = 0.
            delta.tan().asinh() / d
        } else if delta > 0.0 {
            -(0.5 * (PI - w[j])).tan().ln() / d
        } else {
            (0.5 * w[j]).tan().ln() / d
        }
    });
    TauPoint::new(tau)
}

/// `u_j(xi) = arcsin(2 (xi_j - m_j) / D_j) + pi/2`, valued in `(0, pi)`.
pub fn u_map(xi: &InteriorPoint, domain: &BoxDomain) -> Result<DVector<f64>> {
    check_len("interior point", domain.dim(), xi.len())?;
    let below = xi.lower_gaps();
    let above = xi.upper_gaps();
    // arcsin(2p - 1) + pi/2 = 2 arcsin(sqrt(p)); pick the face the point is near.
    Ok(DVector::from_fn(xi.len(), |j, _| {
        let d = domain.width(j);
        if below[j] <= above[j] {
            2.0 * (below[j] / d).sqrt().asin()
        } else {
            PI - 2.0 * (above[j] / d).sqrt().asin()
        }
    }))
}

/// Inverse of [`u_map`]: `xi_j = m_j - (D_j / 2) cos(s_j)`.
pub fn u_inverse(s: &DVector<f64>, domain: &BoxDomain) -> Result<InteriorPoint> {
    check_chart(s, domain)?;
    let n = s.len();
    let below = DVector::from_fn(n, |j, _| domain.width(j) * (0.5 * s[j]).sin().powi(2));
    let above = DVector::from_fn(n, |j, _| domain.width(j) * (0.5 * s[j]).cos().powi(2));
    Ok(InteriorPoint::from_gaps(domain, below, above))
}

/// Geodesic exponential map of the `h`-metric: `v^{-1}(v(tau) + x)`.
///
/// The chart image is bounded, so a tangent that pushes `v(tau) + x` out of
/// `(0, pi)^N` has no geodesic of unit duration.
pub fn exp_map_tau(tau: &TauPoint, tangent: &DVector<f64>, domain: &BoxDomain) -> Result<TauPoint> {
    check_len("tangent vector", domain.dim(), tangent.len())?;
    check_finite("tangent vector", tangent.as_slice())?;
    let target = v_map(tau, domain)? + tangent;
    if let Some(index) = target.iter().position(|&x| !(x > 0.0 && x < PI)) {
        return Err(Error::TangentOutOfRange {
            index,
            image: target[index],
        });
    }
    v_inverse(&target, domain)
}

/// Closed-form `h`-geodesic from `tau0` to `tau1`.
pub fn geodesic_tau(tau0: &TauPoint, tau1: &TauPoint, domain: &BoxDomain) -> Result<GeodesicPath> {
    GeodesicPath::tau(tau0, tau1, domain)
}

/// Closed-form `g`-geodesic from `xi0` to `xi1`.
pub fn geodesic_xi(xi0: &InteriorPoint, xi1: &InteriorPoint, domain: &BoxDomain) -> Result<GeodesicPath> {
    GeodesicPath::xi(xi0, xi1, domain)
}

/// Geodesic distance in the `g`-metric: `||u(xi1) - u(xi0)||_2`.
pub fn dist_g(xi0: &InteriorPoint, xi1: &InteriorPoint, domain: &BoxDomain) -> Result<f64> {
    Ok((u_map(xi1, domain)? - u_map(xi0, domain)?).norm())
}

/// Geodesic distance in the `h`-metric: `||v(tau1) - v(tau0)||_2`.
pub fn dist_h(tau0: &TauPoint, tau1: &TauPoint, domain: &BoxDomain) -> Result<f64> {
    Ok((v_map(tau1, domain)? - v_map(tau0, domain)?).norm())
}

/// Uniform grid of `n` points on `[0, 1]` (`n >= 2`).
pub fn unit_grid(n: usize) -> impl Iterator<Item = f64> {
    let last = n.max(2) - 1;
    (0..=last).map(move |i| i as f64 / last as f64)
}

/// Largest sup-norm gap between the `g`-geodesic joining `phi(tau0)` and
/// `phi(tau1)` and the `phi`-image of the `h`-geodesic joining `tau0` and `tau1`.
pub fn transport_check(tau0: &TauPoint, tau1: &TauPoint, domain: &BoxDomain, grid: usize) -> Result<f64> {
    if grid < 2 {
        return Err(Error::InvalidInput(format!("transport grid needs at least 2 points, got {grid}")));
    }
    let xi_path = geodesic_xi(&phi(tau0, domain)?, &phi(tau1, domain)?, domain)?;
    let tau_path = geodesic_tau(tau0, tau1, domain)?;
    let mut worst: f64 = 0.0;
    for t in unit_grid(grid) {
        let direct = xi_path.evaluate(t)?;
        let mapped = phi(&TauPoint::new(tau_path.evaluate(t)?)?, domain)?;
        worst = worst.max((direct - mapped.coords()).amax());
    }
    Ok(worst)
}

/// Which metric a [`MetricTensor`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// `Hess M` at a point of `R^N`.
    HOfTau,
    /// `Hess Psi` at a point of the box.
    GOfXi,
    /// `A h(A^t lambda) A^t` at a multiplier.
    GInduced,
}

/// A metric evaluated at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    pub kind: MetricKind,
    pub point: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

impl MetricTensor {
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.min()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.transpose()).amax() <= tol * self.matrix.amax().max(1.0)
    }
}

pub fn metric_h(tau: &TauPoint, domain: &BoxDomain) -> Result<MetricTensor> {
    Ok(MetricTensor {
        kind: MetricKind::HOfTau,
        point: (**tau).clone(),
        matrix: DMatrix::from_diagonal(&hessian_m(tau, domain)?),
    })
}

pub fn metric_g(xi: &InteriorPoint, domain: &BoxDomain) -> Result<MetricTensor> {
    Ok(MetricTensor {
        kind: MetricKind::GOfXi,
        point: xi.coords().clone(),
        matrix: DMatrix::from_diagonal(&hessian_psi(xi, domain)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::chi;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn tau(v: &[f64]) -> TauPoint {
        TauPoint::from_slice(v).unwrap()
    }

    #[test]
    fn v_map_values_and_limits() {
        let unit = BoxDomain::unit(1);
        assert_relative_eq!(v_map(&tau(&[0.0]), &unit).unwrap()[0], PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(v_map(&tau(&[1e4]), &unit).unwrap()[0], PI, epsilon = 1e-15);
        assert!(v_map(&tau(&[-1e4]), &unit).unwrap()[0] < 1e-300);
    }

    #[test]
    fn v_derivative_is_sqrt_h() {
        let b = BoxDomain::new(vec![-1.0], vec![2.5]).unwrap();
        for t in [-2.0, -0.4, 0.0, 0.9, 3.0] {
            let delta = 1e-6;
            let fd = (v_map(&tau(&[t + delta]), &b).unwrap()[0] - v_map(&tau(&[t - delta]), &b).unwrap()[0])
                / (2.0 * delta);
            let h = hessian_m(&tau(&[t]), &b).unwrap()[0];
            assert_relative_eq!(fd, h.sqrt(), max_relative = 1e-8);
        }
    }

    #[test]
    fn v_inverse_rejects_out_of_range_and_stays_finite_near_pi() {
        let unit = BoxDomain::unit(1);
        assert_eq!(v_inverse(&DVector::from_vec(vec![PI / 2.0]), &unit).unwrap()[0], 0.0);
        assert!(v_inverse(&DVector::from_vec(vec![PI]), &unit).is_err());
        assert!(v_inverse(&DVector::from_vec(vec![0.0]), &unit).is_err());
        let near = v_inverse(&DVector::from_vec(vec![PI - 1e-9]), &unit).unwrap()[0];
        assert!(near.is_finite() && near > 40.0);
    }

    #[test]
    fn u_map_values() {
        let unit = BoxDomain::unit(1);
        let at = |x: f64| u_map(&unit.interior(&[x]).unwrap(), &unit).unwrap()[0];
        assert_relative_eq!(at(0.5), PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(at(0.25), PI / 3.0, epsilon = 1e-15);
        assert_relative_eq!(at(0.75), 2.0 * PI / 3.0, epsilon = 1e-15);
        let back = u_inverse(&DVector::from_vec(vec![PI / 3.0]), &unit).unwrap();
        assert_relative_eq!(back[0], 0.25, epsilon = 1e-15);
        assert!(u_inverse(&DVector::from_vec(vec![-0.1]), &unit).is_err());
    }

    #[test]
    fn charts_agree_along_phi() {
        let b = BoxDomain::new(vec![-2.0, 0.0], vec![1.0, 0.5]).unwrap();
        for t in [[-5.0, 30.0], [0.0, 0.0], [2.0, -60.0]] {
            let t = tau(&t);
            let xi = phi(&t, &b).unwrap();
            let u = u_map(&xi, &b).unwrap();
            let v = v_map(&t, &b).unwrap();
            assert!((u - &v).amax() < 1e-14);
            let back = v_map(&chi(&xi, &b).unwrap(), &b).unwrap();
            assert!((back - v).amax() < 1e-14);
        }
    }

    #[test]
    fn exp_map_identity_and_range() {
        let unit = BoxDomain::unit(2);
        let t0 = tau(&[0.3, -1.0]);
        let same = exp_map_tau(&t0, &DVector::zeros(2), &unit).unwrap();
        assert!((same.into_inner() - &*t0).amax() < 1e-14);
        let t1 = tau(&[-2.0, 0.5]);
        let x = v_map(&t1, &unit).unwrap() - v_map(&t0, &unit).unwrap();
        let hit = exp_map_tau(&t0, &x, &unit).unwrap();
        assert!((hit.into_inner() - &*t1).amax() < 1e-12);
        let v0 = v_map(&t0, &unit).unwrap();
        let push = DVector::from_vec(vec![PI + 0.1 - v0[0], 0.0]);
        assert!(matches!(
            exp_map_tau(&t0, &push, &unit),
            Err(Error::TangentOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn distances() {
        let unit = BoxDomain::unit(1);
        let a = unit.interior(&[0.25]).unwrap();
        let b = unit.interior(&[0.75]).unwrap();
        assert_relative_eq!(dist_g(&a, &b, &unit).unwrap(), PI / 3.0, epsilon = 1e-15);
        assert_eq!(dist_g(&a, &a, &unit).unwrap(), 0.0);
        assert_eq!(dist_h(&tau(&[1.0]), &tau(&[1.0]), &unit).unwrap(), 0.0);
    }

    #[test]
    fn transport_check_zero_for_equal_endpoints() {
        let b = BoxDomain::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let t = tau(&[0.4, -0.9]);
        assert_eq!(transport_check(&t, &t, &b, 33).unwrap(), 0.0);
        let sym = transport_check(&tau(&[-1.0, 1.0]), &tau(&[1.0, -1.0]), &b, 33).unwrap();
        assert!(sym <= 1e-10);
    }

    #[test]
    fn metric_tensors_are_diagonal_and_positive() {
        let b = BoxDomain::unit(3);
        let h = metric_h(&tau(&[0.0, 1.0, -2.0]), &b).unwrap();
        assert_eq!(h.kind, MetricKind::HOfTau);
        assert!(h.min_eigenvalue() > 0.0 && h.is_symmetric(0.0));
        assert_relative_eq!(h.matrix[(0, 0)], 0.25);
        let g = metric_g(&b.center(), &b).unwrap();
        assert_eq!(g.matrix[(2, 2)], 4.0);
    }
}
