//! Closed-form kernels of the Fermi-Dirac entropy on a box.
//!
//! The constraint set is a box `K = prod [a_j, b_j]` with interior `Omega`.
//! Two potentials live on it:
//!
//! * the log-partition `M(tau) = sum_j ln(exp(a_j tau_j) + exp(b_j tau_j))` on `R^N`,
//! * its convex conjugate, the entropy
//!   `Psi(xi) = sum_j p_j ln p_j + q_j ln q_j` with `p_j = (xi_j - a_j)/D_j`, `q_j = 1 - p_j`.
//!
//! Their gradients `phi = grad M` and `chi = grad Psi` are mutually inverse
//! bijections between `R^N` and `Omega`, and their Hessians are mutually
//! inverse diagonal matrices along conjugate pairs.
//!
//! Every kernel is separable, so everything below is written per coordinate and
//! mapped. No raw `exp(b tau)` is ever formed: exponentials go through the
//! shifted log-sum-exp or the logistic function.
//!
//! Interior points carry their distances to both faces of the box
//! ([`InteriorPoint::lower_gaps`], [`InteriorPoint::upper_gaps`]). A point
//! `phi(tau)` with large `|tau|` sits closer to a face than the spacing of
//! floats near that face, and the gaps keep the information that `xi` alone
//! would round away. All entropy, Hessian and chart evaluations read the gaps.

use std::ops::Deref;

use nalgebra::DVector;

use crate::error::{check_finite, check_len, Error, Result};

/// Default interiority margin, relative to the coordinate width.
pub const DEFAULT_INTERIOR_MARGIN: f64 = 1e-12;

/// The box `prod [a_j, b_j]` with strictly ordered finite bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: DVector<f64>,
    upper: DVector<f64>,
    interior_margin: f64,
}

impl BoxDomain {
    pub fn new(lower: impl Into<Vec<f64>>, upper: impl Into<Vec<f64>>) -> Result<Self> {
        let lower = lower.into();
        let upper = upper.into();
        check_len("box upper bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidInput("box must have at least one coordinate".into()));
        }
        check_finite("box lower bounds", &lower)?;
        check_finite("box upper bounds", &upper)?;
        if let Some(j) = (0..lower.len()).find(|&j| lower[j] >= upper[j]) {
            return Err(Error::InvalidInput(format!(
                "box coordinate {j} has lower bound {} not below upper bound {}",
                lower[j], upper[j]
            )));
        }
        Ok(Self {
            lower: DVector::from_vec(lower),
            upper: DVector::from_vec(upper),
            interior_margin: DEFAULT_INTERIOR_MARGIN,
        })
    }

    /// `[0, 1]^n`.
    pub fn unit(n: usize) -> Self {
        assert!(n > 0, "unit box needs at least one coordinate");
        Self {
            lower: DVector::zeros(n),
            upper: DVector::from_element(n, 1.0),
            interior_margin: DEFAULT_INTERIOR_MARGIN,
        }
    }

    /// `[a, b]^n`.
    pub fn uniform(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a; n], vec![b; n])
    }

    /// Points closer than `margin * D_j` to a face are rejected by
    /// [`InteriorPoint::new`].
    pub fn with_interior_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin.is_finite() && (0.0..0.5).contains(&margin)) {
            return Err(Error::InvalidInput(format!(
                "interior margin must lie in [0, 0.5), got {margin}"
            )));
        }
        self.interior_margin = margin;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn interior_margin(&self) -> f64 {
        self.interior_margin
    }

    /// `D_j = b_j - a_j`.
    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    /// `d_j = D_j / 2`.
    pub fn half_width(&self, j: usize) -> f64 {
        0.5 * self.width(j)
    }

    /// `m_j = (a_j + b_j) / 2`.
    pub fn midpoint(&self, j: usize) -> f64 {
        0.5 * (self.lower[j] + self.upper[j])
    }

    pub fn widths(&self) -> DVector<f64> {
        &self.upper - &self.lower
    }

    /// The center of the box, where `Psi` attains its minimum.
    pub fn center(&self) -> InteriorPoint {
        let half = self.widths() * 0.5;
        InteriorPoint {
            xi: (&self.lower + &self.upper) * 0.5,
            below: half.clone(),
            above: half,
        }
    }

    /// Validates `xi` against the open box, honoring the interiority margin.
    pub fn interior(&self, xi: &[f64]) -> Result<InteriorPoint> {
        InteriorPoint::new(DVector::from_column_slice(xi), self)
    }

    pub fn is_interior(&self, xi: &[f64]) -> bool {
        xi.len() == self.dim()
            && xi
                .iter()
                .enumerate()
                .all(|(j, &x)| x > self.lower[j] && x < self.upper[j])
    }
}

/// A point of the open box. Bound to the box it was validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorPoint {
    xi: DVector<f64>,
    below: DVector<f64>,
    above: DVector<f64>,
}

impl InteriorPoint {
    pub fn new(xi: DVector<f64>, domain: &BoxDomain) -> Result<Self> {
        check_len("interior point", domain.dim(), xi.len())?;
        check_finite("interior point", xi.as_slice())?;
        let n = xi.len();
        let mut below = DVector::zeros(n);
        let mut above = DVector::zeros(n);
        for j in 0..n {
            let (a, b) = (domain.lower[j], domain.upper[j]);
            let margin = domain.interior_margin * (b - a);
            let lo = xi[j] - a;
            let hi = b - xi[j];
            if !(lo > margin && hi > margin) {
                return Err(Error::DomainViolation {
                    index: j,
                    value: xi[j],
                    lower: a,
                    upper: b,
                });
            }
            below[j] = lo;
            above[j] = hi;
        }
        Ok(Self { xi, below, above })
    }

    /// Assembles a point from its face distances; `below_j + above_j = D_j`
    /// up to rounding. Coordinates are recovered from the nearer face.
    pub(crate) fn from_gaps(domain: &BoxDomain, below: DVector<f64>, above: DVector<f64>) -> Self {
        let xi = DVector::from_fn(below.len(), |j, _| {
            if below[j] <= above[j] {
                domain.lower[j] + below[j]
            } else {
                domain.upper[j] - above[j]
            }
        });
        Self { xi, below, above }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.xi
    }

    /// `xi_j - a_j`.
    pub fn lower_gaps(&self) -> &DVector<f64> {
        &self.below
    }

    /// `b_j - xi_j`.
    pub fn upper_gaps(&self) -> &DVector<f64> {
        &self.above
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.xi
    }
}

impl Deref for InteriorPoint {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.xi
    }
}

/// A point of the unconstrained dual coordinate space `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauPoint(DVector<f64>);

impl TauPoint {
    pub fn new(tau: DVector<f64>) -> Result<Self> {
        check_finite("tau point", tau.as_slice())?;
        Ok(Self(tau))
    }

    pub fn from_slice(tau: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(tau))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for TauPoint {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Standard logistic `1 / (1 + exp(-x))`, evaluated without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(exp(a t) + exp(b t))` in shifted form.
fn log_partition_scalar(a: f64, b: f64, t: f64) -> f64 {
    let (x, y) = (a * t, b * t);
    let top = x.max(y);
    top + (-(x - y).abs()).exp().ln_1p()
}

fn check_tau(tau: &TauPoint, domain: &BoxDomain) -> Result<()> {
    check_len("tau point", domain.dim(), tau.len())
}

fn check_point(xi: &InteriorPoint, domain: &BoxDomain) -> Result<()> {
    check_len("interior point", domain.dim(), xi.len())
}

/// `M(tau) = sum_j ln(exp(a_j tau_j) + exp(b_j tau_j))`.
pub fn log_partition(tau: &TauPoint, domain: &BoxDomain) -> Result<f64> {
    check_tau(tau, domain)?;
    Ok((0..tau.len())
        .map(|j| log_partition_scalar(domain.lower[j], domain.upper[j], tau[j]))
        .sum())
}

/// `zeta(tau) = exp(M(tau))`. Overflows to infinity for large `|tau|`; only
/// meant for diagnostics.
pub fn partition_function(tau: &TauPoint, domain: &BoxDomain) -> Result<f64> {
    log_partition(tau, domain).map(f64::exp)
}

/// `Psi(xi)` on the open box. Values lie in `[N ln(1/2), 0)`.
pub fn entropy_psi(xi: &InteriorPoint, domain: &BoxDomain) -> Result<f64> {
    check_point(xi, domain)?;
    Ok((0..xi.len())
        .map(|j| {
            let d = domain.width(j);
            let p = xi.below[j] / d;
            let q = xi.above[j] / d;
            p * p.ln() + q * q.ln()
        })
        .sum())
}

/// `Psi` extended to the closed box with `0 ln 0 = 0`. Boundary points are
/// accepted here and nowhere else.
pub fn entropy_psi_closure(xi: &[f64], domain: &BoxDomain) -> Result<f64> {
    check_len("closed-box point", domain.dim(), xi.len())?;
    check_finite("closed-box point", xi)?;
    let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    let mut total = 0.0;
    for (j, &x) in xi.iter().enumerate() {
        let (a, b) = (domain.lower[j], domain.upper[j]);
        if x < a || x > b {
            return Err(Error::DomainViolation {
                index: j,
                value: x,
                lower: a,
                upper: b,
            });
        }
        let d = b - a;
        total += xlnx((x - a) / d) + xlnx((b - x) / d);
    }
    Ok(total)
}

/// `phi(tau) = grad M(tau)`, i.e. `a_j + D_j * logistic(D_j tau_j)`.
pub fn phi(tau: &TauPoint, domain: &BoxDomain) -> Result<InteriorPoint> {
    check_tau(tau, domain)?;
    let n = tau.len();
    let mut below = DVector::zeros(n);
    let mut above = DVector::zeros(n);
    for j in 0..n {
        let d = domain.width(j);
        let s = d * tau[j];
        // Gaps underflow only once |D tau| exceeds ~745; keep them positive.
        below[j] = (d * logistic(s)).max(f64::MIN_POSITIVE);
        above[j] = (d * logistic(-s)).max(f64::MIN_POSITIVE);
    }
    Ok(InteriorPoint::from_gaps(domain, below, above))
}

/// `chi(xi) = grad Psi(xi)`, i.e. `(1/D_j) ln((xi_j - a_j)/(b_j - xi_j))`.
pub fn chi(xi: &InteriorPoint, domain: &BoxDomain) -> Result<TauPoint> {
    check_point(xi, domain)?;
    Ok(TauPoint(DVector::from_fn(xi.len(), |j, _| {
        (xi.below[j].ln() - xi.above[j].ln()) / domain.width(j)
    })))
}

/// `grad M(tau)`; the same map as [`phi`], returned as a plain vector.
pub fn grad_m(tau: &TauPoint, domain: &BoxDomain) -> Result<DVector<f64>> {
    phi(tau, domain).map(InteriorPoint::into_inner)
}

/// `grad Psi(xi)`; the same map as [`chi`], returned as a plain vector.
pub fn grad_psi(xi: &InteriorPoint, domain: &BoxDomain) -> Result<DVector<f64>> {
    chi(xi, domain).map(TauPoint::into_inner)
}

/// Diagonal of `Hess M(tau)`: `h(tau_j) = (D_j / (exp(d_j tau_j) + exp(-d_j tau_j)))^2`.
pub fn hessian_m(tau: &TauPoint, domain: &BoxDomain) -> Result<DVector<f64>> {
    check_tau(tau, domain)?;
    Ok(DVector::from_fn(tau.len(), |j, _| {
        let sech = 0.5 * domain.width(j) / (domain.half_width(j) * tau[j]).cosh();
        sech * sech
    }))
}

/// Diagonal of `Hess Psi(xi)`: `g(xi_j) = 1 / ((xi_j - a_j)(b_j - xi_j))`.
pub fn hessian_psi(xi: &InteriorPoint, domain: &BoxDomain) -> Result<DVector<f64>> {
    check_point(xi, domain)?;
    Ok(DVector::from_fn(xi.len(), |j, _| 1.0 / (xi.below[j] * xi.above[j])))
}

/// Bregman divergence `Psi(xi) - Psi(eta) - <xi - eta, grad Psi(eta)>`.
///
/// Per coordinate this is a Bernoulli Kullback-Leibler divergence, summed here
/// as `x ln(x/y) - x + y` over both faces so every term is nonnegative.
pub fn bregman(xi: &InteriorPoint, eta: &InteriorPoint, domain: &BoxDomain) -> Result<f64> {
    check_point(xi, domain)?;
    check_point(eta, domain)?;
    let term = |x: f64, y: f64| (x * (x / y).ln() - x + y).max(0.0);
    Ok((0..xi.len())
        .map(|j| {
            let d = domain.width(j);
            term(xi.below[j] / d, eta.below[j] / d) + term(xi.above[j] / d, eta.above[j] / d)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tau(v: &[f64]) -> TauPoint {
        TauPoint::from_slice(v).unwrap()
    }

    #[test]
    fn box_rejects_degenerate_and_nonfinite_bounds() {
        assert!(BoxDomain::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(BoxDomain::new(Vec::<f64>::new(), Vec::<f64>::new()).is_err());
    }

    #[test]
    fn interior_point_rejects_boundary_and_margin() {
        let unit = BoxDomain::unit(2);
        assert!(matches!(
            unit.interior(&[0.0, 0.5]),
            Err(Error::DomainViolation { index: 0, .. })
        ));
        assert!(unit.interior(&[0.5, 1.0]).is_err());
        assert!(unit.interior(&[0.5, 1.0 - 1e-13]).is_err());
        assert!(unit.interior(&[0.5, 1.0 - 1e-11]).is_ok());
        let loose = BoxDomain::unit(1).with_interior_margin(0.1).unwrap();
        assert!(loose.interior(&[0.05]).is_err());
    }

    #[test]
    fn log_partition_at_origin_is_n_ln2() {
        let v = log_partition(&TauPoint::zeros(3), &BoxDomain::unit(3)).unwrap();
        assert_relative_eq!(v, 3.0 * 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_partition_asymptote_and_no_overflow() {
        let unit = BoxDomain::unit(1);
        for t in [50.0, 500.0, 5000.0] {
            let v = log_partition(&tau(&[t]), &unit).unwrap();
            assert!((v - t).abs() < 1e-15 * t.max(1.0) + 2e-22, "t={t}: {v}");
        }
        assert!(log_partition(&tau(&[1e6]), &unit).unwrap().is_finite());
    }

    #[test]
    fn log_partition_mixed_box() {
        // ln(e^{-1} + e^{1}) + ln(e^{0} + e^{-4}), evaluated term by term.
        let b = BoxDomain::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let expected = (2.0 * 1f64.cosh()).ln() + (1.0 + (-4f64).exp()).ln();
        let got = log_partition(&tau(&[1.0, -2.0]), &b).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-15);
        assert_relative_eq!(got, 1.0 + (1.0 + (-2f64).exp()).ln() + (-4f64).exp().ln_1p(), max_relative = 1e-15);
    }

    #[test]
    fn psi_values() {
        let unit = BoxDomain::unit(4);
        assert_eq!(entropy_psi(&unit.center(), &unit).unwrap(), 4.0 * 0.5f64.ln());
        let one = BoxDomain::unit(1);
        let v = entropy_psi(&one.interior(&[0.25]).unwrap(), &one).unwrap();
        assert_relative_eq!(v, -0.562_335_144_618_808_4, epsilon = 1e-14);
    }

    #[test]
    fn psi_closure_handles_vertices() {
        let unit = BoxDomain::unit(3);
        assert_eq!(entropy_psi_closure(&[0.0, 1.0, 1.0], &unit).unwrap(), 0.0);
        assert!(entropy_psi_closure(&[0.0, 1.5, 1.0], &unit).is_err());
        let mid = entropy_psi_closure(&[0.5; 3], &unit).unwrap();
        assert_relative_eq!(mid, 3.0 * 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn phi_limits_follow_the_formula() {
        let unit = BoxDomain::unit(1);
        assert_eq!(phi(&tau(&[0.0]), &unit).unwrap()[0], 0.5);
        assert!(phi(&tau(&[60.0]), &unit).unwrap()[0] > 1.0 - 1e-15);
        assert!(phi(&tau(&[-60.0]), &unit).unwrap()[0] < 1e-20);
        let far = phi(&tau(&[1e4]), &unit).unwrap();
        assert!(far.upper_gaps()[0] > 0.0);
    }

    #[test]
    fn chi_values() {
        let unit = BoxDomain::unit(1);
        assert_eq!(chi(&unit.center(), &unit).unwrap()[0], 0.0);
        let t = chi(&unit.interior(&[0.75]).unwrap(), &unit).unwrap();
        assert_relative_eq!(t[0], 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn chi_inverts_phi_even_near_saturation() {
        let b = BoxDomain::new(vec![-3.0], vec![7.0]).unwrap();
        for t in [-4.0, -1.0, 0.3, 2.5, 3.9] {
            let back = chi(&phi(&tau(&[t]), &b).unwrap(), &b).unwrap();
            assert_relative_eq!(back[0], t, max_relative = 1e-13);
        }
    }

    #[test]
    fn hessian_values_and_inverse_identity() {
        let unit = BoxDomain::unit(1);
        assert_relative_eq!(hessian_m(&tau(&[0.0]), &unit).unwrap()[0], 0.25, epsilon = 1e-16);
        assert_eq!(hessian_psi(&unit.center(), &unit).unwrap()[0], 4.0);
        assert_eq!(hessian_m(&tau(&[1e4]), &unit).unwrap()[0], 0.0);
        let b = BoxDomain::new(vec![-1.0], vec![2.0]).unwrap();
        for t in [-13.0, -2.0, 0.0, 0.7, 13.0] {
            let t = tau(&[t]);
            let h = hessian_m(&t, &b).unwrap()[0];
            let g = hessian_psi(&phi(&t, &b).unwrap(), &b).unwrap()[0];
            assert_relative_eq!(h * g, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn bregman_values() {
        let unit = BoxDomain::unit(1);
        let half = unit.interior(&[0.5]).unwrap();
        let quarter = unit.interior(&[0.25]).unwrap();
        assert_eq!(bregman(&half, &half, &unit).unwrap(), 0.0);
        // Psi(0.5) - Psi(0.25) - 0.25 * ln(1/3)
        let direct = 0.5f64.ln() - (0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln()) - 0.25 * (1.0f64 / 3.0).ln();
        let got = bregman(&half, &quarter, &unit).unwrap();
        assert_relative_eq!(got, direct, epsilon = 1e-15);
        assert_relative_eq!(got, 0.143_841_036_225_890, epsilon = 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let unit = BoxDomain::unit(2);
        assert!(matches!(
            log_partition(&TauPoint::zeros(3), &unit),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(TauPoint::from_slice(&[f64::NAN]).is_err());
    }
}
