//! Comparisons of the `g`-distance with cheaper distances.
//!
//! Upper bound: the logit chart has derivative `D / ((x-a)(b-x))`, which
//! dominates `u' = 1 / sqrt((x-a)(b-x))`, so the Euclidean distance in logit
//! coordinates bounds `d_g` from above.
//!
//! Lower bounds: in the centered coordinate `z = 2 (xi - m) / D` the chart
//! satisfies `du/dz = (1 - z^2)^{-1/2}`, which dominates both `1` and
//! `sqrt(1 + z^2)`. Each yields a lower bound. Two printed variants are also
//! evaluated for audit: a Euclidean bound without the `2/D` rescaling (valid
//! only when every `D_j <= 2`) and a `sinh`-difference bound, which is not an
//! antiderivative of `sqrt(1 + z^2)` and is not a valid bound in general.

use nalgebra::DVector;

use super::dist_g;
use crate::entropy::{BoxDomain, InteriorPoint};
use crate::error::{check_len, Result};

/// Absolute slack absorbing rounding when comparing a bound with `d_g`.
pub const BOUND_SLACK: f64 = 1e-12;

/// A bound, the `g`-distance it is compared with, and whether the claimed
/// inequality held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub bound: f64,
    pub dist: f64,
    pub holds: bool,
}

/// Family of lower bounds on `d_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundOrder {
    /// From `du/dz >= |z|^0 = 1`.
    Euclidean,
    /// From `du/dz >= sqrt(1 + z^2)`.
    Sinh,
}

/// Literal and corrected forms of one lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    pub order: LowerBoundOrder,
    /// The bound as printed; audited, not guaranteed.
    pub literal: BoundCheck,
    /// The bound that follows from the chart derivative; always holds.
    pub corrected: BoundCheck,
}

fn check_pair(xi: &InteriorPoint, eta: &InteriorPoint, domain: &BoxDomain) -> Result<()> {
    check_len("first point", domain.dim(), xi.len())?;
    check_len("second point", domain.dim(), eta.len())
}

/// Logit-chart upper bound: `sqrt(sum_j (logit_j(xi) - logit_j(eta))^2) >= d_g`.
pub fn bound_upper_logit(xi: &InteriorPoint, eta: &InteriorPoint, domain: &BoxDomain) -> Result<BoundCheck> {
    check_pair(xi, eta, domain)?;
    let logit = |p: &InteriorPoint, j: usize| (p.lower_gaps()[j] / p.upper_gaps()[j]).ln();
    let bound = (0..xi.len())
        .map(|j| (logit(xi, j) - logit(eta, j)).powi(2))
        .sum::<f64>()
        .sqrt();
    let dist = dist_g(xi, eta, domain)?;
    Ok(BoundCheck {
        bound,
        dist,
        holds: bound + BOUND_SLACK >= dist,
    })
}

/// `z_j = 2 (xi_j - m_j) / D_j`, from the face gaps.
fn centered(p: &InteriorPoint, domain: &BoxDomain) -> DVector<f64> {
    DVector::from_fn(p.len(), |j, _| (p.lower_gaps()[j] - p.upper_gaps()[j]) / domain.width(j))
}

/// Antiderivative of `sqrt(1 + z^2)`.
fn sqrt_one_plus_sq_integral(z: f64) -> f64 {
    0.5 * (z * (1.0 + z * z).sqrt() + z.asinh())
}

/// Lower bounds on `d_g(xi, eta)`, literal and corrected.
pub fn bound_lower_family(
    xi: &InteriorPoint,
    eta: &InteriorPoint,
    domain: &BoxDomain,
    order: LowerBoundOrder,
) -> Result<LowerBoundReport> {
    check_pair(xi, eta, domain)?;
    let dist = dist_g(xi, eta, domain)?;
    let zx = centered(xi, domain);
    let ze = centered(eta, domain);
    let n = xi.len();
    let (literal_sq, corrected_sq): (f64, f64) = match order {
        LowerBoundOrder::Euclidean => (
            (eta.coords() - xi.coords()).norm_squared(),
            (&ze - &zx).norm_squared(),
        ),
        LowerBoundOrder::Sinh => (0..n)
            .map(|j| {
                let scale = 2.0 / domain.width(j);
                let literal = scale * (ze[j].sinh() - zx[j].sinh()).powi(2);
                let corrected = (sqrt_one_plus_sq_integral(ze[j]) - sqrt_one_plus_sq_integral(zx[j])).powi(2);
                (literal, corrected)
            })
            .fold((0.0, 0.0), |acc, (l, c)| (acc.0 + l, acc.1 + c)),
    };
    let check = |bound: f64| BoundCheck {
        bound,
        dist,
        holds: dist + BOUND_SLACK >= bound,
    };
    Ok(LowerBoundReport {
        order,
        literal: check(literal_sq.sqrt()),
        corrected: check(corrected_sq.sqrt()),
    })
}
