use nalgebra::{DMatrix, DVector};

use super::{u_inverse, u_map, unit_grid, v_inverse, v_map};
use crate::entropy::{chi, BoxDomain, InteriorPoint, TauPoint};
use crate::error::{Error, Result};
use crate::linalg::RowSpace;

/// The space a [`GeodesicPath`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSpace {
    /// `R^N` with the `h`-metric; chart `v`.
    Tau,
    /// The open box with the `g`-metric; chart `u`.
    Xi,
    /// Multipliers `R^K` with the induced metric; chart `v(A^t .)`.
    Lambda,
    /// The solution surface inside the box; chart `u`.
    Surface,
}

impl PathSpace {
    pub fn name(self) -> &'static str {
        match self {
            PathSpace::Tau => "tau",
            PathSpace::Xi => "xi",
            PathSpace::Lambda => "lambda",
            PathSpace::Surface => "surface",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SurfaceChart {
    pub(crate) matrix: DMatrix<f64>,
    pub(crate) row_space: RowSpace,
}

/// A closed-form geodesic: a straight segment in chart coordinates, pulled
/// back to the space it lives in. Evaluable anywhere on `t in [0, 1]`.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    space: PathSpace,
    start: DVector<f64>,
    end: DVector<f64>,
    chart_start: DVector<f64>,
    chart_end: DVector<f64>,
    domain: BoxDomain,
    surface: Option<SurfaceChart>,
}

impl GeodesicPath {
    pub(crate) fn tau(tau0: &TauPoint, tau1: &TauPoint, domain: &BoxDomain) -> Result<Self> {
        Ok(Self {
            space: PathSpace::Tau,
            chart_start: v_map(tau0, domain)?,
            chart_end: v_map(tau1, domain)?,
            start: (**tau0).clone(),
            end: (**tau1).clone(),
            domain: domain.clone(),
            surface: None,
        })
    }

    pub(crate) fn xi(xi0: &InteriorPoint, xi1: &InteriorPoint, domain: &BoxDomain) -> Result<Self> {
        Ok(Self {
            space: PathSpace::Xi,
            chart_start: u_map(xi0, domain)?,
            chart_end: u_map(xi1, domain)?,
            start: xi0.coords().clone(),
            end: xi1.coords().clone(),
            domain: domain.clone(),
            surface: None,
        })
    }

    pub(crate) fn on_surface(
        space: PathSpace,
        endpoints: (DVector<f64>, DVector<f64>),
        chart: (DVector<f64>, DVector<f64>),
        domain: &BoxDomain,
        matrix: &DMatrix<f64>,
        row_space: RowSpace,
    ) -> Self {
        Self {
            space,
            start: endpoints.0,
            end: endpoints.1,
            chart_start: chart.0,
            chart_end: chart.1,
            domain: domain.clone(),
            surface: Some(SurfaceChart {
                matrix: matrix.clone(),
                row_space,
            }),
        }
    }

    pub fn space(&self) -> PathSpace {
        self.space
    }

    pub fn start(&self) -> &DVector<f64> {
        &self.start
    }

    pub fn end(&self) -> &DVector<f64> {
        &self.end
    }

    /// Chart image of the start point.
    pub fn transformed_start(&self) -> &DVector<f64> {
        &self.chart_start
    }

    /// Chart image of the end point.
    pub fn transformed_end(&self) -> &DVector<f64> {
        &self.chart_end
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Closed-form length: the Euclidean length of the chart segment.
    pub fn distance(&self) -> f64 {
        (&self.chart_end - &self.chart_start).norm()
    }

    /// The straight chart segment at `t`.
    pub fn chart_point(&self, t: f64) -> DVector<f64> {
        &self.chart_start + (&self.chart_end - &self.chart_start) * t
    }

    fn check_t(t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("path parameter must lie in [0, 1], got {t}")));
        }
        Ok(())
    }

    fn surface(&self) -> &SurfaceChart {
        self.surface.as_ref().expect("lambda and surface paths carry their matrix")
    }

    /// The path point at `t`, as an interior point (xi and surface paths only).
    pub fn evaluate_interior(&self, t: f64) -> Result<InteriorPoint> {
        Self::check_t(t)?;
        match self.space {
            PathSpace::Xi | PathSpace::Surface => u_inverse(&self.chart_point(t), &self.domain),
            other => Err(Error::InvalidInput(format!(
                "{} paths do not live in the box",
                other.name()
            ))),
        }
    }

    /// The path point at `t`. Endpoints are returned exactly.
    pub fn evaluate(&self, t: f64) -> Result<DVector<f64>> {
        Self::check_t(t)?;
        if t == 0.0 {
            return Ok(self.start.clone());
        }
        if t == 1.0 {
            return Ok(self.end.clone());
        }
        let chart = self.chart_point(t);
        match self.space {
            PathSpace::Tau => Ok(v_inverse(&chart, &self.domain)?.into_inner()),
            PathSpace::Xi | PathSpace::Surface => Ok(u_inverse(&chart, &self.domain)?.into_inner()),
            PathSpace::Lambda => {
                let tau = v_inverse(&chart, &self.domain)?;
                Ok(self.surface().row_space.solve_transpose(&tau))
            }
        }
    }

    /// Distance from `range(A^t)` of the point the path must pass through at `t`:
    /// `v^{-1}` of the chart segment for multiplier paths, `chi` of the path point
    /// for surface paths. Zero for paths without a constraint matrix.
    pub fn audit_residual(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        let chart = self.chart_point(t);
        match self.space {
            PathSpace::Tau | PathSpace::Xi => Ok(0.0),
            PathSpace::Lambda => {
                let tau = v_inverse(&chart, &self.domain)?;
                Ok(self.surface().row_space.range_residual(&tau))
            }
            PathSpace::Surface => {
                let xi = u_inverse(&chart, &self.domain)?;
                let tau = chi(&xi, &self.domain)?;
                Ok(self.surface().row_space.range_residual(&tau))
            }
        }
    }

    /// Chart image of the evaluated path point at `t`.
    pub fn transformed(&self, t: f64) -> Result<DVector<f64>> {
        match self.space {
            PathSpace::Tau => v_map(&TauPoint::new(self.evaluate(t)?)?, &self.domain),
            PathSpace::Xi | PathSpace::Surface => {
                let point = if t == 0.0 || t == 1.0 {
                    self.domain.interior(self.evaluate(t)?.as_slice())?
                } else {
                    self.evaluate_interior(t)?
                };
                u_map(&point, &self.domain)
            }
            PathSpace::Lambda => {
                let lambda = self.evaluate(t)?;
                let tau = TauPoint::new(self.surface().matrix.transpose() * lambda)?;
                v_map(&tau, &self.domain)
            }
        }
    }

    /// Largest sup-norm deviation of the transformed path from the straight chart
    /// segment over a uniform grid.
    pub fn affinity_deviation(&self, grid: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in unit_grid(grid) {
            worst = worst.max((self.transformed(t)? - self.chart_point(t)).amax());
        }
        Ok(worst)
    }

    /// Largest [`audit_residual`](Self::audit_residual) over a uniform grid.
    pub fn max_audit_residual(&self, grid: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in unit_grid(grid) {
            worst = worst.max(self.audit_residual(t)?);
        }
        Ok(worst)
    }

    /// `n` uniformly spaced samples `(t, point)`.
    pub fn samples(&self, n: usize) -> Result<Vec<(f64, DVector<f64>)>> {
        unit_grid(n).map(|t| Ok((t, self.evaluate(t)?))).collect()
    }
}
