use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::entropy::BoxDomain;
use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::RowSpace;

/// Knobs of the damped Newton ascent on the dual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop once `||y - A phi(A^t lambda)||_inf` drops to this level.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Smallest Tikhonov shift tried on the Newton matrix, relative to its diagonal.
    pub damping_floor: f64,
    /// Multiplier norm beyond which a stalled ascent is declared divergent.
    pub divergence_norm: f64,
    /// Armijo sufficient-increase constant.
    pub armijo_c: f64,
    /// Step contraction factor of the backtracking line search.
    pub backtrack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 200,
            damping_floor: 1e-12,
            divergence_norm: 1e4,
            armijo_c: 1e-4,
            backtrack: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("damping_floor", self.damping_floor),
            ("divergence_norm", self.divergence_norm),
            ("armijo_c", self.armijo_c),
            ("backtrack", self.backtrack),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("solver option {name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("solver option max_iter must be positive".into()));
        }
        if self.armijo_c >= 1.0 || self.backtrack >= 1.0 {
            return Err(Error::InvalidInput("armijo_c and backtrack must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One instance of `A xi = y` with `xi` in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseProblem {
    a: DMatrix<f64>,
    y: DVector<f64>,
    domain: BoxDomain,
    options: SolverOptions,
}

impl InverseProblem {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>, domain: BoxDomain) -> Result<Self> {
        let (k, n) = a.shape();
        if k == 0 || n == 0 {
            return Err(Error::InvalidInput(format!("matrix A must be non-empty, got {k}x{n}")));
        }
        check_len("datum y", k, y.len())?;
        check_len("box dimension", n, domain.dim())?;
        check_finite("matrix A", a.as_slice())?;
        check_finite("datum y", y.as_slice())?;
        Ok(Self {
            a,
            y,
            domain,
            options: SolverOptions::default(),
        })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64], domain: BoxDomain) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row {i} of A has {} entries, expected {n}",
                rows[i].len()
            )));
        }
        let a = DMatrix::from_fn(k, n, |i, j| rows[i][j]);
        Self::new(a, DVector::from_column_slice(y), domain)
    }

    pub fn with_options(mut self, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        self.options = options;
        Ok(self)
    }

    /// Same matrix and box, new datum.
    pub fn with_datum(&self, y: DVector<f64>) -> Result<Self> {
        check_len("datum y", self.rows(), y.len())?;
        check_finite("datum y", y.as_slice())?;
        Ok(Self { y, ..self.clone() })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn datum(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// `K`.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// `N`.
    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn row_space(&self) -> RowSpace {
        RowSpace::new(&self.a)
    }

    pub(crate) fn check_multiplier(&self, lambda: &DVector<f64>) -> Result<()> {
        check_len("multiplier", self.rows(), lambda.len())?;
        check_finite("multiplier", lambda.as_slice())
    }
}
