//! Reconstruction of discrete probabilities:
//!
//! * from expected values of a few observables ([`solve_moment_problem`]),
//! * from expected values when each probability is known to lie in a band
//!   ([`solve_banded_problem`]),
//! * of a joint table from its row and column marginals, optionally under a
//!   linear cost constraint ([`solve_marginal_problem`], [`cost_sweep`]).

use nalgebra::{DMatrix, DVector};

use crate::entropy::{logistic, BoxDomain};
use crate::error::{check_finite, check_len, Error, Result};
use crate::problem::{InverseProblem, SolverOptions};
use crate::solver::{attainable_interval, solve, DualSolution, SolveStatus};

/// Tolerance on `sum P_i - sum Q_j`.
pub const MARGINAL_SUM_TOL: f64 = 1e-10;

fn require_converged(solution: DualSolution, what: &str) -> Result<DualSolution> {
    match solution.status {
        SolveStatus::Converged => Ok(solution),
        SolveStatus::InfeasibleDatum => Err(Error::InfeasibleDatum(format!(
            "{what}: multipliers diverged after {} iterations (residual {:e})",
            solution.iterations, solution.residual_inf
        ))),
        other => Err(Error::NotConverged(format!(
            "{what}: status {} after {} iterations (residual {:e})",
            other.name(),
            solution.iterations,
            solution.residual_inf
        ))),
    }
}

fn stack_rows(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let n = top.ncols().max(bottom.ncols());
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), n);
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

/// Probabilities on `N` points constrained by the expected values of `K - 1`
/// observables. The normalization row is added internally.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProblem {
    observables: DMatrix<f64>,
    moments: DVector<f64>,
    domain: BoxDomain,
    options: SolverOptions,
}

impl MomentProblem {
    /// `observables` is `(K-1) x N` (possibly with zero rows); the box defaults
    /// to `[0, 1]^N`.
    pub fn new(observables: DMatrix<f64>, moments: DVector<f64>) -> Result<Self> {
        let n = observables.ncols();
        if n == 0 {
            return Err(Error::InvalidInput("moment problem needs at least one point".into()));
        }
        check_len("moment values", observables.nrows(), moments.len())?;
        check_finite("observables", observables.as_slice())?;
        check_finite("moment values", moments.as_slice())?;
        Ok(Self {
            observables,
            moments,
            domain: BoxDomain::unit(n),
            options: SolverOptions::default(),
        })
    }

    /// Only normalization, no observables.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn with_box(mut self, domain: BoxDomain) -> Result<Self> {
        check_len("moment problem box", self.observables.ncols(), domain.dim())?;
        self.domain = domain;
        Ok(self)
    }

    pub fn with_options(mut self, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        self.options = options;
        Ok(self)
    }

    pub fn observables(&self) -> &DMatrix<f64> {
        &self.observables
    }

    /// The stacked problem `[1^t; B] p = (1, y)`.
    pub fn to_inverse_problem(&self) -> Result<InverseProblem> {
        let n = self.observables.ncols();
        let a = stack_rows(&DMatrix::from_element(1, n, 1.0), &self.observables);
        let mut y = DVector::zeros(a.nrows());
        y[0] = 1.0;
        y.rows_mut(1, self.moments.len()).copy_from(&self.moments);
        InverseProblem::new(a, y, self.domain.clone())?.with_options(self.options)
    }
}

/// Output of [`solve_moment_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSolution {
    pub probabilities: DVector<f64>,
    /// Multiplier of the normalization row.
    pub normalizer: f64,
    /// Multipliers of the observable rows.
    pub moment_multipliers: DVector<f64>,
    pub solution: DualSolution,
}

pub fn solve_moment_problem(mp: &MomentProblem) -> Result<MomentSolution> {
    let problem = mp.to_inverse_problem()?;
    let solution = require_converged(solve(&problem)?, "moment problem")?;
    let lambda = &solution.lambda_star;
    Ok(MomentSolution {
        probabilities: solution.xi_star.coords().clone(),
        normalizer: lambda[0],
        moment_multipliers: lambda.rows(1, lambda.len() - 1).into_owned(),
        solution,
    })
}

/// Explicit logistic form of the unit-box moment solution:
/// `p_j = e^{s_j} / (1 + e^{s_j})` with `s = normalizer + B^t mu`.
pub fn logistic_form(normalizer: f64, multipliers: &DVector<f64>, observables: &DMatrix<f64>) -> DVector<f64> {
    let exponent = observables.transpose() * multipliers;
    exponent.map(|s| logistic(normalizer + s))
}

/// Prior probabilities with a band `(p0_j - below_j, p0_j + above_j)` each.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorBand {
    center: DVector<f64>,
    below: DVector<f64>,
    above: DVector<f64>,
    allow_negative: bool,
}

impl PriorBand {
    pub fn symmetric(p0: DVector<f64>, delta: DVector<f64>) -> Result<Self> {
        Self::asymmetric(p0, delta.clone(), delta)
    }

    pub fn asymmetric(p0: DVector<f64>, below: DVector<f64>, above: DVector<f64>) -> Result<Self> {
        check_len("band lower widths", p0.len(), below.len())?;
        check_len("band upper widths", p0.len(), above.len())?;
        check_finite("prior", p0.as_slice())?;
        for (name, w) in [("lower", &below), ("upper", &above)] {
            check_finite("band widths", w.as_slice())?;
            if let Some(j) = w.iter().position(|&d| d <= 0.0) {
                return Err(Error::InvalidInput(format!("band {name} width {j} must be positive, got {}", w[j])));
            }
        }
        let band = Self {
            center: p0,
            below,
            above,
            allow_negative: false,
        };
        band.check_nonnegative()?;
        Ok(band)
    }

    /// Accept bands reaching below zero.
    pub fn allowing_negative(mut self) -> Self {
        self.allow_negative = true;
        self
    }

    fn check_nonnegative(&self) -> Result<()> {
        if self.allow_negative {
            return Ok(());
        }
        match (0..self.center.len()).find(|&j| self.center[j] - self.below[j] < 0.0) {
            Some(j) => Err(Error::InvalidInput(format!(
                "band {j} reaches below zero ({} - {}); use allowing_negative to override",
                self.center[j], self.below[j]
            ))),
            None => Ok(()),
        }
    }

    pub fn to_box(&self) -> Result<BoxDomain> {
        BoxDomain::new(
            (&self.center - &self.below).as_slice().to_vec(),
            (&self.center + &self.above).as_slice().to_vec(),
        )
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }
}

/// Output of [`solve_banded_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSolution {
    pub probabilities: DVector<f64>,
    pub solution: DualSolution,
}

/// Probabilities inside a prior band matching `B p = y`, with an optional
/// normalization row `sum p = 1` prepended.
pub fn solve_banded_problem(
    band: &PriorBand,
    observables: &DMatrix<f64>,
    moments: &DVector<f64>,
    normalize: bool,
) -> Result<BandedSolution> {
    let n = band.center.len();
    check_len("band observables", n, observables.ncols())?;
    check_len("band moments", observables.nrows(), moments.len())?;
    let domain = band.to_box()?;
    let (a, y) = if normalize {
        let a = stack_rows(&DMatrix::from_element(1, n, 1.0), observables);
        let mut y = DVector::zeros(a.nrows());
        y[0] = 1.0;
        y.rows_mut(1, moments.len()).copy_from(moments);
        (a, y)
    } else {
        (observables.clone(), moments.clone())
    };
    if a.nrows() == 0 {
        return Err(Error::InvalidInput("banded problem needs at least one constraint".into()));
    }
    for row in 0..a.nrows() {
        let coeffs: Vec<f64> = a.row(row).iter().copied().collect();
        let (min, max) = attainable_interval(&coeffs, domain.lower().as_slice(), domain.upper().as_slice());
        if !(y[row] > min && y[row] < max) {
            return Err(Error::BandViolation {
                row,
                value: y[row],
                min,
                max,
            });
        }
    }
    let problem = InverseProblem::new(a, y, domain)?;
    let solution = require_converged(solve(&problem)?, "banded problem")?;
    Ok(BandedSolution {
        probabilities: solution.xi_star.coords().clone(),
        solution,
    })
}

/// The `(N + M) x NM` operator mapping a lexicographically vectorized table
/// (`x[i M + j] = P(i, j)`) to its row sums followed by its column sums.
pub fn build_marginal_operator(rows: usize, cols: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(rows + cols, rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            c[(i, i * cols + j)] = 1.0;
            c[(rows + j, i * cols + j)] = 1.0;
        }
    }
    c
}

/// A linear cost constraint `sum_n W_n x_n = w` on the vectorized table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostConstraint {
    pub weights: DVector<f64>,
    pub target: f64,
}

/// A joint table to be reconstructed from its marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalProblem {
    row_marginals: DVector<f64>,
    col_marginals: DVector<f64>,
    cost: Option<CostConstraint>,
    cell_box: BoxDomain,
    options: SolverOptions,
}

impl MarginalProblem {
    pub fn new(row_marginals: DVector<f64>, col_marginals: DVector<f64>) -> Result<Self> {
        let (n, m) = (row_marginals.len(), col_marginals.len());
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("marginals must be non-empty".into()));
        }
        for (name, v) in [("row marginals", &row_marginals), ("column marginals", &col_marginals)] {
            check_finite(name, v.as_slice())?;
            if let Some(i) = v.iter().position(|&x| x < 0.0) {
                return Err(Error::InvalidInput(format!("{name}: entry {i} is negative ({})", v[i])));
            }
        }
        let (row_total, col_total) = (row_marginals.sum(), col_marginals.sum());
        if (row_total - col_total).abs() > MARGINAL_SUM_TOL {
            return Err(Error::MarginalMismatch { row_total, col_total });
        }
        Ok(Self {
            row_marginals,
            col_marginals,
            cost: None,
            cell_box: BoxDomain::unit(n * m),
            options: SolverOptions::default(),
        })
    }

    pub fn with_cost(mut self, weights: DVector<f64>, target: f64) -> Result<Self> {
        check_len("cost weights", self.cells(), weights.len())?;
        check_finite("cost weights", weights.as_slice())?;
        check_finite("cost target", &[target])?;
        self.cost = Some(CostConstraint { weights, target });
        Ok(self)
    }

    pub fn without_cost(&self) -> Self {
        Self {
            cost: None,
            ..self.clone()
        }
    }

    pub fn with_cell_box(mut self, cell_box: BoxDomain) -> Result<Self> {
        check_len("cell box", self.cells(), cell_box.dim())?;
        self.cell_box = cell_box;
        Ok(self)
    }

    pub fn with_options(mut self, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        self.options = options;
        Ok(self)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_marginals.len(), self.col_marginals.len())
    }

    fn cells(&self) -> usize {
        self.row_marginals.len() * self.col_marginals.len()
    }

    pub fn cost(&self) -> Option<&CostConstraint> {
        self.cost.as_ref()
    }

    /// `A = [C; W^t]`, `y = (P, Q, w)`, or `A = C` without a cost.
    pub fn to_inverse_problem(&self) -> Result<InverseProblem> {
        let (n, m) = self.shape();
        let c = build_marginal_operator(n, m);
        let mut y: Vec<f64> = self.row_marginals.iter().chain(self.col_marginals.iter()).copied().collect();
        let a = match &self.cost {
            Some(cost) => {
                y.push(cost.target);
                stack_rows(&c, &DMatrix::from_row_slice(1, n * m, cost.weights.as_slice()))
            }
            None => c,
        };
        InverseProblem::new(a, DVector::from_vec(y), self.cell_box.clone())?.with_options(self.options)
    }
}

/// Output of [`solve_marginal_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSolution {
    /// `N x M` table.
    pub table: DMatrix<f64>,
    /// Largest absolute row-sum error.
    pub row_residual: f64,
    /// Largest absolute column-sum error.
    pub col_residual: f64,
    /// Absolute cost error, when a cost is imposed.
    pub cost_residual: Option<f64>,
    pub solution: DualSolution,
}

pub fn solve_marginal_problem(mp: &MarginalProblem) -> Result<MarginalSolution> {
    let problem = mp.to_inverse_problem()?;
    let solution = require_converged(solve(&problem)?, "marginal problem")?;
    let (n, m) = mp.shape();
    let x = solution.xi_star.coords();
    let table = DMatrix::from_fn(n, m, |i, j| x[i * m + j]);
    let row_residual = (0..n)
        .map(|i| (table.row(i).sum() - mp.row_marginals[i]).abs())
        .fold(0.0, f64::max);
    let col_residual = (0..m)
        .map(|j| (table.column(j).sum() - mp.col_marginals[j]).abs())
        .fold(0.0, f64::max);
    let cost_residual = mp.cost.as_ref().map(|c| (c.weights.dot(x) - c.target).abs());
    Ok(MarginalSolution {
        table,
        row_residual,
        col_residual,
        cost_residual,
        solution,
    })
}

/// One step of a [`cost_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepStep {
    pub w: f64,
    pub outcome: std::result::Result<MarginalSolution, Error>,
}

/// Solves the cost-constrained problem for each `w` in turn, stopping after the
/// first `w` that fails (typically a cost below the attainable range).
/// The weights come from `mp`'s cost constraint; its target is ignored.
pub fn cost_sweep(mp: &MarginalProblem, w_values: &[f64]) -> Result<Vec<SweepStep>> {
    let weights = mp
        .cost
        .as_ref()
        .map(|c| c.weights.clone())
        .ok_or_else(|| Error::InvalidInput("cost sweep needs cost weights".into()))?;
    // The sweep only makes sense from a feasible unconstrained table.
    solve_marginal_problem(&mp.without_cost())?;
    let mut steps = Vec::with_capacity(w_values.len());
    for &w in w_values {
        let outcome = mp
            .without_cost()
            .with_cost(weights.clone(), w)
            .and_then(|p| solve_marginal_problem(&p));
        let failed = outcome.is_err();
        steps.push(SweepStep { w, outcome });
        if failed {
            break;
        }
    }
    Ok(steps)
}
