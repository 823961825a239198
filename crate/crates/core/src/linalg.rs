//! Small dense helpers around a thin SVD of the constraint matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular-value view of a `K x N` matrix `A`, truncated at its numerical rank
/// (threshold `K * eps * sigma_max`).
#[derive(Debug, Clone)]
pub struct RowSpace {
    rows: usize,
    cols: usize,
    /// `K x r` left singular vectors.
    left: DMatrix<f64>,
    singular: DVector<f64>,
    /// `N x r` right singular vectors; an orthonormal basis of `range(A^t)`.
    right: DMatrix<f64>,
}

impl RowSpace {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (rows, cols) = a.shape();
        let svd = a.clone().svd(true, true);
        let u = svd.u.expect("svd computed with u");
        let v_t = svd.v_t.expect("svd computed with v_t");
        let sigma_max = svd.singular_values.max();
        let threshold = rows as f64 * f64::EPSILON * sigma_max;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| sigma_max > 0.0 && svd.singular_values[i] > threshold)
            .collect();
        let r = keep.len();
        let left = DMatrix::from_fn(rows, r, |i, c| u[(i, keep[c])]);
        let right = DMatrix::from_fn(cols, r, |i, c| v_t[(keep[c], i)]);
        let singular = DVector::from_fn(r, |c, _| svd.singular_values[keep[c]]);
        Self {
            rows,
            cols,
            left,
            singular,
            right,
        }
    }

    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    pub fn is_full_row_rank(&self) -> bool {
        self.rank() == self.rows
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular
    }

    /// Orthogonal projection of an `N`-vector onto `range(A^t)`.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.right * (self.right.transpose() * x)
    }

    /// Euclidean distance of an `N`-vector from `range(A^t)`.
    pub fn range_residual(&self, x: &DVector<f64>) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Minimum-norm least-squares solution of `A^t lambda = tau`.
    pub fn solve_transpose(&self, tau: &DVector<f64>) -> DVector<f64> {
        let coeffs = self.right.transpose() * tau;
        let scaled = coeffs.component_div(&self.singular);
        &self.left * scaled
    }

    /// Orthonormal basis of `ker(A)` as the columns of an `N x (N - r)` matrix.
    pub fn kernel_basis(&self) -> DMatrix<f64> {
        let n = self.cols;
        let dim = n - self.rank();
        if dim == 0 {
            return DMatrix::zeros(n, 0);
        }
        let complement = DMatrix::identity(n, n) - &self.right * self.right.transpose();
        let eig = SymmetricEigen::new(complement);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        DMatrix::from_fn(n, dim, |i, c| eig.eigenvectors[(i, order[c])])
    }
}

/// Numerical rank with the `K * eps * sigma_max` threshold.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    RowSpace::new(a).rank()
}

/// Solves `(m + mu I) x = rhs` by Cholesky. `mu` starts at `floor` times the
/// largest diagonal entry and grows tenfold until the factorization succeeds.
/// Returns the solution and the `mu` used, or `None` once `mu / scale` passes
/// `ceiling`.
pub fn damped_spd_solve(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    floor: f64,
    ceiling: f64,
) -> Option<(DVector<f64>, f64)> {
    let n = m.nrows();
    let largest = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let scale = if largest > 0.0 { largest } else { 1.0 };
    let mut mu = floor * scale;
    loop {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += mu;
        }
        if let Some(chol) = shifted.cholesky() {
            let x = chol.solve(rhs);
            if x.iter().all(|v| v.is_finite()) {
                return Some((x, mu));
            }
        }
        mu *= 10.0;
        if mu > ceiling * scale {
            return None;
        }
    }
}
