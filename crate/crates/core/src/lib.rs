//! Entropy-regularized solutions of box-constrained linear inverse problems.
//!
//! Given `A xi = y` with every `xi_j` confined to `[a_j, b_j]`, the solver
//! returns the minimizer of the Fermi-Dirac entropy
//! `sum_j p_j ln p_j + q_j ln q_j` (`p_j = (xi_j - a_j)/D_j`, `q_j = 1 - p_j`)
//! on the feasible set, found by Newton ascent on the concave dual.
//! Around it sit the Hessian-metric geometry of the box and of the solution
//! surface, applications to probability reconstruction, and a primal
//! reference solver used for cross-checks.

pub mod applications;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod solver;

pub use entropy::{BoxDomain, InteriorPoint, TauPoint};
pub use error::{Error, Result};
pub use problem::{InverseProblem, SolverOptions};
pub use solver::{solve, DualSolution, SolveStatus};
