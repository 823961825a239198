//! Randomized self-checks behind `entroinv verify`.
//!
//! Each suite draws its instances from its own seeded stream, so running one
//! suite alone reproduces the same rows it contributes to `all`. Rows are
//! either asserted (they decide the exit code) or audits (reported only).

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::applications::{
    logistic_form, solve_marginal_problem, solve_moment_problem, MarginalProblem, MomentProblem,
};
use crate::entropy::{
    bregman, chi, entropy_psi, grad_m, hessian_m, hessian_psi, log_partition, phi, BoxDomain, InteriorPoint,
    TauPoint,
};
use crate::error::{Error, Result};
use crate::geometry::{
    bound_lower_family, bound_upper_logit, dist_g, dist_h, geodesic_lambda, geodesic_tau, geodesic_xi,
    induced_metric_g, orthogonality_defect, surface_geodesic, transport_check, u_map, unit_grid, v_map, CurveSample,
    LowerBoundOrder, DEFAULT_GRID,
};
use crate::oracle::oracle_solve;
use crate::problem::InverseProblem;
use crate::solver::{sensitivity_lambda, solve, SolveStatus};

/// Seed used when neither `--seed` nor `ENTROINV_SEED` is given.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Entropy,
    Geometry,
    Solver,
    Bounds,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Entropy => "entropy",
            Suite::Geometry => "geometry",
            Suite::Solver => "solver",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Entropy, Suite::Geometry, Suite::Solver, Suite::Bounds],
            one => vec![one],
        }
    }

    fn stream(self) -> u64 {
        match self {
            Suite::Entropy => 1,
            Suite::Geometry => 2,
            Suite::Solver => 3,
            Suite::Bounds => 4,
            Suite::All => 0,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(Suite::Entropy),
            "geometry" => Ok(Suite::Geometry),
            "solver" => Ok(Suite::Solver),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidInput(format!(
                "unknown suite {other:?} (expected entropy, geometry, solver, bounds or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Assert,
    Audit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: &'static str,
    pub kind: CheckKind,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub suite: Suite,
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.kind == CheckKind::Audit || r.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "entroinv verify suite={} seed={}", self.suite.name(), self.seed);
        let _ = writeln!(
            out,
            "{:<9} {:<32} {:<6} {:>11} {:>11}  result",
            "suite", "check", "kind", "value", "limit"
        );
        for r in &self.rows {
            let (kind, result) = match r.kind {
                CheckKind::Assert => ("assert", if r.passed { "PASS" } else { "FAIL" }),
                CheckKind::Audit => ("audit", "INFO"),
            };
            let limit = if r.limit.is_nan() { "-".to_string() } else { format!("{:.3e}", r.limit) };
            let _ = write!(
                out,
                "{:<9} {:<32} {:<6} {:>11.3e} {:>11}  {}",
                r.suite, r.name, kind, r.value, limit, result
            );
            if !r.note.is_empty() {
                let _ = write!(out, "  ({})", r.note);
            }
            out.push('\n');
        }
        let asserted = self.rows.iter().filter(|r| r.kind == CheckKind::Assert).count();
        let failed = self.rows.iter().filter(|r| r.kind == CheckKind::Assert && !r.passed).count();
        let audits = self.rows.len() - asserted;
        let _ = writeln!(
            out,
            "summary: {} of {asserted} asserted checks passed, {failed} failed, {audits} audits",
            asserted - failed
        );
        out
    }
}

pub fn run(suite: Suite, seed: u64) -> VerifyReport {
    let mut rows = Vec::new();
    for part in suite.parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ part.stream().wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut ctx = Ctx {
            suite: part.name(),
            rows: &mut rows,
        };
        match part {
            Suite::Entropy => entropy_suite(&mut ctx, &mut rng),
            Suite::Geometry => geometry_suite(&mut ctx, &mut rng),
            Suite::Solver => solver_suite(&mut ctx, &mut rng),
            Suite::Bounds => bounds_suite(&mut ctx, &mut rng),
            Suite::All => unreachable!("expanded above"),
        }
    }
    VerifyReport { seed, suite, rows }
}

struct Ctx<'a> {
    suite: &'static str,
    rows: &'a mut Vec<CheckRow>,
}

impl Ctx<'_> {
    /// Asserts `value <= limit`; an error fails the row.
    fn at_most(&mut self, name: &'static str, limit: f64, value: Result<f64>) {
        let (value, passed, note) = match value {
            Ok(v) => (v, v <= limit, String::new()),
            Err(e) => (f64::NAN, false, e.to_string()),
        };
        self.rows.push(CheckRow {
            suite: self.suite,
            name,
            kind: CheckKind::Assert,
            value,
            limit,
            passed,
            note,
        });
    }

    fn audit(&mut self, name: &'static str, value: Result<f64>, note: &str) {
        let (value, note) = match value {
            Ok(v) => (v, note.to_string()),
            Err(e) => (f64::NAN, e.to_string()),
        };
        self.rows.push(CheckRow {
            suite: self.suite,
            name,
            kind: CheckKind::Audit,
            value,
            limit: f64::NAN,
            passed: true,
            note,
        });
    }
}

/// Box with `a_j` in `[-1, 1]` and widths in `[min_width, max_width]`.
pub fn random_box(rng: &mut impl Rng, n: usize, min_width: f64, max_width: f64) -> BoxDomain {
    let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = lower
        .iter()
        .map(|a| a + rng.random_range(min_width..=max_width))
        .collect();
    BoxDomain::new(lower, upper).expect("widths are positive")
}

/// Interior point with face fractions in `[lo, 1 - lo]`.
pub fn random_interior(rng: &mut impl Rng, domain: &BoxDomain, lo: f64) -> InteriorPoint {
    let xi: Vec<f64> = (0..domain.dim())
        .map(|j| domain.lower()[j] + domain.width(j) * rng.random_range(lo..1.0 - lo))
        .collect();
    domain.interior(&xi).expect("fractions stay inside")
}

/// Interior point whose coordinates are sometimes pushed close to a face.
fn random_interior_wide(rng: &mut impl Rng, domain: &BoxDomain) -> InteriorPoint {
    let xi: Vec<f64> = (0..domain.dim())
        .map(|j| {
            let p = if rng.random_bool(0.3) {
                let tiny = 10f64.powf(-rng.random_range(1.0..8.0));
                if rng.random_bool(0.5) {
                    tiny
                } else {
                    1.0 - tiny
                }
            } else {
                rng.random_range(0.001..0.999)
            };
            domain.lower()[j] + domain.width(j) * p
        })
        .collect();
    domain.interior(&xi).expect("fractions stay inside")
}

/// `tau` with `|d_j tau_j| <= bound`.
pub fn random_tau(rng: &mut impl Rng, domain: &BoxDomain, bound: f64) -> TauPoint {
    let tau: Vec<f64> = (0..domain.dim())
        .map(|j| rng.random_range(-bound..=bound) / domain.half_width(j))
        .collect();
    TauPoint::from_slice(&tau).expect("finite")
}

/// `K x N` instance with entries of `A` in `[-1, 1]` and `y = A xi` for an
/// interior `xi`, so the datum is attainable.
pub fn random_feasible_problem(rng: &mut impl Rng, k: usize, domain: BoxDomain) -> InverseProblem {
    let n = domain.dim();
    let a = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
    let xi = random_interior(rng, &domain, 0.05);
    let y = &a * xi.coords();
    InverseProblem::new(a, y, domain).expect("consistent dimensions")
}

fn entropy_suite(ctx: &mut Ctx, rng: &mut ChaCha8Rng) {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(1..=8);
        let domain = random_box(rng, n, 0.5, 3.0);
        let psi = entropy_psi(&domain.center(), &domain);
        worst = worst.max(psi.map(|v| (v - n as f64 * 0.5f64.ln()).abs()).unwrap_or(f64::NAN));
    }
    ctx.at_most("psi_midpoint_value", 1e-12, Ok(worst));

    let mut non_increasing = 0usize;
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let domain = random_box(rng, n, 0.5, 3.0);
        let vertex: Vec<f64> = (0..n)
            .map(|j| if rng.random_bool(0.5) { domain.lower()[j] } else { domain.upper()[j] })
            .collect();
        let mut last = f64::NEG_INFINITY;
        for i in 0..=40 {
            let s = (i as f64 / 40.0) * (1.0 - 1e-9);
            let xi: Vec<f64> = (0..n).map(|j| domain.midpoint(j) + s * (vertex[j] - domain.midpoint(j))).collect();
            let v = domain.interior(&xi).and_then(|p| entropy_psi(&p, &domain)).unwrap_or(f64::NAN);
            if !(v > last) || v > 0.0 {
                non_increasing += 1;
            }
            last = v;
        }
    }
    ctx.at_most("psi_monotone_to_vertex", 0.0, Ok(non_increasing as f64));

    let mut inverse_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    for _ in 0..100 {
        let domain = random_box(rng, 10, 0.5, 3.0);
        let tau = random_tau(rng, &domain, 20.0);
        let check = || -> Result<(f64, f64)> {
            let xi = phi(&tau, &domain)?;
            let back = chi(&xi, &domain)?;
            let inv = (0..tau.len())
                .map(|j| (back[j] - tau[j]).abs() / (1.0 + tau[j].abs()))
                .fold(0.0, f64::max);
            let h = hessian_m(&tau, &domain)?;
            let g = hessian_psi(&xi, &domain)?;
            let prod = (0..tau.len()).map(|j| (h[j] * g[j] - 1.0).abs()).fold(0.0, f64::max);
            Ok((inv, prod))
        };
        let (i, p) = check().unwrap_or((f64::NAN, f64::NAN));
        inverse_err = inverse_err.max(i);
        hess_err = hess_err.max(p);
    }
    ctx.at_most("phi_chi_inverse", 1e-9, Ok(inverse_err));
    ctx.at_most("hessian_product_identity", 1e-9, Ok(hess_err));

    let mut grad_err: f64 = 0.0;
    let mut fy_err: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let domain = random_box(rng, n, 0.5, 3.0);
        let tau = random_tau(rng, &domain, 5.0);
        let check = || -> Result<(f64, f64)> {
            let grad = grad_m(&tau, &domain)?;
            let mut err: f64 = 0.0;
            for j in 0..n {
                let step = 1e-6 * (1.0 + tau[j].abs());
                let mut plus = tau.clone().into_inner();
                let mut minus = plus.clone();
                plus[j] += step;
                minus[j] -= step;
                let fd = (log_partition(&TauPoint::new(plus)?, &domain)?
                    - log_partition(&TauPoint::new(minus)?, &domain)?)
                    / (2.0 * step);
                err = err.max((fd - grad[j]).abs() / (1.0 + grad[j].abs()));
            }
            let xi = phi(&tau, &domain)?;
            let m = log_partition(&tau, &domain)?;
            let psi = entropy_psi(&xi, &domain)?;
            let fy = (m + psi - tau.dot(xi.coords())).abs() / (1.0 + m.abs());
            Ok((err, fy))
        };
        let (g, f) = check().unwrap_or((f64::NAN, f64::NAN));
        grad_err = grad_err.max(g);
        fy_err = fy_err.max(f);
    }
    ctx.at_most("grad_m_finite_difference", 1e-6, Ok(grad_err));
    ctx.at_most("conjugacy_identity", 1e-10, Ok(fy_err));

    let mut negative = 0usize;
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let domain = random_box(rng, n, 0.5, 3.0);
        let xi = random_interior_wide(rng, &domain);
        let eta = random_interior_wide(rng, &domain);
        match bregman(&xi, &eta, &domain) {
            Ok(v) if v >= 0.0 => {}
            _ => negative += 1,
        }
    }
    ctx.at_most("bregman_nonnegative", 0.0, Ok(negative as f64));
}

/// Simpson arc length of the `g`-speed along an `xi` path, with the velocity
/// from central differences of the path itself.
fn simpson_g_length(path: &crate::geometry::GeodesicPath, domain: &BoxDomain) -> Result<f64> {
    let intervals = 200;
    let h = 1.0 / intervals as f64;
    let fd = 1e-6;
    let speed = |t: f64| -> Result<f64> {
        let (t0, t1) = ((t - fd).max(0.0), (t + fd).min(1.0));
        let velocity = (path.evaluate(t1)? - path.evaluate(t0)?) / (t1 - t0);
        let g = hessian_psi(&path.evaluate_interior(t)?, domain)?;
        Ok((0..velocity.len()).map(|j| g[j] * velocity[j] * velocity[j]).sum::<f64>().sqrt())
    };
    let mut sum = speed(0.0)? + speed(1.0)?;
    for i in 1..intervals {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * speed(i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

fn geometry_suite(ctx: &mut Ctx, rng: &mut ChaCha8Rng) {
    let mut lemma: f64 = 0.0;
    for _ in 0..100 {
        let domain = random_box(rng, 10, 0.5, 3.0);
        let tau = random_tau(rng, &domain, 20.0);
        let dev = (|| -> Result<f64> {
            let lhs = u_map(&phi(&tau, &domain)?, &domain)?;
            Ok((lhs - v_map(&tau, &domain)?).amax())
        })();
        lemma = lemma.max(dev.unwrap_or(f64::NAN));
    }
    ctx.at_most("transport_lemma", 1e-10, Ok(lemma));

    let mut theorem: f64 = 0.0;
    let mut affinity: f64 = 0.0;
    let mut isometry: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let domain = random_box(rng, n, 0.5, 3.0);
        let t0 = random_tau(rng, &domain, 10.0);
        let t1 = random_tau(rng, &domain, 10.0);
        let out = (|| -> Result<(f64, f64, f64)> {
            let tr = transport_check(&t0, &t1, &domain, DEFAULT_GRID)?;
            let x0 = phi(&t0, &domain)?;
            let x1 = phi(&t1, &domain)?;
            let aff = geodesic_xi(&x0, &x1, &domain)?
                .affinity_deviation(65)?
                .max(geodesic_tau(&t0, &t1, &domain)?.affinity_deviation(65)?);
            let iso = (dist_h(&t0, &t1, &domain)? - dist_g(&x0, &x1, &domain)?).abs();
            Ok((tr, aff, iso))
        })();
        let (tr, aff, iso) = out.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        theorem = theorem.max(tr);
        affinity = affinity.max(aff);
        isometry = isometry.max(iso);
    }
    ctx.at_most("transport_theorem", 1e-9, Ok(theorem));
    ctx.at_most("geodesic_affinity", 1e-10, Ok(affinity));
    ctx.at_most("isometry", 1e-12, Ok(isometry));

    let mut arc: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(1..=4);
        let domain = random_box(rng, n, 0.5, 3.0);
        let x0 = random_interior(rng, &domain, 0.05);
        let x1 = random_interior(rng, &domain, 0.05);
        let rel = (|| -> Result<f64> {
            let path = geodesic_xi(&x0, &x1, &domain)?;
            let quad = simpson_g_length(&path, &domain)?;
            Ok((quad - path.distance()).abs() / path.distance().max(1e-300))
        })();
        arc = arc.max(rel.unwrap_or(f64::NAN));
    }
    ctx.at_most("arc_length_quadrature", 1e-6, Ok(arc));

    let mut not_pd = 0usize;
    let mut ortho: f64 = 0.0;
    let mut rho: f64 = 0.0;
    let mut surface_r: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(2..=7);
        let k = rng.random_range(1..n);
        let domain = random_box(rng, n, 0.5, 3.0);
        let problem = random_feasible_problem(rng, k, domain);
        let coeffs: Vec<DVector<f64>> = (0..3)
            .map(|_| DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let out = (|| -> Result<(bool, f64, f64, f64)> {
            // lambda(t) = c0 + sin(t) c1 + t^2 c2.
            let samples: Vec<CurveSample> = unit_grid(11)
                .map(|t| CurveSample {
                    lambda: &coeffs[0] + &coeffs[1] * t.sin() + &coeffs[2] * (t * t),
                    velocity: &coeffs[1] * t.cos() + &coeffs[2] * (2.0 * t),
                })
                .collect();
            let pd = samples
                .iter()
                .map(|s| induced_metric_g(&s.lambda, &problem).map(|g| g.min_eigenvalue() > 0.0))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            let defect = orthogonality_defect(&problem, &samples)?;
            let lam1 = &coeffs[0] + &coeffs[1];
            let path = geodesic_lambda(&coeffs[0], &lam1, &problem)?;
            let rho = path.max_audit_residual(DEFAULT_GRID)?;
            let at = problem.matrix().transpose();
            let xa = phi(&TauPoint::new(&at * &coeffs[0])?, problem.domain())?;
            let xb = phi(&TauPoint::new(&at * &lam1)?, problem.domain())?;
            let r = surface_geodesic(&xa, &xb, &problem)?.max_audit_residual(DEFAULT_GRID)?;
            Ok((pd, defect, rho, r))
        })();
        match out {
            Ok((pd, defect, r1, r2)) => {
                not_pd += usize::from(!pd);
                ortho = ortho.max(defect);
                rho = rho.max(r1);
                surface_r = surface_r.max(r2);
            }
            Err(_) => {
                not_pd += 1;
                ortho = f64::NAN;
            }
        }
    }
    ctx.at_most("induced_metric_positive", 0.0, Ok(not_pd as f64));
    ctx.at_most("orthogonality_defect", 1e-8, Ok(ortho));
    ctx.audit("lambda_geodesic_range_residual", Ok(rho), "max rho(t), 33-point grids");
    ctx.audit("surface_geodesic_range_residual", Ok(surface_r), "max r(t), 33-point grids");
}

fn solver_suite(ctx: &mut Ctx, rng: &mut ChaCha8Rng) {
    let mut gap: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=n.min(4));
        let domain = random_box(rng, n, 0.5, 3.0);
        let problem = random_feasible_problem(rng, k, domain);
        match solve(&problem) {
            Ok(s) if s.status == SolveStatus::Converged => {
                gap = gap.max(s.gap.abs());
                residual = residual.max(s.residual_inf);
            }
            _ => failures += 1,
        }
    }
    ctx.at_most("solve_converged", 0.0, Ok(failures as f64));
    ctx.at_most("duality_gap", 1e-8, Ok(gap));
    ctx.at_most("constraint_residual", 1e-8, Ok(residual));

    let mut xi_diff: f64 = 0.0;
    let mut obj_diff: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(1..=n.min(3));
        let domain = random_box(rng, n, 0.5, 3.0);
        let problem = random_feasible_problem(rng, k, domain);
        let out = (|| -> Result<(f64, f64)> {
            let s = solve(&problem)?;
            let o = oracle_solve(&problem)?;
            Ok(((s.xi_star.coords() - &o.xi).amax(), (s.psi_value - o.objective).abs()))
        })();
        let (x, f) = out.unwrap_or((f64::NAN, f64::NAN));
        xi_diff = xi_diff.max(x);
        obj_diff = obj_diff.max(f);
    }
    ctx.at_most("oracle_agreement_xi", 1e-6, Ok(xi_diff));
    ctx.at_most("oracle_agreement_psi", 1e-9, Ok(obj_diff));

    let mut missed = 0usize;
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let domain = random_box(rng, n, 0.5, 3.0);
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let top: f64 = (0..n)
            .map(|j| (row[j] * domain.lower()[j]).max(row[j] * domain.upper()[j]))
            .sum();
        let y = top + rng.random_range(0.01..1.0);
        let problem = InverseProblem::from_rows(&[row], &[y], domain).expect("consistent dimensions");
        match solve(&problem) {
            Ok(s) if s.status == SolveStatus::InfeasibleDatum => {}
            _ => missed += 1,
        }
    }
    ctx.at_most("infeasible_datum_detected", 0.0, Ok(missed as f64));

    let mut sens: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(1..=n.min(3));
        let domain = random_box(rng, n, 0.5, 3.0);
        let problem = random_feasible_problem(rng, k, domain);
        let out = (|| -> Result<f64> {
            let s = solve(&problem)?;
            let g_inv = sensitivity_lambda(&s, &problem)?;
            let eps = 1e-5;
            let mut fd = DMatrix::zeros(k, k);
            for c in 0..k {
                let mut up = problem.datum().clone();
                let mut down = up.clone();
                up[c] += eps;
                down[c] -= eps;
                let lp = solve(&problem.with_datum(up)?)?.lambda_star;
                let lm = solve(&problem.with_datum(down)?)?.lambda_star;
                fd.set_column(c, &((lp - lm) / (2.0 * eps)));
            }
            Ok((fd - &g_inv).norm() / g_inv.norm())
        })();
        sens = sens.max(out.unwrap_or(f64::NAN));
    }
    ctx.at_most("sensitivity_finite_difference", 1e-4, Ok(sens));

    let uniform = (|| -> Result<f64> {
        let s = solve_moment_problem(&MomentProblem::uniform(5)?)?;
        Ok(s.probabilities.iter().map(|p| (p - 0.2).abs()).fold(0.0, f64::max))
    })();
    ctx.at_most("moments_uniform", 1e-10, uniform);

    let marginals = (|| -> Result<f64> {
        let half = DVector::from_vec(vec![0.5, 0.5]);
        let s = solve_marginal_problem(&MarginalProblem::new(half.clone(), half)?)?;
        Ok(s.table.iter().map(|v| (v - 0.25).abs()).fold(0.0, f64::max))
    })();
    ctx.at_most("marginals_uniform", 1e-10, marginals);

    let mut logistic: f64 = 0.0;
    let mut reproduce: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(3..=6);
        let k = rng.random_range(1..=2);
        let b = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
        let weights = DVector::from_fn(n, |_, _| rng.random_range(0.1..1.0));
        let p = &weights / weights.sum();
        let moments = &b * &p;
        let rows = DVector::from_fn(2, |_, _| rng.random_range(0.1..1.0));
        let cols_raw = DVector::from_fn(3, |_, _| rng.random_range(0.1..1.0));
        let cols = &cols_raw * (rows.sum() / cols_raw.sum());
        let out = (|| -> Result<(f64, f64)> {
            let s = solve_moment_problem(&MomentProblem::new(b.clone(), moments.clone())?)?;
            let explicit = logistic_form(s.normalizer, &s.moment_multipliers, &b);
            let lg = (explicit - &s.probabilities).amax();
            let rep = (&b * &s.probabilities - &moments)
                .amax()
                .max((s.probabilities.sum() - 1.0).abs());
            let m = solve_marginal_problem(&MarginalProblem::new(rows.clone(), cols.clone())?)?;
            Ok((lg, rep.max(m.row_residual).max(m.col_residual)))
        })();
        let (lg, rep) = out.unwrap_or((f64::NAN, f64::NAN));
        logistic = logistic.max(lg);
        reproduce = reproduce.max(rep);
    }
    ctx.at_most("logistic_form", 1e-12, Ok(logistic));
    ctx.at_most("application_constraints", 1e-8, Ok(reproduce));
}

fn bounds_suite(ctx: &mut Ctx, rng: &mut ChaCha8Rng) {
    let mut logit = 0usize;
    let mut euclid_corrected = 0usize;
    let mut euclid_literal_narrow = 0usize;
    let mut euclid_literal_wide = 0usize;
    let mut wide_pairs = 0usize;
    let mut sinh_corrected = 0usize;
    let mut sinh_literal = 0usize;
    let mut errors = 0usize;
    for i in 0..1000 {
        let n = rng.random_range(1..=5);
        // A quarter of the pairs on unit boxes, the rest on random boxes.
        let domain = if i % 4 == 0 {
            BoxDomain::unit(n)
        } else {
            random_box(rng, n, 0.2, 5.0)
        };
        let xi = random_interior_wide(rng, &domain);
        let eta = random_interior_wide(rng, &domain);
        let narrow = (0..n).all(|j| domain.width(j) <= 2.0);
        let out = (|| -> Result<()> {
            logit += usize::from(!bound_upper_logit(&xi, &eta, &domain)?.holds);
            let e = bound_lower_family(&xi, &eta, &domain, LowerBoundOrder::Euclidean)?;
            euclid_corrected += usize::from(!e.corrected.holds);
            if narrow {
                euclid_literal_narrow += usize::from(!e.literal.holds);
            } else {
                wide_pairs += 1;
                euclid_literal_wide += usize::from(!e.literal.holds);
            }
            let s = bound_lower_family(&xi, &eta, &domain, LowerBoundOrder::Sinh)?;
            sinh_corrected += usize::from(!s.corrected.holds);
            sinh_literal += usize::from(!s.literal.holds);
            Ok(())
        })();
        errors += usize::from(out.is_err());
    }
    ctx.at_most("bound_evaluation_errors", 0.0, Ok(errors as f64));
    ctx.at_most("logit_upper_violations", 0.0, Ok(logit as f64));
    ctx.at_most("euclid_corrected_violations", 0.0, Ok(euclid_corrected as f64));
    ctx.at_most("euclid_literal_violations_d<=2", 0.0, Ok(euclid_literal_narrow as f64));
    ctx.audit(
        "euclid_literal_violations_d>2",
        Ok(euclid_literal_wide as f64),
        &format!("out of {wide_pairs} pairs"),
    );
    ctx.at_most("sinh_corrected_violations", 0.0, Ok(sinh_corrected as f64));
    ctx.audit("sinh_literal_violations", Ok(sinh_literal as f64), "out of 1000 pairs");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in [Suite::Entropy, Suite::Geometry, Suite::Solver, Suite::Bounds, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn bounds_suite_passes_and_is_reproducible() {
        let a = run(Suite::Bounds, 7);
        assert!(a.all_passed(), "{}", a.render());
        assert_eq!(a.render(), run(Suite::Bounds, 7).render());
    }
}
