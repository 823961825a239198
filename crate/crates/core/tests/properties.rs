use entroinv::entropy::{bregman, chi, entropy_psi, hessian_m, hessian_psi, log_partition, phi};
use entroinv::geometry::{dist_g, dist_h, u_inverse, u_map, v_inverse, v_map};
use entroinv::{solve, BoxDomain, InverseProblem, SolveStatus, TauPoint};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Boxes of dimension 1..=5 with lower bounds in [-2, 2] and widths in [0.1, 4].
fn boxes() -> impl Strategy<Value = BoxDomain> {
    prop::collection::vec((-2.0..2.0f64, 0.1..4.0f64), 1..=5)
        .prop_map(|v| BoxDomain::new(v.iter().map(|p| p.0).collect::<Vec<_>>(), v.iter().map(|p| p.0 + p.1).collect::<Vec<_>>()).unwrap())
}

/// A box with a point given by its face fractions.
fn box_and_fractions() -> impl Strategy<Value = (BoxDomain, Vec<f64>, Vec<f64>)> {
    boxes().prop_flat_map(|d| {
        let n = d.dim();
        (
            Just(d),
            prop::collection::vec(1e-6..1.0 - 1e-6, n),
            prop::collection::vec(1e-6..1.0 - 1e-6, n),
        )
    })
}

fn at(d: &BoxDomain, f: &[f64]) -> Vec<f64> {
    (0..d.dim()).map(|j| d.lower()[j] + d.width(j) * f[j]).collect()
}

fn box_and_tau(bound: f64) -> impl Strategy<Value = (BoxDomain, Vec<f64>)> {
    boxes().prop_flat_map(move |d| {
        let n = d.dim();
        (Just(d), prop::collection::vec(-bound..bound, n))
    })
}

fn scaled_tau(d: &BoxDomain, s: &[f64]) -> TauPoint {
    TauPoint::from_slice(&(0..d.dim()).map(|j| s[j] / d.half_width(j)).collect::<Vec<_>>()).unwrap()
}

proptest! {
    #[test]
    fn phi_chi_round_trip((d, s) in box_and_tau(25.0)) {
        let tau = scaled_tau(&d, &s);
        let xi = phi(&tau, &d).unwrap();
        prop_assert!(xi.lower_gaps().iter().chain(xi.upper_gaps().iter()).all(|g| *g > 0.0));
        let back = chi(&xi, &d).unwrap();
        for j in 0..d.dim() {
            prop_assert!((back[j] - tau[j]).abs() <= 1e-9 * (1.0 + tau[j].abs()));
        }
    }

    #[test]
    fn hessians_are_mutually_inverse((d, s) in box_and_tau(20.0)) {
        let tau = scaled_tau(&d, &s);
        let h = hessian_m(&tau, &d).unwrap();
        let g = hessian_psi(&phi(&tau, &d).unwrap(), &d).unwrap();
        for j in 0..d.dim() {
            prop_assert!((h[j] * g[j] - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn conjugacy_and_entropy_range((d, s) in box_and_tau(8.0)) {
        let tau = scaled_tau(&d, &s);
        let xi = phi(&tau, &d).unwrap();
        let m = log_partition(&tau, &d).unwrap();
        let psi = entropy_psi(&xi, &d).unwrap();
        prop_assert!((m + psi - tau.dot(xi.coords())).abs() <= 1e-10 * (1.0 + m.abs()));
        prop_assert!(psi <= 0.0);
        prop_assert!(psi >= d.dim() as f64 * 0.5f64.ln() - 1e-12);
    }

    #[test]
    fn bregman_is_nonnegative_and_vanishes_on_diagonal((d, f, g) in box_and_fractions()) {
        let xi = d.interior(&at(&d, &f)).unwrap();
        let eta = d.interior(&at(&d, &g)).unwrap();
        prop_assert!(bregman(&xi, &eta, &d).unwrap() >= 0.0);
        prop_assert_eq!(bregman(&xi, &xi, &d).unwrap(), 0.0);
    }

    #[test]
    fn charts_invert((d, f, _g) in box_and_fractions()) {
        let xi = d.interior(&at(&d, &f)).unwrap();
        let u = u_map(&xi, &d).unwrap();
        let back = u_inverse(&u, &d).unwrap();
        for j in 0..d.dim() {
            prop_assert!((back[j] - xi[j]).abs() <= 1e-12 * d.width(j));
        }
        let tau = chi(&xi, &d).unwrap();
        let v = v_map(&tau, &d).unwrap();
        prop_assert!((v - &u).amax() <= 1e-10);
        let tau_back = v_inverse(&v_map(&tau, &d).unwrap(), &d).unwrap();
        for j in 0..d.dim() {
            prop_assert!((tau_back[j] - tau[j]).abs() <= 1e-8 * (1.0 + tau[j].abs()));
        }
    }

    #[test]
    fn distance_is_a_metric((d, f, g) in box_and_fractions(), h in prop::collection::vec(1e-6..1.0 - 1e-6, 5)) {
        let x = d.interior(&at(&d, &f)).unwrap();
        let y = d.interior(&at(&d, &g)).unwrap();
        let z = d.interior(&at(&d, &h[..d.dim()])).unwrap();
        let dxy = dist_g(&x, &y, &d).unwrap();
        prop_assert_eq!(dxy, dist_g(&y, &x, &d).unwrap());
        prop_assert!(dxy <= dist_g(&x, &z, &d).unwrap() + dist_g(&z, &y, &d).unwrap() + 1e-12);
        let tx = chi(&x, &d).unwrap();
        let ty = chi(&y, &d).unwrap();
        prop_assert!((dist_h(&tx, &ty, &d).unwrap() - dxy).abs() <= 1e-10);
    }

    #[test]
    fn solver_meets_constraints(
        (d, f) in boxes().prop_flat_map(|d| { let n = d.dim(); (Just(d), prop::collection::vec(0.05..0.95f64, n)) }),
        entries in prop::collection::vec(-1.0..1.0f64, 15),
        k in 1usize..=3,
    ) {
        let n = d.dim();
        let k = k.min(n);
        let a = DMatrix::from_fn(k, n, |i, j| entries[i * 5 + j]);
        let y = &a * DVector::from_vec(at(&d, &f));
        let problem = InverseProblem::new(a.clone(), y.clone(), d).unwrap();
        let s = solve(&problem).unwrap();
        prop_assert_eq!(s.status, SolveStatus::Converged);
        prop_assert!((&a * s.xi_star.coords() - y).amax() <= 1e-8);
        prop_assert!(s.gap.abs() <= 1e-8);
    }
}
