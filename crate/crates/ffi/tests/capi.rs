use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use entroinv_ffi::*;

fn last_error() -> String {
    let p = entroinv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn unit_box(n: usize) -> *mut EntroinvBox {
    let lower = vec![0.0; n];
    let upper = vec![1.0; n];
    let mut b = ptr::null_mut();
    let st = unsafe { entroinv_box_new(lower.as_ptr(), upper.as_ptr(), n, &mut b) };
    assert_eq!(st, EntroinvStatus::Ok);
    b
}

#[test]
fn kernels_through_the_c_interface() {
    let b = unit_box(1);
    unsafe {
        assert_eq!(entroinv_box_dim(b), 1);
        let mut v = 0.0;
        assert_eq!(entroinv_entropy(b, [0.25].as_ptr(), 1, &mut v), EntroinvStatus::Ok);
        assert!((v - (0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln())).abs() < 1e-15);
        assert_eq!(entroinv_log_partition(b, [0.0].as_ptr(), 1, &mut v), EntroinvStatus::Ok);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let mut tau = [0.0];
        assert_eq!(entroinv_chi(b, [0.75].as_ptr(), 1, tau.as_mut_ptr(), 1), EntroinvStatus::Ok);
        assert!((tau[0] - 3f64.ln()).abs() < 1e-14);
        let mut xi = [0.0];
        assert_eq!(entroinv_phi(b, tau.as_ptr(), 1, xi.as_mut_ptr(), 1), EntroinvStatus::Ok);
        assert!((xi[0] - 0.75).abs() < 1e-15);
        assert_eq!(entroinv_dist_g(b, [0.25].as_ptr(), [0.75].as_ptr(), 1, &mut v), EntroinvStatus::Ok);
        assert!((v - std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert_eq!(entroinv_bregman(b, [0.5].as_ptr(), [0.5].as_ptr(), 1, &mut v), EntroinvStatus::Ok);
        assert_eq!(v, 0.0);

        assert_eq!(entroinv_entropy(b, [1.5].as_ptr(), 1, &mut v), EntroinvStatus::DomainViolation);
        assert!(last_error().contains("outside"));
        assert_eq!(entroinv_phi(b, tau.as_ptr(), 1, xi.as_mut_ptr(), 0), EntroinvStatus::BufferTooSmall);
        assert_eq!(entroinv_entropy(b, ptr::null(), 1, &mut v), EntroinvStatus::NullPointer);
        assert_eq!(entroinv_entropy(ptr::null(), [0.5].as_ptr(), 1, &mut v), EntroinvStatus::NullPointer);
        entroinv_box_free(b);
        entroinv_box_free(ptr::null_mut());
    }
}

#[test]
fn invalid_box_is_rejected() {
    let mut b = ptr::null_mut();
    let st = unsafe { entroinv_box_new([1.0].as_ptr(), [0.0].as_ptr(), 1, &mut b) };
    assert_eq!(st, EntroinvStatus::InvalidArgument);
    assert!(b.is_null());
}

#[test]
fn solve_and_sensitivity() {
    let b = unit_box(2);
    unsafe {
        let mut p = ptr::null_mut();
        let st = entroinv_problem_new([1.0, 1.0].as_ptr(), 1, 2, [1.2].as_ptr(), b, &mut p);
        assert_eq!(st, EntroinvStatus::Ok);
        entroinv_box_free(b);
        let mut s = ptr::null_mut();
        assert_eq!(entroinv_solve(p, &mut s), EntroinvStatus::Ok);
        let mut xi = [0.0; 2];
        assert_eq!(entroinv_solution_xi(s, xi.as_mut_ptr(), 2), EntroinvStatus::Ok);
        assert!((xi[0] - 0.6).abs() < 1e-12 && (xi[1] - 0.6).abs() < 1e-12);
        let mut lambda = [0.0];
        assert_eq!(entroinv_solution_lambda(s, lambda.as_mut_ptr(), 1), EntroinvStatus::Ok);
        assert!((lambda[0] - 1.5f64.ln()).abs() < 1e-10);
        let (mut psi, mut gap, mut res) = (0.0, 1.0, 1.0);
        let st = entroinv_solution_values(s, &mut psi, ptr::null_mut(), &mut gap, &mut res);
        assert_eq!(st, EntroinvStatus::Ok);
        assert!(gap.abs() < 1e-12 && res < 1e-12);
        assert!(entroinv_solution_iterations(s) > 0);
        let mut dxi = [0.0; 2];
        let st = entroinv_sensitivity_xi(p, s, [0.02].as_ptr(), 1, dxi.as_mut_ptr(), 2);
        assert_eq!(st, EntroinvStatus::Ok);
        assert!((dxi[0] - 0.01).abs() < 1e-12 && (dxi[1] - 0.01).abs() < 1e-12);
        entroinv_solution_free(s);
        entroinv_problem_free(p);
    }
}

#[test]
fn infeasible_datum_reports_status_and_keeps_solution() {
    let b = unit_box(2);
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            entroinv_problem_new([1.0, 1.0].as_ptr(), 1, 2, [3.0].as_ptr(), b, &mut p),
            EntroinvStatus::Ok
        );
        let mut s = ptr::null_mut();
        assert_eq!(entroinv_solve(p, &mut s), EntroinvStatus::InfeasibleDatum);
        assert!(!s.is_null());
        assert!(last_error().contains("InfeasibleDatum"));
        entroinv_solution_free(s);
        entroinv_problem_free(p);
        entroinv_box_free(b);
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let b = unit_box(3);
    unsafe {
        let mut p = ptr::null_mut();
        let st = entroinv_problem_new([1.0, 1.0].as_ptr(), 1, 2, [1.0].as_ptr(), b, &mut p);
        assert_eq!(st, EntroinvStatus::InvalidArgument);
        assert!(p.is_null());
        entroinv_box_free(b);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(entroinv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/entroinv.h")).unwrap();
    for name in [
        "typedef struct EntroinvBox EntroinvBox",
        "typedef struct EntroinvSolution EntroinvSolution",
        "ENTROINV_STATUS_INFEASIBLE_DATUM = 2",
        "entroinv_solve(",
        "entroinv_last_error_message(",
        "entroinv_sensitivity_xi(",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a C client against the header and static library when a
/// C compiler and the archive are available.
#[test]
fn c_client_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let archive = target.parent().unwrap().join("debug").join("libentroinv_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C client: no archive at {} or no cc", archive.display());
        return;
    }
    let src = target.join("client.c");
    let exe = target.join("client");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "entroinv.h"
int main(void) {
    double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0}, a[2] = {1.0, 1.0}, y[1] = {1.0}, xi[2];
    EntroinvBox *box = NULL; EntroinvProblem *p = NULL; EntroinvSolution *s = NULL;
    if (entroinv_box_new(lo, hi, 2, &box) != ENTROINV_STATUS_OK) return 1;
    if (entroinv_problem_new(a, 1, 2, y, box, &p) != ENTROINV_STATUS_OK) return 2;
    if (entroinv_solve(p, &s) != ENTROINV_STATUS_OK) return 3;
    if (entroinv_solution_xi(s, xi, 2) != ENTROINV_STATUS_OK) return 4;
    printf("%.6f %.6f\n", xi[0], xi[1]);
    entroinv_solution_free(s); entroinv_problem_free(p); entroinv_box_free(box);
    return 0;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to compile");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.500000 0.500000");
}
