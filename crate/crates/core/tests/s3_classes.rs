//! Class values of the ω = z₂dz₁ − λz₁dz₂ family on S³ and S³×S¹.
//!
//! Oracles: Bott = λ + 2 + 1/λ. The literal representative θ̇∧dθ integrates to
//! ½(1 − 1/λ²), since ∂λ∫θ∧dθ = 2∫θ̇∧dθ on a closed manifold.

use folchar_core::classes::{bott_rep, dbott_rep, flk_rep, twist_deformation, verify_prop31};
use folchar_core::models::S3Family;
use folchar_core::numeric::{class_coefficient, derivative_crosscheck, ParamManifold, QuadratureSpec};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lambdas() -> [Complex64; 3] {
    [c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0)]
}

fn bott_oracle(l: Complex64) -> Complex64 {
    l + 2.0 + 1.0 / l
}

fn dbott_oracle(l: Complex64) -> Complex64 {
    0.5 * (1.0 - 1.0 / (l * l))
}

fn s3(l: Complex64) -> ParamManifold {
    ParamManifold::s3().with_parameter("lambda", l)
}

#[test]
fn bott_values() {
    let f = S3Family::new().unwrap();
    let q = QuadratureSpec::reference(3);
    for l in lambdas() {
        let v = class_coefficient(&bott_rep(&f.chart), &s3(l), &q).unwrap();
        assert!((v - bott_oracle(l)).norm() < 1e-9 * bott_oracle(l).norm(), "λ={l}: {v}");
    }
}

#[test]
fn dbott_values() {
    let f = S3Family::new().unwrap();
    let q = QuadratureSpec::reference(3);
    for l in lambdas() {
        let v = class_coefficient(&dbott_rep(&f.chart, &f.deformation), &s3(l), &q).unwrap();
        assert!((v - dbott_oracle(l)).norm() < 1e-9, "λ={l}: {v}");
    }
    let v = class_coefficient(&dbott_rep(&f.chart, &f.deformation), &s3(c(2.0, 0.0)), &q).unwrap();
    assert!((v.re - 0.375).abs() < 1e-10);
}

#[test]
fn solved_connection_gives_same_values() {
    let f = S3Family::solved().unwrap();
    let q = QuadratureSpec::uniform(3, 24).unwrap();
    let v = class_coefficient(&bott_rep(&f.chart), &s3(c(2.0, 0.0)), &q).unwrap();
    assert!((v - c(4.5, 0.0)).norm() < 1e-9);
}

#[test]
fn quadrature_has_converged() {
    let f = S3Family::new().unwrap();
    let q = QuadratureSpec::uniform(3, 24).unwrap();
    let rep = bott_rep(&f.chart);
    let a = class_coefficient(&rep, &s3(c(1.0, 1.0)), &q).unwrap();
    let b = class_coefficient(&rep, &s3(c(1.0, 1.0)), &q.refined()).unwrap();
    assert!((a - b).norm() < 1e-8);
}

#[test]
fn finite_difference_of_bott() {
    let f = S3Family::new().unwrap();
    let q = QuadratureSpec::reference(3);
    let r =
        derivative_crosscheck(&f.chart, &f.deformation, "lambda", &ParamManifold::s3(), &q, c(2.0, 0.0), 1e-3).unwrap();
    // d/dλ(λ + 2 + 1/λ) = 3/4 at λ = 2, twice the DBott coefficient
    assert!((r.finite_difference - c(0.75, 0.0)).norm() < 1e-6);
    assert!((r.finite_difference - 2.0 * r.dbott).norm() < 1e-6);
    let r =
        derivative_crosscheck(&f.chart, &f.deformation, "lambda", &ParamManifold::s3(), &q, c(1.0, 0.0), 1e-3).unwrap();
    assert!(r.dbott.norm() < 1e-9);
}

#[test]
fn twisted_flk_fiber_values() {
    let f = S3Family::new().unwrap();
    let q = QuadratureSpec::reference(3);
    for l in [c(2.0, 0.0), c(1.0, 1.0)] {
        for m in [-1i64, 0, 1, 2] {
            let r = verify_prop31(&f.chart, &f.deformation, m, "t", None).unwrap();
            assert!(r.passed());
            let v = class_coefficient(&r.flk_fiber, &s3(l), &q).unwrap();
            let expected = -(m as f64) * dbott_oracle(l);
            assert!((v - expected).norm() < 1e-9, "λ={l} m={m}: {v}");
        }
    }
}

#[test]
fn fiber_integration_agrees_with_direct_integration() {
    let f = S3Family::new().unwrap();
    let l = c(2.0, 0.0);
    let (tw, td) = twist_deformation(&f.chart, &f.deformation, 1, "t", None).unwrap();
    let flk = flk_rep(&tw, &td);
    let man = ParamManifold::s3xs1().with_parameter("lambda", l);
    let direct = class_coefficient(&flk, &man, &QuadratureSpec::uniform(4, 16).unwrap()).unwrap();
    let r = verify_prop31(&f.chart, &f.deformation, 1, "t", None).unwrap();
    let fibered = class_coefficient(&r.flk_fiber, &s3(l), &QuadratureSpec::uniform(3, 16).unwrap()).unwrap();
    assert!((direct - fibered).norm() < 1e-9, "{direct} vs {fibered}");
}

#[test]
fn untwisted_flk_vanishes() {
    let f = S3Family::new().unwrap();
    assert!(flk_rep(&f.chart, &f.deformation).rep.is_zero());
}
