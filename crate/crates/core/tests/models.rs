use std::sync::Arc;

use finslerium::comparison::{
    comparison_report, hessian_distance_model, index_form, jacobi_index_closed_form, optimal_alpha,
    radial_index_closed_form, Direction, FieldProfile, ModelSpace,
};
use finslerium::kahler::{kahler_identity_checks, KahlerModel};
use finslerium::quadrature::QuadratureConfig;
use finslerium::sampling::{Region, SamplePlan};

fn perturbed_jacobi(k: f64, r: f64, c: f64) -> FieldProfile {
    let pi = std::f64::consts::PI;
    FieldProfile::User {
        normal: Arc::new(move |t: f64| {
            let w = pi / r;
            let (j, dj) = if k == 0.0 {
                (t / r, 1.0 / r)
            } else {
                ((k * t).sinh() / (k * r).sinh(), k * (k * t).cosh() / (k * r).sinh())
            };
            (j + c * (w * t).sin(), dj + c * w * (w * t).cos())
        }),
        tangential: Arc::new(|_| 0.0),
    }
}

#[test]
fn jacobi_index_matches_coth() {
    let q = QuadratureConfig::default();
    for &k in &[0.5, 1.0, 2.0] {
        let s = ModelSpace::hyperbolic(k, 3).unwrap();
        for &r in &[0.1, 0.5, 1.0, 3.0] {
            let want = k / (k * r).tanh();
            let got = index_form(&s, r, &FieldProfile::Jacobi, &q).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "K={k} r={r}");
            assert!((jacobi_index_closed_form(k, r) - want).abs() <= 1e-12 * want);
        }
    }
    let e = ModelSpace::euclidean(2);
    assert!((index_form(&e, 2.0, &FieldProfile::Jacobi, &q).unwrap() - 0.5).abs() <= 1e-12);
}

#[test]
fn jacobi_fields_minimize_among_equal_endpoints() {
    let q = QuadratureConfig::new(64).unwrap();
    for &k in &[0.0, 1.0, 2.0] {
        let s = ModelSpace::with_k(k, 3).unwrap();
        let r = 1.2;
        let j = index_form(&s, r, &FieldProfile::Jacobi, &q).unwrap();
        for &c in &[-0.5, -0.1, 0.05, 0.3] {
            let other = index_form(&s, r, &perturbed_jacobi(k, r, c), &q).unwrap();
            assert!(other > j, "K={k} c={c}");
        }
        for &alpha in &[1.0, 1.5, 3.0] {
            assert!(index_form(&s, r, &FieldProfile::Radial { alpha }, &q).unwrap() >= j - 1e-12);
        }
    }
}

#[test]
fn radial_profiles_agree_with_closed_form() {
    let q = QuadratureConfig::default();
    for &k in &[0.5, 2.0] {
        let s = ModelSpace::hyperbolic(k, 2).unwrap();
        for &r in &[0.3, 1.0, 2.5] {
            for &alpha in &[1.0, 1.25, 2.0, 4.0] {
                let a = index_form(&s, r, &FieldProfile::Radial { alpha }, &q).unwrap();
                let b = radial_index_closed_form(k, r, alpha);
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "K={k} r={r} α={alpha}");
            }
            let alpha = optimal_alpha(k, r).unwrap();
            assert!(alpha > 1.0);
            assert!(radial_index_closed_form(k, r, alpha) >= jacobi_index_closed_form(k, r));
        }
    }
}

#[test]
fn model_hessian_and_comparison_report() {
    let s = ModelSpace::hyperbolic(1.0, 3).unwrap();
    assert_eq!(hessian_distance_model(&s, 1.0, Direction::Radial).unwrap(), 0.0);
    let h = hessian_distance_model(&s, 1.0, Direction::Orthogonal).unwrap();
    assert!((h - 1.0 / 1.0f64.tanh()).abs() <= 1e-12);
    assert!(hessian_distance_model(&s, 0.0, Direction::Orthogonal).is_err());
    let rep = comparison_report(&s, &[0.25, 0.5, 1.0, 2.0]).unwrap();
    assert!(rep.pass && rep.min_slack >= -1e-9, "{rep:?}");
    assert!(ModelSpace::hyperbolic(-1.0, 3).is_err());
    let q = QuadratureConfig::default();
    assert!(index_form(&s, 1.0, &FieldProfile::Radial { alpha: 0.75 }, &q).is_err());
}

#[test]
fn kahler_identities_hold_on_both_models() {
    for model in [KahlerModel::Flat { n: 2 }, KahlerModel::PoincareDisk] {
        let r = if model.dim() == 1 { 0.9 } else { 2.0 };
        let rep = kahler_identity_checks(model, &SamplePlan::new(60, Region::ball(r), 3)).unwrap();
        assert!(rep.pass, "{model:?}");
        assert!(rep.hermitian_defect <= 1e-9);
        for c in rep.checks.iter().filter(|c| !c.informational) {
            assert!(c.pass && c.worst.is_finite(), "{}", c.name);
        }
    }
}
