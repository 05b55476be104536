use std::collections::BTreeMap;

use finslerium::chern::{
    curvature_bound_estimate, hermitian_hsc, holomorphic_sectional_curvature, osculating_coefficient,
    quadratic_curve_curvature, BoundSampler,
};
use finslerium::linalg::hermitian_defect;
use finslerium::sampling::{jet_samples, rng, unit_direction, Region, SamplePlan};
use finslerium::{c64, levi_matrix, validate_metric, JetPoint, Metric, C64};

fn strongly_pseudoconvex_zoo() -> Vec<(Metric, f64)> {
    vec![
        (Metric::euclidean(2), 1.0),
        (Metric::poincare(), 0.9),
        (Metric::fubini_study_chart(), 2.0),
        (Metric::product_disk(), 0.8),
        (Metric::hermitian_poly(2, 1, 0.3), 1.0),
        (Metric::exp_family(1.0, 0.5, 1.0, 2).unwrap(), 0.95),
        (Metric::exp_family(0.5, 0.4, 1.0, 3).unwrap(), 0.95),
    ]
}

fn jets(m: &Metric, radius: f64, count: usize, seed: u64) -> Vec<JetPoint> {
    jet_samples(&SamplePlan::new(count, Region::ball(radius), seed), m.dim())
        .unwrap()
        .into_iter()
        .map(|(z, v)| JetPoint::new(z, v).unwrap())
        .collect()
}

#[test]
fn validation_passes_on_the_zoo_and_flags_the_degenerate_form() {
    for (i, (m, r)) in strongly_pseudoconvex_zoo().iter().enumerate() {
        let rep = validate_metric(m, &SamplePlan::new(100, Region::ball(*r), i as u64)).unwrap();
        assert!(rep.passed(), "{}: {rep:?}", m.name());
    }
    let d = Metric::from_zoo("degenerate", Some(2), &BTreeMap::new()).unwrap();
    let rep = validate_metric(&d, &SamplePlan::new(20, Region::ball(1.0), 0)).unwrap();
    assert!(rep.homogeneity_pass && !rep.spd_pass);
}

#[test]
fn hermitian_levi_matrix_is_constant_in_v() {
    let m = Metric::hermitian_poly(2, 4, 0.3);
    let mut r = rng(9);
    for p in jets(&m, 1.0, 50, 2) {
        let a = levi_matrix(&m, &p).unwrap();
        let q = p.with_direction(unit_direction(&mut r, 2)).unwrap();
        let b = levi_matrix(&m, &q).unwrap();
        assert!(hermitian_defect(&a) <= 1e-9);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).norm() <= 1e-9);
            }
        }
    }
}

#[test]
fn curvature_is_scale_invariant_with_small_imaginary_residue() {
    let scalings = [
        c64(2.0, 0.0),
        c64(0.0, 1.0),
        C64::from_polar(0.5, std::f64::consts::FRAC_PI_3),
        c64(-3.0, 0.0),
        c64(0.1, 0.1),
        C64::from_polar(7.0, 2.0),
        c64(0.0, -0.25),
        c64(1.0, 1.0),
    ];
    for (i, (m, r)) in strongly_pseudoconvex_zoo().iter().enumerate() {
        for p in jets(m, *r, 100, 100 + i as u64) {
            let k = holomorphic_sectional_curvature(m, &p).unwrap();
            assert!(k.imag_residue <= 1e-8 * (1.0 + k.k.abs()), "{}", m.name());
            for s in &scalings {
                let ks = holomorphic_sectional_curvature(m, &p.scaled(*s).unwrap()).unwrap();
                assert!((ks.k - k.k).abs() <= 1e-7, "{} {s}", m.name());
            }
        }
    }
}

#[test]
fn osculating_curve_attains_the_curvature_of_hermitian_metrics() {
    for (m, r) in strongly_pseudoconvex_zoo().iter().take(5) {
        let h = m.hermitian().unwrap();
        for p in jets(m, *r, 30, 5) {
            let w = osculating_coefficient(m, &p).unwrap();
            let kc = quadratic_curve_curvature(m, &p, &w).unwrap();
            let k = hermitian_hsc(h, &p).unwrap();
            assert!((kc - k).abs() <= 1e-2, "{}: {kc} vs {k}", m.name());
        }
    }
}

#[test]
fn bounds_bracket_the_exp_family_range() {
    let (a, b) = (1.0, 0.5);
    let m = Metric::exp_family(a, b, 1.0, 2).unwrap();
    let sampler = BoundSampler {
        count: 60,
        seed: 1,
        ..BoundSampler::default()
    };
    let bounds = curvature_bound_estimate(&m, &Region::ball(1.0), &sampler).unwrap();
    // K = −2(a+b)e^{−(at+bs)} ranges over [−2(a+b), −2(a+b)e^{−(a+b)}]
    let lo = -2.0 * (a + b);
    let hi = lo * (-(a + b) as f64).exp();
    assert!(bounds.inf >= lo - 1e-9 && bounds.inf <= lo + 1e-3, "{}", bounds.inf);
    assert!(bounds.sup <= hi + 1e-9 && bounds.sup >= hi - 1e-2, "{}", bounds.sup);
}
