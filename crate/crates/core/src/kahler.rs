//! Numerical checks of the Kähler identities on flat ℂⁿ and the Poincaré
//! disk, where the distance from the pole is known in closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::linalg::{hermitian_defect, CMatrix};
use crate::req;
use crate::sampling::{jet_samples, rng, unit_direction, Region, SamplePlan};
use crate::scalar::{c64, Scalar, C64};
use crate::wirtinger::{
    norm, source_for, wirtinger_derivative, DifferentiationPlan, JetField, JetPoint, JetVars, Var,
};

pub const POLE_EXCLUSION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KahlerModel {
    Flat { n: usize },
    PoincareDisk,
}

impl KahlerModel {
    pub fn dim(&self) -> usize {
        match self {
            KahlerModel::Flat { n } => *n,
            KahlerModel::PoincareDisk => 1,
        }
    }

    /// Lower bound `−K²` of the radial sectional curvature: flat 0, disk 2.
    pub fn k(&self) -> f64 {
        match self {
            KahlerModel::Flat { .. } => 0.0,
            KahlerModel::PoincareDisk => 2.0,
        }
    }

    /// Conformal factor `h` with `h_{αβ̄} = h δ_{αβ}`.
    pub fn conformal_factor(&self, z: &[C64]) -> f64 {
        match self {
            KahlerModel::Flat { .. } => 1.0,
            KahlerModel::PoincareDisk => (1.0 - z[0].norm_sqr()).powi(-2),
        }
    }

    pub fn distance(&self, z: &[C64]) -> f64 {
        match self {
            KahlerModel::Flat { .. } => norm(z),
            KahlerModel::PoincareDisk => z[0].norm().atanh(),
        }
    }

    /// Unit radial vector `T` with `h(T) = 1`.
    pub fn radial_unit(&self, z: &[C64]) -> Result<Vec<C64>> {
        let r = norm(z);
        if r < POLE_EXCLUSION {
            return Err(FinslerError::Domain("radial field undefined at the pole".into()));
        }
        let scale = 1.0 / (r * self.conformal_factor(z).sqrt());
        Ok(z.iter().map(|c| c * scale).collect())
    }

    fn check(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(FinslerError::Shape {
                expected: self.dim(),
                got: z.len(),
            });
        }
        if let KahlerModel::PoincareDisk = self {
            if z[0].norm() >= 1.0 {
                return Err(FinslerError::Domain("outside the unit disk".into()));
            }
        }
        Ok(())
    }
}

/// Powers of the pole distance as fields on the base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceField {
    Rho,
    RhoSquared,
}

#[derive(Clone, Copy, Debug)]
pub struct ModelField {
    pub model: KahlerModel,
    pub field: DistanceField,
}

impl JetField for ModelField {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        let mut w = S::zero();
        for i in 0..x.dim() {
            w = w + x.z[i] * x.zb[i];
        }
        let sq = match self.model {
            KahlerModel::Flat { .. } => w,
            KahlerModel::PoincareDisk => {
                let g = w.atanh_sqrt_ratio();
                w * g * g
            }
        };
        match self.field {
            DistanceField::RhoSquared => sq,
            DistanceField::Rho => sq.sqrt(),
        }
    }
}

/// `f(z) = Re(z₁³) + 0.3|z|⁴ + Im(z₁ z̄_n)`, a generic real test function.
#[derive(Clone, Copy, Debug)]
pub struct TestFunction;

impl JetField for TestFunction {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        let n = x.dim();
        let mut w = S::zero();
        for i in 0..n {
            w = w + x.z[i] * x.zb[i];
        }
        let cube = (x.z[0] * x.z[0] * x.z[0] + x.zb[0] * x.zb[0] * x.zb[0]) * S::from_f(0.5);
        let cross = (x.z[0] * x.zb[n - 1] - x.zb[0] * x.z[n - 1]) * S::from_c(c64(0.0, -0.5));
        cube + w * w * S::from_f(0.3) + cross
    }
}

fn base_point(z: &[C64]) -> Result<JetPoint> {
    let mut v = vec![c64(0.0, 0.0); z.len()];
    v[0] = c64(1.0, 0.0);
    JetPoint::new(z.to_vec(), v)
}

/// Matrix `∂²f/∂z^α∂z̄^β` at `z`.
pub fn complex_hessian<F: JetField>(f: &F, z: &[C64], plan: &DifferentiationPlan) -> Result<CMatrix> {
    let p = base_point(z)?;
    let n = z.len();
    let mut src = source_for(f, &p, plan)?;
    let mut out = vec![vec![c64(0.0, 0.0); n]; n];
    for a in 0..n {
        for b in 0..n {
            out[a][b] = src.derivative(&req![Var::Z(a), Var::Zb(b)])?;
        }
    }
    Ok(out)
}

/// Complex Hessian of `ρ` or `ρ²`; `ρ` is rejected near the pole.
pub fn distance_hessian(
    model: KahlerModel,
    field: DistanceField,
    z: &[C64],
    plan: &DifferentiationPlan,
) -> Result<CMatrix> {
    model.check(z)?;
    if field == DistanceField::Rho && norm(z) < POLE_EXCLUSION {
        return Err(FinslerError::Domain(
            "pole singularity: ρ is not smooth at the pole, use ρ²".into(),
        ));
    }
    complex_hessian(&ModelField { model, field }, z, plan)
}

fn real_eval<F: JetField>(f: &F, x: &[f64]) -> f64 {
    let n = x.len() / 2;
    let z: Vec<C64> = (0..n).map(|i| c64(x[2 * i], x[2 * i + 1])).collect();
    let zb: Vec<C64> = z.iter().map(|c| c.conj()).collect();
    f.eval(&JetVars {
        z: z.clone(),
        zb: zb.clone(),
        v: z,
        vb: zb,
    })
    .re
}

fn line<F: JetField>(f: &F, x: &[f64], u: &[f64], t: f64) -> f64 {
    let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + t * b).collect();
    real_eval(f, &y)
}

/// Richardson-extrapolated central differences along `u`.
fn directional<F: JetField>(f: &F, x: &[f64], u: &[f64], h: f64, order: u8) -> f64 {
    let st = |h: f64| match order {
        1 => (line(f, x, u, h) - line(f, x, u, -h)) / (2.0 * h),
        _ => (line(f, x, u, h) - 2.0 * line(f, x, u, 0.0) + line(f, x, u, -h)) / (h * h),
    };
    let mut t: Vec<f64> = (0..3).map(|j| st(h / (1 << j) as f64)).collect();
    for lvl in 1..3 {
        let fac = 4f64.powi(lvl);
        t = t.windows(2).map(|w| (fac * w[1] - w[0]) / (fac - 1.0)).collect();
    }
    t[0]
}

fn fd_step(model: &KahlerModel, z: &[C64]) -> f64 {
    match model {
        KahlerModel::Flat { .. } => 1e-2,
        KahlerModel::PoincareDisk => 0.05 * (1.0 - z[0].norm()).min(1.0),
    }
}

/// Riemannian Hessian `∇²f(u,u)` of the model's Kähler metric, from
/// finite differences in real coordinates and the Christoffel symbols of
/// the conformal metric `e^{2w}δ`.
pub fn real_hessian<F: JetField>(model: &KahlerModel, f: &F, z: &[C64], u: &[f64]) -> f64 {
    let x: Vec<f64> = z.iter().flat_map(|c| [c.re, c.im]).collect();
    let h = fd_step(model, z);
    let d2 = directional(f, &x, u, h, 2);
    let grad_w: Vec<f64> = match model {
        KahlerModel::Flat { .. } => vec![0.0; x.len()],
        KahlerModel::PoincareDisk => {
            let s = 1.0 - x.iter().map(|a| a * a).sum::<f64>();
            x.iter().map(|a| 2.0 * a / s).collect()
        }
    };
    if grad_w.iter().all(|g| *g == 0.0) {
        return d2;
    }
    // Γ^k(u,u) = 2u^k(u·∇w) − |u|² ∂_k w
    let uw: f64 = u.iter().zip(&grad_w).map(|(a, b)| a * b).sum();
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let mut christoffel = 0.0;
    for k in 0..x.len() {
        let mut e = vec![0.0; x.len()];
        e[k] = 1.0;
        let gamma_k = 2.0 * u[k] * uw - uu * grad_w[k];
        if gamma_k != 0.0 {
            christoffel += gamma_k * directional(f, &x, &e, h, 1);
        }
    }
    d2 - christoffel
}

fn complex_structure(u: &[f64]) -> Vec<f64> {
    u.chunks(2).flat_map(|c| [-c[1], c[0]]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// `worst` is the largest scaled residual.
    Identity,
    /// `worst` is the smallest slack `bound − value`.
    Inequality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub kind: CheckKind,
    pub worst: f64,
    pub witness: Vec<C64>,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
    /// Checks that record a known defect of the literal statement and do
    /// not enter the overall verdict.
    pub informational: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahlerReport {
    pub model: KahlerModel,
    pub k: f64,
    pub checks: Vec<IdentityResult>,
    pub hermitian_defect: f64,
    pub pass: bool,
}

struct Sample {
    z: Vec<C64>,
    pairing: f64,
    l_operator: f64,
    hessian_bound: f64,
    gradient: f64,
    disk_normalized: Option<f64>,
    disk_literal: Option<f64>,
    defect: f64,
}

pub const PAIRING_TOL: f64 = 1e-12;
pub const L_OPERATOR_TOL: f64 = 1e-6;
pub const GRADIENT_TOL: f64 = 1e-7;

fn check_point(model: &KahlerModel, z: &[C64], dirs: &[Vec<C64>]) -> Result<Sample> {
    let plan = DifferentiationPlan::automatic();
    let n = model.dim();
    let hfac = model.conformal_factor(z);
    let rho = model.distance(z);
    let k = model.k();
    let rho2 = ModelField {
        model: *model,
        field: DistanceField::RhoSquared,
    };
    let hess = complex_hessian(&rho2, z, &plan)?;
    let defect = hermitian_defect(&hess);

    // (a) real form g_sym = h(dz⊗dz̄ + dz̄⊗dz) against 2 h(v₁, v₂)
    let mut pairing: f64 = 0.0;
    for pair in dirs.windows(2) {
        let (v1, v2) = (&pair[0], &pair[1]);
        let u1: Vec<f64> = v1.iter().flat_map(|c| [c.re, c.im]).collect();
        let u2: Vec<f64> = v2.iter().flat_map(|c| [c.re, c.im]).collect();
        let g: f64 = 2.0 * hfac * u1.iter().zip(&u2).map(|(a, b)| a * b).sum::<f64>();
        let hv: C64 = v1.iter().zip(v2).map(|(a, b)| a * b.conj()).sum::<C64>() * hfac;
        let g11: f64 = 2.0 * hfac * u1.iter().map(|a| a * a).sum::<f64>();
        let h11: C64 = v1.iter().map(|a| a * a.conj()).sum::<C64>() * hfac;
        let res = (g - 2.0 * hv.re).abs().max((c64(g11, 0.0) - 2.0 * h11).norm());
        pairing = pairing.max(res / (1.0 + g11.abs()));
    }

    // (b) 4 ∂∂̄f(v,v̄) = ∇²f(u,u) + ∇²f(Ju,Ju) for ρ² and a test function
    let mut l_operator: f64 = 0.0;
    let test_hess = complex_hessian(&TestFunction, z, &plan)?;
    for v in dirs {
        let u: Vec<f64> = v.iter().flat_map(|c| [c.re, c.im]).collect();
        let ju = complex_structure(&u);
        for (h, real) in [
            (&hess, real_hessian(model, &rho2, z, &u) + real_hessian(model, &rho2, z, &ju)),
            (&test_hess, real_hessian(model, &TestFunction, z, &u) + real_hessian(model, &TestFunction, z, &ju)),
        ] {
            let lf = 4.0 * crate::linalg::hermitian_form(h, v, v).re;
            l_operator = l_operator.max((lf - real).abs() / (1.0 + lf.abs()));
        }
    }

    // (c) ∂∂̄ρ²(v,v̄) ≤ 2 + ρK for h(v) = 1
    let mut hessian_bound = f64::INFINITY;
    for v in dirs {
        let hv = hfac * v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let unit: Vec<C64> = v.iter().map(|c| c / hv.sqrt()).collect();
        let val = crate::linalg::hermitian_form(&hess, &unit, &unit).re;
        hessian_bound = hessian_bound.min(2.0 + rho * k - val);
    }

    // (d) 2ρ = ⟨(∇ρ²)∘, T⟩ = 2 Σ ∂_ᾱ ρ² · conj(T^α)
    let t = model.radial_unit(z)?;
    let p = base_point(z)?;
    let mut pairing_value = c64(0.0, 0.0);
    for a in 0..n {
        let d = wirtinger_derivative(&rho2, &p, &req![Var::Zb(a)], &plan)?;
        pairing_value += 2.0 * d * t[a].conj();
    }
    let gradient = (pairing_value - c64(2.0 * rho, 0.0)).norm() / (1.0 + rho);

    // (e) disk: ∂∂̄ϱ² against 2(1 + 2ϱ), with and without h(v) = 1
    let (disk_normalized, disk_literal) = match model {
        KahlerModel::PoincareDisk => {
            let raw = hess[0][0].re;
            let bound = 2.0 * (1.0 + 2.0 * rho);
            (Some(bound - raw / hfac), Some(bound - raw))
        }
        _ => (None, None),
    };
    Ok(Sample {
        z: z.to_vec(),
        pairing,
        l_operator,
        hessian_bound,
        gradient,
        disk_normalized,
        disk_literal,
        defect,
    })
}

fn summarize(
    name: &str,
    kind: CheckKind,
    tolerance: f64,
    informational: bool,
    samples: &[Sample],
    key: impl Fn(&Sample) -> f64,
) -> IdentityResult {
    let mut worst_i = 0;
    let mut worst = match kind {
        CheckKind::Identity => f64::NEG_INFINITY,
        CheckKind::Inequality => f64::INFINITY,
    };
    for (i, s) in samples.iter().enumerate() {
        let v = key(s);
        let better = match kind {
            CheckKind::Identity => v > worst,
            CheckKind::Inequality => v < worst,
        };
        if better {
            worst = v;
            worst_i = i;
        }
    }
    let pass = match kind {
        CheckKind::Identity => worst <= tolerance,
        CheckKind::Inequality => worst >= -tolerance,
    };
    IdentityResult {
        name: name.to_string(),
        kind,
        worst,
        witness: samples.get(worst_i).map(|s| s.z.clone()).unwrap_or_default(),
        samples: samples.len(),
        tolerance,
        pass,
        informational,
    }
}

/// Runs the pairing, L-operator, Hessian-bound and gradient checks at
/// seeded points, excluding a small ball around the pole.
pub fn kahler_identity_checks(model: KahlerModel, plan: &SamplePlan) -> Result<KahlerReport> {
    let n = model.dim();
    let region = Region::shell(plan.region.inner.max(POLE_EXCLUSION), plan.region.outer);
    if let KahlerModel::PoincareDisk = model {
        if region.outer >= 1.0 {
            return Err(FinslerError::Config("disk samples must satisfy |ζ| < 1".into()));
        }
    }
    let pts = jet_samples(&SamplePlan::new(plan.count, region, plan.seed), n)?;
    // extra directions per point, drawn sequentially for determinism
    let mut r = rng(plan.seed ^ 0x5eed);
    let inputs: Vec<(Vec<C64>, Vec<Vec<C64>>)> = pts
        .into_iter()
        .map(|(z, v)| {
            let mut dirs = vec![v];
            for _ in 0..3 {
                dirs.push(unit_direction(&mut r, n));
            }
            (z, dirs)
        })
        .collect();
    let samples: Vec<Sample> = inputs
        .par_iter()
        .map(|(z, dirs)| check_point(&model, z, dirs))
        .collect::<Result<_>>()?;

    let mut checks = vec![
        summarize("real-hermitian-pairing", CheckKind::Identity, PAIRING_TOL, false, &samples, |s| s.pairing),
        summarize("l-operator", CheckKind::Identity, L_OPERATOR_TOL, false, &samples, |s| s.l_operator),
        summarize("complex-hessian-bound", CheckKind::Inequality, 0.0, false, &samples, |s| s.hessian_bound),
        summarize("gradient-pairing", CheckKind::Identity, GRADIENT_TOL, false, &samples, |s| s.gradient),
    ];
    if let KahlerModel::PoincareDisk = model {
        checks.push(summarize("disk-bound-unit-direction", CheckKind::Inequality, 0.0, false, &samples, |s| {
            s.disk_normalized.unwrap_or(f64::INFINITY)
        }));
        checks.push(summarize("disk-bound-literal", CheckKind::Inequality, 0.0, true, &samples, |s| {
            s.disk_literal.unwrap_or(f64::INFINITY)
        }));
    }
    let defect = samples.iter().map(|s| s.defect).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.pass || c.informational) && defect <= 1e-9;
    Ok(KahlerReport {
        model,
        k: model.k(),
        checks,
        hermitian_defect: defect,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_hessian_examples() {
        let plan = DifferentiationPlan::automatic();
        let h = distance_hessian(KahlerModel::Flat { n: 1 }, DistanceField::RhoSquared, &[c64(0.3, 0.4)], &plan).unwrap();
        assert!((h[0][0] - c64(1.0, 0.0)).norm() < 1e-15);
        let h = distance_hessian(KahlerModel::PoincareDisk, DistanceField::RhoSquared, &[c64(0.0, 0.0)], &plan).unwrap();
        assert!((h[0][0] - c64(1.0, 0.0)).norm() < 1e-14);
        let h = distance_hessian(KahlerModel::PoincareDisk, DistanceField::RhoSquared, &[c64(0.5, 0.0)], &plan).unwrap();
        assert!(h[0][0].re <= 2.0 * (1.0 + 2.0 * 0.5f64.atanh()));
        assert!(distance_hessian(KahlerModel::PoincareDisk, DistanceField::Rho, &[c64(0.0, 0.0)], &plan).is_err());
    }

    #[test]
    fn rho_squared_series_at_origin() {
        // ϱ² = |ζ|² + (2/3)|ζ|⁴ + …
        let f = ModelField {
            model: KahlerModel::PoincareDisk,
            field: DistanceField::RhoSquared,
        };
        let z = c64(1e-3, 2e-3);
        let x = z.norm_sqr();
        let v = real_eval(&f, &[z.re, z.im]);
        assert!((v - (x + 2.0 / 3.0 * x * x)).abs() < 1e-15);
    }

    #[test]
    fn disk_pairing_at_half() {
        let plan = DifferentiationPlan::automatic();
        let model = KahlerModel::PoincareDisk;
        let z = [c64(0.5, 0.0)];
        let t = model.radial_unit(&z).unwrap();
        let p = base_point(&z).unwrap();
        let rho2 = ModelField { model, field: DistanceField::RhoSquared };
        let d = wirtinger_derivative(&rho2, &p, &req![Var::Zb(0)], &plan).unwrap();
        let val = 2.0 * d * t[0].conj();
        assert!((val.re - 2.0 * 0.5f64.atanh()).abs() < 1e-12 && val.im.abs() < 1e-15);
        assert!((val.re - 1.09861).abs() < 1e-5);
    }

    #[test]
    fn flat_checks_pass() {
        let r = kahler_identity_checks(KahlerModel::Flat { n: 2 }, &SamplePlan::new(100, Region::ball(2.0), 4)).unwrap();
        assert!(r.pass, "{r:#?}");
        let c = r.checks.iter().find(|c| c.name == "complex-hessian-bound").unwrap();
        assert!((c.worst - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_literal_reading_fails_near_boundary() {
        let plan = DifferentiationPlan::automatic();
        let h = distance_hessian(KahlerModel::PoincareDisk, DistanceField::RhoSquared, &[c64(0.9, 0.0)], &plan).unwrap();
        let bound = 2.0 * (1.0 + 2.0 * 0.9f64.atanh());
        assert!(h[0][0].re > bound);
        assert!((h[0][0].re - 54.86).abs() < 1e-2);
        let normalized = h[0][0].re * (1.0 - 0.81f64).powi(2);
        assert!(normalized <= 2.0 + 2.0 * 0.9f64.atanh());
    }

    #[test]
    fn disk_checks_pass() {
        let r = kahler_identity_checks(KahlerModel::PoincareDisk, &SamplePlan::new(200, Region::shell(0.05, 0.9), 9)).unwrap();
        assert!(r.pass, "{r:#?}");
    }
}
