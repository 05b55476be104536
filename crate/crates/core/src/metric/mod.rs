//! Complex Finsler metrics: the built-in zoo, user expressions, pull-backs,
//! and the Levi matrix.

mod validate;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::expr::Expr;
use crate::linalg::CMatrix;
use crate::maps::HolomorphicMap;
use crate::req;
use crate::sampling::rng;
use crate::scalar::{c64, Scalar, C64};
use crate::wirtinger::{
    source_for, DifferentiationPlan, JetField, JetPoint, JetVars, Var,
};

pub use validate::{validate_metric, ValidationReport, Witness};

pub const ZOO: &[&str] = &[
    "euclidean",
    "poincare",
    "fubini-study",
    "product-disk",
    "hermitian-poly",
    "expfam",
    "degenerate",
];

/// Serializable description of a metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub name: String,
    pub dim: usize,
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Box<MetricDescriptor>>,
}

impl MetricDescriptor {
    pub fn new(name: &str, dim: usize, params: &[(&str, f64)]) -> Self {
        MetricDescriptor {
            name: name.to_string(),
            dim,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            expr: None,
            map: None,
            target: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| FinslerError::Parse(e.to_string()))
    }
}

/// Hermitian tensors `h_{αβ̄}(z)` underlying Hermitian-quadratic metrics.
#[derive(Clone, Debug, PartialEq)]
pub enum HermitianMetric {
    Euclidean { dim: usize },
    /// (1 − |z|²)⁻² on the unit disk.
    PoincareDisk,
    /// (1 + |z|²)⁻² on ℂ.
    FubiniStudyChart,
    /// diag((1 − |z¹|²)⁻², 1) on Δ × ℂ.
    ProductDisk,
    /// h = I + B Bᴴ with B(z) = B₀ + Σ_j (z^j P_j + z̄^j Q_j).
    PolynomialGram {
        dim: usize,
        seed: u64,
        scale: f64,
        b0: CMatrix,
        p: Vec<CMatrix>,
        q: Vec<CMatrix>,
    },
    /// User entries `h_{αβ̄}` as expressions in z, z̄.
    Expressions { dim: usize, entries: Vec<Vec<Expr>> },
}

impl HermitianMetric {
    pub fn dim(&self) -> usize {
        match self {
            HermitianMetric::Euclidean { dim }
            | HermitianMetric::PolynomialGram { dim, .. }
            | HermitianMetric::Expressions { dim, .. } => *dim,
            HermitianMetric::PoincareDisk | HermitianMetric::FubiniStudyChart => 1,
            HermitianMetric::ProductDisk => 2,
        }
    }

    pub fn polynomial_gram(dim: usize, seed: u64, scale: f64) -> Self {
        let mut r = rng(seed);
        let mut mat = |s: f64| -> CMatrix {
            (0..dim)
                .map(|_| {
                    (0..dim)
                        .map(|_| c64(r.random_range(-s..s), r.random_range(-s..s)))
                        .collect()
                })
                .collect()
        };
        let b0 = mat(scale);
        let p = (0..dim).map(|_| mat(scale)).collect();
        let q = (0..dim).map(|_| mat(scale)).collect();
        HermitianMetric::PolynomialGram {
            dim,
            seed,
            scale,
            b0,
            p,
            q,
        }
    }

    /// Entries `h[α][β] = h_{αβ̄}` over polarized base variables.
    pub fn tensor<S: Scalar>(&self, z: &[S], zb: &[S]) -> Vec<Vec<S>> {
        let n = self.dim();
        let mut h = vec![vec![S::zero(); n]; n];
        match self {
            HermitianMetric::Euclidean { .. } => {
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = S::one();
                }
            }
            HermitianMetric::PoincareDisk => {
                let w = S::one() - z[0] * zb[0];
                h[0][0] = (w * w).recip();
            }
            HermitianMetric::FubiniStudyChart => {
                let w = S::one() + z[0] * zb[0];
                h[0][0] = (w * w).recip();
            }
            HermitianMetric::ProductDisk => {
                let w = S::one() - z[0] * zb[0];
                h[0][0] = (w * w).recip();
                h[1][1] = S::one();
            }
            HermitianMetric::PolynomialGram { b0, p, q, .. } => {
                let b = |i: usize, k: usize| {
                    let mut acc = S::from_c(b0[i][k]);
                    for j in 0..n {
                        acc = acc + z[j].scale(p[j][i][k]) + zb[j].scale(q[j][i][k]);
                    }
                    acc
                };
                let bc = |i: usize, k: usize| {
                    let mut acc = S::from_c(b0[i][k].conj());
                    for j in 0..n {
                        acc = acc + zb[j].scale(p[j][i][k].conj()) + z[j].scale(q[j][i][k].conj());
                    }
                    acc
                };
                let bm: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|k| b(i, k)).collect()).collect();
                let bcm: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|k| bc(i, k)).collect()).collect();
                for a in 0..n {
                    for c in 0..n {
                        let mut acc = if a == c { S::one() } else { S::zero() };
                        for k in 0..n {
                            acc = acc + bm[a][k] * bcm[c][k];
                        }
                        h[a][c] = acc;
                    }
                }
            }
            HermitianMetric::Expressions { entries, .. } => {
                let x = JetVars {
                    z: z.to_vec(),
                    zb: zb.to_vec(),
                    v: z.to_vec(),
                    vb: zb.to_vec(),
                };
                for a in 0..n {
                    for c in 0..n {
                        h[a][c] = entries[a][c].eval_with(&x, false);
                    }
                }
            }
        }
        h
    }

    pub fn tensor_at(&self, z: &[C64]) -> CMatrix {
        let zb: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        self.tensor(z, &zb)
    }

    fn admissible(&self, z: &[C64]) -> Result<()> {
        match self {
            HermitianMetric::PoincareDisk | HermitianMetric::ProductDisk if z[0].norm() >= 1.0 => {
                Err(FinslerError::Domain(format!(
                    "|z¹| = {} outside the unit disk",
                    z[0].norm()
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    Hermitian(HermitianMetric),
    /// G = r·e^{a t + b s}, r = |v|², t = |z|², s = |⟨z, v⟩|²/r.
    ExpFamily { a: f64, b: f64, m0: f64, dim: usize },
    /// G = |v¹|² on ℂⁿ, a rank-one test form.
    Degenerate { dim: usize },
    Expression { dim: usize, expr: Expr, source: String, params: BTreeMap<String, f64> },
    Pullback { map: HolomorphicMap, target: Box<Metric> },
}

impl Metric {
    pub fn euclidean(dim: usize) -> Self {
        Metric::Hermitian(HermitianMetric::Euclidean { dim })
    }

    pub fn poincare() -> Self {
        Metric::Hermitian(HermitianMetric::PoincareDisk)
    }

    pub fn fubini_study_chart() -> Self {
        Metric::Hermitian(HermitianMetric::FubiniStudyChart)
    }

    pub fn product_disk() -> Self {
        Metric::Hermitian(HermitianMetric::ProductDisk)
    }

    pub fn hermitian_poly(dim: usize, seed: u64, scale: f64) -> Self {
        Metric::Hermitian(HermitianMetric::polynomial_gram(dim, seed, scale))
    }

    pub fn exp_family(a: f64, b: f64, m0: f64, dim: usize) -> Result<Self> {
        if a == 0.0 || !(m0 > 0.0) || b >= 1.0 / m0 || a + b <= 0.0 || dim == 0 {
            return Err(FinslerError::Config(format!(
                "exp-family requires a != 0, M0 > 0, b < 1/M0, a + b > 0 (got a={a}, b={b}, M0={m0})"
            )));
        }
        Ok(Metric::ExpFamily { a, b, m0, dim })
    }

    pub fn expression(dim: usize, source: &str, params: BTreeMap<String, f64>) -> Result<Self> {
        let expr = Expr::parse(source, &params)?;
        if expr.dim_hint() > dim {
            return Err(FinslerError::Shape {
                expected: dim,
                got: expr.dim_hint(),
            });
        }
        Ok(Metric::Expression {
            dim,
            expr,
            source: source.to_string(),
            params,
        })
    }

    /// Pull-back `f*H(z; v) = H(f(z); df_z v)`.
    pub fn pullback(map: HolomorphicMap, target: Metric) -> Result<Self> {
        if map.dim_out() != target.dim() {
            return Err(FinslerError::Shape {
                expected: target.dim(),
                got: map.dim_out(),
            });
        }
        Ok(Metric::Pullback {
            map,
            target: Box::new(target),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Metric::Hermitian(h) => h.dim(),
            Metric::ExpFamily { dim, .. } | Metric::Degenerate { dim } | Metric::Expression { dim, .. } => *dim,
            Metric::Pullback { map, .. } => map.dim_in(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Metric::Hermitian(HermitianMetric::Euclidean { .. }) => "euclidean".into(),
            Metric::Hermitian(HermitianMetric::PoincareDisk) => "poincare".into(),
            Metric::Hermitian(HermitianMetric::FubiniStudyChart) => "fubini-study".into(),
            Metric::Hermitian(HermitianMetric::ProductDisk) => "product-disk".into(),
            Metric::Hermitian(HermitianMetric::PolynomialGram { .. }) => "hermitian-poly".into(),
            Metric::Hermitian(HermitianMetric::Expressions { .. }) => "hermitian-expr".into(),
            Metric::ExpFamily { .. } => "expfam".into(),
            Metric::Degenerate { .. } => "degenerate".into(),
            Metric::Expression { .. } => "expr".into(),
            Metric::Pullback { .. } => "pullback".into(),
        }
    }

    pub fn hermitian(&self) -> Option<&HermitianMetric> {
        match self {
            Metric::Hermitian(h) => Some(h),
            _ => None,
        }
    }

    /// Builds a metric from the zoo by name.
    pub fn from_zoo(name: &str, dim: Option<usize>, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let require = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| FinslerError::Config(format!("missing parameter '{k}'")))
        };
        let fixed = |n: usize| -> Result<()> {
            match dim {
                Some(d) if d != n => Err(FinslerError::Shape { expected: n, got: d }),
                _ => Ok(()),
            }
        };
        match name {
            "euclidean" => Ok(Metric::euclidean(dim.unwrap_or(1))),
            "poincare" | "poincare-disk" => {
                fixed(1)?;
                Ok(Metric::poincare())
            }
            "fubini-study" | "fubini-study-chart" => {
                fixed(1)?;
                Ok(Metric::fubini_study_chart())
            }
            "product-disk" => {
                fixed(2)?;
                Ok(Metric::product_disk())
            }
            "hermitian-poly" => Ok(Metric::hermitian_poly(
                dim.unwrap_or(2),
                get("seed", 0.0) as u64,
                get("scale", 0.3),
            )),
            "expfam" | "exp-family" => Metric::exp_family(
                require("a")?,
                require("b")?,
                get("M0", 1.0),
                dim.unwrap_or(2),
            ),
            "degenerate" => Ok(Metric::Degenerate {
                dim: dim.unwrap_or(2),
            }),
            _ => Err(FinslerError::UnknownMetric {
                name: name.to_string(),
                zoo: ZOO.join(", "),
            }),
        }
    }

    pub fn from_descriptor(d: &MetricDescriptor) -> Result<Self> {
        match d.name.as_str() {
            "expr" => {
                let src = d
                    .expr
                    .as_deref()
                    .ok_or_else(|| FinslerError::Config("expr metric needs an 'expr' field".into()))?;
                Metric::expression(d.dim, src, d.params.clone())
            }
            "pullback" => Err(FinslerError::Config(
                "pull-back descriptors are output-only".into(),
            )),
            name => {
                let m = Metric::from_zoo(name, Some(d.dim), &d.params)?;
                if m.dim() != d.dim {
                    return Err(FinslerError::Shape {
                        expected: m.dim(),
                        got: d.dim,
                    });
                }
                Ok(m)
            }
        }
    }

    pub fn descriptor(&self) -> MetricDescriptor {
        let mut d = MetricDescriptor::new(&self.name(), self.dim(), &[]);
        match self {
            Metric::Hermitian(HermitianMetric::PolynomialGram { seed, scale, .. }) => {
                d.params.insert("seed".into(), *seed as f64);
                d.params.insert("scale".into(), *scale);
            }
            Metric::ExpFamily { a, b, m0, .. } => {
                d.params.insert("a".into(), *a);
                d.params.insert("b".into(), *b);
                d.params.insert("M0".into(), *m0);
            }
            Metric::Expression { source, params, .. } => {
                d.params = params.clone();
                d.expr = Some(source.clone());
            }
            Metric::Pullback { map, target } => {
                d.map = Some(map.label());
                d.target = Some(Box::new(target.descriptor()));
            }
            _ => {}
        }
        d
    }

    /// Checks that `p` lies in the metric's domain.
    pub fn check_admissible(&self, p: &JetPoint) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(FinslerError::Shape {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        self.check_base(&p.z)
    }

    pub fn check_base(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(FinslerError::Shape {
                expected: self.dim(),
                got: z.len(),
            });
        }
        match self {
            Metric::Hermitian(h) => h.admissible(z),
            Metric::ExpFamily { m0, .. } => {
                let r = crate::wirtinger::norm(z);
                if r > *m0 * (1.0 + 1e-12) {
                    return Err(FinslerError::Domain(format!("|z| = {r} exceeds M0 = {m0}")));
                }
                Ok(())
            }
            Metric::Pullback { map, target } => target.check_base(&map.apply(z)),
            _ => Ok(()),
        }
    }

    /// Euclidean radius of the largest ball around 0 inside the domain.
    pub fn domain_radius(&self) -> f64 {
        match self {
            Metric::Hermitian(HermitianMetric::PoincareDisk | HermitianMetric::ProductDisk) => 1.0,
            Metric::ExpFamily { m0, .. } => *m0,
            _ => f64::INFINITY,
        }
    }
}

impl JetField for Metric {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        match self {
            Metric::Hermitian(h) => {
                let t = h.tensor(&x.z, &x.zb);
                let mut acc = S::zero();
                for (a, row) in t.iter().enumerate() {
                    for (b, e) in row.iter().enumerate() {
                        acc = acc + *e * x.v[a] * x.vb[b];
                    }
                }
                acc
            }
            Metric::ExpFamily { a, b, .. } => {
                let n = x.dim();
                let mut r = S::zero();
                let mut t = S::zero();
                let mut zv = S::zero();
                let mut zbv = S::zero();
                for i in 0..n {
                    r = r + x.v[i] * x.vb[i];
                    t = t + x.z[i] * x.zb[i];
                    zv = zv + x.z[i] * x.vb[i];
                    zbv = zbv + x.zb[i] * x.v[i];
                }
                let s = zv * zbv / r;
                r * (t * S::from_f(*a) + s * S::from_f(*b)).exp()
            }
            Metric::Degenerate { .. } => x.v[0] * x.vb[0],
            Metric::Expression { expr, .. } => expr.eval_with(x, false),
            Metric::Pullback { map, target } => {
                let (w, xi) = map.push(&x.z, &x.v, false);
                let (wb, xib) = map.push(&x.zb, &x.vb, true);
                target.eval(&JetVars {
                    z: w,
                    zb: wb,
                    v: xi,
                    vb: xib,
                })
            }
        }
    }
}

/// G(z; v), after admissibility checks.
pub fn evaluate_metric(m: &Metric, p: &JetPoint) -> Result<f64> {
    m.check_admissible(p)?;
    Ok(m.eval(&JetVars::<C64>::at(p)).re)
}

/// Hermitian matrix `(G_{αβ̄})` of second vertical derivatives.
pub fn levi_matrix(m: &Metric, p: &JetPoint) -> Result<CMatrix> {
    levi_matrix_with(m, p, &DifferentiationPlan::automatic())
}

pub fn levi_matrix_with(m: &Metric, p: &JetPoint, plan: &DifferentiationPlan) -> Result<CMatrix> {
    m.check_admissible(p)?;
    let n = p.dim();
    let mut src = source_for(m, p, plan)?;
    let mut out = vec![vec![c64(0.0, 0.0); n]; n];
    for a in 0..n {
        for b in 0..n {
            out[a][b] = src.derivative(&req![Var::V(a), Var::Vb(b)])?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wirtinger::fd_oracle_derivative;

    fn jp(z: &[C64], v: &[C64]) -> JetPoint {
        JetPoint::new(z.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let p = JetPoint::real(&[0.0], &[1.0]).unwrap();
        assert!((evaluate_metric(&Metric::poincare(), &p).unwrap() - 1.0).abs() < 1e-15);
        let e = Metric::exp_family(1.0, 0.5, 1.0, 2).unwrap();
        let p0 = JetPoint::real(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((evaluate_metric(&e, &p0).unwrap() - 1.0).abs() < 1e-15);
        // r = 1, t = 0.25, s = 0.25 ⇒ e^{0.25 + 0.125}
        let p1 = JetPoint::real(&[0.5, 0.0], &[1.0, 0.0]).unwrap();
        let g = evaluate_metric(&e, &p1).unwrap();
        assert!((g - 0.375f64.exp()).abs() < 1e-14);
        assert!((g - 1.454991).abs() < 1e-6);
    }

    #[test]
    fn evaluation_errors() {
        let e = Metric::exp_family(1.0, 0.5, 1.0, 2).unwrap();
        let far = JetPoint::real(&[1.2, 0.0], &[1.0, 0.0]).unwrap();
        assert!(matches!(evaluate_metric(&e, &far), Err(FinslerError::Domain(_))));
        let wrong = JetPoint::real(&[0.0], &[1.0]).unwrap();
        assert!(matches!(evaluate_metric(&e, &wrong), Err(FinslerError::Shape { .. })));
        assert!(Metric::exp_family(0.0, 0.5, 1.0, 2).is_err());
        assert!(Metric::exp_family(1.0, 1.5, 1.0, 2).is_err());
        assert!(Metric::exp_family(-1.0, 0.5, 1.0, 2).is_err());
    }

    #[test]
    fn levi_of_euclidean_is_identity_and_hermitian_is_h() {
        let p = jp(&[c64(0.3, 0.1), c64(-0.2, 0.5)], &[c64(0.4, -0.9), c64(1.0, 0.2)]);
        let l = levi_matrix(&Metric::euclidean(2), &p).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((l[a][b] - c64(want, 0.0)).norm() < 1e-15);
            }
        }
        let hm = Metric::hermitian_poly(2, 3, 0.3);
        let l = levi_matrix(&hm, &p).unwrap();
        let h = hm.hermitian().unwrap().tensor_at(&p.z);
        for a in 0..2 {
            for b in 0..2 {
                assert!((l[a][b] - h[a][b]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn levi_of_exp_family_matches_oracle() {
        let m = Metric::exp_family(1.0, 0.5, 1.0, 2).unwrap();
        let p = JetPoint::real(&[0.5, 0.0], &[1.0, 0.0]).unwrap();
        let l = levi_matrix(&m, &p).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let r = req![Var::V(a), Var::Vb(b)];
                let fd = fd_oracle_derivative(&m, &p, &r, 1e-3).unwrap();
                assert!((fd - l[a][b]).norm() <= 1e-6 * (1.0 + l[a][b].norm()));
            }
        }
    }

    #[test]
    fn zoo_lookup_and_unknown_names() {
        let params = BTreeMap::new();
        assert!(Metric::from_zoo("poincare", None, &params).is_ok());
        match Metric::from_zoo("nosuch", None, &params) {
            Err(FinslerError::UnknownMetric { zoo, .. }) => assert!(zoo.contains("expfam")),
            other => panic!("{other:?}"),
        }
        assert!(Metric::from_zoo("expfam", Some(2), &params).is_err());
    }

    #[test]
    fn pullback_by_square_into_poincare() {
        let m = Metric::pullback(HolomorphicMap::power(2), Metric::poincare()).unwrap();
        let zeta = c64(0.3, 0.4);
        let p = jp(&[zeta], &[c64(1.0, 0.0)]);
        let want = 4.0 * zeta.norm_sqr() / (1.0 - zeta.norm_sqr().powi(2)).powi(2);
        assert!((evaluate_metric(&m, &p).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn expression_metric_matches_builtin() {
        let e = Metric::expression(1, "v*vb/(1-z*zb)^2", BTreeMap::new()).unwrap();
        let p = jp(&[c64(0.2, -0.3)], &[c64(0.5, 0.5)]);
        let a = evaluate_metric(&e, &p).unwrap();
        let b = evaluate_metric(&Metric::poincare(), &p).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
