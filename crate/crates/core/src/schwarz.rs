//! Schwarz-lemma verification: pull-backs, the ratio `u = f*H / G`, its
//! fiber supremum, seeded verdicts against `K1/K2`, and the auxiliary
//! function Φ along composed disks.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chern::{curvature_bound_estimate, BoundSampler, CurvatureBounds};
use crate::error::{FinslerError, Result};
use crate::kahler::{DistanceField, KahlerModel, ModelField};
use crate::maps::HolomorphicMap;
use crate::metric::Metric;
use crate::sampling::{point_in_region, rng, unit_direction, Region, SamplePlan};
use crate::scalar::{c64, Scalar, C64};
use crate::wirtinger::{norm, AutoSource, DerivativeSource, JetField, JetPoint, JetVars, Var};

/// Below this pushed-forward norm the ratio is reported as an exact zero.
pub const ZERO_PUSH: f64 = 1e-300;
/// Points where σ or λ fall below this are excluded from log-derivative checks.
pub const LOG_EXCLUSION: f64 = 1e-6;

/// `f*H` as a metric on the source chart.
pub fn pullback_metric(f: &HolomorphicMap, h: &Metric) -> Result<Metric> {
    Metric::pullback(f.clone(), h.clone())
}

fn conj_vars(z: &[C64], v: &[C64]) -> JetVars<C64> {
    JetVars {
        z: z.to_vec(),
        zb: z.iter().map(|c| c.conj()).collect(),
        v: v.to_vec(),
        vb: v.iter().map(|c| c.conj()).collect(),
    }
}

fn check_shapes(f: &HolomorphicMap, g: &Metric, h: &Metric) -> Result<()> {
    if f.dim_in() != g.dim() {
        return Err(FinslerError::Shape {
            expected: g.dim(),
            got: f.dim_in(),
        });
    }
    if f.dim_out() != h.dim() {
        return Err(FinslerError::Shape {
            expected: h.dim(),
            got: f.dim_out(),
        });
    }
    Ok(())
}

/// `H(f(z); df_z v)` with exact zeros where the push-forward vanishes.
fn pulled_value(f: &HolomorphicMap, h: &Metric, z: &[C64], v: &[C64]) -> Result<f64> {
    let (w, xi) = f.push(z, v, false);
    h.check_base(&w)?;
    let s = norm(&xi);
    if !(s > ZERO_PUSH) {
        return Ok(0.0);
    }
    let unit: Vec<C64> = xi.iter().map(|c| c / s).collect();
    Ok(h.eval(&conj_vars(&w, &unit)).re * s * s)
}

fn ratio_raw(f: &HolomorphicMap, g: &Metric, h: &Metric, z: &[C64], v: &[C64]) -> Result<f64> {
    let den = g.eval(&conj_vars(z, v)).re;
    if !(den > 0.0) {
        return Err(FinslerError::Domain(format!("G(z; v) = {den} is not positive")));
    }
    Ok(pulled_value(f, h, z, v)? / den)
}

/// `u(z; v) = (f*H)(z; v) / G(z; v)`.
pub fn ratio_u(f: &HolomorphicMap, g: &Metric, h: &Metric, p: &JetPoint) -> Result<f64> {
    check_shapes(f, g, h)?;
    g.check_admissible(p)?;
    ratio_raw(f, g, h, &p.z, &p.v)
}

struct Ratio<'a> {
    num: &'a Metric,
    den: &'a Metric,
}

impl JetField for Ratio<'_> {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        self.num.eval(x) / self.den.eval(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberPlan {
    /// Random restarts per complex dimension.
    pub restarts_per_dim: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for FiberPlan {
    fn default() -> Self {
        FiberPlan {
            restarts_per_dim: 8,
            max_iters: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSup {
    pub value: f64,
    pub direction: Vec<C64>,
    /// Set when no restart reached a stationary point.
    pub warning: bool,
}

fn normalize(v: &[C64]) -> Vec<C64> {
    let s = norm(v);
    v.iter().map(|c| c / s).collect()
}

/// Ascent of `u` on the unit sphere of the fiber from one start.
fn ascend(
    f: &HolomorphicMap,
    g: &Metric,
    h: &Metric,
    pull: &Metric,
    z: &[C64],
    start: Vec<C64>,
    iters: usize,
) -> (f64, Vec<C64>, bool) {
    let n = z.len();
    let mut v = start;
    let Ok(mut u) = ratio_raw(f, g, h, z, &v) else {
        return (f64::NEG_INFINITY, v, false);
    };
    let field = Ratio { num: pull, den: g };
    let mut step = 0.5;
    let mut stationary = false;
    for _ in 0..iters {
        let Ok(p) = JetPoint::new(z.to_vec(), v.clone()) else { break };
        let Ok(mut src) = AutoSource::new(&field, &p) else { break };
        let mut grad = Vec::with_capacity(n);
        for a in 0..n {
            match src.derivative(&crate::req![Var::Vb(a)]) {
                Ok(d) if d.re.is_finite() && d.im.is_finite() => grad.push(d * 2.0),
                _ => grad.push(c64(0.0, 0.0)),
            }
        }
        // scale invariance makes the gradient tangent already; drop roundoff
        let radial: C64 = grad.iter().zip(&v).map(|(gi, vi)| vi.conj() * gi).sum();
        let radial = c64(radial.re, 0.0);
        for (gi, vi) in grad.iter_mut().zip(&v) {
            *gi -= vi * radial;
        }
        let gnorm = norm(&grad);
        if gnorm <= 1e-9 * (1.0 + u.abs()) {
            stationary = true;
            break;
        }
        let mut moved = false;
        while step > 1e-14 {
            let trial: Vec<C64> = v.iter().zip(&grad).map(|(a, b)| a + b * (step / gnorm)).collect();
            let trial = normalize(&trial);
            if let Ok(ut) = ratio_raw(f, g, h, z, &trial) {
                if ut > u {
                    v = trial;
                    u = ut;
                    step *= 1.5;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            stationary = gnorm <= 1e-6 * (1.0 + u.abs());
            break;
        }
    }
    (u, v, stationary)
}

/// `ũ(z) = max_{|v| = 1} u(z; v)` by multi-start ascent.
pub fn fiber_sup(
    f: &HolomorphicMap,
    g: &Metric,
    h: &Metric,
    z: &[C64],
    plan: &FiberPlan,
) -> Result<FiberSup> {
    check_shapes(f, g, h)?;
    g.check_base(z)?;
    let n = z.len();
    let mut e0 = vec![c64(0.0, 0.0); n];
    e0[0] = c64(1.0, 0.0);
    if n == 1 {
        return Ok(FiberSup {
            value: ratio_raw(f, g, h, z, &e0)?,
            direction: e0,
            warning: false,
        });
    }
    let pull = pullback_metric(f, h)?;
    let mut starts = Vec::new();
    for i in 0..n {
        let mut e = vec![c64(0.0, 0.0); n];
        e[i] = c64(1.0, 0.0);
        starts.push(e);
    }
    let mut r = rng(plan.seed);
    for _ in 0..plan.restarts_per_dim * n {
        starts.push(unit_direction(&mut r, n));
    }
    let mut best = (f64::NEG_INFINITY, e0, false);
    let mut any_stationary = false;
    for s in starts {
        let (u, v, ok) = ascend(f, g, h, &pull, z, s, plan.max_iters);
        any_stationary |= ok;
        if u > best.0 {
            best = (u, v, ok);
        }
    }
    if !best.0.is_finite() {
        return Err(FinslerError::Domain("ratio undefined on the whole fiber".into()));
    }
    Ok(FiberSup {
        value: best.0,
        direction: best.1,
        warning: !any_stationary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsSource {
    User,
    Estimated,
}

/// Base points at which ũ is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointSet {
    Random(SamplePlan),
    /// Polar grid on the unit-disk chart, one-dimensional sources only.
    PolarGrid { rings: usize, spokes: usize, outer: f64 },
}

impl PointSet {
    pub fn points(&self, n: usize) -> Result<Vec<Vec<C64>>> {
        match *self {
            PointSet::Random(plan) => {
                plan.region.validate()?;
                let mut r = rng(plan.seed);
                Ok((0..plan.count)
                    .map(|_| point_in_region(&mut r, &plan.region, n))
                    .collect())
            }
            PointSet::PolarGrid { rings, spokes, outer } => {
                if n != 1 {
                    return Err(FinslerError::Config("polar grids need a one-dimensional source".into()));
                }
                if rings == 0 || spokes == 0 || !(outer > 0.0) {
                    return Err(FinslerError::Config("empty polar grid".into()));
                }
                let mut pts = vec![vec![c64(0.0, 0.0)]];
                for i in 1..=rings {
                    let r = outer * i as f64 / rings as f64;
                    for j in 0..spokes {
                        let t = std::f64::consts::TAU * j as f64 / spokes as f64;
                        pts.push(vec![C64::from_polar(r, t)]);
                    }
                }
                Ok(pts)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedBounds {
    pub domain: CurvatureBounds,
    pub target: CurvatureBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzConfig {
    pub k1: f64,
    pub k2: f64,
    pub bounds_source: BoundsSource,
    pub points: PointSet,
    pub fiber: FiberPlan,
    pub estimates: Option<EstimatedBounds>,
}

impl SchwarzConfig {
    pub fn user(k1: f64, k2: f64, points: PointSet) -> Self {
        SchwarzConfig {
            k1,
            k2,
            bounds_source: BoundsSource::User,
            points,
            fiber: FiberPlan::default(),
            estimates: None,
        }
    }

    /// Bounds from sampled curvature extrema, padded by 1% toward the
    /// conservative side.
    pub fn estimated(
        g: &Metric,
        h: &Metric,
        domain: &Region,
        target: &Region,
        sampler: &BoundSampler,
        points: PointSet,
    ) -> Result<Self> {
        let dom = curvature_bound_estimate(g, domain, sampler)?;
        let tgt = curvature_bound_estimate(h, target, sampler)?;
        let k1 = dom.inf - 0.01 * dom.inf.abs();
        let k2 = tgt.sup + 0.01 * tgt.sup.abs();
        if !(k2 < 0.0) {
            return Err(FinslerError::Hypothesis(format!(
                "estimated target curvature supremum {} is not negative",
                tgt.sup
            )));
        }
        Ok(SchwarzConfig {
            k1,
            k2,
            bounds_source: BoundsSource::Estimated,
            points,
            fiber: FiberPlan::default(),
            estimates: Some(EstimatedBounds { domain: dom, target: tgt }),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub z: Vec<C64>,
    pub direction: Vec<C64>,
    pub ratio: f64,
    pub warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub map: String,
    pub domain_metric: String,
    pub target_metric: String,
    pub k1: f64,
    pub k2: f64,
    pub bounds_source: BoundsSource,
    pub bound: f64,
    pub tolerance: f64,
    pub max_ratio: f64,
    pub argmax_z: Vec<C64>,
    pub argmax_v: Vec<C64>,
    pub samples: Vec<SampleRow>,
    pub notes: Vec<String>,
    pub estimates: Option<EstimatedBounds>,
    pub verdict: bool,
}

/// Samples ũ over the configured points and compares against `K1/K2`.
pub fn schwarz_check(
    f: &HolomorphicMap,
    g: &Metric,
    h: &Metric,
    config: &SchwarzConfig,
) -> Result<SchwarzReport> {
    check_shapes(f, g, h)?;
    if !(config.k2 < 0.0) {
        return Err(FinslerError::Hypothesis(format!(
            "K2 = {} must be negative",
            config.k2
        )));
    }
    let bound = config.k1 / config.k2;
    let tolerance = 1e-6 + 1e-3 * bound.abs();
    let points = config.points.points(g.dim())?;
    for z in &points {
        g.check_base(z)?;
    }
    let rows: Vec<SampleRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let plan = FiberPlan {
                seed: config.fiber.seed.wrapping_add(i as u64),
                ..config.fiber
            };
            fiber_sup(f, g, h, z, &plan).map(|s| SampleRow {
                z: z.clone(),
                direction: s.direction,
                ratio: s.value,
                warning: s.warning,
            })
        })
        .collect::<Result<_>>()?;
    let best = rows
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.ratio.total_cmp(&b.ratio).then(j.cmp(i)))
        .map(|(_, r)| r.clone())
        .ok_or_else(|| FinslerError::Config("no sample points".into()))?;
    let mut notes = Vec::new();
    if config.k1 >= 0.0 {
        notes.push(format!(
            "K1 = {} >= 0 > K2 forces bound {} <= 0: every such map is constant",
            config.k1, bound
        ));
    }
    let warned = rows.iter().filter(|r| r.warning).count();
    if warned > 0 {
        notes.push(format!("fiber ascent did not reach a stationary point at {warned} samples"));
    }
    Ok(SchwarzReport {
        map: f.label(),
        domain_metric: g.name(),
        target_metric: h.name(),
        k1: config.k1,
        k2: config.k2,
        bounds_source: config.bounds_source,
        bound,
        tolerance,
        max_ratio: best.ratio.max(0.0),
        argmax_z: best.z,
        argmax_v: best.direction,
        verdict: best.ratio <= bound + tolerance,
        samples: rows,
        notes,
        estimates: config.estimates.clone(),
    })
}

/// A composed disk `ζ ↦ f(φ(ζ))` with `φ` into a closed-form model.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    pub phi: HolomorphicMap,
    pub model: KahlerModel,
    pub f: HolomorphicMap,
    pub target: Metric,
}

impl Composition {
    pub fn new(phi: HolomorphicMap, model: KahlerModel, f: HolomorphicMap, target: Metric) -> Result<Self> {
        if phi.dim_in() != 1 {
            return Err(FinslerError::Shape {
                expected: 1,
                got: phi.dim_in(),
            });
        }
        if phi.dim_out() != model.dim() || f.dim_in() != model.dim() {
            return Err(FinslerError::Shape {
                expected: model.dim(),
                got: phi.dim_out().max(f.dim_in()),
            });
        }
        if f.dim_out() != target.dim() {
            return Err(FinslerError::Shape {
                expected: target.dim(),
                got: f.dim_out(),
            });
        }
        Ok(Composition { phi, model, f, target })
    }

    fn model_metric(&self) -> Metric {
        match self.model {
            KahlerModel::Flat { n } => Metric::euclidean(n),
            KahlerModel::PoincareDisk => Metric::poincare(),
        }
    }

    /// `(ρ²(φ), λ², σ²)` along the disk.
    fn parts<S: Scalar>(&self, x: &JetVars<S>) -> (S, S, S) {
        let one = [S::one()];
        let (w, dw) = self.phi.push(&x.z, &one, false);
        let (wb, dwb) = self.phi.push(&x.zb, &one, true);
        let rho2 = ModelField {
            model: self.model,
            field: DistanceField::RhoSquared,
        }
        .eval(&JetVars {
            z: w.clone(),
            zb: wb.clone(),
            v: dw.clone(),
            vb: dwb.clone(),
        });
        let lambda2 = self.model_metric().eval(&JetVars {
            z: w.clone(),
            zb: wb.clone(),
            v: dw.clone(),
            vb: dwb.clone(),
        });
        let (y, dy) = self.f.push(&w, &dw, false);
        let (yb, dyb) = self.f.push(&wb, &dwb, true);
        let sigma2 = self.target.eval(&JetVars {
            z: y,
            zb: yb,
            v: dy,
            vb: dyb,
        });
        (rho2, lambda2, sigma2)
    }
}

fn disk_rho2<S: Scalar>(z: S, zb: S) -> S {
    let w = z * zb;
    let g = w.atanh_sqrt_ratio();
    w * g * g
}

struct LogPhi<'a> {
    comp: &'a Composition,
    a2: f64,
    b2: f64,
}

impl JetField for LogPhi<'_> {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        let (rho2, lambda2, sigma2) = self.comp.parts(x);
        let varrho2 = disk_rho2(x.z[0], x.zb[0]);
        let outer = S::from_f(self.a2) - rho2;
        let inner = S::from_f(self.b2) - varrho2;
        (outer * outer).ln() + (inner * inner).ln() + sigma2.ln() - lambda2.ln()
    }
}

struct LogOfPart<'a> {
    comp: &'a Composition,
    sigma: bool,
}

impl JetField for LogOfPart<'_> {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        let (_, lambda2, sigma2) = self.comp.parts(x);
        if self.sigma {
            sigma2.ln()
        } else {
            lambda2.ln()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiGrid {
    pub rings: usize,
    pub spokes: usize,
    pub refine_steps: usize,
}

impl Default for PhiGrid {
    fn default() -> Self {
        PhiGrid {
            rings: 256,
            spokes: 64,
            refine_steps: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub re: f64,
    pub im: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiMaximizer {
    pub zeta: C64,
    pub value: f64,
    /// `|∂ log Φ|` at the maximizer.
    pub grad_log: f64,
    /// `∂² log Φ / ∂ζ∂ζ̄` at the maximizer.
    pub levi_log: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiTrace {
    pub a: f64,
    pub b: f64,
    pub grid: PhiGrid,
    pub field: Vec<FieldSample>,
    pub max_value: f64,
    pub maximizer: Option<PhiMaximizer>,
    /// Largest outermost-ring value relative to the maximum.
    pub outer_ring_ratio: f64,
    pub first_order_pass: bool,
    pub second_order_pass: bool,
    pub boundary_pass: bool,
}

struct LogDerivs {
    d: C64,
    dd: C64,
    ddbar: f64,
}

fn log_derivs(field: &LogPhi, zeta: C64) -> Result<LogDerivs> {
    let p = JetPoint::new(vec![zeta], vec![c64(1.0, 0.0)])?;
    let mut src = AutoSource::new(field, &p)?;
    Ok(LogDerivs {
        d: src.derivative(&crate::req![Var::Z(0)])?,
        dd: src.derivative(&crate::req![Var::Z(0), Var::Z(0)])?,
        ddbar: src.derivative(&crate::req![Var::Z(0), Var::Zb(0)])?.re,
    })
}

/// Regularized Newton step on `log Φ` in real coordinates.
fn newton_step(ld: &LogDerivs) -> C64 {
    let gx = 2.0 * ld.d.re;
    let gy = -2.0 * ld.d.im;
    let hxx = 2.0 * ld.ddbar + 2.0 * ld.dd.re;
    let hyy = 2.0 * ld.ddbar - 2.0 * ld.dd.re;
    let hxy = -2.0 * ld.dd.im;
    let tr = 0.5 * (hxx + hyy);
    let disc = (0.25 * (hxx - hyy).powi(2) + hxy * hxy).sqrt();
    let top = tr + disc;
    let scale = hxx.abs().max(hyy.abs()).max(1.0);
    let mu = if top > -1e-8 * scale { top + 1e-8 * scale } else { 0.0 };
    let (a, d, b) = (hxx - mu, hyy - mu, hxy);
    let det = a * d - b * b;
    let dx = -(d * gx - b * gy) / det;
    let dy = -(-b * gx + a * gy) / det;
    c64(dx, dy)
}

/// Φ on a polar grid of the geodesic disk `B_b`, its interior maximizer
/// and the first- and second-order conditions there.
pub fn phi_trace(comp: &Composition, a: f64, b: f64, grid: &PhiGrid) -> Result<PhiTrace> {
    if !(a > 0.0) || !(b > 0.0) || grid.rings == 0 || grid.spokes == 0 {
        return Err(FinslerError::Config("phi trace needs positive radii and a non-empty grid".into()));
    }
    let (a2, b2) = (a * a, b * b);
    let mut pts = Vec::with_capacity(grid.rings * grid.spokes);
    for i in 1..=grid.rings {
        let r = (b * i as f64 / (grid.rings + 1) as f64).tanh();
        for j in 0..grid.spokes {
            let t = std::f64::consts::TAU * j as f64 / grid.spokes as f64;
            pts.push(C64::from_polar(r, t));
        }
    }
    let evaluate = |zeta: C64| -> Result<f64> {
        let x = conj_vars(&[zeta], &[c64(1.0, 0.0)]);
        let (rho2, lambda2, sigma2) = comp.parts(&x);
        if !(lambda2.re > 0.0) {
            return Err(FinslerError::DegenerateCurve(format!("λ² vanishes at ζ = {zeta}")));
        }
        if rho2.re >= a2 {
            return Err(FinslerError::Hypothesis(format!(
                "φ(ζ) leaves the radius-{a} ball at ζ = {zeta}"
            )));
        }
        let varrho2 = disk_rho2(zeta, zeta.conj()).re;
        let sigma2 = if sigma2.re.is_finite() { sigma2.re.max(0.0) } else { 0.0 };
        Ok((a2 - rho2.re).powi(2) * (b2 - varrho2).powi(2) * sigma2 / lambda2.re)
    };
    let values: Vec<f64> = pts.par_iter().map(|z| evaluate(*z)).collect::<Result<_>>()?;
    let field: Vec<FieldSample> = pts
        .iter()
        .zip(&values)
        .map(|(z, v)| FieldSample {
            re: z.re,
            im: z.im,
            value: *v,
        })
        .collect();
    let (best_i, grid_max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let outer = &values[(grid.rings - 1) * grid.spokes..];
    let outer_max = outer.iter().cloned().fold(0.0, f64::max);
    if !(grid_max > 0.0) {
        return Ok(PhiTrace {
            a,
            b,
            grid: *grid,
            field,
            max_value: 0.0,
            maximizer: None,
            outer_ring_ratio: 0.0,
            first_order_pass: true,
            second_order_pass: true,
            boundary_pass: true,
        });
    }
    let log_field = LogPhi { comp, a2, b2 };
    let limit = b.tanh();
    let mut zeta = pts[best_i];
    let mut value = grid_max;
    for _ in 0..grid.refine_steps {
        let ld = log_derivs(&log_field, zeta)?;
        let mut step = newton_step(&ld);
        let mut accepted = false;
        for _ in 0..40 {
            let trial = zeta + step;
            if trial.norm() < limit {
                if let Ok(v) = evaluate(trial) {
                    if v >= value {
                        zeta = trial;
                        value = v;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let ld = log_derivs(&log_field, zeta)?;
    let grad_log = ld.d.norm();
    let max_value = value.max(grid_max);
    let outer_ring_ratio = outer_max / max_value;
    Ok(PhiTrace {
        a,
        b,
        grid: *grid,
        field,
        max_value,
        maximizer: Some(PhiMaximizer {
            zeta,
            value,
            grad_log,
            levi_log: ld.ddbar,
        }),
        outer_ring_ratio,
        first_order_pass: grad_log < 1e-6,
        second_order_pass: ld.ddbar <= 1e-6,
        boundary_pass: outer_ring_ratio < 1e-6,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    /// Smallest `rhs-side slack` over the checked points; non-negative passes.
    pub worst_slack: f64,
    pub witness: C64,
    pub checked: usize,
    pub pass: bool,
    pub informational: bool,
}

/// Curvature inequalities along a composed disk, at seeded points of the
/// Euclidean disk of radius `radius`:
/// `∂∂̄ log σ² ≥ −(K2/2) σ²` and `∂∂̄ log λ² ≤ −(K1/2) λ²`, the form that
/// follows from `K = −(2/h) ∂∂̄ log h`, plus the same pair with factor 2
/// reported for information.
pub fn curvature_inequalities(
    comp: &Composition,
    k1: f64,
    k2: f64,
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<InequalityCheck>> {
    let mut r = rng(seed);
    let pts: Vec<C64> = (0..count)
        .map(|_| {
            let rad = radius * r.random::<f64>().sqrt();
            C64::from_polar(rad, std::f64::consts::TAU * r.random::<f64>())
        })
        .collect();
    let sigma_f = LogOfPart { comp, sigma: true };
    let lambda_f = LogOfPart { comp, sigma: false };
    let mut rows = Vec::new();
    for zeta in &pts {
        let x = conj_vars(&[*zeta], &[c64(1.0, 0.0)]);
        let (_, lambda2, sigma2) = comp.parts(&x);
        let (l2, s2) = (lambda2.re, sigma2.re);
        let p = JetPoint::new(vec![*zeta], vec![c64(1.0, 0.0)])?;
        let ll = if l2.sqrt() > LOG_EXCLUSION {
            Some(AutoSource::new(&lambda_f, &p)?.derivative(&crate::req![Var::Z(0), Var::Zb(0)])?.re)
        } else {
            None
        };
        let ls = if s2.is_finite() && s2.sqrt() > LOG_EXCLUSION {
            Some(AutoSource::new(&sigma_f, &p)?.derivative(&crate::req![Var::Z(0), Var::Zb(0)])?.re)
        } else {
            None
        };
        rows.push((*zeta, l2, s2, ll, ls));
    }
    let check = |name: &str, factor: f64, sigma: bool, informational: bool| {
        let mut worst = f64::INFINITY;
        let mut witness = c64(0.0, 0.0);
        let mut checked = 0;
        for (zeta, l2, s2, ll, ls) in &rows {
            let slack = if sigma {
                let Some(v) = ls else { continue };
                let tol = 1e-4 * (1.0 + v.abs());
                v + factor * k2 * s2 + tol
            } else {
                let Some(v) = ll else { continue };
                let tol = 1e-4 * (1.0 + v.abs());
                -factor * k1 * l2 - v + tol
            };
            checked += 1;
            if slack < worst {
                worst = slack;
                witness = *zeta;
            }
        }
        InequalityCheck {
            name: name.into(),
            worst_slack: if checked == 0 { 0.0 } else { worst },
            witness,
            checked,
            pass: checked == 0 || worst >= 0.0,
            informational,
        }
    };
    Ok(vec![
        check("target-curvature", 0.5, true, false),
        check("domain-curvature", 0.5, false, false),
        check("target-curvature-factor-2", 2.0, true, true),
        check("domain-curvature-factor-2", 2.0, false, true),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_grid() -> PointSet {
        PointSet::PolarGrid {
            rings: 40,
            spokes: 8,
            outer: 0.99,
        }
    }

    #[test]
    fn ratio_examples() {
        let p = Metric::poincare();
        let sq = HolomorphicMap::power(2);
        let pt = JetPoint::new(vec![c64(0.5, 0.0)], vec![c64(1.0, 0.0)]).unwrap();
        assert!((ratio_u(&sq, &p, &p, &pt).unwrap() - 0.64).abs() < 1e-12);
        let pt2 = pt.scaled(c64(0.0, 2.0)).unwrap();
        assert!((ratio_u(&sq, &p, &p, &pt2).unwrap() - 0.64).abs() < 1e-10);
        let id = HolomorphicMap::identity(1);
        assert!((ratio_u(&id, &p, &p, &pt).unwrap() - 1.0).abs() < 1e-14);
        let pull = pullback_metric(&sq, &p).unwrap();
        let g = crate::evaluate_metric(&pull, &pt).unwrap();
        assert!((g - 4.0 * 0.25 / (1.0f64 - 0.0625).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn fiber_sup_linear() {
        let e = Metric::euclidean(2);
        let f = HolomorphicMap::Affine {
            matrix: vec![vec![c64(2.0, 0.0), c64(0.0, 0.0)], vec![c64(0.0, 0.0), c64(1.0, 0.0)]],
            offset: vec![c64(0.0, 0.0); 2],
        };
        let s = fiber_sup(&f, &e, &e, &[c64(0.1, 0.2), c64(0.0, -0.3)], &FiberPlan::default()).unwrap();
        assert!((s.value - 4.0).abs() < 1e-9);
        assert!((s.direction[0].norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn schwarz_pick_and_constant() {
        let p = Metric::poincare();
        let cfg = SchwarzConfig::user(-4.0, -4.0, disk_grid());
        let rep = schwarz_check(&HolomorphicMap::power(2), &p, &p, &cfg).unwrap();
        assert!(rep.verdict);
        assert!((rep.bound - 1.0).abs() < 1e-15);
        assert!(rep.max_ratio < 1.0 && rep.max_ratio > 0.9);
        let c = HolomorphicMap::Constant {
            dim_in: 1,
            point: vec![c64(0.2, 0.1)],
        };
        let rep = schwarz_check(&c, &p, &p, &cfg).unwrap();
        assert_eq!(rep.max_ratio, 0.0);
        assert!(rep.verdict);
        assert!(matches!(
            schwarz_check(&c, &p, &p, &SchwarzConfig::user(-4.0, 0.0, disk_grid())),
            Err(FinslerError::Hypothesis(_))
        ));
        let rep = schwarz_check(&c, &p, &p, &SchwarzConfig::user(1.0, -4.0, disk_grid())).unwrap();
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn phi_constant_map() {
        let comp = Composition::new(
            HolomorphicMap::identity(1),
            KahlerModel::PoincareDisk,
            HolomorphicMap::Constant {
                dim_in: 1,
                point: vec![c64(0.1, 0.0)],
            },
            Metric::poincare(),
        )
        .unwrap();
        let grid = PhiGrid {
            rings: 16,
            spokes: 8,
            refine_steps: 5,
        };
        let t = phi_trace(&comp, 3.0, 3.0, &grid).unwrap();
        assert!(t.maximizer.is_none());
        assert_eq!(t.max_value, 0.0);
    }
}
