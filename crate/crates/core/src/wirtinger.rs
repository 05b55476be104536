//! Wirtinger derivatives of scalar fields on jet space.
//!
//! Two independent routes are provided. The automatic route evaluates the
//! field on [`Jet`] numbers with `z` and `z̄` (and `v`, `v̄`) seeded as
//! independent variables. The finite-difference oracle evaluates the field
//! on plain complex numbers at real points only, perturbs real and imaginary
//! parts, and combines them through `∂/∂z = ½(∂/∂x − i∂/∂y)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::jet::{Jet, MAX_GENERATORS};
use crate::scalar::{c64, Scalar, C64};

/// Smallest admissible direction norm; the zero section is excluded.
pub const MIN_DIRECTION_NORM: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub coords: Vec<C64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(FinslerError::Domain("chart point needs n >= 1".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(FinslerError::Domain("non-finite chart coordinate".into()));
        }
        Ok(ChartPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// A base point with a nonzero tangent direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub z: Vec<C64>,
    pub v: Vec<C64>,
}

impl JetPoint {
    pub fn new(z: Vec<C64>, v: Vec<C64>) -> Result<Self> {
        if z.len() != v.len() {
            return Err(FinslerError::Shape {
                expected: z.len(),
                got: v.len(),
            });
        }
        ChartPoint::new(z.clone())?;
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(FinslerError::Domain("non-finite direction".into()));
        }
        if norm(&v) < MIN_DIRECTION_NORM {
            return Err(FinslerError::Domain(
                "direction lies on the zero section".into(),
            ));
        }
        Ok(JetPoint { z, v })
    }

    /// Builds a jet point from real slices, convenient in tests.
    pub fn real(z: &[f64], v: &[f64]) -> Result<Self> {
        JetPoint::new(
            z.iter().map(|&x| c64(x, 0.0)).collect(),
            v.iter().map(|&x| c64(x, 0.0)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn with_direction(&self, v: Vec<C64>) -> Result<Self> {
        JetPoint::new(self.z.clone(), v)
    }

    pub fn scaled(&self, zeta: C64) -> Result<Self> {
        JetPoint::new(self.z.clone(), self.v.iter().map(|c| c * zeta).collect())
    }
}

/// Polarized evaluation variables.
#[derive(Clone, Debug)]
pub struct JetVars<S> {
    pub z: Vec<S>,
    pub zb: Vec<S>,
    pub v: Vec<S>,
    pub vb: Vec<S>,
}

impl<S: Scalar> JetVars<S> {
    pub fn at(p: &JetPoint) -> Self {
        JetVars {
            z: p.z.iter().map(|&c| S::from_c(c)).collect(),
            zb: p.z.iter().map(|&c| S::from_c(c.conj())).collect(),
            v: p.v.iter().map(|&c| S::from_c(c)).collect(),
            vb: p.v.iter().map(|&c| S::from_c(c.conj())).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }
}

/// A scalar field on jet space written over the polarized variables.
pub trait JetField: Sync {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S;
}

impl<F: JetField + ?Sized> JetField for &F {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        (**self).eval(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Z(usize),
    Zb(usize),
    V(usize),
    Vb(usize),
}

impl Var {
    /// Role swap z ↔ z̄, v ↔ v̄.
    pub fn conjugate(self) -> Var {
        match self {
            Var::Z(i) => Var::Zb(i),
            Var::Zb(i) => Var::Z(i),
            Var::V(i) => Var::Vb(i),
            Var::Vb(i) => Var::V(i),
        }
    }

    fn index(self) -> usize {
        match self {
            Var::Z(i) | Var::Zb(i) | Var::V(i) | Var::Vb(i) => i,
        }
    }

    fn is_barred(self) -> bool {
        matches!(self, Var::Zb(_) | Var::Vb(_))
    }

    fn is_base(self) -> bool {
        matches!(self, Var::Z(_) | Var::Zb(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Z(i) => write!(f, "z{}", i + 1),
            Var::Zb(i) => write!(f, "zb{}", i + 1),
            Var::V(i) => write!(f, "v{}", i + 1),
            Var::Vb(i) => write!(f, "vb{}", i + 1),
        }
    }
}

/// Multi-index of Wirtinger derivatives, kept sorted so that equal mixed
/// partials share one key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DerivativeRequest(Vec<Var>);

impl DerivativeRequest {
    pub fn new(mut vars: Vec<Var>) -> Result<Self> {
        if vars.len() > MAX_GENERATORS {
            return Err(FinslerError::UnsupportedOrder(vars.len()));
        }
        vars.sort();
        Ok(DerivativeRequest(vars))
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn conjugate(&self) -> Self {
        let mut v: Vec<Var> = self.0.iter().map(|x| x.conjugate()).collect();
        v.sort();
        DerivativeRequest(v)
    }

    /// Request extended by one more variable.
    pub fn with(&self, x: Var) -> Result<Self> {
        let mut v = self.0.clone();
        v.push(x);
        DerivativeRequest::new(v)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        for x in &self.0 {
            if x.index() >= n {
                return Err(FinslerError::Shape {
                    expected: n,
                    got: x.index() + 1,
                });
            }
        }
        Ok(())
    }
}

#[macro_export]
macro_rules! req {
    ($($x:expr),* $(,)?) => {
        $crate::wirtinger::DerivativeRequest::new(vec![$($x),*]).expect("derivative order")
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffMode {
    ForwardAutomatic,
    CentralFiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentiationPlan {
    pub mode: DiffMode,
    /// Base step; `None` selects the order-adaptive default.
    pub fd_step: Option<f64>,
    pub richardson_levels: u8,
}

impl Default for DifferentiationPlan {
    fn default() -> Self {
        DifferentiationPlan {
            mode: DiffMode::ForwardAutomatic,
            fd_step: None,
            richardson_levels: 3,
        }
    }
}

impl DifferentiationPlan {
    pub fn automatic() -> Self {
        Self::default()
    }

    pub fn finite_difference() -> Self {
        DifferentiationPlan {
            mode: DiffMode::CentralFiniteDifference,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.fd_step {
            if !(h > 0.0) {
                return Err(FinslerError::Config("fd-step must be positive".into()));
            }
        }
        if !(1..=3).contains(&self.richardson_levels) {
            return Err(FinslerError::Config(
                "richardson-levels must be 1, 2 or 3".into(),
            ));
        }
        Ok(())
    }

    /// Step used for a derivative of the given total order.
    pub fn step_for_order(&self, order: usize) -> f64 {
        self.fd_step.unwrap_or_else(|| default_step(order, self.richardson_levels))
    }
}

/// Order-adaptive default step balancing O(h^{2L}) truncation against
/// O(ε/h^k) rounding.
pub fn default_step(order: usize, levels: u8) -> f64 {
    let table: [f64; 5] = match levels {
        1 => [1e-5, 1e-5, 1e-4, 5e-4, 2e-3],
        2 => [1e-3, 1e-3, 2e-3, 5e-3, 1e-2],
        _ => [2e-3, 2e-3, 5e-3, 7e-3, 7e-3],
    };
    table[order.min(4)]
}

fn check_point(p: &JetPoint) -> Result<()> {
    if norm(&p.v) < MIN_DIRECTION_NORM {
        return Err(FinslerError::Domain(
            "evaluation on the zero section".into(),
        ));
    }
    Ok(())
}

/// Evaluates `f` at `p` on the jet algebra seeded for `req`. The returned
/// jet carries every sub-derivative of the request as well.
pub fn seeded_eval<F: JetField>(f: &F, p: &JetPoint, req: &DerivativeRequest) -> Jet {
    let k = req.order();
    let mut x: JetVars<Jet> = JetVars::at(p);
    let mut masks: HashMap<Var, u8> = HashMap::new();
    for (i, var) in req.vars().iter().enumerate() {
        *masks.entry(*var).or_insert(0) |= 1 << i;
    }
    for j in 0..p.dim() {
        x.z[j] = Jet::variable(p.z[j], *masks.get(&Var::Z(j)).unwrap_or(&0), k);
        x.zb[j] = Jet::variable(p.z[j].conj(), *masks.get(&Var::Zb(j)).unwrap_or(&0), k);
        x.v[j] = Jet::variable(p.v[j], *masks.get(&Var::V(j)).unwrap_or(&0), k);
        x.vb[j] = Jet::variable(p.v[j].conj(), *masks.get(&Var::Vb(j)).unwrap_or(&0), k);
    }
    f.eval(&x)
}

/// Mixed Wirtinger derivative of `f` at `p`.
pub fn wirtinger_derivative<F: JetField>(
    f: &F,
    p: &JetPoint,
    req: &DerivativeRequest,
    plan: &DifferentiationPlan,
) -> Result<C64> {
    check_point(p)?;
    req.check_dim(p.dim())?;
    plan.validate()?;
    match plan.mode {
        DiffMode::ForwardAutomatic => Ok(seeded_eval(f, p, req).top()),
        DiffMode::CentralFiniteDifference => {
            let h = plan.step_for_order(req.order());
            fd_richardson(f, p, req, h, plan.richardson_levels)
        }
    }
}

/// Central-difference estimate of a Wirtinger derivative at step `step`
/// (scaled by `1 + |coordinate|` per differentiated coordinate), with three
/// Richardson levels.
pub fn fd_oracle_derivative<F: JetField>(
    f: &F,
    p: &JetPoint,
    req: &DerivativeRequest,
    step: f64,
) -> Result<C64> {
    check_point(p)?;
    req.check_dim(p.dim())?;
    fd_richardson(f, p, req, step, 3)
}

fn fd_richardson<F: JetField>(
    f: &F,
    p: &JetPoint,
    req: &DerivativeRequest,
    step: f64,
    levels: u8,
) -> Result<C64> {
    if req.order() == 0 {
        return Ok(f.eval(&JetVars::<C64>::at(p)));
    }
    let scale = req
        .vars()
        .iter()
        .map(|x| coordinate(p, *x).norm())
        .fold(0.0, f64::max)
        .max(1.0);
    if !(step > 0.0) || step < 1e-12 * scale {
        return Err(FinslerError::IllConditionedStep { step, scale });
    }
    let levels = levels.clamp(1, 3) as usize;
    // Tableau of successive halvings; central differences have even error
    // expansions so level j eliminates h^(2j).
    let mut base: Vec<C64> = (0..levels)
        .map(|j| fd_nested(f, p, req.vars(), step / (1u32 << j) as f64))
        .collect();
    for lvl in 1..levels {
        let factor = 4f64.powi(lvl as i32);
        base = base
            .windows(2)
            .map(|w| (w[1] * factor - w[0]) / (factor - 1.0))
            .collect();
    }
    Ok(base[0])
}

fn coordinate(p: &JetPoint, x: Var) -> C64 {
    match x {
        Var::Z(i) | Var::Zb(i) => p.z[i],
        Var::V(i) | Var::Vb(i) => p.v[i],
    }
}

fn shifted(p: &JetPoint, x: Var, delta: C64) -> JetPoint {
    let mut q = p.clone();
    if x.is_base() {
        q.z[x.index()] += delta;
    } else {
        q.v[x.index()] += delta;
    }
    q
}

fn fd_nested<F: JetField>(f: &F, p: &JetPoint, ops: &[Var], h: f64) -> C64 {
    let Some((&first, rest)) = ops.split_first() else {
        return f.eval(&JetVars::<C64>::at(p));
    };
    let hh = h * (1.0 + coordinate(p, first).norm());
    let dx = (fd_nested(f, &shifted(p, first, c64(hh, 0.0)), rest, h)
        - fd_nested(f, &shifted(p, first, c64(-hh, 0.0)), rest, h))
        / (2.0 * hh);
    let dy = (fd_nested(f, &shifted(p, first, c64(0.0, hh)), rest, h)
        - fd_nested(f, &shifted(p, first, c64(0.0, -hh)), rest, h))
        / (2.0 * hh);
    let i = c64(0.0, 1.0);
    if first.is_barred() {
        (dx + i * dy) * 0.5
    } else {
        (dx - i * dy) * 0.5
    }
}

/// Source of derivatives at a fixed jet point, with memoization.
pub trait DerivativeSource {
    fn derivative(&mut self, req: &DerivativeRequest) -> Result<C64>;
    fn point(&self) -> &JetPoint;
}

/// Automatic-mode source; one seeded evaluation fills in every
/// sub-request as well.
pub struct AutoSource<'a, F: JetField> {
    f: &'a F,
    p: JetPoint,
    cache: HashMap<DerivativeRequest, C64>,
}

impl<'a, F: JetField> AutoSource<'a, F> {
    pub fn new(f: &'a F, p: &JetPoint) -> Result<Self> {
        check_point(p)?;
        Ok(AutoSource {
            f,
            p: p.clone(),
            cache: HashMap::new(),
        })
    }
}

impl<F: JetField> DerivativeSource for AutoSource<'_, F> {
    fn derivative(&mut self, req: &DerivativeRequest) -> Result<C64> {
        if let Some(v) = self.cache.get(req) {
            return Ok(*v);
        }
        req.check_dim(self.p.dim())?;
        let jet = seeded_eval(self.f, &self.p, req);
        let vars = req.vars();
        let k = vars.len();
        for mask in 0..(1usize << k) {
            let sub: Vec<Var> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| vars[i]).collect();
            let key = DerivativeRequest::new(sub)?;
            self.cache.entry(key).or_insert(jet.coeff(mask));
        }
        Ok(jet.top())
    }

    fn point(&self) -> &JetPoint {
        &self.p
    }
}

/// Finite-difference source built on the oracle path.
pub struct FdSource<'a, F: JetField> {
    f: &'a F,
    p: JetPoint,
    plan: DifferentiationPlan,
    cache: HashMap<DerivativeRequest, C64>,
}

impl<'a, F: JetField> FdSource<'a, F> {
    pub fn new(f: &'a F, p: &JetPoint, plan: DifferentiationPlan) -> Result<Self> {
        check_point(p)?;
        plan.validate()?;
        Ok(FdSource {
            f,
            p: p.clone(),
            plan,
            cache: HashMap::new(),
        })
    }
}

impl<F: JetField> DerivativeSource for FdSource<'_, F> {
    fn derivative(&mut self, req: &DerivativeRequest) -> Result<C64> {
        if let Some(v) = self.cache.get(req) {
            return Ok(*v);
        }
        req.check_dim(self.p.dim())?;
        let h = self.plan.step_for_order(req.order());
        let d = fd_richardson(self.f, &self.p, req, h, self.plan.richardson_levels)?;
        self.cache.insert(req.clone(), d);
        Ok(d)
    }

    fn point(&self) -> &JetPoint {
        &self.p
    }
}

/// Boxed source selected by a plan.
pub fn source_for<'a, F: JetField>(
    f: &'a F,
    p: &JetPoint,
    plan: &DifferentiationPlan,
) -> Result<Box<dyn DerivativeSource + 'a>> {
    Ok(match plan.mode {
        DiffMode::ForwardAutomatic => Box::new(AutoSource::new(f, p)?),
        DiffMode::CentralFiniteDifference => Box::new(FdSource::new(f, p, *plan)?),
    })
}
