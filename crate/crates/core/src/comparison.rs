//! Index forms, Jacobi fields and distance-function Hessians on
//! constant-curvature model spaces.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::quadrature::{GaussLegendre, QuadratureConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Hyperbolic,
}

/// Simply connected model space of sectional curvature `−K²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub kind: SpaceKind,
    pub k: f64,
    pub dim: usize,
}

impl ModelSpace {
    pub fn euclidean(dim: usize) -> Self {
        ModelSpace {
            kind: SpaceKind::Euclidean,
            k: 0.0,
            dim,
        }
    }

    pub fn hyperbolic(k: f64, dim: usize) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(FinslerError::Config(format!("hyperbolic space needs K > 0, got {k}")));
        }
        if dim < 2 {
            return Err(FinslerError::Config("model space needs dim >= 2".into()));
        }
        Ok(ModelSpace {
            kind: SpaceKind::Hyperbolic,
            k,
            dim,
        })
    }

    /// Euclidean for `K = 0`, hyperbolic otherwise.
    pub fn with_k(k: f64, dim: usize) -> Result<Self> {
        if k == 0.0 {
            Ok(ModelSpace::euclidean(dim))
        } else {
            ModelSpace::hyperbolic(k, dim)
        }
    }
}

/// Profile `f(t)` of a field `f(t)η(t)` with `η` a parallel unit normal,
/// plus an optional tangential component.
#[derive(Clone)]
pub enum FieldProfile {
    /// `(t/r)^α`
    Radial { alpha: f64 },
    /// The Jacobi field vanishing at 0 and equal to `η(r)` at `r`.
    Jacobi,
    /// Normal profile `t ↦ (f, f′)` and tangential component `t ↦ g`.
    User {
        normal: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
        tangential: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for FieldProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldProfile::Radial { alpha } => write!(f, "Radial({alpha})"),
            FieldProfile::Jacobi => write!(f, "Jacobi"),
            FieldProfile::User { .. } => write!(f, "User"),
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(FinslerError::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `I(ξ,ξ) = ∫₀ʳ |∇_T ξ|² + K²|ξ|² dt` by Gauss–Legendre quadrature.
pub fn index_form(space: &ModelSpace, r: f64, field: &FieldProfile, q: &QuadratureConfig) -> Result<f64> {
    check_radius(r)?;
    let q = QuadratureConfig::new(q.nodes)?;
    let gl = GaussLegendre::new(q.nodes);
    let k2 = space.k * space.k;
    match field {
        FieldProfile::Radial { alpha } => {
            let a = *alpha;
            if !(a >= 1.0) {
                return Err(FinslerError::Config(format!("radial field needs alpha >= 1, got {a}")));
            }
            // t = r s⁴ grades the nodes toward the t^(2α−2) endpoint singularity
            Ok(gl.integrate(0.0, 1.0, |s| {
                let t = r * s.powi(4);
                let u = t / r;
                let f = u.powf(a);
                let df = if a == 1.0 { 1.0 / r } else { a / r * u.powf(a - 1.0) };
                (df * df + k2 * f * f) * 4.0 * r * s.powi(3)
            }))
        }
        FieldProfile::Jacobi => {
            let k = space.k;
            Ok(gl.integrate(0.0, r, |t| {
                let (f, df) = if k == 0.0 {
                    (t / r, 1.0 / r)
                } else {
                    let s = (k * r).sinh();
                    ((k * t).sinh() / s, k * (k * t).cosh() / s)
                };
                df * df + k2 * f * f
            }))
        }
        FieldProfile::User { normal, tangential } => {
            for (i, x) in gl.nodes.iter().enumerate() {
                let t = 0.5 * r * (1.0 + x);
                let g = tangential(t);
                if g.abs() > 1e-12 {
                    return Err(FinslerError::Contract(format!(
                        "field has tangential component {g} at t = {t} (node {i})"
                    )));
                }
            }
            Ok(gl.integrate(0.0, r, |t| {
                let (f, df) = normal(t);
                df * df + k2 * f * f
            }))
        }
    }
}

/// Closed form of the index form of `(t/r)^α η`.
pub fn radial_index_closed_form(k: f64, r: f64, alpha: f64) -> f64 {
    alpha * alpha / ((2.0 * alpha - 1.0) * r) + k * k * r / (2.0 * alpha + 1.0)
}

/// `K coth(K r)`, or `1/r` in the flat case.
pub fn jacobi_index_closed_form(k: f64, r: f64) -> f64 {
    if k == 0.0 {
        1.0 / r
    } else {
        k / (k * r).tanh()
    }
}

/// Root `α > 1` of `(α−1)²(2α+1) = K²r²(2α−1)`.
pub fn optimal_alpha(k: f64, r: f64) -> Result<f64> {
    if !(k >= 0.0) || !(r > 0.0) || !(k * r).is_finite() {
        return Err(FinslerError::Config(format!("optimal_alpha needs K >= 0, r > 0 (got {k}, {r})")));
    }
    let kr2 = (k * r) * (k * r);
    if kr2 == 0.0 {
        return Ok(1.0);
    }
    let f = |a: f64| (a - 1.0) * (a - 1.0) * (2.0 * a + 1.0) - kr2 * (2.0 * a - 1.0);
    let mut lo = 1.0 + 1e-9;
    let mut hi = 2f64.max(2.0 + k * r);
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    if f(lo) > 0.0 {
        // root lies below 1 + 1e−9 only when K r is tiny
        return Ok(lo);
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Radial,
    Orthogonal,
}

/// `H(ρ)(u,u)` on the model space for a unit `u`.
pub fn hessian_distance_model(space: &ModelSpace, rho: f64, direction: Direction) -> Result<f64> {
    check_radius(rho)?;
    Ok(match direction {
        Direction::Radial => 0.0,
        Direction::Orthogonal => jacobi_index_closed_form(space.k, rho),
    })
}

/// Distance to the pole and geodesics through a point at distance `rho`,
/// evaluated in an independent model: the hyperboloid for `K > 0`,
/// Cartesian coordinates for `K = 0`.
struct Geodesic {
    k: f64,
    rho: f64,
    theta: f64,
}

impl Geodesic {
    /// `ρ(γ(t))` where `γ` leaves the point at angle `theta` from the
    /// radial direction with unit speed.
    fn dist(&self, t: f64) -> f64 {
        let (c, s) = (self.theta.cos(), self.theta.sin());
        if self.k == 0.0 {
            let x = self.rho + t * c;
            let y = t * s;
            return x.hypot(y);
        }
        let k = self.k;
        let (ch, sh) = ((k * self.rho).cosh(), (k * self.rho).sinh());
        // point x = (sh, 0, ch); radial tangent (ch, 0, sh); normal (0, 1, 0)
        let x = [sh, 0.0, ch];
        let u = [c * ch, s, c * sh];
        let (a, b) = ((k * t).cosh(), (k * t).sinh());
        let last = a * x[2] + b * u[2];
        // −⟨pole, γ⟩_L with pole (0, 0, 1)
        last.max(1.0).acosh() / k
    }
}

fn richardson_derivative(f: &dyn Fn(f64) -> f64, order: u8, h: f64) -> f64 {
    let stencil = |h: f64| match order {
        1 => (f(h) - f(-h)) / (2.0 * h),
        _ => (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h),
    };
    let mut t: Vec<f64> = (0..3).map(|j| stencil(h / (1 << j) as f64)).collect();
    for lvl in 1..3 {
        let fac = 4f64.powi(lvl);
        t = t.windows(2).map(|w| (fac * w[1] - w[0]) / (fac - 1.0)).collect();
    }
    t[0]
}

/// `H(ρ²)(u,u)` for unit `u` at angle `theta` from the radial direction,
/// by differentiating `ρ²` along the geodesic in direction `u`.
pub fn hessian_rho2_numeric(space: &ModelSpace, rho: f64, theta: f64) -> Result<f64> {
    check_radius(rho)?;
    let g = Geodesic { k: space.k, rho, theta };
    let h = 1e-2 * rho.min(1.0);
    Ok(richardson_derivative(&|t| g.dist(t).powi(2), 2, h))
}

/// `⟨∇ρ² | T⟩` by differentiating along the radial geodesic.
pub fn radial_gradient_pairing(space: &ModelSpace, rho: f64) -> Result<f64> {
    check_radius(rho)?;
    let g = Geodesic { k: space.k, rho, theta: 0.0 };
    let h = 1e-2 * rho.min(1.0);
    Ok(richardson_derivative(&|t| g.dist(t).powi(2), 1, h))
}

/// `2cos²θ + 2ρ H(ρ)(E,E) sin²θ`.
pub fn hessian_rho2_closed_form(space: &ModelSpace, rho: f64, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    2.0 * c * c + 2.0 * rho * jacobi_index_closed_form(space.k, rho) * s * s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(rename = "K")]
    pub k: f64,
    pub rho: f64,
    pub direction: String,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub space: ModelSpace,
    pub rows: Vec<ComparisonRow>,
    pub min_slack: f64,
    pub max_identity_residual: f64,
    pub pass: bool,
}

pub const SLACK_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-7;

fn row(k: f64, rho: f64, direction: &str, value: f64, bound: f64) -> ComparisonRow {
    ComparisonRow {
        k,
        rho,
        direction: direction.to_string(),
        value,
        bound,
        slack: bound - value,
    }
}

fn rows_for(space: &ModelSpace, rho: f64) -> Result<(Vec<ComparisonRow>, f64)> {
    let k = space.k;
    let q = QuadratureConfig::default();
    let bound = 1.0 / rho + k;
    let mut rows = Vec::new();
    let orth = hessian_distance_model(space, rho, Direction::Orthogonal)?;
    rows.push(row(k, rho, "orthogonal", orth, bound));
    rows.push(row(k, rho, "radial", hessian_distance_model(space, rho, Direction::Radial)?, bound));

    let alpha = optimal_alpha(k, rho)?;
    let radial_opt = index_form(space, rho, &FieldProfile::Radial { alpha }, &q)?;
    let jacobi = index_form(space, rho, &FieldProfile::Jacobi, &q)?;
    rows.push(row(k, rho, "jacobi<=test-field", jacobi, radial_opt));
    rows.push(row(k, rho, "test-field<=bound", radial_opt, bound));
    // minimality of the Jacobi field among (t/r)^α fields
    let mut worst = f64::INFINITY;
    let mut worst_val = radial_opt;
    for i in 1..=60 {
        let a = 1.0 + 3.0 * i as f64 / 60.0;
        let v = index_form(space, rho, &FieldProfile::Radial { alpha: a }, &q)?;
        if v - jacobi < worst {
            worst = v - jacobi;
            worst_val = v;
        }
    }
    rows.push(row(k, rho, "jacobi<=min-alpha-grid", jacobi, worst_val));

    let b2 = 2.0 * (2.0 + rho * k);
    let mut residual: f64 = 0.0;
    for (name, theta) in [
        ("rho2-radial", 0.0),
        ("rho2-orthogonal", std::f64::consts::FRAC_PI_2),
        ("rho2-oblique", 0.7),
    ] {
        let numeric = hessian_rho2_numeric(space, rho, theta)?;
        let closed = hessian_rho2_closed_form(space, rho, theta);
        residual = residual.max((numeric - closed).abs() / (1.0 + closed.abs()));
        rows.push(row(k, rho, name, numeric, b2));
    }
    let pairing = radial_gradient_pairing(space, rho)?;
    residual = residual.max((pairing - 2.0 * rho).abs() / (1.0 + rho));
    rows.push(row(k, rho, "grad-rho2-pairing", pairing, 2.0 * rho));
    Ok((rows, residual))
}

/// The comparison chain at each radius: Hessian of ρ against `1/ρ + K`,
/// Jacobi minimality, the ρ² Hessian bound and the gradient pairing.
/// Rows labelled `grad-rho2-pairing` are identities; their slack is the
/// signed residual.
pub fn comparison_report(space: &ModelSpace, radii: &[f64]) -> Result<ComparisonReport> {
    let parts: Vec<(Vec<ComparisonRow>, f64)> =
        radii.par_iter().map(|&rho| rows_for(space, rho)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut residual: f64 = 0.0;
    for (r, res) in parts {
        rows.extend(r);
        residual = residual.max(res);
    }
    let min_slack = rows
        .iter()
        .filter(|r| r.direction != "grad-rho2-pairing")
        .map(|r| r.slack)
        .fold(f64::INFINITY, f64::min);
    Ok(ComparisonReport {
        space: *space,
        pass: min_slack >= -SLACK_TOL && residual <= IDENTITY_TOL,
        rows,
        min_slack,
        max_identity_residual: residual,
    })
}
