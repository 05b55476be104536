//! Holomorphic maps between charts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::expr::Expr;
use crate::scalar::{c64, Scalar, C64};
use crate::wirtinger::{JetVars, Var};

/// On-disk form of an expression map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub dim_in: usize,
    pub components: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HolomorphicMap {
    Identity { dim: usize },
    /// ζ ↦ ζ^k on ℂ.
    Power { k: u32 },
    /// ζ ↦ e^{iθ}(ζ − a)/(1 − āζ), an automorphism of the unit disk.
    Mobius { a: C64, theta: f64 },
    /// z ↦ A z + c.
    Affine { matrix: Vec<Vec<C64>>, offset: Vec<C64> },
    /// ζ ↦ Σ_k c_k ζ^k from ℂ into ℂ^m.
    Curve { coeffs: Vec<Vec<C64>> },
    Constant { dim_in: usize, point: Vec<C64> },
    Expression {
        dim_in: usize,
        components: Vec<Expr>,
        jacobian: Vec<Vec<Expr>>,
    },
    /// `outer ∘ inner`.
    Compose {
        inner: Box<HolomorphicMap>,
        outer: Box<HolomorphicMap>,
    },
}

impl HolomorphicMap {
    pub fn identity(dim: usize) -> Self {
        HolomorphicMap::Identity { dim }
    }

    pub fn power(k: u32) -> Self {
        HolomorphicMap::Power { k }
    }

    pub fn mobius(a: C64, theta: f64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(FinslerError::Config("Möbius parameter must satisfy |a| < 1".into()));
        }
        Ok(HolomorphicMap::Mobius { a, theta })
    }

    pub fn linear(matrix: Vec<Vec<C64>>) -> Result<Self> {
        let m = matrix.len();
        Self::affine(matrix, vec![c64(0.0, 0.0); m])
    }

    pub fn affine(matrix: Vec<Vec<C64>>, offset: Vec<C64>) -> Result<Self> {
        if matrix.is_empty() || matrix.len() != offset.len() {
            return Err(FinslerError::Config("affine map needs m >= 1 rows and matching offset".into()));
        }
        let n = matrix[0].len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(FinslerError::Config("ragged affine matrix".into()));
        }
        Ok(HolomorphicMap::Affine { matrix, offset })
    }

    /// ζ ↦ (ζ/√2, ζ/√2).
    pub fn diagonal_embedding() -> Self {
        let s = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        HolomorphicMap::Affine {
            matrix: vec![vec![s], vec![s]],
            offset: vec![c64(0.0, 0.0); 2],
        }
    }

    /// ζ ↦ z + ζ v + ζ² w.
    pub fn quadratic_curve(z: &[C64], v: &[C64], w: &[C64]) -> Result<Self> {
        if z.len() != v.len() || z.len() != w.len() {
            return Err(FinslerError::Shape {
                expected: z.len(),
                got: v.len().min(w.len()),
            });
        }
        Ok(HolomorphicMap::Curve {
            coeffs: vec![z.to_vec(), v.to_vec(), w.to_vec()],
        })
    }

    pub fn constant(dim_in: usize, point: Vec<C64>) -> Self {
        HolomorphicMap::Constant { dim_in, point }
    }

    pub fn compose(inner: HolomorphicMap, outer: HolomorphicMap) -> Result<Self> {
        if inner.dim_out() != outer.dim_in() {
            return Err(FinslerError::Shape {
                expected: outer.dim_in(),
                got: inner.dim_out(),
            });
        }
        Ok(HolomorphicMap::Compose {
            inner: Box::new(inner),
            outer: Box::new(outer),
        })
    }

    pub fn from_expressions(file: &MapFile) -> Result<Self> {
        if file.dim_in == 0 || file.components.is_empty() {
            return Err(FinslerError::Config("expression map needs dimensions >= 1".into()));
        }
        let mut components = Vec::new();
        for src in &file.components {
            let e = Expr::parse(src, &file.params)?;
            if !e.is_holomorphic_in_z() {
                return Err(FinslerError::Config(format!(
                    "map component '{src}' may only depend on z variables"
                )));
            }
            if e.dim_hint() > file.dim_in {
                return Err(FinslerError::Shape {
                    expected: file.dim_in,
                    got: e.dim_hint(),
                });
            }
            components.push(e);
        }
        let jacobian = components
            .iter()
            .map(|c| (0..file.dim_in).map(|j| c.diff(Var::Z(j))).collect())
            .collect();
        Ok(HolomorphicMap::Expression {
            dim_in: file.dim_in,
            components,
            jacobian,
        })
    }

    pub fn dim_in(&self) -> usize {
        match self {
            HolomorphicMap::Identity { dim } => *dim,
            HolomorphicMap::Power { .. } | HolomorphicMap::Mobius { .. } | HolomorphicMap::Curve { .. } => 1,
            HolomorphicMap::Affine { matrix, .. } => matrix[0].len(),
            HolomorphicMap::Constant { dim_in, .. } | HolomorphicMap::Expression { dim_in, .. } => *dim_in,
            HolomorphicMap::Compose { inner, .. } => inner.dim_in(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            HolomorphicMap::Identity { dim } => *dim,
            HolomorphicMap::Power { .. } | HolomorphicMap::Mobius { .. } => 1,
            HolomorphicMap::Affine { matrix, .. } => matrix.len(),
            HolomorphicMap::Curve { coeffs } => coeffs[0].len(),
            HolomorphicMap::Constant { point, .. } => point.len(),
            HolomorphicMap::Expression { components, .. } => components.len(),
            HolomorphicMap::Compose { outer, .. } => outer.dim_out(),
        }
    }

    /// `(f(z), df_z(v))`. With `conjugate` set the inputs are read as
    /// `(z̄, v̄)` and the conjugate outputs are produced, so the result stays
    /// valid when `z̄` is an independent variable.
    pub fn push<S: Scalar>(&self, z: &[S], v: &[S], conjugate: bool) -> (Vec<S>, Vec<S>) {
        let cj = |c: C64| if conjugate { c.conj() } else { c };
        match self {
            HolomorphicMap::Identity { .. } => (z.to_vec(), v.to_vec()),
            HolomorphicMap::Power { k } => {
                let k = *k as i32;
                let w = z[0].powi(k);
                let dw = if k == 0 {
                    S::zero()
                } else {
                    z[0].powi(k - 1) * S::from_f(k as f64) * v[0]
                };
                (vec![w], vec![dw])
            }
            HolomorphicMap::Mobius { a, theta } => {
                let rot = S::from_c(cj(c64(0.0, *theta).exp()));
                let a_ = S::from_c(cj(*a));
                let abar = S::from_c(cj(a.conj()));
                let den = S::one() - abar * z[0];
                let w = rot * (z[0] - a_) / den;
                let k = S::from_f(1.0 - a.norm_sqr());
                let dw = rot * k / (den * den) * v[0];
                (vec![w], vec![dw])
            }
            HolomorphicMap::Affine { matrix, offset } => {
                let mut w = Vec::with_capacity(matrix.len());
                let mut dw = Vec::with_capacity(matrix.len());
                for (row, c) in matrix.iter().zip(offset) {
                    let mut acc = S::from_c(cj(*c));
                    let mut dacc = S::zero();
                    for (a, (zj, vj)) in row.iter().zip(z.iter().zip(v)) {
                        let a = S::from_c(cj(*a));
                        acc = acc + a * *zj;
                        dacc = dacc + a * *vj;
                    }
                    w.push(acc);
                    dw.push(dacc);
                }
                (w, dw)
            }
            HolomorphicMap::Curve { coeffs } => {
                let m = coeffs[0].len();
                let mut w = vec![S::zero(); m];
                let mut dw = vec![S::zero(); m];
                for i in 0..m {
                    // Horner for value and derivative
                    let mut acc = S::zero();
                    let mut dacc = S::zero();
                    for c in coeffs.iter().rev() {
                        dacc = dacc * z[0] + acc;
                        acc = acc * z[0] + S::from_c(cj(c[i]));
                    }
                    w[i] = acc;
                    dw[i] = dacc * v[0];
                }
                (w, dw)
            }
            HolomorphicMap::Constant { point, .. } => (
                point.iter().map(|c| S::from_c(cj(*c))).collect(),
                vec![S::zero(); point.len()],
            ),
            HolomorphicMap::Expression {
                components,
                jacobian,
                ..
            } => {
                let x = JetVars {
                    z: z.to_vec(),
                    zb: z.to_vec(),
                    v: v.to_vec(),
                    vb: v.to_vec(),
                };
                let w = components.iter().map(|e| e.eval_with(&x, false)).collect();
                let dw = jacobian
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(v)
                            .fold(S::zero(), |acc, (d, vj)| acc + d.eval_with(&x, false) * *vj)
                    })
                    .collect();
                if conjugate {
                    // Expressions are holomorphic in z: conjugate by conjugating constants.
                    let w = components.iter().map(|e| conj_eval(e, &x)).collect();
                    let dw = jacobian
                        .iter()
                        .map(|row| {
                            row.iter()
                                .zip(v)
                                .fold(S::zero(), |acc, (d, vj)| acc + conj_eval(d, &x) * *vj)
                        })
                        .collect();
                    return (w, dw);
                }
                (w, dw)
            }
            HolomorphicMap::Compose { inner, outer } => {
                let (w, dw) = inner.push(z, v, conjugate);
                outer.push(&w, &dw, conjugate)
            }
        }
    }

    /// Value of the map at a chart point.
    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        let v = vec![c64(0.0, 0.0); z.len()];
        self.push(z, &v, false).0
    }

    /// m×n complex Jacobian.
    pub fn jacobian(&self, z: &[C64]) -> Vec<Vec<C64>> {
        let n = self.dim_in();
        let m = self.dim_out();
        let mut jac = vec![vec![c64(0.0, 0.0); n]; m];
        for j in 0..n {
            let mut e = vec![c64(0.0, 0.0); n];
            e[j] = c64(1.0, 0.0);
            let (_, col) = self.push(z, &e, false);
            for i in 0..m {
                jac[i][j] = col[i];
            }
        }
        jac
    }

    /// Largest |∂f^i/∂z̄^j| by central differences on real coordinates.
    pub fn cauchy_riemann_residual(&self, z: &[C64]) -> f64 {
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for j in 0..z.len() {
            let shift = |d: C64| {
                let mut q = z.to_vec();
                q[j] += d;
                self.apply(&q)
            };
            let (xp, xm) = (shift(c64(h, 0.0)), shift(c64(-h, 0.0)));
            let (yp, ym) = (shift(c64(0.0, h)), shift(c64(0.0, -h)));
            for i in 0..self.dim_out() {
                let dx = (xp[i] - xm[i]) / (2.0 * h);
                let dy = (yp[i] - ym[i]) / (2.0 * h);
                worst = worst.max(((dx + c64(0.0, 1.0) * dy) * 0.5).norm());
            }
        }
        worst
    }

    pub fn label(&self) -> String {
        match self {
            HolomorphicMap::Identity { dim } => format!("identity({dim})"),
            HolomorphicMap::Power { k } => format!("power:{k}"),
            HolomorphicMap::Mobius { a, theta } => format!("mobius:{}{:+}i:{}", a.re, a.im, theta),
            HolomorphicMap::Affine { .. } => "affine".into(),
            HolomorphicMap::Curve { .. } => "curve".into(),
            HolomorphicMap::Constant { .. } => "constant".into(),
            HolomorphicMap::Expression { .. } => "expression".into(),
            HolomorphicMap::Compose { inner, outer } => format!("{}∘{}", outer.label(), inner.label()),
        }
    }
}

fn conj_eval<S: Scalar>(e: &Expr, x: &JetVars<S>) -> S {
    // Inputs already hold z̄; conjugating roles maps Z → Zb which holds the same slice.
    e.eval_with(x, true)
}
