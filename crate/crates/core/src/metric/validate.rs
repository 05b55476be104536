use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{levi_matrix, Metric};
use crate::error::Result;
use crate::linalg::{hermitian_defect, hermitian_eigenvalues, trace};
use crate::req;
use crate::sampling::{jet_samples, SamplePlan};
use crate::scalar::{c64, C64};
use crate::wirtinger::{AutoSource, DerivativeSource, JetField, JetPoint, JetVars, Var};

pub const HOMOGENEITY_TOL: f64 = 1e-9;
pub const EULER_TOL: f64 = 1e-7;
pub const SPD_RELATIVE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: Vec<C64>,
    pub v: Vec<C64>,
}

impl From<&JetPoint> for Witness {
    fn from(p: &JetPoint) -> Self {
        Witness {
            z: p.z.clone(),
            v: p.v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub homogeneity_pass: bool,
    pub homogeneity_worst: f64,
    pub homogeneity_witness: Option<Witness>,
    pub euler_pass: bool,
    pub euler_worst: f64,
    pub euler_witness: Option<Witness>,
    pub hermitian_defect_worst: f64,
    pub spd_pass: bool,
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue divided by trace/n over all samples.
    pub min_relative_eigenvalue: f64,
    pub spd_witness: Option<Witness>,
    pub samples_used: usize,
    pub seed: u64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.homogeneity_pass && self.euler_pass && self.spd_pass
    }
}

pub fn scalings() -> [C64; 8] {
    [
        c64(2.0, 0.0),
        c64(0.0, 1.0),
        C64::from_polar(0.5, PI / 3.0),
        c64(-1.0, 0.0),
        c64(0.1, 0.0),
        c64(3.0, -4.0),
        C64::from_polar(1.0, 1.0),
        c64(-0.7, 0.2),
    ]
}

struct SampleResult {
    homogeneity: f64,
    euler: f64,
    defect: f64,
    min_eig: f64,
    rel_eig: f64,
}

fn check_sample(m: &Metric, p: &JetPoint) -> Result<SampleResult> {
    let g = m.eval(&JetVars::<C64>::at(p)).re;
    let mut homogeneity: f64 = 0.0;
    for zeta in scalings() {
        let q = p.scaled(zeta)?;
        let gz = m.eval(&JetVars::<C64>::at(&q)).re;
        let want = zeta.norm_sqr() * g;
        homogeneity = homogeneity.max((gz - want).abs() / (1.0 + want.abs()));
    }
    let n = p.dim();
    let mut src = AutoSource::new(m, p)?;
    let mut first = c64(0.0, 0.0);
    for a in 0..n {
        first += src.derivative(&req![Var::V(a)])? * p.v[a];
    }
    let levi = levi_matrix(m, p)?;
    let mut second = c64(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            second += levi[a][b] * p.v[a] * p.v[b].conj();
        }
    }
    let euler = (first - g).norm().max((second - g).norm()) / (1.0 + g.abs());
    let ev = hermitian_eigenvalues(&levi);
    let scale = trace(&levi).re / n as f64;
    let rel_eig = if scale > 0.0 { ev[0] / scale } else { f64::NEG_INFINITY };
    Ok(SampleResult {
        homogeneity,
        euler,
        defect: hermitian_defect(&levi),
        min_eig: ev[0],
        rel_eig,
    })
}

/// Seeded check of homogeneity, the Euler identities, and positive
/// definiteness of the Levi matrix.
pub fn validate_metric(m: &Metric, plan: &SamplePlan) -> Result<ValidationReport> {
    let n = m.dim();
    let points: Vec<JetPoint> = jet_samples(plan, n)?
        .into_iter()
        .map(|(z, v)| JetPoint::new(z, v))
        .collect::<Result<_>>()?;
    for p in &points {
        m.check_admissible(p)?;
    }
    let results: Vec<SampleResult> = points
        .par_iter()
        .map(|p| check_sample(m, p))
        .collect::<Result<_>>()?;

    let argmax = |key: &dyn Fn(&SampleResult) -> f64| {
        results
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
                Some((_, b)) if b >= key(r) => best,
                _ => Some((i, key(r))),
            })
    };
    let hom = argmax(&|r| r.homogeneity);
    let eul = argmax(&|r| r.euler);
    let spd = argmax(&|r| -r.rel_eig);
    let defect = results.iter().map(|r| r.defect).fold(0.0, f64::max);
    let min_eig = results.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
    let worst = |x: Option<(usize, f64)>| x.map(|(_, v)| v).unwrap_or(0.0);
    let witness = |x: Option<(usize, f64)>| x.map(|(i, _)| Witness::from(&points[i]));
    let min_rel = spd.map(|(_, v)| -v).unwrap_or(f64::INFINITY);

    Ok(ValidationReport {
        homogeneity_pass: worst(hom) <= HOMOGENEITY_TOL,
        homogeneity_worst: worst(hom),
        homogeneity_witness: witness(hom),
        euler_pass: worst(eul) <= EULER_TOL,
        euler_worst: worst(eul),
        euler_witness: witness(eul),
        hermitian_defect_worst: defect,
        spd_pass: min_rel > SPD_RELATIVE_TOL,
        min_eigenvalue: if points.is_empty() { f64::INFINITY } else { min_eig },
        min_relative_eigenvalue: min_rel,
        spd_witness: witness(spd),
        samples_used: points.len(),
        seed: plan.seed,
    })
}
