//! Seeded sampling of base points and directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::scalar::{c64, C64};

/// A spherical shell `inner ≤ |z| ≤ outer` in ℂⁿ; `inner = 0` is a ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub inner: f64,
    pub outer: f64,
}

impl Region {
    pub fn ball(radius: f64) -> Self {
        Region {
            inner: 0.0,
            outer: radius,
        }
    }

    pub fn shell(inner: f64, outer: f64) -> Self {
        Region { inner, outer }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer > 0.0) || !(self.inner >= 0.0) || self.inner > self.outer {
            return Err(FinslerError::Config(format!(
                "empty region {} <= |z| <= {}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }

    /// Parses `disk:R`, `ball:R` or `shell:r:R`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| FinslerError::Config(format!("bad region '{s}'")))
        };
        let r = match parts.as_slice() {
            ["disk", r] | ["ball", r] => Region::ball(num(r)?),
            ["shell", a, b] => Region::shell(num(a)?, num(b)?),
            _ => return Err(FinslerError::Config(format!("bad region '{s}'"))),
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub count: usize,
    pub region: Region,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(count: usize, region: Region, seed: u64) -> Self {
        SamplePlan {
            count,
            region,
            seed,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere of ℂⁿ.
pub fn unit_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Uniform point in the region (volume measure of ℝ^{2n}).
pub fn point_in_region<R: Rng>(rng: &mut R, region: &Region, n: usize) -> Vec<C64> {
    let d = (2 * n) as f64;
    let u: f64 = rng.random();
    let lo = region.inner.powf(d);
    let hi = region.outer.powf(d);
    let r = (lo + u * (hi - lo)).powf(1.0 / d);
    unit_direction(rng, n).into_iter().map(|c| c * r).collect()
}

/// Seeded `(z, v)` pairs, generated sequentially so that downstream
/// parallel evaluation stays deterministic.
pub fn jet_samples(plan: &SamplePlan, n: usize) -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
    plan.region.validate()?;
    let mut rng = rng(plan.seed);
    Ok((0..plan.count)
        .map(|_| {
            let z = point_in_region(&mut rng, &plan.region, n);
            let v = unit_direction(&mut rng, n);
            (z, v)
        })
        .collect())
}
