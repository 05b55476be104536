//! Chern–Finsler connection coefficients, curvature blocks, holomorphic
//! sectional curvature and Gaussian curvature of curve metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::jet::Jet;
use crate::linalg::{hermitian_inverse, CMatrix};
use crate::maps::HolomorphicMap;
use crate::metric::{HermitianMetric, Metric, Witness};
use crate::sampling::{jet_samples, Region, SamplePlan};
use crate::scalar::{c64, Scalar, C64};
use crate::wirtinger::{
    norm, source_for, wirtinger_derivative, DerivativeRequest, DerivativeSource,
    DifferentiationPlan, JetField, JetPoint, JetVars, Var,
};

pub const MAX_CONDITION: f64 = 1e12;

/// Dense rank-4 complex tensor, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![c64(0.0, 0.0); n * n * n * n],
        }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.data[self.idx(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, x: C64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = x;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub type Tensor3 = Vec<Vec<Vec<C64>>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionCoeffs {
    /// `gamma_semicolon[β][α] = Γ^β_{;α}`
    pub gamma_semicolon: CMatrix,
    /// `gamma_mixed[α][β][μ] = Γ^α_{β;μ}`
    pub gamma_mixed: Tensor3,
    /// `gamma_vertical[α][β][γ] = Γ^α_{βγ}`
    pub gamma_vertical: Tensor3,
    pub site: Witness,
    pub condition: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSet {
    pub hh: bool,
    pub vh: bool,
    pub hv: bool,
    pub vv: bool,
}

impl BlockSet {
    pub const ALL: BlockSet = BlockSet {
        hh: true,
        vh: true,
        hv: true,
        vv: true,
    };
    pub const HH: BlockSet = BlockSet {
        hh: true,
        vh: false,
        hv: false,
        vv: false,
    };
}

/// Curvature components; blocks that were not requested are `None`.
///
/// Index order: `hh(α,β,μ,ν) = R^α_{β;μν̄}`, `vh(α,β,δ,ν) = R^α_{βδ;ν̄}`,
/// `hv(α,β,γ,μ) = R^α_{βγ̄;μ}`, `vv(α,β,δ,γ) = R^α_{βδγ̄}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBlock {
    pub hh: Option<Tensor4>,
    pub vh: Option<Tensor4>,
    pub hv: Option<Tensor4>,
    pub vv: Option<Tensor4>,
    pub site: Witness,
}

/// Connection data with one first-order derivative along an outer
/// variable carried in the jet's `ε₁` slot.
struct Frame {
    l: Vec<Vec<Jet>>,
    semi: Vec<Vec<Jet>>,
    mixed: Vec<Vec<Vec<Jet>>>,
    vert: Vec<Vec<Vec<Jet>>>,
    condition: f64,
}

fn d1(value: C64, deriv: C64) -> Jet {
    Jet::variable_along(value, deriv, 1, 1)
}

fn grab(
    src: &mut dyn DerivativeSource,
    vars: &[Var],
    outer: Option<Var>,
) -> Result<Jet> {
    let req = DerivativeRequest::new(vars.to_vec())?;
    match outer {
        Some(x) => {
            // the larger request first, so the automatic source caches both
            let d = src.derivative(&req.with(x)?)?;
            Ok(d1(src.derivative(&req)?, d))
        }
        None => Ok(Jet::constant(src.derivative(&req)?)),
    }
}

fn frame(src: &mut dyn DerivativeSource, n: usize, outer: Option<Var>) -> Result<Frame> {
    use Var::*;
    let mut l = vec![vec![Jet::constant(c64(0.0, 0.0)); n]; n];
    for a in 0..n {
        for b in 0..n {
            l[a][b] = grab(src, &[V(a), Vb(b)], outer)?;
        }
    }
    let lval: CMatrix = l.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect();
    let (inv, condition) = hermitian_inverse(&lval)?;
    if !(condition <= MAX_CONDITION) {
        return Err(FinslerError::IllConditionedMetric(condition));
    }
    // d(L⁻¹) = −L⁻¹ dL L⁻¹
    let mut linv = vec![vec![Jet::constant(c64(0.0, 0.0)); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut d = c64(0.0, 0.0);
            for p in 0..n {
                for q in 0..n {
                    d -= inv[i][p] * l[p][q].coeff(1) * inv[q][j];
                }
            }
            linv[i][j] = if outer.is_some() { d1(inv[i][j], d) } else { Jet::constant(inv[i][j]) };
        }
    }
    let zero = Jet::constant(c64(0.0, 0.0));
    // semi[β][α] = Γ^β_{;α} = Σ_γ G^{βγ̄} G_{γ̄;α}, G^{βγ̄} = linv[γ][β]
    let mut semi = vec![vec![zero; n]; n];
    let mut a_gz = vec![vec![zero; n]; n];
    for g in 0..n {
        for a in 0..n {
            a_gz[g][a] = grab(src, &[Vb(g), Z(a)], outer)?;
        }
    }
    for b in 0..n {
        for a in 0..n {
            let mut acc = zero;
            for g in 0..n {
                acc = acc + linv[g][b] * a_gz[g][a];
            }
            semi[b][a] = acc;
        }
    }
    // third-order pieces G_{βτ̄σ} and G_{βτ̄;μ}
    let mut vvv = vec![vec![vec![zero; n]; n]; n];
    let mut vvz = vec![vec![vec![zero; n]; n]; n];
    for b in 0..n {
        for t in 0..n {
            for s in 0..n {
                vvv[b][t][s] = grab(src, &[V(b), Vb(t), V(s)], outer)?;
                vvz[b][t][s] = grab(src, &[V(b), Vb(t), Z(s)], outer)?;
            }
        }
    }
    let mut mixed = vec![vec![vec![zero; n]; n]; n];
    let mut vert = vec![vec![vec![zero; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for m in 0..n {
                let mut mx = zero;
                let mut vt = zero;
                for t in 0..n {
                    // δ_μ G_{βτ̄} = G_{βτ̄;μ} − Γ^σ_{;μ} G_{βτ̄σ}
                    let mut dm = vvz[b][t][m];
                    for s in 0..n {
                        dm = dm - semi[s][m] * vvv[b][t][s];
                    }
                    mx = mx + linv[t][a] * dm;
                    vt = vt + linv[t][a] * vvv[b][t][m];
                }
                mixed[a][b][m] = mx;
                vert[a][b][m] = vt;
            }
        }
    }
    Ok(Frame {
        l,
        semi,
        mixed,
        vert,
        condition,
    })
}

fn check_regular(m: &Metric, p: &JetPoint) -> Result<()> {
    m.check_admissible(p)?;
    let g = m.eval(&JetVars::<C64>::at(p)).re;
    if !(g > 0.0) {
        return Err(FinslerError::Domain(format!("G = {g} is not positive")));
    }
    Ok(())
}

pub fn connection_coefficients(
    m: &Metric,
    p: &JetPoint,
    plan: &DifferentiationPlan,
) -> Result<ConnectionCoeffs> {
    check_regular(m, p)?;
    let mut src = source_for(m, p, plan)?;
    let f = frame(src.as_mut(), p.dim(), None)?;
    let val2 = |x: &Vec<Vec<Jet>>| -> CMatrix { x.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect() };
    let val3 = |x: &Vec<Vec<Vec<Jet>>>| -> Tensor3 { x.iter().map(val2).collect() };
    Ok(ConnectionCoeffs {
        gamma_semicolon: val2(&f.semi),
        gamma_mixed: val3(&f.mixed),
        gamma_vertical: val3(&f.vert),
        site: Witness::from(p),
        condition: f.condition,
    })
}

/// Curvature blocks together with the Levi matrix at the site.
fn curvature_with_levi(
    m: &Metric,
    p: &JetPoint,
    blocks: BlockSet,
    plan: &DifferentiationPlan,
) -> Result<(CurvatureBlock, CMatrix)> {
    check_regular(m, p)?;
    let n = p.dim();
    let mut src = source_for(m, p, plan)?;
    let base = frame(src.as_mut(), n, None)?;
    let need_horizontal = blocks.hh || blocks.vh;
    let need_vertical = need_horizontal || blocks.hv || blocks.vv;
    let along_vb: Vec<Frame> = if need_vertical {
        (0..n).map(|s| frame(src.as_mut(), n, Some(Var::Vb(s)))).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let along_zb: Vec<Frame> = if need_horizontal {
        (0..n).map(|s| frame(src.as_mut(), n, Some(Var::Zb(s)))).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let conn: Vec<Vec<C64>> = base.semi.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect();

    // δ_ν̄ F = ∂_ν̄ F − conj(Γ^σ_{;ν}) ∂̇_σ̄ F
    let delta = |nu: usize, pick: &dyn Fn(&Frame) -> Jet| -> C64 {
        let mut acc = pick(&along_zb[nu]).coeff(1);
        for s in 0..n {
            acc -= conn[s][nu].conj() * pick(&along_vb[s]).coeff(1);
        }
        acc
    };
    let dot = |g: usize, pick: &dyn Fn(&Frame) -> Jet| -> C64 { pick(&along_vb[g]).coeff(1) };

    let mut out = CurvatureBlock {
        hh: None,
        vh: None,
        hv: None,
        vv: None,
        site: Witness::from(p),
    };
    if blocks.hh {
        let mut t = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        let mut r = -delta(nu, &|f: &Frame| f.mixed[a][b][mu]);
                        for s in 0..n {
                            r -= base.vert[a][b][s].value() * delta(nu, &|f: &Frame| f.semi[s][mu]);
                        }
                        t.set(a, b, mu, nu, r);
                    }
                }
            }
        }
        out.hh = Some(t);
    }
    if blocks.vh {
        let mut t = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    for nu in 0..n {
                        t.set(a, b, d, nu, -delta(nu, &|f: &Frame| f.vert[a][b][d]));
                    }
                }
            }
        }
        out.vh = Some(t);
    }
    if blocks.hv {
        let mut t = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    for mu in 0..n {
                        let mut r = -dot(g, &|f: &Frame| f.mixed[a][b][mu]);
                        for s in 0..n {
                            // Γ^σ_{γ̄;μ} = ∂̇_γ̄ Γ^σ_{;μ}
                            r -= base.vert[a][b][s].value() * dot(g, &|f: &Frame| f.semi[s][mu]);
                        }
                        t.set(a, b, g, mu, r);
                    }
                }
            }
        }
        out.hv = Some(t);
    }
    if blocks.vv {
        let mut t = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    for g in 0..n {
                        t.set(a, b, d, g, -dot(g, &|f: &Frame| f.vert[a][b][d]));
                    }
                }
            }
        }
        out.vv = Some(t);
    }
    let levi = base.l.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect();
    Ok((out, levi))
}

pub fn hh_curvature(
    m: &Metric,
    p: &JetPoint,
    blocks: BlockSet,
    plan: &DifferentiationPlan,
) -> Result<CurvatureBlock> {
    curvature_with_levi(m, p, blocks, plan).map(|(c, _)| c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionalCurvature {
    pub k: f64,
    pub imag_residue: f64,
}

/// `K_G = (2/G²) G_{αγ̄} R^α_{β;μν̄} v^β v^μ v̄^ν v̄^γ`.
pub fn holomorphic_sectional_curvature_with(
    m: &Metric,
    p: &JetPoint,
    plan: &DifferentiationPlan,
) -> Result<SectionalCurvature> {
    let (blocks, levi) = curvature_with_levi(m, p, BlockSet::HH, plan)?;
    let hh = blocks.hh.expect("hh requested");
    let n = p.dim();
    let v = &p.v;
    let g = m.eval(&JetVars::<C64>::at(p)).re;
    let mut acc = c64(0.0, 0.0);
    for a in 0..n {
        for gm in 0..n {
            let lag = levi[a][gm] * v[gm].conj();
            if lag == c64(0.0, 0.0) {
                continue;
            }
            for b in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        acc += lag * hh.get(a, b, mu, nu) * v[b] * v[mu] * v[nu].conj();
                    }
                }
            }
        }
    }
    let k = acc * (2.0 / (g * g));
    Ok(SectionalCurvature {
        k: k.re,
        imag_residue: k.im.abs(),
    })
}

pub fn holomorphic_sectional_curvature(m: &Metric, p: &JetPoint) -> Result<SectionalCurvature> {
    holomorphic_sectional_curvature_with(m, p, &DifferentiationPlan::automatic())
}

/// Classical holomorphic sectional curvature `2 R(v,v̄,v,v̄)/h(v)²` from the
/// Chern curvature of a Hermitian tensor.
pub fn hermitian_hsc(h: &HermitianMetric, p: &JetPoint) -> Result<f64> {
    let n = h.dim();
    if p.dim() != n {
        return Err(FinslerError::Shape { expected: n, got: p.dim() });
    }
    let hval = h.tensor_at(&p.z);
    let (hinv, cond) = hermitian_inverse(&hval)?;
    if !(cond <= MAX_CONDITION) {
        return Err(FinslerError::IllConditionedMetric(cond));
    }
    let zero = c64(0.0, 0.0);
    // dz[α][γ][δ] = ∂_α h_{γδ̄}, dzb[β][γ][δ] = ∂_β̄ h_{γδ̄}, ddb[α][β][γ][δ]
    let mut dz = vec![vec![vec![zero; n]; n]; n];
    let mut dzb = vec![vec![vec![zero; n]; n]; n];
    let mut ddb = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let z: Vec<Jet> = (0..n)
                .map(|j| Jet::variable(p.z[j], if j == a { 1 } else { 0 }, 2))
                .collect();
            let zb: Vec<Jet> = (0..n)
                .map(|j| Jet::variable(p.z[j].conj(), if j == b { 2 } else { 0 }, 2))
                .collect();
            let t = h.tensor(&z, &zb);
            for g in 0..n {
                for d in 0..n {
                    dz[a][g][d] = t[g][d].coeff(1);
                    dzb[b][g][d] = t[g][d].coeff(2);
                    ddb.set(a, b, g, d, t[g][d].coeff(3));
                }
            }
        }
    }
    let v = &p.v;
    let mut r = zero;
    let mut hv = zero;
    for a in 0..n {
        for b in 0..n {
            hv += hval[a][b] * v[a] * v[b].conj();
            for g in 0..n {
                for d in 0..n {
                    // R_{αβ̄γδ̄} = −∂_α∂_β̄ h_{γδ̄} + h^{λ̄ρ} ∂_α h_{γλ̄} ∂_β̄ h_{ρδ̄}
                    let mut rr = -ddb.get(a, b, g, d);
                    for lam in 0..n {
                        for rho in 0..n {
                            rr += hinv[lam][rho] * dz[a][g][lam] * dzb[b][rho][d];
                        }
                    }
                    r += rr * v[a] * v[b].conj() * v[g] * v[d].conj();
                }
            }
        }
    }
    Ok(2.0 * r.re / (hv.re * hv.re))
}

struct LogOf<'a, F>(&'a F);

impl<F: JetField> JetField for LogOf<'_, F> {
    fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
        self.0.eval(x).ln()
    }
}

/// Gaussian curvature `−(2/λ²) ∂²log λ²/∂ζ∂ζ̄` of a one-dimensional
/// metric `λ²(ζ)|dζ|²`, given as a field evaluated at `v = 1`.
pub fn gaussian_curvature<F: JetField>(lambda2: &F, zeta: C64) -> Result<f64> {
    let p = JetPoint::new(vec![zeta], vec![c64(1.0, 0.0)])?;
    let l2 = lambda2.eval(&JetVars::<C64>::at(&p)).re;
    if !(l2 > 0.0) || !l2.is_finite() {
        return Err(FinslerError::Domain(format!("λ² = {l2} at ζ = {zeta}")));
    }
    let lap = wirtinger_derivative(
        &LogOf(lambda2),
        &p,
        &crate::req![Var::Z(0), Var::Zb(0)],
        &DifferentiationPlan::automatic(),
    )?;
    Ok(-2.0 * lap.re / l2)
}

/// The metric `ζ ↦ G(φ(ζ); φ′(ζ))` induced on a holomorphic curve.
pub fn induced_curve_metric(m: &Metric, curve: HolomorphicMap) -> Result<Metric> {
    if curve.dim_in() != 1 {
        return Err(FinslerError::Shape { expected: 1, got: curve.dim_in() });
    }
    let origin = [c64(0.0, 0.0)];
    let jac = curve.jacobian(&origin);
    let speed: Vec<C64> = jac.iter().map(|row| row[0]).collect();
    if norm(&speed) < crate::wirtinger::MIN_DIRECTION_NORM {
        return Err(FinslerError::DegenerateCurve("φ′(0) = 0".into()));
    }
    Metric::pullback(curve, m.clone())
}

/// Gaussian curvature at `ζ = 0` of the curve `z + ζv + ζ²w`.
pub fn quadratic_curve_curvature(m: &Metric, p: &JetPoint, w: &[C64]) -> Result<f64> {
    let curve = HolomorphicMap::quadratic_curve(&p.z, &p.v, w)?;
    let induced = induced_curve_metric(m, curve)?;
    gaussian_curvature(&induced, c64(0.0, 0.0))
}

/// Second-order coefficient `w = −½ Γ^α_{β;μ} v^β v^μ` of the curve that
/// realizes the holomorphic sectional curvature of a Hermitian metric.
pub fn osculating_coefficient(m: &Metric, p: &JetPoint) -> Result<Vec<C64>> {
    let c = connection_coefficients(m, p, &DifferentiationPlan::automatic())?;
    let n = p.dim();
    Ok((0..n)
        .map(|a| {
            let mut acc = c64(0.0, 0.0);
            for b in 0..n {
                for mu in 0..n {
                    acc += c.gamma_mixed[a][b][mu] * p.v[b] * p.v[mu];
                }
            }
            -0.5 * acc
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSampler {
    pub count: usize,
    pub seed: u64,
    pub refine_steps: usize,
}

impl Default for BoundSampler {
    fn default() -> Self {
        BoundSampler {
            count: 200,
            seed: 0,
            refine_steps: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    pub inf: f64,
    pub sup: f64,
    pub inf_witness: Witness,
    pub sup_witness: Witness,
    pub samples: usize,
}

fn unpack(x: &[f64], n: usize) -> (Vec<C64>, Vec<C64>) {
    let z = (0..n).map(|i| c64(x[2 * i], x[2 * i + 1])).collect();
    let v = (0..n).map(|i| c64(x[2 * n + 2 * i], x[2 * n + 2 * i + 1])).collect();
    (z, v)
}

fn pack(z: &[C64], v: &[C64]) -> Vec<f64> {
    z.iter().chain(v.iter()).flat_map(|c| [c.re, c.im]).collect()
}

fn project(x: &mut [f64], n: usize, region: &Region) {
    let rz = x[..2 * n].iter().map(|a| a * a).sum::<f64>().sqrt();
    if rz > region.outer {
        x[..2 * n].iter_mut().for_each(|a| *a *= region.outer / rz);
    } else if rz < region.inner && rz > 0.0 {
        x[..2 * n].iter_mut().for_each(|a| *a *= region.inner / rz);
    }
    let rv = x[2 * n..].iter().map(|a| a * a).sum::<f64>().sqrt();
    x[2 * n..].iter_mut().for_each(|a| *a /= rv);
}

/// Projected gradient refinement of `sign·K_G` over the region times the
/// unit sphere, with step halving.
fn refine(m: &Metric, region: &Region, start: &JetPoint, sign: f64, steps: usize) -> (f64, JetPoint) {
    let n = start.dim();
    let value = |x: &[f64]| -> Option<f64> {
        let (z, v) = unpack(x, n);
        let p = JetPoint::new(z, v).ok()?;
        holomorphic_sectional_curvature(m, &p).ok().map(|s| sign * s.k)
    };
    let mut x = pack(&start.z, &start.v);
    let Some(mut fx) = value(&x) else {
        return (f64::NAN, start.clone());
    };
    let mut step = 0.1 * region.outer.min(1.0);
    let h = 1e-6;
    for _ in 0..steps {
        let mut grad = vec![0.0; x.len()];
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            match (value(&xp), value(&xm)) {
                (Some(a), Some(b)) => grad[i] = (a - b) / (2.0 * h),
                _ => grad[i] = 0.0,
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-8 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut y: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g / gnorm).collect();
            project(&mut y, n, region);
            if let Some(fy) = value(&y) {
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    step *= 1.5;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let (z, v) = unpack(&x, n);
    (sign * fx, JetPoint::new(z, v).unwrap_or_else(|_| start.clone()))
}

/// Sampled extrema of `K_G` over a region, each refined locally.
pub fn curvature_bound_estimate(
    m: &Metric,
    region: &Region,
    sampler: &BoundSampler,
) -> Result<CurvatureBounds> {
    region.validate()?;
    let n = m.dim();
    let plan = SamplePlan::new(sampler.count.max(1), *region, sampler.seed);
    let mut points: Vec<JetPoint> = jet_samples(&plan, n)?
        .into_iter()
        .map(|(z, v)| JetPoint::new(z, v))
        .collect::<Result<_>>()?;
    // the pole and its neighbourhood are often extremal for radial families
    if region.inner == 0.0 {
        let mut v = vec![c64(0.0, 0.0); n];
        v[0] = c64(1.0, 0.0);
        points.push(JetPoint::new(vec![c64(0.0, 0.0); n], v)?);
    }
    for p in &points {
        m.check_admissible(p)?;
    }
    let ks: Vec<f64> = points
        .par_iter()
        .map(|p| holomorphic_sectional_curvature(m, p).map(|s| s.k))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| ks[a].total_cmp(&ks[b]).then(a.cmp(&b)));
    let starts = 4.min(order.len());
    let mut cands: Vec<(f64, usize)> = Vec::new();
    for &i in &order[..starts] {
        cands.push((-1.0, i));
    }
    for &i in order.iter().rev().take(starts) {
        cands.push((1.0, i));
    }
    let refined: Vec<(f64, f64, JetPoint)> = cands
        .par_iter()
        .map(|&(sign, i)| {
            let (k, p) = refine(m, region, &points[i], sign, sampler.refine_steps);
            (sign, k, p)
        })
        .collect();
    let mut inf = (ks[order[0]], points[order[0]].clone());
    let last = *order.last().unwrap();
    let mut sup = (ks[last], points[last].clone());
    for (sign, k, p) in refined {
        if !k.is_finite() {
            continue;
        }
        if sign < 0.0 && k < inf.0 {
            inf = (k, p);
        } else if sign > 0.0 && k > sup.0 {
            sup = (k, p);
        }
    }
    Ok(CurvatureBounds {
        inf: inf.0,
        sup: sup.0,
        inf_witness: Witness::from(&inf.1),
        sup_witness: Witness::from(&sup.1),
        samples: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jp(z: &[C64], v: &[C64]) -> JetPoint {
        JetPoint::new(z.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn poincare_semicolon_coefficient() {
        let p = JetPoint::real(&[0.5], &[1.0]).unwrap();
        let c = connection_coefficients(&Metric::poincare(), &p, &DifferentiationPlan::automatic()).unwrap();
        assert!((c.gamma_semicolon[0][0] - c64(4.0 / 3.0, 0.0)).norm() < 1e-13);
        assert!(c.gamma_vertical[0][0][0].norm() < 1e-13);
    }

    #[test]
    fn euclidean_is_flat() {
        let p = jp(&[c64(0.3, 0.2), c64(-0.1, 0.4)], &[c64(1.0, 0.0), c64(0.2, -0.5)]);
        let b = hh_curvature(&Metric::euclidean(2), &p, BlockSet::ALL, &DifferentiationPlan::automatic()).unwrap();
        for t in [b.hh, b.vh, b.hv, b.vv] {
            assert!(t.unwrap().max_abs() < 1e-12);
        }
        let k = holomorphic_sectional_curvature(&Metric::euclidean(2), &p).unwrap();
        assert!(k.k.abs() < 1e-12);
    }

    #[test]
    fn poincare_contraction_at_origin() {
        let p = JetPoint::real(&[0.0], &[1.0]).unwrap();
        let b = hh_curvature(&Metric::poincare(), &p, BlockSet::HH, &DifferentiationPlan::automatic()).unwrap();
        assert!((b.hh.unwrap().get(0, 0, 0, 0) - c64(-2.0, 0.0)).norm() < 1e-12);
        let k = holomorphic_sectional_curvature(&Metric::poincare(), &p).unwrap();
        assert!((k.k + 4.0).abs() < 1e-12);
    }

    #[test]
    fn fubini_study_is_plus_four() {
        let p = jp(&[c64(0.7, -1.1)], &[c64(0.3, 2.0)]);
        let k = holomorphic_sectional_curvature(&Metric::fubini_study_chart(), &p).unwrap();
        assert!((k.k - 4.0).abs() < 1e-10, "{k:?}");
    }

    #[test]
    fn hermitian_hsc_examples() {
        let h = HermitianMetric::ProductDisk;
        let p = JetPoint::real(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((hermitian_hsc(&h, &p).unwrap() + 4.0).abs() < 1e-12);
        let q = JetPoint::real(&[0.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(hermitian_hsc(&h, &q).unwrap().abs() < 1e-12);
        let e = HermitianMetric::Euclidean { dim: 3 };
        let r = JetPoint::real(&[0.1, 0.2, 0.3], &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(hermitian_hsc(&e, &r).unwrap(), 0.0);
    }

    #[test]
    fn exp_family_closed_form() {
        for (a, b) in [(1.0, 0.5), (2.0, -0.3), (0.5, 0.4)] {
            let m = Metric::exp_family(a, b, 1.0, 2).unwrap();
            let p = jp(&[c64(0.3, -0.2), c64(0.1, 0.5)], &[c64(0.6, 0.1), c64(-0.4, 0.7)]);
            let r = p.v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let t = p.z.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let zv: C64 = p.z.iter().zip(&p.v).map(|(z, v)| z * v.conj()).sum();
            let s = zv.norm_sqr() / r;
            let want = -2.0 * (a + b) / (a * t + b * s).exp();
            let k = holomorphic_sectional_curvature(&m, &p).unwrap();
            assert!((k.k - want).abs() < 1e-9, "a={a} b={b}: {} vs {want}", k.k);
            assert!(k.imag_residue < 1e-10);
        }
    }

    #[test]
    fn gaussian_curvature_examples() {
        struct L2(f64);
        impl JetField for L2 {
            fn eval<S: Scalar>(&self, x: &JetVars<S>) -> S {
                let w = S::one() + x.z[0] * x.zb[0] * S::from_f(self.0);
                (w * w).recip()
            }
        }
        assert!((gaussian_curvature(&L2(-1.0), c64(0.3, 0.1)).unwrap() + 4.0).abs() < 1e-12);
        assert!((gaussian_curvature(&L2(1.0), c64(0.3, 0.1)).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(gaussian_curvature(&L2(0.0), c64(0.3, 0.1)).unwrap(), 0.0);
        assert!(gaussian_curvature(&L2(-1.0), c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn induced_curves() {
        let p = jp(&[c64(0.2, 0.1)], &[c64(1.0, 0.0)]);
        let k = quadratic_curve_curvature(&Metric::poincare(), &p, &[c64(0.0, 0.0)]).unwrap();
        assert!((k + 4.0).abs() < 1e-12);
        let e = jp(&[c64(0.2, 0.1), c64(0.0, 1.0)], &[c64(1.0, 0.0), c64(0.0, 1.0)]);
        let k = quadratic_curve_curvature(&Metric::euclidean(2), &e, &[c64(0.0, 0.0); 2]).unwrap();
        assert!(k.abs() < 1e-12);
        let flat = HolomorphicMap::quadratic_curve(&e.z, &[c64(0.0, 0.0); 2], &[c64(1.0, 0.0); 2]);
        if let Ok(c) = flat {
            assert!(matches!(
                induced_curve_metric(&Metric::euclidean(2), c),
                Err(FinslerError::DegenerateCurve(_))
            ));
        }
    }

    #[test]
    fn osculating_curve_attains_hermitian_hsc() {
        let m = Metric::hermitian_poly(2, 5, 0.3);
        let p = jp(&[c64(0.2, -0.1), c64(0.3, 0.2)], &[c64(0.5, 0.5), c64(-0.3, 0.8)]);
        let w = osculating_coefficient(&m, &p).unwrap();
        let k = quadratic_curve_curvature(&m, &p, &w).unwrap();
        let kg = holomorphic_sectional_curvature(&m, &p).unwrap().k;
        assert!((k - kg).abs() < 1e-9, "{k} vs {kg}");
    }

    #[test]
    fn ill_conditioned_degenerate() {
        let p = JetPoint::real(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let r = connection_coefficients(&Metric::Degenerate { dim: 2 }, &p, &DifferentiationPlan::automatic());
        assert!(r.is_err());
    }
}
