use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use finslerium::chern::{curvature_bound_estimate, holomorphic_sectional_curvature_with, BoundSampler};
use finslerium::comparison::{comparison_report, ModelSpace};
use finslerium::kahler::{kahler_identity_checks, KahlerModel};
use finslerium::linalg::CMatrix;
use finslerium::maps::{HolomorphicMap, MapFile};
use finslerium::metric::Metric;
use finslerium::report::{field_csv, heatmap_svg, ratio_field, rows_csv, to_json};
use finslerium::sampling::{Region, SamplePlan};
use finslerium::schwarz::{phi_trace, schwarz_check, Composition, PhiGrid, PointSet, SchwarzConfig};
use finslerium::metric::levi_matrix_with;
use finslerium::{c64, validate_metric, DifferentiationPlan, FinslerError, JetPoint, MetricDescriptor, C64};

#[derive(Parser)]
#[command(name = "finslerium", version, about = "Numerical complex Finsler geometry")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Homogeneity, Euler identity and Levi positivity on seeded jets.
    Validate(Common),
    /// Holomorphic sectional curvature at one jet.
    Curvature(Common),
    /// Sampled and refined extrema of the holomorphic sectional curvature.
    CurvatureBounds(Common),
    /// Index-form and Hessian comparison chain on model spaces.
    Comparison(ComparisonArgs),
    /// Kähler identities on flat space or the Poincaré disk.
    KahlerCheck(Common),
    /// Sampled Schwarz inequality f*H <= (K1/K2) G.
    Schwarz(SchwarzArgs),
    /// Auxiliary function along a composed disk and its maximizer.
    PhiTrace(PhiArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    Fd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "poincare")]
    metric: String,
    /// Metric parameter `k=v`, repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    map: Option<String>,
    /// `disk:R`, `ball:R` or `shell:r:R`.
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Vec<Format>,
    #[arg(long, value_enum, default_value = "auto")]
    mode: Mode,
}

#[derive(Args, Clone)]
struct ComparisonArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated curvature scales K.
    #[arg(long, default_value = "0,0.5,1,2")]
    k: String,
    /// Comma-separated radii.
    #[arg(long, default_value = "0.25,0.5,1,2,4")]
    radii: String,
}

#[derive(Args, Clone)]
struct SchwarzArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "poincare")]
    target: String,
    #[arg(long = "target-param")]
    target_params: Vec<String>,
    #[arg(long)]
    target_dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    k1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k2: Option<f64>,
    #[arg(long)]
    estimate_bounds: bool,
    /// Polar grid `rings:spokes:outer` on a one-dimensional source.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args, Clone)]
struct PhiArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "poincare")]
    target: String,
    #[arg(long = "target-param")]
    target_params: Vec<String>,
    #[arg(long)]
    target_dim: Option<usize>,
    /// Disk into the source model, default identity.
    #[arg(long)]
    phi: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    a: f64,
    #[arg(long, default_value_t = 3.0)]
    b: f64,
    #[arg(long, default_value_t = 256)]
    rings: usize,
    #[arg(long, default_value_t = 64)]
    spokes: usize,
    #[arg(long, default_value_t = 30)]
    refine: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Hypothesis(String),
}

impl From<FinslerError> for Failure {
    fn from(e: FinslerError) -> Self {
        match e {
            FinslerError::Hypothesis(_) => Failure::Hypothesis(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command_line: Vec<String>,
    seed: u64,
    tool_version: &'static str,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    exit_code: u8,
    error: Option<String>,
    wall_time_ms: u128,
}

/// Artifacts of one run, written in order.
struct Outputs {
    dir: PathBuf,
    formats: Vec<Format>,
    inputs: Vec<FileDigest>,
    written: Vec<FileDigest>,
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Outputs {
    fn new(common: &Common) -> Self {
        Outputs {
            dir: common.out.clone(),
            formats: common.formats(),
            inputs: Vec::new(),
            written: Vec::new(),
        }
    }

    fn input(&mut self, name: &str, content: &str) {
        self.inputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256(content.as_bytes()),
        });
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn write(&mut self, name: &str, content: &str) -> Run<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(FileDigest {
            path: name.to_string(),
            sha256: sha256(content.as_bytes()),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, kind: &str, value: &T) -> Run<()> {
        let s = to_json(kind, value)?;
        print!("{s}");
        if self.wants(Format::Json) {
            self.write(&format!("{kind}.json"), &s)?;
        }
        Ok(())
    }

    fn reject(&self, kind: &str, allowed: &[Format]) -> Run<()> {
        for f in &self.formats {
            if !allowed.contains(f) {
                return Err(Failure::Usage(format!("format {f:?} is not available for {kind}").to_lowercase()));
            }
        }
        Ok(())
    }
}

impl Common {
    fn formats(&self) -> Vec<Format> {
        let mut f = self.format.clone();
        f.dedup();
        f
    }

    fn plan(&self) -> DifferentiationPlan {
        match self.mode {
            Mode::Auto => DifferentiationPlan::automatic(),
            Mode::Fd => DifferentiationPlan::finite_difference(),
        }
    }

    fn metric(&self) -> Run<Metric> {
        load_metric(&self.metric, &self.params, self.dim)
    }

    /// The requested region, or a ball well inside the metric's domain.
    fn region_for(&self, m: &Metric) -> Run<Region> {
        match &self.region {
            Some(r) => Ok(Region::parse(r)?),
            None => {
                let r = m.domain_radius();
                Ok(Region::ball(if r.is_finite() { 0.9 * r } else { 1.0 }))
            }
        }
    }
}

fn parse_params(items: &[String]) -> Run<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("parameter '{item}' is not of the form k=v")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("parameter '{item}' has a non-numeric value")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn load_metric(spec: &str, params: &[String], dim: Option<usize>) -> Run<Metric> {
    let path = Path::new(spec);
    if spec.ends_with(".json") && path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(Metric::from_descriptor(&MetricDescriptor::from_json(&text)?)?);
    }
    Ok(Metric::from_zoo(spec, dim, &parse_params(params)?)?)
}

/// `a`, `a+bi`, `a-bi`, `bi` with decimal reals.
fn parse_complex(s: &str) -> Run<C64> {
    let bad = || Failure::Usage(format!("bad complex literal '{s}'"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| c64(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(c64(re, im))
}

fn parse_vector(s: &str) -> Run<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

fn parse_list(s: &str) -> Run<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number '{x}' in '{s}'"))))
        .collect()
}

fn parse_matrix(s: &str) -> Run<Vec<Vec<C64>>> {
    s.split(';').map(parse_vector).collect()
}

/// Named maps or a JSON expression file; returns the map and its input text.
fn load_map(spec: &str, dim: usize) -> Run<(HolomorphicMap, String)> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(e.to_string()))?;
        let file: MapFile = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("map file: {e}")))?;
        return Ok((HolomorphicMap::from_expressions(&file)?, text));
    }
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let map = match name {
        "identity" => HolomorphicMap::identity(dim),
        "diagonal" => HolomorphicMap::diagonal_embedding(),
        "power" => {
            let k: u32 = rest.parse().map_err(|_| Failure::Usage(format!("bad power map '{spec}'")))?;
            HolomorphicMap::power(k)
        }
        "mobius" => {
            let (a, theta) = rest.split_once(':').unwrap_or((rest, "0"));
            let theta: f64 = theta.parse().map_err(|_| Failure::Usage(format!("bad angle in '{spec}'")))?;
            HolomorphicMap::mobius(parse_complex(a)?, theta)?
        }
        "linear" => HolomorphicMap::linear(parse_matrix(rest)?)?,
        "constant" => HolomorphicMap::constant(dim, parse_vector(rest)?),
        _ => return Err(FinslerError::UnknownMap(spec.to_string()).into()),
    };
    Ok((map, spec.to_string()))
}

#[derive(Serialize)]
struct CurvatureOut {
    metric: String,
    z: Vec<C64>,
    v: Vec<C64>,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "K")]
    k: f64,
    imag_residue: f64,
    levi: CMatrix,
}

fn point(common: &Common, m: &Metric) -> Run<JetPoint> {
    let n = m.dim();
    let z = match &common.z {
        Some(s) => parse_vector(s)?,
        None => vec![c64(0.0, 0.0); n],
    };
    let v = match &common.v {
        Some(s) => parse_vector(s)?,
        None => {
            let mut v = vec![c64(0.0, 0.0); n];
            v[0] = c64(1.0, 0.0);
            v
        }
    };
    Ok(JetPoint::new(z, v)?)
}

fn run_validate(c: &Common, out: &mut Outputs) -> Run<bool> {
    out.reject("validate", &[Format::Json])?;
    let m = c.metric()?;
    out.input("metric", &m.descriptor().to_json());
    let plan = SamplePlan::new(c.samples.unwrap_or(200), c.region_for(&m)?, c.seed);
    let rep = validate_metric(&m, &plan)?;
    out.json("validate", &rep)?;
    Ok(rep.passed())
}

fn run_curvature(c: &Common, out: &mut Outputs) -> Run<bool> {
    out.reject("curvature", &[Format::Json])?;
    let m = c.metric()?;
    out.input("metric", &m.descriptor().to_json());
    let p = point(c, &m)?;
    let plan = c.plan();
    let s = holomorphic_sectional_curvature_with(&m, &p, &plan)?;
    let res = CurvatureOut {
        metric: m.name(),
        g: finslerium::evaluate_metric(&m, &p)?,
        levi: levi_matrix_with(&m, &p, &plan)?,
        z: p.z,
        v: p.v,
        k: s.k,
        imag_residue: s.imag_residue,
    };
    out.json("curvature", &res)?;
    Ok(true)
}

fn run_bounds(c: &Common, out: &mut Outputs) -> Run<bool> {
    out.reject("curvature-bounds", &[Format::Json])?;
    let m = c.metric()?;
    out.input("metric", &m.descriptor().to_json());
    let sampler = BoundSampler {
        count: c.samples.unwrap_or(200),
        seed: c.seed,
        ..BoundSampler::default()
    };
    let rep = curvature_bound_estimate(&m, &c.region_for(&m)?, &sampler)?;
    out.json("curvature-bounds", &rep)?;
    Ok(true)
}

fn run_comparison(a: &ComparisonArgs, out: &mut Outputs) -> Run<bool> {
    out.reject("comparison", &[Format::Json, Format::Csv])?;
    let dim = a.common.dim.unwrap_or(2);
    let radii = parse_list(&a.radii)?;
    let mut reports = Vec::new();
    for k in parse_list(&a.k)? {
        reports.push(comparison_report(&ModelSpace::with_k(k, dim)?, &radii)?);
    }
    out.json("comparison", &reports)?;
    if out.wants(Format::Csv) {
        let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
        out.write("comparison.csv", &rows_csv(&rows)?)?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn run_kahler(c: &Common, out: &mut Outputs) -> Run<bool> {
    out.reject("kahler-check", &[Format::Json, Format::Csv])?;
    let model = match c.metric.as_str() {
        "poincare" | "poincare-disk" => KahlerModel::PoincareDisk,
        "euclidean" | "flat" => KahlerModel::Flat { n: c.dim.unwrap_or(1) },
        other => {
            return Err(Failure::Usage(format!(
                "kahler-check supports the models poincare and euclidean, not '{other}'"
            )))
        }
    };
    out.input("model", &format!("{model:?}"));
    let region = match &c.region {
        Some(r) => Region::parse(r)?,
        None => Region::shell(0.05, 0.9),
    };
    let rep = kahler_identity_checks(model, &SamplePlan::new(c.samples.unwrap_or(200), region, c.seed))?;
    out.json("kahler-check", &rep)?;
    if out.wants(Format::Csv) {
        #[derive(Serialize)]
        struct Row<'a> {
            name: &'a str,
            worst: f64,
            tolerance: f64,
            samples: usize,
            pass: bool,
            informational: bool,
        }
        let rows: Vec<Row> = rep
            .checks
            .iter()
            .map(|r| Row {
                name: &r.name,
                worst: r.worst,
                tolerance: r.tolerance,
                samples: r.samples,
                pass: r.pass,
                informational: r.informational,
            })
            .collect();
        out.write("kahler-check.csv", &rows_csv(&rows)?)?;
    }
    Ok(rep.pass)
}

fn run_schwarz(a: &SchwarzArgs, out: &mut Outputs) -> Run<bool> {
    let c = &a.common;
    let g = c.metric()?;
    let h = load_metric(&a.target, &a.target_params, a.target_dim)?;
    let (f, map_text) = load_map(c.map.as_deref().unwrap_or("identity"), g.dim())?;
    out.input("metric", &g.descriptor().to_json());
    out.input("target", &h.descriptor().to_json());
    out.input("map", &map_text);
    let points = if let Some(spec) = &a.grid {
        let parts = parse_list(&spec.replace(':', ","))?;
        if parts.len() != 3 {
            return Err(Failure::Usage(format!("grid '{spec}' is not rings:spokes:outer")));
        }
        PointSet::PolarGrid {
            rings: parts[0] as usize,
            spokes: parts[1] as usize,
            outer: parts[2],
        }
    } else if c.region.is_none() && c.samples.is_none() && g.dim() == 1 && g.domain_radius() == 1.0 {
        PointSet::PolarGrid {
            rings: 99,
            spokes: 32,
            outer: 0.99,
        }
    } else {
        PointSet::Random(SamplePlan::new(c.samples.unwrap_or(200), c.region_for(&g)?, c.seed))
    };
    let mut config = if a.estimate_bounds {
        let target_radius = h.domain_radius();
        let target_region = Region::ball(if target_radius.is_finite() { 0.999 * target_radius } else { 1.0 });
        let sampler = BoundSampler {
            seed: c.seed,
            ..BoundSampler::default()
        };
        SchwarzConfig::estimated(&g, &h, &c.region_for(&g)?, &target_region, &sampler, points)?
    } else {
        match (a.k1, a.k2) {
            (Some(k1), Some(k2)) => SchwarzConfig::user(k1, k2, points),
            _ => return Err(Failure::Usage("schwarz needs --k1 and --k2, or --estimate-bounds".into())),
        }
    };
    config.fiber.seed = c.seed;
    let rep = schwarz_check(&f, &g, &h, &config)?;
    out.json("schwarz", &rep)?;
    let field = ratio_field(&rep.samples);
    if out.wants(Format::Csv) {
        out.write("schwarz.csv", &field_csv(&field)?)?;
    }
    if out.wants(Format::Svg) {
        out.write("schwarz.svg", &heatmap_svg(&field, rep.bound, "fiber supremum of u"))?;
    }
    Ok(rep.verdict)
}

fn run_phi(a: &PhiArgs, out: &mut Outputs) -> Run<bool> {
    let c = &a.common;
    let model = match c.metric.as_str() {
        "poincare" | "poincare-disk" => KahlerModel::PoincareDisk,
        "euclidean" | "flat" => KahlerModel::Flat { n: c.dim.unwrap_or(1) },
        other => {
            return Err(Failure::Usage(format!(
                "phi-trace needs a closed-form source model (poincare or euclidean), not '{other}'"
            )))
        }
    };
    let h = load_metric(&a.target, &a.target_params, a.target_dim)?;
    let (f, map_text) = load_map(c.map.as_deref().unwrap_or("identity"), model.dim())?;
    let (phi, phi_text) = load_map(a.phi.as_deref().unwrap_or("identity"), 1)?;
    out.input("model", &format!("{model:?}"));
    out.input("target", &h.descriptor().to_json());
    out.input("map", &map_text);
    out.input("phi", &phi_text);
    let comp = Composition::new(phi, model, f, h)?;
    let grid = PhiGrid {
        rings: a.rings,
        spokes: a.spokes,
        refine_steps: a.refine,
    };
    let trace = phi_trace(&comp, a.a, a.b, &grid)?;
    out.json("phi-trace", &trace)?;
    if out.wants(Format::Csv) {
        out.write("phi-trace.csv", &field_csv(&trace.field)?)?;
    }
    if out.wants(Format::Svg) {
        out.write("phi-trace.svg", &heatmap_svg(&trace.field, 0.5 * trace.max_value, "auxiliary function"))?;
    }
    Ok(trace.first_order_pass && trace.second_order_pass && trace.boundary_pass)
}

fn configure_threads() {
    if let Some(n) = std::env::var("FINSLERIUM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    configure_threads();
    let start = Instant::now();
    let common = match &cli.cmd {
        Cmd::Validate(c) | Cmd::Curvature(c) | Cmd::CurvatureBounds(c) | Cmd::KahlerCheck(c) => c.clone(),
        Cmd::Comparison(a) => a.common.clone(),
        Cmd::Schwarz(a) => a.common.clone(),
        Cmd::PhiTrace(a) => a.common.clone(),
    };
    let mut out = Outputs::new(&common);
    let result = match &cli.cmd {
        Cmd::Validate(c) => run_validate(c, &mut out),
        Cmd::Curvature(c) => run_curvature(c, &mut out),
        Cmd::CurvatureBounds(c) => run_bounds(c, &mut out),
        Cmd::Comparison(a) => run_comparison(a, &mut out),
        Cmd::KahlerCheck(c) => run_kahler(c, &mut out),
        Cmd::Schwarz(a) => run_schwarz(a, &mut out),
        Cmd::PhiTrace(a) => run_phi(a, &mut out),
    };
    let (code, error) = match result {
        Ok(true) => (0u8, None),
        Ok(false) => (1, None),
        Err(Failure::Usage(m)) => (2, Some(m)),
        Err(Failure::Hypothesis(m)) => (3, Some(m)),
    };
    if let Some(m) = &error {
        eprintln!("error: {m}");
    }
    let manifest = RunManifest {
        command_line: argv,
        seed: common.seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        inputs: std::mem::take(&mut out.inputs),
        outputs: std::mem::take(&mut out.written),
        exit_code: code,
        error,
        wall_time_ms: start.elapsed().as_millis(),
    };
    let text = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    if fs::create_dir_all(&out.dir).and_then(|_| fs::write(out.dir.join("manifest.json"), text)).is_err() {
        eprintln!("error: cannot write manifest to {}", out.dir.display());
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5").unwrap(), c64(0.5, 0.0));
        assert_eq!(parse_complex("0.1+0.2i").unwrap(), c64(0.1, 0.2));
        assert_eq!(parse_complex("-0.1-0.2i").unwrap(), c64(-0.1, -0.2));
        assert_eq!(parse_complex("1e-3-2e-1i").unwrap(), c64(1e-3, -0.2));
        assert_eq!(parse_complex("2i").unwrap(), c64(0.0, 2.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn params_and_maps() {
        let p = parse_params(&["a=1".into(), "M0=2.5".into()]).unwrap();
        assert_eq!(p["M0"], 2.5);
        assert!(parse_params(&["a".into()]).is_err());
        let (m, _) = load_map("linear:2,0;0,1", 2).unwrap();
        assert_eq!(m.dim_out(), 2);
        assert!(matches!(load_map("nosuch", 1), Err(Failure::Usage(_))));
    }
}
