//! Command implementations. Each returns the full text of its output.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};
use torvol_core::arithvol::{
    classify_positivity, mahler_measure, metric_sequence_experiment, parseval_check, torus_sup,
    volume_convergence_experiment, IntPolynomial, MahlerOptions,
};
use torvol_core::conjugate::conjugate_grid;
use torvol_core::lattice::format_rational;
use torvol_core::quadrature::{volume_integral_estimate, QuadratureOptions};
use torvol_core::MetricModel;

use crate::config::{Family, ProblemConfig, VarietySpec};
use crate::{CliError, VERSION};

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Polytope,
    Classify,
    ConjugateGrid,
    Volume,
    Converge,
    Mahler { polynomial: Option<String> },
    Sequence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Polytope => "polytope",
            Command::Classify => "classify",
            Command::ConjugateGrid => "conjugate-grid",
            Command::Volume => "volume",
            Command::Converge => "converge",
            Command::Mahler { .. } => "mahler",
            Command::Sequence => "sequence",
        }
    }
}

/// Command-line overrides of the config `options` section.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub tolerance: Option<f64>,
    pub lmax: Option<u32>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub json: bool,
}

/// Output text, plus the first self-check that failed, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub violation: Option<String>,
}

impl Output {
    pub fn exit_code(&self) -> u8 {
        if self.violation.is_some() {
            2
        } else {
            0
        }
    }
}

const DEFAULT_LMAX: u32 = 20;
const DEFAULT_GRID: u32 = 10;
const DEFAULT_SEQUENCE_SAMPLES: usize = 256;
const VOLUME_ERROR_LIMIT: f64 = 1e-4;

struct Context {
    config: ProblemConfig,
    hash: String,
    tolerance: f64,
    lmax: u32,
    budget: Option<u64>,
    seed: u64,
    json: bool,
}

impl Context {
    fn quadrature(&self) -> Result<QuadratureOptions, CliError> {
        Ok(QuadratureOptions::default().with_tolerance(self.tolerance)?)
    }

    fn header(&self, cmd: &Command) -> String {
        format!(
            "# torvol {VERSION} command={} config-sha256={} tol={:e} seed={}\n",
            cmd.name(),
            self.hash,
            self.tolerance,
            self.seed
        )
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn num(x: f64) -> String {
    format!("{x:.10}")
}

/// Runs `cmd` on the config text. `config` may be absent only for `mahler` with a positional polynomial.
pub fn run(cmd: &Command, config: Option<&str>, opts: &RunOptions) -> Result<Output, CliError> {
    let (parsed, hashed) = match (config, cmd) {
        (Some(text), _) => (ProblemConfig::parse(text)?, text.as_bytes().to_vec()),
        (None, Command::Mahler { polynomial: Some(p) }) => (ProblemConfig::default(), p.as_bytes().to_vec()),
        (None, _) => return Err(CliError::Config(format!("{} needs --config", cmd.name()))),
    };
    let tolerance = opts.tolerance.or(parsed.options.tolerance).unwrap_or(QuadratureOptions::default().tolerance);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::Config(format!("tolerance must be positive, got {tolerance}")));
    }
    let ctx = Context {
        hash: sha256_hex(&hashed),
        tolerance,
        lmax: opts.lmax.or(parsed.options.lmax).unwrap_or(DEFAULT_LMAX),
        budget: opts.budget.or(parsed.options.budget),
        seed: opts.seed.or(parsed.options.seed).unwrap_or(0),
        json: opts.json,
        config: parsed,
    };
    match cmd {
        Command::Polytope => polytope(&ctx, cmd),
        Command::Classify => classify(&ctx, cmd),
        Command::ConjugateGrid => grid(&ctx, cmd),
        Command::Volume => volume(&ctx, cmd),
        Command::Converge => converge(&ctx, cmd),
        Command::Mahler { polynomial } => mahler(&ctx, cmd, polynomial.as_deref()),
        Command::Sequence => sequence(&ctx, cmd),
    }
}

fn ok(text: String) -> Result<Output, CliError> {
    Ok(Output { text, violation: None })
}

fn polytope(ctx: &Context, cmd: &Command) -> Result<Output, CliError> {
    let p = ctx.config.reference()?.ok_or_else(|| CliError::Config("polytope needs a variety".into()))?;
    let points = p.lattice_points(1);
    let volume = format_rational(&p.volume()?);
    if ctx.json {
        let value = json!({
            "variety": VarietySpec::from_polytope(&p),
            "dimension": p.dim(),
            "lattice_points": points.iter().map(|e| e.coords().to_vec()).collect::<Vec<_>>(),
            "volume": volume,
        });
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        return ok(text);
    }
    let mut out = ctx.header(cmd);
    let join = |c: Vec<String>| c.join(" ");
    let _ = writeln!(out, "dimension {}", p.dim());
    let _ = writeln!(out, "vertices {}", p.vertices().len());
    for v in p.vertices() {
        let _ = writeln!(out, "  {}", join(v.coords().iter().map(format_rational).collect()));
    }
    let _ = writeln!(out, "lattice points {}", points.len());
    for e in &points {
        let _ = writeln!(out, "  {}", join(e.coords().iter().map(i64::to_string).collect()));
    }
    let _ = writeln!(out, "volume {volume}");
    ok(out)
}

fn classify(ctx: &Context, cmd: &Command) -> Result<Output, CliError> {
    let m = ctx.config.metric()?;
    let r = classify_positivity(&m)?;
    let mut out = ctx.header(cmd);
    out.push_str("key,value\n");
    for (k, v) in [
        ("ample", r.ample.to_string()),
        ("nef", r.nef.to_string()),
        ("big", r.big.to_string()),
        ("g_at_origin", num(r.g_at_origin)),
        ("conjugate_max", num(r.conjugate_max)),
        ("bigness_agrees", r.bigness_agrees.to_string()),
        ("marginal", r.marginal.to_string()),
    ] {
        let _ = writeln!(out, "{k},{v}");
    }
    for (e, v) in &r.witnesses {
        let coords: Vec<String> = e.coords().iter().map(i64::to_string).collect();
        let _ = writeln!(out, "conjugate[{}],{}", coords.join(";"), num(*v));
    }
    let violation = if r.ample && !r.nef {
        Some("ample but not nef".to_string())
    } else if !r.bigness_agrees {
        Some(format!("g(0) = {} and max conjugate = {} disagree on bigness", r.g_at_origin, r.conjugate_max))
    } else {
        None
    };
    Ok(Output { text: out, violation })
}

fn grid(ctx: &Context, cmd: &Command) -> Result<Output, CliError> {
    let m = ctx.config.metric()?;
    let n = ctx.config.options.grid.unwrap_or(DEFAULT_GRID);
    if n == 0 {
        return Err(CliError::Config("grid must be positive".into()));
    }
    let rows = conjugate_grid(&m, n, &ctx.quadrature()?.conjugate)?;
    let mut out = ctx.header(cmd);
    let cols: Vec<String> = (1..=m.dim()).map(|i| format!("x{i}")).collect();
    let _ = writeln!(out, "{},conjugate,converged", cols.join(","));
    for r in rows {
        let xs: Vec<String> = r.x.to_f64().iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{},{},{}", xs.join(","), num(r.value), r.converged);
    }
    ok(out)
}

fn volume(ctx: &Context, cmd: &Command) -> Result<Output, CliError> {
    let m = ctx.config.metric()?;
    let e = volume_integral_estimate(&m, &ctx.quadrature()?)?;
    if !e.converged {
        return Err(CliError::Numerical(format!("volume integral did not converge (error {:e})", e.error)));
    }
    let mut out = ctx.header(cmd);
    out.push_str("volume,error_estimate,cells\n");
    let _ = writeln!(out, "{},{:e},{}", num(e.value), e.error, e.cells);
    let violation =
        (e.error > VOLUME_ERROR_LIMIT).then(|| format!("error estimate {:e} exceeds {VOLUME_ERROR_LIMIT:e}", e.error));
    Ok(Output { text: out, violation })
}

fn converge(ctx: &Context, cmd: &Command) -> Result<Output, CliError> {
    let m = ctx.config.metric()?;
    if ctx.lmax == 0 {
        return Err(CliError::Config("lmax must be positive".into()));
    }
    let levels: Vec<u32> = (1..=ctx.lmax).collect();
    let rows = volume_convergence_experiment(&m, &levels, ctx.budget, &ctx.quadrature()?)?;
    let mut out = ctx.header(cmd);
    out.push_str("l,log_lower,log_upper,exact,lower_estimate,upper_estimate,formula,certified\n");
    let mut violation = None;
    for r in &rows {
        let exact = r.exact.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.level,
            num(r.log_lower),
            num(r.log_upper),
            exact,
            num(r.lower_estimate),
            num(r.upper_estimate),
            num(r.formula),
            r.certified
        );
        let inside = r.exact.is_none_or(|c| {
            let log = (c as f64).ln();
            log >= r.log_lower - 1e-9 && log <= r.log_upper + 1e-9
        });
        if violation.is_none() && (r.log_lower > r.log_upper + 1e-9 || !inside) {
            violation = Some(format!("count bounds out of order at l = {}", r.level));
        }
    }
    Ok(Output { text: out, violation })
}

fn torus_samples(nvars: usize) -> usize {
    match nvars {
        0 | 1 => 4096,
        2 => 128,
        _ => 24,
    }
}

fn mahler(ctx: &Context, cmd: &Command, positional: Option<&str>) -> Result<Output, CliError> {
    let text = positional
        .or(ctx.config.polynomial.as_deref())
        .ok_or_else(|| CliError::Config("mahler needs a polynomial argument or a config polynomial".into()))?;
    let p = IntPolynomial::parse(text)?;
    if p.is_zero() {
        return Err(CliError::Config("the Mahler measure of 0 is not finite".into()));
    }
    let opts = MahlerOptions { tolerance: ctx.tolerance.min(MahlerOptions::default().tolerance), ..Default::default() };
    let measure = mahler_measure(&p, &opts)?;
    let parseval = parseval_check(&p);
    let sup = torus_sup(&p, torus_samples(p.nvars()));
    let mut out = ctx.header(cmd);
    out.push_str("polynomial,mahler,parseval_mass,unit_monomial,torus_sup\n");
    let _ = writeln!(out, "{},{},{},{},{}", p, num(measure), parseval.mass, parseval.is_unit_monomial, num(sup));
    let mass = parseval.mass as f64;
    let violation = if (parseval.numerical_mass - mass).abs() > 1e-8 * mass.max(1.0) {
        Some(format!("numerical Parseval mass {} differs from {}", parseval.numerical_mass, parseval.mass))
    } else if measure < -1e-6 {
        Some(format!("negative Mahler measure {measure}"))
    } else if sup <= 1.0 && measure > 1e-6 {
        Some(format!("torus sup {sup} at most 1 but Mahler measure {measure}"))
    } else {
        None
    };
    Ok(Output { text: out, violation })
}

fn sequence(ctx: &Context, cmd: &Command) -> Result<Output, CliError> {
    let spec = ctx.config.sequence.as_ref().ok_or_else(|| CliError::Config("sequence needs a sequence section".into()))?;
    if spec.k.is_empty() {
        return Err(CliError::Config("sequence.k is empty".into()));
    }
    let base = ctx.config.metric()?;
    let (family, limit): (Box<dyn Fn(u32) -> torvol_core::Result<MetricModel>>, MetricModel) = match spec.family {
        Family::Sharpened => {
            let b = base.clone();
            (Box::new(move |k| b.sharpened(k as f64)), MetricModel::canonical_on(base.polytope().clone()))
        }
        Family::Constant => {
            let b = base.clone();
            (Box::new(move |_| Ok(b.clone())), base)
        }
    };
    if spec.k.contains(&0) && spec.family == Family::Sharpened {
        return Err(CliError::Config("sharpened sequences need k ≥ 1".into()));
    }
    let rows = metric_sequence_experiment(&family, &limit, &spec.k, &ctx.quadrature()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let samples: Vec<Vec<f64>> = (0..spec.samples.unwrap_or(DEFAULT_SEQUENCE_SAMPLES))
        .map(|_| (0..limit.dim()).map(|_| rng.random_range(-20.0..=20.0)).collect())
        .collect();
    let mut out = ctx.header(cmd);
    out.push_str("k,distance,volume,limit_volume\n");
    for r in rows {
        let distance = r.distance.max(family(r.k)?.sampled_distance(&limit, &samples));
        let _ = writeln!(out, "{},{},{},{}", r.k, num(distance), num(r.volume), num(r.limit_volume));
    }
    ok(out)
}
