//! `topocal` command line: orbit analysis, identity checks, torus cohomology
//! and deformation runs, all reporting JSON.
//!
//! Exit codes: 0 every check passed, 1 a mathematical check failed (the
//! report says which), 2 bad configuration or input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use topocal::deform::{self, DeformationSeed, RunOptions};
use topocal::hodge::{decomposition_checks, HodgeSystem};
use topocal::orbits::{analyze, check_elliptic, model_calibration, CalibrationSpec, Kind, Params};
use topocal::scalar::C64;
use topocal::torus::identities::{identity_suite, IdentityOptions};
use topocal::torus::sample::{self, SampleShape};
use topocal::torus::EndoField;
use topocal::Error;

const DEFAULT_ELLIPTIC_TRIALS: usize = 32;
const DEFAULT_IDENTITY_TRIALS: usize = 100;
/// Sup norm of the generated deformation seed.
const SEED_AMPLITUDE: f64 = 0.1;
const FD_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Parser, Debug)]
#[command(name = "topocal", version, about = "Calibration orbits and their deformations on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Isotropy algebra, E^k dimensions and the metrical/elliptic predicates.
    Info,
    /// Exactness of the symbol sequence on sampled covectors.
    Elliptic,
    /// Randomized operator identities on trig fields (cy2 on T^4).
    Verify,
    /// Cohomology of the elliptic complex on the torus, with p-maps.
    Cohomology,
    /// Power-series deformation from a closed first-order seed.
    Deform,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ScalarMode {
    Float,
    Rational,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct RunConfig {
    #[arg(long, global = true)]
    structure: Option<String>,
    /// Real dimension (symplectic, degenerate2form).
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Quaternionic dimension (hk).
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Complex dimension (sl, cy).
    #[arg(long = "complex-dim", global = true)]
    complex_dim: Option<usize>,
    /// Frequency bound |k|_inf <= F.
    #[arg(long, global = true)]
    freq: Option<i32>,
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Parameter at which the deformed form is evaluated.
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "float")]
    scalar: ScalarMode,
    /// Closure tolerance for deform.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed field (EndoField JSON) for deform.
    #[arg(long = "in", visible_alias = "seed-file", global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

/// Either a config problem (exit 2) or a mathematical failure (exit 1).
enum Failure {
    Config(String),
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch(_)
            | Error::Json(_)
            | Error::WrongKind(_)
            | Error::Reality { .. }
            | Error::SeedNotClosed(_) => Failure::Config(e.to_string()),
            e => Failure::Math(e),
        }
    }
}

type Outcome = std::result::Result<(Value, bool), Failure>;

fn config_err<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::InvalidInput(_) => "invalid_input",
        Error::NotPositiveDefinite => "not_positive_definite",
        Error::DegenerateForm => "degenerate_form",
        Error::NonConvergent { .. } => "non_convergent",
        Error::SupportCap { .. } => "support_cap",
        Error::Reality { .. } => "reality",
        Error::SingularBlock { .. } => "singular_block",
        Error::WrongKind(_) => "wrong_kind",
        Error::NotInSubspace(_) => "not_in_subspace",
        Error::SeedNotClosed(_) => "seed_not_closed",
        Error::ObstructionMismatch { .. } => "obstruction_mismatch",
        Error::AtOrder { source, .. } => error_kind(source),
        Error::Json(_) => "json",
    }
}

fn failure_record(e: &Error) -> Value {
    let order = match e {
        Error::AtOrder { order, .. } => Some(*order),
        _ => None,
    };
    json!({ "kind": error_kind(e), "order": order, "message": e.to_string() })
}

impl RunConfig {
    fn spec(&self) -> std::result::Result<CalibrationSpec, Failure> {
        let Some(name) = &self.structure else {
            return config_err("--structure is required");
        };
        let kind: Kind = name.parse()?;
        let params = Params { dim: self.dim, complex_dim: self.complex_dim, m: self.m };
        Ok(model_calibration(kind, &params)?)
    }

    fn seed(&self, command: &str) -> std::result::Result<u64, Failure> {
        self.seed.map_or_else(|| config_err(format!("{command} is randomized: --seed is required")), Ok)
    }

    fn float_only(&self, command: &str) -> std::result::Result<(), Failure> {
        if self.scalar == ScalarMode::Rational {
            return config_err(format!("{command} runs in floating point only"));
        }
        Ok(())
    }

    fn freq(&self, default: i32) -> std::result::Result<i32, Failure> {
        match self.freq.unwrap_or(default) {
            f if (0..=8).contains(&f) => Ok(f),
            f => config_err(format!("--freq {f} outside 0..=8")),
        }
    }
}

fn cmd_info(cfg: &RunConfig) -> Outcome {
    cfg.float_only("info")?;
    let spec = cfg.spec()?;
    let trials = cfg.trials.unwrap_or(DEFAULT_ELLIPTIC_TRIALS);
    let report = analyze(&spec, trials, cfg.seed.unwrap_or(0)).report();
    Ok((serde_json::to_value(report).expect("serializable"), true))
}

fn cmd_elliptic(cfg: &RunConfig) -> Outcome {
    cfg.float_only("elliptic")?;
    let spec = cfg.spec()?;
    let seed = cfg.seed("elliptic")?;
    let v = check_elliptic(&spec, cfg.trials.unwrap_or(DEFAULT_ELLIPTIC_TRIALS), seed);
    let pass = v.elliptic;
    Ok((serde_json::to_value(v).expect("serializable"), pass))
}

fn cmd_verify(cfg: &RunConfig) -> Outcome {
    let opts = IdentityOptions {
        trials: cfg.trials.unwrap_or(DEFAULT_IDENTITY_TRIALS),
        seed: cfg.seed("verify")?,
        max_freq: cfg.freq(2)?,
        rational: cfg.scalar == ScalarMode::Rational,
    };
    let report = identity_suite(&opts)?;
    let pass = report.pass;
    Ok((serde_json::to_value(report).expect("serializable"), pass))
}

fn cmd_cohomology(cfg: &RunConfig) -> Outcome {
    cfg.float_only("cohomology")?;
    let spec = cfg.spec()?;
    let sys = HodgeSystem::build(&spec, spec.dim, cfg.freq(1)?)?;
    let report = sys.cohomology();
    let decompositions = decomposition_checks(&spec)?;
    let pass = report.topological() && decompositions.iter().all(|c| c.pass);
    let mut v = serde_json::to_value(&report).expect("serializable");
    v["topological"] = json!(report.topological());
    v["decompositions"] = serde_json::to_value(decompositions).expect("serializable");
    Ok((v, pass))
}

/// A closed seed from the rng: a harmonic constant part plus Dv for a
/// sparse two-mode vector field v.
fn generated_seed(sys: &HodgeSystem, seed: u64, max_freq: i32) -> std::result::Result<DeformationSeed, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = sys.fibre_dim(1);
    let coeffs: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let harmonic = DeformationSeed::from_harmonic(sys, &coeffs)?;
    let shape = SampleShape { torus_dim: sys.torus_dim, modes: 2, max_freq: max_freq.max(1), include_zero: false, terms: None };
    let v = sample::vector_field::<C64, _>(&mut rng, &shape);
    let exact = DeformationSeed::exact(sys, &v)?;
    let normalize = |s: DeformationSeed| {
        let m = s.a1.max_abs();
        if m > 0.0 {
            s.scaled(SEED_AMPLITUDE / m)
        } else {
            s
        }
    };
    Ok(normalize(harmonic).plus(&normalize(exact)))
}

fn cmd_deform(cfg: &RunConfig) -> Outcome {
    cfg.float_only("deform")?;
    let spec = cfg.spec()?;
    let freq = cfg.freq(1)?;
    let sys = HodgeSystem::build(&spec, spec.dim, freq)?;
    let seed = match &cfg.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let a1 = EndoField::<C64>::from_json_str(&text)?;
            DeformationSeed::new(&sys, a1, false)?
        }
        None => generated_seed(&sys, cfg.seed("deform without --in")?, freq)?,
    };
    let order = cfg.order.unwrap_or(4);
    let mut opts = RunOptions::default();
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return config_err("--tol must be positive");
        }
        opts.tol = tol;
    }
    if order == 0 || order > opts.max_order {
        return config_err(format!("--order must be in 1..={}", opts.max_order));
    }
    let t = cfg.t.unwrap_or(0.1);
    if !t.is_finite() {
        return config_err("--t must be finite");
    }
    let result = deform::run(&sys, &seed, order, &opts)?;
    let report = result.report();
    let mut v = serde_json::to_value(&report).expect("serializable");
    let mut pass = report.closed && report.majorant.holds;
    if report.obstruction.is_none() {
        let fd = deform::fd_check(&result, &FD_STEPS)?;
        let slope = deform::slope_fit(&result)?;
        let residual_at_t = deform::closure_residual(&result, t)?;
        pass &= fd.pass && slope.pass;
        v["fd_check"] = serde_json::to_value(fd).expect("serializable");
        v["slope_fit"] = serde_json::to_value(slope).expect("serializable");
        v["closure_at_t"] = json!({ "t": t, "residual": residual_at_t });
    }
    v["seed_field"] = serde_json::to_value(seed.a1.to_json()).expect("serializable");
    Ok((v, pass))
}

fn write(cfg: &RunConfig, doc: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable");
    text.push('\n');
    match &cfg.out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.config;
    let outcome = match cli.command {
        Command::Info => cmd_info(cfg),
        Command::Elliptic => cmd_elliptic(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Cohomology => cmd_cohomology(cfg),
        Command::Deform => cmd_deform(cfg),
    };
    let mut doc = json!({
        "tool": "topocal",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
        "config": cfg,
    });
    let code = match outcome {
        Ok((result, pass)) => {
            doc["pass"] = json!(pass);
            doc["result"] = result;
            u8::from(!pass)
        }
        Err(Failure::Math(e)) => {
            doc["pass"] = json!(false);
            doc["failure"] = failure_record(&e);
            1
        }
        Err(Failure::Config(msg)) => {
            eprintln!("topocal: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write(cfg, &doc) {
        eprintln!("topocal: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
