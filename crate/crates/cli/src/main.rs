//! Command-line front end: integrate magnetic trajectories, verify
//! closed-form families, and run seeded Killing-field checks.
//!
//! Exit codes: 0 pass, 1 check failed, 2 usage error, 3 integrator failure,
//! 4 unknown family.

// Negated comparisons reject NaN flag values along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use magheis::closedform::{Family, FamilySpec, Variant};
use magheis::dynamics::{
    first_integral, integrate, speed, CurveState, IntegratorConfig, Method, Trajectory,
};
use magheis::geometry::{CoordPoint, CoordVelocity, KillingId, Metric, ModelParams};
use magheis::rng::SplitMix64;
use magheis::verify::{check_family, DEFAULT_GRID, DEFAULT_TOL_ANALYTIC};
use magheis::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTEGRATOR: u8 = 3;
const EXIT_UNKNOWN_FAMILY: u8 = 4;

/// Default output directory; overridden by this environment variable only.
const OUT_DIR_ENV: &str = "MAGHEIS_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "magheis",
    version,
    about = "Killing magnetic curves in the non-flat Lorentzian-Heisenberg spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a V-magnetic trajectory and write it as CSV.
    Integrate(IntegrateArgs),
    /// Verify a closed-form family against its governing system.
    Verify(VerifyArgs),
    /// Check the Killing property of the basis fields at random points.
    KillingCheck(KillingCheckArgs),
}

#[derive(Args)]
struct IntegrateArgs {
    /// Metric: g1 or g2.
    #[arg(long)]
    metric: String,
    /// Killing field: V1..V4.
    #[arg(long)]
    killing: String,
    /// Metric parameter lambda > 0.
    #[arg(long)]
    lambda: f64,
    /// Initial state x,y,z,xp,yp,zp.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Vec<f64>,
    /// Final parameter value.
    #[arg(long = "t-end")]
    t_end: f64,
    /// Initial parameter value.
    #[arg(long = "t-start", default_value_t = 0.0)]
    t_start: f64,
    /// Stepper: rk45 (adaptive) or rk4 (fixed).
    #[arg(long, default_value = "rk45")]
    method: String,
    /// Absolute and relative tolerance of rk45.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Fixed step of rk4.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// CSV output path; defaults to `trajectory-<metric>-<killing>.csv` in
    /// the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Family name, e.g. g2-v4-circular.
    #[arg(long)]
    family: String,
    /// Variant: as-printed or derivation.
    #[arg(long, default_value = "derivation")]
    variant: String,
    /// Metric parameter lambda > 0.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// First-integral constant where the family leaves it free.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c: f64,
    /// Constants k1..k5 (missing entries are zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<f64>>,
    /// z offset of the circular family.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c1: f64,
    #[arg(long = "t-start", default_value_t = 0.0)]
    t_start: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    samples: usize,
    /// Verification tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL_ANALYTIC)]
    tol: f64,
}

#[derive(Args)]
struct KillingCheckArgs {
    /// Metric: g1 or g2.
    #[arg(long)]
    metric: String,
    /// Metric parameter lambda > 0.
    #[arg(long)]
    lambda: f64,
    /// Number of random points in [-2, 2]^3.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Seed of the point stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    h: f64,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Integrate(args) => cmd_integrate(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::KillingCheck(args) => cmd_killing_check(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::StepUnderflow { .. } | Error::NonFinite { .. } => EXIT_INTEGRATOR,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn parse_metric(s: &str) -> Result<Metric, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "g1" => Ok(Metric::G1),
        "g2" => Ok(Metric::G2),
        other => Err(CliError::usage(format!(
            "unknown metric '{other}', expected g1 or g2"
        ))),
    }
}

fn parse_killing(s: &str) -> Result<KillingId, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "v1" => Ok(KillingId::V1),
        "v2" => Ok(KillingId::V2),
        "v3" => Ok(KillingId::V3),
        "v4" => Ok(KillingId::V4),
        other => Err(CliError::usage(format!(
            "unknown Killing field '{other}', expected V1..V4"
        ))),
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// 17 significant digits, enough to reproduce the f64 bit pattern.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct IntegrateSummary<'a> {
    metric: String,
    killing: String,
    lambda: f64,
    t_start: f64,
    t_end: f64,
    method: &'a str,
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    dt: Option<f64>,
    steps_accepted: usize,
    steps_rejected: usize,
    speed_drift: f64,
    first_integral_drift: f64,
    csv_path: String,
}

fn cmd_integrate(args: &IntegrateArgs) -> Result<u8, CliError> {
    let metric = parse_metric(&args.metric)?;
    let killing = parse_killing(&args.killing)?;
    let p = ModelParams::new(metric, args.lambda)?;
    if args.init.len() != 6 {
        return Err(CliError::usage("--init needs six values x,y,z,xp,yp,zp"));
    }
    let init = CurveState::new(
        args.t_start,
        CoordPoint::new(args.init[0], args.init[1], args.init[2]),
        CoordVelocity::new(args.init[3], args.init[4], args.init[5]),
    );
    let cfg = match args.method.to_ascii_lowercase().as_str() {
        "rk45" => IntegratorConfig {
            method: Method::EmbeddedRk45 {
                abs_tol: args.tol,
                rel_tol: args.tol,
                dt_min: 1e-12,
                dt_max: 0.1,
            },
            t_end: args.t_end,
        },
        "rk4" => IntegratorConfig::rk4(args.dt, args.t_end),
        other => {
            return Err(CliError::usage(format!(
                "unknown method '{other}', expected rk4 or rk45"
            )))
        }
    };
    let traj = integrate(&p, killing, &init, &cfg)?;

    let path = args
        .out
        .clone()
        .unwrap_or_else(|| out_dir().join(format!("trajectory-{metric}-{killing}.csv")));
    write_csv(&path, &traj, killing).map_err(|e| CliError {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
    })?;

    let s0 = speed(&p, traj.first());
    let i0 = first_integral(&p, killing, traj.first());
    let mut speed_drift = 0.0f64;
    let mut integral_drift = 0.0f64;
    for s in &traj.samples {
        speed_drift = speed_drift.max((speed(&p, s) - s0).abs());
        integral_drift = integral_drift.max((first_integral(&p, killing, s) - i0).abs());
    }
    let summary = IntegrateSummary {
        metric: metric.to_string(),
        killing: killing.to_string(),
        lambda: args.lambda,
        t_start: args.t_start,
        t_end: args.t_end,
        method: if traj.meta.method == "rk4" {
            "rk4"
        } else {
            "rk45"
        },
        abs_tol: traj.meta.abs_tol,
        rel_tol: traj.meta.rel_tol,
        dt: traj.meta.dt,
        steps_accepted: traj.meta.steps_accepted,
        steps_rejected: traj.meta.steps_rejected,
        speed_drift,
        first_integral_drift: integral_drift,
        csv_path: path.display().to_string(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(0)
}

fn write_csv(path: &PathBuf, traj: &Trajectory<f64>, killing: KillingId) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut out = String::new();
    out.push_str("t,x,y,z,xp,yp,zp,speed,first_integral\n");
    let p = &traj.params;
    for s in &traj.samples {
        let row = [
            s.t,
            s.pos.x,
            s.pos.y,
            s.pos.z,
            s.vel.dx,
            s.vel.dy,
            s.vel.dz,
            speed(p, s),
            first_integral(p, killing, s),
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let family = Family::parse(&args.family).ok_or(CliError {
        code: EXIT_UNKNOWN_FAMILY,
        message: format!(
            "unknown family '{}'; known: {}",
            args.family,
            Family::ALL.map(|f| f.name()).join(", ")
        ),
    })?;
    let variant = Variant::parse(&args.variant)
        .ok_or_else(|| CliError::usage("variant must be as-printed or derivation"))?;
    let mut k = [0.0f64; 5];
    if let Some(values) = &args.k {
        for (slot, v) in k.iter_mut().zip(values.iter()) {
            *slot = *v;
        }
    }
    let spec = FamilySpec::new(family, variant, args.lambda, args.c, k, args.c1);
    if args.samples < 2 || !(args.t_end > args.t_start) {
        return Err(CliError::usage(
            "need --samples >= 2 and --t-end > --t-start",
        ));
    }
    let report = check_family(&spec, args.t_start, args.t_end, args.samples, args.tol)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(if report.pass { 0 } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct KillingCheckReport {
    metric: String,
    lambda: f64,
    samples: usize,
    seed: u64,
    h: f64,
    tol: f64,
    max_residual: [(String, f64); 4],
    pass: bool,
}

fn cmd_killing_check(args: &KillingCheckArgs) -> Result<u8, CliError> {
    let metric = parse_metric(&args.metric)?;
    let p = ModelParams::new(metric, args.lambda)?;
    let mut rng = SplitMix64::new(args.seed);
    let mut maxima = [0.0f64; 4];
    for _ in 0..args.samples {
        let pt = CoordPoint::new(
            rng.uniform(-2.0, 2.0),
            rng.uniform(-2.0, 2.0),
            rng.uniform(-2.0, 2.0),
        );
        for (i, k) in KillingId::ALL.into_iter().enumerate() {
            let r = p.killing_residual(k, &pt, args.h)?;
            maxima[i] = maxima[i].max(r);
        }
    }
    let pass = maxima.iter().all(|&r| r <= args.tol);
    let report = KillingCheckReport {
        metric: metric.to_string(),
        lambda: args.lambda,
        samples: args.samples,
        seed: args.seed,
        h: args.h,
        tol: args.tol,
        max_residual: [
            ("V1".into(), maxima[0]),
            ("V2".into(), maxima[1]),
            ("V3".into(), maxima[2]),
            ("V4".into(), maxima[3]),
        ],
        pass,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(if pass { 0 } else { EXIT_FAIL })
}
