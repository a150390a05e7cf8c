//! Batch front-end: generate q-commuting instances, build dilations and
//! lifts, verify certificates, and emit machine-readable reports.
//!
//! Exit codes: 0 when every check passes, 1 when at least one check fails,
//! 2 on invalid input or a violated hypothesis (the diagnostic names the
//! violated bound).

mod formats;
mod suite;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlift_core::dilation::{coisometric_extension, schaeffer_isometric, unitary_dilation};
use qlift_core::lifting::{
    adjoint_lift_q, coiso_lift_q, isometric_lift_q, q_coextension, q_intertwining_coextension,
    qcommutant_lift, unitary_q_lift, LiftResult, QPair,
};
use qlift_core::linalg::{operator_norm, Scalar, Tolerances};
use qlift_core::qalgebra::{example_pair_jordan, hardy_pair_truncated, random_qpair};
use qlift_core::verify::{check_dilation_identity, check_lift, check_q_commuting};

use formats::{
    pair_to_scalar, parse_complex, read_input, scalar_to_pair, to_json, write_output,
    IntertwiningFile, MatrixFile, PairFile, Report,
};

#[derive(Parser)]
#[command(
    name = "qlift",
    version,
    about = "q-commuting dilations, co-extensions and commutant lifting for matrix contractions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the residual tolerance (also settable via QLIFT_TOL_RESIDUAL).
    #[arg(long, global = true)]
    tol_residual: Option<f64>,

    /// Override the relative rank cutoff.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,

    /// Override the PSD slack.
    #[arg(long, global = true)]
    tol_psd: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenFamily {
    Jordan,
    Hardy,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DilateKind {
    Isometric,
    Coisometric,
    Unitary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LiftEngineArg {
    Isometric,
    Coiso,
    Commutant,
    Adjoint,
    Unitary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoextendMode {
    Commuting,
    Intertwining,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a q-commuting pair and write it as a pair file.
    Gen(GenArgs),
    /// Build a truncated dilation of a contraction and verify it.
    Dilate(DilateArgs),
    /// Run a lifting engine on a q-commuting pair.
    Lift(LiftArgs),
    /// Build a q-commuting (or q-intertwining) co-extension triple.
    Coextend(CoextendArgs),
    /// Re-check the q-commutation identity of a pair file.
    Verify(VerifyArgs),
    /// Run the full verification suite.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: GenFamily,
    /// Scalar q as "re,im", "r@degrees", or a bare real.
    #[arg(long)]
    q: Option<String>,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target norm of T2 for the random family.
    #[arg(long, default_value_t = 0.8)]
    t2_norm: f64,
    /// Jordan family scalars.
    #[arg(long, default_value = "1")]
    a: String,
    #[arg(long, default_value = "0.5")]
    b: String,
    #[arg(long, default_value = "0.25")]
    d: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct DilateArgs {
    #[arg(long, value_enum)]
    kind: DilateKind,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Matrix file with the contraction ("-" for stdin).
    #[arg(long)]
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
    /// Also write the dilation matrix to this path.
    #[arg(long)]
    emit_operator: Option<String>,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long, value_enum)]
    engine: LiftEngineArg,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Pair file ("-" for stdin). For the adjoint engine the file is read
    /// as (T, X, q) with hypothesis q T X = X T.
    #[arg(long)]
    input: String,
    /// Override the scalar q from the pair file.
    #[arg(long)]
    q: Option<String>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct CoextendArgs {
    #[arg(long, value_enum, default_value = "commuting")]
    mode: CoextendMode,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 3)]
    copies: usize,
    /// Pair file (commuting mode) or intertwining file with "A".
    #[arg(long)]
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

/// A failure with its process exit code.
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<qlift_core::Error> for Failure {
    fn from(e: qlift_core::Error) -> Self {
        Failure::invalid(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tol = Tolerances::default();
    if let Ok(v) = std::env::var("QLIFT_TOL_RESIDUAL") {
        match v.parse() {
            Ok(parsed) => tol.residual_tol = parsed,
            Err(_) => {
                eprintln!("error: QLIFT_TOL_RESIDUAL={v} is not a number");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(v) = cli.tol_residual {
        tol.residual_tol = v;
    }
    if let Some(v) = cli.tol_rank {
        tol.rank_tol = v;
    }
    if let Some(v) = cli.tol_psd {
        tol.psd_tol = v;
    }
    if let Err(e) = tol.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    match run(cli.command, &tol) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command, tol: &Tolerances) -> Result<bool, Failure> {
    match command {
        Command::Gen(args) => run_gen(args, tol),
        Command::Dilate(args) => run_dilate(args, tol),
        Command::Lift(args) => run_lift(args, tol),
        Command::Coextend(args) => run_coextend(args, tol),
        Command::Verify(args) => run_verify(args, tol),
        Command::Suite(args) => run_suite_cmd(args, tol),
    }
}

fn parse_q(text: &str) -> Result<Scalar, Failure> {
    parse_complex(text).map_err(Failure::invalid)
}

fn read_pair(path: &str, q_override: Option<&str>, tol: &Tolerances) -> Result<QPair, Failure> {
    let raw = read_input(path).map_err(Failure::invalid)?;
    let file: PairFile =
        serde_json::from_str(&raw).map_err(|e| Failure::invalid(format!("parsing {path}: {e}")))?;
    let t1 = file.t1.to_op().map_err(Failure::invalid)?;
    let t2 = file.t2.to_op().map_err(Failure::invalid)?;
    let q = match q_override {
        Some(text) => parse_q(text)?,
        None => pair_to_scalar(file.q),
    };
    Ok(QPair::new(t1, t2, q, tol)?)
}

fn write_report(path: &str, report: &Report) -> Result<bool, Failure> {
    let json = to_json(report).map_err(Failure::invalid)?;
    write_output(path, &json).map_err(Failure::invalid)?;
    Ok(report.passed())
}

fn run_gen(args: GenArgs, tol: &Tolerances) -> Result<bool, Failure> {
    let pair = match args.family {
        GenFamily::Jordan => {
            let q = parse_q(args.q.as_deref().unwrap_or("1"))?;
            let a = parse_q(&args.a)?;
            let b = parse_q(&args.b)?;
            let d = parse_q(&args.d)?;
            example_pair_jordan(a, b, d, q, tol)?.pair
        }
        GenFamily::Hardy => {
            let q = parse_q(args.q.as_deref().unwrap_or("1"))?;
            hardy_pair_truncated(q, args.dim, tol)?
        }
        GenFamily::Random => {
            if args.dim < 2 {
                return Err(Failure::invalid("random pairs need --dim at least 2"));
            }
            random_qpair(args.dim, args.seed, args.t2_norm, tol)?.pair
        }
    };
    let file = PairFile {
        t1: MatrixFile::from_op(&pair.t1),
        t2: MatrixFile::from_op(&pair.t2),
        q: scalar_to_pair(pair.q),
    };
    let json = to_json(&file).map_err(Failure::invalid)?;
    write_output(&args.out, &json).map_err(Failure::invalid)?;
    Ok(true)
}

fn run_dilate(args: DilateArgs, tol: &Tolerances) -> Result<bool, Failure> {
    let raw = read_input(&args.input).map_err(Failure::invalid)?;
    let file: MatrixFile =
        serde_json::from_str(&raw).map_err(|e| Failure::invalid(format!("parsing input: {e}")))?;
    let t = file.to_op().map_err(Failure::invalid)?;
    let (bundle, kind_name) = match args.kind {
        DilateKind::Isometric => (schaeffer_isometric(&t, args.depth, tol)?, "isometric"),
        DilateKind::Coisometric => (coisometric_extension(&t, args.depth, tol)?, "co-isometric"),
        DilateKind::Unitary => (unitary_dilation(&t, args.depth, tol)?, "unitary"),
    };
    let cert = check_dilation_identity(&bundle, args.depth.min(bundle.chain.levels), tol)?;

    let config = serde_json::json!({
        "command": "dilate",
        "kind": kind_name,
        "depth": args.depth,
        "input": args.input,
    });
    let mut report = Report::new("dilation", config, tol);
    report.checks = cert.checks;
    report.norms.insert("T".into(), operator_norm(&t));
    report
        .norms
        .insert("dilation".into(), operator_norm(&bundle.op));
    if let Some(path) = args.emit_operator {
        let json = to_json(&MatrixFile::from_op(&bundle.op)).map_err(Failure::invalid)?;
        write_output(&path, &json).map_err(Failure::invalid)?;
    }
    write_report(&args.out, &report)
}

fn lift_report(
    name: &str,
    config: serde_json::Value,
    lift: &LiftResult,
    pair_norms: (f64, f64),
    tol: &Tolerances,
) -> Report {
    let mut report = Report::new(name, config, tol);
    let cert = check_lift(lift, tol);
    report.checks = cert.checks;
    report.norms.insert("T1".into(), pair_norms.0);
    report.norms.insert("T2".into(), pair_norms.1);
    report
        .norms
        .insert("achieved".into(), lift.norm_claim.achieved);
    report.norms.insert("target".into(), lift.norm_claim.target);
    report.condition_numbers = cert.condition_numbers;
    report
}

fn run_lift(args: LiftArgs, tol: &Tolerances) -> Result<bool, Failure> {
    let engine_name = match args.engine {
        LiftEngineArg::Isometric => "isometric_lift_q",
        LiftEngineArg::Coiso => "coiso_lift_q",
        LiftEngineArg::Commutant => "qcommutant_lift",
        LiftEngineArg::Adjoint => "adjoint_lift_q",
        LiftEngineArg::Unitary => "unitary_q_lift",
    };
    let config = serde_json::json!({
        "command": "lift",
        "engine": engine_name,
        "depth": args.depth,
        "input": args.input,
        "q_override": args.q,
    });

    let report = match args.engine {
        LiftEngineArg::Adjoint => {
            // The adjoint engine takes raw (T, X, q) with q T X = X T, so
            // bypass the q-commuting validation of QPair.
            let raw = read_input(&args.input).map_err(Failure::invalid)?;
            let file: PairFile = serde_json::from_str(&raw)
                .map_err(|e| Failure::invalid(format!("parsing input: {e}")))?;
            let t = file.t1.to_op().map_err(Failure::invalid)?;
            let x = file.t2.to_op().map_err(Failure::invalid)?;
            let q = match args.q.as_deref() {
                Some(text) => parse_q(text)?,
                None => pair_to_scalar(file.q),
            };
            let lift = adjoint_lift_q(&t, &x, q, args.depth, tol)?;
            let norms = (operator_norm(&t), operator_norm(&x));
            lift_report(engine_name, config, &lift, norms, tol)
        }
        _ => {
            let pair = read_pair(&args.input, args.q.as_deref(), tol)?;
            let norms = (operator_norm(&pair.t1), operator_norm(&pair.t2));
            let lift = match args.engine {
                LiftEngineArg::Isometric => isometric_lift_q(&pair, args.depth, tol)?,
                LiftEngineArg::Coiso => coiso_lift_q(&pair, args.depth, tol)?,
                LiftEngineArg::Commutant => qcommutant_lift(&pair, args.depth, tol)?,
                LiftEngineArg::Unitary => unitary_q_lift(&pair, args.depth, tol)?,
                LiftEngineArg::Adjoint => unreachable!(),
            };
            lift_report(engine_name, config, &lift, norms, tol)
        }
    };
    write_report(&args.out, &report)
}

fn run_coextend(args: CoextendArgs, tol: &Tolerances) -> Result<bool, Failure> {
    match args.mode {
        CoextendMode::Commuting => {
            let pair = read_pair(&args.input, None, tol)?;
            let triple = q_coextension(&pair, args.depth, args.copies, tol)?;
            let config = serde_json::json!({
                "command": "coextend",
                "mode": "commuting",
                "depth": args.depth,
                "copies": args.copies,
                "input": args.input,
            });
            let mut report = Report::new("q_coextension", config, tol);
            report.checks = triple.certificate.checks.clone();
            report.norms.insert("T1".into(), operator_norm(&pair.t1));
            report.norms.insert("T2".into(), operator_norm(&pair.t2));
            report.condition_numbers = triple.certificate.condition_numbers.clone();
            write_report(&args.out, &report)
        }
        CoextendMode::Intertwining => {
            let raw = read_input(&args.input).map_err(Failure::invalid)?;
            let file: IntertwiningFile = serde_json::from_str(&raw)
                .map_err(|e| Failure::invalid(format!("parsing input: {e}")))?;
            let a = file.a.to_op().map_err(Failure::invalid)?;
            let t1 = file.t1.to_op().map_err(Failure::invalid)?;
            let t2 = file.t2.to_op().map_err(Failure::invalid)?;
            let q = pair_to_scalar(file.q);
            let built = q_intertwining_coextension(&a, &t1, &t2, q, args.depth, args.copies, tol)?;
            let config = serde_json::json!({
                "command": "coextend",
                "mode": "intertwining",
                "depth": args.depth,
                "copies": args.copies,
                "input": args.input,
            });
            let mut report = Report::new("q_intertwining_coextension", config, tol);
            report.checks = built.certificate.checks.clone();
            report.norms.insert("A".into(), operator_norm(&a));
            report.norms.insert("T1".into(), operator_norm(&t1));
            report.norms.insert("T2".into(), operator_norm(&t2));
            report.condition_numbers = built.certificate.condition_numbers.clone();
            write_report(&args.out, &report)
        }
    }
}

fn run_verify(args: VerifyArgs, tol: &Tolerances) -> Result<bool, Failure> {
    let raw = read_input(&args.input).map_err(Failure::invalid)?;
    let file: PairFile =
        serde_json::from_str(&raw).map_err(|e| Failure::invalid(format!("parsing input: {e}")))?;
    let t1 = file.t1.to_op().map_err(Failure::invalid)?;
    let t2 = file.t2.to_op().map_err(Failure::invalid)?;
    let q = pair_to_scalar(file.q);
    let cert = check_q_commuting(&t1, &t2, q, tol)?;
    let config = serde_json::json!({
        "command": "verify",
        "input": args.input,
    });
    let mut report = Report::new("check_q_commuting", config, tol);
    report.checks = cert.checks;
    report.norms.insert("T1".into(), operator_norm(&t1));
    report.norms.insert("T2".into(), operator_norm(&t2));
    write_report(&args.out, &report)
}

fn run_suite_cmd(args: SuiteArgs, tol: &Tolerances) -> Result<bool, Failure> {
    let checks = suite::run_suite(args.seed, tol)?;
    for chk in &checks {
        let status = if chk.pass { "PASS" } else { "FAIL" };
        eprintln!("[{status}] {} (residual {:.3e})", chk.label, chk.residual);
    }
    let config = serde_json::json!({
        "command": "suite",
        "seed": args.seed,
    });
    let mut report = Report::new("suite", config, tol);
    report.checks = checks;
    report.norms = BTreeMap::new();
    write_report(&args.out, &report)
}
