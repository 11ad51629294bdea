//! `horizeta`: run verification suites and print JSON or text reports.
//!
//! Exit status: 0 pass, 1 mathematical failure, 2 usage or domain error,
//! 3 resource limit.

mod report;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use horizeta_core::arith::primes_up_to;
use horizeta_core::elliptic::{self, Curve};
use horizeta_core::strata::{self, OpenSubschemeSpec};
use horizeta_core::{characters, gm, Certificate, Error};
use log::info;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::report::VerificationReport;

/// Largest `p^D - 1` for the cyclotomic product in `gm local`.
const MAX_CYCLOTOMIC_RANGE: u64 = 10_000_000;
/// Largest field size in the elliptic enumeration sweeps.
const MAX_ELLIPTIC_FIELD: u64 = 1_000_000;
const USAGE_EXIT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "horizeta", version, about = "Verify horizontal factorizations of Hasse-Weil zeta functions")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; takes precedence over the ZH_THREADS environment variable.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The multiplicative group.
    Gm {
        #[command(subcommand)]
        command: GmCommand,
    },
    /// Dirichlet characters.
    Chars {
        #[command(subcommand)]
        command: CharsCommand,
    },
    /// Elliptic curves y^2 = x^3 + ax + b.
    Elliptic {
        #[command(subcommand)]
        command: EllipticCommand,
    },
    /// Open subschemes of projective space.
    Strata {
        #[command(subcommand)]
        command: StrataCommand,
    },
    /// Re-render a JSON report from a file or standard input.
    Report {
        /// Report file; standard input when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GmCommand {
    /// Point partition by order and the cyclotomic product at one prime.
    Local {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        max_degree: u32,
    },
    /// Truncated global products against zeta(s-1)/zeta(s).
    Global {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        prime_bound: u64,
    },
}

#[derive(Debug, Subcommand)]
enum CharsCommand {
    /// Regrouping of prod_chi (1 - chi(p) T) by residue degree, over n <= n-max and p <= prime-bound.
    Eq7 {
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        prime_bound: u64,
    },
}

#[derive(Debug, Subcommand)]
enum EllipticCommand {
    /// Torsion partition and orbit factorization of one curve at one prime.
    Local {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        max_degree: u32,
    },
    /// Both checks over a curve list at every good prime up to a bound.
    Corpus {
        /// One curve per line as `a b`; the built-in corpus when omitted.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        prime_bound: u64,
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
    },
}

#[derive(Debug, Subcommand)]
enum StrataCommand {
    /// Stratification and per-stratum orbit checks over F_{p^d}.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        degree: u32,
    },
}

/// Why a command stopped before producing certificates.
enum Stop {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parse(_) | Error::Pole(_) => Stop::Usage(e.to_string()),
            other => Stop::Engine(other),
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Stop> {
    std::fs::read_to_string(path).map_err(|e| Stop::Usage(format!("cannot read {}: {e}", path.display())))
}

fn params(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map,
        _ => Map::new(),
    }
}

fn gm_local(p: u64, max_degree: u32) -> Result<Vec<Certificate>, Stop> {
    let partition = gm::verify_gm_local_partition(p, max_degree)?;
    let range = (p as u128).checked_pow(max_degree).map(|q| q - 1).unwrap_or(u128::MAX);
    if range > MAX_CYCLOTOMIC_RANGE as u128 {
        return Err(Stop::Engine(Error::Resource(format!(
            "cyclotomic product over n <= {range} exceeds {MAX_CYCLOTOMIC_RANGE}"
        ))));
    }
    let product = gm::verify_gm_cyclotomic_factorization(p, max_degree, range as u64)?;
    Ok(vec![partition, product])
}

fn chars_sweep(n_max: u64, prime_bound: u64) -> Result<Vec<Certificate>, Stop> {
    let primes = primes_up_to(prime_bound);
    let pairs: Vec<(u64, u64)> = (1..=n_max)
        .flat_map(|n| primes.iter().filter(move |&&p| n % p != 0).map(move |&p| (n, p)))
        .collect();
    info!("character regrouping over {} pairs", pairs.len());
    let certs: Result<Vec<_>, Error> =
        pairs.par_iter().map(|&(n, p)| characters::verify_character_regrouping(n, p)).collect();
    Ok(certs?)
}

fn elliptic_checks(curve: &Curve, p: u64, max_degree: u32) -> Result<Vec<Certificate>, Error> {
    let mut certs = Vec::new();
    let mut q = 1u64;
    for nu in 1..=max_degree {
        q = q.saturating_mul(p);
        if q > MAX_ELLIPTIC_FIELD {
            break;
        }
        certs.push(elliptic::verify_torsion_partition(curve, p, nu)?);
    }
    certs.push(elliptic::verify_torsion_factorization(curve, p, max_degree)?);
    Ok(certs)
}

fn elliptic_corpus(curves: &[Curve], prime_bound: u64, max_degree: u32) -> Result<Vec<Certificate>, Stop> {
    let jobs: Vec<(&Curve, u64)> = curves
        .iter()
        .flat_map(|c| primes_up_to(prime_bound).into_iter().filter(|&p| c.is_good(p)).map(move |p| (c, p)))
        .collect();
    info!("elliptic corpus: {} curves, {} (curve, prime) jobs", curves.len(), jobs.len());
    let per_job: Result<Vec<Vec<Certificate>>, Error> =
        jobs.par_iter().map(|&(c, p)| elliptic_checks(c, p, max_degree)).collect();
    Ok(per_job?.into_iter().flatten().collect())
}

fn strata_verify(spec: &OpenSubschemeSpec, p: u64, d: u32) -> Result<Vec<Certificate>, Stop> {
    Ok(vec![strata::verify_stratification(spec, p, d)?, strata::verify_all_stratum_orbits(spec, p, d)?])
}

/// Task id, parameters, and either certificates or the engine error that
/// stopped the run.
type RunOutcome = (String, Map<String, Value>, Result<Vec<Certificate>, Error>);

fn run(command: Command) -> Result<RunOutcome, Stop> {
    let (task, params, outcome) = match command {
        Command::Gm { command: GmCommand::Local { prime, max_degree } } => {
            ("gm.local", json!({ "prime": prime, "max_degree": max_degree }), gm_local(prime, max_degree))
        }
        Command::Gm { command: GmCommand::Global { s, n_max, prime_bound } } => (
            "gm.global",
            json!({ "s": s, "n_max": n_max, "prime_bound": prime_bound }),
            gm::verify_gm_global(s, n_max, prime_bound).map(|r| vec![r.certificate]).map_err(Stop::from),
        ),
        Command::Chars { command: CharsCommand::Eq7 { n_max, prime_bound } } => (
            "chars.regrouping",
            json!({ "n_max": n_max, "prime_bound": prime_bound }),
            chars_sweep(n_max, prime_bound),
        ),
        Command::Elliptic { command: EllipticCommand::Local { a, b, prime, max_degree } } => {
            let curve = Curve::new(a, b)?;
            (
                "elliptic.local",
                json!({ "a": a, "b": b, "prime": prime, "max_degree": max_degree }),
                elliptic_checks(&curve, prime, max_degree).map_err(Stop::from),
            )
        }
        Command::Elliptic { command: EllipticCommand::Corpus { file, prime_bound, max_degree } } => {
            let curves = match &file {
                Some(path) => elliptic::parse_curve_corpus(&read_file(path)?)?,
                None => elliptic::standard_corpus(),
            };
            let source = file.as_ref().map_or("built-in".to_string(), |p| p.display().to_string());
            (
                "elliptic.corpus",
                json!({ "file": source, "curves": curves.len(), "prime_bound": prime_bound, "max_degree": max_degree }),
                elliptic_corpus(&curves, prime_bound, max_degree),
            )
        }
        Command::Strata { command: StrataCommand::Verify { spec, prime, degree } } => {
            let parsed: OpenSubschemeSpec = read_file(&spec)?.parse()?;
            (
                "strata.verify",
                json!({ "spec": parsed.to_string(), "file": spec.display().to_string(), "prime": prime, "degree": degree }),
                strata_verify(&parsed, prime, degree),
            )
        }
        Command::Report { .. } => unreachable!("handled before dispatch"),
    };
    match outcome {
        Ok(certs) => Ok((task.to_string(), self::params(params), Ok(certs))),
        Err(Stop::Engine(e)) => Ok((task.to_string(), self::params(params), Err(e))),
        Err(usage) => Err(usage),
    }
}

/// Writes the report to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(report: &VerificationReport, format: Format) {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        Format::Text => report.render_text(),
    };
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            log::error!("cannot write report: {e}");
        }
    }
}

fn rerender(input: Option<PathBuf>, format: Format) -> Result<VerificationReport, Stop> {
    let text = match &input {
        Some(path) => read_file(path)?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Stop::Usage(format!("cannot read standard input: {e}")))?;
            buf
        }
    };
    let report: VerificationReport =
        serde_json::from_str(&text).map_err(|e| Stop::Usage(format!("not a verification report: {e}")))?;
    emit(&report, format);
    Ok(report)
}

fn usage_error(stop: Stop) -> ExitCode {
    match stop {
        Stop::Usage(msg) => eprintln!("error: {msg}"),
        Stop::Engine(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(USAGE_EXIT)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("ZH_THREADS") {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) => Some(n),
                Err(e) => {
                    eprintln!("error: ZH_THREADS={v:?}: {e}");
                    return ExitCode::from(USAGE_EXIT);
                }
            },
            Err(_) => None,
        },
    };
    if let Some(threads) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(USAGE_EXIT);
        }
    }

    if let Command::Report { input } = cli.command {
        return match rerender(input, cli.format) {
            Ok(report) => ExitCode::from(report.status.exit_code()),
            Err(stop) => usage_error(stop),
        };
    }

    let start = Instant::now();
    let (task, params, outcome) = match run(cli.command) {
        Ok(parts) => parts,
        Err(stop) => return usage_error(stop),
    };
    let mut report = match outcome {
        Ok(certs) => VerificationReport::from_certificates(&task, params, certs),
        Err(e) => VerificationReport::from_error(&task, params, &e),
    };
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    info!("{task}: {:?} in {} ms", report.status, report.elapsed_ms);
    emit(&report, cli.format);
    ExitCode::from(report.status.exit_code())
}
