//! Library side of the `fhs` command-line tool.
//!
//! [`run`] executes a parsed [`Cli`] and returns what should go to stdout
//! and stderr, so the binary and the tests share one code path.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fhs_core::bounds::{classify, classify_measured, lempel_greenberger, peng_fan, simplified_peng_fan};
use fhs_core::constructions::{catalog, Base, ConstructionParams, QvBase};
use fhs_core::correlation::{set_correlation, FhsSet};
use fhs_core::format::{to_csv, to_rows, verify_file, Design, DesignFile};
use fhs_core::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION: i32 = 1;
    pub const PARAMS: i32 = 2;
    pub const IO: i32 = 3;
    pub const SCHEMA: i32 = 4;
}

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "FHS_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Verification(_) => exit::VERIFICATION,
            CliError::Params(_) => exit::PARAMS,
            CliError::Io { .. } => exit::IO,
            CliError::Schema(_) => exit::SCHEMA,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) | Error::Unsupported(m) | Error::NotApplicable(m) => {
                CliError::Params(m)
            }
            Error::Schema(m) => CliError::Schema(m),
            Error::Fixture(m) => CliError::Verification(format!("base design: {m}")),
            Error::Internal(m) => CliError::Verification(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fhs", version, about = "Construct and verify optimal frequency-hopping sequence sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a design and write it as a JSON design file.
    Construct {
        #[command(subcommand)]
        family: Family,
    },
    /// Re-verify every claim in a design file.
    Verify {
        input: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Print the correlation lower bounds for (n, M, l).
    #[command(allow_negative_numbers = true)]
    Bounds {
        n: i64,
        m: i64,
        l: i64,
        /// Classify this measured H(S) against the bounds.
        #[arg(long)]
        measured: Option<i64>,
        #[arg(long)]
        json: bool,
    },
    /// Export an FHS set file as CSV or plain rows.
    Export {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List construction families and their constraints.
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Csv,
    Rows,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Destination file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Skip the exhaustive correlation scan (structural checks still run).
    #[arg(long, global = true)]
    pub no_verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Sets from m-sequences over GF(p^m).
    A {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        u: u32,
        #[command(flatten)]
        output: Output,
    },
    /// (tv, floor((p1-1)/t), t; v) sets.
    Tv {
        #[arg(long)]
        t: u64,
        #[arg(long)]
        v: u64,
        #[command(flatten)]
        output: Output,
    },
    /// (3p, 2, 4; (3p+1)/4) sets.
    Threep {
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Sets from cyclotomic relative packings.
    Cyclotomic {
        #[arg(long)]
        v: u64,
        #[arg(long)]
        e: u64,
        #[command(flatten)]
        output: Output,
    },
    /// (3 p_1 ... p_u, 2, 4; ...) sets.
    ThreepProduct {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Expand an FHS set file by an odd w.
    Nv {
        #[arg(long)]
        w: u64,
        #[arg(long)]
        base: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// (vw, (p1-1)/e, e; ...) sets.
    Vw {
        #[arg(long)]
        v: u64,
        #[arg(long)]
        e: u64,
        #[arg(long)]
        w: u64,
        #[arg(long = "e-prime")]
        e_prime: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Fold groups of t sequences of an FHS set file into one.
    Kn {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        base: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Compose an imported relative packing with the vw construction.
    Qv {
        /// bncrdp design file.
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long = "p-prime")]
        p_prime: u64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        v: u64,
        #[arg(long)]
        e: u64,
        #[arg(long)]
        w: u64,
        #[arg(long = "e-prime")]
        e_prime: u64,
        #[command(flatten)]
        output: Output,
    },
}

impl Family {
    fn split(&self) -> (ConstructionParams, Option<&Path>, &Output) {
        use ConstructionParams as P;
        match self {
            Family::A { p, m, u, output } => (P::A { p: *p, m: *m, u: *u }, None, output),
            Family::Tv { t, v, output } => (P::Tv { t: *t, v: *v }, None, output),
            Family::Threep { p, output } => (P::Threep { p: *p }, None, output),
            Family::Cyclotomic { v, e, output } => (P::Cyclotomic { v: *v, e: *e }, None, output),
            Family::ThreepProduct { primes, output } => (
                P::ThreepProduct {
                    primes: primes.clone(),
                },
                None,
                output,
            ),
            Family::Nv { w, base, output } => (P::Nv { w: *w }, Some(base), output),
            Family::Vw {
                v,
                e,
                w,
                e_prime,
                output,
            } => (
                P::Vw {
                    v: *v,
                    e: *e,
                    w: *w,
                    e_prime: *e_prime,
                },
                None,
                output,
            ),
            Family::Kn { t, base, output } => (P::Kn { t: *t }, Some(base), output),
            Family::Qv {
                base,
                p,
                p_prime,
                m,
                a,
                b,
                v,
                e,
                w,
                e_prime,
                output,
            } => (
                P::Qv {
                    base: QvBase {
                        p: *p,
                        p_prime: *p_prime,
                        m: *m,
                        a: *a,
                        b: *b,
                    },
                    v: *v,
                    e: *e,
                    w: *w,
                    e_prime: *e_prime,
                },
                Some(base),
                output,
            ),
        }
    }
}

/// What a successful command prints.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
}

/// A failed command: the error plus anything already produced.
#[derive(Debug)]
pub struct Failure {
    pub error: CliError,
    pub outcome: Outcome,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure {
            error,
            outcome: Outcome::default(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        CliError::from(e).into()
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path) -> Result<DesignFile, CliError> {
    Ok(DesignFile::from_json(&read(path)?)?)
}

/// Reads `FHS_THREADS` and sizes the global worker pool.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(raw) = value else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Params(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool that is already up keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Construct { family } => construct(family),
        Command::Verify {
            input,
            report,
            timing,
        } => verify(input, report.as_deref(), *timing),
        Command::Bounds {
            n,
            m,
            l,
            measured,
            json,
        } => Ok(bounds(*n, *m, *l, *measured, *json)?),
        Command::Export { input, format, out } => Ok(export(input, *format, out.as_deref())?),
        Command::Catalog { json } => Ok(catalog_text(*json)),
    }
}

fn shape(set: &FhsSet, lambda: impl std::fmt::Display) -> String {
    format!(
        "({}, {}, {}; {})",
        set.length(),
        set.size(),
        lambda,
        set.alphabet()
    )
}

fn construct(family: &Family) -> Result<Outcome, Failure> {
    let (params, base_path, output) = family.split();
    let base_file = base_path.map(load).transpose()?;
    let base_design = base_file.as_ref().map(DesignFile::design).transpose()?;
    let base = match (&params, &base_design) {
        (ConstructionParams::Qv { .. }, Some(Design::Bncrdp(d))) => Some(Base::Relative(d)),
        (ConstructionParams::Qv { .. }, Some(_)) => {
            return Err(CliError::Params("qv needs a bncrdp base file".into()).into())
        }
        (_, Some(Design::FhsSet(s))) => Some(Base::Set(s)),
        (_, Some(_)) => {
            return Err(CliError::Params(format!("{} needs an fhs-set base file", params.family())).into())
        }
        (_, None) => None,
    };
    let set = params.build(base)?;
    let file = DesignFile::from_set(&set);
    let json = file.to_json();

    let mut outcome = Outcome::default();
    match &output.out {
        Some(path) => write(path, &json)?,
        None => outcome.stdout = json,
    }
    if output.no_verify {
        let lambda = set.claimed_lambda.map_or("?".into(), |l| l.to_string());
        let _ = writeln!(outcome.stderr, "{} {} (scan skipped)", params.family(), shape(&set, lambda));
        return Ok(outcome);
    }
    let profile = set_correlation(&set)?;
    let verdict = classify(&set, &profile).ok();
    let status = verdict
        .as_ref()
        .map_or("unclassified", |v| if v.is_optimal() { "optimal" } else { "not optimal" });
    let _ = writeln!(
        outcome.stderr,
        "{} {} H(S)={} {}",
        params.family(),
        shape(&set, profile.max),
        profile.max,
        status
    );
    match set.claimed_lambda {
        Some(l) if profile.max > l => Err(Failure {
            error: CliError::Verification(format!("measured H(S) = {} exceeds the claim {l}", profile.max)),
            outcome,
        }),
        _ => Ok(outcome),
    }
}

fn verify(input: &Path, report_path: Option<&Path>, timing: bool) -> Result<Outcome, Failure> {
    let file = load(input)?;
    let start = Instant::now();
    let mut report = verify_file(&file)?;
    if timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    if let Some(path) = report_path {
        write(path, &text)?;
    }
    let mut outcome = Outcome {
        stdout: text,
        stderr: String::new(),
    };
    if report.passed {
        return Ok(outcome);
    }
    let failed: Vec<String> = report
        .claims
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} (claimed {}, measured {})", c.name, c.claimed, c.measured))
        .collect();
    let reason = if failed.is_empty() {
        "structural check failed".to_string()
    } else {
        failed.join(", ")
    };
    let _ = writeln!(outcome.stderr, "claims failed: {reason}");
    Err(Failure {
        error: CliError::Verification(reason),
        outcome,
    })
}

fn positive(name: &str, x: i64) -> Result<u64, CliError> {
    if x < 1 {
        return Err(CliError::Params(format!("{name} must be >= 1, got {x}")));
    }
    Ok(x as u64)
}

pub fn bounds(n: i64, m: i64, l: i64, measured: Option<i64>, json: bool) -> Result<Outcome, CliError> {
    let (n, m, l) = (positive("n", n)?, positive("M", m)?, positive("l", l)?);
    let lg = lempel_greenberger(n, l)?;
    let pf = peng_fan(n, m, l)?;
    let simplified = (m > 1).then(|| simplified_peng_fan(n, m, l)).transpose()?;
    let verdict = match measured {
        Some(h) if h < 0 => return Err(CliError::Params(format!("measured must be >= 0, got {h}"))),
        Some(h) => Some(classify_measured(n, m, l, h as u64)?),
        None => None,
    };
    let eps = n % l;
    let k = (n - eps) / l;

    if json {
        let value = serde_json::json!({
            "n": n, "M": m, "l": l,
            "eps": eps, "k": k, "I": pf.quotient,
            "lempel_greenberger": lg,
            "peng_fan_first": pf.first,
            "peng_fan_second": pf.second,
            "simplified": simplified.map(|s| s.bound),
            "verdict": verdict,
        });
        let mut text = serde_json::to_string_pretty(&value).expect("bounds serialize");
        text.push('\n');
        return Ok(Outcome {
            stdout: text,
            stderr: String::new(),
        });
    }

    let mut out = String::new();
    let _ = writeln!(out, "n={n} M={m} l={l}  eps={eps} k={k} I={}", pf.quotient);
    let _ = writeln!(out, "lempel-greenberger  {lg}");
    let _ = writeln!(out, "peng-fan-first      {}", pf.first);
    let _ = writeln!(out, "peng-fan-second     {}", pf.second);
    match simplified {
        Some(s) => {
            let _ = writeln!(out, "simplified          {}", s.bound);
        }
        None => {
            let _ = writeln!(out, "simplified          n/a (M = 1)");
        }
    }
    if let Some(v) = verdict {
        let status = if v.is_optimal() { "optimal" } else { "not optimal" };
        let _ = writeln!(out, "measured {}: {status}", v.measured);
    }
    Ok(Outcome {
        stdout: out,
        stderr: String::new(),
    })
}

fn export(input: &Path, format: ExportFormat, out: Option<&Path>) -> Result<Outcome, CliError> {
    let file = load(input)?;
    let set = match file.design()? {
        Design::FhsSet(s) => s,
        _ => {
            return Err(CliError::Params(format!(
                "only fhs-set files can be exported, {} has kind {}",
                input.display(),
                file.payload.kind()
            )))
        }
    };
    let text = match format {
        ExportFormat::Csv => to_csv(&set),
        ExportFormat::Rows => to_rows(&set),
    };
    match out {
        Some(path) => {
            write(path, &text)?;
            Ok(Outcome::default())
        }
        None => Ok(Outcome {
            stdout: text,
            stderr: String::new(),
        }),
    }
}

fn catalog_text(json: bool) -> Outcome {
    let entries = catalog();
    let stdout = if json {
        let mut s = serde_json::to_string_pretty(&entries).expect("catalog serializes");
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        for e in &entries {
            let _ = writeln!(s, "{:<15} {:<22} {}", e.family, e.parameters, e.output);
            let _ = writeln!(s, "{:<15} constraints: {}", "", e.constraints);
            if let Some(b) = e.base {
                let _ = writeln!(s, "{:<15} base: {b} file (--base)", "");
            }
        }
        s
    };
    Outcome {
        stdout,
        stderr: String::new(),
    }
}
