//! Command-line front end. Exit status is 0 on success, 1 when a
//! verification has failures, and 2 for usage or domain errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::catalog::{registry, Identity, IdentitySpec};
use crate::error::Error;
use crate::harness::{format_float, parse_grid, run_trials, sweep, SamplerConfig};
use crate::qseries::{Nome, TruncationPolicy};
use crate::theta::{theta_product, theta_series, ThetaArgument};

/// Environment variable overriding the default term budget.
pub const MAX_TERMS_ENV: &str = "THETA_MAX_TERMS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "thetakit", about = "Evaluate theta functions and verify theta identities numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Product,
    Series,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Product => "product",
            Method::Series => "series",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate θ(w; q).
    #[command(allow_negative_numbers = true)]
    Eval {
        #[arg(long)]
        q_re: f64,
        #[arg(long)]
        q_im: f64,
        #[arg(long)]
        w_re: f64,
        #[arg(long)]
        w_im: f64,
        #[arg(long, value_enum, default_value = "product")]
        method: Method,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// Check an identity at randomly sampled admissible points.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[arg(long)]
        identity: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0.9)]
        q_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registered identities.
    List,
    /// Residual statistics over a grid of real nomes.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        identity: String,
        /// lo:hi:steps
        #[arg(long)]
        q_grid: String,
        #[arg(long, default_value_t = 100)]
        trials_per_q: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if matches!(e, Error::UnknownIdentity(_)) {
                eprintln!("valid identities: {}", valid_ids());
            }
            EXIT_USAGE
        }
    }
}

fn valid_ids() -> String {
    registry().iter().map(|s| s.id).collect::<Vec<_>>().join(", ")
}

fn policy(tol: f64) -> std::result::Result<TruncationPolicy, Failure> {
    let max_terms = match std::env::var(MAX_TERMS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(Failure::Usage(format!("{MAX_TERMS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => TruncationPolicy::default().max_terms,
    };
    Ok(TruncationPolicy::new(tol, max_terms)?)
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::result::Result<(), Failure> {
    if let Some(path) = out {
        fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
    Ok(())
}

fn dispatch(cmd: Command) -> std::result::Result<i32, Failure> {
    match cmd {
        Command::Eval {
            q_re,
            q_im,
            w_re,
            w_im,
            method,
            tol,
        } => {
            let nome = Nome::new(Complex64::new(q_re, q_im))?;
            let w = Complex64::new(w_re, w_im);
            let policy = policy(tol)?;
            let t = match method {
                Method::Product => theta_product(&ThetaArgument::new(w, &nome)?, &nome, &policy)?,
                Method::Series => theta_series(w, &nome, &policy)?,
            };
            let json = format!(
                "{{\"value_re\": {}, \"value_im\": {}, \"method\": \"{}\", \"terms_used\": {}, \"error_bound\": {}}}\n",
                json_float(t.value.re),
                json_float(t.value.im),
                method.as_str(),
                t.terms_used,
                json_float(t.error_bound)
            );
            emit(&json, None)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            identity,
            trials,
            seed,
            tol,
            q_max,
            out,
        } => {
            if !(q_max > 0.0 && q_max < 1.0) {
                return Err(Failure::Usage(format!("--q-max must lie in (0, 1), got {q_max}")));
            }
            let defaults = SamplerConfig::default();
            let config = SamplerConfig {
                seed,
                trials,
                q_modulus_range: [defaults.q_modulus_range[0].min(q_max), q_max],
                ..defaults
            };
            let report = run_trials(&identity, &config, tol, &policy(1e-14)?)?;
            let mut json = report.to_json();
            json.push('\n');
            emit(&json, out.as_ref())?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURES })
        }
        Command::List => {
            let text: String = registry().iter().map(list_line).collect();
            emit(&text, None)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            identity,
            q_grid,
            trials_per_q,
            seed,
            out,
        } => {
            let grid = parse_grid(&q_grid)?;
            let rows = sweep(&identity, &grid, trials_per_q, seed, &policy(1e-14)?)?;
            let mut csv = String::from("q_modulus,max_normalized_residual,mean_normalized_residual,trials\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    format_float(r.q_modulus),
                    format_float(r.max_normalized_residual),
                    format_float(r.mean_normalized_residual),
                    r.trials
                ));
            }
            emit(&csv, out.as_ref())?;
            Ok(EXIT_OK)
        }
    }
}

fn json_float(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else if x.is_nan() {
        "\"nan\"".into()
    } else if x > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

fn list_line(spec: &IdentitySpec) -> String {
    let (arity, params) = match spec.identity {
        Identity::AType { rank: None } => ("2n-1".to_string(), "a1..an,b1..b(n-1)".to_string()),
        _ => {
            let names = spec.free_params(&Default::default()).unwrap_or_default();
            let shown = if names.is_empty() { "-".to_string() } else { names.join(",") };
            (names.len().to_string(), shown)
        }
    };
    let params = match spec.identity {
        Identity::BaxterNumerator { .. } => format!("{params};k,sign"),
        _ => params,
    };
    format!(
        "{}\t{}\t{}\t{}\t{}\n",
        spec.id,
        arity,
        params,
        spec.side_condition.unwrap_or("-"),
        spec.reference
    )
}
