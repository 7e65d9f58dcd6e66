//! Command-line front end.
//!
//! Model files are JSON:
//!
//! ```json
//! { "period": 2, "p": 1, "q": 0,
//!   "phi": [[0.5], [0.8]],
//!   "sigma2": [1.0, 1.0] }
//! ```
//!
//! Row `v - 1` of `phi`/`theta` holds season `v`, column `j - 1` the lag-`j`
//! coefficient, for `y_t = sum_j phi_j y_{t-j} + e_t - sum_j theta_j e_{t-j}`.
//! `phi`/`theta` may be omitted when the matching order is zero.
//!
//! Exit codes: 0 success, 1 malformed input or I/O failure, 2 non-causal model,
//! 3 a numerical check failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::ParmaError;
use crate::model::{check_causality, validate_model, ModelSpec, ParmaModel};
use crate::oracles::{
    simulate_with, verify_residuals, MaInfinityOracle, SimulationOptions, DEFAULT_BURN_IN_PERIODS,
};
use crate::psi::compute_psi;
use crate::yule_walker::{autocovariances, AutocovTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    NotCausal = 2,
    CheckFailed = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "parma",
    version,
    about = "Exact autocovariances of periodic ARMA models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model file and report its causality
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print psi weights of the causal representation as CSV
    Psi {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        max_k: usize,
    },
    /// Write seasonal autocovariances to a CSV file
    Acov {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        max_lag: usize,
        #[arg(long)]
        out: PathBuf,
        /// Cross-check every value against the MA(infinity) sum at this tolerance
        #[arg(long)]
        check_oracle: Option<f64>,
    },
    /// Simulate a path and write it as CSV
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        periods: usize,
        #[arg(long, default_value_t = DEFAULT_BURN_IN_PERIODS)]
        burn_in: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the solution against the difference equation and the MA(infinity) sum
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        max_lag: usize,
        #[arg(long)]
        tol: f64,
    },
}

/// One row of the `acov` output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcovRecord {
    pub season: usize,
    pub lag: usize,
    pub gamma: f64,
}

/// Shortest representation that parses back to the same value.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn read_model(path: &Path) -> Result<ParmaModel, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let spec: ModelSpec = serde_json::from_str(&text)
        .map_err(|e| format!("malformed model file {}: {e}", path.display()))?;
    validate_model(&spec).map_err(|e| e.to_string())
}

pub fn acov_records(table: &AutocovTable) -> Vec<AcovRecord> {
    (1..=table.period())
        .flat_map(|season| {
            (0..=table.max_lag()).map(move |lag| AcovRecord {
                season,
                lag,
                gamma: table.get(season, lag),
            })
        })
        .collect()
}

pub fn write_acov_csv(table: &AutocovTable) -> String {
    let mut out = String::from("season,lag,gamma\n");
    for r in acov_records(table) {
        out.push_str(&format!(
            "{},{},{}\n",
            r.season,
            r.lag,
            format_float(r.gamma)
        ));
    }
    out
}

/// Parses `acov` output back into records.
pub fn parse_acov_csv(text: &str) -> Result<Vec<AcovRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("season,lag,gamma") => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(format!("expected 3 fields in {line:?}"));
            }
            let bad = |e: &dyn std::fmt::Display| format!("bad field in {line:?}: {e}");
            Ok(AcovRecord {
                season: fields[0].parse().map_err(|e| bad(&e))?,
                lag: fields[1].parse().map_err(|e| bad(&e))?,
                gamma: fields[2].parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}

fn status_for(err: &ParmaError) -> ExitStatus {
    match err {
        ParmaError::NotCausal { .. } => ExitStatus::NotCausal,
        ParmaError::SingularSystem { .. } | ParmaError::TruncationDidNotConverge { .. } => {
            ExitStatus::CheckFailed
        }
        _ => ExitStatus::Failure,
    }
}

fn fail(err: &mut dyn Write, status: ExitStatus, msg: impl std::fmt::Display) -> ExitStatus {
    let _ = writeln!(err, "error: {msg}");
    status
}

macro_rules! load {
    ($path:expr, $err:expr) => {
        match read_model($path) {
            Ok(m) => m,
            Err(msg) => return fail($err, ExitStatus::Failure, msg),
        }
    };
}

pub fn cmd_validate(model_path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let model = load!(model_path, err);
    let report = check_causality(&model);
    let written = writeln!(
        out,
        "period: {}\nar_order: {}\nma_order: {}\nspectral_radius: {}\ncausal: {}\nnear_boundary: {}",
        model.period(),
        model.ar_order(),
        model.ma_order(),
        format_float(report.spectral_radius),
        report.is_causal,
        report.near_boundary
    );
    if let Err(e) = written {
        return fail(err, ExitStatus::Failure, e);
    }
    if report.is_causal {
        ExitStatus::Success
    } else {
        ExitStatus::NotCausal
    }
}

pub fn cmd_psi(
    model_path: &Path,
    max_k: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let model = load!(model_path, err);
    let psi = compute_psi(&model, max_k);
    let mut text = String::from("season,k,psi\n");
    for v in 1..=model.period() {
        for (k, x) in psi.season(v).iter().enumerate() {
            text.push_str(&format!("{v},{k},{}\n", format_float(*x)));
        }
    }
    match out.write_all(text.as_bytes()) {
        Ok(()) => ExitStatus::Success,
        Err(e) => fail(err, ExitStatus::Failure, e),
    }
}

/// Largest `|gamma - oracle| / max(1, |gamma_0^(v)|)` over the table.
fn oracle_discrepancy(
    model: &ParmaModel,
    table: &AutocovTable,
    tol: f64,
) -> Result<f64, ParmaError> {
    let mut oracle = MaInfinityOracle::new(model)?;
    let mut worst = 0.0f64;
    for v in 1..=table.period() {
        let scale = table.get(v, 0).abs().max(1.0);
        for h in 0..=table.max_lag() {
            let reference = oracle.autocovariance(v, h, tol)?;
            worst = worst.max((table.get(v, h) - reference).abs() / scale);
        }
    }
    Ok(worst)
}

pub fn cmd_acov(
    model_path: &Path,
    max_lag: usize,
    out_path: &Path,
    check_tol: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let model = load!(model_path, err);
    let table = match autocovariances(&model, max_lag) {
        Ok(t) => t,
        Err(e) => return fail(err, status_for(&e), e),
    };
    if let Some(tol) = check_tol {
        if tol.is_nan() || tol <= 0.0 {
            return fail(
                err,
                ExitStatus::Failure,
                format!("--check-oracle must be positive, got {tol}"),
            );
        }
        match oracle_discrepancy(&model, &table, tol) {
            Ok(d) if d <= tol => {
                let _ = writeln!(
                    out,
                    "oracle check passed: max discrepancy {}",
                    format_float(d)
                );
            }
            Ok(d) => {
                return fail(
                    err,
                    ExitStatus::CheckFailed,
                    format!(
                        "oracle disagreement {} exceeds {}",
                        format_float(d),
                        format_float(tol)
                    ),
                )
            }
            Err(e) => return fail(err, ExitStatus::CheckFailed, e),
        }
    }
    match fs::write(out_path, write_acov_csv(&table)) {
        Ok(()) => ExitStatus::Success,
        Err(e) => fail(
            err,
            ExitStatus::Failure,
            format!("cannot write {}: {e}", out_path.display()),
        ),
    }
}

pub fn cmd_simulate(
    model_path: &Path,
    n_periods: usize,
    burn_in: usize,
    seed: u64,
    out_path: &Path,
    err: &mut dyn Write,
) -> ExitStatus {
    let model = load!(model_path, err);
    let opts = SimulationOptions {
        burn_in_periods: burn_in,
        ..SimulationOptions::new(n_periods, seed)
    };
    let series = match simulate_with(&model, &opts) {
        Ok(s) => s,
        Err(e) => return fail(err, status_for(&e), e),
    };
    let mut text = format!(
        "# seed={} rng={} burn_in={} periods={}\ncycle,season,y\n",
        series.seed, series.rng_id, burn_in, series.n_periods
    );
    for (i, y) in series.data.iter().enumerate() {
        let cycle = i / series.period + 1;
        let season = i % series.period + 1;
        text.push_str(&format!("{cycle},{season},{}\n", format_float(*y)));
    }
    match fs::write(out_path, text) {
        Ok(()) => ExitStatus::Success,
        Err(e) => fail(
            err,
            ExitStatus::Failure,
            format!("cannot write {}: {e}", out_path.display()),
        ),
    }
}

pub fn cmd_verify(
    model_path: &Path,
    max_lag: usize,
    tol: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let model = load!(model_path, err);
    if tol.is_nan() || tol <= 0.0 {
        return fail(
            err,
            ExitStatus::Failure,
            format!("--tol must be positive, got {tol}"),
        );
    }
    let table = match autocovariances(&model, max_lag.max(model.ar_order())) {
        Ok(t) => t,
        Err(e) => return fail(err, status_for(&e), e),
    };
    let psi = compute_psi(&model, model.ma_order());
    let residual = match verify_residuals(&model, &table, &psi) {
        Ok(r) => r,
        Err(e) => return fail(err, ExitStatus::Failure, e),
    };
    let _ = writeln!(out, "max_residual: {}", format_float(residual));
    let discrepancy = match oracle_discrepancy(&model, &table.truncated(max_lag), tol) {
        Ok(d) => d,
        Err(e) => return fail(err, status_for(&e), e),
    };
    let _ = writeln!(out, "max_oracle_discrepancy: {}", format_float(discrepancy));
    let ok = residual <= tol && discrepancy <= tol;
    let _ = writeln!(
        out,
        "tolerance: {}\nstatus: {}",
        format_float(tol),
        if ok { "ok" } else { "FAILED" }
    );
    if ok {
        ExitStatus::Success
    } else {
        ExitStatus::CheckFailed
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version also arrive here
            return if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                ExitStatus::Failure
            } else {
                let _ = write!(out, "{}", e.render());
                ExitStatus::Success
            };
        }
    };
    match cli.command {
        Command::Validate { model } => cmd_validate(&model, out, err),
        Command::Psi { model, max_k } => cmd_psi(&model, max_k, out, err),
        Command::Acov {
            model,
            max_lag,
            out: path,
            check_oracle,
        } => cmd_acov(&model, max_lag, &path, check_oracle, out, err),
        Command::Simulate {
            model,
            periods,
            burn_in,
            seed,
            out: path,
        } => cmd_simulate(&model, periods, burn_in, seed, &path, err),
        Command::Verify {
            model,
            max_lag,
            tol,
        } => cmd_verify(&model, max_lag, tol, out, err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1e-300), "1e-300");
        assert_eq!(format_float(-2.5e20), "-2.5e20");
    }

    #[test]
    fn csv_parse_rejects_garbage() {
        assert!(parse_acov_csv("a,b,c\n").is_err());
        assert!(parse_acov_csv("season,lag,gamma\n1,0\n").is_err());
        assert!(parse_acov_csv("season,lag,gamma\n1,0,x\n").is_err());
    }

    proptest! {
        #[test]
        fn float_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = format_float(x);
            let mantissa = s.split('e').next().unwrap();
            let digits = mantissa.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
            prop_assert!(digits <= 17, "{}", s);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }

        #[test]
        fn acov_csv_round_trips(values in proptest::collection::vec(-1e6f64..1e6, 6)) {
            let table = AutocovTable::from_values(2, 2, values).unwrap();
            let parsed = parse_acov_csv(&write_acov_csv(&table)).unwrap();
            prop_assert_eq!(parsed, acov_records(&table));
        }
    }
}
