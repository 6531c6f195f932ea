//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for argument or validation errors, 2 for
//! numerical failures (including a failed verification).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{consumption_interval, emit_csv, sweep_branch};
use crate::error::Error;
use crate::machines::Machine;
use crate::oracle::{beta_grid, verify_all};
use crate::pipelines::{self, Branch, Pipeline, PipelineReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qclone",
    version,
    about = "Coherence accounting for quantum cloning and deleting machines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a CSV sweep over beta.
    Sweep {
        #[command(flatten)]
        process: ProcessArgs,
        /// Number of grid points on [0, 1].
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the beta interval on which coherence is consumed.
    Thresholds {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Check every closed form against the isometry oracle.
    Verify {
        #[arg(long, value_enum)]
        machine: MachineArg,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the per-entry results as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print one process run as key-value lines.
    Report {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        beta: f64,
    },
}

#[derive(Debug, Args)]
struct ProcessArgs {
    #[arg(long, value_enum)]
    machine: MachineArg,
    #[arg(long, value_enum)]
    pipeline: PipelineArg,
    /// Copy re-cloned after deletion (d2c only).
    #[arg(long, value_enum, default_value_t = BranchArg::A)]
    branch: BranchArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MachineArg {
    Ouqc,
    Pc,
}

impl From<MachineArg> for Machine {
    fn from(m: MachineArg) -> Self {
        match m {
            MachineArg::Ouqc => Machine::Ouqc,
            MachineArg::Pc => Machine::Pc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PipelineArg {
    C2d,
    D2c,
}

impl From<PipelineArg> for Pipeline {
    fn from(p: PipelineArg) -> Self {
        match p {
            PipelineArg::C2d => Pipeline::CloneThenDelete,
            PipelineArg::D2c => Pipeline::DeleteThenClone,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    A,
    B,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::A => Branch::A,
            BranchArg::B => Branch::B,
        }
    }
}

/// Formats with 9 significant digits in the style of C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Round first so the exponent reflects the printed mantissa.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_NUMERICAL
        }
    }
}

fn validate_grid(grid: usize) -> std::result::Result<(), Failure> {
    if grid < 2 {
        return Err(Failure::Usage("grid must be ≥ 2".into()));
    }
    Ok(())
}

fn validate_tol(tol: f64) -> std::result::Result<(), Failure> {
    if tol.is_nan() || tol <= 0.0 || !tol.is_finite() {
        return Err(Failure::Usage(format!("tol must be > 0, got {tol}")));
    }
    Ok(())
}

fn open_out(path: &Option<PathBuf>) -> std::result::Result<Option<BufWriter<File>>, Failure> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Some(BufWriter::new(f)))
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display()))),
        None => Ok(None),
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match command {
        Command::Sweep { process, grid, out } => {
            validate_grid(grid)?;
            let rows = sweep_branch(
                process.pipeline.into(),
                &process.machine.into(),
                grid,
                process.branch.into(),
            )?;
            match open_out(&out)? {
                Some(mut file) => {
                    emit_csv(&rows, &mut file)?;
                    file.flush()?;
                }
                None => {
                    emit_csv(&rows, &mut *stdout)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Thresholds { process, tol } => {
            validate_tol(tol)?;
            if process.branch != BranchArg::A {
                return Err(Failure::Usage(
                    "thresholds are defined for branch a only".into(),
                ));
            }
            let (lo, hi) =
                consumption_interval(process.pipeline.into(), &process.machine.into(), tol)?;
            writeln!(stdout, "{} {}", fmt_sig(lo), fmt_sig(hi))?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            machine,
            grid,
            tol,
            out,
        } => {
            validate_grid(grid)?;
            validate_tol(tol)?;
            let report = verify_all(&machine.into(), &beta_grid(grid), tol)?;
            if let Some(mut file) = open_out(&out)? {
                report.write_csv(&mut file)?;
                file.flush()?;
            }
            let failed = report.failures().count();
            writeln!(stdout, "machine {}", report.machine)?;
            writeln!(stdout, "checks {}", report.entries.len())?;
            writeln!(stdout, "failed {failed}")?;
            writeln!(stdout, "max_deviation {}", fmt_sig(report.max_deviation()))?;
            Ok(if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            })
        }
        Command::Report { process, beta } => {
            if !(0.0..=1.0).contains(&beta) {
                return Err(Failure::Usage(format!(
                    "beta must lie in [0, 1], got {beta}"
                )));
            }
            let report = pipelines::run(
                process.pipeline.into(),
                &process.machine.into(),
                beta,
                process.branch.into(),
            )?;
            write_report(&report, stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn write_report(r: &PipelineReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "machine {}", r.machine)?;
    writeln!(out, "pipeline {}", r.pipeline)?;
    if let Some(b) = r.branch {
        writeln!(out, "branch {}", b.label())?;
    }
    writeln!(out, "beta {}", fmt_sig(r.beta))?;
    for s in &r.stages {
        let c = s.coherence;
        writeln!(
            out,
            "stage {} global {} local_a {} local_b {} residual {}",
            s.label,
            fmt_sig(c.global),
            fmt_sig(c.local_a),
            fmt_sig(c.local_b),
            fmt_sig(c.residual)
        )?;
    }
    writeln!(out, "delta_c {}", fmt_sig(r.delta_c))?;
    writeln!(out, "delta_residual {}", fmt_sig(r.delta_residual))?;
    writeln!(out, "fidelity {}", fmt_sig(r.fidelity))?;
    match r.fidelity_closed_form {
        Some(f) => writeln!(out, "fidelity_closed_form {}", fmt_sig(f))?,
        None => writeln!(out, "fidelity_closed_form none")?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("qclone").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.375), "0.375");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(-2.0 / 3.0), "-0.666666667");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(0.99999999999), "1");
        assert_eq!(fmt_sig(0.000123), "0.000123");
    }

    #[test]
    fn usage_errors_exit_one() {
        let (code, _, err) = call(&[
            "sweep",
            "--machine",
            "ouqc",
            "--pipeline",
            "d2c",
            "--grid",
            "1",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("grid must be ≥ 2"));
        assert_eq!(
            call(&[
                "report",
                "--machine",
                "ouqc",
                "--pipeline",
                "c2d",
                "--beta",
                "1.5"
            ])
            .0,
            1
        );
        assert_eq!(
            call(&[
                "report",
                "--machine",
                "general",
                "--pipeline",
                "c2d",
                "--beta",
                "0.5"
            ])
            .0,
            1
        );
        assert_eq!(
            call(&[
                "thresholds",
                "--machine",
                "pc",
                "--pipeline",
                "c2d",
                "--tol",
                "0"
            ])
            .0,
            1
        );
        assert_eq!(call(&[]).0, 1);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep"));
    }

    #[test]
    fn report_lines() {
        let (code, out, _) = call(&[
            "report",
            "--machine",
            "ouqc",
            "--pipeline",
            "c2d",
            "--beta",
            "0",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("delta_c 0.333333333\n"));
        assert!(out.contains("fidelity 0.666666667\n"));
        assert!(out.contains("stage cloned "));
    }

    #[test]
    fn verify_below_precision_exits_two() {
        let (code, out, _) = call(&[
            "verify",
            "--machine",
            "ouqc",
            "--grid",
            "5",
            "--tol",
            "1e-18",
        ]);
        assert_eq!(code, 2);
        assert!(out.contains("max_deviation"));
        assert_eq!(call(&["verify", "--machine", "pc", "--grid", "5"]).0, 0);
    }
}
