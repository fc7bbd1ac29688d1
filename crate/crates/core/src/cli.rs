//! Command-line front end. The `urv` binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success (for `refine`, converged), 1 input or option error,
//! 2 `refine` stopped at the iteration limit, 3 `verify` found a violated
//! invariant, 64 unknown subcommand or flag.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::diagnostics::{run_monitors, CheckStatus, MonitorTolerances};
use crate::error::{Error, Result};
use crate::io::{format_human, parse_square_matrix, write_trace, MatrixFormat};
use crate::matrix::{Matrix, UpperTriangular};
use crate::oracle::{check_preconditions, svd};
use crate::refinement::{rank_revealing_urv, refine, RefineOptions, StopReason};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "urv",
    version,
    about = "URV refinement of upper triangular matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refine an upper triangular matrix until its corner settles.
    Refine(RefineArgs),
    /// Report which convergence guarantee applies to a matrix.
    Check(InputArgs),
    /// Print the oracle SVD of a square matrix.
    Svd(InputArgs),
    /// Rank-revealing URV by repeated refinement and deflation.
    Rrurv(RrurvArgs),
    /// Refine and evaluate every invariant monitor along the run.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Matrixmarket,
    Csv,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => MatrixFormat::Auto,
            FormatArg::Matrixmarket => MatrixFormat::MatrixMarket,
            FormatArg::Csv => MatrixFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Dense CSV or MatrixMarket array file.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct IterArgs {
    #[arg(long, default_value_t = 1e-14)]
    tol_h: f64,
    #[arg(long, default_value_t = 1e-15)]
    tol_e: f64,
    /// Maximum number of double sweeps.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
}

impl IterArgs {
    fn options(&self) -> RefineOptions {
        RefineOptions {
            tol_h: self.tol_h,
            tol_e_stagnation: self.tol_e,
            max_double_sweeps: self.max_iter,
            ..RefineOptions::default()
        }
    }
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    iter: IterArgs,
    /// Write one JSON line per half-sweep to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Record rho = e / sigma_min(S) at every half-sweep.
    #[arg(long)]
    rho: bool,
    /// Skip accumulating the orthogonal factors.
    #[arg(long)]
    no_factors: bool,
}

#[derive(Debug, Args)]
struct RrurvArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    iter: IterArgs,
    /// Corners below rank_tol * max |r_ii| are treated as negligible.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    iter: IterArgs,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                ErrorKind::UnknownArgument | ErrorKind::InvalidSubcommand => EXIT_USAGE,
                _ => EXIT_INPUT,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Refine(a) => cmd_refine(&a, out),
        Command::Check(a) => cmd_check(&a, out, err),
        Command::Svd(a) => cmd_svd(&a, out),
        Command::Rrurv(a) => cmd_rrurv(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn read_input(a: &InputArgs) -> Result<Matrix> {
    parse_square_matrix(&a.input, a.format.into())
}

/// Triangular inputs are used as given; anything else is replaced by its QR
/// triangular factor, which has the same singular values and right singular
/// vectors.
fn triangularize(a: &InputArgs, err: &mut dyn Write) -> Result<UpperTriangular> {
    let m = read_input(a)?;
    match UpperTriangular::new(m.clone()) {
        Ok(r) => Ok(r),
        Err(Error::NotUpperTriangular { .. }) => {
            let (_, r) = UpperTriangular::from_general(&m)?;
            writeln!(
                err,
                "note: {} is not upper triangular; using the triangular factor of its QR decomposition",
                a.input.display()
            )?;
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn write_matrix(out: &mut dyn Write, name: &str, m: &Matrix) -> Result<()> {
    writeln!(out, "{name}:")?;
    for i in 0..m.rows() {
        let row: Vec<String> = m
            .row(i)
            .iter()
            .map(|&x| format!("{:>22}", format_human(x)))
            .collect();
        writeln!(out, "  {}", row.join(" "))?;
    }
    Ok(())
}

fn join_human(xs: &[f64]) -> String {
    xs.iter()
        .map(|&x| format_human(x))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Serialize)]
struct RefineJson<'a> {
    n: usize,
    converged: bool,
    reason: &'a str,
    double_sweeps: usize,
    half_sweeps: usize,
    final_e: f64,
    final_h_norm: f64,
    r: Vec<Vec<f64>>,
    g_odd: Option<Vec<Vec<f64>>>,
    g_even: Option<Vec<Vec<f64>>>,
}

fn cmd_refine(a: &RefineArgs, out: &mut dyn Write) -> Result<i32> {
    // No silent re-triangularization here: refinement of a general matrix
    // is an input error and the message names the offending entry.
    let r0 = UpperTriangular::new(read_input(&a.input)?)?;
    let opts = RefineOptions {
        record_rho: a.rho,
        accumulate_factors: !a.no_factors,
        ..a.iter.options()
    };
    let report = refine(&r0, &opts)?;
    let st = &report.final_state;
    if let Some(path) = &a.trace {
        write_trace_file(path, st.history())?;
    }
    if a.input.json {
        emit_json(
            out,
            &RefineJson {
                n: st.n(),
                converged: report.converged,
                reason: report.reason.as_str(),
                double_sweeps: report.double_sweeps,
                half_sweeps: st.l(),
                final_e: report.final_e,
                final_h_norm: st.h_norm(),
                r: rows_of(st.r()),
                g_odd: st.g_odd().map(rows_of),
                g_even: st.g_even().map(rows_of),
            },
        )?;
    } else {
        writeln!(out, "final e       : {}", format_human(report.final_e))?;
        writeln!(out, "final |h|     : {}", format_human(st.h_norm()))?;
        writeln!(out, "double sweeps : {}", report.double_sweeps)?;
        writeln!(out, "reason        : {}", report.reason.as_str())?;
        writeln!(out, "converged     : {}", report.converged)?;
        if a.rho {
            if let Some(rho) = st.last_record().rho {
                writeln!(out, "final rho     : {}", format_human(rho))?;
            }
        }
    }
    Ok(if report.reason == StopReason::MaxIter {
        EXIT_MAX_ITER
    } else {
        EXIT_OK
    })
}

fn write_trace_file(path: &Path, history: &[crate::refinement::IterationRecord]) -> Result<()> {
    let file = File::create(path)?;
    write_trace(BufWriter::new(file), history)
}

fn cmd_check(a: &InputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let r = triangularize(a, err)?;
    let rep = check_preconditions(&r)?;
    if a.json {
        emit_json(out, &rep)?;
    } else {
        writeln!(out, "verdict            : {}", rep.verdict.as_str())?;
        writeln!(out, "sigma              : {}", join_human(&rep.sigma))?;
        writeln!(out, "|e|                : {}", format_human(rep.corner_abs))?;
        writeln!(
            out,
            "sigma_min(S)       : {}",
            format_human(rep.sigma_min_leading)
        )?;
        writeln!(out, "rho0               : {}", format_human(rep.rho0))?;
        writeln!(out, "v_nn               : {}", format_human(rep.v_nn))?;
        writeln!(out, "u_nn               : {}", format_human(rep.u_nn))?;
        writeln!(out, "rho0 < 1           : {}", rep.rho_lt_one)?;
        writeln!(out, "sigma_n simple     : {}", rep.sigma_gap_simple)?;
        writeln!(out, "smin(S) > smin(R)  : {}", rep.smin_s_gt_smin_r)?;
        writeln!(out, "v_nn nonzero       : {}", rep.vnn_nonzero)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SvdJson {
    sigma: Vec<f64>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    sweeps: usize,
}

fn cmd_svd(a: &InputArgs, out: &mut dyn Write) -> Result<i32> {
    let m = read_input(a)?;
    let d = svd(&m)?;
    if a.json {
        emit_json(
            out,
            &SvdJson {
                sigma: d.sigma.clone(),
                u: rows_of(&d.u),
                v: rows_of(&d.v),
                sweeps: d.sweeps,
            },
        )?;
    } else {
        writeln!(out, "sigma: {}", join_human(&d.sigma))?;
        write_matrix(out, "U", &d.u)?;
        write_matrix(out, "V", &d.v)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RrurvJson {
    numerical_rank: usize,
    threshold: f64,
    u: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

fn cmd_rrurv(a: &RrurvArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let r0 = triangularize(&a.input, err)?;
    let d = rank_revealing_urv(&r0, a.rank_tol, &a.iter.options())?;
    if a.input.json {
        emit_json(
            out,
            &RrurvJson {
                numerical_rank: d.numerical_rank,
                threshold: d.threshold,
                u: rows_of(&d.u),
                r: rows_of(d.r.as_matrix()),
                v: rows_of(&d.v),
            },
        )?;
    } else {
        let diag: Vec<f64> = (0..d.r.n()).map(|i| d.r[(i, i)]).collect();
        writeln!(out, "numerical rank : {}", d.numerical_rank)?;
        writeln!(out, "threshold      : {}", format_human(d.threshold))?;
        writeln!(out, "diag(R)        : {}", join_human(&diag))?;
        write_matrix(out, "R", d.r.as_matrix())?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let r0 = triangularize(&a.input, err)?;
    let report = refine(&r0, &a.iter.options())?;
    let svd0 = svd(r0.as_matrix())?;
    let mon = run_monitors(&report.final_state, &svd0, &MonitorTolerances::default())?;
    if a.input.json {
        emit_json(out, &mon)?;
    } else {
        writeln!(
            out,
            "verdict       : {}",
            mon.preconditions.verdict.as_str()
        )?;
        writeln!(out, "stop reason   : {}", report.reason.as_str())?;
        writeln!(out, "half sweeps   : {}", mon.half_sweeps)?;
        writeln!(out, "final e       : {}", format_human(mon.final_e))?;
        writeln!(out, "sigma_n       : {}", format_human(svd0.sigma_min()))?;
        for c in &mon.checks {
            let status = match c.status {
                CheckStatus::Holds => "HOLDS",
                CheckStatus::Violated => "VIOLATED",
                CheckStatus::NotApplicable => "N/A",
            };
            let at = c.location.map(|l| format!(" at l={l}")).unwrap_or_default();
            writeln!(
                out,
                "{:<26} {:<8} worst {:.3e} (tol {:.0e}){at}",
                c.check_id.as_str(),
                status,
                c.worst_violation,
                c.tolerance
            )?;
        }
    }
    Ok(if mon.all_hold() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}
