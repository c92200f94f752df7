//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cloner::{clone, ClonerSpec};
use crate::error::Error;
use crate::fidelity::{
    closed_single_nm, phase_estimation_fidelity, reduced_onebody, universal_fidelity,
    FidelityReport,
};
use crate::optimizer::{score_blocks, select, Merit};
use crate::states::PhaseVector;
use crate::symspace::OccupationVector;
use crate::verify::{run_suite, summarize, to_json_lines, Grid, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "phasecov",
    version,
    about = "Economical multi-phase-covariant qudit cloning: fidelities, curves, block search and verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-qudit, global and limiting fidelity of one cloner.
    Fidelity(FidelityArgs),
    /// Fidelity curves as CSV: sweep k at fixed N, or N at fixed M.
    Curve(CurveArgs),
    /// Score every block {m_j} of an N -> M machine and mark the argmax.
    Blocks(BlocksArgs),
    /// Run the verification suite and print a JSON-lines report.
    Verify(VerifyArgs),
    /// Apply the cloner to equatorial input copies and print the output state.
    Clone(CloneArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sim,
    Closed,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n_in: usize,
    #[arg(long)]
    pub k: Option<usize>,
    /// Alternative to --k; must equal n-in + k*d.
    #[arg(long)]
    pub m_out: Option<usize>,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: MethodArg,
    /// Comma-separated phases in radians, d - 1 values (simulation only).
    #[arg(long, allow_hyphen_values = true)]
    pub phases: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n_in: Option<usize>,
    /// Sweep k = 1..=max-k at fixed n-in.
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Sweep n-in at this fixed output size (M - N divisible by d).
    #[arg(long)]
    pub m_out: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BlocksArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n_in: usize,
    #[arg(long)]
    pub m_out: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Qudit dimensions, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub ds: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Random phase vectors per parameter point.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Overrides both the algebraic and the combinatorial tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CloneArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n_in: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub phases: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Fidelity(a) => cmd_fidelity(&a, out),
        Command::Curve(a) => cmd_curve(&a, out),
        Command::Blocks(a) => cmd_blocks(&a, out),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Clone(a) => cmd_clone(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Formats `x` with 12 significant digits in plain decimal notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // exponent after rounding to 12 digits, so carries like 0.0999.. -> 0.1 are handled
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn resolve_spec(d: usize, n_in: usize, k: Option<usize>, m_out: Option<usize>) -> Result<ClonerSpec, CliError> {
    let constraint = || {
        CliError::Usage(format!(
            "m-out must equal n-in + k*d for an integer k >= 0 (n-in = {n_in}, d = {d}, m-out = {})",
            m_out.map_or("?".into(), |m| m.to_string())
        ))
    };
    match (k, m_out) {
        (Some(k), None) => Ok(ClonerSpec::new(d, n_in, k)?),
        (None, Some(m)) => {
            if d < 2 || n_in == 0 {
                return Ok(ClonerSpec::new(d, n_in, 0)?);
            }
            ClonerSpec::from_outputs(d, n_in, m).map_err(|_| constraint())
        }
        (Some(k), Some(m)) => {
            let spec = ClonerSpec::new(d, n_in, k)?;
            if spec.m_out() == m {
                Ok(spec)
            } else {
                Err(constraint())
            }
        }
        (None, None) => Err(CliError::Usage("one of --k or --m-out is required".into())),
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn cmd_fidelity(a: &FidelityArgs, out: &mut dyn Write) -> CliResult {
    let spec = resolve_spec(a.d, a.n_in, a.k, a.m_out)?;
    let report = match a.method {
        MethodArg::Closed => {
            if a.phases.is_some() {
                return Err(CliError::Usage("--phases only applies to --method sim".into()));
            }
            FidelityReport::closed_form(&spec)?
        }
        MethodArg::Sim => {
            let phases = match &a.phases {
                Some(p) => PhaseVector::parse_for(p, a.d)?,
                None => PhaseVector::zeros(a.d)?,
            };
            FidelityReport::simulated(&spec, &phases)?
        }
    };
    match a.format {
        Format::Json => write_json(out, &report)?,
        Format::Text => {
            let method = match report.method {
                crate::fidelity::Method::Simulation => "simulation",
                crate::fidelity::Method::ClosedForm => "closed_form",
            };
            writeln!(out, "d         {}", report.d)?;
            writeln!(out, "n_in      {}", report.n_in)?;
            writeln!(out, "m_out     {}", report.m_out)?;
            writeln!(out, "k         {}", report.k)?;
            writeln!(out, "f_single  {}", sig12(report.f_single))?;
            writeln!(out, "f_global  {}", sig12(report.f_global))?;
            writeln!(out, "f_limit   {}", sig12(report.f_limit))?;
            writeln!(out, "method    {method}")?;
        }
        Format::Csv => {
            return Err(CliError::Usage("fidelity supports --format text|json".into()));
        }
    }
    Ok(EXIT_OK)
}

/// One point of a fidelity curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub d: usize,
    pub n_in: usize,
    pub m_out: usize,
    pub k: usize,
    pub f_phase: f64,
    pub f_universal: f64,
    pub f_limit: f64,
}

impl CurveRow {
    pub fn new(spec: &ClonerSpec, f_limit: f64) -> Result<Self, Error> {
        let (d, n, k) = (spec.d(), spec.n_in(), spec.k());
        Ok(Self {
            d,
            n_in: n,
            m_out: spec.m_out(),
            k,
            f_phase: closed_single_nm(d, n, k)?,
            f_universal: universal_fidelity(d, n, spec.m_out())?,
            f_limit,
        })
    }
}

pub const CURVE_HEADER: &str = "d,n_in,m_out,k,f_phase,f_universal,f_limit";
pub const CURVE_COMMENT: &str =
    "# f_universal: optimal universal cloner, closed form from the cloning literature (comparison only)";

/// Rows for `k = 1..=max_k` at fixed `n_in`.
pub fn sweep_k(d: usize, n_in: usize, max_k: usize) -> Result<Vec<CurveRow>, Error> {
    let limit = phase_estimation_fidelity(d, n_in)?;
    (1..=max_k)
        .map(|k| CurveRow::new(&ClonerSpec::new(d, n_in, k)?, limit))
        .collect()
}

/// Rows for every `n_in` in `1..=m_out` with `m_out - n_in` divisible by `d`.
pub fn sweep_n(d: usize, m_out: usize) -> Result<Vec<CurveRow>, Error> {
    (1..=m_out)
        .filter(|n| d > 0 && (m_out - n).is_multiple_of(d))
        .map(|n| {
            let spec = ClonerSpec::from_outputs(d, n, m_out)?;
            CurveRow::new(&spec, phase_estimation_fidelity(d, n)?)
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::new();
    s.push_str(CURVE_COMMENT);
    s.push('\n');
    s.push_str(CURVE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.d,
            r.n_in,
            r.m_out,
            r.k,
            sig12(r.f_phase),
            sig12(r.f_universal),
            sig12(r.f_limit)
        ));
    }
    s
}

fn cmd_curve(a: &CurveArgs, out: &mut dyn Write) -> CliResult {
    let rows = match (a.n_in, a.max_k, a.m_out) {
        (Some(n), Some(max_k), None) => sweep_k(a.d, n, max_k)?,
        (None, None, Some(m)) => sweep_n(a.d, m)?,
        _ => {
            return Err(CliError::Usage(
                "use either --n-in with --max-k, or --m-out alone".into(),
            ))
        }
    };
    if rows.is_empty() {
        return Err(CliError::Usage("the requested sweep is empty".into()));
    }
    let text = match a.format {
        Format::Csv => curve_csv(&rows),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows)
                .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
        Format::Text => return Err(CliError::Usage("curve supports --format csv|json".into())),
    };
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BlocksReport<'a> {
    d: usize,
    n_in: usize,
    m_out: usize,
    blocks: &'a [crate::optimizer::BlockScore],
    winners_single: &'a [OccupationVector],
    winners_global: &'a [OccupationVector],
}

fn cmd_blocks(a: &BlocksArgs, out: &mut dyn Write) -> CliResult {
    if a.m_out < a.n_in {
        return Err(CliError::Usage(format!(
            "m-out ({}) must be at least n-in ({})",
            a.m_out, a.n_in
        )));
    }
    let scores = score_blocks(a.d, a.n_in, a.m_out)?;
    let single = select(a.d, a.n_in, a.m_out, Merit::Single, scores.clone());
    let global = select(a.d, a.n_in, a.m_out, Merit::Global, scores);
    match a.format {
        Format::Json => write_json(
            out,
            &BlocksReport {
                d: a.d,
                n_in: a.n_in,
                m_out: a.m_out,
                blocks: &single.scores,
                winners_single: &single.winners,
                winners_global: &global.winners,
            },
        )?,
        Format::Text => {
            let width = single
                .scores
                .iter()
                .map(|s| s.block.to_string().len())
                .max()
                .unwrap_or(5)
                .max(5);
            writeln!(
                out,
                "{:<width$}  {:<16}{:<16}{:<16}argmax",
                "block", "f_single", "f_global", "f_global_diag"
            )?;
            for s in &single.scores {
                let mut marks = Vec::new();
                if single.winners.contains(&s.block) {
                    marks.push("single");
                }
                if global.winners.contains(&s.block) {
                    marks.push("global");
                }
                let line = format!(
                    "{:<width$}  {:<16}{:<16}{:<16}{}",
                    s.block.to_string(),
                    sig12(s.f_single_block),
                    sig12(s.f_global_block),
                    sig12(s.f_global_diagonal),
                    marks.join(",")
                );
                writeln!(out, "{}", line.trim_end())?;
            }
            let list = |w: &[OccupationVector]| {
                w.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ")
            };
            writeln!(out, "winners single: {}", list(&single.winners))?;
            writeln!(out, "winners global: {}", list(&global.winners))?;
        }
        Format::Csv => return Err(CliError::Usage("blocks supports --format text|json".into())),
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mut grid = Grid::default();
    if let Some(ds) = &a.ds {
        grid.ds = ds.clone();
    }
    if let Some(ns) = &a.ns {
        grid.ns = ns.clone();
    }
    if let Some(ks) = &a.ks {
        grid.ks = ks.clone();
    }
    if let Some(s) = a.samples {
        grid.samples = s;
    }
    if grid.ds.iter().any(|&d| d < 2) || grid.ns.contains(&0) {
        return Err(CliError::Usage("grid needs d >= 2 and n-in >= 1".into()));
    }
    let mut tol = Tolerances::default();
    if let Some(t) = a.tol {
        if t.is_nan() || t < 0.0 {
            return Err(CliError::Usage(format!("tolerance must be non-negative, got {t}")));
        }
        tol.algebraic = t;
        tol.combinatorial = t;
    }
    let results = run_suite(&grid, a.seed, &tol);
    let report = to_json_lines(&results);
    match &a.out {
        Some(path) => fs::write(path, report)?,
        None => out.write_all(report.as_bytes())?,
    }
    let s = summarize(&results);
    writeln!(
        err,
        "summary: passed={} failed={} skipped={}",
        s.passed, s.failed, s.skipped
    )?;
    Ok(if s.failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Serialize)]
struct CloneReport {
    d: usize,
    n_in: usize,
    m_out: usize,
    k: usize,
    amplitudes: Vec<(OccupationVector, f64, f64)>,
    reduced: Vec<Vec<(f64, f64)>>,
}

fn cmd_clone(a: &CloneArgs, out: &mut dyn Write) -> CliResult {
    let spec = ClonerSpec::new(a.d, a.n_in, a.k)?;
    let phases = PhaseVector::parse_for(&a.phases, a.d)?;
    let state = clone(&spec, &phases)?;
    let rho = reduced_onebody(&state)?;
    match a.format {
        Format::Json => {
            let report = CloneReport {
                d: spec.d(),
                n_in: spec.n_in(),
                m_out: spec.m_out(),
                k: spec.k(),
                amplitudes: state.iter().map(|(o, z)| (o, z.re, z.im)).collect(),
                reduced: (0..a.d)
                    .map(|i| (0..a.d).map(|j| (rho[(i, j)].re, rho[(i, j)].im)).collect())
                    .collect(),
            };
            write_json(out, &report)?;
        }
        Format::Text => {
            writeln!(out, "# occupation_vector, re, im")?;
            for (occ, z) in state.iter() {
                writeln!(out, "{occ}, {:.12}, {:.12}", z.re, z.im)?;
            }
            writeln!(out, "# reduced single-qudit state, entries re+im*i")?;
            for i in 0..a.d {
                let row: Vec<String> = (0..a.d)
                    .map(|j| format!("{:.12}{:+.12}i", rho[(i, j)].re, rho[(i, j)].im))
                    .collect();
                writeln!(out, "{}", row.join("  "))?;
            }
        }
        Format::Csv => return Err(CliError::Usage("clone supports --format text|json".into())),
    }
    Ok(EXIT_OK)
}
