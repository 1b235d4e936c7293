//! `monocal`: fit, apply and stream monotone staircase calibrations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod input;
mod model;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monocal_core::{
    anytime_run, fit_direct, fit_stack, logloss_reduce, losses::logloss_samples, normalize,
    AnytimeConfig, BinarySample, CalibrationError, Loss, MergeableLoss, OnlineState, Problem,
    Sample, SquareLoss, Staircase,
};

use input::Row;
use model::{Metadata, ModelFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Order(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Order(_) => 3,
        }
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(format!("I/O error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "monocal",
    version,
    about = "Monotone staircase calibration of estimator scores"
)]
struct Cli {
    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model from a `score,target[,weight]` CSV.
    Fit(FitArgs),
    /// Evaluate a model on the `score` column of a CSV.
    Apply { model: PathBuf, scores: PathBuf },
    /// Feed score-ordered rows through the online solver, one summary line per row.
    Stream {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = LossKind::Square)]
        loss: LossKind,
    },
}

#[derive(Args, Debug)]
struct FitArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = LossKind::Square)]
    loss: LossKind,
    #[arg(long, value_enum, default_value_t = Solver::Stack)]
    solver: Solver,
    /// Target bracket width (anytime only).
    #[arg(long)]
    delta: Option<f64>,
    /// `lo,hi` or `auto` for doubling (anytime only).
    #[arg(long)]
    bounds: Option<String>,
    /// Round cap (anytime only).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the model here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LossKind {
    Square,
    Logloss,
}

impl LossKind {
    fn tag(self) -> &'static str {
        match self {
            LossKind::Square => "square",
            LossKind::Logloss => "logloss",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Solver {
    Direct,
    Stack,
    Anytime,
}

impl Solver {
    fn tag(self) -> &'static str {
        match self {
            Solver::Direct => "direct",
            Solver::Stack => "stack",
            Solver::Anytime => "anytime",
        }
    }
}

const DEFAULT_DELTA: f64 = 1e-8;

struct Diag {
    quiet: bool,
}

impl Diag {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("monocal: {}", msg.as_ref());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let diag = Diag { quiet: cli.quiet };
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(&args, &diag),
        Command::Apply { model, scores } => cmd_apply(&model, &scores),
        Command::Stream { input, loss } => cmd_stream(&input, loss, &diag),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("monocal: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Anytime bounds: `None` means doubling from infinite bounds.
fn parse_bounds(text: &str) -> Result<Option<(f64, f64)>, CliError> {
    if text.trim() == "auto" {
        return Ok(None);
    }
    let bad = || CliError::Input(format!("--bounds expects `lo,hi` or `auto`, got {text:?}"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(CliError::Input(format!(
            "--bounds needs lo < hi, got {lo},{hi}"
        )));
    }
    Ok(Some((lo, hi)))
}

fn anytime_config(args: &FitArgs) -> Result<AnytimeConfig, CliError> {
    let delta = args.delta.unwrap_or(DEFAULT_DELTA);
    let bounds = match &args.bounds {
        Some(text) => parse_bounds(text)?,
        None if args.loss == LossKind::Logloss => Some((0.0, 1.0)),
        None => None,
    };
    let config = match bounds {
        Some((lo, hi)) => AnytimeConfig::bounded(lo, hi, delta),
        None => AnytimeConfig::unbounded(delta),
    }
    .with_max_iters(args.max_iters.unwrap_or(AnytimeConfig::DEFAULT_MAX_ITERS));
    config.validate()?;
    Ok(config)
}

struct Fitted {
    staircase: Staircase,
    merge_count: usize,
    total_loss: f64,
    summary: String,
}

fn fit_offline<L: MergeableLoss>(problem: &Problem<L>, solver: Solver) -> Result<Fitted, CliError> {
    let report = match solver {
        Solver::Direct => fit_direct(problem),
        _ => fit_stack(problem),
    };
    Ok(Fitted {
        staircase: report.staircase(problem)?,
        merge_count: report.merge_count,
        total_loss: report.total_loss,
        summary: match solver {
            Solver::Direct => format!("{} passes", report.passes),
            _ => String::new(),
        },
    })
}

fn fit_anytime<L: Loss>(problem: &Problem<L>, config: &AnytimeConfig) -> Result<Fitted, CliError> {
    let report = anytime_run(problem, config)?;
    Ok(Fitted {
        merge_count: problem.len() - report.groups.len(),
        total_loss: report.total_loss,
        summary: format!(
            "{} rounds, width bound {:e}",
            report.iters, report.width_bound
        ),
        staircase: report.staircase,
    })
}

fn square_problem(rows: &[Row]) -> Result<Problem<SquareLoss>, CliError> {
    let samples = rows
        .iter()
        .map(|r| Sample::new(r.score, SquareLoss::new(r.target, r.weight)));
    Ok(normalize(samples)?)
}

fn binary_samples(rows: &[Row]) -> Vec<BinarySample> {
    rows.iter()
        .map(|r| BinarySample {
            prob: r.score,
            label: r.target,
            weight: r.weight,
        })
        .collect()
}

/// Weighted-square samples for `loss`; log-loss goes through the reduction.
fn reduced_samples(rows: &[Row], loss: LossKind) -> Result<Vec<Sample<SquareLoss>>, CliError> {
    match loss {
        LossKind::Square => Ok(rows
            .iter()
            .map(|r| Sample::new(r.score, SquareLoss::new(r.target, r.weight)))
            .collect()),
        LossKind::Logloss => Ok(logloss_reduce(&binary_samples(rows))?),
    }
}

fn cmd_fit(args: &FitArgs, diag: &Diag) -> Result<(), CliError> {
    let anytime_only = args.delta.is_some() || args.bounds.is_some() || args.max_iters.is_some();
    if anytime_only && args.solver != Solver::Anytime {
        return Err(CliError::Input(
            "--delta, --bounds and --max-iters require --solver anytime".into(),
        ));
    }
    let config = match args.solver {
        Solver::Anytime => Some(anytime_config(args)?),
        _ => None,
    };
    let rows = input::training_file(&args.input)?;

    let fitted = match (args.loss, config) {
        (LossKind::Square, Some(cfg)) => fit_anytime(&square_problem(&rows)?, &cfg)?,
        (LossKind::Logloss, Some(cfg)) => {
            fit_anytime(&normalize(logloss_samples(&binary_samples(&rows))?)?, &cfg)?
        }
        (loss, None) => fit_offline(&normalize(reduced_samples(&rows, loss)?)?, args.solver)?,
    };

    let model = ModelFile::new(
        args.loss.tag(),
        &fitted.staircase,
        Metadata {
            merge_count: fitted.merge_count,
            total_loss: fitted.total_loss,
            solver: args.solver.tag().to_string(),
            delta: config.map(|c| c.delta),
        },
    );
    let text = model.to_json()?;
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    let mut msg = format!(
        "{} rows, {} steps, {} merges, loss {} ({} solver",
        rows.len(),
        fitted.staircase.step_count(),
        fitted.merge_count,
        fitted.total_loss,
        args.solver.tag()
    );
    if !fitted.summary.is_empty() {
        msg.push_str(", ");
        msg.push_str(&fitted.summary);
    }
    msg.push(')');
    diag.say(msg);
    Ok(())
}

fn cmd_apply(model: &std::path::Path, scores: &std::path::Path) -> Result<(), CliError> {
    let staircase = ModelFile::read(model)?.staircase()?;
    let scores = input::scores_file(scores)?;
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "score,calibrated")?;
    for x in scores {
        writeln!(out, "{x},{}", staircase.evaluate(x)?)?;
    }
    out.flush()?;
    Ok(())
}

fn format_values(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(f64::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn cmd_stream(path: &std::path::Path, loss: LossKind, diag: &Diag) -> Result<(), CliError> {
    let rows = input::training_file(path)?;
    let samples = reduced_samples(&rows, loss)?;
    let mut state = OnlineState::new();
    let mut out = BufWriter::new(io::stdout().lock());
    for (row, sample) in rows.iter().zip(samples) {
        match state.push(sample) {
            Ok(_) => {}
            Err(CalibrationError::OutOfOrder { score, last }) => {
                out.flush()?;
                return Err(CliError::Order(format!(
                    "row {}: score {score} arrives after {last}; stream input must be sorted by score",
                    row.row
                )));
            }
            Err(e) => return Err(CliError::Input(format!("row {}: {e}", row.row))),
        }
        let stairs = state.current()?;
        writeln!(
            out,
            "n={} s={} merges={} values={}",
            state.n_seen(),
            state.step_count(),
            state.cumulative_merges(),
            format_values(stairs.values())
        )?;
    }
    out.flush()?;
    diag.say(format!(
        "{} rows, {} steps, {} merges",
        rows.len(),
        state.step_count(),
        state.cumulative_merges()
    ));
    Ok(())
}
