//! The `mif` command line.
//!
//! Exit codes: 0 success, 1 violated invariant, 2 usage error, 3 solver
//! budget exhausted. Results go to stdout, diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use mif_core::forest::{ForestCountTable, GEvaluator, DEFAULT_EXACT_CAP};
use mif_core::moment::{concentration_points, MomentEngine, MomentQuery};
use mif_core::proof::verify_all;
use mif_core::solver::{Mode, Solver, Status, DEFAULT_NODE_BUDGET};
use mif_core::Probability;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result, EXIT_INCOMPLETE, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE};
use crate::graph_io::read_graph;
use crate::harness::{
    best_eps, default_eps_grid, read_records, read_witnesses, run_experiment, summarize, sweep_epsilon,
    verify_witnesses, ExperimentSummary, RecordSink,
};
use crate::plot::{histogram_file_name, histogram_svg};

#[derive(Debug, Parser)]
#[command(name = "mif", version, about = "Induced forests and trees in G(n,p): counts, moments, inequality checks, exact solver and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Labeled forest counts phi_l(k) and g_l(k).
    CountForests(CountForestsArgs),
    /// First moments of induced trees and forests at size K.
    Expectation(ExpectationArgs),
    /// The two predicted values of the maximum induced forest size.
    ConcentrationPoints(ConcentrationArgs),
    /// Grid checks of the inequalities behind the forest/tree ratio bound.
    VerifyInequalities(VerifyArgs),
    /// Maximum induced forest or tree of a graph file.
    Solve(SolveArgs),
    /// Monte Carlo experiment over sampled graphs.
    Simulate(SimulateArgs),
    /// Summaries, epsilon sweep and histograms from a records CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JsonFormat {
    Json,
}

#[derive(Debug, Args)]
pub struct CountForestsArgs {
    /// Number of labeled vertices.
    #[arg(long)]
    pub k: usize,
    /// Only this number of components (default: all of 1..=k).
    #[arg(long)]
    pub ell: Option<usize>,
    /// Edge probability for the g column, as a decimal such as 0.5.
    #[arg(long)]
    pub p: Option<String>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExpectationArgs {
    /// Number of vertices.
    #[arg(long)]
    pub n: u64,
    /// Edge probability, as a decimal such as 0.5.
    #[arg(long)]
    pub p: String,
    /// Offset added inside the floor defining K.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    /// Explicit size K instead of floor(2 log_{1/(1-p)}(enp) + 4 + eps).
    #[arg(long = "K")]
    pub big_k: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    /// Number of vertices.
    #[arg(long)]
    pub n: u64,
    /// Edge probability, as a decimal such as 0.5.
    #[arg(long)]
    pub p: String,
    /// Offset added inside the floor.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest k of the grid.
    #[arg(long, default_value_t = mif_core::proof::DEFAULT_K_MAX)]
    pub kmax: usize,
    /// Comma-separated edge probabilities for the M_l estimates.
    #[arg(long, value_delimiter = ',', default_values_t = ["0.3".to_string(), "0.5".to_string(), "0.7".to_string()])]
    pub p: Vec<String>,
    /// Largest l for the M_l estimates.
    #[arg(long, default_value_t = 40)]
    pub ell_max: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    pub format: JsonFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Forest,
    Tree,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// forest or tree.
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Graph file: a line "n m", then m lines "u v" with u < v.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node budget of the search.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    pub format: JsonFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML experiment config; the flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Comma-separated edge probabilities.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<String>>,
    /// Offset used for the recorded concentration points.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Trials per (n, p) cell.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed mixed into every trial seed.
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// Solver node budget per trial.
    #[arg(long)]
    pub node_budget: Option<u64>,
    /// Records CSV; the witness sidecar and summary JSON are written next to it.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Re-check every stored witness against its regenerated graph.
    #[arg(long)]
    pub verify: bool,
    /// Comma-separated epsilon values for the window sweep.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Records CSV written by simulate.
    #[arg(long)]
    pub records: PathBuf,
    /// Witness sidecar; when given, every witness is re-checked.
    #[arg(long)]
    pub witnesses: Option<PathBuf>,
    /// Comma-separated epsilon values for the window sweep.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps_grid: Option<Vec<f64>>,
    /// Directory for one SVG histogram of F_n per cell.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

pub fn command() -> clap::Command {
    Cli::command()
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn parse_p(s: &str) -> Result<Probability> {
    Ok(s.parse()?)
}

fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Usage(e.to_string()))?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Usage(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<stdout>", e))
}

fn run(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::CountForests(a) => count_forests(a, out),
        Command::Expectation(a) => expectation(a, out, err),
        Command::ConcentrationPoints(a) => concentration(a, out),
        Command::VerifyInequalities(a) => verify(a, out, err),
        Command::Solve(a) => solve(a, out, err),
        Command::Simulate(a) => simulate(a, out, err),
        Command::Report(a) => report(a, out, err),
    }
}

#[derive(Serialize)]
struct CountRow {
    k: usize,
    ell: usize,
    /// Decimal string, never a float.
    phi: String,
    g: Option<f64>,
}

fn count_forests(a: CountForestsArgs, out: &mut dyn Write) -> Result<i32> {
    if a.k == 0 || a.k > DEFAULT_EXACT_CAP {
        return Err(Error::Usage(format!("--k must be in 1..={DEFAULT_EXACT_CAP}")));
    }
    let p = a.p.as_deref().map(parse_p).transpose()?;
    let mut table = ForestCountTable::default();
    let mut eval = GEvaluator::default();
    let ells: Vec<usize> = match a.ell {
        Some(l) => vec![l],
        None => (1..=a.k).collect(),
    };
    let mut rows = Vec::with_capacity(ells.len());
    for ell in ells {
        let g = match &p {
            Some(p) => Some(eval.g(a.k, ell, p)?.to_f64()),
            None => None,
        };
        rows.push(CountRow {
            k: a.k,
            ell,
            phi: table.phi(a.k, ell as i64)?.to_string(),
            g,
        });
    }
    match a.format {
        Format::Csv => write_csv(out, &rows)?,
        Format::Json => write_json(out, &rows)?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExpectationRow<'a> {
    n: u64,
    p: &'a str,
    eps: f64,
    #[serde(rename = "K")]
    k: usize,
    ell: usize,
    #[serde(rename = "log_E_Y_ell")]
    log_e_y_ell: f64,
    #[serde(rename = "log_E_X")]
    log_e_x: f64,
    ratio: f64,
    limit_ratio: f64,
}

fn expectation(a: ExpectationArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let p = parse_p(&a.p)?;
    let q = match a.big_k {
        Some(k) => MomentQuery::with_k(a.n, p.clone(), a.eps, k)?,
        None => MomentQuery::upper(a.n, p.clone(), a.eps)?,
    };
    let r = MomentEngine::default().expected_forest_count(&q)?;
    if r.upper_bound_certified {
        let _ = writeln!(err, "E[Y_n] < 1e-3: upper bound certified at K = {}", q.k);
    }
    match a.format {
        Format::Csv => {
            let rows: Vec<ExpectationRow> = r
                .e_y_by_ell
                .iter()
                .enumerate()
                .map(|(i, y)| ExpectationRow {
                    n: a.n,
                    p: p.as_str(),
                    eps: a.eps,
                    k: q.k,
                    ell: i + 1,
                    log_e_y_ell: y.ln(),
                    log_e_x: r.e_x.ln(),
                    ratio: r.ratio,
                    limit_ratio: r.limit_ratio,
                })
                .collect();
            write_csv(out, &rows)?;
        }
        Format::Json => {
            let value = serde_json::json!({
                "n": a.n,
                "p": p.as_str(),
                "eps": a.eps,
                "K": q.k,
                "log_E_X": r.e_x.ln(),
                "log_E_Y": r.e_y.ln(),
                "log_E_Y_by_ell": r.e_y_by_ell.iter().map(|y| y.ln()).collect::<Vec<_>>(),
                "ratio": r.ratio,
                "ratio_factored": r.ratio_factored,
                "limit_ratio": r.limit_ratio,
                "upper_bound_certified": r.upper_bound_certified,
            });
            write_json(out, &value)?;
        }
    }
    Ok(EXIT_OK)
}

fn concentration(a: ConcentrationArgs, out: &mut dyn Write) -> Result<i32> {
    let p = parse_p(&a.p)?;
    if a.n == 0 {
        return Err(Error::Usage("--n must be at least 1".into()));
    }
    let (k_low, k_high) = concentration_points(a.n, &p, a.eps);
    #[derive(Serialize)]
    struct Row<'a> {
        n: u64,
        p: &'a str,
        eps: f64,
        k_low: i64,
        k_high: i64,
    }
    let row = Row {
        n: a.n,
        p: p.as_str(),
        eps: a.eps,
        k_low,
        k_high,
    };
    match a.format {
        Format::Csv => write_csv(out, &[row])?,
        Format::Json => write_json(out, &row)?,
    }
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let ps = a.p.iter().map(|s| parse_p(s)).collect::<Result<Vec<_>>>()?;
    let suite = verify_all(a.kmax, &ps, a.ell_max)?;
    write_json(out, &suite)?;
    let violations = suite.violation_count();
    if violations > 0 {
        let _ = writeln!(err, "{violations} inequality violations");
        return Ok(EXIT_INVARIANT);
    }
    Ok(EXIT_OK)
}

fn solve(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let g = read_graph(&a.graph)?;
    let mode = match a.mode {
        ModeArg::Forest => Mode::Forest,
        ModeArg::Tree => Mode::Tree,
    };
    let r = Solver::new(&g).budget(a.budget).solve(mode);
    let value = serde_json::json!({
        "mode": r.mode.as_str(),
        "size": r.size,
        "witness": r.witness.to_vec(),
        "nodes_explored": r.nodes_explored,
        "status": r.status.as_str(),
    });
    write_json(out, &value)?;
    if !r.witness_is_valid(&g)? {
        return Err(Error::Invariant("solver witness failed re-validation".into()));
    }
    if r.status == Status::Incomplete {
        let _ = writeln!(err, "node budget {} exhausted; size is only a lower bound", a.budget);
        return Ok(EXIT_INCOMPLETE);
    }
    Ok(EXIT_OK)
}

/// Config file (if any) with the flags applied on top.
pub fn resolve_config(a: &SimulateArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            n_list: Vec::new(),
            p_list: Vec::new(),
            eps: 0.0,
            trials: 0,
            base_seed: 0,
            node_budget: DEFAULT_NODE_BUDGET,
            output: None,
        },
    };
    if let Some(v) = &a.n_list {
        cfg.n_list = v.clone();
    }
    if let Some(v) = &a.p_list {
        cfg.p_list = v.iter().map(|s| parse_p(s)).collect::<Result<_>>()?;
    }
    if let Some(v) = a.eps {
        cfg.eps = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.base_seed {
        cfg.base_seed = v;
    }
    if let Some(v) = a.node_budget {
        cfg.node_budget = v;
    }
    if let Some(v) = &a.output {
        cfg.output = Some(v.clone());
    }
    cfg.validate().map_err(Error::Usage)?;
    Ok(cfg)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = resolve_config(&a)?;
    let grid = a.eps_grid.clone().unwrap_or_else(default_eps_grid);
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut sink = match &cfg.output {
        Some(path) => Some(RecordSink::create(path, &format!("generated_at_unix={stamp}"))?),
        None => None,
    };
    let exp = run_experiment(&cfg, sink.as_mut(), |cell| {
        let _ = writeln!(
            err,
            "cell n={} p={}: {} trials, top-2 mass {:.3}, gap<=1 {:.3}, in window {:.3}",
            cell.n, cell.p, cell.trials, cell.top2_mass, cell.frac_gap_le_1, cell.frac_in_window
        );
        for flag in &cell.flags {
            let _ = writeln!(err, "  flag (exploratory): {flag}");
        }
    })?;
    drop(sink);
    if a.verify {
        let checked = match &cfg.output {
            Some(path) => verify_witnesses(&read_records(path)?, &read_witnesses(&ExperimentConfig::witness_path(path))?)?,
            None => verify_witnesses(&exp.records, &exp.witnesses)?,
        };
        let _ = writeln!(err, "verified {checked} witnesses");
    }
    let summary = ExperimentSummary::new(&cfg, &exp, &grid)?;
    if let Some(path) = &cfg.output {
        let spath = ExperimentConfig::summary_path(path);
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Usage(e.to_string()))?;
        std::fs::write(&spath, text + "\n").map_err(|e| Error::io(&spath, e))?;
    }
    write_json(out, &summary)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CellRow<'a> {
    n: usize,
    p: &'a str,
    trials: u64,
    top2_mass: f64,
    top2_low: usize,
    top2_high: usize,
    mean_gap: f64,
    frac_gap_le_1: f64,
    frac_in_window: f64,
    k_low: i64,
    k_high: i64,
    /// `value:count` pairs separated by `;`.
    f_distribution: String,
    flags: String,
}

fn report(a: ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let records = read_records(&a.records)?;
    if let Some(w) = &a.witnesses {
        let checked = verify_witnesses(&records, &read_witnesses(w)?)?;
        let _ = writeln!(err, "verified {checked} witnesses");
    }
    let cells = summarize(&records);
    let grid = a.eps_grid.clone().unwrap_or_else(default_eps_grid);
    let sweep = sweep_epsilon(&records, &grid)?;
    if let Some(dir) = &a.plot_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for cell in &cells {
            let path = dir.join(histogram_file_name(cell));
            std::fs::write(&path, histogram_svg(cell)).map_err(|e| Error::io(&path, e))?;
        }
    }
    for cell in &cells {
        for flag in &cell.flags {
            let _ = writeln!(err, "cell n={} p={}: flag (exploratory): {flag}", cell.n, cell.p);
        }
    }
    match a.format {
        Format::Csv => {
            let rows: Vec<CellRow> = cells
                .iter()
                .map(|c| CellRow {
                    n: c.n,
                    p: &c.p,
                    trials: c.trials,
                    top2_mass: c.top2_mass,
                    top2_low: c.top2_values.0,
                    top2_high: c.top2_values.1,
                    mean_gap: c.mean_gap,
                    frac_gap_le_1: c.frac_gap_le_1,
                    frac_in_window: c.frac_in_window,
                    k_low: c.k_low,
                    k_high: c.k_high,
                    f_distribution: c
                        .f_distribution
                        .iter()
                        .map(|(v, n)| format!("{v}:{n}"))
                        .collect::<Vec<_>>()
                        .join(";"),
                    flags: c.flags.join("; "),
                })
                .collect();
            write_csv(out, &rows)?;
        }
        Format::Json => {
            let value = serde_json::json!({
                "cells": cells,
                "eps_best": best_eps(&sweep),
                "eps_sweep": sweep,
            });
            write_json(out, &value)?;
        }
    }
    Ok(EXIT_OK)
}
