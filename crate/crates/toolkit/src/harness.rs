//! Seeded Monte Carlo runs of `F_n` and `T_n` on `G(n,p)`.
//!
//! Trial `t` of cell `(n, p)` samples with seed
//! `mif_core::sample::trial_seed(base_seed, n, p, t)`, so any single graph
//! can be regenerated from a record. Trials of a cell run on a rayon pool
//! (`MIF_THREADS` threads when set); the cell's records are written in trial
//! order with one `write_all`, after every trial of the cell finished
//! exactly. A trial that exhausts the node budget aborts the run and nothing
//! of its cell is written.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use mif_core::moment::concentration_points;
use mif_core::sample::{sample_gnp, trial_seed, GnpParams};
use mif_core::solver::{Solver, Status};
use mif_core::{Probability, VertexSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const RECORD_HEADER: &str = "n,p,trial_seed,F_n,T_n,gap,k_low,k_high,in_window,status";
pub const WITNESS_HEADER: &str = "n,p,trial_seed,forest,tree";
/// Exploratory thresholds; falling below them is flagged in summaries, never
/// treated as failure.
pub const TOP2_TARGET: f64 = 0.9;
pub const GAP_TARGET: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub p: String,
    pub trial_seed: u64,
    #[serde(rename = "F_n")]
    pub f_n: usize,
    #[serde(rename = "T_n")]
    pub t_n: usize,
    pub gap: usize,
    pub k_low: i64,
    pub k_high: i64,
    pub in_window: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub n: usize,
    pub p: String,
    pub trial_seed: u64,
    /// Space-separated vertex list.
    pub forest: String,
    pub tree: String,
}

fn format_witness(w: &VertexSet) -> String {
    w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_witness(n: usize, s: &str) -> std::result::Result<VertexSet, String> {
    let vs = s
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad vertex {t:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    VertexSet::from_vertices(n, vs).map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub record: TrialRecord,
    pub witness: WitnessRecord,
}

/// Samples and solves one trial.
pub fn run_trial(n: usize, p: &Probability, eps: f64, seed: u64, budget: u64) -> Result<(Trial, Status)> {
    let g = sample_gnp(&GnpParams::new(n, p.clone(), seed))?;
    let both = Solver::new(&g).budget(budget).solve_both();
    let status = match (both.forest.status, both.tree.status) {
        (Status::Complete, Status::Complete) => Status::Complete,
        _ => Status::Incomplete,
    };
    for r in [&both.forest, &both.tree] {
        if !r.witness_is_valid(&g)? {
            return Err(Error::Invariant(format!("invalid {} witness at n={n} p={p} seed={seed}", r.mode.as_str())));
        }
    }
    let (f_n, t_n) = (both.forest.size, both.tree.size);
    if f_n < t_n {
        return Err(Error::Invariant(format!("F_n = {f_n} < T_n = {t_n} at n={n} p={p} seed={seed}")));
    }
    let (k_low, k_high) = concentration_points(n as u64, p, eps);
    let record = TrialRecord {
        n,
        p: p.as_str().to_string(),
        trial_seed: seed,
        f_n,
        t_n,
        gap: f_n - t_n,
        k_low,
        k_high,
        in_window: in_window(f_n, k_low, k_high),
        status: status.as_str().to_string(),
    };
    let witness = WitnessRecord {
        n,
        p: record.p.clone(),
        trial_seed: seed,
        forest: format_witness(&both.forest.witness),
        tree: format_witness(&both.tree.witness),
    };
    Ok((Trial { record, witness }, status))
}

fn in_window(f_n: usize, k_low: i64, k_high: i64) -> bool {
    let f = f_n as i64;
    f == k_low || f == k_high
}

/// Appends records and witnesses to their files, one cell at a time.
pub struct RecordSink {
    records: File,
    witnesses: File,
    path: PathBuf,
}

impl RecordSink {
    /// Creates (truncates) the records file and its witness sidecar. The
    /// first line of the records file is the `# ...` comment given here.
    pub fn create(path: &Path, comment: &str) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let wpath = ExperimentConfig::witness_path(path);
        let mut records = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut witnesses = File::create(&wpath).map_err(|e| Error::io(&wpath, e))?;
        writeln!(records, "# {comment}\n{RECORD_HEADER}").map_err(|e| Error::io(path, e))?;
        writeln!(witnesses, "{WITNESS_HEADER}").map_err(|e| Error::io(&wpath, e))?;
        Ok(Self {
            records,
            witnesses,
            path: path.to_path_buf(),
        })
    }

    pub fn append(&mut self, trials: &[Trial]) -> Result<()> {
        let records = to_csv_rows(trials.iter().map(|t| &t.record));
        let witnesses = to_csv_rows(trials.iter().map(|t| &t.witness));
        let wpath = ExperimentConfig::witness_path(&self.path);
        self.records.write_all(&records).map_err(|e| Error::io(&self.path, e))?;
        self.witnesses.write_all(&witnesses).map_err(|e| Error::io(&wpath, e))?;
        self.records.flush().map_err(|e| Error::io(&self.path, e))?;
        self.witnesses.flush().map_err(|e| Error::io(&wpath, e))
    }
}

fn to_csv_rows<'a, T: Serialize + 'a>(rows: impl Iterator<Item = &'a T>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// Records as CSV text with the header line (no comment line).
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    out.push_str(&String::from_utf8(to_csv_rows(records.iter())).expect("utf-8"));
    out
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MIF_THREADS") {
        let t: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::Usage(format!("MIF_THREADS must be a positive integer, got {v:?}")))?;
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::Usage(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<TrialRecord>,
    pub witnesses: Vec<WitnessRecord>,
    pub cells: Vec<CellSummary>,
}

/// Runs every cell of `cfg` in `n_list × p_list` order. `on_cell` sees each
/// summary as soon as its cell is done.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    mut sink: Option<&mut RecordSink>,
    mut on_cell: impl FnMut(&CellSummary),
) -> Result<Experiment> {
    cfg.validate().map_err(Error::Usage)?;
    let pool = thread_pool()?;
    let mut out = Experiment {
        records: Vec::new(),
        witnesses: Vec::new(),
        cells: Vec::new(),
    };
    for &n in &cfg.n_list {
        for p in &cfg.p_list {
            let results: Vec<Result<(Trial, Status)>> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(n, p, cfg.eps, trial_seed(cfg.base_seed, n, p, t), cfg.node_budget))
                    .collect()
            });
            let mut trials = Vec::with_capacity(results.len());
            let mut incomplete = Vec::new();
            for r in results {
                let (trial, status) = r?;
                if status == Status::Incomplete {
                    incomplete.push(trial.record.trial_seed);
                }
                trials.push(trial);
            }
            if !incomplete.is_empty() {
                return Err(Error::Incomplete(format!(
                    "cell n={n} p={p} aborted: {} of {} trials hit the node budget {} (seeds {:?})",
                    incomplete.len(),
                    cfg.trials,
                    cfg.node_budget,
                    incomplete
                )));
            }
            if let Some(s) = sink.as_deref_mut() {
                s.append(&trials)?;
            }
            let records: Vec<TrialRecord> = trials.iter().map(|t| t.record.clone()).collect();
            let cell = summarize_cell(&records).expect("non-empty cell");
            on_cell(&cell);
            out.cells.push(cell);
            for t in trials {
                out.records.push(t.record);
                out.witnesses.push(t.witness);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub p: String,
    pub trials: u64,
    /// `F_n` value → number of trials.
    pub f_distribution: BTreeMap<usize, u64>,
    pub t_distribution: BTreeMap<usize, u64>,
    /// Largest fraction of trials on two consecutive values `{a, a+1}`.
    pub top2_mass: f64,
    pub top2_values: (usize, usize),
    pub mean_gap: f64,
    pub frac_gap_le_1: f64,
    pub frac_in_window: f64,
    pub k_low: i64,
    pub k_high: i64,
    /// Exploratory targets missed; informational only.
    pub flags: Vec<String>,
}

/// Summary of the records of one cell; `None` when `records` is empty.
pub fn summarize_cell(records: &[TrialRecord]) -> Option<CellSummary> {
    let first = records.first()?;
    let total = records.len() as u64;
    let mut f_distribution = BTreeMap::new();
    let mut t_distribution = BTreeMap::new();
    let (mut gap_sum, mut gap_le_1, mut inside) = (0u64, 0u64, 0u64);
    for r in records {
        *f_distribution.entry(r.f_n).or_insert(0) += 1;
        *t_distribution.entry(r.t_n).or_insert(0) += 1;
        gap_sum += r.gap as u64;
        gap_le_1 += (r.gap <= 1) as u64;
        inside += r.in_window as u64;
    }
    let (mut best, mut top2_values) = (0u64, (first.f_n, first.f_n + 1));
    for (&a, &c) in &f_distribution {
        let mass = c + f_distribution.get(&(a + 1)).copied().unwrap_or(0);
        if mass > best {
            best = mass;
            top2_values = (a, a + 1);
        }
    }
    let frac = |x: u64| x as f64 / total as f64;
    let top2_mass = frac(best);
    let frac_gap_le_1 = frac(gap_le_1);
    let mut flags = Vec::new();
    if top2_mass < TOP2_TARGET {
        flags.push(format!("top2_mass {top2_mass} below exploratory target {TOP2_TARGET}"));
    }
    if frac_gap_le_1 < GAP_TARGET {
        flags.push(format!("frac_gap_le_1 {frac_gap_le_1} below exploratory target {GAP_TARGET}"));
    }
    Some(CellSummary {
        n: first.n,
        p: first.p.clone(),
        trials: total,
        f_distribution,
        t_distribution,
        top2_mass,
        top2_values,
        mean_gap: gap_sum as f64 / total as f64,
        frac_gap_le_1,
        frac_in_window: frac(inside),
        k_low: first.k_low,
        k_high: first.k_high,
        flags,
    })
}

/// Records grouped by `(n, p)` in order of first appearance.
pub fn group_cells(records: &[TrialRecord]) -> Vec<Vec<TrialRecord>> {
    let mut groups: Vec<Vec<TrialRecord>> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|g| g[0].n == r.n && g[0].p == r.p) {
            Some(g) => g.push(r.clone()),
            None => groups.push(vec![r.clone()]),
        }
    }
    groups
}

pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    group_cells(records).iter().filter_map(|g| summarize_cell(g)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRow {
    pub n: usize,
    pub p: String,
    pub eps: f64,
    pub k_low: i64,
    pub k_high: i64,
    pub in_window_fraction: f64,
}

/// `0, 0.05, ..., 0.95`.
pub fn default_eps_grid() -> Vec<f64> {
    (0..20).map(|i| i as f64 / 20.0).collect()
}

/// In-window fraction of every cell for each `ε` of `grid`, from the stored
/// `F_n` values alone.
pub fn sweep_epsilon(records: &[TrialRecord], grid: &[f64]) -> Result<Vec<EpsRow>> {
    let mut rows = Vec::new();
    for cell in group_cells(records) {
        let p: Probability = cell[0].p.parse()?;
        for &eps in grid {
            let (k_low, k_high) = concentration_points(cell[0].n as u64, &p, eps);
            let hits = cell.iter().filter(|r| in_window(r.f_n, k_low, k_high)).count();
            rows.push(EpsRow {
                n: cell[0].n,
                p: cell[0].p.clone(),
                eps,
                k_low,
                k_high,
                in_window_fraction: hits as f64 / cell.len() as f64,
            });
        }
    }
    Ok(rows)
}

/// Per cell, the first row of the sweep with the largest in-window fraction.
pub fn best_eps(rows: &[EpsRow]) -> Vec<EpsRow> {
    let mut best: Vec<EpsRow> = Vec::new();
    for r in rows {
        match best.iter_mut().find(|b| b.n == r.n && b.p == r.p) {
            Some(b) if r.in_window_fraction > b.in_window_fraction => *b = r.clone(),
            Some(_) => {}
            None => best.push(r.clone()),
        }
    }
    best
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::parse(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != RECORD_HEADER {
        return Err(Error::parse(path, format!("expected header {RECORD_HEADER:?}")));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: TrialRecord = row.map_err(|e| Error::parse(path, e))?;
        if r.gap != r.f_n.wrapping_sub(r.t_n) || r.f_n < r.t_n || r.k_high != r.k_low + 1 {
            return Err(Error::parse(path, format!("inconsistent record {r:?}")));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn read_witnesses(path: &Path) -> Result<Vec<WitnessRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    rdr.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path, e)))
        .collect()
}

/// Regenerates every graph and re-checks both witnesses with the graph
/// predicates. Returns the number of trials checked.
pub fn verify_witnesses(records: &[TrialRecord], witnesses: &[WitnessRecord]) -> Result<usize> {
    if records.len() != witnesses.len() {
        return Err(Error::Invariant(format!(
            "{} records but {} witness rows",
            records.len(),
            witnesses.len()
        )));
    }
    records
        .par_iter()
        .zip(witnesses.par_iter())
        .try_for_each(|(r, w)| -> Result<()> {
            let bad = |what: &str| Error::Invariant(format!("{what} at n={} p={} seed={}", r.n, r.p, r.trial_seed));
            if (r.n, &r.p, r.trial_seed) != (w.n, &w.p, w.trial_seed) {
                return Err(bad("witness row does not match record"));
            }
            let g = sample_gnp(&GnpParams::new(r.n, r.p.parse()?, r.trial_seed))?;
            let forest = parse_witness(r.n, &w.forest).map_err(|e| bad(&e))?;
            let tree = parse_witness(r.n, &w.tree).map_err(|e| bad(&e))?;
            if forest.len() != r.f_n || !g.is_induced_forest(&forest)? {
                return Err(bad("forest witness does not certify F_n"));
            }
            if tree.len() != r.t_n || !(g.is_induced_tree(&tree)? || r.t_n == 0) {
                return Err(bad("tree witness does not certify T_n"));
            }
            Ok(())
        })?;
    Ok(records.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary<'a> {
    pub config: &'a ExperimentConfig,
    pub cells: &'a [CellSummary],
    pub eps_sweep: Vec<EpsRow>,
    pub eps_best: Vec<EpsRow>,
    pub top2_target: f64,
    pub gap_target: f64,
}

impl<'a> ExperimentSummary<'a> {
    pub fn new(config: &'a ExperimentConfig, exp: &'a Experiment, grid: &[f64]) -> Result<Self> {
        let eps_sweep = sweep_epsilon(&exp.records, grid)?;
        Ok(Self {
            config,
            cells: &exp.cells,
            eps_best: best_eps(&eps_sweep),
            eps_sweep,
            top2_target: TOP2_TARGET,
            gap_target: GAP_TARGET,
        })
    }
}
