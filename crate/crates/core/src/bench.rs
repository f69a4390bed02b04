//! Cross-validated learner-count sweeps, training-fraction sweeps and their
//! reports.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adaboost::{sign, AdaBoostModel, Booster};
use crate::data::{self, fraction_split, stratified_kfold, DataFormat, Dataset};
use crate::error::{Error, Result};
use crate::pipeline::{hybrid_from_boosting, HybridOptions, MarginMode};
use crate::svm::SolverOptions;

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_RUNS: usize = 5;
pub const DEFAULT_FRACTION_ROUNDS: usize = 200;
/// Dual stopping tolerance used by the sweeps.
pub const DEFAULT_BENCH_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Adaboost,
    Hybrid,
    Both,
}

impl Method {
    fn runs_adaboost(self) -> bool {
        matches!(self, Method::Adaboost | Method::Both)
    }

    fn runs_hybrid(self) -> bool {
        matches!(self, Method::Hybrid | Method::Both)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Adaboost => "adaboost",
            Method::Hybrid => "hybrid",
            Method::Both => "both",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaboost" => Ok(Method::Adaboost),
            "hybrid" => Ok(Method::Hybrid),
            "both" => Ok(Method::Both),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timing {
    /// Wall-clock seconds per cell.
    Wall,
    /// No timing; the time column is reported as missing.
    None,
}

impl FromStr for Timing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(Timing::Wall),
            "none" => Ok(Timing::None),
            other => Err(Error::InvalidArgument(format!("unknown timing mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Tsv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub format: DataFormat,
    pub method: Method,
    /// Ensemble sizes; a fraction sweep needs exactly one.
    pub learners: Vec<usize>,
    pub c: f64,
    pub tol: f64,
    pub margin_mode: MarginMode,
    pub folds: usize,
    pub runs: usize,
    pub seed: u64,
    pub fractions: Option<Vec<f64>>,
    pub timing: Timing,
}

impl ExperimentConfig {
    pub fn new(data: impl Into<PathBuf>) -> Self {
        let data = data.into();
        Self {
            format: DataFormat::from_path(&data),
            data,
            method: Method::Both,
            learners: vec![100],
            c: crate::svm::DEFAULT_C,
            tol: DEFAULT_BENCH_TOL,
            margin_mode: MarginMode::Soft,
            folds: DEFAULT_FOLDS,
            runs: DEFAULT_RUNS,
            seed: 0,
            fractions: None,
            timing: Timing::Wall,
        }
    }

    /// Seeds of the individual runs: `seed, seed + 1, …`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs as u64).map(|r| self.seed.wrapping_add(r)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.learners.is_empty() || self.learners.contains(&0) {
            return Err(Error::InvalidArgument("learner counts must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.runs < 1 {
            return Err(Error::InvalidArgument("runs must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn hybrid_options(&self) -> HybridOptions {
        HybridOptions {
            c: self.c,
            mode: self.margin_mode,
            solver: SolverOptions::with_tol(self.tol),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Learners,
    Fraction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: String,
    pub method: Method,
    /// Ensemble size or training fraction, depending on the sweep.
    pub param: f64,
    /// Mean test accuracy in percent.
    pub acc_mean: f64,
    /// Sample standard deviation of the per-evaluation accuracies.
    pub acc_std: f64,
    /// Mean over runs of the summed train+test seconds of that run.
    pub time_mean_s: Option<f64>,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: SweepKind,
    pub dataset: String,
    pub seeds: Vec<u64>,
    pub folds: Option<usize>,
    pub c: f64,
    pub tol: f64,
    pub margin_mode: MarginMode,
    /// Whether timed work overlapped with other timed work.
    pub concurrent: bool,
    pub cells: Vec<Cell>,
}

/// Per-cell accumulator.
#[derive(Default)]
struct Tally {
    accuracies: Vec<f64>,
    run_seconds: Vec<f64>,
}

impl Tally {
    fn cell(&self, dataset: &str, method: Method, param: f64, timing: Timing) -> Cell {
        let n = self.accuracies.len() as f64;
        let mean = self.accuracies.iter().sum::<f64>() / n;
        let std = if self.accuracies.len() > 1 {
            (self.accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let time = match timing {
            Timing::Wall => Some(self.run_seconds.iter().sum::<f64>() / self.run_seconds.len() as f64),
            Timing::None => None,
        };
        Cell {
            dataset: dataset.to_string(),
            method,
            param,
            acc_mean: mean,
            acc_std: std,
            time_mean_s: time,
            evaluations: self.accuracies.len(),
        }
    }

    fn add_run_time(&mut self, run: usize, seconds: f64) {
        if self.run_seconds.len() <= run {
            self.run_seconds.resize(run + 1, 0.0);
        }
        self.run_seconds[run] += seconds;
    }
}

/// Accuracy and seconds of one ensemble size within one train/test split.
struct Evaluation {
    adaboost: Option<(f64, f64)>,
    hybrid: Option<(f64, f64)>,
}

/// Trains one ensemble of the largest size and evaluates every requested
/// prefix of it. `sizes` must be ascending.
fn evaluate_prefixes(
    train: &Dataset,
    test: &Dataset,
    sizes: &[usize],
    config: &ExperimentConfig,
) -> Result<Vec<Evaluation>> {
    let t_max = *sizes.last().expect("non-empty sizes");
    let options = config.hybrid_options();
    let mut booster = Booster::new(train)?;
    let mut boost_seconds = 0.0;
    let mut out = Vec::with_capacity(sizes.len());
    for &t in sizes {
        let start = Instant::now();
        while booster.model().n_rounds() < t {
            booster.step()?;
        }
        boost_seconds += start.elapsed().as_secs_f64();
        let model = booster.model();

        let adaboost = if config.method.runs_adaboost() {
            let start = Instant::now();
            let acc = adaboost_accuracy(model, test);
            Some((acc, boost_seconds + start.elapsed().as_secs_f64()))
        } else {
            None
        };
        let hybrid = if config.method.runs_hybrid() {
            let start = Instant::now();
            let hybrid = hybrid_from_boosting(train, model.clone(), &options)?;
            let acc = 100.0 * (1.0 - hybrid.error_rate(test)?);
            Some((acc, boost_seconds + start.elapsed().as_secs_f64()))
        } else {
            None
        };
        out.push(Evaluation { adaboost, hybrid });
    }
    debug_assert_eq!(booster.model().n_rounds(), t_max);
    Ok(out)
}

fn adaboost_accuracy(model: &AdaBoostModel, test: &Dataset) -> f64 {
    let correct = (0..test.n_samples())
        .filter(|&i| sign(model.score(test.row(i))) == test.labels()[i])
        .count();
    100.0 * correct as f64 / test.n_samples() as f64
}

fn methods(method: Method) -> Vec<Method> {
    match method {
        Method::Both => vec![Method::Adaboost, Method::Hybrid],
        m => vec![m],
    }
}

fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    data::load(&config.data, config.format)
}

pub fn run_learner_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    learner_sweep(&load_dataset(config)?, config)
}

/// Repeated stratified k-fold cross-validation for every ensemble size.
pub fn learner_sweep(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut sizes = config.learners.clone();
    sizes.sort_unstable();
    sizes.dedup();

    let mut tallies: Vec<[Tally; 2]> = sizes.iter().map(|_| Default::default()).collect();
    let seeds = config.seeds();
    for (run, &seed) in seeds.iter().enumerate() {
        let plan = stratified_kfold(dataset, config.folds, seed)?;
        for fold in 0..config.folds {
            let train = dataset.subset(&plan.train_indices(fold));
            let test = dataset.subset(&plan.test_indices(fold));
            let evaluations = evaluate_prefixes(&train, &test, &sizes, config)?;
            record(&mut tallies, &evaluations, run);
        }
    }
    Ok(ExperimentResult {
        kind: SweepKind::Learners,
        dataset: dataset.name().to_string(),
        seeds,
        folds: Some(config.folds),
        c: config.c,
        tol: config.tol,
        margin_mode: config.margin_mode,
        concurrent: false,
        cells: collect_cells(dataset.name(), config, &tallies, sizes.iter().map(|&t| t as f64)),
    })
}

pub fn run_fraction_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    fraction_sweep(&load_dataset(config)?, config)
}

/// One stratified train/test split per run and fraction, with a single
/// ensemble size.
pub fn fraction_sweep(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let fractions = match &config.fractions {
        Some(f) if !f.is_empty() => f.clone(),
        _ => return Err(Error::InvalidArgument("fraction list is empty".into())),
    };
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::InvalidArgument(format!("fraction {f} outside (0, 1)")));
    }
    let [rounds] = config.learners[..] else {
        return Err(Error::InvalidArgument(
            "a fraction sweep takes exactly one learner count".into(),
        ));
    };
    let mut sorted = fractions;
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let mut tallies: Vec<[Tally; 2]> = sorted.iter().map(|_| Default::default()).collect();
    let seeds = config.seeds();
    for (k, &fraction) in sorted.iter().enumerate() {
        for (run, &seed) in seeds.iter().enumerate() {
            let (train, test) = fraction_split(dataset, fraction, seed)?;
            let evaluations = evaluate_prefixes(&train, &test, &[rounds], config)?;
            record(&mut tallies[k..=k], &evaluations, run);
        }
    }
    Ok(ExperimentResult {
        kind: SweepKind::Fraction,
        dataset: dataset.name().to_string(),
        seeds,
        folds: None,
        c: config.c,
        tol: config.tol,
        margin_mode: config.margin_mode,
        concurrent: false,
        cells: collect_cells(dataset.name(), config, &tallies, sorted.iter().copied()),
    })
}

fn record(tallies: &mut [[Tally; 2]], evaluations: &[Evaluation], run: usize) {
    for (slot, ev) in tallies.iter_mut().zip(evaluations) {
        for (tally, outcome) in slot.iter_mut().zip([ev.adaboost, ev.hybrid]) {
            if let Some((acc, seconds)) = outcome {
                tally.accuracies.push(acc);
                tally.add_run_time(run, seconds);
            }
        }
    }
}

fn collect_cells(
    name: &str,
    config: &ExperimentConfig,
    tallies: &[[Tally; 2]],
    params: impl Iterator<Item = f64>,
) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (slot, param) in tallies.iter().zip(params) {
        for method in methods(config.method) {
            let tally = &slot[usize::from(method == Method::Hybrid)];
            cells.push(tally.cell(name, method, param, config.timing));
        }
    }
    cells
}

pub fn render_report(result: &ExperimentResult, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Tsv => Ok(render_tsv(result)),
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(result)?;
            text.push('\n');
            Ok(text)
        }
    }
}

fn render_tsv(result: &ExperimentResult) -> String {
    let mut out = String::from("dataset\tmethod\tparam\tacc_mean\tacc_std\ttime_mean_s\n");
    for c in &result.cells {
        let time = c.time_mean_s.map_or_else(|| "NA".to_string(), |t| format!("{t:.4}"));
        writeln!(
            out,
            "{}\t{}\t{}\t{:.2}\t{:.2}\t{}",
            c.dataset, c.method, c.param, c.acc_mean, c.acc_std, time
        )
        .unwrap();
    }
    out
}

pub fn emit_report(result: &ExperimentResult, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(result, format)?)?;
    Ok(())
}
