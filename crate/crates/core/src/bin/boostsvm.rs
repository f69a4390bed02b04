use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boostsvm::adaboost::{train_adaboost, AdaBoostModel};
use boostsvm::bench::{
    render_report, run_fraction_sweep, run_learner_sweep, ExperimentConfig, Method, ReportFormat,
    Timing, DEFAULT_BENCH_TOL, DEFAULT_FOLDS, DEFAULT_FRACTION_ROUNDS, DEFAULT_RUNS,
};
use boostsvm::data::{self, DataFormat, Dataset};
use boostsvm::margins::normalized_margins;
use boostsvm::pipeline::{margin_growth_study, train_hybrid_with, GrowthPoint, HybridModel, HybridOptions, MarginMode};
use boostsvm::svm::{DEFAULT_C, DEFAULT_TOL};
use boostsvm::{Error, Result};

#[derive(Parser)]
#[command(name = "boostsvm", version, about = "AdaBoost with decision stumps and an SVM re-weighting of the stump votes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validated accuracy for a list of ensemble sizes.
    SweepLearners(SweepArgs),
    /// Accuracy for a list of training fractions at one ensemble size.
    SweepFraction(FractionArgs),
    /// Train one model on a whole dataset and write it as JSON.
    Train(TrainArgs),
    /// Accuracy of a saved model on a dataset.
    Eval(EvalArgs),
    /// Normalized margins of a boosted ensemble, or SVM margins over nested prefixes.
    Margins(MarginArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// libsvm or csv; guessed from the file extension when omitted.
    #[arg(long)]
    format: Option<DataFormat>,
}

impl DataArgs {
    fn format(&self) -> DataFormat {
        self.format.unwrap_or_else(|| DataFormat::from_path(&self.data))
    }

    fn load(&self) -> Result<Dataset> {
        data::load(&self.data, self.format())
    }
}

#[derive(Args)]
struct SvmArgs {
    /// Soft-margin penalty.
    #[arg(long = "c", default_value_t = DEFAULT_C)]
    c: f64,
    /// Dual stopping tolerance.
    #[arg(long, default_value_t = DEFAULT_BENCH_TOL)]
    tol: f64,
    /// hard-then-soft or soft [sweeps: soft; train: hard-then-soft].
    #[arg(long, value_parser = parse_margin_mode)]
    margin: Option<MarginMode>,
}

#[derive(Args)]
struct OutputArgs {
    /// Report file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "tsv")]
    out_format: ReportFormat,
}

#[derive(Args)]
struct CommonSweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "both")]
    method: Method,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    /// Seed of the first run; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// wall or none.
    #[arg(long, default_value = "wall")]
    timing: Timing,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonSweepArgs,
    #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500,600,700,800,900,1000")]
    learners: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
}

#[derive(Args)]
struct FractionArgs {
    #[command(flatten)]
    common: CommonSweepArgs,
    #[arg(long, default_value_t = DEFAULT_FRACTION_ROUNDS)]
    learners: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    fractions: Vec<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// adaboost or hybrid.
    #[arg(long, default_value = "hybrid")]
    method: Method,
    #[arg(long, default_value_t = 100)]
    learners: usize,
    #[command(flatten)]
    svm: SvmArgs,
    /// Model file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct MarginArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Ensemble size, or the ascending prefix sizes with --study.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    learners: Vec<usize>,
    /// Use this saved AdaBoost model instead of training one.
    #[arg(long, conflicts_with = "study")]
    model: Option<PathBuf>,
    /// Hard-margin SVM margin on each nested stump prefix.
    #[arg(long)]
    study: bool,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_margin_mode(s: &str) -> std::result::Result<MarginMode, String> {
    match s {
        "hard-then-soft" => Ok(MarginMode::HardThenSoft),
        "soft" => Ok(MarginMode::Soft),
        other => Err(format!("unknown margin mode {other:?}")),
    }
}

fn sweep_config(common: &CommonSweepArgs, learners: Vec<usize>) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(&common.data.data);
    config.format = common.data.format();
    config.method = common.method;
    config.learners = learners;
    config.c = common.svm.c;
    config.tol = common.svm.tol;
    config.margin_mode = common.svm.margin.unwrap_or(MarginMode::Soft);
    config.runs = common.runs;
    config.seed = common.seed;
    config.timing = common.timing;
    config
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn hybrid_options(svm: &SvmArgs) -> HybridOptions {
    let mut options = HybridOptions::new(svm.c, svm.tol);
    options.mode = svm.margin.unwrap_or(MarginMode::HardThenSoft);
    options
}

enum SavedModel {
    Adaboost(AdaBoostModel),
    Hybrid(HybridModel),
}

fn read_model(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    match value.get("version").and_then(|v| v.as_str()) {
        Some("adaboost-v1") => Ok(SavedModel::Adaboost(serde_json::from_value(value)?)),
        Some("hybrid-v1") => Ok(SavedModel::Hybrid(serde_json::from_value(value)?)),
        other => Err(Error::Format(format!("unsupported model version {other:?}"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SweepLearners(args) => {
            let mut config = sweep_config(&args.common, args.learners);
            config.folds = args.folds;
            let result = run_learner_sweep(&config)?;
            let text = render_report(&result, args.common.output.out_format)?;
            write_output(args.common.output.out.as_deref(), &text)
        }
        Command::SweepFraction(args) => {
            let mut config = sweep_config(&args.common, vec![args.learners]);
            config.fractions = Some(args.fractions);
            let result = run_fraction_sweep(&config)?;
            let text = render_report(&result, args.common.output.out_format)?;
            write_output(args.common.output.out.as_deref(), &text)
        }
        Command::Train(args) => {
            let dataset = args.data.load()?;
            let text = match args.method {
                Method::Adaboost => serde_json::to_string_pretty(&train_adaboost(&dataset, args.learners)?)?,
                Method::Hybrid => serde_json::to_string_pretty(&train_hybrid_with(
                    &dataset,
                    args.learners,
                    &hybrid_options(&args.svm),
                )?)?,
                Method::Both => {
                    return Err(Error::InvalidArgument("train takes adaboost or hybrid".into()));
                }
            };
            write_output(args.out.as_deref(), &(text + "\n"))
        }
        Command::Eval(args) => {
            let dataset = args.data.load()?;
            let error = match read_model(&args.model)? {
                SavedModel::Adaboost(m) => {
                    let need = m.stumps().iter().map(|s| s.feature + 1).max().unwrap_or(0);
                    if dataset.n_features() < need {
                        return Err(Error::DimensionMismatch {
                            expected: need,
                            got: dataset.n_features(),
                        });
                    }
                    m.error_rate(&dataset)
                }
                SavedModel::Hybrid(m) => {
                    let expected = m.provenance().input_features;
                    if dataset.n_features() != expected {
                        return Err(Error::DimensionMismatch {
                            expected,
                            got: dataset.n_features(),
                        });
                    }
                    m.error_rate(&dataset)?
                }
            };
            println!("samples\t{}", dataset.n_samples());
            println!("accuracy\t{:.2}", 100.0 * (1.0 - error));
            Ok(())
        }
        Command::Margins(args) => margins(args),
    }
}

fn margins(args: MarginArgs) -> Result<()> {
    let dataset = args.data.load()?;
    let out = args.output.out.as_deref();
    if args.study {
        let points = margin_growth_study(&dataset, &args.learners, args.tol)?;
        let text = match args.output.out_format {
            ReportFormat::Json => serde_json::to_string_pretty(&points)? + "\n",
            ReportFormat::Tsv => {
                let mut text = String::from("rounds\toutcome\tmargin\n");
                for p in &points {
                    let (outcome, margin) = match p {
                        GrowthPoint::Separable { margin, .. } => ("separable", margin.to_string()),
                        GrowthPoint::NotSeparable { .. } => ("not-separable", "NA".into()),
                        GrowthPoint::Unconverged { .. } => ("unconverged", "NA".into()),
                    };
                    writeln!(text, "{}\t{outcome}\t{margin}", p.rounds()).unwrap();
                }
                text
            }
        };
        return write_output(out, &text);
    }
    let model = match &args.model {
        Some(path) => match read_model(path)? {
            SavedModel::Adaboost(m) => m,
            SavedModel::Hybrid(m) => m.adaboost().clone(),
        },
        None => {
            let [rounds] = args.learners[..] else {
                return Err(Error::InvalidArgument("margins takes one ensemble size without --study".into()));
            };
            train_adaboost(&dataset, rounds)?
        }
    };
    let report = normalized_margins(&model, &dataset)?;
    let text = match args.output.out_format {
        ReportFormat::Tsv => report.to_tsv(),
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    write_output(out, &text)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
