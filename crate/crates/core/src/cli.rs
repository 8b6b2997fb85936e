//! Command-line front end: `generate`, `detect`, `eval` and `simulate`.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::changepoint::detect;
use crate::community::{Initializer, SearchConfig};
use crate::error::{Error, Result};
use crate::eval::{changepoint_frequency, frequency_csv, nmi_keyed, NmiReport};
use crate::io::{self, LabeledTruth, ResultFile};
use crate::mdl::{ChangePointCode, MdlConfig, PairCounting};
use crate::simulate::run_trials;
use crate::synth::{builtin_setting, generate, CorrelationModel, SettingSpec};

#[derive(Debug, Parser)]
#[command(name = "netseg", version, about = "Change points and communities in network sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic sequence with its ground truth.
    Generate(GenerateArgs),
    /// Detect change points and communities in an edge-list sequence.
    Detect(DetectArgs),
    /// Score results against ground truth.
    Eval(EvalArgs),
    /// Run repeated generate+detect trials for one setting.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SettingArgs {
    /// Built-in setting 1-6.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub setting: Option<usize>,
    /// JSON setting file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Override every segment's node range, e.g. `140-150`.
    #[arg(long, value_parser = parse_range)]
    pub nodes: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    pub correlation_model: Option<CorrelationArg>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub setting: SettingArgs,
    #[arg(long)]
    pub seed: u64,
    /// Output directory; receives `snapshots/`, `truth.txt` and `spec.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Code change points with M·log₂T instead of gap lengths.
    #[arg(long)]
    pub cl_prime: bool,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
    #[arg(long, value_enum, default_value_t = PairCountingArg::ActiveAtTime)]
    pub pair_counting: PairCountingArg,
    /// Disable parallel segment fits.
    #[arg(long)]
    pub sequential: bool,
}

impl SearchArgs {
    pub fn config(&self) -> SearchConfig {
        SearchConfig {
            mdl: MdlConfig {
                change_point_code: if self.cl_prime {
                    ChangePointCode::Uniform
                } else {
                    ChangePointCode::Gaps
                },
                pair_counting: match self.pair_counting {
                    PairCountingArg::ActiveAtTime => PairCounting::ActiveAtTime,
                    PairCountingArg::SegmentActive => PairCounting::SegmentActive,
                },
            },
            init: match self.init {
                InitArg::Random => Initializer::Random,
                InitArg::Spectral => Initializer::Spectral,
            },
            parallel: !self.sequential,
            ..SearchConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Directory of snapshot files or one sectioned file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result JSON path.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    /// One or more result files.
    #[arg(long, required = true)]
    pub result: Vec<PathBuf>,
    /// Directory for `nmi.csv` and `frequency.csv`; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub setting: SettingArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output directory for `frequency.csv`, `trials.csv` and `nmi.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairCountingArg {
    ActiveAtTime,
    SegmentActive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelationArg {
    Independent,
    MarkovChain,
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once('-')
        .ok_or_else(|| format!("expected LO-HI, got {s:?}"))?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("empty or zero range {s:?}"));
    }
    Ok((lo, hi))
}

impl SettingArgs {
    pub fn resolve(&self) -> Result<SettingSpec> {
        let mut spec = match (&self.setting, &self.spec) {
            (Some(k), None) => builtin_setting(*k)?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            _ => return Err(Error::Config("give exactly one of --setting or --spec".into())),
        };
        if let Some((lo, hi)) = self.nodes {
            spec = spec.with_node_range(lo, hi);
        }
        if let Some(model) = self.correlation_model {
            spec.correlation_model = match model {
                CorrelationArg::Independent => CorrelationModel::Independent,
                CorrelationArg::MarkovChain => CorrelationModel::MarkovChain,
            };
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn require_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("{} does not exist", path.display())))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => run_generate(&args),
        Command::Detect(args) => run_detect(&args),
        Command::Eval(args) => run_eval(&args),
        Command::Simulate(args) => run_simulate(&args),
    }
}

fn run_generate(args: &GenerateArgs) -> Result<()> {
    let spec = args.setting.resolve()?.with_seed(args.seed);
    let (seq, truth) = generate(&spec)?;
    io::write_sequence_dir(&seq, &args.out.join("snapshots"))?;
    io::write_truth(&args.out.join("truth.txt"), &LabeledTruth::from_truth(&seq, &truth))?;
    let mut json = serde_json::to_string_pretty(&spec)?;
    json.push('\n');
    io::write_text(&args.out.join("spec.json"), &json)?;
    println!(
        "generated {} snapshots over {} nodes, change points {:?}",
        seq.len(),
        seq.num_nodes(),
        truth.change_points
    );
    Ok(())
}

fn run_detect(args: &DetectArgs) -> Result<()> {
    require_exists(&args.input)?;
    let seq = io::read_sequence(&args.input)?;
    let cfg = args.search.config();
    let result = detect(&seq, args.seed, &cfg)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let file = ResultFile::new(&seq, &result, args.seed, cfg);
    io::write_result(&args.out, &file)?;
    println!(
        "change points {:?}, mdl {:.4} bits",
        result.change_points, result.mdl_value
    );
    Ok(())
}

fn labeled_report(truth: &LabeledTruth, result: &ResultFile) -> Result<NmiReport> {
    if truth.change_points != result.change_points {
        return Err(Error::SegmentMismatch {
            estimated: result.change_points.clone(),
            truth: truth.change_points.clone(),
        });
    }
    let scores = result
        .labeled_partitions()
        .into_iter()
        .zip(&truth.segments)
        .map(|(est, tru)| {
            let est: HashMap<String, usize> = est.into_iter().collect();
            let tru: HashMap<String, usize> = tru.iter().map(|(k, &v)| (k.clone(), v)).collect();
            nmi_keyed(&est, &tru)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NmiReport::from_scores(&scores))
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    require_exists(&args.truth)?;
    let truth = io::read_truth(&args.truth)?;
    let results = args
        .result
        .iter()
        .map(|p| {
            require_exists(p)?;
            io::read_result(p)
        })
        .collect::<Result<Vec<_>>>()?;

    // A single result must share the true change points; with several,
    // mismatching runs only contribute to the frequency table.
    let mut reports = Vec::new();
    for (path, r) in args.result.iter().zip(&results) {
        match labeled_report(&truth, r) {
            Ok(rep) => reports.push(rep),
            Err(e @ Error::SegmentMismatch { .. }) if results.len() > 1 => {
                eprintln!("warning: {}: {e}", path.display());
            }
            Err(e) => return Err(e),
        }
    }
    let nmi_csv = match reports.as_slice() {
        [] => String::from("segment,nmi\n"),
        [one] => one.to_csv(),
        many => {
            let mut out = String::from("result,nmi\n");
            for (i, r) in many.iter().enumerate() {
                out.push_str(&format!("{},{:.6}\n", i + 1, r.overall));
            }
            let mean = many.iter().map(|r| r.overall).sum::<f64>() / many.len() as f64;
            out.push_str(&format!("overall,{mean:.6}\n"));
            out
        }
    };
    let horizon = results.iter().map(|r| r.horizon).max().unwrap_or(0);
    let freq = frequency_csv(&changepoint_frequency(
        results.iter().map(|r| r.change_points.as_slice()),
        horizon,
    ));
    match &args.out {
        Some(dir) => {
            io::write_text(&dir.join("nmi.csv"), &nmi_csv)?;
            io::write_text(&dir.join("frequency.csv"), &freq)?;
        }
        None => print!("{nmi_csv}\n{freq}"),
    }
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    if args.trials == 0 {
        return Err(Error::Config("--trials must be at least 1".into()));
    }
    let spec = args.setting.resolve()?;
    let report = run_trials(&spec, args.trials, args.seed, &args.search.config())?;
    io::write_text(&args.out.join("frequency.csv"), &report.frequency_csv())?;
    io::write_text(&args.out.join("trials.csv"), &report.trials_csv())?;
    io::write_text(&args.out.join("nmi.csv"), &report.nmi_csv())?;
    println!(
        "{} trials, exact recovery {:.2}, mean known-change-point NMI {:.4}",
        report.trials.len(),
        report.exact_rate(),
        report.mean_known_nmi()
    );
    Ok(())
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            e.exit_code()
        }
    }
}
