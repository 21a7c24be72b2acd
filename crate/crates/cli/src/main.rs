//! Command line for the emotion decoding pipeline: synthetic data
//! generation, feature extraction, leave-one-session-out evaluation, and
//! model dumps.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use affectfuse_core::{
    build_feature_table, evaluate_manifest, fit_fold_models, generate, load_sessions, preprocess,
    write_manifest, write_session_csv, Cutoffs, EmotionId, EvalConfig, EvalReport, Manifest,
    Result, Session, SynthConfig, DEFAULT_RIDGE, DEFAULT_SHRINKAGE,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "affectfuse",
    version,
    about = "Decode eight emotional states from EMG, BVP, and GSR recordings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded synthetic sessions plus a manifest
    Synth(SynthArgs),
    /// Write the per-segment feature table as CSV
    Features(FeaturesArgs),
    /// Run leave-one-session-out evaluation and write the report files
    Evaluate(EvaluateArgs),
    /// Fit the feature mask and per-channel models on every session
    DumpModel(DumpModelArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of sessions to generate
    #[arg(long, default_value_t = 20)]
    days: usize,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Class separation; 0 removes all label information
    #[arg(long, default_value_t = 1.0)]
    separation: f64,
    /// Sampling rate in Hz
    #[arg(long, default_value_t = 20.0)]
    fs: f64,
    /// Length of each emotion segment in seconds
    #[arg(long, default_value_t = 180.0)]
    segment_seconds: f64,
    /// Directory for the session CSVs and manifest.json
    #[arg(long)]
    out: PathBuf,
}

/// Flags shared by every subcommand that reads a manifest.
#[derive(Args)]
struct InputArgs {
    /// Manifest listing the session CSVs
    #[arg(long)]
    manifest: PathBuf,
    /// Histogram bins for the entropy feature
    #[arg(long, default_value_t = 16)]
    entropy_bins: usize,
    /// EMG lowpass cutoff in Hz
    #[arg(long, default_value_t = 10.0)]
    cutoff_emg: f64,
    /// BVP lowpass cutoff in Hz
    #[arg(long, default_value_t = 19.0)]
    cutoff_bvp: f64,
    /// GSR lowpass cutoff in Hz
    #[arg(long, default_value_t = 19.0)]
    cutoff_gsr: f64,
}

/// Flags shared by the subcommands that train models.
#[derive(Args)]
struct ModelArgs {
    /// Drop correlated features before training
    #[arg(long)]
    prune: bool,
    /// Absolute correlation above which a feature is dropped
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    /// Off-diagonal shrinkage for the pooled covariance
    #[arg(long, default_value_t = DEFAULT_SHRINKAGE)]
    shrinkage: f64,
    /// Ridge added to the covariance diagonal
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Evaluate folds in parallel
    #[arg(long)]
    parallel: bool,
    /// Seed echoed into the report for audit trails
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and the companion CSVs
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DumpModelArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Write the JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InputArgs {
    fn cutoffs(&self) -> Cutoffs {
        Cutoffs {
            emg_hz: self.cutoff_emg,
            bvp_hz: self.cutoff_bvp,
            gsr_hz: self.cutoff_gsr,
        }
    }
}

fn eval_config(
    input: &InputArgs,
    model: &ModelArgs,
    parallel: bool,
    seed: Option<u64>,
) -> EvalConfig {
    EvalConfig {
        manifest: None,
        prune: model.prune,
        threshold: model.threshold,
        entropy_bins: input.entropy_bins,
        cutoffs: input.cutoffs(),
        shrinkage: model.shrinkage,
        ridge: model.ridge,
        parallel,
        seed,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AFFECTFUSE_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => synth(args),
        Command::Features(args) => features(args),
        Command::Evaluate(args) => evaluate(args),
        Command::DumpModel(args) => dump_model(args),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let config = SynthConfig {
        days: args.days,
        seed: args.seed,
        separation: args.separation,
        fs_hz: args.fs,
        segment_seconds: args.segment_seconds,
    };
    let sessions = generate(&config)?;
    fs::create_dir_all(&args.out)?;
    let mut files = Vec::with_capacity(sessions.len());
    for session in &sessions {
        let name = format!("{}.csv", session.session_id());
        write_session_csv(session, &args.out.join(&name))?;
        files.push(name);
    }
    let manifest = Manifest {
        fs_hz: config.fs_hz,
        sessions: files,
    };
    write_manifest(&manifest, &args.out.join("manifest.json"))?;
    println!(
        "wrote {} sessions and manifest.json to {}",
        sessions.len(),
        args.out.display()
    );
    Ok(())
}

fn preprocessed_sessions(input: &InputArgs) -> Result<Vec<Session>> {
    let (_, sessions) = load_sessions(&input.manifest)?;
    let cutoffs = input.cutoffs();
    sessions.iter().map(|s| preprocess(s, &cutoffs)).collect()
}

fn features(args: FeaturesArgs) -> Result<()> {
    let sessions = preprocessed_sessions(&args.input)?;
    let table = build_feature_table(&sessions, args.input.entropy_bins)?;
    let csv = table.to_csv_string();
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let config = eval_config(&args.input, &args.model, args.parallel, args.seed);
    let report = evaluate_manifest(&args.input.manifest, &config)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("report.json"), report.to_json()?)?;
    fs::write(args.out.join("confusion.csv"), confusion_csv(&report))?;
    fs::write(args.out.join("rates.csv"), rates_csv(&report))?;
    fs::write(args.out.join("mscr.csv"), mscr_csv(&report))?;
    fs::write(args.out.join("roc_points.csv"), roc_points_csv(&report))?;
    let predictions: usize = report.folds.iter().map(|f| f.predictions.len()).sum();
    println!(
        "accuracy {:.4} over {} predictions in {} folds; reports in {}",
        report.accuracy,
        predictions,
        report.folds.len(),
        args.out.display()
    );
    Ok(())
}

fn dump_model(args: DumpModelArgs) -> Result<()> {
    let config = eval_config(&args.input, &args.model, false, None);
    let sessions = preprocessed_sessions(&args.input)?;
    let table = build_feature_table(&sessions, args.input.entropy_bins)?;
    let fitted = fit_fold_models(&table, None, &config)?;
    let mut json = serde_json::to_string_pretty(&fitted).map_err(affectfuse_core::Error::from)?;
    json.push('\n');
    match &args.out {
        Some(path) => fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn emotion_header(lead: &str) -> String {
    let mut line = lead.to_string();
    for emotion in EmotionId::ALL {
        line.push(',');
        line.push_str(emotion.name());
    }
    line.push('\n');
    line
}

fn confusion_csv(report: &EvalReport) -> String {
    let mut out = emotion_header("truth");
    for (e, row) in report.confusion.iter().enumerate() {
        out.push_str(EmotionId::from_index(e).name());
        for count in row {
            out.push_str(&format!(",{count}"));
        }
        out.push('\n');
    }
    out
}

fn rates_csv(report: &EvalReport) -> String {
    let mut out = String::from("emotion,tpr,fpr\n");
    for emotion in EmotionId::ALL {
        let e = emotion.index();
        out.push_str(&format!(
            "{},{},{}\n",
            emotion.name(),
            report.tpr[e],
            report.fpr[e]
        ));
    }
    out
}

fn mscr_csv(report: &EvalReport) -> String {
    let mut out = emotion_header("truth");
    for (e, row) in report.mscr.iter().enumerate() {
        out.push_str(EmotionId::from_index(e).name());
        for value in row {
            out.push_str(&format!(",{value}"));
        }
        out.push('\n');
    }
    out
}

fn roc_points_csv(report: &EvalReport) -> String {
    let mut out = String::from("emotion,fpr,tpr\n");
    for emotion in EmotionId::ALL {
        let e = emotion.index();
        out.push_str(&format!(
            "{},{},{}\n",
            emotion.name(),
            report.fpr[e],
            report.tpr[e]
        ));
    }
    out
}
