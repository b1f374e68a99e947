use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use scgbp_core::features::{read_beats_csv, write_beats_csv};
use scgbp_core::fsio::{sibling_with_suffix, with_added_suffix};
use scgbp_core::metrics::{write_bland_altman_csv, write_regression_csv};
use scgbp_core::pipeline::{
    attach_references, calibrate_rows, evaluate_predictions, predict_rows, read_predictions_csv,
    read_references_csv, references_for_rows, write_predictions_csv,
};
use scgbp_core::signal::parse_recording;
use scgbp_core::synth::write_synthetic;
use scgbp_core::{detect_fiducials, generate, BpModel, Error, OmegaInit, PipelineConfig, Target};

/// SCG fiducial detection and cuffless blood pressure estimation.
#[derive(Debug, Parser)]
#[command(name = "scgbp", version, about, arg_required_else_help = true)]
struct Cli {
    /// TOML file with pipeline parameters; missing keys keep their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for multi-subject runs (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,

    /// With `detect`, also write the intermediate detector signals.
    #[arg(long, global = true)]
    dump_stages: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic recordings with ground truth.
    Synth(SynthArgs),
    /// Detect AO and pAC fiducials and write per-beat features.
    Detect(DetectArgs),
    /// Fit a per-subject model on the leading beats.
    Calibrate(CalibrateArgs),
    /// Apply a model to a beat table.
    Estimate(EstimateArgs),
    /// Score predictions against references.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output prefix; writes PREFIX.csv, PREFIX.meta.json and PREFIX.truth.json.
    /// The subject id is the prefix's file name.
    #[arg(long, value_name = "PREFIX")]
    out: PathBuf,

    /// Number of subjects. Above 1, subject i goes to PREFIX_i with seed + i.
    #[arg(long, default_value_t = 1)]
    subjects: usize,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Recording CSV files.
    #[arg(required = true, value_name = "RECORDING")]
    recordings: Vec<PathBuf>,

    /// Beat table for a single recording, or a directory for several.
    #[arg(long)]
    out: PathBuf,

    /// Sampling rate override in Hz.
    #[arg(long)]
    fs: Option<f64>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    beats: PathBuf,

    /// Recording with an `abp` channel supplying the references.
    #[arg(long)]
    recording: PathBuf,

    #[arg(long)]
    target: Target,

    /// Leading fraction of beats used for fitting.
    #[arg(long)]
    frac: Option<f64>,

    #[arg(long)]
    fs: Option<f64>,

    /// Model JSON to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    beats: PathBuf,

    #[arg(long)]
    model: PathBuf,

    /// Predictions CSV to write.
    #[arg(long)]
    out: PathBuf,

    /// Attach ABP references from this recording.
    #[arg(long)]
    recording: Option<PathBuf>,

    #[arg(long)]
    fs: Option<f64>,

    /// Only predict beats after the calibration segment.
    #[arg(long)]
    test_only: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    predictions: PathBuf,

    /// CSV with `beat_index` and `reference_mmHg` (or `predicted_mmHg`).
    /// Defaults to the reference column of the predictions file.
    #[arg(long)]
    references: Option<PathBuf>,

    /// Report JSON; Bland-Altman and regression CSVs are written beside it.
    #[arg(long)]
    out: PathBuf,
}

/// Bad flags or configuration, as opposed to a failure while processing.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let invalid = err.chain().any(|e| {
        e.is::<UsageError>() || matches!(e.downcast_ref::<Error>(), Some(Error::Config(_)))
    });
    if invalid {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("starting worker pool")?;
    }
    if cli.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    match cli.command {
        Some(Command::Synth(a)) => synth(&cfg, &a),
        Some(Command::Detect(a)) => detect(&cfg, &a, cli.dump_stages),
        Some(Command::Calibrate(a)) => calibrate(&cfg, &a),
        Some(Command::Estimate(a)) => estimate(&a),
        Some(Command::Evaluate(a)) => evaluate(&a),
        None => Err(usage("no command given; see --help")),
    }
}

/// Defaults, then the config file, then flags.
fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.synth.seed = seed;
        for vmd in [&mut cfg.ao_detect.stage1, &mut cfg.ao_detect.stage2] {
            if let OmegaInit::Random { .. } = vmd.init {
                vmd.init = OmegaInit::Random { seed };
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "subject".into())
}

fn synth(cfg: &PipelineConfig, a: &SynthArgs) -> Result<()> {
    if a.subjects == 0 {
        return Err(usage("--subjects must be at least 1"));
    }
    let jobs: Vec<(PathBuf, u64)> = if a.subjects == 1 {
        vec![(a.out.clone(), cfg.synth.seed)]
    } else {
        let width = a.subjects.to_string().len().max(2);
        (0..a.subjects)
            .map(|i| {
                let mut p = a.out.clone().into_os_string();
                p.push(format!("_{:0width$}", i + 1));
                (PathBuf::from(p), cfg.synth.seed.wrapping_add(i as u64))
            })
            .collect()
    };
    jobs.par_iter()
        .try_for_each(|(prefix, seed)| -> Result<()> {
            let mut sc = cfg.synth.clone();
            sc.seed = *seed;
            sc.subject_id = file_name(prefix);
            let (rec, truth) = generate(&sc)?;
            write_synthetic(&rec, &truth, prefix)
                .with_context(|| format!("writing {}", prefix.display()))?;
            println!(
                "{}: {} beats, {:.0} s at {} Hz",
                sc.subject_id,
                truth.beats(),
                sc.duration_s,
                sc.fs
            );
            Ok(())
        })
}

fn detect(cfg: &PipelineConfig, a: &DetectArgs, dump_stages: bool) -> Result<()> {
    let outputs: Vec<(PathBuf, PathBuf)> = if a.recordings.len() == 1 {
        vec![(a.recordings[0].clone(), a.out.clone())]
    } else {
        std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
        a.recordings
            .iter()
            .map(|r| {
                let stem = r
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                (r.clone(), a.out.join(format!("{stem}.beats.csv")))
            })
            .collect()
    };
    let results: Vec<Result<()>> = outputs
        .par_iter()
        .map(|(rec_path, out)| {
            detect_one(cfg, rec_path, out, a.fs, dump_stages)
                .with_context(|| rec_path.display().to_string())
        })
        .collect();
    let failed: Vec<anyhow::Error> = results.into_iter().filter_map(Result::err).collect();
    match failed.len() {
        0 => Ok(()),
        1 => Err(failed.into_iter().next().unwrap()),
        n => {
            for e in &failed {
                eprintln!("error: {e:#}");
            }
            bail!("{n} of {} recordings failed", outputs.len())
        }
    }
}

fn detect_one(
    cfg: &PipelineConfig,
    rec_path: &Path,
    out: &Path,
    fs: Option<f64>,
    dump_stages: bool,
) -> Result<()> {
    let rec = parse_recording(rec_path, fs)?;
    let fid = detect_fiducials(&rec.scg_z, cfg)?;
    let rows = fid.beats.rows();
    if rows.is_empty() {
        bail!("no beats with both AO and pAC were found");
    }
    write_beats_csv(&rows, out)?;
    fid.report(&rec.subject_id)
        .write(&sibling_with_suffix(out, "report.json"))?;
    if dump_stages {
        fid.write_stages_csv(&sibling_with_suffix(out, "stages.csv"))?;
    }
    let c = &fid.correction;
    println!(
        "{}: {} beats ({} AO detected, {} inserted, {} removed, {} without pAC)",
        rec.subject_id,
        rows.len(),
        fid.detection.peaks.len(),
        c.inserted.len(),
        c.removed_systole.len() + c.removed_diastole.len(),
        fid.pacs.missing()
    );
    Ok(())
}

fn calibrate(cfg: &PipelineConfig, a: &CalibrateArgs) -> Result<()> {
    let frac = a.frac.unwrap_or(cfg.calibration.train_frac);
    if !(frac > 0.0 && frac < 1.0) {
        return Err(usage(format!("--frac must lie in (0, 1), got {frac}")));
    }
    let rows = read_beats_csv(&a.beats)?;
    let rec = parse_recording(&a.recording, a.fs)?;
    let model = calibrate_rows(&rec.subject_id, &rows, rec.abp.as_ref(), a.target, frac)?;
    model.write(&a.out)?;
    println!(
        "{} {}: a = {:.4}, b = {:.4}, c = {:.4} from {} beats (condition {:.1})",
        model.subject_id,
        model.target,
        model.a,
        model.b,
        model.c,
        model.n_train,
        model.condition_estimate
    );
    Ok(())
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let model = BpModel::read(&a.model)?;
    let mut rows = read_beats_csv(&a.beats)?;
    if a.test_only {
        let from = model
            .test_from_beat_index
            .ok_or_else(|| usage("--test-only needs a model with a calibration split"))?;
        rows.retain(|r| r.beat_index >= from);
    }
    let refs = match &a.recording {
        Some(path) => {
            let rec = parse_recording(path, a.fs)?;
            Some(references_for_rows(rec.abp.as_ref(), &rows)?)
        }
        None => None,
    };
    let preds = predict_rows(&model, &rows, refs.as_deref())?;
    write_predictions_csv(&preds, &a.out)?;
    println!(
        "{} {}: {} predictions",
        model.subject_id,
        model.target,
        preds.len()
    );
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut preds = read_predictions_csv(&a.predictions)?;
    if let Some(path) = &a.references {
        preds = attach_references(&preds, &read_references_csv(path)?)?;
    } else if preds.iter().any(|p| p.reference_mmhg.is_none()) {
        return Err(anyhow!(
            "{} has no reference column; pass --references",
            a.predictions.display()
        ));
    }
    let (report, ba) = evaluate_predictions(&preds)?;
    report.write(&a.out)?;
    let stem = a.out.with_extension("");
    write_bland_altman_csv(&ba, &with_added_suffix(&stem, "bland_altman.csv"))?;
    let est: Vec<f64> = preds.iter().map(|p| p.predicted_mmhg).collect();
    let reference: Vec<f64> = preds.iter().filter_map(|p| p.reference_mmhg).collect();
    write_regression_csv(
        &est,
        &reference,
        &with_added_suffix(&stem, "regression.csv"),
    )?;
    println!(
        "n = {}: ME {:+.2}, MAE {:.2}, STD {:.2} mmHg, r = {}, IEEE {}",
        report.n,
        report.me_mmhg,
        report.mae_mmhg,
        report.std_mmhg,
        report.pearson_r.map_or("n/a".into(), |r| format!("{r:.3}")),
        if report.ieee_pass { "pass" } else { "fail" }
    );
    Ok(())
}
