use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::de::DeserializeOwned;
use speakerid_core::corpus::load_manifest_corpus;
use speakerid_core::frames::seconds_to_frames;
use speakerid_core::frontend::{load_wav, FeatureExtractor, FrontendConfig};
use speakerid_core::harness::{
    run_duration_experiment, run_phonetic_experiment, shuffled_stream, DurationProtocolConfig, ExperimentReport,
    PhoneticProtocolConfig, ReportFormat,
};
use speakerid_core::identification::{score_sheets_to_csv, SpeakerRegistry};
use speakerid_core::model::{ModelRecord, ModelStore};
use speakerid_core::phonetic::PhonemeTaxonomy;
use speakerid_core::synth::{synth_corpus, write_corpus, SynthCorpusConfig};
use speakerid_core::{FrameSequence, GaussianModel, Measure, MeasureKind, ScConvention};

/// Closed-set speaker identification with second-order statistical measures.
#[derive(Debug, Parser)]
#[command(name = "speakerid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a 16-bit mono WAV file into a feature CSV.
    Extract {
        /// Input WAV file.
        input: PathBuf,
        /// Front-end configuration (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate one model per speaker of a manifest and save a model store.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Use only the first N seconds of each speaker's shuffled material.
        #[arg(long)]
        train_seconds: Option<f64>,
        /// Overrides the manifest's seed for the sentence shuffle.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score feature CSVs against a model store and write a score sheet CSV.
    Identify {
        #[arg(long)]
        models: PathBuf,
        /// Test feature CSVs; the file stem is the test id.
        #[arg(required = true)]
        tests: Vec<PathBuf>,
        #[arg(long, default_value = "mu_g")]
        measure: MeasureKind,
        #[arg(long, default_value = "decomposition")]
        sc_convention: ScConvention,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the train/test duration grid.
    EvalDuration {
        #[command(flatten)]
        common: EvalArgs,
    },
    /// Run the phonetic-content experiment.
    EvalPhonetic {
        #[command(flatten)]
        common: EvalArgs,
        /// Phoneme taxonomy (JSON); the built-in French one if omitted.
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
    /// Generate a labeled synthetic corpus with a manifest.
    SynthCorpus {
        /// Generator configuration (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Protocol configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the manifest's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these measures (repeatable); the configuration's list if omitted.
    #[arg(long)]
    measure: Vec<MeasureKind>,
    #[arg(long)]
    sc_convention: Option<ScConvention>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: USAGE,
        error: error.into(),
    }
}

impl From<speakerid_core::Error> for Failure {
    fn from(e: speakerid_core::Error) -> Self {
        Failure {
            code: if e.is_data_error() { DATA } else { USAGE },
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: DATA, error }
    }
}

/// Reads a JSON configuration file; any problem with it is a usage error.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(anyhow!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(anyhow!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn extract(input: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let cfg: FrontendConfig = match config {
        Some(p) => read_json(p)?,
        None => FrontendConfig::default(),
    };
    let extractor = FeatureExtractor::new(cfg)?;
    let features = extractor.extract(&load_wav(input)?)?;
    write_output(out, &features.to_csv())
}

fn train(manifest: &Path, train_seconds: Option<f64>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let (m, corpus) = load_manifest_corpus(manifest)?;
    let seed = seed.unwrap_or(m.seed);
    let hash = m.frontend.digest();
    let mut store = ModelStore::default();
    for (k, speaker) in corpus.speakers.iter().enumerate() {
        let stream = shuffled_stream(speaker, k, seed)?;
        let frames = match train_seconds {
            Some(s) => {
                let n = seconds_to_frames(s);
                if stream.features.len() < n {
                    return Err(speakerid_core::Error::InsufficientMaterial {
                        speaker: speaker.id.clone(),
                        available: stream.features.len(),
                        needed: n,
                        what: "training".into(),
                    }
                    .into());
                }
                stream.features.slice(0, n)
            }
            None => stream.features,
        };
        let model = GaussianModel::from_frames(&frames)?;
        store.speakers.push(ModelRecord::from_model(&speaker.id, &model, &hash));
    }
    store.save(out)?;
    info!("trained {} speaker models", store.speakers.len());
    Ok(())
}

fn identify(models: &Path, tests: &[PathBuf], measure: Measure, out: Option<&Path>) -> Result<(), Failure> {
    let store = ModelStore::load(models)?;
    if let Some(first) = store.speakers.first() {
        if let Some(other) = store
            .speakers
            .iter()
            .find(|r| r.frontend_config_hash != first.frontend_config_hash)
        {
            return Err(anyhow!(
                "model store mixes front-end configurations ({} and {})",
                first.frontend_config_hash,
                other.frontend_config_hash
            )
            .into());
        }
    }
    let mut registry = SpeakerRegistry::new();
    for rec in &store.speakers {
        registry.register(rec.id.clone(), rec.to_model()?)?;
    }
    let mut sheets = Vec::with_capacity(tests.len());
    for path in tests {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let frames = FrameSequence::read_csv(path)?;
        let model = GaussianModel::from_frames(&frames)?;
        sheets.push(registry.identify(&id, &model, measure)?);
    }
    write_output(out, &score_sheets_to_csv(&sheets))
}

fn emit(report: &ExperimentReport, args: &EvalArgs) -> Result<(), Failure> {
    write_output(args.out.as_deref(), &report.emit(args.format))
}

fn eval_duration(args: &EvalArgs) -> Result<(), Failure> {
    let mut cfg: DurationProtocolConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => DurationProtocolConfig::default(),
    };
    if !args.measure.is_empty() {
        cfg.measures = args.measure.clone();
    }
    if let Some(c) = args.sc_convention {
        cfg.sc_convention = c;
    }
    let (m, corpus) = load_manifest_corpus(&args.manifest)?;
    let report = run_duration_experiment(&corpus, &cfg, args.seed.unwrap_or(m.seed))?;
    emit(&report, args)
}

fn eval_phonetic(args: &EvalArgs, taxonomy: Option<&Path>) -> Result<(), Failure> {
    let mut cfg: PhoneticProtocolConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => PhoneticProtocolConfig::default(),
    };
    if !args.measure.is_empty() {
        cfg.measures = args.measure.clone();
    }
    if let Some(c) = args.sc_convention {
        cfg.sc_convention = c;
    }
    let taxonomy = match taxonomy {
        Some(p) => PhonemeTaxonomy::load(p).map_err(usage)?,
        None => PhonemeTaxonomy::french(),
    };
    let (m, corpus) = load_manifest_corpus(&args.manifest)?;
    let report = run_phonetic_experiment(&corpus, &cfg, &taxonomy, args.seed.unwrap_or(m.seed))?;
    emit(&report, args)
}

fn synth(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut cfg: SynthCorpusConfig = match config {
        Some(p) => read_json(p)?,
        None => SynthCorpusConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let (_, corpus) = synth_corpus(&cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_corpus(&corpus, cfg.seed, out)?;
    info!("wrote {} speakers to {}", corpus.speakers.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Extract { input, config, out } => extract(&input, config.as_deref(), out.as_deref()),
        Command::Train {
            manifest,
            train_seconds,
            seed,
            out,
        } => train(&manifest, train_seconds, seed, &out),
        Command::Identify {
            models,
            tests,
            measure,
            sc_convention,
            out,
        } => identify(
            &models,
            &tests,
            Measure::with_convention(measure, sc_convention),
            out.as_deref(),
        ),
        Command::EvalDuration { common } => eval_duration(&common),
        Command::EvalPhonetic { common, taxonomy } => eval_phonetic(&common, taxonomy.as_deref()),
        Command::SynthCorpus { config, seed, out } => synth(config.as_deref(), seed, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
