//! `speechcue`: file-based pipeline stages from manifest to scored report.
//!
//! Every flag may also be set through an optional JSON config file
//! (`--config run.json`); explicit command-line values win.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use speechcue::formats::{
    self, ModelDoc, PredictionRecord, PromptRecord, ReportDoc, ThresholdsDoc, SCHEMA_VERSION,
};
use speechcue::inference::{classify_zero_shot, export_finetune_records, EndpointConfig};
use speechcue::gencorpus;
use speechcue::stages;
use speechcue_core::baseline::{Encoding, TrainConfig};
use speechcue_core::corpus::Split;
use speechcue_core::describe::DEFAULT_HEDGE_MARGIN;
use speechcue_core::dsp::DspConfig;
use speechcue_core::prompt::{label_set_for, ContextFeature, Dataset, PromptConfig, PromptMode};
use speechcue_core::thresholds::{Grouping, NormalizationPolicy, QuantileScheme};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "speechcue", about = "speech-cue emotion recognition pipeline", version)]
struct Cli {
    /// Optional JSON config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every randomized stage.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bundled synthetic corpus (manifest + WAV clips).
    GenCorpus {
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Extract prosodic features from manifest audio.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        audio_root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Build quantile threshold tables from extracted features.
    Thresholds {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Number of category levels (3-6).
        #[arg(long)]
        classes: Option<u8>,
        /// Grouping: speaker, group, or global.
        #[arg(long)]
        group: Option<String>,
        /// Groups smaller than this fall back to global statistics.
        #[arg(long)]
        min_count: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Categorize features and render descriptions and impressions.
    Describe {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        thresholds: PathBuf,
        /// Margin (as a fraction of the inter-decile span) under which
        /// impressions hedge.
        #[arg(long)]
        hedge_margin: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble prompts for one mode.
    Prompt {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        /// text_only, with_description, with_impression, or speech_only.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        context_window: Option<usize>,
        /// Context annotation feature: none, pitch, volume, or all.
        #[arg(long)]
        context_feature: Option<String>,
        /// How many trailing context utterances carry annotations.
        #[arg(long)]
        context_depth: Option<usize>,
        /// Restrict to one split: train, dev, or test.
        #[arg(long)]
        split: Option<String>,
        /// Override the instruction block.
        #[arg(long)]
        instruction: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Send prompts to a chat-completion endpoint.
    Classify {
        #[arg(long)]
        prompts: PathBuf,
        /// Label set source: a manifest file...
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// ...or a named dataset (iemocap, meld).
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        base_url: Option<String>,
        #[arg(long)]
        model: Option<String>,
        /// Maximum in-flight requests.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        timeout_s: Option<f64>,
        #[arg(long)]
        max_retries: Option<u32>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export {"prompt", "completion"} records for external fine-tuning.
    ExportFinetune {
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and score the feature-only MLP baseline.
    EvalMl {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Threshold table; required for --encoding onehot.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// numerical or onehot.
        #[arg(long)]
        encoding: Option<String>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Score predictions against manifest gold labels.
    Score {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// The optional config file: a flat JSON object keyed by long flag name.
struct FileCfg(serde_json::Map<String, serde_json::Value>);

impl FileCfg {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = path else { return Ok(FileCfg(Default::default())) };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("config {} is not JSON", path.display()))?;
        match value {
            serde_json::Value::Object(map) => Ok(FileCfg(map)),
            _ => bail!("config {} must be a JSON object", path.display()),
        }
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => Ok(Some(
                serde_json::from_value(v.clone())
                    .with_context(|| format!("config key {key:?} has the wrong type"))?,
            )),
        }
    }
}

/// Command line first, then config file, then the built-in default.
fn resolve<T: DeserializeOwned>(cli: Option<T>, cfg: &FileCfg, key: &str, default: T) -> Result<T> {
    Ok(match cli {
        Some(v) => v,
        None => cfg.get(key)?.unwrap_or(default),
    })
}

fn parse_grouping(s: &str) -> Result<Grouping> {
    match s {
        "speaker" => Ok(Grouping::PerSpeaker),
        "group" => Ok(Grouping::PerGroup),
        "global" => Ok(Grouping::Global),
        _ => bail!("unknown grouping {s:?} (expected speaker, group, or global)"),
    }
}

fn parse_mode(s: &str) -> Result<PromptMode> {
    match s {
        "text_only" => Ok(PromptMode::TextOnly),
        "with_description" => Ok(PromptMode::WithDescription),
        "with_impression" => Ok(PromptMode::WithImpression),
        "speech_only" => Ok(PromptMode::SpeechOnly),
        _ => bail!("unknown prompt mode {s:?}"),
    }
}

fn parse_context_feature(s: &str) -> Result<ContextFeature> {
    match s {
        "none" => Ok(ContextFeature::None),
        "pitch" => Ok(ContextFeature::Pitch),
        "volume" => Ok(ContextFeature::Volume),
        "all" => Ok(ContextFeature::All),
        _ => bail!("unknown context feature {s:?}"),
    }
}

fn parse_split(s: &str) -> Result<Split> {
    match s {
        "train" => Ok(Split::Train),
        "dev" => Ok(Split::Dev),
        "test" => Ok(Split::Test),
        _ => bail!("unknown split {s:?}"),
    }
}

fn parse_encoding(s: &str) -> Result<Encoding> {
    match s {
        "numerical" => Ok(Encoding::Numerical),
        "onehot" => Ok(Encoding::Onehot),
        _ => bail!("unknown encoding {s:?} (expected numerical or onehot)"),
    }
}

fn parse_dataset(s: &str) -> Result<Dataset> {
    match s {
        "iemocap" => Ok(Dataset::Iemocap),
        "meld" => Ok(Dataset::Meld),
        _ => bail!("unknown dataset {s:?} (expected iemocap or meld)"),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = FileCfg::load(cli.config.as_ref())?;
    let seed = resolve(cli.seed, &cfg, "seed", 0u64)?;

    match cli.command {
        Command::GenCorpus { out_dir } => {
            let n = gencorpus::generate(&out_dir, seed).context("gen-corpus")?;
            println!("wrote {n} utterances to {}", out_dir.display());
        }
        Command::Extract { manifest, audio_root, out, jobs } => {
            let jobs = resolve(jobs, &cfg, "jobs", 1usize)?;
            let manifest = stages::load_manifest(&manifest, None).context("extract")?;
            let features = stages::extract_stage(&manifest, &audio_root, &DspConfig::default(), jobs)
                .context("extract")?;
            formats::write_jsonl(&out, &features)?;
            println!("extracted {} feature records", features.len());
        }
        Command::Thresholds { manifest, features, classes, group, min_count, out } => {
            let classes = resolve(classes, &cfg, "classes", 5u8)?;
            let group = resolve(group, &cfg, "group", "speaker".to_string())?;
            let min_count = resolve(min_count, &cfg, "min_count", 24usize)?;
            let manifest = stages::load_manifest(&manifest, None).context("thresholds")?;
            let features = formats::read_jsonl(&features)?;
            let scheme = QuantileScheme::new(classes).map_err(|e| anyhow!("thresholds: {e}"))?;
            let policy = NormalizationPolicy { grouping: parse_grouping(&group)?, min_count };
            let table = stages::thresholds_stage(&manifest, &features, scheme, &policy)?;
            formats::write_json_doc(&out, &ThresholdsDoc { schema_version: SCHEMA_VERSION, table })?;
            println!("wrote threshold table to {}", out.display());
        }
        Command::Describe { manifest, features, thresholds, hedge_margin, out } => {
            let hedge = resolve(hedge_margin, &cfg, "hedge_margin", DEFAULT_HEDGE_MARGIN)?;
            let manifest = stages::load_manifest(&manifest, None).context("describe")?;
            let features = formats::read_jsonl(&features)?;
            let doc = formats::read_thresholds_doc(&thresholds)?;
            let annotations = stages::annotate_stage(&manifest, &features, &doc.table, hedge)?;
            formats::write_jsonl(&out, &annotations)?;
            println!("annotated {} utterances", annotations.len());
        }
        Command::Prompt {
            manifest,
            annotations,
            mode,
            context_window,
            context_feature,
            context_depth,
            split,
            instruction,
            out,
        } => {
            let mode = parse_mode(&resolve(mode, &cfg, "mode", "with_description".to_string())?)?;
            let mut config = PromptConfig::new(mode);
            config.context_window =
                resolve(context_window, &cfg, "context_window", config.context_window)?;
            config.context_depth =
                resolve(context_depth, &cfg, "context_depth", config.context_depth)?;
            config.context_feature = parse_context_feature(&resolve(
                context_feature,
                &cfg,
                "context_feature",
                "pitch".to_string(),
            )?)?;
            config.instruction = match instruction {
                Some(s) => Some(s),
                None => cfg.get("instruction")?,
            };
            let split = match split {
                Some(s) => Some(parse_split(&s)?),
                None => cfg.get::<String>("split")?.as_deref().map(parse_split).transpose()?,
            };
            let manifest = stages::load_manifest(&manifest, None).context("prompt")?;
            let annotations: Vec<formats::AnnotationRecord> = formats::read_jsonl(&annotations)?;
            let prompts = stages::prompt_stage(&manifest, &annotations, &config, split)?;
            formats::write_jsonl(&out, &prompts)?;
            println!("wrote {} prompts", prompts.len());
        }
        Command::Classify {
            prompts,
            manifest,
            dataset,
            base_url,
            model,
            jobs,
            timeout_s,
            max_retries,
            temperature,
            out,
        } => {
            let base_url = resolve(base_url, &cfg, "base_url", String::new())?;
            if base_url.is_empty() {
                bail!("classify: --base-url is required");
            }
            let model = resolve(model, &cfg, "model", String::new())?;
            if model.is_empty() {
                bail!("classify: --model is required");
            }
            let label_set = if let Some(path) = manifest {
                stages::load_manifest(&path, None).context("classify")?.label_set
            } else {
                let name = resolve(dataset, &cfg, "dataset", String::new())?;
                if name.is_empty() {
                    bail!("classify: either --manifest or --dataset is required");
                }
                label_set_for(parse_dataset(&name)?)
            };
            let mut endpoint = EndpointConfig::new(&base_url, &model);
            endpoint.max_concurrency = resolve(jobs, &cfg, "jobs", endpoint.max_concurrency)?;
            endpoint.timeout_s = resolve(timeout_s, &cfg, "timeout_s", endpoint.timeout_s)?;
            endpoint.max_retries = resolve(max_retries, &cfg, "max_retries", endpoint.max_retries)?;
            endpoint.temperature = resolve(temperature, &cfg, "temperature", endpoint.temperature)?;
            let prompts: Vec<PromptRecord> = formats::read_jsonl(&prompts)?;
            let predictions =
                classify_zero_shot(&prompts, &endpoint, &label_set).context("classify")?;
            let records: Vec<PredictionRecord> = predictions
                .into_iter()
                .map(|p| PredictionRecord {
                    utterance_id: p.utterance_id,
                    parsed_label: p.parsed_label,
                    raw_completion: p.raw_completion,
                    latency_ms: p.latency_ms,
                })
                .collect();
            let unparseable = records.iter().filter(|r| r.parsed_label.is_none()).count();
            formats::write_jsonl(&out, &records)?;
            println!("classified {} prompts ({unparseable} unparseable)", records.len());
        }
        Command::ExportFinetune { prompts, out } => {
            let prompts: Vec<PromptRecord> = formats::read_jsonl(&prompts)?;
            let n = export_finetune_records(&prompts, &out).context("export-finetune")?;
            println!("exported {n} fine-tune records");
        }
        Command::EvalMl {
            manifest,
            features,
            thresholds,
            encoding,
            learning_rate,
            epochs,
            batch_size,
            l2,
            out,
            model_out,
        } => {
            let encoding =
                parse_encoding(&resolve(encoding, &cfg, "encoding", "numerical".to_string())?)?;
            let defaults = TrainConfig::default();
            let config = TrainConfig {
                learning_rate: resolve(learning_rate, &cfg, "learning_rate", defaults.learning_rate)?,
                epochs: resolve(epochs, &cfg, "epochs", defaults.epochs)?,
                batch_size: resolve(batch_size, &cfg, "batch_size", defaults.batch_size)?,
                l2: resolve(l2, &cfg, "l2", defaults.l2)?,
                seed,
            };
            let manifest = stages::load_manifest(&manifest, None).context("eval-ml")?;
            let features = formats::read_jsonl(&features)?;
            let table = thresholds.map(|p| formats::read_thresholds_doc(&p)).transpose()?;
            let result = stages::eval_ml_stage(
                &manifest,
                &features,
                table.as_ref().map(|d| &d.table),
                encoding,
                &config,
            )?;
            print!("{}", stages::format_report(&result.report));
            formats::write_json_doc(
                &out,
                &ReportDoc { schema_version: SCHEMA_VERSION, report: result.report },
            )?;
            if let Some(path) = model_out {
                let (enc, classes) = match encoding {
                    Encoding::Numerical => ("numerical", None),
                    Encoding::Onehot => (
                        "onehot",
                        table.as_ref().map(|d| d.table.scheme.num_classes() as u8),
                    ),
                };
                formats::write_json_doc(
                    &path,
                    &ModelDoc {
                        schema_version: SCHEMA_VERSION,
                        encoding: enc.to_string(),
                        classes,
                        model: result.model,
                    },
                )?;
            }
        }
        Command::Score { pred, gold, out } => {
            let manifest = stages::load_manifest(&gold, None).context("score")?;
            let predictions: Vec<PredictionRecord> = formats::read_jsonl(&pred)?;
            let report = stages::score_stage(&manifest, &predictions)?;
            print!("{}", stages::format_report(&report));
            if let Some(path) = out {
                formats::write_json_doc(
                    &path,
                    &ReportDoc { schema_version: SCHEMA_VERSION, report },
                )?;
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
