//! Pipeline stages shared by the CLI binary and the integration tests.
//! Each stage maps loaded artifacts to the next artifact; the binary owns
//! argument parsing and file placement.

use crate::formats::{FeatureRecord, PredictionRecord, PromptRecord};
use anyhow::{anyhow, bail, Context, Result};
use speechcue_core::baseline::{
    encode_numerical, encode_onehot, predict, train, Encoding, TrainConfig,
};
use speechcue_core::corpus::{Manifest, Split};
use speechcue_core::describe::{Annotation, CategorizedFeatures};
use speechcue_core::dsp::{decode_wav_bytes, extract_features, DspConfig};
use speechcue_core::metrics::{score, EvalReport};
use speechcue_core::prompt::{build_prompt, PromptConfig};
use speechcue_core::thresholds::{
    build_threshold_table, standardize, FeatureRow, NormalizationPolicy, QuantileScheme,
    ThresholdTable,
};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub fn load_manifest(path: &Path, label_set: Option<&[String]>) -> Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Manifest::from_jsonl(&text, label_set).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Decode and featurize every utterance that has audio, in manifest order,
/// spread over `jobs` worker threads.
pub fn extract_stage(
    manifest: &Manifest,
    audio_root: &Path,
    config: &DspConfig,
    jobs: usize,
) -> Result<Vec<FeatureRecord>> {
    let targets: Vec<_> = manifest
        .utterances
        .iter()
        .filter(|u| u.audio_path.is_some())
        .collect();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<FeatureRecord>>>> =
        Mutex::new((0..targets.len()).map(|_| None).collect());
    let workers = jobs.min(targets.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= targets.len() {
                    return;
                }
                let utt = targets[i];
                let result = (|| {
                    let path = audio_root.join(utt.audio_path.as_deref().unwrap());
                    let bytes = fs::read(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let clip = decode_wav_bytes(&bytes)
                        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
                    let features = extract_features(&clip, &utt.transcript, config)
                        .map_err(|e| anyhow!("{}: {e}", utt.utterance_id))?;
                    Ok(FeatureRecord::new(&utt.utterance_id, &features))
                })();
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });

    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("all slots visited"))
        .collect()
}

pub fn feature_rows(features: &[FeatureRecord]) -> Vec<FeatureRow> {
    features
        .iter()
        .map(|f| FeatureRow {
            utterance_id: f.utterance_id.clone(),
            values: [
                Some(f.avg_volume_db),
                Some(f.volume_variation_db),
                f.avg_pitch_hz,
                f.pitch_variation_hz,
                Some(f.speaking_rate_wps),
            ],
        })
        .collect()
}

/// Standardize per policy and build the quantile table; the same
/// standardization is replayed by `annotate_stage`.
pub fn thresholds_stage(
    manifest: &Manifest,
    features: &[FeatureRecord],
    scheme: QuantileScheme,
    policy: &NormalizationPolicy,
) -> Result<ThresholdTable> {
    let rows = standardize(&feature_rows(features), manifest, policy)
        .map_err(|e| anyhow!("standardize: {e}"))?;
    build_threshold_table(&rows, manifest, scheme, policy).map_err(|e| anyhow!("thresholds: {e}"))
}

pub fn annotate_stage(
    manifest: &Manifest,
    features: &[FeatureRecord],
    table: &ThresholdTable,
    hedge_margin: f64,
) -> Result<Vec<Annotation>> {
    let rows = standardize(&feature_rows(features), manifest, &table.policy)
        .map_err(|e| anyhow!("standardize: {e}"))?;
    let classes = table.scheme.num_classes() as u8;
    rows.iter()
        .map(|row| {
            let categorized = table
                .categorize_row(row, manifest)
                .map_err(|e| anyhow!("{}: {e}", row.utterance_id))?;
            let cf = CategorizedFeatures::from_row(categorized)
                .map_err(|e| anyhow!("{}: {e}", row.utterance_id))?;
            Ok(Annotation::new(row.utterance_id.clone(), classes, cf, hedge_margin))
        })
        .collect()
}

pub fn annotation_map(annotations: &[Annotation]) -> BTreeMap<String, Annotation> {
    annotations
        .iter()
        .map(|a| (a.utterance_id.clone(), a.clone()))
        .collect()
}

/// Build one prompt per utterance (optionally restricted to a split).
pub fn prompt_stage(
    manifest: &Manifest,
    annotations: &[Annotation],
    config: &PromptConfig,
    split: Option<Split>,
) -> Result<Vec<PromptRecord>> {
    let anns = annotation_map(annotations);
    manifest
        .utterances
        .iter()
        .filter(|u| split.map_or(true, |s| u.split == s))
        .map(|utt| {
            let bundle = build_prompt(manifest, &utt.utterance_id, &anns, config)
                .map_err(|e| anyhow!("{}: {e}", utt.utterance_id))?;
            Ok(PromptRecord {
                utterance_id: utt.utterance_id.clone(),
                mode: config.mode.as_str().to_string(),
                full_text: bundle.full_text,
                gold_label: utt.label.clone(),
            })
        })
        .collect()
}

pub struct EvalMlOutput {
    pub model: speechcue_core::baseline::ClassifierModel,
    pub report: EvalReport,
}

/// Train the feature-only classifier on the train split and score it on the
/// test split. `table` is required for the onehot encoding and, when given,
/// also supplies the standardization policy for the numerical one.
pub fn eval_ml_stage(
    manifest: &Manifest,
    features: &[FeatureRecord],
    table: Option<&ThresholdTable>,
    encoding: Encoding,
    config: &TrainConfig,
) -> Result<EvalMlOutput> {
    let policy = table.map(|t| t.policy).unwrap_or_default();
    let rows = standardize(&feature_rows(features), manifest, &policy)
        .map_err(|e| anyhow!("standardize: {e}"))?;

    let mut xs_train = Vec::new();
    let mut ys_train = Vec::new();
    let mut xs_test = Vec::new();
    let mut gold_test = Vec::new();
    for row in &rows {
        let utt = manifest
            .get(&row.utterance_id)
            .ok_or_else(|| anyhow!("feature row {:?} not in manifest", row.utterance_id))?;
        let Some(label) = utt.label.clone() else { continue };
        let vector = match encoding {
            Encoding::Numerical => encode_numerical(row),
            Encoding::Onehot => {
                let t = table.ok_or_else(|| anyhow!("onehot encoding needs a threshold table"))?;
                let categorized = t
                    .categorize_row(row, manifest)
                    .map_err(|e| anyhow!("{}: {e}", row.utterance_id))?;
                let cf = CategorizedFeatures::from_row(categorized)
                    .map_err(|e| anyhow!("{}: {e}", row.utterance_id))?;
                encode_onehot(&cf, t.scheme.num_classes() as u8)
                    .map_err(|e| anyhow!("{}: {e}", row.utterance_id))?
            }
        };
        match utt.split {
            Split::Train => {
                let idx = manifest
                    .label_set
                    .iter()
                    .position(|l| *l == label)
                    .ok_or_else(|| anyhow!("label {label:?} not in label set"))?;
                xs_train.push(vector.values);
                ys_train.push(idx);
            }
            Split::Test => {
                xs_test.push(vector.values);
                gold_test.push(label);
            }
            Split::Dev => {}
        }
    }
    if xs_test.is_empty() {
        bail!("no labeled test-split utterances to evaluate");
    }

    let model = train(&xs_train, &ys_train, &manifest.label_set, config)
        .map_err(|e| anyhow!("train: {e}"))?;
    let predictions = predict(&model, &xs_test).map_err(|e| anyhow!("predict: {e}"))?;
    let predicted: Vec<Option<String>> = predictions
        .iter()
        .map(|(idx, _)| Some(manifest.label_set[*idx].clone()))
        .collect();
    let report =
        score(&gold_test, &predicted, &manifest.label_set).map_err(|e| anyhow!("score: {e}"))?;
    Ok(EvalMlOutput { model, report })
}

/// Score a prediction file against manifest gold labels.
pub fn score_stage(manifest: &Manifest, predictions: &[PredictionRecord]) -> Result<EvalReport> {
    let mut gold = Vec::with_capacity(predictions.len());
    let mut pred = Vec::with_capacity(predictions.len());
    for p in predictions {
        let utt = manifest
            .get(&p.utterance_id)
            .ok_or_else(|| anyhow!("prediction for unknown utterance {:?}", p.utterance_id))?;
        let label = utt
            .label
            .clone()
            .ok_or_else(|| anyhow!("utterance {:?} has no gold label", p.utterance_id))?;
        gold.push(label);
        pred.push(p.parsed_label.clone());
    }
    score(&gold, &pred, &manifest.label_set).map_err(|e| anyhow!("score: {e}"))
}

/// Human-readable report table printed by `eval-ml` and `score`.
pub fn format_report(report: &EvalReport) -> String {
    let width = report
        .label_set
        .iter()
        .map(|l| l.len())
        .max()
        .unwrap_or(5)
        .max("weighted".len());
    let mut out = String::new();
    out.push_str(&format!("{:>width$}  {:>8}  {:>7}\n", "class", "f1", "support"));
    for label in &report.label_set {
        out.push_str(&format!(
            "{:>width$}  {:>8.3}  {:>7}\n",
            label,
            report.per_class_f1[label] * 100.0,
            report.support[label],
        ));
    }
    out.push_str(&format!("{:>width$}  {:>8.3}\n", "weighted", report.weighted_f1 * 100.0));
    out.push_str(&format!("{:>width$}  {:>8.3}\n", "macro", report.macro_f1 * 100.0));
    if report.unparseable_count > 0 {
        out.push_str(&format!("unparseable predictions: {}\n", report.unparseable_count));
    }
    out
}
