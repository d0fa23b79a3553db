//! On-disk artifact schemas for the pipeline stages.
//!
//! Per-utterance artifacts (features, annotations, prompts, predictions) are
//! line-delimited JSON; whole-run artifacts (threshold table, model, report)
//! are single JSON documents carrying a `schema_version` so downstream
//! stages can reject mismatched inputs.

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use speechcue_core::baseline::ClassifierModel;
use speechcue_core::describe::Annotation;
use speechcue_core::dsp::ProsodicFeatures;
use speechcue_core::metrics::EvalReport;
use speechcue_core::thresholds::ThresholdTable;
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// One utterance's extracted features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub utterance_id: String,
    pub avg_volume_db: f64,
    pub volume_variation_db: f64,
    pub avg_pitch_hz: Option<f64>,
    pub pitch_variation_hz: Option<f64>,
    pub speaking_rate_wps: f64,
    pub voiced_ratio: f64,
    pub duration_s: f64,
}

impl FeatureRecord {
    pub fn new(utterance_id: &str, f: &ProsodicFeatures) -> Self {
        FeatureRecord {
            utterance_id: utterance_id.to_string(),
            avg_volume_db: f.avg_volume_db,
            volume_variation_db: f.volume_variation_db,
            avg_pitch_hz: f.avg_pitch_hz,
            pitch_variation_hz: f.pitch_variation_hz,
            speaking_rate_wps: f.speaking_rate_wps,
            voiced_ratio: f.voiced_ratio,
            duration_s: f.duration_s,
        }
    }
}

/// One assembled prompt, ready for an endpoint or a fine-tune export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub utterance_id: String,
    pub mode: String,
    pub full_text: String,
    pub gold_label: Option<String>,
}

/// One endpoint response, parsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub utterance_id: String,
    pub parsed_label: Option<String>,
    pub raw_completion: String,
    #[serde(default)]
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsDoc {
    pub schema_version: u32,
    pub table: ThresholdTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub schema_version: u32,
    pub encoding: String,
    pub classes: Option<u8>,
    pub model: ClassifierModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub report: EvalReport,
}

/// Read a line-delimited artifact, reporting the offending line on failure.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), i + 1))?;
        out.push(rec);
    }
    Ok(out)
}

/// Write records one per line, trailing newline included.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for rec in records {
        text.push_str(&serde_json::to_string(rec)?);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json_doc<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn check_schema_version(path: &Path, got: u32) -> Result<()> {
    if got != SCHEMA_VERSION {
        bail!(
            "{}: schema_version {} does not match expected {}",
            path.display(),
            got,
            SCHEMA_VERSION
        );
    }
    Ok(())
}

pub fn read_thresholds_doc(path: &Path) -> Result<ThresholdsDoc> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ThresholdsDoc = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a threshold table", path.display()))?;
    check_schema_version(path, doc.schema_version)?;
    Ok(doc)
}

pub fn read_model_doc(path: &Path) -> Result<ModelDoc> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ModelDoc =
        serde_json::from_str(&text).with_context(|| format!("{}: not a model", path.display()))?;
    check_schema_version(path, doc.schema_version)?;
    Ok(doc)
}

pub fn read_report_doc(path: &Path) -> Result<ReportDoc> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ReportDoc =
        serde_json::from_str(&text).with_context(|| format!("{}: not a report", path.display()))?;
    check_schema_version(path, doc.schema_version)?;
    Ok(doc)
}

pub type AnnotationRecord = Annotation;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let recs = vec![
            PromptRecord {
                utterance_id: "u0".into(),
                mode: "text_only".into(),
                full_text: "hello\n\nworld".into(),
                gold_label: Some("anger".into()),
            },
            PromptRecord {
                utterance_id: "u1".into(),
                mode: "text_only".into(),
                full_text: "x".into(),
                gold_label: None,
            },
        ];
        write_jsonl(&path, &recs).unwrap();
        let back: Vec<PromptRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn schema_version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        std::fs::write(&path, r#"{"schema_version": 9, "report": {}}"#).unwrap();
        let err = read_report_doc(&path).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("schema_version") || msg.contains("not a report"), "{msg}");
    }

    #[test]
    fn malformed_line_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.jsonl");
        std::fs::write(&path, "{\"utterance_id\": \"u0\"}\nnot json\n").unwrap();
        let err = read_jsonl::<serde_json::Value>(&path).unwrap_err();
        assert!(format!("{err:#}").contains(":2:"));
    }
}
