//! Assembly of the four-part emotion-detection prompt (instruction, context,
//! speech description, question), the speech-only variant, and dataset label
//! sets.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, Manifest, Utterance};
use crate::describe::Annotation;
use crate::thresholds::CategorizedFeature;

pub const DEFAULT_INSTRUCTION: &str = "You are an expert in sentiment and emotion analysis.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    TextOnly,
    WithDescription,
    WithImpression,
    SpeechOnly,
}

impl PromptMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PromptMode::TextOnly => "text_only",
            PromptMode::WithDescription => "with_description",
            PromptMode::WithImpression => "with_impression",
            PromptMode::SpeechOnly => "speech_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextFeature {
    None,
    Pitch,
    Volume,
    All,
}

/// Prompt assembly settings. Defaults mirror the best reported
/// configuration: a 12-utterance window with pitch annotations on the last
/// three context utterances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub mode: PromptMode,
    pub context_window: usize,
    pub context_feature: ContextFeature,
    /// How many trailing context utterances carry speech annotations.
    pub context_depth: usize,
    /// Override for the instruction block.
    pub instruction: Option<String>,
}

impl PromptConfig {
    pub fn new(mode: PromptMode) -> Self {
        PromptConfig {
            mode,
            context_window: 12,
            context_feature: ContextFeature::Pitch,
            context_depth: 3,
            instruction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub instruction: String,
    pub context_block: String,
    pub speech_block: String,
    pub question: String,
    pub full_text: String,
}

impl PromptBundle {
    fn assemble(instruction: String, context_block: String, speech_block: String, question: String) -> Self {
        let full_text = [&instruction, &context_block, &speech_block, &question]
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| b.as_str())
            .collect::<Vec<_>>()
            .join("\n\n");
        PromptBundle { instruction, context_block, speech_block, question, full_text }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PromptError {
    UnknownUtterance(String),
    MissingAnnotation(String),
}

impl fmt::Display for PromptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptError::UnknownUtterance(id) => write!(f, "unknown utterance_id {id:?}"),
            PromptError::MissingAnnotation(id) => {
                write!(f, "no speech annotation for utterance {id:?}")
            }
        }
    }
}

impl From<CorpusError> for PromptError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::UnknownUtterance(id) => PromptError::UnknownUtterance(id),
            other => PromptError::UnknownUtterance(other.to_string()),
        }
    }
}

fn variation_phrase(level: &CategorizedFeature, variation: &CategorizedFeature) -> String {
    let adj = if variation.level.name == "medium" {
        "moderate"
    } else {
        variation.level.name.as_str()
    };
    let mut s = String::from(level.level.name.as_str());
    s.push_str(" with ");
    s.push_str(adj);
    s.push_str(" variation");
    s
}

/// Parenthetical speech suffix for a context utterance.
fn context_suffix(annotation: &Annotation, feature: ContextFeature) -> Option<String> {
    let cf = &annotation.features;
    match feature {
        ContextFeature::None => None,
        ContextFeature::Pitch => {
            let text = match (&cf.avg_pitch, &cf.pitch_variation) {
                (Some(p), Some(pv)) => variation_phrase(p, pv),
                _ => "not detected".to_string(),
            };
            let mut s = String::from(" (pitch: ");
            s.push_str(&text);
            s.push(')');
            Some(s)
        }
        ContextFeature::Volume => {
            let mut s = String::from(" (volume: ");
            s.push_str(&variation_phrase(&cf.avg_volume, &cf.volume_variation));
            s.push(')');
            Some(s)
        }
        ContextFeature::All => {
            let mut s = String::from(" (");
            s.push_str(&annotation.description);
            s.push(')');
            Some(s)
        }
    }
}

fn question_block(label_set: &[String], mode: PromptMode) -> String {
    let labels = label_set.join(", ");
    let lead = match mode {
        PromptMode::TextOnly => "Considering the conversational context, select exactly one emotion label for the last utterance from: ",
        PromptMode::SpeechOnly => "Based only on the described speech characteristics, select exactly one emotion label from: ",
        _ => "Considering both the conversational context and the described speech characteristics, select exactly one emotion label for the last utterance from: ",
    };
    let mut q = String::from(lead);
    q.push_str(&labels);
    q.push_str(". Answer with the label only.");
    q
}

/// Build the full four-part prompt for one target utterance.
pub fn build_prompt(
    manifest: &Manifest,
    target: &str,
    annotations: &BTreeMap<String, Annotation>,
    config: &PromptConfig,
) -> Result<PromptBundle, PromptError> {
    if config.mode == PromptMode::SpeechOnly {
        let ann = annotations
            .get(target)
            .ok_or_else(|| PromptError::MissingAnnotation(target.to_string()))?;
        // verify the target exists even though the transcript is unused
        manifest
            .get(target)
            .ok_or_else(|| PromptError::UnknownUtterance(target.to_string()))?;
        return Ok(build_speech_only_prompt(
            ann,
            &manifest.label_set,
            false,
            config.instruction.as_deref(),
        ));
    }

    let context = manifest.dialogue_context(target, config.context_window)?;
    let instruction = config
        .instruction
        .clone()
        .unwrap_or_else(|| DEFAULT_INSTRUCTION.to_string());

    let context_feature = if config.mode == PromptMode::TextOnly {
        ContextFeature::None
    } else {
        config.context_feature
    };
    let depth = config.context_depth.min(config.context_window);

    let non_target = context.len() - 1;
    let annotate_from = non_target.saturating_sub(depth);
    let mut lines: Vec<String> = Vec::with_capacity(context.len());
    for (i, utt) in context.iter().enumerate() {
        let mut line = String::from(utt.speaker_id.as_str());
        line.push_str(": ");
        line.push_str(utt.transcript.trim());
        let annotated = i < non_target && i >= annotate_from && context_feature != ContextFeature::None;
        if annotated {
            let ann = annotations
                .get(&utt.utterance_id)
                .ok_or_else(|| PromptError::MissingAnnotation(utt.utterance_id.clone()))?;
            if let Some(suffix) = context_suffix(ann, context_feature) {
                line.push_str(&suffix);
            }
        }
        lines.push(line);
    }
    let context_block = lines.join("\n");

    let speech_block = match config.mode {
        PromptMode::TextOnly => String::new(),
        PromptMode::WithDescription => {
            let ann = annotations
                .get(target)
                .ok_or_else(|| PromptError::MissingAnnotation(target.to_string()))?;
            let mut s = String::from("Speech characteristics of the last utterance: ");
            s.push_str(&ann.description);
            s.push('.');
            s
        }
        PromptMode::WithImpression => {
            let ann = annotations
                .get(target)
                .ok_or_else(|| PromptError::MissingAnnotation(target.to_string()))?;
            let mut s = String::from("Impression of the last utterance: ");
            s.push_str(&ann.impression);
            s
        }
        PromptMode::SpeechOnly => unreachable!(),
    };

    let question = question_block(&manifest.label_set, config.mode);
    Ok(PromptBundle::assemble(instruction, context_block, speech_block, question))
}

/// Build a prompt carrying only speech information; no transcript appears
/// anywhere in the output.
pub fn build_speech_only_prompt(
    annotation: &Annotation,
    label_set: &[String],
    use_impression: bool,
    instruction: Option<&str>,
) -> PromptBundle {
    let instruction = instruction.unwrap_or(DEFAULT_INSTRUCTION).to_string();
    let speech_block = if use_impression {
        let mut s = String::from("Impression of the utterance: ");
        s.push_str(&annotation.impression);
        s
    } else {
        let mut s = String::from("Speech characteristics of the utterance: ");
        s.push_str(&annotation.description);
        s.push('.');
        s
    };
    let question = question_block(label_set, PromptMode::SpeechOnly);
    PromptBundle::assemble(instruction, String::new(), speech_block, question)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    Iemocap,
    Meld,
}

/// The fixed label inventories of the two supported datasets. Custom
/// datasets use their manifest's label set directly.
pub fn label_set_for(dataset: Dataset) -> Vec<String> {
    let labels: &[&str] = match dataset {
        Dataset::Iemocap => &["anger", "happiness", "excitement", "sadness", "frustration", "neutral"],
        Dataset::Meld => &["anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise"],
    };
    labels.iter().map(|l| l.to_string()).collect()
}

/// Convenience: gold label of an utterance (used when exporting records).
pub fn gold_label(utt: &Utterance) -> Option<&str> {
    utt.label.as_deref()
}
