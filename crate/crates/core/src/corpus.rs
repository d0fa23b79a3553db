//! Conversation manifests: loading, validation, and dialogue context lookup.
//!
//! A manifest is a UTF-8 line-delimited file with one utterance object per
//! line. Utterances are sorted by `(dialogue_id, turn_index)` at load time
//! and the manifest is immutable afterwards, so it can be shared read-only
//! across workers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

/// One conversational turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub dataset_id: String,
    pub dialogue_id: String,
    pub turn_index: u32,
    pub utterance_id: String,
    pub speaker_id: String,
    pub speaker_group: Option<String>,
    pub transcript: String,
    pub label: Option<String>,
    pub audio_path: Option<String>,
    pub split: Split,
}

/// An ordered, validated collection of utterances plus the label inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub utterances: Vec<Utterance>,
    pub label_set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusError {
    MalformedRecord { line: usize, detail: String },
    DuplicateUtteranceId(String),
    GapInTurnIndex(String),
    UnknownLabel(String),
    MissingModality(String),
    LabelSetTooSmall,
    UnknownUtterance(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::MalformedRecord { line, detail } => {
                write!(f, "malformed record on line {line}: {detail}")
            }
            CorpusError::DuplicateUtteranceId(id) => write!(f, "duplicate utterance_id {id:?}"),
            CorpusError::GapInTurnIndex(d) => {
                write!(f, "turn_index values in dialogue {d:?} are not contiguous from 0")
            }
            CorpusError::UnknownLabel(l) => write!(f, "label {l:?} is not in the label set"),
            CorpusError::MissingModality(id) => {
                write!(f, "utterance {id:?} has neither transcript nor audio")
            }
            CorpusError::LabelSetTooSmall => write!(f, "label set must have at least 2 entries"),
            CorpusError::UnknownUtterance(id) => write!(f, "unknown utterance_id {id:?}"),
        }
    }
}

impl Manifest {
    /// Parse a line-delimited manifest. Labels are case-normalized to
    /// lowercase. When `label_set` is given, every non-empty label must be a
    /// member; otherwise the label set is derived from the data in order of
    /// first appearance.
    pub fn from_jsonl(text: &str, label_set: Option<&[String]>) -> Result<Self, CorpusError> {
        let mut utterances: Vec<Utterance> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut utt: Utterance =
                serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
                    line: i + 1,
                    detail: e.to_string(),
                })?;
            utt.label = utt
                .label
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty());
            utterances.push(utt);
        }
        utterances.sort_by(|a, b| {
            (a.dialogue_id.as_str(), a.turn_index).cmp(&(b.dialogue_id.as_str(), b.turn_index))
        });

        let mut seen_ids = BTreeSet::new();
        for utt in &utterances {
            if !seen_ids.insert(utt.utterance_id.clone()) {
                return Err(CorpusError::DuplicateUtteranceId(utt.utterance_id.clone()));
            }
            if utt.transcript.trim().is_empty() && utt.audio_path.is_none() {
                return Err(CorpusError::MissingModality(utt.utterance_id.clone()));
            }
        }

        let mut next_turn: BTreeMap<&str, u32> = BTreeMap::new();
        for utt in &utterances {
            let expected = next_turn.entry(utt.dialogue_id.as_str()).or_insert(0);
            if utt.turn_index != *expected {
                return Err(CorpusError::GapInTurnIndex(utt.dialogue_id.clone()));
            }
            *expected += 1;
        }

        let labels: Vec<String> = match label_set {
            Some(set) => {
                let set: Vec<String> = set.iter().map(|l| l.to_lowercase()).collect();
                for utt in &utterances {
                    if let Some(l) = &utt.label {
                        if !set.contains(l) {
                            return Err(CorpusError::UnknownLabel(l.clone()));
                        }
                    }
                }
                set
            }
            None => {
                let mut derived = Vec::new();
                for utt in &utterances {
                    if let Some(l) = &utt.label {
                        if !derived.contains(l) {
                            derived.push(l.clone());
                        }
                    }
                }
                derived
            }
        };
        if labels.len() < 2 {
            return Err(CorpusError::LabelSetTooSmall);
        }

        Ok(Manifest {
            utterances,
            label_set: labels,
        })
    }

    /// Serialize back to the line-delimited form (one object per line, in
    /// manifest order). Reloading the result yields an identical manifest.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for utt in &self.utterances {
            out.push_str(&serde_json::to_string(utt).expect("utterance serializes"));
            out.push('\n');
        }
        out
    }

    pub fn get(&self, utterance_id: &str) -> Option<&Utterance> {
        self.utterances.iter().find(|u| u.utterance_id == utterance_id)
    }

    /// Up to `window` utterances strictly preceding the target within the
    /// same dialogue, in turn order, with the target itself last. Context
    /// never crosses dialogue boundaries.
    pub fn dialogue_context(
        &self,
        target: &str,
        window: usize,
    ) -> Result<Vec<&Utterance>, CorpusError> {
        let tgt = self
            .get(target)
            .ok_or_else(|| CorpusError::UnknownUtterance(target.to_string()))?;
        let mut dialogue: Vec<&Utterance> = self
            .utterances
            .iter()
            .filter(|u| u.dialogue_id == tgt.dialogue_id && u.turn_index <= tgt.turn_index)
            .collect();
        dialogue.sort_by_key(|u| u.turn_index);
        let start = dialogue.len().saturating_sub(window + 1);
        Ok(dialogue.split_off(start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(dialogue: &str, turn: u32, id: &str, label: Option<&str>) -> String {
        format!(
            concat!(
                "{{\"dataset_id\":\"synth\",\"dialogue_id\":\"{}\",\"turn_index\":{},",
                "\"utterance_id\":\"{}\",\"speaker_id\":\"s1\",\"speaker_group\":null,",
                "\"transcript\":\"hello there\",\"label\":{},\"audio_path\":null,\"split\":\"train\"}}"
            ),
            dialogue,
            turn,
            id,
            label.map(|l| format!("\"{l}\"")).unwrap_or_else(|| "null".into()),
        )
    }

    fn three_turn_manifest() -> Manifest {
        let text = [
            record("d1", 0, "d1_u0", Some("anger")),
            record("d1", 1, "d1_u1", Some("neutral")),
            record("d1", 2, "d1_u2", Some("anger")),
        ]
        .join("\n");
        Manifest::from_jsonl(&text, None).unwrap()
    }

    #[test]
    fn loads_in_order() {
        let m = three_turn_manifest();
        assert_eq!(m.utterances.len(), 3);
        let ids: Vec<_> = m.utterances.iter().map(|u| u.utterance_id.as_str()).collect();
        assert_eq!(ids, vec!["d1_u0", "d1_u1", "d1_u2"]);
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = [record("d1", 0, "d1_u0", Some("a")), record("d1", 1, "d1_u0", Some("b"))].join("\n");
        assert_eq!(
            Manifest::from_jsonl(&text, None),
            Err(CorpusError::DuplicateUtteranceId("d1_u0".into()))
        );
    }

    #[test]
    fn out_of_set_label_rejected() {
        let six: Vec<String> = ["anger", "happiness", "excitement", "sadness", "frustration", "neutral"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let text = [record("d1", 0, "u0", Some("fear")), record("d1", 1, "u1", Some("anger"))].join("\n");
        assert_eq!(
            Manifest::from_jsonl(&text, Some(&six)),
            Err(CorpusError::UnknownLabel("fear".into()))
        );
    }

    #[test]
    fn gap_in_turns_rejected() {
        let text = [record("d1", 0, "u0", Some("a")), record("d1", 2, "u2", Some("b"))].join("\n");
        assert_eq!(
            Manifest::from_jsonl(&text, None),
            Err(CorpusError::GapInTurnIndex("d1".into()))
        );
    }

    #[test]
    fn labels_are_lowercased() {
        let text = [record("d1", 0, "u0", Some("Anger")), record("d1", 1, "u1", Some("Neutral"))].join("\n");
        let m = Manifest::from_jsonl(&text, None).unwrap();
        assert_eq!(m.label_set, vec!["anger", "neutral"]);
    }

    #[test]
    fn context_at_turn_zero_is_target_only() {
        let m = three_turn_manifest();
        let ctx = m.dialogue_context("d1_u0", 12).unwrap();
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].utterance_id, "d1_u0");
    }

    #[test]
    fn context_window_arithmetic() {
        let text: Vec<String> = (0..6).map(|i| record("d1", i, &format!("u{i}"), Some(if i % 2 == 0 { "a" } else { "b" }))).collect();
        let m = Manifest::from_jsonl(&text.join("\n"), None).unwrap();
        let ctx = m.dialogue_context("u5", 3).unwrap();
        let turns: Vec<u32> = ctx.iter().map(|u| u.turn_index).collect();
        assert_eq!(turns, vec![2, 3, 4, 5]);

        // brute-force slice of the whole dialogue
        let ctx = m.dialogue_context("u5", 12).unwrap();
        let turns: Vec<u32> = ctx.iter().map(|u| u.turn_index).collect();
        assert_eq!(turns, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn context_is_suffix_ending_at_target() {
        let text: Vec<String> = (0..6).map(|i| record("d1", i, &format!("u{i}"), Some(if i % 2 == 0 { "a" } else { "b" }))).collect();
        let m = Manifest::from_jsonl(&text.join("\n"), None).unwrap();
        for window in 0..8 {
            let ctx = m.dialogue_context("u4", window).unwrap();
            assert_eq!(ctx.last().unwrap().utterance_id, "u4");
            for pair in ctx.windows(2) {
                assert_eq!(pair[1].turn_index, pair[0].turn_index + 1);
            }
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let m = three_turn_manifest();
        let reloaded = Manifest::from_jsonl(&m.to_jsonl(), None).unwrap();
        assert_eq!(m, reloaded);
    }

    #[test]
    fn unknown_target_errors() {
        let m = three_turn_manifest();
        assert_eq!(
            m.dialogue_context("nope", 3),
            Err(CorpusError::UnknownUtterance("nope".into()))
        );
    }
}
