//! Robust parsing of model completions into labels. Generative models
//! inflect labels ("frustrated" for "frustration"), so an alias table maps
//! common inflections back to the canonical form.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Inflected form -> canonical label.
pub const LABEL_ALIASES: &[(&str, &str)] = &[
    ("angry", "anger"),
    ("frustrated", "frustration"),
    ("happy", "happiness"),
    ("sad", "sadness"),
    ("excited", "excitement"),
    ("joyful", "joy"),
    ("surprised", "surprise"),
    ("disgusted", "disgust"),
    ("fearful", "fear"),
    ("afraid", "fear"),
];

/// Parse a completion against a label set.
///
/// Lowercase and trim, then: an exact label (or alias) match wins; otherwise
/// a substring scan over labels and aliases must resolve to exactly one
/// distinct label. Zero or multiple distinct matches are unparseable
/// (`None`).
pub fn parse_label(completion: &str, label_set: &[String]) -> Option<String> {
    let text = completion.trim().to_lowercase();
    let text = text.trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace());

    let canonical = |candidate: &str| -> Option<String> {
        if label_set.iter().any(|l| l == candidate) {
            return Some(candidate.to_string());
        }
        LABEL_ALIASES
            .iter()
            .find(|(alias, target)| *alias == candidate && label_set.iter().any(|l| l == target))
            .map(|(_, target)| target.to_string())
    };

    if let Some(label) = canonical(text) {
        return Some(label);
    }

    let mut matches: Vec<String> = Vec::new();
    for label in label_set {
        if text.contains(label.as_str()) && !matches.contains(label) {
            matches.push(label.clone());
        }
    }
    for (alias, target) in LABEL_ALIASES {
        if text.contains(alias) && label_set.iter().any(|l| l == target) {
            let target = target.to_string();
            if !matches.contains(&target) {
                matches.push(target);
            }
        }
    }
    if matches.len() == 1 {
        matches.pop()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn iemocap() -> Vec<String> {
        ["anger", "happiness", "excitement", "sadness", "frustration", "neutral"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn case_fold_exact_match() {
        assert_eq!(parse_label("Anger", &iemocap()), Some("anger".into()));
        assert_eq!(parse_label("  NEUTRAL.\n", &iemocap()), Some("neutral".into()));
    }

    #[test]
    fn embedded_label_in_sentence() {
        assert_eq!(
            parse_label("The emotion is: Sadness.", &iemocap()),
            Some("sadness".into())
        );
    }

    #[test]
    fn ambiguous_is_unparseable() {
        assert_eq!(parse_label("either happiness or sadness", &iemocap()), None);
    }

    #[test]
    fn out_of_set_is_unparseable() {
        assert_eq!(parse_label("cheerful", &iemocap()), None);
    }

    #[test]
    fn alias_inflections() {
        assert_eq!(parse_label("frustrated", &iemocap()), Some("frustration".into()));
        assert_eq!(parse_label("The speaker sounds angry.", &iemocap()), Some("anger".into()));
        assert_eq!(parse_label("happy", &iemocap()), Some("happiness".into()));
        assert_eq!(parse_label("sad", &iemocap()), Some("sadness".into()));
        assert_eq!(parse_label("excited", &iemocap()), Some("excitement".into()));
    }

    #[test]
    fn alias_and_label_for_same_emotion_agree() {
        // "sadness" contains both the label and the alias "sad"; one match
        assert_eq!(
            parse_label("clearly sadness here", &iemocap()),
            Some("sadness".into())
        );
    }

    #[test]
    fn alias_outside_label_set_is_ignored() {
        let two = vec!["anger".to_string(), "neutral".to_string()];
        assert_eq!(parse_label("joyful", &two), None);
    }
}
