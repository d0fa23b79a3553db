//! Render categorized features as objective descriptions ("high volume with
//! moderate variation") and as an interpretive, flowing impression sentence.
//!
//! The feature-impression mapping is a fixed 15-cell table (5 features x 3
//! level bands). Impressions near a category boundary are softened with a
//! hedge word.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::thresholds::{CategorizedFeature, CategoryLevel, FEATURE_COUNT};

/// Margin below which an impression fragment gets hedged, as a fraction of
/// the feature's inter-decile span.
pub const DEFAULT_HEDGE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum DescribeError {
    MissingVolume,
    MissingRate,
}

impl fmt::Display for DescribeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DescribeError::MissingVolume => write!(f, "volume fields are required"),
            DescribeError::MissingRate => write!(f, "speaking rate field is required"),
        }
    }
}

/// The five categorized features of one utterance. Pitch fields are absent
/// for fully unvoiced utterances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorizedFeatures {
    pub avg_volume: CategorizedFeature,
    pub volume_variation: CategorizedFeature,
    pub avg_pitch: Option<CategorizedFeature>,
    pub pitch_variation: Option<CategorizedFeature>,
    pub speaking_rate: CategorizedFeature,
}

impl CategorizedFeatures {
    /// Assemble from a row in canonical feature order (avg_volume,
    /// volume_variation, avg_pitch, pitch_variation, speaking_rate).
    pub fn from_row(mut row: [Option<CategorizedFeature>; FEATURE_COUNT]) -> Result<Self, DescribeError> {
        let [avg_volume, volume_variation, avg_pitch, pitch_variation, speaking_rate] =
            core::mem::take(&mut row);
        Ok(CategorizedFeatures {
            avg_volume: avg_volume.ok_or(DescribeError::MissingVolume)?,
            volume_variation: volume_variation.ok_or(DescribeError::MissingVolume)?,
            avg_pitch,
            pitch_variation,
            speaking_rate: speaking_rate.ok_or(DescribeError::MissingRate)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechDescription {
    pub text: String,
}

/// One utterance's full speech annotation: the categorized levels plus both
/// rendered texts. This is what downstream prompt assembly consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub utterance_id: String,
    pub classes: u8,
    pub features: CategorizedFeatures,
    pub description: String,
    pub impression: String,
}

impl Annotation {
    pub fn new(utterance_id: String, classes: u8, features: CategorizedFeatures, hedge_margin: f64) -> Self {
        let description = describe_features(&features).text;
        let impression = render_impression(&features, hedge_margin).text;
        Annotation { utterance_id, classes, features, description, impression }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechImpression {
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpressionFeature {
    Pitch,
    PitchVariation,
    Volume,
    VolumeVariation,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Low,
    Medium,
    High,
}

/// "medium-low" and "medium-high" fold into the medium band; the impression
/// table only distinguishes three bands.
fn band(level: &CategoryLevel) -> Band {
    match level.name.as_str() {
        "low" | "very low" => Band::Low,
        "high" | "very high" => Band::High,
        _ => Band::Medium,
    }
}

/// The plain table cell for a feature/level pair.
pub fn impression_fragment(feature: ImpressionFeature, level: &CategoryLevel) -> &'static str {
    fragment(feature, band(level), false)
}

/// The hedged variant of the same cell ("likely ...").
pub fn hedged_impression_fragment(feature: ImpressionFeature, level: &CategoryLevel) -> &'static str {
    fragment(feature, band(level), true)
}

fn fragment(feature: ImpressionFeature, band: Band, hedged: bool) -> &'static str {
    use Band::*;
    use ImpressionFeature::*;
    match (feature, band, hedged) {
        (Pitch, High, false) => "uses a higher pitch",
        (Pitch, High, true) => "likely uses a higher pitch",
        (Pitch, Low, false) => "uses a lower pitch",
        (Pitch, Low, true) => "likely uses a lower pitch",
        (Pitch, Medium, false) => "has a moderate pitch",
        (Pitch, Medium, true) => "likely has a moderate pitch",

        (PitchVariation, High, false) => "with noticeable variation, suggesting expressiveness",
        (PitchVariation, High, true) => "with noticeable variation, likely suggesting expressiveness",
        (PitchVariation, Low, false) => {
            "that remains steady, potentially indicating calmness or seriousness"
        }
        (PitchVariation, Low, true) => {
            "that remains steady, likely indicating calmness or seriousness"
        }
        (PitchVariation, Medium, false) => "with typical variation",
        (PitchVariation, Medium, true) => "with likely typical variation",

        (Volume, High, false) => {
            "speaking loudly, which might indicate excitement, confidence, or urgency"
        }
        (Volume, High, true) => {
            "speaking loudly, which likely indicates excitement, confidence, or urgency"
        }
        (Volume, Low, false) => {
            "speaking softly, possibly suggesting calmness, shyness, or caution"
        }
        (Volume, Low, true) => "speaking softly, likely suggesting calmness, shyness, or caution",
        (Volume, Medium, false) => "using a moderate volume",
        (Volume, Medium, true) => "likely using a moderate volume",

        (VolumeVariation, High, false) => "with significant volume changes",
        (VolumeVariation, High, true) => "with likely significant volume changes",
        (VolumeVariation, Low, false) => "with little volume variation",
        (VolumeVariation, Low, true) => "with likely little volume variation",
        (VolumeVariation, Medium, false) => "with normal volume variation",
        (VolumeVariation, Medium, true) => "with likely normal volume variation",

        (Rate, High, false) => {
            "talking quickly, which could indicate excitement, urgency, or nervousness"
        }
        (Rate, High, true) => {
            "talking quickly, which likely indicates excitement, urgency, or nervousness"
        }
        (Rate, Low, false) => {
            "talking slowly, possibly suggesting thoughtfulness, hesitation, or calmness"
        }
        (Rate, Low, true) => {
            "talking slowly, likely suggesting thoughtfulness, hesitation, or calmness"
        }
        (Rate, Medium, false) => "speaking at a moderate pace",
        (Rate, Medium, true) => "likely speaking at a moderate pace",
    }
}

/// Variation slots say "moderate" where the level is "medium".
fn variation_adjective(level: &CategoryLevel) -> &str {
    if level.name == "medium" {
        "moderate"
    } else {
        level.name.as_str()
    }
}

/// Objective rendering: "<level> volume with <adj> variation; <level> pitch
/// with <adj> variation; <level> speaking rate".
pub fn describe_features(cf: &CategorizedFeatures) -> SpeechDescription {
    let mut text = String::new();
    text.push_str(&cf.avg_volume.level.name);
    text.push_str(" volume with ");
    text.push_str(variation_adjective(&cf.volume_variation.level));
    text.push_str(" variation; ");
    match (&cf.avg_pitch, &cf.pitch_variation) {
        (Some(p), Some(pv)) => {
            text.push_str(&p.level.name);
            text.push_str(" pitch with ");
            text.push_str(variation_adjective(&pv.level));
            text.push_str(" variation");
        }
        _ => text.push_str("no detectable pitch"),
    }
    text.push_str("; ");
    text.push_str(&cf.speaking_rate.level.name);
    text.push_str(" speaking rate");
    SpeechDescription { text }
}

fn pick(feature: ImpressionFeature, cf: &CategorizedFeature, hedge_margin: f64) -> &'static str {
    if cf.margin < hedge_margin {
        hedged_impression_fragment(feature, &cf.level)
    } else {
        impression_fragment(feature, &cf.level)
    }
}

/// Interpretive rendering: fragments in pitch, volume, rate order composed
/// into one sentence. Features within `hedge_margin` of a boundary use the
/// hedged cell.
pub fn render_impression(cf: &CategorizedFeatures, hedge_margin: f64) -> SpeechImpression {
    assert!(hedge_margin >= 0.0);
    let mut parts: Vec<String> = Vec::new();
    if let (Some(p), Some(pv)) = (&cf.avg_pitch, &cf.pitch_variation) {
        let mut s = String::from(pick(ImpressionFeature::Pitch, p, hedge_margin));
        s.push(' ');
        s.push_str(pick(ImpressionFeature::PitchVariation, pv, hedge_margin));
        parts.push(s);
    }
    let mut s = String::from(pick(ImpressionFeature::Volume, &cf.avg_volume, hedge_margin));
    s.push(' ');
    s.push_str(pick(ImpressionFeature::VolumeVariation, &cf.volume_variation, hedge_margin));
    parts.push(s);
    parts.push(String::from(pick(ImpressionFeature::Rate, &cf.speaking_rate, hedge_margin)));

    let mut text = parts.join(", ");
    if let Some(first) = text.get(..1) {
        let upper = first.to_uppercase();
        text.replace_range(..1, &upper);
    }
    text.push('.');
    SpeechImpression { text }
}
