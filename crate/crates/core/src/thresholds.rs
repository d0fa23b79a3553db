//! Quantile thresholds, group-wise standardization with a global fallback,
//! and categorization of numeric features into named levels.
//!
//! Pipeline order is: standardize within the policy group, then build
//! quantile thresholds on the standardized values. Either stage can be
//! skipped by the caller.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Manifest;
use crate::dsp::ProsodicFeatures;

/// The five feature columns, in canonical order.
pub const FEATURE_NAMES: [&str; 5] = [
    "avg_volume",
    "volume_variation",
    "avg_pitch",
    "pitch_variation",
    "speaking_rate",
];

pub const FEATURE_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdError {
    InvalidClassCount(u8),
    EmptyInput,
    MissingUtterance(String),
    BadBoundaryCount { expected: usize, got: usize },
}

impl fmt::Display for ThresholdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdError::InvalidClassCount(n) => {
                write!(f, "number of classes must be 3-6, got {n}")
            }
            ThresholdError::EmptyInput => write!(f, "empty input"),
            ThresholdError::MissingUtterance(id) => {
                write!(f, "utterance {id:?} not found in manifest")
            }
            ThresholdError::BadBoundaryCount { expected, got } => {
                write!(f, "expected {expected} boundaries, got {got}")
            }
        }
    }
}

/// A 3-6 class quantile scheme. The quantile lists are fixed per class
/// count: 3 -> [0.25, 0.75], 4 -> [0.25, 0.5, 0.75], 5 -> [0.1, 0.25, 0.75,
/// 0.9], 6 -> [0.1, 0.25, 0.5, 0.75, 0.9].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantileScheme {
    num_classes: u8,
}

impl QuantileScheme {
    pub fn new(num_classes: u8) -> Result<Self, ThresholdError> {
        if (3..=6).contains(&num_classes) {
            Ok(QuantileScheme { num_classes })
        } else {
            Err(ThresholdError::InvalidClassCount(num_classes))
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes as usize
    }

    pub fn quantiles(&self) -> &'static [f64] {
        match self.num_classes {
            3 => &[0.25, 0.75],
            4 => &[0.25, 0.5, 0.75],
            5 => &[0.1, 0.25, 0.75, 0.9],
            6 => &[0.1, 0.25, 0.5, 0.75, 0.9],
            _ => unreachable!(),
        }
    }

    pub fn level_names(&self) -> &'static [&'static str] {
        match self.num_classes {
            3 => &["low", "medium", "high"],
            4 => &["low", "medium-low", "medium-high", "high"],
            5 => &["very low", "low", "medium", "high", "very high"],
            6 => &["very low", "low", "medium-low", "medium-high", "high", "very high"],
            _ => unreachable!(),
        }
    }

    pub fn level(&self, index: usize) -> CategoryLevel {
        CategoryLevel {
            index,
            name: self.level_names()[index].to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Global,
    PerSpeaker,
    PerGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub grouping: Grouping,
    /// Groups with fewer utterances than this fall back to global statistics.
    pub min_count: usize,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy { grouping: Grouping::PerSpeaker, min_count: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLevel {
    pub index: usize,
    pub name: String,
}

/// A level plus a normalized distance to the nearest boundary, used later
/// to decide whether an impression needs a hedge word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorizedFeature {
    pub level: CategoryLevel,
    pub margin: f64,
}

/// One utterance's numeric feature row; pitch entries may be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub utterance_id: String,
    pub values: [Option<f64>; FEATURE_COUNT],
}

impl FeatureRow {
    pub fn from_features(utterance_id: &str, f: &ProsodicFeatures) -> Self {
        FeatureRow {
            utterance_id: utterance_id.to_string(),
            values: [
                Some(f.avg_volume_db),
                Some(f.volume_variation_db),
                f.avg_pitch_hz,
                f.pitch_variation_hz,
                Some(f.speaking_rate_wps),
            ],
        }
    }
}

/// Boundaries plus the inter-decile span of the values they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub boundaries: Vec<f64>,
    pub span: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureThresholds {
    pub global: GroupEntry,
    pub groups: BTreeMap<String, GroupEntry>,
}

impl FeatureThresholds {
    /// Group lookup with global fallback.
    pub fn entry(&self, group: Option<&str>) -> &GroupEntry {
        group
            .and_then(|g| self.groups.get(g))
            .unwrap_or(&self.global)
    }
}

/// Per-feature, per-group quantile boundaries. The global entry always
/// exists; groups below `min_count` are omitted and resolve to global.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub scheme: QuantileScheme,
    pub policy: NormalizationPolicy,
    pub features: BTreeMap<String, FeatureThresholds>,
}

/// Quantile boundaries by linear interpolation between order statistics at
/// position (n-1)*q.
pub fn compute_quantiles(values: &[f64], scheme: QuantileScheme) -> Result<Vec<f64>, ThresholdError> {
    quantiles_at(values, scheme.quantiles())
}

pub fn quantiles_at(values: &[f64], qs: &[f64]) -> Result<Vec<f64>, ThresholdError> {
    if values.is_empty() {
        return Err(ThresholdError::EmptyInput);
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    Ok(qs.iter().map(|&q| interpolate(&sorted, q)).collect())
}

fn interpolate(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Group key of an utterance under a policy; `None` means the global pool.
pub fn group_key<'a>(manifest: &'a Manifest, utterance_id: &str, grouping: Grouping) -> Option<&'a str> {
    let utt = manifest.get(utterance_id)?;
    match grouping {
        Grouping::Global => None,
        Grouping::PerSpeaker => Some(utt.speaker_id.as_str()),
        Grouping::PerGroup => utt.speaker_group.as_deref(),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    (m, libm::sqrt(var).max(1e-9))
}

/// Z-score each feature within its policy group, falling back to global
/// statistics for groups below `min_count`. Absent pitch values stay absent.
pub fn standardize(
    rows: &[FeatureRow],
    manifest: &Manifest,
    policy: &NormalizationPolicy,
) -> Result<Vec<FeatureRow>, ThresholdError> {
    for row in rows {
        if manifest.get(&row.utterance_id).is_none() {
            return Err(ThresholdError::MissingUtterance(row.utterance_id.clone()));
        }
    }
    if rows.is_empty() {
        return Err(ThresholdError::EmptyInput);
    }

    let keys: Vec<Option<&str>> = rows
        .iter()
        .map(|r| group_key(manifest, &r.utterance_id, policy.grouping))
        .collect();
    let mut group_sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for key in keys.iter().flatten() {
        *group_sizes.entry(key).or_insert(0) += 1;
    }

    let mut out = rows.to_vec();
    for feat in 0..FEATURE_COUNT {
        let all: Vec<f64> = rows.iter().filter_map(|r| r.values[feat]).collect();
        if all.is_empty() {
            continue;
        }
        let global = mean_std(&all);
        let mut per_group: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
        for (&key, size) in &group_sizes {
            if *size < policy.min_count {
                continue;
            }
            let vals: Vec<f64> = rows
                .iter()
                .zip(&keys)
                .filter(|(_, k)| k.as_deref() == Some(key))
                .filter_map(|(r, _)| r.values[feat])
                .collect();
            if !vals.is_empty() {
                per_group.insert(key, mean_std(&vals));
            }
        }
        for (row, key) in out.iter_mut().zip(&keys) {
            if let Some(v) = row.values[feat] {
                let (mu, sigma) = key
                    .and_then(|k| per_group.get(k))
                    .copied()
                    .unwrap_or(global);
                row.values[feat] = Some((v - mu) / sigma);
            }
        }
    }
    Ok(out)
}

fn group_entry(values: &[f64], scheme: QuantileScheme) -> Result<GroupEntry, ThresholdError> {
    let boundaries = compute_quantiles(values, scheme)?;
    let deciles = quantiles_at(values, &[0.1, 0.9])?;
    Ok(GroupEntry {
        boundaries,
        span: (deciles[1] - deciles[0]).max(f64::EPSILON),
    })
}

/// Per-group quantile boundaries for every feature, plus the global entry.
pub fn build_threshold_table(
    rows: &[FeatureRow],
    manifest: &Manifest,
    scheme: QuantileScheme,
    policy: &NormalizationPolicy,
) -> Result<ThresholdTable, ThresholdError> {
    if rows.is_empty() {
        return Err(ThresholdError::EmptyInput);
    }
    let keys: Vec<Option<&str>> = rows
        .iter()
        .map(|r| group_key(manifest, &r.utterance_id, policy.grouping))
        .collect();
    let mut group_sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for key in keys.iter().flatten() {
        *group_sizes.entry(key).or_insert(0) += 1;
    }

    let mut features = BTreeMap::new();
    for (feat, name) in FEATURE_NAMES.iter().enumerate() {
        let all: Vec<f64> = rows.iter().filter_map(|r| r.values[feat]).collect();
        if all.is_empty() {
            continue; // e.g. fully unvoiced corpus: no pitch thresholds
        }
        let global = group_entry(&all, scheme)?;
        let mut groups = BTreeMap::new();
        for (&key, size) in &group_sizes {
            if *size < policy.min_count {
                continue;
            }
            let vals: Vec<f64> = rows
                .iter()
                .zip(&keys)
                .filter(|(_, k)| k.as_deref() == Some(key))
                .filter_map(|(r, _)| r.values[feat])
                .collect();
            if !vals.is_empty() {
                groups.insert(key.to_string(), group_entry(&vals, scheme)?);
            }
        }
        features.insert(name.to_string(), FeatureThresholds { global, groups });
    }
    Ok(ThresholdTable { scheme, policy: *policy, features })
}

/// Assign a level: the index counts boundaries `b` with `value >= b`, so a
/// value exactly on a boundary goes to the higher class. The margin is the
/// distance to the nearest boundary normalized by the group's inter-decile
/// span.
pub fn categorize(
    value: f64,
    boundaries: &[f64],
    scheme: QuantileScheme,
    span: f64,
) -> Result<CategorizedFeature, ThresholdError> {
    let expected = scheme.num_classes() - 1;
    if boundaries.len() != expected {
        return Err(ThresholdError::BadBoundaryCount { expected, got: boundaries.len() });
    }
    assert!(span > 0.0, "span must be positive");
    let index = boundaries.iter().filter(|&&b| value >= b).count();
    let margin = boundaries
        .iter()
        .map(|b| libm::fabs(value - b) / span)
        .fold(f64::INFINITY, f64::min);
    Ok(CategorizedFeature { level: scheme.level(index), margin })
}

impl ThresholdTable {
    /// Categorize one utterance's feature row under this table, using the
    /// utterance's policy group (global fallback when the group is absent).
    pub fn categorize_row(
        &self,
        row: &FeatureRow,
        manifest: &Manifest,
    ) -> Result<[Option<CategorizedFeature>; FEATURE_COUNT], ThresholdError> {
        let key = group_key(manifest, &row.utterance_id, self.policy.grouping);
        let mut out: [Option<CategorizedFeature>; FEATURE_COUNT] = Default::default();
        for (feat, name) in FEATURE_NAMES.iter().enumerate() {
            if let (Some(v), Some(ft)) = (row.values[feat], self.features.get(*name)) {
                let entry = ft.entry(key);
                out[feat] = Some(categorize(v, &entry.boundaries, self.scheme, entry.span)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    /// Independent oracle: sort and interpolate at (n-1)q directly.
    fn oracle_quantile(values: &[f64], q: f64) -> f64 {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos = (sorted.len() - 1) as f64 * q;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }

    /// Independent oracle: linear scan for the bin.
    fn oracle_bin(value: f64, boundaries: &[f64]) -> usize {
        let mut idx = 0;
        for &b in boundaries {
            if value >= b {
                idx += 1;
            }
        }
        idx
    }

    fn manifest_of(n: usize, speakers: &[&str]) -> Manifest {
        let lines: Vec<String> = (0..n)
            .map(|i| {
                format!(
                    concat!(
                        "{{\"dataset_id\":\"s\",\"dialogue_id\":\"d\",\"turn_index\":{},",
                        "\"utterance_id\":\"u{}\",\"speaker_id\":\"{}\",\"speaker_group\":\"g{}\",",
                        "\"transcript\":\"t\",\"label\":\"{}\",\"audio_path\":null,\"split\":\"train\"}}"
                    ),
                    i,
                    i,
                    speakers[i % speakers.len()],
                    i % 2,
                    if i % 2 == 0 { "a" } else { "b" },
                )
            })
            .collect();
        Manifest::from_jsonl(&lines.join("\n"), None).unwrap()
    }

    fn rows_of(values: &[f64]) -> Vec<FeatureRow> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| FeatureRow {
                utterance_id: format!("u{i}"),
                values: [Some(v); FEATURE_COUNT],
            })
            .collect()
    }

    #[test]
    fn scheme_quantile_constants() {
        assert_eq!(QuantileScheme::new(3).unwrap().quantiles(), &[0.25, 0.75]);
        assert_eq!(QuantileScheme::new(4).unwrap().quantiles(), &[0.25, 0.5, 0.75]);
        assert_eq!(QuantileScheme::new(5).unwrap().quantiles(), &[0.1, 0.25, 0.75, 0.9]);
        assert_eq!(QuantileScheme::new(6).unwrap().quantiles(), &[0.1, 0.25, 0.5, 0.75, 0.9]);
        assert!(QuantileScheme::new(2).is_err());
        assert!(QuantileScheme::new(7).is_err());
    }

    #[test]
    fn median_of_even_list() {
        let q = quantiles_at(&[0.0, 1.0, 2.0, 3.0], &[0.5]).unwrap();
        assert_eq!(q, vec![1.5]);
    }

    #[test]
    fn quantiles_match_oracle_on_seeded_uniform() {
        let mut rng = SmallRng::seed_from_u64(42);
        let values: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let scheme = QuantileScheme::new(3).unwrap();
        let got = compute_quantiles(&values, scheme).unwrap();
        for (b, &q) in got.iter().zip(scheme.quantiles()) {
            assert!((b - oracle_quantile(&values, q)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_zscore() {
        let manifest = manifest_of(2, &["s0"]);
        let rows = rows_of(&[1.0, 3.0]);
        let policy = NormalizationPolicy { grouping: Grouping::Global, min_count: 2 };
        let out = standardize(&rows, &manifest, &policy).unwrap();
        assert!((out[0].values[0].unwrap() + 1.0).abs() < 1e-12);
        assert!((out[1].values[0].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_speaker_falls_back_to_global() {
        // 25 utterances from s0 and 1 from s1, min_count 24: s1's utterance
        // standardizes against global stats
        let speakers: Vec<&str> = core::iter::repeat("s0").take(25).chain(["s1"]).collect();
        let manifest = manifest_of(26, &speakers);
        let mut values: Vec<f64> = (0..25).map(|i| i as f64).collect();
        values.push(100.0);
        let rows: Vec<FeatureRow> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| FeatureRow { utterance_id: format!("u{i}"), values: [Some(v); 5] })
            .collect();
        let policy = NormalizationPolicy { grouping: Grouping::PerSpeaker, min_count: 24 };
        let out = standardize(&rows, &manifest, &policy).unwrap();
        let (mu, sigma) = mean_std(&values);
        let expected = (100.0 - mu) / sigma;
        assert!((out[25].values[0].unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn group_means_are_zero_after_standardize() {
        let manifest = manifest_of(60, &["s0", "s1"]);
        let mut rng = SmallRng::seed_from_u64(1);
        // two gender groups with different means (speaker_group is i % 2)
        let rows: Vec<FeatureRow> = (0..60)
            .map(|i| FeatureRow {
                utterance_id: format!("u{i}"),
                values: [Some(if i % 2 == 0 { 5.0 } else { -3.0 } + rng.gen_range(-1.0..1.0)); 5],
            })
            .collect();
        let policy = NormalizationPolicy { grouping: Grouping::PerGroup, min_count: 10 };
        let out = standardize(&rows, &manifest, &policy).unwrap();
        for parity in 0..2 {
            let vals: Vec<f64> = out
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == parity)
                .map(|(_, r)| r.values[0].unwrap())
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!(mean.abs() < 1e-9, "group {parity} mean {mean}");
        }
    }

    #[test]
    fn single_speaker_table_boundaries() {
        let manifest = manifest_of(100, &["s0"]);
        let rows = rows_of(&(0..100).map(|i| i as f64).collect::<Vec<_>>());
        let scheme = QuantileScheme::new(3).unwrap();
        let policy = NormalizationPolicy { grouping: Grouping::PerSpeaker, min_count: 24 };
        let table = build_threshold_table(&rows, &manifest, scheme, &policy).unwrap();
        let entry = &table.features["avg_volume"].groups["s0"];
        assert!((entry.boundaries[0] - 24.75).abs() < 1e-12);
        assert!((entry.boundaries[1] - 74.25).abs() < 1e-12);
    }

    #[test]
    fn tiny_groups_leave_only_global() {
        let manifest = manifest_of(2, &["s0", "s1"]);
        let rows = rows_of(&[1.0, 2.0]);
        let scheme = QuantileScheme::new(3).unwrap();
        let policy = NormalizationPolicy { grouping: Grouping::PerSpeaker, min_count: 2 };
        let table = build_threshold_table(&rows, &manifest, scheme, &policy).unwrap();
        assert!(table.features["avg_volume"].groups.is_empty());
    }

    #[test]
    fn degenerate_distribution_boundaries_are_equal() {
        let manifest = manifest_of(10, &["s0"]);
        let rows = rows_of(&[7.0; 10]);
        let scheme = QuantileScheme::new(5).unwrap();
        let policy = NormalizationPolicy { grouping: Grouping::Global, min_count: 2 };
        let table = build_threshold_table(&rows, &manifest, scheme, &policy).unwrap();
        assert!(table.features["avg_volume"].global.boundaries.iter().all(|&b| b == 7.0));
    }

    #[test]
    fn boundary_tie_goes_high() {
        let scheme = QuantileScheme::new(3).unwrap();
        let c = categorize(2.0, &[2.0, 5.0], scheme, 1.0).unwrap();
        assert_eq!(c.level.name, "medium");
        let c = categorize(1.999, &[2.0, 5.0], scheme, 1.0).unwrap();
        assert_eq!(c.level.name, "low");
    }

    #[test]
    fn below_first_boundary_is_very_low() {
        let scheme = QuantileScheme::new(5).unwrap();
        let c = categorize(-10.0, &[0.0, 1.0, 2.0, 3.0], scheme, 1.0).unwrap();
        assert_eq!(c.level.name, "very low");
        assert_eq!(c.level.index, 0);
    }

    #[test]
    fn bad_boundary_count_rejected() {
        let scheme = QuantileScheme::new(5).unwrap();
        assert!(matches!(
            categorize(0.0, &[1.0, 2.0], scheme, 1.0),
            Err(ThresholdError::BadBoundaryCount { .. })
        ));
    }

    #[test]
    fn categorize_sweep_matches_linear_scan_oracle() {
        let mut rng = SmallRng::seed_from_u64(9);
        let scheme = QuantileScheme::new(6).unwrap();
        let boundaries = [-1.0, -0.25, 0.0, 0.5, 1.5];
        for _ in 0..10_000 {
            let v = rng.gen_range(-3.0..3.0);
            let got = categorize(v, &boundaries, scheme, 1.0).unwrap();
            assert_eq!(got.level.index, oracle_bin(v, &boundaries));
        }
        // exact boundary ties
        for &b in &boundaries {
            let got = categorize(b, &boundaries, scheme, 1.0).unwrap();
            assert_eq!(got.level.index, oracle_bin(b, &boundaries));
        }
    }

    #[test]
    fn margin_is_distance_to_nearest_boundary_over_span() {
        let scheme = QuantileScheme::new(3).unwrap();
        let c = categorize(2.6, &[2.0, 5.0], scheme, 4.0).unwrap();
        assert!((c.margin - 0.15).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn monotonicity(mut vals in proptest::collection::vec(-100.0f64..100.0, 2..50)) {
            let scheme = QuantileScheme::new(5).unwrap();
            let boundaries = compute_quantiles(&vals, scheme).unwrap();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut last = 0usize;
            for v in vals {
                let idx = categorize(v, &boundaries, scheme, 1.0).unwrap().level.index;
                prop_assert!(idx >= last);
                prop_assert!(idx < scheme.num_classes());
                last = idx;
            }
        }

        #[test]
        fn affine_invariance(
            vals in proptest::collection::vec(-50.0f64..50.0, 5..60),
            a in 0.01f64..20.0,
            c in -100.0f64..100.0,
        ) {
            let scheme = QuantileScheme::new(4).unwrap();
            let before = compute_quantiles(&vals, scheme).unwrap();
            let transformed: Vec<f64> = vals.iter().map(|v| a * v + c).collect();
            let after = compute_quantiles(&transformed, scheme).unwrap();
            for (&v, &t) in vals.iter().zip(&transformed) {
                let i = categorize(v, &before, scheme, 1.0).unwrap().level.index;
                let j = categorize(t, &after, scheme, 1.0).unwrap().level.index;
                prop_assert_eq!(i, j);
            }
        }
    }

    #[test]
    fn class_occupancy_converges_to_quantile_gaps() {
        let mut rng = SmallRng::seed_from_u64(3);
        let values: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..1.0)).collect();
        let scheme = QuantileScheme::new(5).unwrap();
        let boundaries = compute_quantiles(&values, scheme).unwrap();
        let mut counts = [0usize; 5];
        for &v in &values {
            counts[categorize(v, &boundaries, scheme, 1.0).unwrap().level.index] += 1;
        }
        let expected = [0.10, 0.15, 0.50, 0.15, 0.10];
        for (count, exp) in counts.iter().zip(expected) {
            let frac = *count as f64 / values.len() as f64;
            assert!((frac - exp).abs() <= 0.02, "occupancy {frac} vs {exp}");
        }
    }
}
