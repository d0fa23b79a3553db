//! Per-class F1, weighted and macro F1, and row-normalized confusion
//! matrices.
//!
//! Unparseable predictions count as wrong: they consume gold support (recall
//! denominator) but contribute to no class's true or false positives. They
//! are excluded from the confusion matrix, whose rows are normalized over
//! parsed predictions only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    LengthMismatch { gold: usize, predicted: usize },
    LabelOutsideSet(String),
    EmptyInput,
    LabelSetMismatch,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch { gold, predicted } => {
                write!(f, "gold has {gold} items but predictions have {predicted}")
            }
            MetricsError::LabelOutsideSet(l) => write!(f, "label {l:?} not in label set"),
            MetricsError::EmptyInput => write!(f, "no items to score"),
            MetricsError::LabelSetMismatch => write!(f, "reports have different label sets"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label_set: Vec<String>,
    pub per_class_f1: BTreeMap<String, f64>,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    /// Row-normalized fractions in `label_set` order (rows = gold).
    pub confusion: Vec<Vec<f64>>,
    pub support: BTreeMap<String, usize>,
    pub unparseable_count: usize,
    /// Gold labels whose confusion row had nothing to normalize.
    pub empty_rows: Vec<String>,
}

/// Score predictions against gold labels. `None` marks an unparseable
/// prediction.
pub fn score(
    gold: &[String],
    predicted: &[Option<String>],
    label_set: &[String],
) -> Result<EvalReport, MetricsError> {
    if gold.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { gold: gold.len(), predicted: predicted.len() });
    }
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let index: BTreeMap<&str, usize> = label_set
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let k = label_set.len();
    let mut counts = vec![vec![0usize; k]; k];
    let mut support = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut unparseable = 0usize;

    for (g, p) in gold.iter().zip(predicted) {
        let gi = *index
            .get(g.as_str())
            .ok_or_else(|| MetricsError::LabelOutsideSet(g.clone()))?;
        support[gi] += 1;
        match p {
            Some(p) => {
                let pi = *index
                    .get(p.as_str())
                    .ok_or_else(|| MetricsError::LabelOutsideSet(p.clone()))?;
                counts[gi][pi] += 1;
                if pi != gi {
                    fp[pi] += 1;
                }
            }
            None => unparseable += 1,
        }
    }

    let mut per_class_f1 = BTreeMap::new();
    for (i, label) in label_set.iter().enumerate() {
        let tp = counts[i][i];
        let precision_den = tp + fp[i];
        let recall_den = support[i];
        let p = if precision_den == 0 { 0.0 } else { tp as f64 / precision_den as f64 };
        let r = if recall_den == 0 { 0.0 } else { tp as f64 / recall_den as f64 };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        per_class_f1.insert(label.clone(), f1);
    }

    let total: usize = support.iter().sum();
    let weighted_f1 = label_set
        .iter()
        .enumerate()
        .map(|(i, l)| support[i] as f64 * per_class_f1[l])
        .sum::<f64>()
        / total as f64;
    let macro_f1 = per_class_f1.values().sum::<f64>() / k as f64;

    let mut confusion = vec![vec![0.0; k]; k];
    let mut empty_rows = Vec::new();
    for i in 0..k {
        let row_total: usize = counts[i].iter().sum();
        if row_total == 0 {
            empty_rows.push(label_set[i].clone());
        } else {
            for j in 0..k {
                confusion[i][j] = counts[i][j] as f64 / row_total as f64;
            }
        }
    }

    Ok(EvalReport {
        label_set: label_set.to_vec(),
        per_class_f1,
        weighted_f1,
        macro_f1,
        confusion,
        support: label_set
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), support[i]))
            .collect(),
        unparseable_count: unparseable,
        empty_rows,
    })
}

/// Signed per-class and aggregate deltas between two reports (`b - a`),
/// in fractional units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub per_class: BTreeMap<String, f64>,
    pub weighted_f1: f64,
    pub macro_f1: f64,
}

pub fn diff_reports(a: &EvalReport, b: &EvalReport) -> Result<ReportDiff, MetricsError> {
    if a.label_set != b.label_set {
        return Err(MetricsError::LabelSetMismatch);
    }
    let per_class = a
        .label_set
        .iter()
        .map(|l| (l.clone(), b.per_class_f1[l] - a.per_class_f1[l]))
        .collect();
    Ok(ReportDiff {
        per_class,
        weighted_f1: b.weighted_f1 - a.weighted_f1,
        macro_f1: b.macro_f1 - a.macro_f1,
    })
}

/// Format a fractional delta the way result tables print it: "+1.98%".
pub fn format_signed_percent(delta: f64) -> String {
    format!("{:+.2}%", delta * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn some_all(preds: &[&str]) -> Vec<Option<String>> {
        preds.iter().map(|p| Some(p.to_string())).collect()
    }

    #[test]
    fn perfect_predictions() {
        let set = labels(&["a", "b"]);
        let gold = labels(&["a", "b", "a"]);
        let r = score(&gold, &some_all(&["a", "b", "a"]), &set).unwrap();
        assert_eq!(r.weighted_f1, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.confusion, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(r.unparseable_count, 0);
    }

    #[test]
    fn hand_computed_oracle() {
        // gold [a,a,b,b], pred [a,b,b,b]:
        //   a: tp=1 fp=0 fn=1 -> P=1, R=1/2, F1=2/3
        //   b: tp=2 fp=1 fn=0 -> P=2/3, R=1, F1=4/5
        // weighted = macro = (2/3 + 4/5)/2 = 11/15
        let set = labels(&["a", "b"]);
        let gold = labels(&["a", "a", "b", "b"]);
        let r = score(&gold, &some_all(&["a", "b", "b", "b"]), &set).unwrap();
        assert!((r.per_class_f1["a"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.per_class_f1["b"] - 4.0 / 5.0).abs() < 1e-15);
        assert!((r.weighted_f1 - 11.0 / 15.0).abs() < 1e-15);
        assert!((r.macro_f1 - 11.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn unparseable_consumes_support() {
        let set = labels(&["a", "b"]);
        let gold = labels(&["a", "a", "b"]);
        let preds = vec![Some("a".to_string()), None, Some("b".to_string())];
        let r = score(&gold, &preds, &set).unwrap();
        assert_eq!(r.unparseable_count, 1);
        // a: tp=1, fn=1 -> R=1/2, P=1 -> F1=2/3
        assert!((r.per_class_f1["a"] - 2.0 / 3.0).abs() < 1e-15);
        // confusion row for a normalizes over the single parsed prediction
        assert_eq!(r.confusion[0], vec![1.0, 0.0]);
    }

    #[test]
    fn zero_support_rows_are_flagged() {
        let set = labels(&["a", "b", "c"]);
        let gold = labels(&["a", "b"]);
        let r = score(&gold, &some_all(&["a", "b"]), &set).unwrap();
        assert_eq!(r.empty_rows, vec!["c".to_string()]);
        assert!(r.confusion[2].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn errors() {
        let set = labels(&["a", "b"]);
        assert!(matches!(
            score(&labels(&["a"]), &some_all(&["a", "b"]), &set),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            score(&labels(&["z"]), &some_all(&["a"]), &set),
            Err(MetricsError::LabelOutsideSet(_))
        ));
        assert!(matches!(score(&[], &[], &set), Err(MetricsError::EmptyInput)));
    }

    #[test]
    fn diff_matches_direct_subtraction() {
        let set = labels(&["a", "b"]);
        let gold = labels(&["a", "a", "b", "b"]);
        let r1 = score(&gold, &some_all(&["a", "b", "b", "b"]), &set).unwrap();
        let r2 = score(&gold, &some_all(&["a", "a", "b", "b"]), &set).unwrap();
        let d = diff_reports(&r1, &r2).unwrap();
        assert!((d.weighted_f1 - (r2.weighted_f1 - r1.weighted_f1)).abs() < 1e-15);
        assert!((d.per_class["a"] - (1.0 - 2.0 / 3.0)).abs() < 1e-15);
        let zero = diff_reports(&r1, &r1).unwrap();
        assert!(zero.per_class.values().all(|&v| v == 0.0));
        assert_eq!(zero.weighted_f1, 0.0);
    }

    #[test]
    fn signed_percent_formatting() {
        assert_eq!(format_signed_percent(0.8023 - 0.8221), "-1.98%");
        assert_eq!(format_signed_percent(0.8221 - 0.8023), "+1.98%");
        assert_eq!(format_signed_percent(0.0), "+0.00%");
    }

    proptest! {
        #[test]
        fn permutation_invariance(seed in 0u64..1000) {
            use rand::rngs::SmallRng;
            use rand::seq::SliceRandom;
            use rand::{Rng, SeedableRng};
            let set = labels(&["a", "b", "c"]);
            let mut rng = SmallRng::seed_from_u64(seed);
            let mut pairs: Vec<(String, Option<String>)> = (0..50)
                .map(|_| {
                    let g = set[rng.gen_range(0..3)].clone();
                    let p = if rng.gen_bool(0.1) { None } else { Some(set[rng.gen_range(0..3)].clone()) };
                    (g, p)
                })
                .collect();
            let gold: Vec<String> = pairs.iter().map(|(g, _)| g.clone()).collect();
            let pred: Vec<Option<String>> = pairs.iter().map(|(_, p)| p.clone()).collect();
            let before = score(&gold, &pred, &set).unwrap();
            pairs.shuffle(&mut rng);
            let gold: Vec<String> = pairs.iter().map(|(g, _)| g.clone()).collect();
            let pred: Vec<Option<String>> = pairs.iter().map(|(_, p)| p.clone()).collect();
            let after = score(&gold, &pred, &set).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn weighted_f1_bounded_by_class_extremes(seed in 0u64..1000) {
            use rand::rngs::SmallRng;
            use rand::{Rng, SeedableRng};
            let set = labels(&["a", "b", "c"]);
            let mut rng = SmallRng::seed_from_u64(seed);
            let gold: Vec<String> = (0..60).map(|_| set[rng.gen_range(0..3)].clone()).collect();
            let pred: Vec<Option<String>> = (0..60).map(|_| Some(set[rng.gen_range(0..3)].clone())).collect();
            let r = score(&gold, &pred, &set).unwrap();
            // extremes over classes with support
            let supported: Vec<f64> = set.iter().filter(|l| r.support[*l] > 0).map(|l| r.per_class_f1[l]).collect();
            let lo = supported.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = supported.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(r.weighted_f1 >= lo - 1e-12 && r.weighted_f1 <= hi + 1e-12);
            // confusion rows with support sum to 1
            for (i, l) in set.iter().enumerate() {
                if !r.empty_rows.contains(l) {
                    let sum: f64 = r.confusion[i].iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
