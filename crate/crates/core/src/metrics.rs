//! Multi-label micro/macro F1.
//!
//! Counts are pooled over every (example, label) cell. Zero-denominator
//! conventions: a 0/0 precision or recall is 0, and a label set with no
//! positives at all on either side (TP = FP = FN = 0) scores F1 = 1.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabelVocabulary, Labeled};
use crate::error::{Error, Result};
use crate::prediction::check_same_ids;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl LabelConfusion {
    pub fn is_vacuous(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }

    pub fn precision<T: Real>(&self) -> T {
        ratio_or_zero(self.tp, self.tp + self.fp)
    }

    pub fn recall<T: Real>(&self) -> T {
        ratio_or_zero(self.tp, self.tp + self.fn_)
    }

    pub fn f1<T: Real>(&self) -> T {
        if self.is_vacuous() {
            return T::one();
        }
        let p: T = self.precision();
        let r: T = self.recall();
        if p + r == T::zero() {
            T::zero()
        } else {
            T::lit(2.0) * p * r / (p + r)
        }
    }

    /// `2TP / (2TP + FP + FN)`, exactly.
    pub fn f1_exact(&self) -> Ratio<u64> {
        if self.is_vacuous() {
            return Ratio::from_integer(1);
        }
        Ratio::new(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

fn ratio_or_zero<T: Real>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_u64(num).unwrap() / T::from_u64(den).unwrap()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub per_label: BTreeMap<String, LabelConfusion>,
    pub total: LabelConfusion,
}

impl ConfusionCounts {
    fn bump(&mut self, label: &str, f: impl Fn(&mut LabelConfusion)) {
        f(self.per_label.entry(label.to_string()).or_default());
        f(&mut self.total);
    }
}

/// Accumulates per-label tp/fp/fn. Both sides must cover the same ids. With
/// a vocabulary every label must belong to it, and every vocabulary label
/// gets an entry (possibly all zero).
pub fn confusion<G: Labeled, P: Labeled>(
    gold: &[G],
    pred: &[P],
    vocab: Option<&LabelVocabulary>,
) -> Result<ConfusionCounts> {
    check_same_ids(gold, pred)?;
    let mut counts = ConfusionCounts::default();
    if let Some(vocab) = vocab {
        for l in vocab.labels() {
            counts
                .per_label
                .insert(l.clone(), LabelConfusion::default());
        }
    }
    let by_id: HashMap<&str, &P> = pred.iter().map(|p| (p.id(), p)).collect();
    for g in gold {
        let g_set = g.label_set();
        let p_set = by_id[g.id()].label_set();
        if let Some(vocab) = vocab {
            if let Some(bad) = g_set.iter().chain(p_set).find(|l| !vocab.contains(l)) {
                return Err(Error::UnknownLabel {
                    label: bad.clone(),
                    line: None,
                });
            }
        }
        for l in p_set.intersection(g_set) {
            counts.bump(l, |c| c.tp += 1);
        }
        for l in p_set.difference(g_set) {
            counts.bump(l, |c| c.fp += 1);
        }
        for l in g_set.difference(p_set) {
            counts.bump(l, |c| c.fn_ += 1);
        }
    }
    Ok(counts)
}

pub fn micro_f1<T: Real>(c: &ConfusionCounts) -> T {
    c.total.f1()
}

pub fn micro_f1_exact(c: &ConfusionCounts) -> Ratio<u64> {
    c.total.f1_exact()
}

/// Unweighted mean of per-label F1 over labels with any tp, fp or fn; 1 when
/// there are none.
pub fn macro_f1<T: Real>(c: &ConfusionCounts) -> T {
    let scores: Vec<T> = c
        .per_label
        .values()
        .filter(|l| !l.is_vacuous())
        .map(LabelConfusion::f1)
        .collect();
    if scores.is_empty() {
        return T::one();
    }
    let n = T::from_count(scores.len());
    scores.into_iter().sum::<T>() / n
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Report percentages with three decimals instead of fractions with six.
    pub percent: bool,
    pub per_label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_label: Option<BTreeMap<String, LabelScore>>,
}

impl ScoreReport {
    pub fn new(c: &ConfusionCounts, opts: ReportOptions) -> Self {
        let fmt = |v: f64| {
            if opts.percent {
                (v * 100_000.0).round() / 1000.0
            } else {
                (v * 1e6).round() / 1e6
            }
        };
        let per_label = opts.per_label.then(|| {
            c.per_label
                .iter()
                .map(|(l, lc)| {
                    let s = LabelScore {
                        tp: lc.tp,
                        fp: lc.fp,
                        fn_: lc.fn_,
                        p: fmt(lc.precision()),
                        r: fmt(lc.recall()),
                        f1: fmt(lc.f1()),
                    };
                    (l.clone(), s)
                })
                .collect()
        });
        Self {
            micro_f1: fmt(micro_f1(c)),
            macro_f1: fmt(macro_f1(c)),
            tp: c.total.tp,
            fp: c.total.fp,
            fn_: c.total.fn_,
            per_label,
        }
    }
}
