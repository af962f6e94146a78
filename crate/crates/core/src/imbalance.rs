//! Oversampling by duplication of examples whose labels are all rarer than
//! average.
//!
//! The average is the mean per-label occurrence count over labels that occur
//! at least once. An example is eligible iff every one of its labels occurs
//! fewer times than that average; its copy count is
//! `min(clip, round(average / c_min))` with `c_min` the count of its rarest
//! label and rounding half away from zero. Ineligible examples keep a single
//! copy, so labels at or above the average are never inflated.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::{label_counts, Example};
use crate::error::{Error, Result};

pub const DEFAULT_CLIP: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OversamplePlan {
    pub per_example_copies: BTreeMap<String, u64>,
    pub label_counts_before: BTreeMap<String, u64>,
    pub label_counts_after: BTreeMap<String, u64>,
    /// Exact mean, serialized as `[numerator, denominator]`.
    pub average_count: Ratio<u64>,
    pub clip: u64,
}

impl OversamplePlan {
    /// A plan that keeps every example exactly once.
    pub fn identity(dataset: &[Example], clip: u64) -> Self {
        let counts = counts_u64(dataset);
        Self {
            per_example_copies: dataset.iter().map(|e| (e.id.clone(), 1)).collect(),
            label_counts_after: counts.clone(),
            average_count: average_of(&counts),
            label_counts_before: counts,
            clip,
        }
    }

    pub fn copies(&self, id: &str) -> Option<u64> {
        self.per_example_copies.get(id).copied()
    }

    pub fn total_examples(&self) -> u64 {
        self.per_example_copies.values().sum()
    }
}

fn counts_u64(dataset: &[Example]) -> BTreeMap<String, u64> {
    label_counts(dataset)
        .into_iter()
        .map(|(l, c)| (l, c as u64))
        .collect()
}

fn average_of(counts: &BTreeMap<String, u64>) -> Ratio<u64> {
    let present: Vec<u64> = counts.values().copied().filter(|&c| c > 0).collect();
    if present.is_empty() {
        return Ratio::from_integer(0);
    }
    Ratio::new(present.iter().sum(), present.len() as u64)
}

pub fn plan_oversample(dataset: &[Example], clip: u64) -> Result<OversamplePlan> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("cannot plan oversampling".into()));
    }
    if clip < 1 {
        return Err(Error::InvalidArgument(format!(
            "clip must be >= 1, got {clip}"
        )));
    }
    let before = counts_u64(dataset);
    let average = average_of(&before);

    let mut copies = BTreeMap::new();
    for ex in dataset {
        let label_counts: Vec<u64> = ex.labels.iter().map(|l| before[l]).collect();
        let eligible = !label_counts.is_empty()
            && label_counts
                .iter()
                .all(|&c| Ratio::from_integer(c) < average);
        let n = if eligible {
            let c_min = *label_counts.iter().min().expect("non-empty");
            // Ratio::round rounds half away from zero
            let factor = (average / c_min).round().to_integer();
            factor.clamp(1, clip)
        } else {
            1
        };
        copies.insert(ex.id.clone(), n);
    }

    let mut after: BTreeMap<String, u64> = before.keys().map(|l| (l.clone(), 0)).collect();
    for ex in dataset {
        let n = copies[&ex.id];
        for l in &ex.labels {
            *after.get_mut(l).expect("label counted") += n;
        }
    }

    Ok(OversamplePlan {
        per_example_copies: copies,
        label_counts_before: before,
        label_counts_after: after,
        average_count: average,
        clip,
    })
}

/// Expands the dataset according to `plan`. Copies follow their original
/// directly and get ids `<id>#dup1`, `<id>#dup2`, ... Examples absent from
/// the plan are kept once.
pub fn materialize(dataset: &[Example], plan: &OversamplePlan) -> Result<Vec<Example>> {
    let known: HashMap<&str, ()> = dataset.iter().map(|e| (e.id.as_str(), ())).collect();
    if let Some(id) = plan
        .per_example_copies
        .keys()
        .find(|id| !known.contains_key(id.as_str()))
    {
        return Err(Error::UnknownPlanId(id.clone()));
    }
    let mut out = Vec::with_capacity(plan.total_examples() as usize);
    for ex in dataset {
        let n = plan.copies(&ex.id).unwrap_or(1);
        out.push(ex.clone());
        for k in 1..n {
            out.push(Example {
                id: format!("{}#dup{k}", ex.id),
                ..ex.clone()
            });
        }
    }
    Ok(out)
}

/// max/min occurrence ratio over labels that occur at all.
pub fn imbalance_ratio(counts: &BTreeMap<String, u64>) -> Option<Ratio<u64>> {
    let present = counts.values().copied().filter(|&c| c > 0);
    let (min, max) = present.fold(None, |acc: Option<(u64, u64)>, c| match acc {
        None => Some((c, c)),
        Some((lo, hi)) => Some((lo.min(c), hi.max(c))),
    })?;
    Some(Ratio::new(max, min))
}
