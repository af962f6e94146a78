//! Multi-label hard voting over K prediction sets.
//!
//! Each model casts one vote per (example, label) it predicts. A label is
//! emitted for an example iff its vote count reaches the threshold, by
//! default a strict majority `floor(K/2) + 1`. Scores are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::LabelVocabulary;
use crate::error::{Error, Result};
use crate::prediction::{check_same_ids, PredictionRecord, PredictionSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    #[default]
    None,
    /// Where the majority set is empty, emit every label tied at the highest
    /// (nonzero) vote count.
    TopPlurality,
}

impl std::str::FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Fallback::None),
            "top-plurality" => Ok(Fallback::TopPlurality),
            other => Err(Error::InvalidArgument(format!(
                "unknown fallback `{other}`"
            ))),
        }
    }
}

pub fn majority_threshold(k: usize) -> usize {
    k / 2 + 1
}

/// Per-example vote counts, in the id order of the first input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub k: usize,
    pub votes: Vec<(String, BTreeMap<String, usize>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    pub predictions: PredictionSet,
    pub tally: VoteTally,
    pub threshold_votes: usize,
    /// Examples for which no label reached the threshold (before any fallback).
    pub empty_outputs: usize,
}

/// Label set implied by a file's score maps, if every record carries one.
fn implied_vocabulary(preds: &[PredictionRecord]) -> Option<BTreeSet<&str>> {
    let mut out = BTreeSet::new();
    for p in preds {
        out.extend(p.scores.as_ref()?.keys().map(String::as_str));
    }
    (!preds.is_empty()).then_some(out)
}

pub fn tally(inputs: &[PredictionSet], vocab: Option<&LabelVocabulary>) -> Result<VoteTally> {
    let Some(first) = inputs.first() else {
        return Err(Error::InvalidArgument(
            "voting needs at least one prediction set".into(),
        ));
    };
    for other in &inputs[1..] {
        check_same_ids(first, other)?;
    }

    let mut implied: Option<BTreeSet<&str>> = None;
    for set in inputs {
        let Some(v) = implied_vocabulary(set) else {
            continue;
        };
        match &implied {
            None => implied = Some(v),
            Some(prev) if *prev != v => {
                return Err(Error::VocabularyMismatch {
                    expected: prev.iter().copied().collect::<Vec<_>>().join(","),
                    found: v.into_iter().collect::<Vec<_>>().join(","),
                })
            }
            _ => {}
        }
    }
    if let Some(vocab) = vocab {
        for rec in inputs.iter().flatten() {
            if let Some(bad) = rec.labels.iter().find(|l| !vocab.contains(l)) {
                return Err(Error::UnknownLabel {
                    label: bad.clone(),
                    line: None,
                });
            }
        }
    }

    let mut votes: Vec<(String, BTreeMap<String, usize>)> = first
        .iter()
        .map(|r| (r.id.clone(), BTreeMap::new()))
        .collect();
    let slot: HashMap<&str, usize> = first
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    for set in inputs {
        for rec in set {
            let counts = &mut votes[slot[rec.id.as_str()]].1;
            for l in &rec.labels {
                *counts.entry(l.clone()).or_default() += 1;
            }
        }
    }
    Ok(VoteTally {
        k: inputs.len(),
        votes,
    })
}

pub fn vote(
    inputs: &[PredictionSet],
    threshold_votes: Option<usize>,
    vocab: Option<&LabelVocabulary>,
) -> Result<VoteOutcome> {
    vote_with_fallback(inputs, threshold_votes, Fallback::None, vocab)
}

pub fn vote_with_fallback(
    inputs: &[PredictionSet],
    threshold_votes: Option<usize>,
    fallback: Fallback,
    vocab: Option<&LabelVocabulary>,
) -> Result<VoteOutcome> {
    let tally = tally(inputs, vocab)?;
    let threshold = threshold_votes.unwrap_or_else(|| majority_threshold(tally.k));
    if threshold == 0 || threshold > tally.k {
        return Err(Error::InvalidArgument(format!(
            "threshold_votes must be in 1..={}, got {threshold}",
            tally.k
        )));
    }

    let mut empty_outputs = 0;
    let predictions = tally
        .votes
        .iter()
        .map(|(id, counts)| {
            let mut labels: BTreeSet<String> = counts
                .iter()
                .filter(|(_, &n)| n >= threshold)
                .map(|(l, _)| l.clone())
                .collect();
            if labels.is_empty() {
                empty_outputs += 1;
                if fallback == Fallback::TopPlurality {
                    let top = counts.values().copied().max().unwrap_or(0);
                    if top > 0 {
                        labels = counts
                            .iter()
                            .filter(|(_, &n)| n == top)
                            .map(|(l, _)| l.clone())
                            .collect();
                    }
                }
            }
            PredictionRecord {
                id: id.clone(),
                labels,
                scores: None,
            }
        })
        .collect();

    Ok(VoteOutcome {
        predictions,
        tally,
        threshold_votes: threshold,
        empty_outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[(&str, &[&str])]) -> PredictionSet {
        items
            .iter()
            .map(|(id, ls)| PredictionRecord::new(*id, ls.iter().copied()))
            .collect()
    }

    fn five_models() -> Vec<PredictionSet> {
        // L1: 5 votes, L2: 3, L3: 2
        vec![
            set(&[("e", &["L1", "L2", "L3"])]),
            set(&[("e", &["L1", "L2", "L3"])]),
            set(&[("e", &["L1", "L2"])]),
            set(&[("e", &["L1"])]),
            set(&[("e", &["L1"])]),
        ]
    }

    #[test]
    fn strict_majority_of_five() {
        assert_eq!(majority_threshold(5), 3);
        let out = vote(&five_models(), None, None).unwrap();
        assert_eq!(out.threshold_votes, 3);
        assert_eq!(
            out.predictions[0].labels,
            BTreeSet::from(["L1".into(), "L2".into()])
        );
        assert_eq!(out.tally.votes[0].1["L3"], 2);
    }

    #[test]
    fn unanimity() {
        let one = set(&[("a", &["X", "Y"]), ("b", &[])]);
        let out = vote(&vec![one.clone(); 3], None, None).unwrap();
        assert_eq!(out.predictions, one);
    }

    #[test]
    fn no_majority_gives_empty_set() {
        let inputs = vec![
            set(&[("e", &["L1", "L3"])]),
            set(&[("e", &["L2", "L3"])]),
            set(&[("e", &["L1"])]),
            set(&[("e", &["L2"])]),
            set(&[("e", &[])]),
        ];
        let out = vote(&inputs, None, None).unwrap();
        assert!(out.predictions[0].labels.is_empty());
        assert_eq!(out.empty_outputs, 1);
    }

    #[test]
    fn top_plurality_fallback() {
        let inputs = vec![
            set(&[("e", &["L3"])]),
            set(&[("e", &["L3", "L1"])]),
            set(&[("e", &["L2"])]),
            set(&[("e", &[])]),
            set(&[("e", &[])]),
        ];
        let out = vote_with_fallback(&inputs, None, Fallback::TopPlurality, None).unwrap();
        assert_eq!(out.predictions[0].labels, BTreeSet::from(["L3".into()]));

        let majority =
            vote_with_fallback(&five_models(), None, Fallback::TopPlurality, None).unwrap();
        assert_eq!(
            majority.predictions,
            vote(&five_models(), None, None).unwrap().predictions
        );

        let silent = vec![set(&[("e", &[])]); 3];
        let out = vote_with_fallback(&silent, None, Fallback::TopPlurality, None).unwrap();
        assert!(out.predictions[0].labels.is_empty());
    }

    #[test]
    fn even_k_excludes_ties() {
        let inputs = vec![set(&[("e", &["A"])]), set(&[("e", &["B"])])];
        let out = vote(&inputs, None, None).unwrap();
        assert_eq!(out.threshold_votes, 2);
        assert!(out.predictions[0].labels.is_empty());
    }

    #[test]
    fn mismatched_ids_and_vocabularies() {
        let a = set(&[("1", &["A"]), ("2", &[])]);
        let b = set(&[("1", &["A"]), ("3", &[])]);
        match vote(&[a.clone(), b], None, None) {
            Err(Error::IdMismatch { missing, extra }) => {
                assert_eq!(missing, ["2"]);
                assert_eq!(extra, ["3"]);
            }
            other => panic!("{other:?}"),
        }

        let mut x = set(&[("1", &["A"])]);
        x[0].scores = Some(BTreeMap::from([("A".into(), 0.9), ("B".into(), 0.1)]));
        let mut y = set(&[("1", &["A"])]);
        y[0].scores = Some(BTreeMap::from([("A".into(), 0.9), ("C".into(), 0.1)]));
        assert!(matches!(
            vote(&[x, y], None, None),
            Err(Error::VocabularyMismatch { .. })
        ));

        let vocab = LabelVocabulary::new(["A"]).unwrap();
        assert!(matches!(
            vote(&[set(&[("1", &["Q"])])], None, Some(&vocab)),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn bad_arguments() {
        assert!(vote(&[], None, None).is_err());
        assert!(vote(&five_models(), Some(0), None).is_err());
        assert!(vote(&five_models(), Some(6), None).is_err());
    }
}
