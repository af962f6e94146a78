#![allow(dead_code)]

pub mod gradcheck;
pub mod scoring;
pub mod separable;

use std::collections::BTreeSet;

use proptest::prelude::*;
use propvote::corpus::Example;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn label_name(i: usize) -> String {
    format!("L{i}")
}

/// Random subset of `L0..L{n-1}`.
pub fn label_subset(n: usize) -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::vec(any::<bool>(), n).prop_map(|bits| {
        bits.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| label_name(i))
            .collect()
    })
}

/// Labeled dataset whose label popularity follows a Zipf-like law, with at
/// least `min_ratio` between the most and least frequent present label.
pub fn skewed_dataset(seed: u64, min_ratio: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_labels = rng.gen_range(3..=8);
        let s: f64 = rng.gen_range(1.0..2.5);
        let weights: Vec<f64> = (0..n_labels)
            .map(|i| 1.0 / ((i + 1) as f64).powf(s))
            .collect();
        let total: f64 = weights.iter().sum();
        let n = rng.gen_range(30..200);
        let mut ds = Vec::with_capacity(n);
        for i in 0..n {
            let k = [1, 1, 1, 2, 2, 3][rng.gen_range(0..6)];
            let mut labels = BTreeSet::new();
            for _ in 0..k {
                let mut x = rng.gen::<f64>() * total;
                let mut j = 0;
                while j + 1 < n_labels && x > weights[j] {
                    x -= weights[j];
                    j += 1;
                }
                labels.insert(label_name(j));
            }
            ds.push(Example {
                id: format!("e{i}"),
                text: format!("text {i}"),
                labels,
            });
        }
        let counts = propvote::corpus::label_counts(&ds);
        let max = *counts.values().max().unwrap() as u64;
        let min = *counts.values().min().unwrap() as u64;
        if max >= min_ratio * min {
            return ds;
        }
    }
}
