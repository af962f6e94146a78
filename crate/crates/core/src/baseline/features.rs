//! Hashed character n-gram features.
//!
//! Every character n-gram (over Unicode scalar values, no padding) with
//! `n_min <= n <= n_max` is hashed with 64-bit FNV-1a over its UTF-8 bytes
//! and masked into `dim` buckets; bucket counts are then L2-normalized.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_extend(FNV_OFFSET, bytes)
}

fn fnv1a64_extend(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Sparse vector with strictly increasing indices below `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    dim: usize,
    entries: Vec<(u32, T)>,
}

impl<T: Real> FeatureVector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds from arbitrary (index, value) pairs, summing duplicates.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (u32, T)>) -> Result<Self> {
        let mut map: std::collections::BTreeMap<u32, T> = Default::default();
        for (i, v) in pairs {
            if i as usize >= dim {
                return Err(Error::ShapeMismatch(format!(
                    "index {i} outside dimension {dim}"
                )));
            }
            let slot = map.entry(i).or_insert_with(T::zero);
            *slot = *slot + v;
        }
        Ok(Self {
            dim,
            entries: map.into_iter().filter(|(_, v)| *v != T::zero()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|&(_, v)| v * v).sum::<T>().sqrt()
    }

    /// Dot product with row `row` of a row-major matrix of width `dim`.
    pub fn dot_row(&self, matrix: &[T], row: usize) -> T {
        let base = row * self.dim;
        self.entries.iter().fold(T::zero(), |acc, &(j, v)| {
            acc + matrix[base + j as usize] * v
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureHasher {
    dim: usize,
    n_min: usize,
    n_max: usize,
}

impl FeatureHasher {
    pub fn new(dim: usize, n_min: usize, n_max: usize) -> Result<Self> {
        if !dim.is_power_of_two() || dim > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "feature dimension must be a power of two, got {dim}"
            )));
        }
        if n_min < 1 || n_min > n_max {
            return Err(Error::InvalidArgument(format!(
                "n-gram range must satisfy 1 <= min <= max, got [{n_min}, {n_max}]"
            )));
        }
        Ok(Self { dim, n_min, n_max })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    /// Raw bucket counts, before normalization.
    pub fn counts(&self, text: &str) -> HashMap<u32, u32> {
        let mask = (self.dim - 1) as u64;
        let chars: Vec<char> = text.chars().collect();
        let mut counts = HashMap::new();
        let mut buf = [0u8; 4];
        for start in 0..chars.len() {
            let mut h = FNV_OFFSET;
            for (len, &c) in chars[start..].iter().take(self.n_max).enumerate() {
                h = fnv1a64_extend(h, c.encode_utf8(&mut buf).as_bytes());
                if len + 1 >= self.n_min {
                    *counts.entry((h & mask) as u32).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    pub fn featurize<T: Real>(&self, text: &str) -> FeatureVector<T> {
        let mut entries: Vec<(u32, T)> = self
            .counts(text)
            .into_iter()
            .map(|(i, c)| (i, T::from_u32(c).unwrap()))
            .collect();
        entries.sort_unstable_by_key(|&(i, _)| i);
        let mut v = FeatureVector {
            dim: self.dim,
            entries,
        };
        let norm = v.norm();
        if norm > T::zero() {
            for e in &mut v.entries {
                e.1 = e.1 / norm;
            }
        }
        v
    }
}

pub fn featurize<T: Real>(
    text: &str,
    dim: usize,
    n_range: (usize, usize),
) -> Result<FeatureVector<T>> {
    Ok(FeatureHasher::new(dim, n_range.0, n_range.1)?.featurize(text))
}
