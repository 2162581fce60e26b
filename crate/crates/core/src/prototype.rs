//! Condensed nearest neighbours (Hart) reduction of the dissimilarity-space
//! training set.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::dichotomy::{DissimilaritySample, PairLabel};
use crate::error::{Error, Result};
use crate::seeding::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    pub samples: Vec<DissimilaritySample>,
    /// Index of each kept sample in the condensed input, ascending.
    pub origin_indices: Vec<usize>,
}

impl PrototypeSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Wraps a sample list without reduction.
    pub fn full(samples: Vec<DissimilaritySample>) -> Self {
        let origin_indices = (0..samples.len()).collect();
        Self {
            samples,
            origin_indices,
        }
    }

    /// Label of the nearest kept sample; ties go to the lower origin index.
    pub fn nearest_label(&self, u: &[f64]) -> PairLabel {
        let mut best = (f64::INFINITY, 0usize);
        for (k, s) in self.samples.iter().enumerate() {
            let d = sq_dist(&s.u, u);
            if d < best.0 {
                best = (d, k);
            }
        }
        self.samples[best.1].label
    }

    /// `prototypes.json`.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Dump<'a> {
            kept: usize,
            origin_indices: &'a [usize],
        }
        serde_json::to_writer_pretty(
            out,
            &Dump {
                kept: self.len(),
                origin_indices: &self.origin_indices,
            },
        )?;
        Ok(())
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Hart's CNN: start from the first sample of each class in seeded visiting
/// order, sweep the data adding every sample the current set misclassifies
/// under 1-NN, and stop after a sweep that adds nothing.
///
/// Each sample remembers its nearest prototype and how many prototypes it has
/// been compared with, so a sweep only scans prototypes added since the last
/// visit. The kept set only grows, which makes this exact.
pub fn condense(train: &[DissimilaritySample], seed: u64) -> Result<PrototypeSet> {
    if train.is_empty() {
        return Err(Error::Data("cannot condense an empty training set".into()));
    }
    let dim = train[0].u.len();
    if let Some(s) = train.iter().find(|s| s.u.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: s.u.len(),
        });
    }

    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut stream_rng(seed, 0xC0DE));

    // kept[k] is an index into `train`, in insertion order
    let mut kept: Vec<usize> = Vec::new();
    let mut in_set = vec![false; train.len()];
    for label in [PairLabel::WithinPositive, PairLabel::BetweenNegative] {
        if let Some(&i) = order.iter().find(|&&i| train[i].label == label) {
            kept.push(i);
            in_set[i] = true;
        }
    }

    let mut nearest: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); train.len()];
    let mut scanned = vec![0usize; train.len()];

    loop {
        let mut added = false;
        for &i in &order {
            if in_set[i] {
                continue;
            }
            let (mut best_d, mut best_i) = nearest[i];
            for &p in &kept[scanned[i]..] {
                let d = sq_dist(&train[p].u, &train[i].u);
                if d < best_d || (d == best_d && p < best_i) {
                    best_d = d;
                    best_i = p;
                }
            }
            scanned[i] = kept.len();
            nearest[i] = (best_d, best_i);
            if train[best_i].label != train[i].label {
                kept.push(i);
                in_set[i] = true;
                added = true;
            }
        }
        if !added {
            break;
        }
    }

    kept.sort_unstable();
    Ok(PrototypeSet {
        samples: kept.iter().map(|&i| train[i].clone()).collect(),
        origin_indices: kept,
    })
}
