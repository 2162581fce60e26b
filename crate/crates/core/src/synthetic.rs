//! Multi-writer feature datasets with planted informative, duplicated and
//! pure-noise dimensions.
//!
//! Each writer has a center in the informative subspace. Genuine signatures
//! scatter around it with `writer_spread`; skilled forgeries are shifted by
//! `forgery_offset * writer_spread` along a writer-specific unit direction
//! and scatter the same way. Duplicated dimensions copy an informative
//! source exactly, noise dimensions are i.i.d. `N(0, noise_spread^2)` per
//! signature.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{
    DatasetManifest, EvalSplit, FeatureVector, SignatureRecord, WriterId, WriterSet,
};
use crate::error::{Error, Result};
use crate::seeding::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub n_writers: usize,
    pub genuine_per_writer: usize,
    pub skilled_per_writer: usize,
    pub dim: usize,
    pub d_informative: usize,
    /// Within-writer standard deviation.
    pub writer_spread: f64,
    /// Standard deviation of writer centers.
    pub center_spread: f64,
    pub noise_spread: f64,
    /// Skilled-forgery shift, in units of `writer_spread`.
    pub forgery_offset: f64,
    /// Informative dimensions a writer's forgery shift touches, chosen per
    /// writer; 0 spreads the shift over all informative dimensions.
    pub forgery_support: usize,
    /// Redundant dimensions that duplicate an informative one; the remaining
    /// redundant dimensions are pure noise.
    pub duplicate_dims: usize,
    /// Seeds the placement of informative and duplicated dimensions, so that
    /// datasets sharing it share a layout.
    pub layout_seed: u64,
    pub seed: u64,
    pub writer_id_offset: WriterId,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n_writers: 70,
            genuine_per_writer: 24,
            skilled_per_writer: 10,
            dim: 64,
            d_informative: 16,
            writer_spread: 4.0,
            center_spread: 8.0,
            noise_spread: 8.0,
            forgery_offset: 5.0,
            forgery_support: 8,
            duplicate_dims: 8,
            layout_seed: 2048,
            seed: 1,
            writer_id_offset: 1,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("generator spec: {m}")));
        if self.n_writers == 0 || self.genuine_per_writer == 0 {
            return fail("needs at least one writer with one genuine signature");
        }
        if self.d_informative == 0 || self.d_informative >= self.dim {
            return fail("d_informative must be in [1, dim)");
        }
        if self.forgery_support > self.d_informative {
            return fail("forgery_support exceeds d_informative");
        }
        if self.duplicate_dims > self.dim - self.d_informative {
            return fail("more duplicate dimensions than redundant ones");
        }
        for (name, v) in [
            ("writer_spread", self.writer_spread),
            ("center_spread", self.center_spread),
            ("noise_spread", self.noise_spread),
            ("forgery_offset", self.forgery_offset),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "generator spec: {name} must be finite and nonnegative"
                )));
            }
        }
        if (self.writer_id_offset as u64) + (self.n_writers as u64) > WriterId::MAX as u64 {
            return fail("writer ids overflow");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Ground-truth role of every dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub informative: Vec<usize>,
    /// Duplicated dimension -> its informative source.
    pub duplicates: BTreeMap<usize, usize>,
    pub noise: Vec<usize>,
}

pub fn layout(spec: &GeneratorSpec) -> Result<FeatureLayout> {
    spec.validate()?;
    let mut dims: Vec<usize> = (0..spec.dim).collect();
    dims.shuffle(&mut stream_rng(spec.layout_seed, 0x1A_7007));
    let mut informative = dims[..spec.d_informative].to_vec();
    informative.sort_unstable();
    let redundant = &dims[spec.d_informative..];
    let duplicates = redundant[..spec.duplicate_dims]
        .iter()
        .enumerate()
        .map(|(k, &d)| (d, informative[k % informative.len()]))
        .collect();
    let mut noise = redundant[spec.duplicate_dims..].to_vec();
    noise.sort_unstable();
    Ok(FeatureLayout {
        informative,
        duplicates,
        noise,
    })
}

/// Uniform unit vector on `support` random coordinates of `n`
/// (all of them when `support` is 0).
fn unit_direction(rng: &mut impl rand::Rng, n: usize, support: usize) -> Vec<f64> {
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let support = if support == 0 { n } else { support };
    loop {
        let mut v = vec![0.0; n];
        for i in rand::seq::index::sample(rng, n, support) {
            v[i] = std.sample(rng);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<WriterSet> {
    let layout = layout(spec)?;
    let normal = |s: f64| Normal::new(0.0, s).map_err(|e| Error::Config(e.to_string()));
    let center_dist = normal(spec.center_spread)?;
    let within = normal(spec.writer_spread)?;
    let noise = normal(spec.noise_spread)?;

    let mut writers = BTreeMap::new();
    for w in 0..spec.n_writers {
        let id = spec.writer_id_offset + w as WriterId;
        let mut rng = stream_rng(spec.seed, w as u64);
        let center: Vec<f64> = layout
            .informative
            .iter()
            .map(|_| center_dist.sample(&mut rng))
            .collect();
        let shift: Vec<f64> = unit_direction(&mut rng, center.len(), spec.forgery_support)
            .into_iter()
            .map(|x| x * spec.forgery_offset * spec.writer_spread)
            .collect();

        let mut draw = |offset: Option<&[f64]>| -> Result<FeatureVector> {
            let mut x = vec![0.0; spec.dim];
            for (k, &d) in layout.informative.iter().enumerate() {
                x[d] = center[k] + offset.map_or(0.0, |o| o[k]) + within.sample(&mut rng);
            }
            for (&d, &src) in &layout.duplicates {
                x[d] = x[src];
            }
            for &d in &layout.noise {
                x[d] = noise.sample(&mut rng);
            }
            FeatureVector::new(x)
        };

        let mut records = Vec::with_capacity(spec.genuine_per_writer + spec.skilled_per_writer);
        for _ in 0..spec.genuine_per_writer {
            records.push(SignatureRecord::genuine(id, draw(None)?));
        }
        for _ in 0..spec.skilled_per_writer {
            records.push(SignatureRecord::skilled(id, draw(Some(&shift))?));
        }
        writers.insert(id, records);
    }
    WriterSet::new(writers)
}

/// Sizes of the five writer partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub optimization: usize,
    pub selection: usize,
    pub exploitation: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.validation + self.optimization + self.selection + self.exploitation
    }
}

/// Seeded partition of the writers; the shuffled id list is cut into
/// consecutive runs in the order train, validation, optimization,
/// selection, exploitation.
pub fn split(ws: &WriterSet, counts: SplitCounts, seed: u64) -> Result<EvalSplit> {
    if counts.total() > ws.len() {
        return Err(Error::Config(format!(
            "split needs {} writers, dataset has {}",
            counts.total(),
            ws.len()
        )));
    }
    let mut ids: Vec<WriterId> = ws.writer_ids().collect();
    ids.shuffle(&mut stream_rng(seed, 0x5_9117));
    let mut rest = ids.as_slice();
    let mut take = |n: usize| -> Result<WriterSet> {
        let (head, tail) = rest.split_at(n);
        rest = tail;
        ws.subset(&head.iter().copied().collect::<BTreeSet<_>>())
    };
    EvalSplit::new(
        take(counts.train)?,
        take(counts.validation)?,
        take(counts.optimization)?,
        take(counts.selection)?,
        take(counts.exploitation)?,
    )
}

/// Source and target datasets sharing the dimension layout. When the writer
/// id ranges would overlap, the target is moved right after the source.
pub fn generate_transfer_pair(
    a: &GeneratorSpec,
    b: &GeneratorSpec,
) -> Result<(WriterSet, WriterSet)> {
    if a.dim != b.dim {
        return Err(Error::Dimension {
            expected: a.dim,
            got: b.dim,
        });
    }
    if layout(a)? != layout(b)? {
        return Err(Error::Config(
            "transfer specs must share the informative dimension layout".into(),
        ));
    }
    let mut b = b.clone();
    let a_end = a.writer_id_offset as u64 + a.n_writers as u64;
    let b_end = b.writer_id_offset as u64 + b.n_writers as u64;
    if (b.writer_id_offset as u64) < a_end && (a.writer_id_offset as u64) < b_end {
        b.writer_id_offset = a_end as WriterId;
    }
    Ok((generate(a)?, generate(&b)?))
}

/// `manifest.json` of a generated dataset: the dataset description plus
/// the spec and its ground-truth layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticManifest {
    #[serde(flatten)]
    pub dataset: DatasetManifest,
    pub spec: GeneratorSpec,
    pub layout: FeatureLayout,
}

/// Writes `dataset.csv` and `manifest.json` into `dir`.
pub fn write_dataset(spec: &GeneratorSpec, dir: &Path) -> Result<WriterSet> {
    let ws = generate(spec)?;
    std::fs::create_dir_all(dir)?;
    ws.save_csv(&dir.join("dataset.csv"))?;
    let manifest = SyntheticManifest {
        dataset: DatasetManifest::describe(&ws, spec.seed),
        spec: spec.clone(),
        layout: layout(spec)?,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(ws)
}
