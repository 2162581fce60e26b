//! Value types shared by the whole pipeline: feature vectors, feature masks,
//! signature records, writer sets and development/exploitation splits.
//!
//! Datasets are stored as a columnar CSV (`writer_id,kind,f0..f{D-1}`) with a
//! JSON manifest alongside it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type WriterId = u32;

/// One signature in representation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Rejects non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature at index {i}")));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Binary selection over feature dimensions. A set bit means the feature is
/// kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureMask {
    bits: Vec<bool>,
    count: usize,
}

impl FeatureMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let count = bits.iter().filter(|&&b| b).count();
        Self { bits, count }
    }

    pub fn ones(dim: usize) -> Self {
        Self {
            bits: vec![true; dim],
            count: dim,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            bits: vec![false; dim],
            count: 0,
        }
    }

    /// Mask with exactly the given indices set.
    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; dim];
        for &i in indices {
            if i >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: i + 1,
                });
            }
            bits[i] = true;
        }
        Ok(Self::from_bits(bits))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of selected features.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.bits[i] != value {
            self.bits[i] = value;
            if value {
                self.count += 1;
            } else {
                self.count -= 1;
            }
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = !self.bits[i];
        self.set(i, v);
    }

    /// Selected indices in ascending order.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn hamming(&self, other: &FeatureMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Checks the mask is usable for training on `dim`-dimensional data.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: self.len(),
            });
        }
        if self.count == 0 {
            return Err(Error::InvalidMask("no feature selected".into()));
        }
        Ok(())
    }

    /// Hex bitstring: character `k` holds bits `4k..4k+3`, bit `4k` being the
    /// most significant bit of the nibble. The last nibble is zero-padded.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|chunk| {
                let nibble = chunk
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (k, &b)| acc | ((b as u32) << (3 - k)));
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(hex: &str, dim: usize) -> Result<Self> {
        let expected_len = dim.div_ceil(4);
        if hex.len() != expected_len {
            return Err(Error::InvalidMask(format!(
                "hex mask has {} digits, expected {expected_len} for dimension {dim}",
                hex.len()
            )));
        }
        let mut bits = Vec::with_capacity(dim);
        for c in hex.chars() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::InvalidMask(format!("invalid hex digit {c:?}")))?;
            for k in 0..4 {
                bits.push(nibble & (1 << (3 - k)) != 0);
            }
        }
        if bits[dim..].iter().any(|&b| b) {
            return Err(Error::InvalidMask("padding bits set".into()));
        }
        bits.truncate(dim);
        Ok(Self::from_bits(bits))
    }
}

/// Keeps the entries of `v` at set positions of `m`, in ascending index order.
pub fn apply_mask(v: &FeatureVector, m: &FeatureMask) -> Result<FeatureVector> {
    Ok(FeatureVector(mask_slice(v.as_slice(), m)?))
}

pub(crate) fn mask_slice(v: &[f64], m: &FeatureMask) -> Result<Vec<f64>> {
    m.validate(v.len())?;
    Ok(v.iter()
        .zip(m.bits())
        .filter_map(|(&x, &keep)| keep.then_some(x))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureKind {
    Genuine,
    SkilledForgery,
}

impl fmt::Display for SignatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureKind::Genuine => f.write_str("genuine"),
            SignatureKind::SkilledForgery => f.write_str("skilled"),
        }
    }
}

impl FromStr for SignatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genuine" => Ok(SignatureKind::Genuine),
            "skilled" => Ok(SignatureKind::SkilledForgery),
            other => Err(Error::Data(format!("unknown signature kind {other:?}"))),
        }
    }
}

/// A stored signature. Skilled forgeries carry the id of the writer they
/// imitate; random forgeries are not stored, they are other writers'
/// genuine records picked at pairing time.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureRecord {
    pub writer_id: WriterId,
    pub kind: SignatureKind,
    pub features: FeatureVector,
}

impl SignatureRecord {
    pub fn genuine(writer_id: WriterId, features: FeatureVector) -> Self {
        Self {
            writer_id,
            kind: SignatureKind::Genuine,
            features,
        }
    }

    pub fn skilled(writer_id: WriterId, features: FeatureVector) -> Self {
        Self {
            writer_id,
            kind: SignatureKind::SkilledForgery,
            features,
        }
    }

    pub fn is_genuine(&self) -> bool {
        self.kind == SignatureKind::Genuine
    }
}

/// Signatures grouped by writer. Every writer holds at least one genuine
/// record and all records share one feature dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WriterSet {
    writers: BTreeMap<WriterId, Vec<SignatureRecord>>,
    dim: usize,
}

impl WriterSet {
    pub fn new(writers: BTreeMap<WriterId, Vec<SignatureRecord>>) -> Result<Self> {
        let mut dim = None;
        for (&id, records) in &writers {
            if !records.iter().any(SignatureRecord::is_genuine) {
                return Err(Error::Data(format!("writer {id} has no genuine signature")));
            }
            for r in records {
                if r.writer_id != id {
                    return Err(Error::Data(format!(
                        "record of writer {} filed under writer {id}",
                        r.writer_id
                    )));
                }
                match dim {
                    None => dim = Some(r.features.len()),
                    Some(d) if d != r.features.len() => {
                        return Err(Error::Dimension {
                            expected: d,
                            got: r.features.len(),
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            writers,
            dim: dim.unwrap_or(0),
        })
    }

    /// Groups a flat record list by writer id.
    pub fn from_records(records: impl IntoIterator<Item = SignatureRecord>) -> Result<Self> {
        let mut writers: BTreeMap<WriterId, Vec<SignatureRecord>> = BTreeMap::new();
        for r in records {
            writers.entry(r.writer_id).or_default().push(r);
        }
        Self::new(writers)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.writers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.writers.is_empty()
    }

    pub fn writer_ids(&self) -> impl Iterator<Item = WriterId> + '_ {
        self.writers.keys().copied()
    }

    pub fn id_set(&self) -> BTreeSet<WriterId> {
        self.writers.keys().copied().collect()
    }

    pub fn records(&self, writer: WriterId) -> &[SignatureRecord] {
        self.writers.get(&writer).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn genuines(&self, writer: WriterId) -> Vec<&SignatureRecord> {
        self.records(writer)
            .iter()
            .filter(|r| r.is_genuine())
            .collect()
    }

    pub fn skilled(&self, writer: WriterId) -> Vec<&SignatureRecord> {
        self.records(writer)
            .iter()
            .filter(|r| !r.is_genuine())
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (WriterId, &[SignatureRecord])> {
        self.writers.iter().map(|(&id, r)| (id, r.as_slice()))
    }

    pub fn record_count(&self) -> usize {
        self.writers.values().map(Vec::len).sum()
    }

    /// Writers whose ids are in `ids`; unknown ids are an error.
    pub fn subset(&self, ids: &BTreeSet<WriterId>) -> Result<WriterSet> {
        let mut writers = BTreeMap::new();
        for &id in ids {
            let records = self
                .writers
                .get(&id)
                .ok_or_else(|| Error::Data(format!("unknown writer {id}")))?;
            writers.insert(id, records.clone());
        }
        Ok(WriterSet {
            writers,
            dim: self.dim,
        })
    }

    /// Union of two writer sets with disjoint ids.
    pub fn union(&self, other: &WriterSet) -> Result<WriterSet> {
        if self.dim != other.dim && !self.is_empty() && !other.is_empty() {
            return Err(Error::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut writers = self.writers.clone();
        for (&id, records) in &other.writers {
            if writers.insert(id, records.clone()).is_some() {
                return Err(Error::Protocol(format!("writer {id} present in both sets")));
            }
        }
        Ok(WriterSet {
            writers,
            dim: self.dim.max(other.dim),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["writer_id".to_string(), "kind".to_string()];
        header.extend((0..self.dim).map(|i| format!("f{i}")));
        w.write_record(&header)?;
        for (id, records) in self.iter() {
            for r in records {
                let mut row = vec![id.to_string(), r.kind.to_string()];
                row.extend(r.features.as_slice().iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<WriterSet> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.len() < 3 || &headers[0] != "writer_id" || &headers[1] != "kind" {
            return Err(Error::Data("expected header writer_id,kind,f0,...".into()));
        }
        for (i, h) in headers.iter().skip(2).enumerate() {
            if h != format!("f{i}") {
                return Err(Error::Data(format!(
                    "unexpected column {h:?}, expected f{i}"
                )));
            }
        }
        let mut records = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let writer_id: WriterId = row[0].parse().map_err(|_| {
                Error::Data(format!("row {}: bad writer id {:?}", line + 1, &row[0]))
            })?;
            let kind: SignatureKind = row[1].parse()?;
            let values = row
                .iter()
                .skip(2)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Data(format!("row {}: bad value {s:?}", line + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(SignatureRecord {
                writer_id,
                kind,
                features: FeatureVector::new(values)?,
            });
        }
        WriterSet::from_records(records)
    }

    pub fn load_csv(path: &Path) -> Result<WriterSet> {
        WriterSet::read_csv(File::open(path)?)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(File::create(path)?))
    }
}

/// Sidecar description of a dataset file. Generators may add fields; unknown
/// fields are ignored on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dim: usize,
    pub writers: usize,
    pub genuine_records: usize,
    pub skilled_records: usize,
    pub seed: u64,
}

impl DatasetManifest {
    pub fn describe(ws: &WriterSet, seed: u64) -> Self {
        let genuine_records = ws
            .iter()
            .flat_map(|(_, r)| r)
            .filter(|r| r.is_genuine())
            .count();
        Self {
            dim: ws.dim(),
            writers: ws.len(),
            genuine_records,
            skilled_records: ws.record_count() - genuine_records,
            seed,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }

    /// Cross-checks a loaded dataset against its manifest.
    pub fn check(&self, ws: &WriterSet) -> Result<()> {
        let actual = DatasetManifest::describe(ws, self.seed);
        if actual != *self {
            return Err(Error::Data(format!(
                "dataset does not match manifest: manifest {self:?}, dataset {actual:?}"
            )));
        }
        Ok(())
    }
}

/// Disjoint writer partitions of a development/exploitation experiment.
#[derive(Debug, Clone)]
pub struct EvalSplit {
    pub train: WriterSet,
    pub validation: WriterSet,
    pub optimization: WriterSet,
    pub selection: WriterSet,
    pub exploitation: WriterSet,
}

impl EvalSplit {
    pub fn new(
        train: WriterSet,
        validation: WriterSet,
        optimization: WriterSet,
        selection: WriterSet,
        exploitation: WriterSet,
    ) -> Result<Self> {
        let split = Self {
            train,
            validation,
            optimization,
            selection,
            exploitation,
        };
        split.check_disjoint()?;
        Ok(split)
    }

    pub fn parts(&self) -> [(&'static str, &WriterSet); 5] {
        [
            ("train", &self.train),
            ("validation", &self.validation),
            ("optimization", &self.optimization),
            ("selection", &self.selection),
            ("exploitation", &self.exploitation),
        ]
    }

    pub fn check_disjoint(&self) -> Result<()> {
        let parts = self.parts();
        for (i, (name_a, a)) in parts.iter().enumerate() {
            for (name_b, b) in &parts[i + 1..] {
                if let Some(id) = a.writer_ids().find(|id| !b.records(*id).is_empty()) {
                    return Err(Error::Protocol(format!(
                        "writer {id} appears in both {name_a} and {name_b}"
                    )));
                }
            }
        }
        Ok(())
    }
}
