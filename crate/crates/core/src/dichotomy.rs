//! Dichotomy transformation and the pairing protocols that turn writer sets
//! into dissimilarity-space samples and verification queries.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, SignatureRecord, WriterId, WriterSet};
use crate::error::{Error, Result};
use crate::seeding::stream_rng;

/// Elementwise absolute difference of two feature vectors.
pub fn dichotomy_transform(xq: &FeatureVector, xr: &FeatureVector) -> Result<Vec<f64>> {
    abs_diff(xq.as_slice(), xr.as_slice())
}

pub(crate) fn abs_diff(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    WithinPositive,
    BetweenNegative,
}

impl PairLabel {
    /// +1 for within-writer pairs, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            PairLabel::WithinPositive => 1.0,
            PairLabel::BetweenNegative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissimilaritySample {
    pub u: Vec<f64>,
    pub label: PairLabel,
    pub questioned_writer: WriterId,
    pub reference_writer: WriterId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Genuine,
    Skilled,
    Random,
}

impl std::fmt::Display for Truth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Truth::Genuine => "genuine",
            Truth::Skilled => "skilled",
            Truth::Random => "random",
        })
    }
}

/// A questioned signature checked against the references of the writer it
/// claims to be.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBundle {
    pub claimed_writer: WriterId,
    pub questioned: SignatureRecord,
    pub references: Vec<SignatureRecord>,
    pub truth: Truth,
}

impl QueryBundle {
    /// One dissimilarity vector per reference.
    pub fn dissimilarities(&self) -> Result<Vec<Vec<f64>>> {
        self.references
            .iter()
            .map(|r| dichotomy_transform(&self.questioned.features, &r.features))
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.references.is_empty() {
            return Err(Error::Protocol("query bundle without references".into()));
        }
        for r in &self.references {
            if !r.is_genuine() || r.writer_id != self.claimed_writer {
                return Err(Error::Protocol(format!(
                    "reference of writer {} is not a genuine signature of claimed writer {}",
                    r.writer_id, self.claimed_writer
                )));
            }
            if self.truth == Truth::Genuine && r.features == self.questioned.features {
                return Err(Error::Protocol(format!(
                    "questioned genuine of writer {} is also one of its references",
                    self.claimed_writer
                )));
            }
        }
        Ok(())
    }
}

/// Sizes of the genuine/random-forgery training protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingPairing {
    pub references: usize,
    pub genuine_per_writer: usize,
    pub random_forgeries_per_writer: usize,
}

/// Sizes of the genuine/skilled verification query protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub references: usize,
    pub genuine_queries: usize,
    pub skilled_queries: usize,
}

/// Per-writer shuffled genuines: the first `references` are the writer's
/// references, the rest are available as questioned signatures.
struct WriterDraw<'a> {
    references: Vec<&'a SignatureRecord>,
    questioned: Vec<&'a SignatureRecord>,
}

fn draw_writer<'a>(
    part: &'a WriterSet,
    writer: WriterId,
    references: usize,
    questioned: usize,
    seed: u64,
) -> Result<WriterDraw<'a>> {
    let mut genuines = part.genuines(writer);
    if genuines.len() < references + questioned {
        return Err(Error::Config(format!(
            "writer {writer} has {} genuine signatures, needs {references} references + {questioned} questioned",
            genuines.len()
        )));
    }
    let mut rng = stream_rng(seed, writer as u64);
    genuines.shuffle(&mut rng);
    let questioned = genuines[references..references + questioned].to_vec();
    genuines.truncate(references);
    Ok(WriterDraw {
        references: genuines,
        questioned,
    })
}

/// Positive samples pair each writer's questioned genuines with its
/// references; negative samples pair genuines of other writers of the same
/// part (random forgeries) with those references. Skilled forgeries are never
/// used.
pub fn build_training_set(
    part: &WriterSet,
    pairing: TrainingPairing,
    seed: u64,
) -> Result<Vec<DissimilaritySample>> {
    if pairing.references == 0 {
        return Err(Error::Config(
            "training needs at least one reference per writer".into(),
        ));
    }
    let ids: Vec<WriterId> = part.writer_ids().collect();
    if pairing.random_forgeries_per_writer > 0 && ids.len() < 2 {
        return Err(Error::Config(
            "random forgeries need at least two writers".into(),
        ));
    }
    let mut out = Vec::new();
    for &writer in &ids {
        let draw = draw_writer(
            part,
            writer,
            pairing.references,
            pairing.genuine_per_writer,
            seed,
        )?;
        for q in &draw.questioned {
            for r in &draw.references {
                out.push(DissimilaritySample {
                    u: dichotomy_transform(&q.features, &r.features)?,
                    label: PairLabel::WithinPositive,
                    questioned_writer: writer,
                    reference_writer: writer,
                });
            }
        }
        let mut rng = stream_rng(seed ^ 0x5EED_F0F0_0000_0000, writer as u64);
        for donor in pick_donors(&ids, writer, pairing.random_forgeries_per_writer, &mut rng) {
            let forgery = *part
                .genuines(donor)
                .choose(&mut rng)
                .expect("writer sets hold at least one genuine per writer");
            for r in &draw.references {
                out.push(DissimilaritySample {
                    u: dichotomy_transform(&forgery.features, &r.features)?,
                    label: PairLabel::BetweenNegative,
                    questioned_writer: donor,
                    reference_writer: writer,
                });
            }
        }
    }
    Ok(out)
}

/// Distinct donors drawn uniformly from the other writers; donors repeat
/// only once every other writer has been used.
fn pick_donors(
    ids: &[WriterId],
    writer: WriterId,
    n: usize,
    rng: &mut impl rand::Rng,
) -> Vec<WriterId> {
    let others: Vec<WriterId> = ids.iter().copied().filter(|&w| w != writer).collect();
    let mut donors = Vec::with_capacity(n);
    while donors.len() < n {
        let mut round = others.clone();
        round.shuffle(rng);
        let take = (n - donors.len()).min(round.len());
        donors.extend_from_slice(&round[..take]);
    }
    donors
}

/// Genuine-truth and skilled-truth queries for every writer of the part.
/// References are drawn once per writer and shared by all its queries.
pub fn build_optimization_queries(
    part: &WriterSet,
    plan: QueryPlan,
    seed: u64,
) -> Result<Vec<QueryBundle>> {
    if plan.references == 0 {
        return Err(Error::Config("queries need at least one reference".into()));
    }
    let mut out = Vec::new();
    for writer in part.writer_ids() {
        let draw = draw_writer(part, writer, plan.references, plan.genuine_queries, seed)?;
        let mut skilled = part.skilled(writer);
        if skilled.len() < plan.skilled_queries {
            return Err(Error::Config(format!(
                "writer {writer} has {} skilled forgeries, needs {}",
                skilled.len(),
                plan.skilled_queries
            )));
        }
        let mut rng = stream_rng(seed ^ 0x05C1_11ED_0000_0000, writer as u64);
        skilled.shuffle(&mut rng);
        let references: Vec<SignatureRecord> = draw.references.iter().map(|&r| r.clone()).collect();
        let genuine = draw.questioned.iter().map(|&q| (q, Truth::Genuine));
        let forged = skilled[..plan.skilled_queries]
            .iter()
            .map(|&q| (q, Truth::Skilled));
        for (q, truth) in genuine.chain(forged) {
            let bundle = QueryBundle {
                claimed_writer: writer,
                questioned: q.clone(),
                references: references.clone(),
                truth,
            };
            bundle.check()?;
            out.push(bundle);
        }
    }
    Ok(out)
}

/// MAX fusion of per-reference signed distances.
pub fn fuse_max(scores: &[f64]) -> Result<f64> {
    scores
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::EmptyFusion)
}

/// `pairs.csv` audit dump of training samples.
pub fn write_training_pairs<W: Write>(samples: &[DissimilaritySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["questioned_writer", "reference_writer", "truth", "label"])?;
    for s in samples {
        let (truth, label) = match s.label {
            PairLabel::WithinPositive => ("genuine", "within_positive"),
            PairLabel::BetweenNegative => ("random", "between_negative"),
        };
        w.write_record([
            s.questioned_writer.to_string(),
            s.reference_writer.to_string(),
            truth.to_string(),
            label.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `pairs.csv` audit dump of query bundles, one row per reference pairing.
pub fn write_query_pairs<W: Write>(bundles: &[QueryBundle], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["questioned_writer", "reference_writer", "truth", "label"])?;
    for b in bundles {
        let label = if b.truth == Truth::Genuine {
            "within_positive"
        } else {
            "between_negative"
        };
        for r in &b.references {
            w.write_record([
                b.questioned.writer_id.to_string(),
                r.writer_id.to_string(),
                b.truth.to_string(),
                label.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
