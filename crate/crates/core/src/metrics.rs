//! FAR/FRR, user-threshold equal error rate and its aggregation.
//!
//! A query is accepted when its fused score is `>= threshold`. The EER of a
//! writer is taken over a finite candidate set: all distinct scores plus the
//! midpoints between consecutive ones. The candidate minimizing |FAR - FRR|
//! wins, ties going to the smaller (FAR + FRR) / 2 and then to the smaller
//! threshold; the reported EER is (FAR + FRR) / 2 there.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dichotomy::Truth;
use crate::domain::WriterId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredQuery {
    pub writer_id: WriterId,
    pub truth: Truth,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeClass {
    SkilledOnly,
    RandomOnly,
}

impl NegativeClass {
    fn matches(self, truth: Truth) -> bool {
        matches!(
            (self, truth),
            (NegativeClass::SkilledOnly, Truth::Skilled)
                | (NegativeClass::RandomOnly, Truth::Random)
        )
    }
}

/// (FAR, FRR) at `threshold`.
pub fn far_frr(
    scores: &[ScoredQuery],
    threshold: f64,
    negatives: NegativeClass,
) -> Result<(f64, f64)> {
    let (genuine, negative) = split_scores(scores, negatives)?;
    let rejected = genuine.iter().filter(|&&s| s < threshold).count();
    let accepted = negative.iter().filter(|&&s| s >= threshold).count();
    Ok((
        accepted as f64 / negative.len() as f64,
        rejected as f64 / genuine.len() as f64,
    ))
}

fn split_scores(scores: &[ScoredQuery], negatives: NegativeClass) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut genuine = Vec::new();
    let mut negative = Vec::new();
    for q in scores {
        if !q.score.is_finite() {
            return Err(Error::Metric(format!(
                "non-finite score for writer {}",
                q.writer_id
            )));
        }
        if q.truth == Truth::Genuine {
            genuine.push(q.score);
        } else if negatives.matches(q.truth) {
            negative.push(q.score);
        }
    }
    if genuine.is_empty() {
        return Err(Error::Metric("no genuine queries".into()));
    }
    if negative.is_empty() {
        return Err(Error::Metric(
            "no negative queries of the requested class".into(),
        ));
    }
    Ok((genuine, negative))
}

/// Sorted candidate thresholds: distinct scores and midpoints between
/// consecutive distinct scores.
pub fn candidate_thresholds(scores: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut out = Vec::with_capacity(distinct.len() * 2);
    for (k, &s) in distinct.iter().enumerate() {
        if k > 0 {
            out.push((distinct[k - 1] + s) / 2.0);
        }
        out.push(s);
    }
    out
}

/// EER over genuine vs. negative scores with the discrete rule above.
/// Returns (eer, threshold).
pub fn eer_of(genuine: &[f64], negative: &[f64]) -> Result<(f64, f64)> {
    if genuine.is_empty() || negative.is_empty() {
        return Err(Error::Metric(
            "EER needs genuine and negative scores".into(),
        ));
    }
    let mut g = genuine.to_vec();
    let mut n = negative.to_vec();
    g.sort_by(f64::total_cmp);
    n.sort_by(f64::total_cmp);
    let all: Vec<f64> = g.iter().chain(&n).copied().collect();
    let (ng, nn) = (g.len() as f64, n.len() as f64);

    let mut best: Option<(f64, f64, f64)> = None;
    for t in candidate_thresholds(&all) {
        let rejected = g.partition_point(|&s| s < t);
        let accepted = n.len() - n.partition_point(|&s| s < t);
        let far = accepted as f64 / nn;
        let frr = rejected as f64 / ng;
        let key = ((far - frr).abs(), (far + frr) / 2.0, t);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (_, eer, threshold) = best.expect("at least one candidate threshold");
    Ok((eer, threshold))
}

/// User-threshold EER of one writer, genuine vs. skilled queries.
pub fn user_eer(scores: &[ScoredQuery]) -> Result<(f64, f64)> {
    if let Some(first) = scores.first() {
        if let Some(q) = scores.iter().find(|q| q.writer_id != first.writer_id) {
            return Err(Error::Metric(format!(
                "user EER over mixed writers {} and {}",
                first.writer_id, q.writer_id
            )));
        }
    }
    let (genuine, skilled) = split_scores(scores, NegativeClass::SkilledOnly)?;
    eer_of(&genuine, &skilled)
}

/// Single threshold shared by all writers.
pub fn global_eer(scores: &[ScoredQuery], negatives: NegativeClass) -> Result<(f64, f64)> {
    let (genuine, negative) = split_scores(scores, negatives)?;
    eer_of(&genuine, &negative)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EerReport {
    pub per_writer_eer: BTreeMap<WriterId, f64>,
    pub thresholds: BTreeMap<WriterId, f64>,
    pub mean_eer: f64,
    pub std_eer: f64,
}

/// Arithmetic mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Metric("statistics of an empty list".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

pub fn aggregate_eer(per_writer: &[(WriterId, f64)]) -> Result<EerReport> {
    aggregate_with_thresholds(per_writer.iter().map(|&(w, e)| (w, e, f64::NAN)))
}

fn aggregate_with_thresholds(
    rows: impl IntoIterator<Item = (WriterId, f64, f64)>,
) -> Result<EerReport> {
    let mut per_writer_eer = BTreeMap::new();
    let mut thresholds = BTreeMap::new();
    for (w, e, t) in rows {
        if per_writer_eer.insert(w, e).is_some() {
            return Err(Error::Metric(format!("writer {w} reported twice")));
        }
        if !t.is_nan() {
            thresholds.insert(w, t);
        }
    }
    let values: Vec<f64> = per_writer_eer.values().copied().collect();
    let (mean_eer, std_eer) = mean_std(&values)?;
    Ok(EerReport {
        per_writer_eer,
        thresholds,
        mean_eer,
        std_eer,
    })
}

/// Groups scores by writer, computes each user EER and aggregates.
pub fn evaluate_user_eer(scores: &[ScoredQuery]) -> Result<EerReport> {
    let mut by_writer: BTreeMap<WriterId, Vec<ScoredQuery>> = BTreeMap::new();
    for q in scores {
        by_writer.entry(q.writer_id).or_default().push(*q);
    }
    let mut rows = Vec::with_capacity(by_writer.len());
    for (w, qs) in by_writer {
        let (eer, t) = user_eer(&qs)?;
        rows.push((w, eer, t));
    }
    aggregate_with_thresholds(rows)
}

impl EerReport {
    /// `eer_report.csv`: one row per writer, then `mean` and `std` footers.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["writer_id", "eer", "threshold"])?;
        for (id, eer) in &self.per_writer_eer {
            let t = self
                .thresholds
                .get(id)
                .map(|t| t.to_string())
                .unwrap_or_default();
            w.write_record([id.to_string(), eer.to_string(), t])?;
        }
        w.write_record(["mean".to_string(), self.mean_eer.to_string(), String::new()])?;
        w.write_record(["std".to_string(), self.std_eer.to_string(), String::new()])?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn queries(genuine: &[f64], skilled: &[f64]) -> Vec<ScoredQuery> {
        let g = genuine.iter().map(|&score| ScoredQuery {
            writer_id: 1,
            truth: Truth::Genuine,
            score,
        });
        let s = skilled.iter().map(|&score| ScoredQuery {
            writer_id: 1,
            truth: Truth::Skilled,
            score,
        });
        g.chain(s).collect()
    }

    #[test]
    fn far_frr_extremes() {
        let q = queries(&[1.0], &[0.0]);
        assert_eq!(
            far_frr(&q, 0.5, NegativeClass::SkilledOnly).unwrap(),
            (0.0, 0.0)
        );
        let q = queries(&[0.0], &[1.0]);
        assert_eq!(
            far_frr(&q, 0.5, NegativeClass::SkilledOnly).unwrap(),
            (1.0, 1.0)
        );
    }

    #[test]
    fn far_frr_missing_class() {
        let q = queries(&[1.0], &[0.0]);
        assert!(far_frr(&q, 0.5, NegativeClass::RandomOnly).is_err());
        assert!(far_frr(&queries(&[], &[0.0]), 0.5, NegativeClass::SkilledOnly).is_err());
    }

    #[test]
    fn eer_hand_cases() {
        assert_eq!(user_eer(&queries(&[0.9, 0.8], &[0.1, 0.2])).unwrap().0, 0.0);
        let (eer, t) = user_eer(&queries(&[0.9, 0.2], &[0.1, 0.8])).unwrap();
        assert_eq!(eer, 0.5);
        assert_eq!(t, 0.5);
    }

    #[test]
    fn eer_rejects_mixed_writers_and_missing_class() {
        let mut q = queries(&[0.9], &[0.1]);
        q[1].writer_id = 2;
        assert!(user_eer(&q).is_err());
        assert!(user_eer(&queries(&[0.9], &[])).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let r = aggregate_eer(&[(3, 0.04)]).unwrap();
        assert_eq!((r.mean_eer, r.std_eer), (0.04, 0.0));
        let r = aggregate_eer(&[(1, 0.0), (2, 0.1)]).unwrap();
        assert!((r.mean_eer - 0.05).abs() < 1e-15);
        assert!((r.std_eer - 0.05).abs() < 1e-15);
        assert!(aggregate_eer(&[]).is_err());
    }

    #[test]
    fn report_csv_has_footer() {
        let q: Vec<ScoredQuery> = queries(&[0.9, 0.2], &[0.1, 0.8]);
        let r = evaluate_user_eer(&q).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "writer_id,eer,threshold\n1,0.5,0.5\nmean,0.5,\nstd,0,\n"
        );
    }

    proptest! {
        #[test]
        fn eer_invariant_under_increasing_transform(
            g in proptest::collection::vec(-3.0f64..3.0, 1..15),
            s in proptest::collection::vec(-3.0f64..3.0, 1..15),
        ) {
            let (e1, _) = user_eer(&queries(&g, &s)).unwrap();
            let f = |x: f64| x.exp() * 3.0 + 1.0;
            let g2: Vec<f64> = g.iter().map(|&x| f(x)).collect();
            let s2: Vec<f64> = s.iter().map(|&x| f(x)).collect();
            let (e2, _) = user_eer(&queries(&g2, &s2)).unwrap();
            prop_assert_eq!(e1, e2);
            prop_assert!((0.0..=1.0).contains(&e1));
        }

        #[test]
        fn separated_scores_have_zero_eer(
            g in proptest::collection::vec(1.0f64..2.0, 1..10),
            s in proptest::collection::vec(-2.0f64..0.9, 1..10),
        ) {
            prop_assert_eq!(user_eer(&queries(&g, &s)).unwrap().0, 0.0);
        }
    }
}
