use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    run_baseline, run_comparison, run_eval, Experiment, MaskEvaluation, ReplicationResult,
};
use crate::bpso::Strategy;
use crate::domain::{FeatureMask, WriterSet};
use crate::error::{Error, Result};
use crate::metrics::EerReport;
use crate::synthetic::{write_dataset, GeneratorSpec};

/// Per-replication result file read back by the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepSummary {
    /// `no-fs`, `nv`, `pv` or `gv`.
    pub row: String,
    pub replication: usize,
    pub seed: u64,
    pub dim: usize,
    pub features: usize,
    pub exploitation_eer: f64,
    pub exploitation_std: f64,
    pub opt_eer: Option<f64>,
    pub sel_eer: Option<f64>,
    pub gap: Option<f64>,
    pub transfer: BTreeMap<String, f64>,
}

/// `best_mask.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskFile {
    pub strategy: Strategy,
    pub replication: usize,
    pub seed: u64,
    pub dim: usize,
    pub count: usize,
    /// Hex with the lowest feature index in the most significant bit of the
    /// first digit.
    pub mask: String,
    pub indices: Vec<usize>,
}

impl MaskFile {
    pub fn load(path: &Path) -> Result<FeatureMask> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read mask file {}: {e}", path.display())))?;
        let file: MaskFile = serde_json::from_str(&text)?;
        let mask = FeatureMask::from_hex(&file.mask, file.dim)?;
        if mask.count() != file.count || mask.indices() != file.indices {
            return Err(Error::InvalidMask(format!(
                "{}: hex mask disagrees with count/indices",
                path.display()
            )));
        }
        Ok(mask)
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_report(path: &Path, report: &EerReport) -> Result<()> {
    report.write_csv(BufWriter::new(File::create(path)?))
}

fn rep_dir(base: &Path, r: usize) -> Result<PathBuf> {
    let dir = base.join(format!("rep{r}"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn summary(row: &str, r: usize, seed: u64, dim: usize, eval: &MaskEvaluation) -> RepSummary {
    RepSummary {
        row: row.to_string(),
        replication: r,
        seed,
        dim,
        features: eval.features,
        exploitation_eer: eval.exploitation.mean_eer,
        exploitation_std: eval.exploitation.std_eer,
        opt_eer: None,
        sel_eer: None,
        gap: None,
        transfer: eval
            .transfer
            .iter()
            .map(|(k, v)| (k.clone(), v.mean_eer))
            .collect(),
    }
}

/// Generates a synthetic dataset into `out` (`dataset.csv`, `manifest.json`).
pub fn cmd_gen(spec: &GeneratorSpec, out: &Path) -> Result<WriterSet> {
    write_dataset(spec, out)
}

/// All-ones mask per replication into `out/baseline/rep{r}/`.
pub fn cmd_baseline(exp: &Experiment, out: &Path) -> Result<Vec<MaskEvaluation>> {
    let evals = run_baseline(exp)?;
    let base = out.join("baseline");
    for (r, eval) in evals.iter().enumerate() {
        let dir = rep_dir(&base, r)?;
        write_report(&dir.join("eer_report.csv"), &eval.exploitation)?;
        let s = summary("no-fs", r, exp.config.replication_seed(r), exp.dim(), eval);
        write_json(&dir.join("summary.json"), &s)?;
    }
    Ok(evals)
}

/// Strategy runs into `out/optimize/{strategy}/rep{r}/` with `trace.csv`,
/// `best_mask.json`, `eer_report.csv` and `summary.json`.
pub fn cmd_optimize(
    exp: &Experiment,
    strategies: &[Strategy],
    out: &Path,
) -> Result<Vec<ReplicationResult>> {
    let results = run_comparison(exp, strategies)?;
    for rep in &results {
        for (s, res) in &rep.strategies {
            let dir = rep_dir(&out.join("optimize").join(s.as_str()), rep.index)?;
            rep.trace
                .write_csv(BufWriter::new(File::create(dir.join("trace.csv"))?))?;
            let mask = &res.outcome.mask;
            let file = MaskFile {
                strategy: *s,
                replication: rep.index,
                seed: rep.seed,
                dim: mask.len(),
                count: mask.count(),
                mask: mask.to_hex(),
                indices: mask.indices(),
            };
            write_json(&dir.join("best_mask.json"), &file)?;
            write_report(&dir.join("eer_report.csv"), &res.evaluation.exploitation)?;
            let mut sum = summary(s.as_str(), rep.index, rep.seed, exp.dim(), &res.evaluation);
            sum.opt_eer = finite(res.outcome.opt_fitness);
            sum.sel_eer = finite(res.outcome.sel_fitness);
            sum.gap = finite(res.outcome.gap);
            write_json(&dir.join("summary.json"), &sum)?;
        }
    }
    Ok(results)
}

/// Evaluates a stored mask per replication into `out/eval/rep{r}/`, on the
/// exploitation writers or on all writers of `dataset`.
pub fn cmd_eval(
    exp: &Experiment,
    mask_file: &Path,
    dataset: Option<&Path>,
    out: &Path,
) -> Result<Vec<EerReport>> {
    let mask = MaskFile::load(mask_file)?;
    if mask.len() != exp.dim() {
        return Err(Error::Dimension {
            expected: exp.dim(),
            got: mask.len(),
        });
    }
    let target = dataset.map(WriterSet::load_csv).transpose()?;
    let reports = run_eval(exp, &mask, target.as_ref())?;
    let base = out.join("eval");
    for (r, report) in reports.iter().enumerate() {
        write_report(&rep_dir(&base, r)?.join("eer_report.csv"), report)?;
    }
    Ok(reports)
}
