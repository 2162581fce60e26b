use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::RepSummary;
use crate::error::{Error, Result};
use crate::metrics::mean_std;

/// One model row: means over replications, standard deviations are
/// population statistics over the replication means.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub row: String,
    pub replications: usize,
    pub features_mean: f64,
    pub dim: usize,
    pub eer_mean: f64,
    pub eer_std: f64,
    pub gap_mean: Option<f64>,
    pub transfer: BTreeMap<String, (f64, f64)>,
}

const ROWS: [(&str, &str); 4] = [
    ("no-fs", "baseline"),
    ("nv", "optimize/nv"),
    ("pv", "optimize/pv"),
    ("gv", "optimize/gv"),
];

fn rep_dirs(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if let Some(r) = name
            .strip_prefix("rep")
            .and_then(|n| n.parse::<usize>().ok())
        {
            if path.is_dir() {
                out.push((r, path));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn load_rows(run_dir: &Path) -> Result<Vec<(String, Vec<RepSummary>)>> {
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    for (name, sub) in ROWS {
        let dir = run_dir.join(sub);
        if !dir.is_dir() {
            continue;
        }
        let mut reps = Vec::new();
        for (r, path) in rep_dirs(&dir)? {
            let file = path.join("summary.json");
            match fs::read_to_string(&file) {
                Ok(text) => reps.push(serde_json::from_str::<RepSummary>(&text)?),
                Err(_) => problems.push(format!(
                    "{name} replication {r}: missing {}",
                    file.display()
                )),
            }
        }
        if reps.is_empty() {
            problems.push(format!(
                "{name}: no completed replication in {}",
                dir.display()
            ));
        } else {
            rows.push((name.to_string(), reps));
        }
    }
    let all: BTreeSet<usize> = rows
        .iter()
        .flat_map(|(_, reps)| reps.iter().map(|s| s.replication))
        .collect();
    for (name, reps) in &rows {
        let have: BTreeSet<usize> = reps.iter().map(|s| s.replication).collect();
        for r in all.difference(&have) {
            problems.push(format!("{name} replication {r}: not run"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Data(format!(
            "incomplete runs:\n  {}",
            problems.join("\n  ")
        )));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!(
            "no runs found in {}",
            run_dir.display()
        )));
    }
    Ok(rows)
}

fn summarize(row: String, reps: &[RepSummary]) -> Result<ReportRow> {
    let eers: Vec<f64> = reps.iter().map(|s| s.exploitation_eer).collect();
    let (eer_mean, eer_std) = mean_std(&eers)?;
    let features: Vec<f64> = reps.iter().map(|s| s.features as f64).collect();
    let gaps: Option<Vec<f64>> = reps.iter().map(|s| s.gap).collect();
    let gap_mean = gaps.map(|g| mean_std(&g).map(|m| m.0)).transpose()?;
    let targets: BTreeSet<&String> = reps.iter().flat_map(|s| s.transfer.keys()).collect();
    let mut transfer = BTreeMap::new();
    for t in targets {
        let values = reps
            .iter()
            .map(|s| s.transfer.get(t).copied())
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                Error::Data(format!(
                    "{row}: transfer target {t} missing in some replications"
                ))
            })?;
        transfer.insert(t.clone(), mean_std(&values)?);
    }
    Ok(ReportRow {
        replications: reps.len(),
        features_mean: mean_std(&features)?.0,
        dim: reps[0].dim,
        eer_mean,
        eer_std,
        gap_mean,
        transfer,
        row,
    })
}

/// Reads every completed replication under `run_dir` and writes
/// `report.md` and `report.csv` there.
pub fn cmd_report(run_dir: &Path) -> Result<Vec<ReportRow>> {
    if !run_dir.is_dir() {
        return Err(Error::Data(format!(
            "run directory {} does not exist",
            run_dir.display()
        )));
    }
    let rows = load_rows(run_dir)?
        .into_iter()
        .map(|(name, reps)| summarize(name, &reps))
        .collect::<Result<Vec<_>>>()?;
    let targets: BTreeSet<String> = rows
        .iter()
        .flat_map(|r| r.transfer.keys().cloned())
        .collect();

    let mut md = String::from("| model | #features | % of D | EER mean (std) | gap |");
    for t in &targets {
        let _ = write!(md, " {t} EER mean (std) |");
    }
    md.push_str("\n|---|---|---|---|---|");
    md.push_str(&"---|".repeat(targets.len()));
    md.push('\n');
    for r in &rows {
        let gap = r.gap_mean.map_or("-".to_string(), |g| format!("{g:.4}"));
        let pct = 100.0 * r.features_mean / r.dim.max(1) as f64;
        let _ = write!(
            md,
            "| {} | {:.1} | {:.1} | {:.4} ({:.4}) | {} |",
            r.row, r.features_mean, pct, r.eer_mean, r.eer_std, gap
        );
        for t in &targets {
            match r.transfer.get(t) {
                Some((m, s)) => {
                    let _ = write!(md, " {m:.4} ({s:.4}) |");
                }
                None => md.push_str(" - |"),
            }
        }
        md.push('\n');
    }
    fs::write(run_dir.join("report.md"), md)?;

    let mut w = csv::Writer::from_path(run_dir.join("report.csv"))?;
    let mut header = vec![
        "model",
        "replications",
        "features_mean",
        "eer_mean",
        "eer_std",
        "gap_mean",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    for t in &targets {
        header.push(format!("{t}_eer_mean"));
        header.push(format!("{t}_eer_std"));
    }
    w.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![
            r.row.clone(),
            r.replications.to_string(),
            r.features_mean.to_string(),
            r.eer_mean.to_string(),
            r.eer_std.to_string(),
            r.gap_mean.map(|g| g.to_string()).unwrap_or_default(),
        ];
        for t in &targets {
            let (m, s) = r
                .transfer
                .get(t)
                .map_or((String::new(), String::new()), |(m, s)| {
                    (m.to_string(), s.to_string())
                });
            rec.push(m);
            rec.push(s);
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(rows)
}
