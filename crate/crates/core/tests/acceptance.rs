//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero when any criterion fails. Tolerances are fixed below.

use std::collections::HashSet;
use std::f64::consts::FRAC_2_PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use sigfs::bpso::{
    archive_update, run_trajectory, transfer_vshape, ExternalArchive, IdpsoConfig, Strategy,
    WrapperContext,
};
use sigfs::dichotomy::{
    build_optimization_queries, build_training_set, dichotomy_transform, DissimilaritySample,
    PairLabel, QueryPlan, TrainingPairing, Truth,
};
use sigfs::domain::{apply_mask, FeatureMask, FeatureVector};
use sigfs::harness::{
    cmd_optimize, run_comparison, Experiment, ExperimentConfig, QueryProtocol, ReplicationResult,
    TrainingProtocol,
};
use sigfs::metrics::{far_frr, user_eer, NegativeClass, ScoredQuery};
use sigfs::prototype::{condense, PrototypeSet};
use sigfs::seeding::stream_rng;
use sigfs::svm::{rbf_gram, solve_dual, train, KernelParams, SolverConfig};
use sigfs::synthetic::{generate, generate_transfer_pair, GeneratorSpec, SplitCounts};

const DT_PAIRS: usize = 1000;
const DT_RUNTIME: Duration = Duration::from_secs(5);
const TRANSFER_TOL: f64 = 1e-12;
const EER_SETS: usize = 200;
const TRAINER_SETS: usize = 50;
const EQUALITY_TOL: f64 = 1e-8;
const KKT_TOL: f64 = 1e-3;
const PERMUTATION_TOL: f64 = 1e-6;
const CNN_SETS: usize = 20;
const CNN_POINTS: usize = 200;
const ARCHIVE_STREAMS: usize = 100;
const ARCHIVE_RUNS: u64 = 10;
const BASELINE_BAND: (f64, f64) = (0.05, 0.20);
const REPLICATIONS: usize = 5;
const MIN_REPS: usize = 4;
const MAX_FEATURE_FRACTION: f64 = 0.70;
const REDUNDANCY_SLACK: f64 = 0.02;
const TRANSFER_SPREAD: f64 = 1.25;
const EXPERIMENT_RUNTIME: Duration = Duration::from_secs(30 * 60);

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(name: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { name, pass, detail }
}

fn random_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-50.0..50.0)).collect()
}

fn dt_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = stream_rng(101, 0);
    let mut failures = Vec::new();
    for &d in &[64usize, 2048] {
        for k in 0..DT_PAIRS {
            let a = random_vec(&mut rng, d);
            let b = random_vec(&mut rng, d);
            let mut oracle = Vec::with_capacity(d);
            for i in 0..d {
                oracle.push(if a[i] > b[i] {
                    a[i] - b[i]
                } else {
                    b[i] - a[i]
                });
            }
            let (fa, fb) = (
                FeatureVector::new(a).unwrap(),
                FeatureVector::new(b).unwrap(),
            );
            let u = dichotomy_transform(&fa, &fb).unwrap();
            if u != oracle {
                failures.push(format!("D={d} pair {k}: value mismatch"));
            }
            if dichotomy_transform(&fb, &fa).unwrap() != u {
                failures.push(format!("D={d} pair {k}: asymmetric"));
            }
            let mut bits: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.5)).collect();
            bits[rng.gen_range(0..d)] = true;
            let m = FeatureMask::from_bits(bits);
            let masked_first =
                dichotomy_transform(&apply_mask(&fa, &m).unwrap(), &apply_mask(&fb, &m).unwrap())
                    .unwrap();
            let masked_after = apply_mask(&FeatureVector::new(u).unwrap(), &m).unwrap();
            if masked_first != masked_after.as_slice() {
                failures.push(format!("D={d} pair {k}: mask does not commute"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < DT_RUNTIME;
    verdict(
        "dichotomy transform oracle",
        pass,
        format!(
            "{} pairs x 2 dims, {} failures, {:.2?} (limit {:?})",
            DT_PAIRS,
            failures.len(),
            elapsed,
            DT_RUNTIME
        ),
    )
}

fn transfer_checks() -> Verdict {
    let mut ok = transfer_vshape(0.0) == 0.0;
    ok &= (transfer_vshape(FRAC_2_PI) - 0.5).abs() <= TRANSFER_TOL;
    ok &= (transfer_vshape(-FRAC_2_PI) - 0.5).abs() <= TRANSFER_TOL;
    let mut rng = stream_rng(102, 0);
    let mut bad = 0;
    for _ in 0..1000 {
        let v: f64 = rng.gen_range(-1e3..1e3);
        let t = transfer_vshape(v);
        if t != transfer_vshape(-v) || !(0.0..1.0).contains(&t) {
            bad += 1;
        }
    }
    verdict(
        "V-shaped transfer function",
        ok && bad == 0,
        format!("fixed points ok={ok}, {bad}/1000 random points violate evenness or range"),
    )
}

/// Exhaustive user-EER: every score and every midpoint between two scores
/// with no score strictly between them, FAR/FRR counted directly.
fn eer_sweep_oracle(genuine: &[f64], skilled: &[f64]) -> (f64, f64) {
    let all: Vec<f64> = genuine.iter().chain(skilled).copied().collect();
    let mut candidates: Vec<f64> = all.clone();
    for &a in &all {
        for &b in &all {
            if a < b && !all.iter().any(|&c| a < c && c < b) {
                candidates.push((a + b) / 2.0);
            }
        }
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for &t in &candidates {
        let far = skilled.iter().filter(|&&s| s >= t).count() as f64 / skilled.len() as f64;
        let frr = genuine.iter().filter(|&&s| s < t).count() as f64 / genuine.len() as f64;
        let key = ((far - frr).abs(), (far + frr) / 2.0, t);
        let better = match best {
            None => true,
            Some(b) => {
                key.0 < b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2)))
            }
        };
        if better {
            best = Some(key);
        }
    }
    let b = best.unwrap();
    (b.1, b.2)
}

fn eer_oracle() -> Verdict {
    let mut rng = stream_rng(103, 0);
    let mut mismatches = 0;
    let mut non_monotone = 0;
    for _ in 0..EER_SETS {
        let ng = rng.gen_range(1..=15);
        let ns = rng.gen_range(1..=15);
        // coarse grid so that ties occur
        let mut draw = |shift: f64| ((rng.gen_range(-2.0..2.0f64) + shift) * 4.0).round() / 4.0;
        let genuine: Vec<f64> = (0..ng).map(|_| draw(0.5)).collect();
        let skilled: Vec<f64> = (0..ns).map(|_| draw(-0.5)).collect();
        let queries: Vec<ScoredQuery> = genuine
            .iter()
            .map(|&score| ScoredQuery {
                writer_id: 7,
                truth: Truth::Genuine,
                score,
            })
            .chain(skilled.iter().map(|&score| ScoredQuery {
                writer_id: 7,
                truth: Truth::Skilled,
                score,
            }))
            .collect();
        if user_eer(&queries).unwrap() != eer_sweep_oracle(&genuine, &skilled) {
            mismatches += 1;
        }
        let mut ts: Vec<f64> = genuine.iter().chain(&skilled).copied().collect();
        ts.push(-10.0);
        ts.push(10.0);
        ts.sort_by(f64::total_cmp);
        let rates: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| far_frr(&queries, t, NegativeClass::SkilledOnly).unwrap())
            .collect();
        if rates.windows(2).any(|w| w[1].0 > w[0].0 || w[1].1 < w[0].1) {
            non_monotone += 1;
        }
    }
    verdict(
        "user EER vs exhaustive sweep",
        mismatches == 0 && non_monotone == 0,
        format!(
            "{EER_SETS} sets: {mismatches} mismatches, {non_monotone} non-monotone FAR/FRR curves"
        ),
    )
}

fn sample(u: Vec<f64>, positive: bool) -> DissimilaritySample {
    let label = if positive {
        PairLabel::WithinPositive
    } else {
        PairLabel::BetweenNegative
    };
    DissimilaritySample {
        u,
        label,
        questioned_writer: 0,
        reference_writer: 0,
    }
}

fn trainer_contract() -> Verdict {
    let mut rng = stream_rng(104, 0);
    let params = KernelParams { gamma: 0.5, c: 1.0 };
    let (mut worst_bound, mut worst_eq, mut worst_kkt, mut worst_perm) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut errors = Vec::new();
    for _ in 0..TRAINER_SETS {
        let n = rng.gen_range(4..=40);
        let d = rng.gen_range(2..=5);
        let mut samples: Vec<DissimilaritySample> = (0..n)
            .map(|i| {
                let positive = i % 3 != 0;
                let shift = if positive { 0.0 } else { 0.8 };
                sample(
                    (0..d).map(|_| rng.gen_range(0.0..2.0) + shift).collect(),
                    positive,
                )
            })
            .collect();
        let points: Vec<Vec<f64>> = samples.iter().map(|s| s.u.clone()).collect();
        let labels: Vec<f64> = samples.iter().map(|s| s.label.sign()).collect();
        let gram = rbf_gram(&points, params.gamma);
        let sol = match solve_dual(&gram, &labels, params.c, &SolverConfig::default()) {
            Ok(s) => s,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        for &a in &sol.alpha {
            worst_bound = worst_bound.max((-a).max(a - params.c)).max(0.0);
        }
        let eq: f64 = sol.alpha.iter().zip(&labels).map(|(a, y)| a * y).sum();
        worst_eq = worst_eq.max(eq.abs());
        // maximal violating pair, recomputed from alpha
        let grad: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| labels[i] * labels[j] * gram[i * n + j] * sol.alpha[j])
                    .sum::<f64>()
                    - 1.0
            })
            .collect();
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..n {
            let v = -labels[t] * grad[t];
            let in_up = (labels[t] > 0.0 && sol.alpha[t] < params.c)
                || (labels[t] < 0.0 && sol.alpha[t] > 0.0);
            let in_low = (labels[t] > 0.0 && sol.alpha[t] > 0.0)
                || (labels[t] < 0.0 && sol.alpha[t] < params.c);
            if in_up {
                up = up.max(v);
            }
            if in_low {
                low = low.min(v);
            }
        }
        worst_kkt = worst_kkt.max(up - low);

        let ones = FeatureMask::ones(d);
        let a = train(&samples, params, &ones).unwrap();
        samples.shuffle(&mut rng);
        let b = train(&samples, params, &ones).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..3.0)).collect();
            worst_perm = worst_perm
                .max((a.decision_value(&x).unwrap() - b.decision_value(&x).unwrap()).abs());
        }
    }
    let xor = vec![
        sample(vec![0.0, 0.0], true),
        sample(vec![1.0, 1.0], true),
        sample(vec![0.0, 1.0], false),
        sample(vec![1.0, 0.0], false),
    ];
    let model = train(
        &xor,
        KernelParams {
            gamma: 1.0,
            c: 10.0,
        },
        &FeatureMask::ones(2),
    )
    .unwrap();
    let xor_correct = xor
        .iter()
        .filter(|s| model.decision_value(&s.u).unwrap().signum() == s.label.sign())
        .count();
    let pass = errors.is_empty()
        && worst_bound == 0.0
        && worst_eq <= EQUALITY_TOL
        && worst_kkt <= KKT_TOL
        && worst_perm <= PERMUTATION_TOL
        && xor_correct == 4;
    verdict(
        "SVM trainer contract",
        pass,
        format!(
            "{TRAINER_SETS} sets: solver errors {errors:?}, bound violation {worst_bound:.1e}, |sum a y| {worst_eq:.1e}, \
             KKT gap {worst_kkt:.1e}, permutation diff {worst_perm:.1e}; XOR {xor_correct}/4"
        ),
    )
}

fn nn_label_oracle(set: &PrototypeSet, u: &[f64]) -> PairLabel {
    let mut best = (f64::INFINITY, usize::MAX, PairLabel::WithinPositive);
    for (s, &origin) in set.samples.iter().zip(&set.origin_indices) {
        let d: f64 = s.u.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 || (d == best.0 && origin < best.1) {
            best = (d, origin, s.label);
        }
    }
    best.2
}

fn cnn_consistency() -> Verdict {
    let mut rng = stream_rng(105, 0);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut inconsistent = 0;
    let mut separated = 0;
    let mut separated_reduced = 0;
    let mut sizes = Vec::new();
    for k in 0..CNN_SETS {
        let separation = 0.5 * k as f64; // 0 .. 9.5 spreads
        let train: Vec<DissimilaritySample> = (0..CNN_POINTS)
            .map(|i| {
                let positive = i % 2 == 0;
                let shift = if positive { 0.0 } else { separation };
                sample(
                    (0..3).map(|_| shift + unit.sample(&mut rng)).collect(),
                    positive,
                )
            })
            .collect();
        let set = condense(&train, k as u64).unwrap();
        inconsistent += train
            .iter()
            .filter(|s| nn_label_oracle(&set, &s.u) != s.label)
            .count();
        if separation >= 4.0 {
            separated += 1;
            separated_reduced += usize::from(set.len() < train.len());
        }
        sizes.push(set.len());
    }
    verdict(
        "CNN consistency",
        inconsistent == 0 && separated > 0 && separated_reduced == separated,
        format!(
            "{CNN_SETS} sets of {CNN_POINTS}: {inconsistent} misclassified points, reduced {separated_reduced}/{separated} separated sets, kept sizes {sizes:?}"
        ),
    )
}

fn small_contexts(seed: u64) -> (WrapperContext, WrapperContext) {
    let spec = GeneratorSpec {
        n_writers: 24,
        dim: 32,
        d_informative: 8,
        genuine_per_writer: 12,
        skilled_per_writer: 4,
        forgery_offset: 5.0,
        seed,
        ..Default::default()
    };
    let ws = generate(&spec).unwrap();
    let ids: Vec<u32> = ws.writer_ids().collect();
    let part = |r: std::ops::Range<usize>| ws.subset(&ids[r].iter().copied().collect()).unwrap();
    let pairing = TrainingPairing {
        references: 6,
        genuine_per_writer: 4,
        random_forgeries_per_writer: 4,
    };
    let samples = build_training_set(&part(0..12), pairing, seed).unwrap();
    let protos = condense(&samples, seed).unwrap();
    let plan = QueryPlan {
        references: 6,
        genuine_queries: 4,
        skilled_queries: 4,
    };
    let opt = WrapperContext::new(
        protos.samples,
        &build_optimization_queries(&part(12..18), plan, seed).unwrap(),
        KernelParams::default(),
        SolverConfig::default(),
    )
    .unwrap();
    let sel = opt
        .sibling(&build_optimization_queries(&part(18..24), plan, seed).unwrap())
        .unwrap();
    (opt, sel)
}

fn archive_correctness() -> Verdict {
    let mut rng = stream_rng(106, 0);
    let mut mismatches = 0;
    for _ in 0..ARCHIVE_STREAMS {
        let dim = rng.gen_range(3..=8);
        let capacity = rng.gen_range(1..=6);
        // fitness is a function of the mask, on a coarse grid to force ties
        let levels: Vec<f64> = (0..(1usize << dim))
            .map(|_| rng.gen_range(0..5) as f64 / 4.0)
            .collect();
        let mut archive = ExternalArchive::new(capacity);
        let mut seen: Vec<(Vec<bool>, f64)> = Vec::new();
        for _ in 0..rng.gen_range(1..=8) {
            let batch: Vec<(FeatureMask, f64)> = (0..rng.gen_range(1..=6))
                .map(|_| {
                    let code = rng.gen_range(1..(1usize << dim));
                    let bits: Vec<bool> = (0..dim).map(|b| code >> b & 1 == 1).collect();
                    (FeatureMask::from_bits(bits), levels[code])
                })
                .collect();
            archive = archive_update(&archive, &batch);
            seen.extend(batch.iter().map(|(m, f)| (m.bits().to_vec(), *f)));

            let mut oracle = seen.clone();
            oracle.sort_by(|a, b| {
                let ca = a.0.iter().filter(|&&x| x).count();
                let cb = b.0.iter().filter(|&&x| x).count();
                a.1.partial_cmp(&b.1)
                    .unwrap()
                    .then(ca.cmp(&cb))
                    .then(a.0.cmp(&b.0))
            });
            let mut unique = HashSet::new();
            oracle.retain(|e| unique.insert(e.0.clone()));
            oracle.truncate(capacity);
            let got: Vec<(Vec<bool>, f64)> = archive
                .entries()
                .iter()
                .map(|e| (e.mask.bits().to_vec(), e.selection_fitness))
                .collect();
            if got != oracle {
                mismatches += 1;
            }
        }
    }
    let mut violations = 0;
    for seed in 0..ARCHIVE_RUNS {
        let (opt, sel) = small_contexts(seed);
        let config = IdpsoConfig {
            population: 6,
            max_iterations: 5,
            seed,
            ..Default::default()
        };
        let traj = run_trajectory(&config, &opt, &sel).unwrap();
        if traj.outcome(Strategy::Gv).sel_fitness > traj.outcome(Strategy::Pv).sel_fitness {
            violations += 1;
        }
    }
    verdict(
        "external archive",
        mismatches == 0 && violations == 0,
        format!("{ARCHIVE_STREAMS} streams: {mismatches} oracle mismatches; GV > PV on selection in {violations}/{ARCHIVE_RUNS} runs"),
    )
}

fn desk_spec() -> GeneratorSpec {
    GeneratorSpec {
        n_writers: 70,
        dim: 64,
        d_informative: 16,
        genuine_per_writer: 24,
        skilled_per_writer: 10,
        ..Default::default()
    }
}

fn desk_config(replications: usize, iterations: usize) -> ExperimentConfig {
    ExperimentConfig {
        dataset: "desk/dataset.csv".into(),
        manifest: None,
        output_dir: "desk/runs".into(),
        seed: 7,
        references: 12,
        replications,
        strategies: Strategy::ALL.to_vec(),
        split: SplitCounts {
            train: 20,
            validation: 10,
            optimization: 10,
            selection: 10,
            exploitation: 20,
        },
        training: TrainingProtocol {
            genuine_per_writer: 10,
            random_forgeries_per_writer: 10,
        },
        queries: QueryProtocol {
            genuine_queries: 10,
            skilled_queries: 10,
        },
        idpso: IdpsoConfig {
            population: 20,
            max_iterations: iterations,
            ..Default::default()
        },
        kernel: KernelParams::default(),
        solver: SolverConfig::default(),
        transfer: Vec::new(),
    }
}

fn desk_experiment() -> (Vec<ReplicationResult>, Duration) {
    let source = desk_spec();
    let target = GeneratorSpec {
        n_writers: 30,
        writer_spread: source.writer_spread * TRANSFER_SPREAD,
        seed: source.seed + 1000,
        ..source.clone()
    };
    let (src, tgt) = generate_transfer_pair(&source, &target).unwrap();
    let exp = Experiment::new(
        desk_config(REPLICATIONS, 40),
        src,
        vec![("target".into(), tgt)],
    )
    .unwrap();
    let start = Instant::now();
    let results = run_comparison(&exp, &Strategy::ALL).unwrap();
    (results, start.elapsed())
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn exploit(r: &ReplicationResult, s: Strategy) -> f64 {
    r.strategies[&s].evaluation.exploitation.mean_eer
}

fn overfitting_ordering(results: &[ReplicationResult], elapsed: Duration) -> Verdict {
    let base = mean(results.iter().map(|r| r.baseline.exploitation.mean_eer));
    let [nv, pv, gv] = Strategy::ALL.map(|s| mean(results.iter().map(|r| exploit(r, s))));
    let gv_gaps: Vec<f64> = results
        .iter()
        .map(|r| r.strategies[&Strategy::Gv].outcome.gap)
        .collect();
    let nv_gaps: Vec<f64> = results
        .iter()
        .map(|r| r.strategies[&Strategy::Nv].outcome.gap)
        .collect();
    let nv_positive = nv_gaps.iter().filter(|&&g| g > 0.0).count();
    let in_band = (BASELINE_BAND.0..=BASELINE_BAND.1).contains(&base);
    let pass = in_band
        && gv <= pv
        && gv <= nv
        && gv_gaps.iter().all(|&g| g == 0.0)
        && nv_positive >= MIN_REPS
        && elapsed < EXPERIMENT_RUNTIME;
    verdict(
        "overfitting ordering",
        pass,
        format!(
            "baseline {base:.4} (band {BASELINE_BAND:?}); mean exploitation EER NV {nv:.4} PV {pv:.4} GV {gv:.4}; \
             GV gaps {gv_gaps:?}; NV gap > 0 in {nv_positive}/{}; {elapsed:.1?}",
            results.len()
        ),
    )
}

fn redundancy(results: &[ReplicationResult], dim: usize) -> Verdict {
    let mut ok = 0;
    let mut rows = Vec::new();
    for r in results {
        let gv = &r.strategies[&Strategy::Gv];
        let count = gv.outcome.mask.count();
        let eer = gv.evaluation.exploitation.mean_eer;
        let base = r.baseline.exploitation.mean_eer;
        let good =
            count as f64 <= MAX_FEATURE_FRACTION * dim as f64 && eer <= base + REDUNDANCY_SLACK;
        ok += usize::from(good);
        rows.push(format!("{count}/{dim} EER {eer:.4} vs {base:.4}"));
    }
    verdict(
        "redundancy",
        ok >= MIN_REPS,
        format!(
            "{ok}/{} replications satisfy: {}",
            results.len(),
            rows.join("; ")
        ),
    )
}

fn transfer(results: &[ReplicationResult]) -> Verdict {
    let t = |s: Strategy| {
        mean(
            results
                .iter()
                .map(|r| r.strategies[&s].evaluation.transfer["target"].mean_eer),
        )
    };
    let (gv, nv) = (t(Strategy::Gv), t(Strategy::Nv));
    let base = mean(
        results
            .iter()
            .map(|r| r.baseline.transfer["target"].mean_eer),
    );
    verdict(
        "transfer",
        gv <= nv,
        format!("mean target EER GV {gv:.4} NV {nv:.4} (no selection {base:.4})"),
    )
}

fn determinism() -> Verdict {
    let ws = generate(&desk_spec()).unwrap();
    let exp = Experiment::new(desk_config(1, 4), ws, Vec::new()).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        cmd_optimize(&exp, &Strategy::ALL, d.path()).unwrap();
    }
    let mut identical = 0;
    let mut compared = 0;
    for s in Strategy::ALL {
        let rel = format!("optimize/{s}/rep0/trace.csv");
        let a = std::fs::read(dirs[0].path().join(&rel)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&rel)).unwrap();
        compared += 1;
        identical += usize::from(!a.is_empty() && a == b);
    }
    verdict(
        "determinism",
        identical == compared,
        format!("{identical}/{compared} trace.csv files byte-identical"),
    )
}

fn main() -> ExitCode {
    let mut verdicts = vec![
        dt_oracle(),
        transfer_checks(),
        eer_oracle(),
        trainer_contract(),
        cnn_consistency(),
        archive_correctness(),
    ];
    let (results, elapsed) = desk_experiment();
    verdicts.push(overfitting_ordering(&results, elapsed));
    verdicts.push(redundancy(&results, 64));
    verdicts.push(transfer(&results));
    verdicts.push(determinism());

    let mut failed = 0;
    for v in &verdicts {
        println!(
            "{} {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!(
        "{} of {} criteria passed",
        verdicts.len() - failed,
        verdicts.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
