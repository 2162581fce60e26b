//! Experiment orchestration: building the per-replication fitness contexts,
//! the no-selection baseline, the NV/PV/GV comparison with transfer
//! evaluation, and the command entry points behind the CLI.

mod commands;
mod config;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use commands::{cmd_baseline, cmd_eval, cmd_gen, cmd_optimize, MaskFile, RepSummary};
pub use config::{ExperimentConfig, QueryProtocol, TrainingProtocol, TransferTarget};
pub use report::{cmd_report, ReportRow};

use crate::bpso::{run_trajectory, ConvergenceTrace, Strategy, StrategyOutcome, WrapperContext};
use crate::dichotomy::{
    build_optimization_queries, build_training_set, QueryPlan, TrainingPairing,
};
use crate::domain::{DatasetManifest, EvalSplit, FeatureMask, WriterSet};
use crate::error::{Error, Result};
use crate::metrics::EerReport;
use crate::prototype::condense;
use crate::synthetic::split;

/// A configuration with its data loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub data: WriterSet,
    pub targets: Vec<(String, WriterSet)>,
}

impl Experiment {
    pub fn new(
        config: ExperimentConfig,
        data: WriterSet,
        targets: Vec<(String, WriterSet)>,
    ) -> Result<Self> {
        config.validate()?;
        for (name, t) in &targets {
            if t.dim() != data.dim() {
                return Err(Error::Config(format!(
                    "transfer target {name} has dimension {}, source has {}",
                    t.dim(),
                    data.dim()
                )));
            }
        }
        Ok(Self {
            config,
            data,
            targets,
        })
    }

    /// Reads the dataset and transfer targets named by the config and checks
    /// them against their manifests when given.
    pub fn load(config: ExperimentConfig) -> Result<Self> {
        let read =
            |csv: &std::path::Path, manifest: Option<&std::path::Path>| -> Result<WriterSet> {
                let ws = WriterSet::load_csv(csv)?;
                if let Some(m) = manifest {
                    DatasetManifest::load(m)?.check(&ws)?;
                }
                Ok(ws)
            };
        let data = read(&config.dataset, config.manifest.as_deref())?;
        let targets = config
            .transfer
            .iter()
            .map(|t| Ok((t.name.clone(), read(&t.dataset, t.manifest.as_deref())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(config, data, targets)
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// Writer partition, fixed by the master seed for all replications.
    pub fn split(&self) -> Result<EvalSplit> {
        split(&self.data, self.config.split, self.config.seed)
    }

    fn pairing(&self) -> TrainingPairing {
        TrainingPairing {
            references: self.config.references,
            genuine_per_writer: self.config.training.genuine_per_writer,
            random_forgeries_per_writer: self.config.training.random_forgeries_per_writer,
        }
    }

    fn plan(&self) -> QueryPlan {
        QueryPlan {
            references: self.config.references,
            genuine_queries: self.config.queries.genuine_queries,
            skilled_queries: self.config.queries.skilled_queries,
        }
    }

    /// Builds the training prototypes and every query context of
    /// replication `r`.
    pub fn prepare(&self, split: &EvalSplit, r: usize) -> Result<Replication> {
        split.check_disjoint()?;
        let seed = self.config.replication_seed(r);
        let mut samples = build_training_set(&split.train, self.pairing(), seed)?;
        if !split.validation.is_empty() {
            samples.extend(build_training_set(
                &split.validation,
                self.pairing(),
                seed ^ 0x7A11_DA7E,
            )?);
        }
        let training_samples = samples.len();
        let prototypes = condense(&samples, seed)?;
        let plan = self.plan();
        let opt = WrapperContext::new(
            prototypes.samples,
            &build_optimization_queries(&split.optimization, plan, seed)?,
            self.config.kernel,
            self.config.solver,
        )?;
        let sel = opt.sibling(&build_optimization_queries(&split.selection, plan, seed)?)?;
        let exploitation = opt.sibling(&build_optimization_queries(
            &split.exploitation,
            plan,
            seed,
        )?)?;
        let targets = self
            .targets
            .iter()
            .map(|(name, ws)| {
                Ok((
                    name.clone(),
                    opt.sibling(&build_optimization_queries(ws, plan, seed)?)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Replication {
            index: r,
            seed,
            training_samples,
            opt,
            sel,
            exploitation,
            targets,
        })
    }
}

/// Fitness contexts of one replication. All contexts share one training
/// side, so a mask is trained once however many query sets score it.
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub training_samples: usize,
    pub opt: WrapperContext,
    pub sel: WrapperContext,
    pub exploitation: WrapperContext,
    pub targets: Vec<(String, WrapperContext)>,
}

/// Exploitation and transfer reports of one mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskEvaluation {
    pub features: usize,
    pub exploitation: EerReport,
    pub transfer: BTreeMap<String, EerReport>,
}

impl Replication {
    pub fn prototype_count(&self) -> usize {
        self.opt.prototypes().len()
    }

    pub fn evaluate(&self, mask: &FeatureMask) -> Result<MaskEvaluation> {
        let model = self.opt.train(mask)?;
        let transfer = self
            .targets
            .iter()
            .map(|(name, ctx)| Ok((name.clone(), ctx.queries().report(&model)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(MaskEvaluation {
            features: mask.count(),
            exploitation: self.exploitation.queries().report(&model)?,
            transfer,
        })
    }
}

#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub outcome: StrategyOutcome,
    pub evaluation: MaskEvaluation,
}

#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub index: usize,
    pub seed: u64,
    pub baseline: MaskEvaluation,
    pub trace: ConvergenceTrace,
    pub strategies: BTreeMap<Strategy, StrategyResult>,
}

fn all_replications<T: Send>(
    exp: &Experiment,
    f: impl Fn(&EvalSplit, usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let split = exp.split()?;
    (0..exp.config.replications)
        .into_par_iter()
        .map(|r| f(&split, r))
        .collect()
}

/// All-ones mask on every replication.
pub fn run_baseline(exp: &Experiment) -> Result<Vec<MaskEvaluation>> {
    let ones = FeatureMask::ones(exp.dim());
    all_replications(exp, |split, r| exp.prepare(split, r)?.evaluate(&ones))
}

/// One swarm trajectory per replication, read out by every requested
/// strategy; baseline and strategy masks are evaluated on the exploitation
/// writers and every transfer target.
pub fn run_comparison(exp: &Experiment, strategies: &[Strategy]) -> Result<Vec<ReplicationResult>> {
    all_replications(exp, |split, r| {
        let rep = exp.prepare(split, r)?;
        let config = crate::bpso::IdpsoConfig {
            seed: rep.seed,
            ..exp.config.idpso.clone()
        };
        let traj = run_trajectory(&config, &rep.opt, &rep.sel)?;
        let mut results = BTreeMap::new();
        for &s in strategies {
            let outcome = traj.outcome(s);
            let evaluation = rep.evaluate(&outcome.mask)?;
            results.insert(
                s,
                StrategyResult {
                    outcome,
                    evaluation,
                },
            );
        }
        Ok(ReplicationResult {
            index: r,
            seed: rep.seed,
            baseline: rep.evaluate(&FeatureMask::ones(exp.dim()))?,
            trace: traj.trace,
            strategies: results,
        })
    })
}

/// Mask evaluated on the exploitation writers, or on every writer of
/// `target` when given.
pub fn run_eval(
    exp: &Experiment,
    mask: &FeatureMask,
    target: Option<&WriterSet>,
) -> Result<Vec<EerReport>> {
    mask.validate(exp.dim())?;
    if let Some(t) = target {
        if t.dim() != exp.dim() {
            return Err(Error::Dimension {
                expected: exp.dim(),
                got: t.dim(),
            });
        }
    }
    all_replications(exp, |split, r| {
        let rep = exp.prepare(split, r)?;
        let model = rep.opt.train(mask)?;
        match target {
            None => rep.exploitation.queries().report(&model),
            Some(t) => {
                let bundles = build_optimization_queries(t, exp.plan(), rep.seed)?;
                crate::bpso::QuerySet::new(&bundles)?.report(&model)
            }
        }
    })
}
