//! Wrapper fitness: train the dissimilarity SVM on the masked prototypes,
//! score a query set with MAX-fused signed distances and return the mean
//! user EER.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::dichotomy::{fuse_max, DissimilaritySample, QueryBundle, Truth};
use crate::domain::{FeatureMask, WriterId};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_user_eer, EerReport, ScoredQuery};
use crate::svm::{train_with, KernelParams, SolverConfig, TrainedModel};

/// Something a swarm can minimize. Evaluation failures map to `+inf`.
pub trait Objective: Sync {
    fn evaluate(&self, mask: &FeatureMask) -> f64;
    /// Length of the masks this objective accepts.
    fn dim(&self) -> usize;
    /// Writers whose signatures drive the value; used to check that the
    /// optimization and selection objectives are disjoint.
    fn writers(&self) -> BTreeSet<WriterId>;
}

struct PreparedQuery {
    writer: WriterId,
    truth: Truth,
    /// One full-length dissimilarity vector per reference.
    pairs: Vec<Vec<f64>>,
}

/// Query bundles with their dissimilarity vectors computed once.
pub struct QuerySet {
    queries: Vec<PreparedQuery>,
    writers: BTreeSet<WriterId>,
}

impl QuerySet {
    pub fn new(bundles: &[QueryBundle]) -> Result<Self> {
        let mut queries = Vec::with_capacity(bundles.len());
        for b in bundles {
            b.check()?;
            queries.push(PreparedQuery {
                writer: b.claimed_writer,
                truth: b.truth,
                pairs: b.dissimilarities()?,
            });
        }
        let writers = queries.iter().map(|q| q.writer).collect();
        Ok(Self { queries, writers })
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn writers(&self) -> &BTreeSet<WriterId> {
        &self.writers
    }

    pub fn score(&self, model: &TrainedModel) -> Result<Vec<ScoredQuery>> {
        self.queries
            .iter()
            .map(|q| {
                let d = q
                    .pairs
                    .iter()
                    .map(|u| model.signed_distance(u))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ScoredQuery {
                    writer_id: q.writer,
                    truth: q.truth,
                    score: fuse_max(&d)?,
                })
            })
            .collect()
    }

    pub fn report(&self, model: &TrainedModel) -> Result<EerReport> {
        evaluate_user_eer(&self.score(model)?)
    }
}

/// Recently trained models keyed by mask. Contexts sharing a training side
/// evaluate the same masks back to back, so a small FIFO avoids retraining.
struct ModelCache {
    capacity: usize,
    order: VecDeque<FeatureMask>,
    models: HashMap<FeatureMask, Option<Arc<TrainedModel>>>,
}

impl ModelCache {
    fn get(&self, mask: &FeatureMask) -> Option<Option<Arc<TrainedModel>>> {
        self.models.get(mask).cloned()
    }

    fn put(&mut self, mask: FeatureMask, model: Option<Arc<TrainedModel>>) {
        if self.models.insert(mask.clone(), model).is_none() {
            self.order.push_back(mask);
            while self.order.len() > self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.models.remove(&old);
                }
            }
        }
    }
}

struct TrainingSide {
    prototypes: Vec<DissimilaritySample>,
    kernel: KernelParams,
    solver: SolverConfig,
    cache: Mutex<ModelCache>,
}

/// Fitness context: a training side (possibly shared with sibling contexts)
/// and the query set the mask is judged on.
pub struct WrapperContext {
    training: Arc<TrainingSide>,
    queries: QuerySet,
}

const MODEL_CACHE: usize = 64;

impl WrapperContext {
    pub fn new(
        prototypes: Vec<DissimilaritySample>,
        bundles: &[QueryBundle],
        kernel: KernelParams,
        solver: SolverConfig,
    ) -> Result<Self> {
        kernel.validate()?;
        if prototypes.is_empty() {
            return Err(Error::Training("no prototypes".into()));
        }
        let cache = ModelCache {
            capacity: MODEL_CACHE,
            order: VecDeque::new(),
            models: HashMap::new(),
        };
        Ok(Self {
            training: Arc::new(TrainingSide {
                prototypes,
                kernel,
                solver,
                cache: Mutex::new(cache),
            }),
            queries: QuerySet::new(bundles)?,
        })
    }

    /// A context on other queries that reuses this context's training side
    /// and model cache.
    pub fn sibling(&self, bundles: &[QueryBundle]) -> Result<Self> {
        Ok(Self {
            training: Arc::clone(&self.training),
            queries: QuerySet::new(bundles)?,
        })
    }

    pub fn queries(&self) -> &QuerySet {
        &self.queries
    }

    pub fn prototypes(&self) -> &[DissimilaritySample] {
        &self.training.prototypes
    }

    pub fn train(&self, mask: &FeatureMask) -> Result<Arc<TrainedModel>> {
        let cached = self
            .training
            .cache
            .lock()
            .expect("model cache poisoned")
            .get(mask);
        match cached {
            Some(Some(model)) => return Ok(model),
            Some(None) => {
                return Err(Error::Training(format!(
                    "mask {} failed to train",
                    mask.to_hex()
                )))
            }
            None => {}
        }
        let t = &self.training;
        let result = train_with(&t.prototypes, t.kernel, mask, &t.solver).map(Arc::new);
        let entry = result.as_ref().ok().cloned();
        t.cache
            .lock()
            .expect("model cache poisoned")
            .put(mask.clone(), entry);
        result
    }

    pub fn report(&self, mask: &FeatureMask) -> Result<EerReport> {
        let model = self.train(mask)?;
        self.queries.report(&model)
    }
}

impl Objective for WrapperContext {
    fn evaluate(&self, mask: &FeatureMask) -> f64 {
        match self.report(mask) {
            Ok(r) => r.mean_eer,
            Err(_) => f64::INFINITY,
        }
    }

    fn dim(&self) -> usize {
        self.training.prototypes[0].u.len()
    }

    fn writers(&self) -> BTreeSet<WriterId> {
        self.queries.writers().clone()
    }
}

/// Memoizes an objective by mask for the lifetime of one run.
pub(crate) struct FitnessCache<'a> {
    objective: &'a dyn Objective,
    values: HashMap<FeatureMask, f64>,
}

impl<'a> FitnessCache<'a> {
    pub(crate) fn new(objective: &'a dyn Objective) -> Self {
        Self {
            objective,
            values: HashMap::new(),
        }
    }

    /// Values for `masks`, evaluating unseen ones in parallel.
    pub(crate) fn evaluate_all(&mut self, masks: &[FeatureMask]) -> Vec<f64> {
        use rayon::prelude::*;
        let mut fresh: Vec<FeatureMask> = Vec::new();
        let mut pending = std::collections::HashSet::new();
        for m in masks {
            if !self.values.contains_key(m) && pending.insert(m.clone()) {
                fresh.push(m.clone());
            }
        }
        let objective = self.objective;
        let computed: Vec<f64> = fresh.par_iter().map(|m| objective.evaluate(m)).collect();
        self.values.extend(fresh.into_iter().zip(computed));
        masks.iter().map(|m| self.values[m]).collect()
    }
}
