//! Binary IDPSO wrapper feature selection with three ways of picking the
//! returned solution:
//!
//! * `Nv` returns the swarm's global best on the optimization objective.
//! * `Pv` re-scores the last population on the selection objective and
//!   returns its best member.
//! * `Gv` keeps an external archive of every evaluated position ranked on
//!   the selection objective and returns its head.
//!
//! The swarm never sees selection values, so one trajectory serves all three
//! strategies.

mod archive;
mod dynamics;
mod fitness;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use archive::{archive_update, rank, ArchiveEntry, ExternalArchive};
pub use dynamics::{
    adapt_params, init_bands, init_swarm, transfer_vshape, update_position, update_velocity,
    velocity_step, Coefficients, IdpsoConfig, IdpsoSchedule, ParameterSchedule, Particle,
    SwarmState,
};
pub use fitness::{Objective, QuerySet, WrapperContext};

use crate::domain::FeatureMask;
use crate::error::{Error, Result};
use crate::seeding::{stream_id, stream_rng};
use fitness::FitnessCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Nv,
    Pv,
    Gv,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Nv, Strategy::Pv, Strategy::Gv];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Nv => "nv",
            Strategy::Pv => "pv",
            Strategy::Gv => "gv",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nv" => Ok(Strategy::Nv),
            "pv" => Ok(Strategy::Pv),
            "gv" => Ok(Strategy::Gv),
            other => Err(Error::Config(format!(
                "unknown strategy '{other}' (expected nv, pv or gv)"
            ))),
        }
    }
}

/// A position with both objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub mask: FeatureMask,
    pub opt_fitness: f64,
    pub sel_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub iteration: usize,
    pub particle: usize,
    pub candidate: Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// gbest value on the optimization objective.
    pub best_opt_eer: f64,
    /// Best selection value in the current population.
    pub best_sel_eer: f64,
    pub archive_best_eer: f64,
    pub mean_popcount: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `trace.csv`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iteration",
            "best_opt_eer",
            "best_sel_eer",
            "archive_best_eer",
            "mean_popcount",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.iteration.to_string(),
                r.best_opt_eer.to_string(),
                r.best_sel_eer.to_string(),
                r.archive_best_eer.to_string(),
                r.mean_popcount.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub mask: FeatureMask,
    pub opt_fitness: f64,
    pub sel_fitness: f64,
    /// Selection value of the returned mask minus the best selection value
    /// among all evaluated positions.
    pub gap: f64,
}

/// Everything one swarm run produced.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub trace: ConvergenceTrace,
    pub log: Vec<EvaluationRecord>,
    pub gbest: Candidate,
    pub last_population: Vec<Candidate>,
    pub archive: ExternalArchive,
}

impl Trajectory {
    pub fn best_logged_selection(&self) -> f64 {
        self.log
            .iter()
            .map(|r| r.candidate.sel_fitness)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn select(&self, strategy: Strategy) -> Candidate {
        match strategy {
            Strategy::Nv => self.gbest.clone(),
            Strategy::Pv => self
                .last_population
                .iter()
                .min_by(|a, b| rank(&a.mask, a.sel_fitness, &b.mask, b.sel_fitness))
                .expect("population is nonempty")
                .clone(),
            Strategy::Gv => {
                let head = self
                    .archive
                    .head()
                    .expect("archive holds the initial population");
                let opt_fitness = self
                    .log
                    .iter()
                    .find(|r| r.candidate.mask == head.mask)
                    .map_or(f64::NAN, |r| r.candidate.opt_fitness);
                Candidate {
                    mask: head.mask.clone(),
                    opt_fitness,
                    sel_fitness: head.selection_fitness,
                }
            }
        }
    }

    pub fn outcome(&self, strategy: Strategy) -> StrategyOutcome {
        let c = self.select(strategy);
        StrategyOutcome {
            strategy,
            gap: c.sel_fitness - self.best_logged_selection(),
            mask: c.mask,
            opt_fitness: c.opt_fitness,
            sel_fitness: c.sel_fitness,
        }
    }
}

fn check_objectives(opt: &dyn Objective, sel: &dyn Objective) -> Result<usize> {
    let shared: Vec<_> = opt
        .writers()
        .intersection(&sel.writers())
        .copied()
        .collect();
    if !shared.is_empty() {
        return Err(Error::Protocol(format!(
            "optimization and selection objectives share writers {shared:?}"
        )));
    }
    if opt.dim() != sel.dim() {
        return Err(Error::Dimension {
            expected: opt.dim(),
            got: sel.dim(),
        });
    }
    Ok(opt.dim())
}

pub fn run_trajectory(
    config: &IdpsoConfig,
    opt: &dyn Objective,
    sel: &dyn Objective,
) -> Result<Trajectory> {
    run_trajectory_with(config, &IdpsoSchedule, opt, sel)
}

/// Runs the swarm for `max_iterations` rounds. Round 0 evaluates the initial
/// population; every later round moves all particles once. Each round scores
/// the population on both objectives and merges it into the archive.
pub fn run_trajectory_with(
    config: &IdpsoConfig,
    schedule: &dyn ParameterSchedule,
    opt: &dyn Objective,
    sel: &dyn Objective,
) -> Result<Trajectory> {
    config.validate()?;
    let dim = check_objectives(opt, sel)?;
    let mut particles = init_swarm(config, dim)?;
    let mut opt_cache = FitnessCache::new(opt);
    let mut sel_cache = FitnessCache::new(sel);
    let mut archive = ExternalArchive::new(config.population);
    let mut log = Vec::new();
    let mut trace = ConvergenceTrace::default();
    let mut gbest: Option<Candidate> = None;
    let mut population = Vec::new();

    for t in 0..config.max_iterations {
        if t > 0 {
            let g = &gbest.as_ref().expect("set in round 0").mask;
            let state = SwarmState::new(&particles, g);
            for (i, p) in particles.iter_mut().enumerate() {
                let mut rng = stream_rng(config.seed, stream_id(t as u64, i as u64));
                let coeffs = schedule.coefficients(config, t, i, &state);
                let v = update_velocity(p, g, coeffs, config.v_clamp, &mut rng);
                p.position = update_position(&p.position, &v, &mut rng);
                p.velocity = v;
            }
        }

        let positions: Vec<FeatureMask> = particles.iter().map(|p| p.position.clone()).collect();
        let opt_f = opt_cache.evaluate_all(&positions);
        let sel_f = sel_cache.evaluate_all(&positions);

        population.clear();
        for (i, p) in particles.iter_mut().enumerate() {
            let c = Candidate {
                mask: positions[i].clone(),
                opt_fitness: opt_f[i],
                sel_fitness: sel_f[i],
            };
            if c.opt_fitness < p.pbest_fitness {
                p.pbest_fitness = c.opt_fitness;
                p.pbest_position = c.mask.clone();
            }
            let improves = gbest.as_ref().is_none_or(|g| c.opt_fitness < g.opt_fitness);
            if improves && (c.opt_fitness.is_finite() || gbest.is_none()) {
                gbest = Some(c.clone());
            }
            log.push(EvaluationRecord {
                iteration: t,
                particle: i,
                candidate: c.clone(),
            });
            population.push(c);
        }

        let scored: Vec<(FeatureMask, f64)> = population
            .iter()
            .map(|c| (c.mask.clone(), c.sel_fitness))
            .collect();
        archive = archive_update(&archive, &scored);

        let g = gbest.as_ref().expect("population is nonempty");
        trace.rows.push(TraceRow {
            iteration: t,
            best_opt_eer: g.opt_fitness,
            best_sel_eer: sel_f.iter().copied().fold(f64::INFINITY, f64::min),
            archive_best_eer: archive
                .head()
                .map_or(f64::INFINITY, |h| h.selection_fitness),
            mean_popcount: positions.iter().map(|m| m.count() as f64).sum::<f64>()
                / positions.len() as f64,
        });
    }

    Ok(Trajectory {
        trace,
        log,
        gbest: gbest.expect("at least one round"),
        last_population: population,
        archive,
    })
}

/// One strategy's result and the convergence trace of its run.
pub fn run(
    config: &IdpsoConfig,
    strategy: Strategy,
    opt: &dyn Objective,
    sel: &dyn Objective,
) -> Result<(StrategyOutcome, ConvergenceTrace)> {
    let traj = run_trajectory(config, opt, sel)?;
    Ok((traj.outcome(strategy), traj.trace))
}
