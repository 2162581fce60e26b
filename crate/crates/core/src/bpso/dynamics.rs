//! Particle dynamics of binary IDPSO: swarm initialization, velocity update,
//! V-shaped transfer and flip-on-threshold position update, and the adaptive
//! inertia schedule.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::FeatureMask;
use crate::error::{Error, Result};
use crate::seeding::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdpsoConfig {
    pub population: usize,
    pub c1: f64,
    pub c2: f64,
    pub w_initial: f64,
    pub w_final: f64,
    /// Steepness of the logistic that maps a particle's distance to gbest
    /// onto its inertia exponent.
    pub mu: f64,
    pub max_iterations: usize,
    pub v_clamp: f64,
    pub seed: u64,
}

impl Default for IdpsoConfig {
    fn default() -> Self {
        Self {
            population: 20,
            c1: 2.0,
            c2: 2.0,
            w_initial: 0.9,
            w_final: 0.4,
            mu: 100.0,
            max_iterations: 40,
            v_clamp: 6.0,
            seed: 0,
        }
    }
}

impl IdpsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        if self.w_final > self.w_initial {
            return Err(Error::Config("w_final must not exceed w_initial".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.v_clamp > 0.0) {
            return Err(Error::Config("v_clamp must be positive".into()));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::Config(
                "acceleration constants must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: FeatureMask,
    pub velocity: Vec<f64>,
    pub pbest_position: FeatureMask,
    /// Lower is better; infinite until the first evaluation.
    pub pbest_fitness: f64,
}

/// Popcount bands of the initial swarm, scaled from the 2048-feature layout
/// ([500, 1000] and [1500, 2048]) to `dim`.
pub fn init_bands(dim: usize) -> Result<[(usize, usize); 2]> {
    let scale = dim as f64 / 2048.0;
    let low = (
        (500.0 * scale).ceil() as usize,
        (1000.0 * scale).floor() as usize,
    );
    let high = ((1500.0 * scale).ceil() as usize, dim);
    if dim < 2 || low.0 < 1 || low.0 > low.1 || high.0 > high.1 || low.1 >= high.0 {
        return Err(Error::Config(format!(
            "dimension {dim} too small for initialization bands"
        )));
    }
    Ok([low, high])
}

/// First half of the swarm draws its popcount uniformly in the low band, the
/// rest in the high band; set bits are placed uniformly without replacement.
pub fn init_swarm(config: &IdpsoConfig, dim: usize) -> Result<Vec<Particle>> {
    config.validate()?;
    let bands = init_bands(dim)?;
    let mut rng = stream_rng(config.seed, u64::MAX);
    let half = config.population / 2;
    Ok((0..config.population)
        .map(|i| {
            let (lo, hi) = bands[usize::from(i >= half)];
            let count = rng.gen_range(lo..=hi);
            let mut position = FeatureMask::zeros(dim);
            for idx in sample(&mut rng, dim, count) {
                position.set(idx, true);
            }
            let velocity = (0..dim)
                .map(|_| rng.gen_range(-config.v_clamp..=config.v_clamp))
                .collect();
            Particle {
                pbest_position: position.clone(),
                position,
                velocity,
                pbest_fitness: f64::INFINITY,
            }
        })
        .collect())
}

/// V-shaped transfer `|2/pi * atan(pi/2 * v)|`.
pub fn transfer_vshape(v: f64) -> f64 {
    (FRAC_2_PI * (FRAC_PI_2 * v).atan()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Velocity update with explicit cognitive/social random factors.
pub fn velocity_step(
    p: &Particle,
    gbest: &FeatureMask,
    coeffs: Coefficients,
    r_cognitive: f64,
    r_social: f64,
    v_clamp: f64,
) -> Vec<f64> {
    let bit = |m: &FeatureMask, d: usize| m.get(d) as i8 as f64;
    (0..p.velocity.len())
        .map(|d| {
            let x = bit(&p.position, d);
            let v = coeffs.w * p.velocity[d]
                + coeffs.c1 * r_cognitive * (bit(&p.pbest_position, d) - x)
                + coeffs.c2 * r_social * (bit(gbest, d) - x);
            v.clamp(-v_clamp, v_clamp)
        })
        .collect()
}

/// Draws one cognitive and one social factor for the whole particle.
pub fn update_velocity(
    p: &Particle,
    gbest: &FeatureMask,
    coeffs: Coefficients,
    v_clamp: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let r_cognitive: f64 = rng.gen();
    let r_social: f64 = rng.gen();
    velocity_step(p, gbest, coeffs, r_cognitive, r_social, v_clamp)
}

const POSITION_ATTEMPTS: usize = 10;

/// Each bit flips when a fresh uniform draw falls below the transfer value
/// of its velocity. Empty results are redrawn; after the last failed attempt
/// one random bit is set.
pub fn update_position(position: &FeatureMask, v_new: &[f64], rng: &mut impl Rng) -> FeatureMask {
    let probs: Vec<f64> = v_new.iter().map(|&v| transfer_vshape(v)).collect();
    for _ in 0..POSITION_ATTEMPTS {
        let mut next = position.clone();
        for (d, &p) in probs.iter().enumerate() {
            if rng.gen::<f64>() < p {
                next.flip(d);
            }
        }
        if next.count() > 0 {
            return next;
        }
    }
    let mut forced = FeatureMask::zeros(position.len());
    forced.set(rng.gen_range(0..position.len()), true);
    forced
}

/// Swarm quantities the parameter schedule may depend on.
#[derive(Debug, Clone)]
pub struct SwarmState {
    pub gbest: FeatureMask,
    /// Hamming distance of each particle to gbest, divided by the dimension.
    pub distances: Vec<f64>,
}

impl SwarmState {
    pub fn new(particles: &[Particle], gbest: &FeatureMask) -> Self {
        let dim = gbest.len().max(1) as f64;
        let distances = particles
            .iter()
            .map(|p| p.position.hamming(gbest) as f64 / dim)
            .collect();
        Self {
            gbest: gbest.clone(),
            distances,
        }
    }

    pub fn mean_distance(&self) -> f64 {
        if self.distances.is_empty() {
            0.0
        } else {
            self.distances.iter().sum::<f64>() / self.distances.len() as f64
        }
    }
}

/// Per-particle (w, c1, c2) at iteration `t`.
pub trait ParameterSchedule: Sync {
    fn coefficients(
        &self,
        config: &IdpsoConfig,
        t: usize,
        particle: usize,
        state: &SwarmState,
    ) -> Coefficients;
}

/// Inertia decays from `w_initial` to `w_final` as
/// `w_final + (w_initial - w_final) * (1 - t/T)^e`. The exponent
/// `e = 2^(1 - 2s)` with `s = logistic(mu * (d - mean d))` lies in (1/2, 2):
/// particles farther from gbest than the swarm average decay slower and keep
/// exploring, closer ones settle faster. Acceleration constants stay fixed.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdpsoSchedule;

impl IdpsoSchedule {
    pub fn exponent(config: &IdpsoConfig, particle: usize, state: &SwarmState) -> f64 {
        let d = state.distances.get(particle).copied().unwrap_or(0.0);
        let s = 1.0 / (1.0 + (-config.mu * (d - state.mean_distance())).exp());
        2f64.powf(1.0 - 2.0 * s)
    }
}

impl ParameterSchedule for IdpsoSchedule {
    fn coefficients(
        &self,
        config: &IdpsoConfig,
        t: usize,
        particle: usize,
        state: &SwarmState,
    ) -> Coefficients {
        let progress = (t as f64 / config.max_iterations as f64).clamp(0.0, 1.0);
        let e = Self::exponent(config, particle, state);
        let w = config.w_final + (config.w_initial - config.w_final) * (1.0 - progress).powf(e);
        Coefficients {
            w,
            c1: config.c1,
            c2: config.c2,
        }
    }
}

pub fn adapt_params(
    config: &IdpsoConfig,
    t: usize,
    particle: usize,
    state: &SwarmState,
) -> Coefficients {
    IdpsoSchedule.coefficients(config, t, particle, state)
}
