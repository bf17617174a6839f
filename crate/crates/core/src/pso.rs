//! Particle swarm minimizer with linearly decaying inertia and box
//! bounds, generic over the objective.
//!
//! Determinism contract: all random numbers for an iteration are drawn
//! before the fitness evaluations are dispatched, in particle-major,
//! dimension-minor order with the cognitive draw before the social draw;
//! evaluations may run concurrently but bests are reduced in fixed
//! particle order, so a given seed yields bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsoError {
    #[error("swarm config invalid: {0}")]
    InvalidConfig(String),
    #[error("iteration {0} outside the schedule 0..{1}")]
    IterationOutOfRange(usize, usize),
}

/// Swarm size, rates, inertia schedule, bounds, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub n_particles: usize,
    pub n_iterations: usize,
    /// Cognitive learning rate.
    pub c1: f64,
    /// Social learning rate.
    pub c2: f64,
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub seed: u64,
    /// Per-dimension [lo, hi] box.
    pub bounds: Vec<(f64, f64)>,
    /// Per-dimension velocity cap; `None` defaults to 0.2 * (hi - lo).
    pub v_max: Option<Vec<f64>>,
}

impl SwarmConfig {
    /// Defaults: 30 particles, 200 iterations, rates (0.5, 1.0), inertia
    /// 0.9 -> 0.1.
    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        SwarmConfig {
            n_particles: 30,
            n_iterations: 200,
            c1: 0.5,
            c2: 1.0,
            inertia_start: 0.9,
            inertia_end: 0.1,
            seed,
            bounds,
            v_max: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<(), PsoError> {
        if self.n_particles == 0 || self.n_iterations == 0 {
            return Err(PsoError::InvalidConfig(
                "swarm size and iteration count must be positive".to_string(),
            ));
        }
        if self.bounds.is_empty() {
            return Err(PsoError::InvalidConfig("no search dimensions".to_string()));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(PsoError::InvalidConfig(format!(
                    "bound [{lo}, {hi}] must satisfy lo < hi"
                )));
            }
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(PsoError::InvalidConfig(
                "learning rates must be nonnegative".to_string(),
            ));
        }
        if let Some(v) = &self.v_max {
            if v.len() != self.bounds.len() || !v.iter().all(|&x| x.is_finite() && x > 0.0) {
                return Err(PsoError::InvalidConfig(
                    "v_max must be positive per dimension".to_string(),
                ));
            }
        }
        Ok(())
    }

    fn velocity_caps(&self) -> Vec<f64> {
        match &self.v_max {
            Some(v) => v.clone(),
            None => self.bounds.iter().map(|(lo, hi)| 0.2 * (hi - lo)).collect(),
        }
    }
}

/// Linear inertia schedule from `inertia_start` at iteration 0 to
/// `inertia_end` at the final iteration.
pub fn inertia_at(iteration: usize, cfg: &SwarmConfig) -> Result<f64, PsoError> {
    if iteration >= cfg.n_iterations {
        return Err(PsoError::IterationOutOfRange(iteration, cfg.n_iterations));
    }
    if cfg.n_iterations == 1 {
        return Ok(cfg.inertia_start);
    }
    let frac = iteration as f64 / (cfg.n_iterations - 1) as f64;
    Ok(cfg.inertia_start + (cfg.inertia_end - cfg.inertia_start) * frac)
}

/// Minimization result: best position/value plus the running-best value
/// after initialization and after each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub history: Vec<f64>,
}

/// Runs the swarm on `objective` over the configured box.
///
/// Velocities start at zero; positions are clamped to the box with the
/// violating velocity component zeroed; non-finite objective values are
/// treated as +inf with a logged warning.
pub fn pso_minimize<F>(objective: F, cfg: &SwarmConfig) -> Result<PsoResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let dim = cfg.dim();
    let v_max = cfg.velocity_caps();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut positions: Vec<Vec<f64>> = (0..cfg.n_particles)
        .map(|_| {
            cfg.bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
                .collect()
        })
        .collect();
    let mut velocities = vec![vec![0.0; dim]; cfg.n_particles];

    let sanitize = |x: &[f64], v: f64| -> f64 {
        if v.is_finite() {
            v
        } else {
            log::warn!("objective returned a non-finite value at {x:?}; treating as +inf");
            f64::INFINITY
        }
    };
    let evaluate = |positions: &[Vec<f64>]| -> Vec<f64> {
        positions
            .par_iter()
            .map(|x| sanitize(x, objective(x)))
            .collect()
    };

    let mut values = evaluate(&positions);
    let mut pbest = positions.clone();
    let mut pbest_values = values.clone();
    let gbest_idx = pbest_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| {
            if v < acc.1 {
                (i, v)
            } else {
                acc
            }
        })
        .0;
    let mut gbest = pbest[gbest_idx].clone();
    let mut gbest_value = pbest_values[gbest_idx];
    let mut history = Vec::with_capacity(cfg.n_iterations + 1);
    history.push(gbest_value);

    for iteration in 0..cfg.n_iterations {
        let w = inertia_at(iteration, cfg)?;
        for i in 0..cfg.n_particles {
            for d in 0..dim {
                let phi1: f64 = rng.gen();
                let phi2: f64 = rng.gen();
                let x = positions[i][d];
                let mut v = w * velocities[i][d]
                    + cfg.c1 * phi1 * (pbest[i][d] - x)
                    + cfg.c2 * phi2 * (gbest[d] - x);
                v = v.clamp(-v_max[d], v_max[d]);
                let mut xn = x + v;
                let (lo, hi) = cfg.bounds[d];
                if xn < lo {
                    xn = lo;
                    v = 0.0;
                } else if xn > hi {
                    xn = hi;
                    v = 0.0;
                }
                velocities[i][d] = v;
                positions[i][d] = xn;
            }
        }

        values = evaluate(&positions);
        for i in 0..cfg.n_particles {
            if values[i] < pbest_values[i] {
                pbest_values[i] = values[i];
                pbest[i].clone_from(&positions[i]);
            }
        }
        for i in 0..cfg.n_particles {
            if pbest_values[i] < gbest_value {
                gbest_value = pbest_values[i];
                gbest.clone_from(&pbest[i]);
            }
        }
        history.push(gbest_value);
    }

    Ok(PsoResult {
        best_x: gbest,
        best_value: gbest_value,
        history,
    })
}
