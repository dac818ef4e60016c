//! Neighboring region search: harmonic-step weight increases that push
//! traffic off both congested and nearly idle links.

use thiserror::Error;

use crate::routing::{EcmpLoads, RoutingError};
use crate::topology::Topology;
use crate::traffic::TrafficMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("beta must lie in (0, 1], got {0}")]
    Beta(f64),
    #[error("sleep fraction must lie in (0, 1), got {0}")]
    SleepFraction(f64),
    #[error("iterations must be at least 1")]
    Iterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Maximum allowed link utilization.
    pub beta: f64,
    /// Links at or below `sleep_fraction * beta` count as sleeping.
    pub sleep_fraction: f64,
    pub iterations: usize,
    /// When pruning fails, try the next least-utilized link instead of
    /// stopping.
    pub try_next_on_failure: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { beta: 0.8, sleep_fraction: 0.3, iterations: 10_000, try_next_on_failure: false }
    }
}

impl SearchConfig {
    pub fn with_beta(beta: f64) -> Self {
        SearchConfig { beta, ..Self::default() }
    }

    pub fn iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(ConfigError::Beta(self.beta));
        }
        if !(self.sleep_fraction > 0.0 && self.sleep_fraction < 1.0) {
            return Err(ConfigError::SleepFraction(self.sleep_fraction));
        }
        if self.iterations == 0 {
            return Err(ConfigError::Iterations);
        }
        Ok(())
    }
}

/// Runs `cfg.iterations` rounds of: route with ECMP on the current weights,
/// then add `1/i` to the weight of every active link whose utilization is
/// `<= sleep_fraction * beta` or `>= beta`. Returns the final weight vector
/// (one entry per directed link); the topology itself is left untouched.
pub fn neighboring_region_search(
    topo: &Topology,
    tm: &TrafficMatrix,
    cfg: &SearchConfig,
) -> Result<Vec<f64>, RoutingError> {
    let mut work = topo.clone();
    let mut weights = topo.weights();
    let sleeping = cfg.sleep_fraction * cfg.beta;
    let mut loader = EcmpLoads::default();
    for i in 1..=cfg.iterations {
        let loads = loader.route(&work, tm)?;
        let step = 1.0 / i as f64;
        for link in work.links() {
            if !link.active {
                continue;
            }
            let u = loads[link.id.0] / link.capacity;
            if u <= sleeping || u >= cfg.beta {
                weights[link.id.0] += step;
            }
        }
        work.set_weights(&weights).expect("weights sized from topology");
    }
    Ok(weights)
}
