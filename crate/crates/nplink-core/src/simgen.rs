//! Seasonal synthetic graph sequences.
//!
//! Time moves over a repeating cycle of seasons (season of timestep `t` is
//! `t mod seasons`). The latent feature universe holds `F` features per
//! season, assigned round-robin: feature `f` is active in season
//! `f mod seasons`. Every node independently draws a feature vector with one
//! uniform component per season, so each node belongs to one block in every
//! season. At timestep `t`, an ordered pair whose endpoints share the
//! feature active in the current season links with probability `φ`; every
//! other pair links with the baseline noise probability `ε`.
//!
//! Because every node also has blocks in the other seasons, its most recent
//! links usually point at the wrong season's partners — the trap that
//! defeats recency heuristics. With `seasons = 1` the cycle degenerates to
//! one fixed block per node, the stationary variant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{GraphSequence, NodeId};
use crate::{Error, Result};

/// Generator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub timesteps: usize,
    /// Seasonality strength: in-block link probability.
    pub phi: f64,
    pub seasons: usize,
    /// Latent features per season (block count of each season).
    pub features: usize,
    /// Baseline noise link probability.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n: 50, timesteps: 10, phi: 0.5, seasons: 3, features: 6, noise: 0.005, seed: 0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.timesteps == 0 {
            return Err(Error::InvalidParameter("need n ≥ 1 and timesteps ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::InvalidParameter(format!("phi must lie in [0,1], got {}", self.phi)));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidParameter(format!(
                "noise must lie in [0,1], got {}",
                self.noise
            )));
        }
        if self.seasons == 0 {
            return Err(Error::InvalidParameter("need at least one season".into()));
        }
        if self.features < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two features per season, got {}",
                self.features
            )));
        }
        Ok(())
    }
}

/// Feature vectors: component `σ` is the node's block index within season
/// `σ`'s pool of `f` features.
fn draw_features(rng: &mut ChaCha8Rng, n: usize, seasons: usize, f: usize) -> Vec<Vec<usize>> {
    (0..n).map(|_| (0..seasons).map(|_| rng.random_range(0..f)).collect()).collect()
}

/// Generate a sequence; bit-for-bit reproducible from the seed.
pub fn generate(cfg: &SimConfig) -> Result<GraphSequence> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let features = draw_features(&mut rng, cfg.n, cfg.seasons, cfg.features);

    let mut per_t: Vec<Vec<(NodeId, NodeId)>> = Vec::with_capacity(cfg.timesteps);
    for t in 0..cfg.timesteps {
        let season = t % cfg.seasons;
        let mut edges = Vec::new();
        for i in 0..cfg.n {
            for j in 0..cfg.n {
                if i == j {
                    continue;
                }
                let in_block = features[i][season] == features[j][season];
                let p = if in_block { cfg.phi } else { cfg.noise };
                if rng.random::<f64>() < p {
                    edges.push((i as NodeId, j as NodeId));
                }
            }
        }
        per_t.push(edges);
    }
    Ok(GraphSequence::from_snapshot_edges(cfg.n, per_t))
}

/// Closed-form expected edge count of snapshot `t` under the generator,
/// marginalizing over the feature assignment. Two independent draws share
/// the active-season block with probability `1/F`, at every timestep.
pub fn expected_edges(cfg: &SimConfig, _t: usize) -> f64 {
    let q = 1.0 / cfg.features as f64;
    let pairs = (cfg.n * (cfg.n - 1)) as f64;
    pairs * (q * cfg.phi + (1.0 - q) * cfg.noise)
}
