//! Shared fixtures for the pipeline benchmarks.

use nplink_core::{generate, CubeStore, GraphSequence, SimConfig};

/// Default lag used by the fixtures.
pub const LAG: usize = 3;

/// A mid-sized seasonal sequence for benchmark fixtures.
pub fn benchmark_sequence(n: usize, timesteps: usize) -> GraphSequence {
    let cfg = SimConfig {
        n,
        timesteps,
        phi: 0.3,
        seasons: 3,
        features: 20,
        noise: 0.002,
        seed: 42,
    };
    generate(&cfg).expect("valid benchmark config")
}

/// All training datacubes of a sequence through its second-to-last snapshot.
pub fn cube_store(seq: &GraphSequence) -> CubeStore {
    CubeStore::build(seq, LAG, 400, LAG, seq.len() - 2).expect("store builds")
}
