//! Non-parametric link prediction for sequences of graph snapshots.
//!
//! The pipeline: ingest a timestamped edge list into a [`GraphSequence`],
//! summarize each node's neighborhood evolution as a sparse [`Datacube`] of
//! binned pair features, weight historical datacubes by a total-variation
//! kernel, and estimate the probability that an edge appears at the next
//! timestep. An optional bit-sampling [`LshIndex`] retrieves the closest
//! datacubes in sublinear time. The [`eval`] module scores the estimator
//! against classical heuristics (last-link, common neighbors, Adamic/Adar,
//! truncated Katz, random) with per-node AUC, and [`simgen`] produces the
//! seasonal benchmark graphs used by the test suite.

pub mod baselines;
pub mod datacube;
mod error;
pub mod eval;
pub mod graph;
pub mod kernel;
pub mod lsh;
pub mod simgen;
mod util;

pub use baselines::{
    katz_scores_from, score_adamic_adar, score_common_neighbors, score_katz, score_last_link,
    score_random,
};
pub use datacube::{build_datacube, log_bin, pair_features, CellCounts, Datacube, PairFeature};
pub use error::{Error, Result};
pub use eval::{auc, candidate_set, evaluate, EvalConfig, EvalReport, EvalTask, Method};
pub use graph::{
    load_edge_list, write_edge_list, EdgeListOptions, GraphSequence, NeighborhoodSubgraph, NodeId,
    Snapshot,
};
pub use kernel::{
    datacube_distance, kernel_weight, predict, tv_normal, CellPosterior, CubeKey, CubeStore,
    KernelConfig, NpModel,
};
pub use lsh::{encode_cell, CellCode, LshIndex, LshParams, QueryResult};
pub use simgen::{expected_edges, generate, SimConfig};
