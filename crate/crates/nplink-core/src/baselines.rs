//! Heuristic link scorers: LastLink, CommonNeighbors, Adamic/Adar, truncated
//! Katz, and a seeded random ranker. All of them view the graph undirected
//! and score `(i, j)` for a link at time `t_test` from training snapshots
//! `0 .. t_test−1` only. Higher score means "more likely to link".

use crate::graph::{GraphSequence, NodeId};
use crate::util::{splitmix64, unit_f64};

/// Stand-in for −∞ when a pair was never linked; orders below every real age.
pub const NEVER_LINKED: f64 = -1e18;

/// Negated age of the most recent undirected `i ~ j` link in the full
/// training history, or [`NEVER_LINKED`].
pub fn score_last_link(seq: &GraphSequence, i: NodeId, j: NodeId, t_test: usize) -> f64 {
    for t in (0..t_test).rev() {
        let snap = seq.snapshot(t);
        if snap.has_edge(i, j) || snap.has_edge(j, i) {
            return -((t_test - 1 - t) as f64);
        }
    }
    NEVER_LINKED
}

/// Common-neighbor count in the last training snapshot.
pub fn score_common_neighbors(seq: &GraphSequence, i: NodeId, j: NodeId, t_test: usize) -> f64 {
    seq.snapshot(t_test - 1).common_neighbors(i, j) as f64
}

/// Adamic/Adar: common neighbors weighted by inverse log degree. Neighbors
/// of degree ≤ 1 are skipped (`ln 1 = 0`).
pub fn score_adamic_adar(seq: &GraphSequence, i: NodeId, j: NodeId, t_test: usize) -> f64 {
    let snap = seq.snapshot(t_test - 1);
    let (a, b) = (snap.und_neighbors(i), snap.und_neighbors(j));
    let (mut x, mut y, mut score) = (0, 0, 0.0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                let deg = snap.degree(a[x]);
                if deg > 1 {
                    score += 1.0 / (deg as f64).ln();
                }
                x += 1;
                y += 1;
            }
        }
    }
    score
}

/// Truncated Katz: `Σ_{ℓ=1..L} β^ℓ · #walks_ℓ(i → j)` over the undirected
/// last training snapshot.
pub fn score_katz(
    seq: &GraphSequence,
    i: NodeId,
    j: NodeId,
    t_test: usize,
    beta: f64,
    max_len: usize,
) -> f64 {
    katz_scores_from(seq, i, t_test, beta, max_len)[j as usize]
}

/// Katz scores from `i` to every node at once, by repeated sparse adjacency
/// application.
pub fn katz_scores_from(
    seq: &GraphSequence,
    i: NodeId,
    t_test: usize,
    beta: f64,
    max_len: usize,
) -> Vec<f64> {
    assert!(beta > 0.0 && max_len >= 1);
    let snap = seq.snapshot(t_test - 1);
    let n = seq.node_count();
    let mut walks = vec![0.0f64; n];
    walks[i as usize] = 1.0;
    let mut total = vec![0.0f64; n];
    let mut weight = 1.0;
    for _ in 0..max_len {
        let mut next = vec![0.0f64; n];
        for (u, &w) in walks.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &v in snap.und_neighbors(u as NodeId) {
                next[v as usize] += w;
            }
        }
        weight *= beta;
        for (slot, w) in total.iter_mut().zip(&next) {
            *slot += weight * w;
        }
        walks = next;
    }
    total
}

/// Deterministic pseudo-random score in `[0, 1)` from `(i, j, seed)`.
pub fn score_random(i: NodeId, j: NodeId, seed: u64) -> f64 {
    unit_f64(splitmix64(splitmix64(seed) ^ ((i as u64) << 32 | j as u64)))
}
