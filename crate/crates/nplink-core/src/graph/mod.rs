//! Snapshot sequences and capped 2-hop neighborhood extraction.
//!
//! A [`GraphSequence`] is an ordered list of directed [`Snapshot`]s over a
//! fixed node universe. Hop counting everywhere uses the undirected view
//! (union of in- and out-edges); edge indicators stay directed.

mod io;

pub use io::{load_edge_list, write_edge_list, EdgeListOptions};

use crate::{Error, Result};

/// Dense node identifier in `[0, n)`.
pub type NodeId = u32;

/// One directed graph observed at a single timestep.
///
/// Adjacency lists are sorted and duplicate-free, self-loops are stripped on
/// construction, and `in_adj` is the exact transpose of `out_adj`. The
/// undirected neighbor lists are derived once so degree and common-neighbor
/// lookups stay cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    t: usize,
    n: usize,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    und_adj: Vec<Vec<NodeId>>,
}

impl Snapshot {
    /// Build a snapshot from raw directed edges. Self-loops are dropped,
    /// duplicates collapsed, ids must be `< n`.
    pub fn from_edges(t: usize, n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!((u as usize) < n && (v as usize) < n, "edge ({u},{v}) out of range for n={n}");
            if u == v {
                continue;
            }
            out_adj[u as usize].push(v);
            in_adj[v as usize].push(u);
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let und_adj = (0..n)
            .map(|u| {
                let mut merged = out_adj[u].clone();
                merged.extend_from_slice(&in_adj[u]);
                merged.sort_unstable();
                merged.dedup();
                merged
            })
            .collect();
        Snapshot { t, n, out_adj, in_adj, und_adj }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Directed edge indicator `Y_t(u, v)`.
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u as usize]
    }

    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.in_adj[u as usize]
    }

    /// Unique neighbors over the union of in- and out-edges.
    pub fn und_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.und_adj[u as usize]
    }

    /// Number of unique neighbors of `u`, counting both edge directions.
    pub fn degree(&self, u: NodeId) -> usize {
        self.und_adj[u as usize].len()
    }

    /// `|N¹(u) ∩ N¹(v)|` over undirected 1-hop sets. Endpoints can never
    /// appear in the intersection because self-loops are stripped.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> usize {
        sorted_intersection_len(&self.und_adj[u as usize], &self.und_adj[v as usize])
    }

    /// Total directed edge count.
    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// Directed edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u as NodeId, v)))
    }
}

fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// An ordered sequence of snapshots sharing one node universe.
///
/// Immutable after construction; reads are safe from concurrent workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSequence {
    snapshots: Vec<Snapshot>,
    n: usize,
}

impl GraphSequence {
    /// Build from per-timestep edge lists. `edges_per_t[t]` holds the directed
    /// edges of snapshot `t`.
    pub fn from_snapshot_edges(n: usize, edges_per_t: Vec<Vec<(NodeId, NodeId)>>) -> Self {
        let snapshots = edges_per_t
            .into_iter()
            .enumerate()
            .map(|(t, edges)| Snapshot::from_edges(t, n, edges))
            .collect();
        GraphSequence { snapshots, n }
    }

    /// Number of timesteps `T`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn snapshot(&self, t: usize) -> &Snapshot {
        &self.snapshots[t]
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t >= self.len() {
            return Err(Error::TimestepOutOfRange { t, len: self.len() });
        }
        Ok(())
    }

    /// Timesteps since the directed edge `i → j` last occurred in the window
    /// ending at `t`: 0 if present at `t`, the smallest `a ≤ min(p, t)` with
    /// the edge present at `t − a`, and `p` if it never occurs in the window.
    pub fn last_link_age(&self, i: NodeId, j: NodeId, t: usize, p: usize) -> usize {
        for a in 0..=p.min(t) {
            if self.snapshots[t - a].has_edge(i, j) {
                return a;
            }
        }
        p
    }

    /// Capped neighborhood of `i` in snapshot `t`: BFS to depth 2 over the
    /// undirected view, with the sparse-graph fallback when `i` is isolated
    /// at `t` (seed with nodes adjacent to `i` in snapshots `t−1 .. t−p`,
    /// then their 1-hop closure at `t`). Members are truncated to `r_max`
    /// by ascending BFS layer, then ascending node id.
    pub fn neighborhood(&self, i: NodeId, t: usize, p: usize, r_max: usize) -> Result<NeighborhoodSubgraph> {
        self.check_t(t)?;
        if (i as usize) >= self.n {
            return Err(Error::NodeOutOfRange { id: i, n: self.n });
        }
        assert!(p >= 1, "lag p must be >= 1");
        assert!(r_max >= 1, "r_max must be >= 1");

        let snap = &self.snapshots[t];
        // layer[u]: 0 center, 1 first hop (or fallback seed), 2 second hop
        let mut layer1: Vec<NodeId> = snap.und_neighbors(i).to_vec();
        if layer1.is_empty() {
            let mut seeds = Vec::new();
            for a in 1..=p.min(t) {
                seeds.extend_from_slice(self.snapshots[t - a].und_neighbors(i));
            }
            seeds.sort_unstable();
            seeds.dedup();
            seeds.retain(|&u| u != i);
            layer1 = seeds;
        }

        let mut seen = vec![false; self.n];
        seen[i as usize] = true;
        for &u in &layer1 {
            seen[u as usize] = true;
        }
        let mut layer2: Vec<NodeId> = Vec::new();
        for &u in &layer1 {
            for &v in snap.und_neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    layer2.push(v);
                }
            }
        }
        layer2.sort_unstable();

        let mut members = Vec::with_capacity((1 + layer1.len() + layer2.len()).min(r_max));
        members.push(i);
        for &u in layer1.iter().chain(layer2.iter()) {
            if members.len() == r_max {
                break;
            }
            members.push(u);
        }
        members.sort_unstable();

        let mut edges = Vec::new();
        for &u in &members {
            for &v in snap.out_neighbors(u) {
                if members.binary_search(&v).is_ok() {
                    edges.push((u, v));
                }
            }
        }

        Ok(NeighborhoodSubgraph { center: i, t, members, edges })
    }
}

/// Nodes within 2 undirected hops of a center node at one timestep (capped),
/// plus all snapshot edges among them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodSubgraph {
    pub center: NodeId,
    pub t: usize,
    /// Sorted, duplicate-free, always contains `center`.
    pub members: Vec<NodeId>,
    /// Snapshot-`t` edges restricted to `members`.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl NeighborhoodSubgraph {
    pub fn contains(&self, u: NodeId) -> bool {
        self.members.binary_search(&u).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path_graph() -> GraphSequence {
        // 0 → 1 → 2 → 3 at t = 0
        GraphSequence::from_snapshot_edges(4, vec![vec![(0, 1), (1, 2), (2, 3)]])
    }

    #[test]
    fn neighborhood_depth_two_on_path() {
        let seq = path_graph();
        let nb = seq.neighborhood(0, 0, 1, 400).unwrap();
        assert_eq!(nb.members, vec![0, 1, 2]);
        assert_eq!(nb.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn neighborhood_sparse_fallback_uses_history() {
        // i = 0 isolated at t = 1, but 0 → 7 existed at t = 0.
        let seq = GraphSequence::from_snapshot_edges(8, vec![vec![(0, 7)], vec![(5, 6)]]);
        let nb = seq.neighborhood(0, 1, 1, 400).unwrap();
        assert!(nb.contains(0));
        assert!(nb.contains(7));
    }

    #[test]
    fn neighborhood_fallback_pulls_closure_at_t() {
        // 0 isolated at t=1; past neighbor 3; 3's current neighbor 4 joins as layer 2.
        let seq = GraphSequence::from_snapshot_edges(5, vec![vec![(0, 3)], vec![(3, 4)]]);
        let nb = seq.neighborhood(0, 1, 2, 400).unwrap();
        assert_eq!(nb.members, vec![0, 3, 4]);
        assert_eq!(nb.edges, vec![(3, 4)]);
    }

    #[test]
    fn neighborhood_truncates_star_but_keeps_center() {
        let edges: Vec<(NodeId, NodeId)> = (1..=200).map(|v| (0, v)).collect();
        let seq = GraphSequence::from_snapshot_edges(201, vec![edges]);
        let nb = seq.neighborhood(0, 0, 1, 50).unwrap();
        assert_eq!(nb.members.len(), 50);
        assert!(nb.contains(0));
        // layer-1 ties broken by ascending id
        assert_eq!(nb.members, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn neighborhood_rejects_bad_timestep() {
        let seq = path_graph();
        assert!(matches!(
            seq.neighborhood(0, 3, 1, 10),
            Err(Error::TimestepOutOfRange { t: 3, len: 1 })
        ));
    }

    #[test]
    fn last_link_age_cases() {
        // i → j present at t = 2 only
        let seq = GraphSequence::from_snapshot_edges(2, vec![vec![], vec![], vec![(0, 1)]]);
        assert_eq!(seq.last_link_age(0, 1, 2, 3), 0); // present now
        let seq = GraphSequence::from_snapshot_edges(2, vec![vec![(0, 1)], vec![], vec![]]);
        assert_eq!(seq.last_link_age(0, 1, 2, 3), 2); // two steps back
        let seq = GraphSequence::from_snapshot_edges(2, vec![vec![], vec![], vec![]]);
        assert_eq!(seq.last_link_age(0, 1, 2, 3), 3); // never in window → p
        // lookback capped by t: only one step of history exists
        let seq = GraphSequence::from_snapshot_edges(2, vec![vec![(0, 1)], vec![]]);
        assert_eq!(seq.last_link_age(0, 1, 1, 5), 1);
    }

    #[test]
    fn degree_and_common_neighbors() {
        // triangle 0,1,2 plus a dangling 2 → 3
        let seq = GraphSequence::from_snapshot_edges(4, vec![vec![(0, 1), (1, 2), (2, 0), (2, 3)]]);
        let snap = seq.snapshot(0);
        assert_eq!(snap.degree(0), 2);
        assert_eq!(snap.degree(2), 3);
        assert_eq!(snap.common_neighbors(0, 1), 1); // shared neighbor: node 2
        assert_eq!(snap.common_neighbors(0, 3), 1); // via 2
        assert_eq!(snap.common_neighbors(1, 3), 1);
    }

    #[test]
    fn reciprocal_edges_count_once_in_degree() {
        let seq = GraphSequence::from_snapshot_edges(2, vec![vec![(0, 1), (1, 0)]]);
        assert_eq!(seq.snapshot(0).degree(0), 1);
    }

    #[test]
    fn self_loops_are_stripped() {
        let snap = Snapshot::from_edges(0, 3, vec![(1, 1), (0, 2)]);
        assert_eq!(snap.edge_count(), 1);
        assert_eq!(snap.degree(1), 0);
    }

    // Random sequence strategy: up to 12 nodes, up to 4 timesteps.
    fn arb_sequence() -> impl Strategy<Value = GraphSequence> {
        (2usize..12, 1usize..5).prop_flat_map(|(n, t)| {
            let edges = proptest::collection::vec(
                proptest::collection::vec((0..n as NodeId, 0..n as NodeId), 0..30),
                t..=t,
            );
            edges.prop_map(move |per_t| GraphSequence::from_snapshot_edges(n, per_t))
        })
    }

    proptest! {
        #[test]
        fn transpose_consistency(seq in arb_sequence()) {
            for snap in seq.snapshots() {
                for (u, v) in snap.edges() {
                    prop_assert!(snap.in_neighbors(v).binary_search(&u).is_ok());
                }
                for u in 0..seq.node_count() as NodeId {
                    for &v in snap.in_neighbors(u) {
                        prop_assert!(snap.has_edge(v, u));
                    }
                }
            }
        }

        #[test]
        fn neighborhood_monotone_in_r_max(seq in arb_sequence(), i in 0u32..12, a in 1usize..6, extra in 0usize..6) {
            let i = i % seq.node_count() as NodeId;
            let small = seq.neighborhood(i, 0, 1, a).unwrap();
            let big = seq.neighborhood(i, 0, 1, a + extra).unwrap();
            for m in &small.members {
                prop_assert!(big.contains(*m));
            }
        }

        #[test]
        fn fallback_inert_when_degree_positive(seq in arb_sequence(), i in 0u32..12) {
            let i = i % seq.node_count() as NodeId;
            let t = seq.len() - 1;
            if seq.snapshot(t).degree(i) >= 1 {
                // With positive degree the fallback path never fires, so the
                // result must be independent of the lag.
                let with_short_lag = seq.neighborhood(i, t, 1, 400).unwrap();
                let with_long_lag = seq.neighborhood(i, t, 4, 400).unwrap();
                prop_assert_eq!(with_short_lag, with_long_lag);
            }
        }
    }
}
