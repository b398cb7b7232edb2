//! Binned pair features and per-node neighborhood-evolution datacubes.
//!
//! A datacube `d_t(i)` summarizes one step of evolution around node `i`:
//! for every ordered pair `(u, v)` of distinct members of the neighborhood
//! `N_{t−1}(i)`, the pair's binned feature cell `s` accumulates how many
//! pairs fell in that cell (`n`) and how many of them were linked by an
//! edge at `t` (`n_plus`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{GraphSequence, NodeId};
use crate::Result;

/// Logarithmic bin index: `floor(log2(x + 1))`. Monotone non-decreasing.
pub fn log_bin(x: usize) -> u8 {
    (x + 1).ilog2() as u8
}

/// One cell of the feature space `S`: log-binned endpoint degrees and
/// common-neighbor count, plus the raw last-link age in `[0, p]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairFeature {
    pub deg_i_bin: u8,
    pub deg_j_bin: u8,
    pub cn_bin: u8,
    pub ll: u8,
}

impl PairFeature {
    /// L1 distance over the log-binned dimensions. The last-link age is not
    /// part of it: `ll` is stored unbinned and identifies the recency class,
    /// so smoothing never crosses it.
    pub fn bin_l1(&self, other: &PairFeature) -> u32 {
        self.deg_i_bin.abs_diff(other.deg_i_bin) as u32
            + self.deg_j_bin.abs_diff(other.deg_j_bin) as u32
            + self.cn_bin.abs_diff(other.cn_bin) as u32
    }
}

/// Feature cell for the ordered pair `(i, j)` evaluated on snapshot `t`,
/// with the last-link window ending at `t`.
pub fn pair_features(seq: &GraphSequence, i: NodeId, j: NodeId, t: usize, p: usize) -> PairFeature {
    debug_assert!(i != j, "pair features need distinct endpoints");
    let snap = seq.snapshot(t);
    let ll = seq.last_link_age(i, j, t, p);
    debug_assert!(ll <= u8::MAX as usize, "lag too large for feature encoding");
    PairFeature {
        deg_i_bin: log_bin(snap.degree(i)),
        deg_j_bin: log_bin(snap.degree(j)),
        cn_bin: log_bin(snap.common_neighbors(i, j)),
        ll: ll as u8,
    }
}

/// Raw contents of one datacube cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellCounts {
    /// Ordered pairs observed in this cell.
    pub n: u32,
    /// Of those, pairs linked at the next timestep.
    pub n_plus: u32,
}

/// Sparse map from feature cells to `(n, n_plus)` for one `(node, timestep)`.
///
/// Cells with `n = 0` are never stored. Immutable after build; construction
/// for distinct `(i, t)` pairs is embarrassingly parallel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datacube {
    pub center: NodeId,
    pub t: usize,
    cells: BTreeMap<PairFeature, CellCounts>,
}

/// Build the datacube `d_t(i)` from the neighborhood at `t − 1` and the edge
/// outcomes at `t`. Requires `1 ≤ t < seq.len()`.
pub fn build_datacube(
    seq: &GraphSequence,
    i: NodeId,
    t: usize,
    p: usize,
    r_max: usize,
) -> Result<Datacube> {
    assert!(t >= 1, "datacube at t needs snapshot t-1");
    let nb = seq.neighborhood(i, t - 1, p, r_max)?;
    let next = seq.snapshot(t);
    let mut cells: BTreeMap<PairFeature, CellCounts> = BTreeMap::new();
    for &u in &nb.members {
        for &v in &nb.members {
            if u == v {
                continue;
            }
            let s = pair_features(seq, u, v, t - 1, p);
            let entry = cells.entry(s).or_default();
            entry.n += 1;
            entry.n_plus += next.has_edge(u, v) as u32;
        }
    }
    Ok(Datacube { center: i, t, cells })
}

impl Datacube {
    /// Construct directly from cell contents (tests and tooling).
    pub fn from_cells(
        center: NodeId,
        t: usize,
        cells: impl IntoIterator<Item = (PairFeature, CellCounts)>,
    ) -> Self {
        let cells: BTreeMap<_, _> = cells.into_iter().filter(|(_, c)| c.n > 0).collect();
        for counts in cells.values() {
            assert!(counts.n_plus <= counts.n, "n_plus must not exceed n");
        }
        Datacube { center, t, cells }
    }

    pub fn get(&self, s: &PairFeature) -> Option<CellCounts> {
        self.cells.get(s).copied()
    }

    /// Stored cells in ascending feature order.
    pub fn cells(&self) -> impl Iterator<Item = (&PairFeature, &CellCounts)> {
        self.cells.iter()
    }

    /// Number of non-empty cells `M`.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Total ordered-pair count across cells.
    pub fn total_pairs(&self) -> u64 {
        self.cells.values().map(|c| c.n as u64).sum()
    }

    /// Counts for cell `s`, borrowing from nearby cells when `s` is empty:
    /// the weighted sum `Σ λ^L1(s,s') · (n, n_plus)` over stored cells with
    /// the same last-link age and bin-space L1 distance ≤ 2. Returns `(0, 0)`
    /// when nothing is in range.
    pub fn smooth_cell(&self, s: &PairFeature, lambda: f64) -> (f64, f64) {
        debug_assert!(lambda > 0.0 && lambda < 1.0, "decay must lie in (0,1)");
        if let Some(c) = self.cells.get(s) {
            return (c.n as f64, c.n_plus as f64);
        }
        let mut n = 0.0;
        let mut n_plus = 0.0;
        for (cell, counts) in &self.cells {
            if cell.ll != s.ll {
                continue;
            }
            let d = cell.bin_l1(s);
            if d <= 2 {
                let w = lambda.powi(d as i32);
                n += w * counts.n as f64;
                n_plus += w * counts.n_plus as f64;
            }
        }
        (n, n_plus)
    }

    /// Debug dump, one line per cell: `i t deg_i deg_j cn ll n n_plus`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (s, c) in &self.cells {
            writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                self.center, self.t, s.deg_i_bin, s.deg_j_bin, s.cn_bin, s.ll, c.n, c.n_plus
            )
            .unwrap();
        }
        out
    }
}
