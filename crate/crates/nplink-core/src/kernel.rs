//! Total-variation kernel over datacubes and the link-probability estimator.
//!
//! Per-cell linkage rates get a normal posterior approximation
//! `N(p̂, p̂(1−p̂)/n)`; the distance between two datacubes is the sum of
//! total-variation distances between corresponding cell posteriors; a
//! candidate datacube at distance `D` is weighted `b^D` for bandwidth
//! `b ∈ (0, 1)`. The estimate for a query pair pools `n⁺/n` of the query's
//! feature cell across historical datacubes under these weights.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::datacube::{build_datacube, pair_features, Datacube, PairFeature};
use crate::graph::{GraphSequence, NodeId};
use crate::lsh::LshIndex;
use crate::{Error, Result};

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Normal approximation to the posterior of one cell's linkage rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPosterior {
    /// Estimated linkage probability `p̂ = n⁺/n`.
    pub mean: f64,
    /// Supporting pair count (real-valued after smoothing).
    pub count: f64,
}

impl CellPosterior {
    /// Posterior from (possibly smoothed) cell counts. `n = 0` yields a point
    /// mass at 0.
    pub fn from_counts(n: f64, n_plus: f64) -> Self {
        let mean = if n > 0.0 { n_plus / n } else { 0.0 };
        CellPosterior { mean, count: n }
    }

    /// `p̂(1−p̂)/n`, or 0 for the degenerate cases.
    pub fn variance(&self) -> f64 {
        if self.count > 0.0 {
            self.mean * (1.0 - self.mean) / self.count
        } else {
            0.0
        }
    }

    /// True when the posterior degenerates to a point mass (`n = 0` or
    /// `p̂ ∈ {0, 1}`).
    pub fn is_point_mass(&self) -> bool {
        self.variance() <= 0.0
    }
}

/// Total variation distance between two cell posteriors, in `[0, 1]`.
///
/// Point masses: equal means give 0, distinct means give 1, and a point mass
/// against a proper normal gives 1 (mutually singular laws). Two normals:
/// the densities cross at the real roots of the quadratic log-density
/// difference, and TV is half the total CDF-gap swing across the crossing
/// intervals.
pub fn tv_normal(a: &CellPosterior, b: &CellPosterior) -> f64 {
    match (a.is_point_mass(), b.is_point_mass()) {
        (true, true) => {
            if a.mean == b.mean {
                0.0
            } else {
                1.0
            }
        }
        (true, false) | (false, true) => 1.0,
        (false, false) => {
            tv_between_normals(a.mean, a.variance().sqrt(), b.mean, b.variance().sqrt())
        }
    }
}

fn tv_between_normals(mu1: f64, s1: f64, mu2: f64, s2: f64) -> f64 {
    if mu1 == mu2 && s1 == s2 {
        return 0.0;
    }
    let gap = |x: f64| std_normal_cdf((x - mu1) / s1) - std_normal_cdf((x - mu2) / s2);

    // Coefficients of the quadratic whose roots are the density crossings.
    let ia = 1.0 / (s1 * s1);
    let ib = 1.0 / (s2 * s2);
    let a = ib - ia;
    let b = -2.0 * (mu2 * ib - mu1 * ia);
    let c = mu2 * mu2 * ib - mu1 * mu1 * ia - 2.0 * (s1 / s2).ln();

    if a == 0.0 {
        // Equal variances: a single crossing at the midpoint.
        if b == 0.0 {
            return 0.0;
        }
        return gap(-c / b).abs();
    }

    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        // Densities touch without crossing; only possible (up to rounding)
        // when the laws are essentially identical.
        return gap(-b / (2.0 * a)).abs();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    let (x1, x2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };

    let g1 = gap(x1);
    let g2 = gap(x2);
    0.5 * (g1.abs() + (g2 - g1).abs() + g2.abs())
}

/// Distance between datacubes: the sum over the union of stored cells of
/// per-cell TV distances, with absent cells filled by smoothing (a side with
/// no mass in smoothing range degenerates to a point mass at 0).
pub fn datacube_distance(d1: &Datacube, d2: &Datacube, lambda: f64) -> f64 {
    let mut total = 0.0;
    let mut cells1 = d1.cells().peekable();
    let mut cells2 = d2.cells().peekable();
    let mut term = |s: &PairFeature| {
        let (n1, np1) = d1.smooth_cell(s, lambda);
        let (n2, np2) = d2.smooth_cell(s, lambda);
        total += tv_normal(
            &CellPosterior::from_counts(n1, np1),
            &CellPosterior::from_counts(n2, np2),
        );
    };
    loop {
        match (cells1.peek(), cells2.peek()) {
            (Some((s1, _)), Some((s2, _))) => match s1.cmp(s2) {
                std::cmp::Ordering::Less => {
                    term(s1);
                    cells1.next();
                }
                std::cmp::Ordering::Greater => {
                    term(s2);
                    cells2.next();
                }
                std::cmp::Ordering::Equal => {
                    term(s1);
                    cells1.next();
                    cells2.next();
                }
            },
            (Some((s1, _)), None) => {
                term(s1);
                cells1.next();
            }
            (None, Some((s2, _))) => {
                term(s2);
                cells2.next();
            }
            (None, None) => break,
        }
    }
    total
}

/// Kernel weight `b^D`; equals 1 iff `D = 0`.
pub fn kernel_weight(bandwidth: f64, distance: f64) -> f64 {
    debug_assert!(bandwidth > 0.0 && bandwidth < 1.0);
    debug_assert!(distance >= 0.0);
    bandwidth.powf(distance)
}

/// Estimator knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Kernel bandwidth `b ∈ (0, 1)`.
    pub bandwidth: f64,
    /// Number of nearest datacubes retrieved per query when LSH is on.
    pub top_k: usize,
    /// Cell-smoothing decay `λ ∈ (0, 1)`.
    pub lambda: f64,
    /// Route candidate retrieval through the LSH index.
    pub use_lsh: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { bandwidth: 0.6, top_k: 100, lambda: 0.5, use_lsh: false }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must lie in (0,1), got {}",
                self.bandwidth
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0,1), got {}",
                self.lambda
            )));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParameter("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Identifies one training datacube `d_t(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeKey {
    pub node: NodeId,
    pub t: usize,
}

/// All datacubes for every node over a timestep range, built once and then
/// shared read-only across predictions.
#[derive(Debug, Clone)]
pub struct CubeStore {
    cubes: Vec<Datacube>,
    by_key: HashMap<CubeKey, usize>,
    lag: usize,
    r_max: usize,
}

impl CubeStore {
    /// Build `d_t(i)` for all nodes and `t ∈ [t_lo, t_hi]` (needs `t_lo ≥ 1`).
    pub fn build(
        seq: &GraphSequence,
        lag: usize,
        r_max: usize,
        t_lo: usize,
        t_hi: usize,
    ) -> Result<Self> {
        if t_lo < 1 || t_hi >= seq.len() || t_lo > t_hi {
            return Err(Error::TimestepOutOfRange { t: t_hi, len: seq.len() });
        }
        let keys: Vec<CubeKey> = (t_lo..=t_hi)
            .flat_map(|t| (0..seq.node_count() as NodeId).map(move |node| CubeKey { node, t }))
            .collect();
        let cubes: Vec<Datacube> = keys
            .par_iter()
            .map(|k| build_datacube(seq, k.node, k.t, lag, r_max))
            .collect::<Result<_>>()?;
        let by_key = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        Ok(CubeStore { cubes, by_key, lag, r_max })
    }

    pub fn get(&self, node: NodeId, t: usize) -> Option<&Datacube> {
        self.by_key.get(&CubeKey { node, t }).map(|&i| &self.cubes[i])
    }

    pub fn cubes(&self) -> &[Datacube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }
}

/// Weighted pool of the query cell across readout cubes: returns
/// `(Σ w·n⁺_s, Σ w·n_s)` with smoothing applied per cube.
fn pooled_cell<'c>(
    weighted: impl Iterator<Item = (f64, &'c Datacube)>,
    s: &PairFeature,
    lambda: f64,
) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, cube) in weighted {
        let (n, n_plus) = cube.smooth_cell(s, lambda);
        num += w * n_plus;
        den += w * n;
    }
    (num, den)
}

/// The non-parametric link predictor for one test timestep.
///
/// Training sees snapshots `0 .. t_test−1` only. Candidate datacubes are
/// `d_{t'}(i')` for `t' ∈ [max(1, lag−1), t_test−2]` (the estimator's
/// summation range, which needs `t_test ≥ lag+1`); each candidate's outcome
/// counts are read from the following cube `d_{t'+1}(i')`; the query
/// datacube is `d_{t_test−1}(i)`, the most recent fully observable
/// transition.
pub struct NpModel<'a> {
    seq: &'a GraphSequence,
    t_test: usize,
    cfg: KernelConfig,
    store: CubeStore,
    /// Store indices of candidate cubes (`t ≤ t_test − 2`), in build order.
    candidate_idx: Vec<usize>,
    /// Per-cell `(Σ n, Σ n⁺)` over every stored cube, for the prior fallback.
    prior: HashMap<PairFeature, (u64, u64)>,
}

impl<'a> NpModel<'a> {
    pub fn new(
        seq: &'a GraphSequence,
        t_test: usize,
        cfg: KernelConfig,
        lag: usize,
        r_max: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        if lag < 1 {
            return Err(Error::InvalidParameter("lag must be at least 1".into()));
        }
        if t_test > seq.len() {
            return Err(Error::TimestepOutOfRange { t: t_test, len: seq.len() });
        }
        // Candidates span t' ∈ [max(1, lag−1), t_test−2]; empty means
        // nothing to learn from.
        let t_lo = (lag - 1).max(1);
        if t_test < (lag + 1).max(3) {
            return Err(Error::NoTrainingData);
        }
        let store = CubeStore::build(seq, lag, r_max, t_lo, t_test - 1)?;
        let candidate_idx: Vec<usize> = store
            .cubes()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.t <= t_test - 2)
            .map(|(i, _)| i)
            .collect();
        if candidate_idx.is_empty() {
            return Err(Error::NoTrainingData);
        }
        let mut prior: HashMap<PairFeature, (u64, u64)> = HashMap::new();
        for cube in store.cubes() {
            for (s, c) in cube.cells() {
                let slot = prior.entry(*s).or_default();
                slot.0 += c.n as u64;
                slot.1 += c.n_plus as u64;
            }
        }
        Ok(NpModel { seq, t_test, cfg, store, candidate_idx, prior })
    }

    pub fn store(&self) -> &CubeStore {
        &self.store
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn t_test(&self) -> usize {
        self.t_test
    }

    /// Candidate datacubes in deterministic build order.
    pub fn candidates(&self) -> impl Iterator<Item = &Datacube> {
        self.candidate_idx.iter().map(|&i| &self.store.cubes()[i])
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_idx.len()
    }

    /// The query datacube `d_{t_test−1}(i)`.
    pub fn query_cube(&self, i: NodeId) -> &Datacube {
        self.store.get(i, self.t_test - 1).expect("query cube missing from store")
    }

    /// Feature cell of the query pair, evaluated on the last training
    /// snapshot.
    pub fn query_cell(&self, i: NodeId, j: NodeId) -> PairFeature {
        pair_features(self.seq, i, j, self.t_test - 1, self.store.lag())
    }

    /// Kernel weights of every candidate cube against node `i`'s query cube.
    pub fn candidate_weights(&self, i: NodeId) -> Vec<f64> {
        let q = self.query_cube(i);
        self.candidate_idx
            .iter()
            .map(|&idx| {
                let d = datacube_distance(q, &self.store.cubes()[idx], self.cfg.lambda);
                kernel_weight(self.cfg.bandwidth, d)
            })
            .collect()
    }

    /// Build an LSH index over the candidate cubes.
    pub fn build_lsh(&self, params: &crate::lsh::LshParams) -> Result<LshIndex> {
        LshIndex::build(self.candidates(), params)
    }

    fn estimate(&self, s: &PairFeature, weighted: impl Iterator<Item = (f64, CubeKey)>) -> f64 {
        let readouts = weighted.map(|(w, key)| {
            let readout = self
                .store
                .get(key.node, key.t + 1)
                .expect("readout cube missing from store");
            (w, readout)
        });
        let (num, den) = pooled_cell(readouts, s, self.cfg.lambda);
        if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else {
            self.prior_for(s)
        }
    }

    /// Global fraction of linked pairs in cell `s` across all training cubes,
    /// or 0.5 when the cell was never observed.
    pub fn prior_for(&self, s: &PairFeature) -> f64 {
        match self.prior.get(s) {
            Some(&(n, n_plus)) if n > 0 => n_plus as f64 / n as f64,
            _ => 0.5,
        }
    }

    /// Probability that the directed edge `i → j` appears at `t_test`,
    /// scanning every candidate cube.
    pub fn predict_pair(&self, i: NodeId, j: NodeId) -> f64 {
        let s = self.query_cell(i, j);
        let weights = self.candidate_weights(i);
        self.estimate(
            &s,
            weights.into_iter().zip(self.candidates().map(|c| CubeKey { node: c.center, t: c.t })),
        )
    }

    /// As [`predict_pair`](Self::predict_pair) but restricted to the top-k
    /// candidates retrieved from the index.
    pub fn predict_pair_lsh(&self, i: NodeId, j: NodeId, index: &LshIndex) -> Result<f64> {
        let s = self.query_cell(i, j);
        let hits = index.query(&self.store, self.query_cube(i), self.cfg.top_k, self.cfg.lambda)?;
        Ok(self.estimate(
            &s,
            hits.hits.iter().map(|&(key, d)| (kernel_weight(self.cfg.bandwidth, d), key)),
        ))
    }

    /// Score many candidate targets for one source node, computing the
    /// kernel weights only once.
    pub fn score_candidates(
        &self,
        i: NodeId,
        targets: &[NodeId],
        index: Option<&LshIndex>,
    ) -> Result<Vec<f64>> {
        let weighted: Vec<(f64, CubeKey)> = match index {
            None => self
                .candidate_weights(i)
                .into_iter()
                .zip(self.candidates().map(|c| CubeKey { node: c.center, t: c.t }))
                .collect(),
            Some(idx) => {
                let hits =
                    idx.query(&self.store, self.query_cube(i), self.cfg.top_k, self.cfg.lambda)?;
                hits.hits
                    .iter()
                    .map(|&(key, d)| (kernel_weight(self.cfg.bandwidth, d), key))
                    .collect()
            }
        };
        Ok(targets
            .iter()
            .map(|&j| self.estimate(&self.query_cell(i, j), weighted.iter().copied()))
            .collect())
    }
}

/// One-shot convenience: build the model for `t_test` and predict `i → j`.
///
/// `t_test = seq.len()` forecasts the unobserved next snapshot; the
/// evaluation harness passes `t_test = seq.len() − 1` so the last snapshot
/// stays held out. Only snapshots before `t_test` are ever read.
pub fn predict(
    seq: &GraphSequence,
    i: NodeId,
    j: NodeId,
    t_test: usize,
    cfg: &KernelConfig,
    lag: usize,
    r_max: usize,
    index: Option<&LshIndex>,
) -> Result<f64> {
    let model = NpModel::new(seq, t_test, *cfg, lag, r_max)?;
    match index {
        None => Ok(model.predict_pair(i, j)),
        Some(idx) => model.predict_pair_lsh(i, j, idx),
    }
}
