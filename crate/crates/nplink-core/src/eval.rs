//! Candidate generation, AUC, and experiment orchestration.
//!
//! The last snapshot of a sequence is the test snapshot `G_T`. Scoring only
//! ever reads snapshots `0 .. T−1`; snapshot `T` is consulted solely for the
//! evaluation node set `S_>0` (nodes with non-zero degree at `T`) and the
//! labels. Per node, every method ranks the candidates that have ever been
//! within two undirected hops, and the ranking is scored with tie-aware AUC.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::baselines;
use crate::graph::{GraphSequence, NodeId};
use crate::kernel::{KernelConfig, NpModel};
use crate::lsh::LshParams;
use crate::{Error, Result};

/// Method selector; the string tags double as CLI names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Np,
    LastLink,
    CommonNeighbors,
    AdamicAdar,
    Katz,
    Random,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Np,
        Method::LastLink,
        Method::CommonNeighbors,
        Method::AdamicAdar,
        Method::Katz,
        Method::Random,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::Np => "np",
            Method::LastLink => "ll",
            Method::CommonNeighbors => "cn",
            Method::AdamicAdar => "aa",
            Method::Katz => "katz",
            Method::Random => "rnd",
        }
    }

    /// Whether labels follow the directed edge `i → j` (the estimator's
    /// orientation) or the undirected pair (the heuristics' orientation).
    pub fn directed_labels(&self) -> bool {
        matches!(self, Method::Np)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "np" => Ok(Method::Np),
            "ll" => Ok(Method::LastLink),
            "cn" => Ok(Method::CommonNeighbors),
            "aa" => Ok(Method::AdamicAdar),
            "katz" => Ok(Method::Katz),
            "rnd" => Ok(Method::Random),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected np|ll|cn|aa|katz|rnd)"
            ))),
        }
    }
}

/// Shared experiment knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub lag: usize,
    pub r_max: usize,
    pub kernel: KernelConfig,
    pub lsh: LshParams,
    pub katz_beta: f64,
    pub katz_len: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            lag: 6,
            r_max: 400,
            kernel: KernelConfig::default(),
            lsh: LshParams::default(),
            katz_beta: 0.005,
            katz_len: 4,
            seed: 0,
        }
    }
}

/// One evaluation run: the sequence, the methods to compare, the knobs.
/// The test timestep is always the last snapshot.
#[derive(Debug, Clone)]
pub struct EvalTask<'a> {
    pub seq: &'a GraphSequence,
    pub methods: Vec<Method>,
    pub cfg: EvalConfig,
}

/// All nodes ever within two undirected hops of `i` in snapshots
/// `0 .. t_test−1`, excluding `i`, sorted.
pub fn candidate_set(seq: &GraphSequence, i: NodeId, t_test: usize) -> Vec<NodeId> {
    let mut out: HashSet<NodeId> = HashSet::new();
    for t in 0..t_test {
        let snap = seq.snapshot(t);
        for &u in snap.und_neighbors(i) {
            out.insert(u);
            for &v in snap.und_neighbors(u) {
                out.insert(v);
            }
        }
    }
    out.remove(&i);
    let mut out: Vec<NodeId> = out.into_iter().collect();
    out.sort_unstable();
    out
}

/// Tie-aware ranking AUC: `P(s⁺ > s⁻) + ½·P(s⁺ = s⁻)` over all
/// positive/negative pairs, computed by sort-and-rank. Returns `None` when
/// the labels are one-class (the caller skips such nodes).
pub fn auc(scored: &[(f64, bool)]) -> Option<f64> {
    let positives = scored.iter().filter(|(_, label)| *label).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.total_cmp(&scored[b].0));

    // Sum of (average, 1-based) ranks of the positives; every addend is a
    // multiple of ½ so the sum stays exact in f64.
    let mut rank_sum = 0.0f64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scored[order[end]].0 == scored[order[start]].0 {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| scored[i].1).count();
        rank_sum += avg_rank * pos_in_group as f64;
        start = end;
    }
    let favorable = rank_sum - (positives * (positives + 1)) as f64 / 2.0;
    Some(favorable / (positives as f64 * negatives as f64))
}

/// Scores of one node's candidate list under one method.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeScores {
    pub node: NodeId,
    pub candidates: Vec<NodeId>,
    pub scores: Vec<f64>,
}

/// Per-method scores for a set of source nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScores {
    pub method: Method,
    pub per_node: Vec<NodeScores>,
}

/// Rank candidates of the given source nodes under every method. Reads
/// snapshots `0 .. t_test−1` only — never the test snapshot.
pub fn score_all(
    seq: &GraphSequence,
    t_test: usize,
    methods: &[Method],
    cfg: &EvalConfig,
    nodes: &[NodeId],
) -> Result<Vec<MethodScores>> {
    if t_test == 0 || t_test > seq.len() {
        return Err(Error::TimestepOutOfRange { t: t_test, len: seq.len() });
    }
    let candidates: Vec<Vec<NodeId>> =
        nodes.par_iter().map(|&i| candidate_set(seq, i, t_test)).collect();

    // The estimator's model (and optional index) is shared by all its nodes.
    // The lag is capped by the available history so short sequences stay
    // evaluable (the estimator needs t_test ≥ lag + 1).
    let np_model = if methods.contains(&Method::Np) {
        let lag = cfg.lag.min(t_test.saturating_sub(1)).max(1);
        Some(NpModel::new(seq, t_test, cfg.kernel, lag, cfg.r_max)?)
    } else {
        None
    };
    let np_index = match (&np_model, cfg.kernel.use_lsh) {
        (Some(model), true) => Some(model.build_lsh(&cfg.lsh)?),
        _ => None,
    };

    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let per_node: Vec<NodeScores> = nodes
            .par_iter()
            .zip(&candidates)
            .map(|(&i, cands)| {
                let scores: Result<Vec<f64>> = match method {
                    Method::Np => {
                        let model = np_model.as_ref().expect("model built above");
                        model.score_candidates(i, cands, np_index.as_ref())
                    }
                    Method::LastLink => Ok(cands
                        .iter()
                        .map(|&j| baselines::score_last_link(seq, i, j, t_test))
                        .collect()),
                    Method::CommonNeighbors => Ok(cands
                        .iter()
                        .map(|&j| baselines::score_common_neighbors(seq, i, j, t_test))
                        .collect()),
                    Method::AdamicAdar => Ok(cands
                        .iter()
                        .map(|&j| baselines::score_adamic_adar(seq, i, j, t_test))
                        .collect()),
                    Method::Katz => {
                        let all =
                            baselines::katz_scores_from(seq, i, t_test, cfg.katz_beta, cfg.katz_len);
                        Ok(cands.iter().map(|&j| all[j as usize]).collect())
                    }
                    Method::Random => Ok(cands
                        .iter()
                        .map(|&j| baselines::score_random(i, j, cfg.seed))
                        .collect()),
                };
                scores.map(|scores| NodeScores { node: i, candidates: cands.clone(), scores })
            })
            .collect::<Result<_>>()?;
        out.push(MethodScores { method, per_node });
    }
    Ok(out)
}

/// One evaluated node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeResult {
    pub node: NodeId,
    pub auc: f64,
    pub n_candidates: usize,
    pub n_pos: usize,
}

/// Aggregate over `S_>0` for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub method: Method,
    /// Mean per-node AUC over the evaluated nodes (NaN when none).
    pub mean_auc: f64,
    pub nodes: Vec<NodeResult>,
    /// Nodes of `S_>0` skipped for an empty candidate set or one-class labels.
    pub skipped: usize,
}

/// Full experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub t_test: usize,
    /// Size of `S_>0`, the nodes with non-zero degree in the test snapshot.
    pub s_gt0: usize,
    pub methods: Vec<MethodReport>,
    pub runtime: Duration,
    pub config_echo: String,
}

impl EvalReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn mean_auc(&self, m: Method) -> f64 {
        self.method(m).map(|r| r.mean_auc).unwrap_or(f64::NAN)
    }
}

/// Run the full evaluation: test timestep is the last snapshot, training is
/// everything before it.
pub fn evaluate(task: &EvalTask) -> Result<EvalReport> {
    let started = Instant::now();
    let seq = task.seq;
    if seq.len() < 2 {
        return Err(Error::TimestepOutOfRange { t: 0, len: seq.len() });
    }
    let t_test = seq.len() - 1;
    let test_snap = seq.snapshot(t_test);

    let s_gt0: Vec<NodeId> =
        (0..seq.node_count() as NodeId).filter(|&i| test_snap.degree(i) >= 1).collect();
    if s_gt0.is_empty() {
        return Err(Error::NoEvaluableNodes);
    }

    let all_scores = score_all(seq, t_test, &task.methods, &task.cfg, &s_gt0)?;

    let methods: Vec<MethodReport> = all_scores
        .into_iter()
        .map(|ms| {
            let directed = ms.method.directed_labels();
            let mut nodes = Vec::new();
            let mut skipped = 0usize;
            for ns in &ms.per_node {
                let labeled: Vec<(f64, bool)> = ns
                    .candidates
                    .iter()
                    .zip(&ns.scores)
                    .map(|(&j, &score)| {
                        let label = if directed {
                            test_snap.has_edge(ns.node, j)
                        } else {
                            test_snap.has_edge(ns.node, j) || test_snap.has_edge(j, ns.node)
                        };
                        (score, label)
                    })
                    .collect();
                match auc(&labeled) {
                    Some(value) => nodes.push(NodeResult {
                        node: ns.node,
                        auc: value,
                        n_candidates: ns.candidates.len(),
                        n_pos: labeled.iter().filter(|(_, l)| *l).count(),
                    }),
                    None => skipped += 1,
                }
            }
            let mean_auc = if nodes.is_empty() {
                f64::NAN
            } else {
                nodes.iter().map(|n| n.auc).sum::<f64>() / nodes.len() as f64
            };
            MethodReport { method: ms.method, mean_auc, nodes, skipped }
        })
        .collect();

    if methods.iter().all(|m| m.nodes.is_empty()) {
        return Err(Error::NoEvaluableNodes);
    }

    let cfg = &task.cfg;
    let config_echo = format!(
        "t_test={} lag={} r_max={} b={} top_k={} lambda={} lsh={} k_bits={} tables={} b1={} b2={} katz_beta={} katz_len={} seed={}",
        t_test,
        cfg.lag,
        cfg.r_max,
        cfg.kernel.bandwidth,
        cfg.kernel.top_k,
        cfg.kernel.lambda,
        cfg.kernel.use_lsh,
        cfg.lsh.k_bits,
        cfg.lsh.tables,
        cfg.lsh.b1,
        cfg.lsh.b2,
        cfg.katz_beta,
        cfg.katz_len,
        cfg.seed,
    );

    Ok(EvalReport { t_test, s_gt0: s_gt0.len(), methods, runtime: started.elapsed(), config_echo })
}

/// Plain-text report: config echo, then one row per method.
pub fn write_report_text<W: Write>(mut w: W, report: &EvalReport) -> Result<()> {
    writeln!(w, "# evaluation report")?;
    writeln!(w, "# {}", report.config_echo)?;
    writeln!(w, "# |S>0| = {}, runtime = {:.2?}", report.s_gt0, report.runtime)?;
    writeln!(w, "{:<6} {:>9} {:>10} {:>8}", "method", "mean_auc", "evaluated", "skipped")?;
    for m in &report.methods {
        let mean = if m.nodes.is_empty() { "n/a".to_string() } else { format!("{:.4}", m.mean_auc) };
        writeln!(w, "{:<6} {:>9} {:>10} {:>8}", m.method.tag(), mean, m.nodes.len(), m.skipped)?;
    }
    Ok(())
}

/// Machine-readable side file: `method,node,auc,n_candidates,n_pos`.
pub fn write_report_csv<W: Write>(mut w: W, report: &EvalReport) -> Result<()> {
    writeln!(w, "method,node,auc,n_candidates,n_pos")?;
    for m in &report.methods {
        for n in &m.nodes {
            writeln!(w, "{},{},{},{},{}", m.method.tag(), n.node, n.auc, n.n_candidates, n.n_pos)?;
        }
    }
    Ok(())
}

/// Table-style matrix with one column per method, for `compare`.
pub fn write_compare_matrix<W: Write>(mut w: W, label: &str, report: &EvalReport) -> Result<()> {
    write!(w, "{:<24}", "data")?;
    for m in &report.methods {
        write!(w, " {:>8}", m.method.tag())?;
    }
    writeln!(w)?;
    write!(w, "{label:<24}")?;
    for m in &report.methods {
        if m.nodes.is_empty() {
            write!(w, " {:>8}", "n/a")?;
        } else {
            write!(w, " {:>8.2}", m.mean_auc)?;
        }
    }
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn candidate_set_cases() {
        // isolated node → empty
        let seq = GraphSequence::from_snapshot_edges(4, vec![vec![(1, 2)], vec![(1, 2)]]);
        assert!(candidate_set(&seq, 0, 1).is_empty());

        // adjacent at t = 0 only → still included later ("ever")
        let seq = GraphSequence::from_snapshot_edges(4, vec![vec![(0, 3)], vec![], vec![]]);
        assert_eq!(candidate_set(&seq, 0, 2), vec![3]);

        // 2 hops at some t, farther at the last training step → included
        let seq = GraphSequence::from_snapshot_edges(
            6,
            vec![
                vec![(0, 1), (1, 2)],                     // 2 within two hops at t=0
                vec![(0, 5), (5, 4), (4, 3), (3, 2)],     // 2 is now 4 hops away
            ],
        );
        let c = candidate_set(&seq, 0, 2);
        assert!(c.contains(&2));
    }

    #[test]
    fn auc_examples() {
        // perfect separation
        let scored = [(0.9, true), (0.8, true), (0.2, false), (0.1, false)];
        assert_eq!(auc(&scored), Some(1.0));
        // all ties
        let scored = [(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        assert_eq!(auc(&scored), Some(0.5));
        // 3 favorable of 4 pairs
        let scored = [(0.9, true), (0.8, false), (0.7, true), (0.1, false)];
        assert_eq!(auc(&scored), Some(0.75));
        // one-class → skip
        assert_eq!(auc(&[(0.4, true), (0.5, true)]), None);
        assert_eq!(auc(&[]), None);
    }

    /// O(m²) pair-counting oracle.
    fn auc_by_pairs(scored: &[(f64, bool)]) -> Option<f64> {
        let pos: Vec<f64> = scored.iter().filter(|(_, l)| *l).map(|(s, _)| *s).collect();
        let neg: Vec<f64> = scored.iter().filter(|(_, l)| !*l).map(|(s, _)| *s).collect();
        if pos.is_empty() || neg.is_empty() {
            return None;
        }
        let mut favorable = 0.0f64;
        for &p in &pos {
            for &q in &neg {
                if p > q {
                    favorable += 1.0;
                } else if p == q {
                    favorable += 0.5;
                }
            }
        }
        Some(favorable / (pos.len() * neg.len()) as f64)
    }

    #[test]
    fn evaluate_oracle_scorer_reaches_one() {
        // Feed label-equal scores through the same bookkeeping as evaluate:
        // rank-based AUC must be exactly 1 for every node.
        let scored = [(1.0, true), (0.0, false), (1.0, true), (0.0, false)];
        assert_eq!(auc(&scored), Some(1.0));
    }

    #[test]
    fn evaluate_smoke_on_small_sequence() {
        let cfg = crate::simgen::SimConfig { n: 14, timesteps: 7, seed: 3, ..Default::default() };
        let seq = crate::simgen::generate(&cfg).unwrap();
        let task = EvalTask {
            seq: &seq,
            methods: Method::ALL.to_vec(),
            cfg: EvalConfig { lag: 2, ..Default::default() },
        };
        let report = evaluate(&task).unwrap();
        assert_eq!(report.methods.len(), 6);
        assert!(report.s_gt0 > 0);
        for m in &report.methods {
            for n in &m.nodes {
                assert!((0.0..=1.0).contains(&n.auc));
                assert!(n.n_pos >= 1);
            }
            assert!(m.nodes.len() + m.skipped <= report.s_gt0);
        }
        // text + csv writers don't error and agree on row counts
        let mut text = Vec::new();
        write_report_text(&mut text, &report).unwrap();
        let mut csv = Vec::new();
        write_report_csv(&mut csv, &report).unwrap();
        let rows = std::str::from_utf8(&csv).unwrap().lines().count() - 1;
        let expected: usize = report.methods.iter().map(|m| m.nodes.len()).sum();
        assert_eq!(rows, expected);
    }

    #[test]
    fn evaluate_is_deterministic() {
        let cfg = crate::simgen::SimConfig { n: 12, timesteps: 6, seed: 1, ..Default::default() };
        let seq = crate::simgen::generate(&cfg).unwrap();
        let task = EvalTask {
            seq: &seq,
            methods: Method::ALL.to_vec(),
            cfg: EvalConfig { lag: 2, ..Default::default() },
        };
        let a = evaluate(&task).unwrap();
        let b = evaluate(&task).unwrap();
        let dump = |r: &EvalReport| {
            let mut csv = Vec::new();
            write_report_csv(&mut csv, r).unwrap();
            csv
        };
        assert_eq!(dump(&a), dump(&b));
    }

    #[test]
    fn scoring_never_reads_the_test_snapshot() {
        // Two sequences identical until the last snapshot, which differs
        // wildly: every method must produce bit-identical scores.
        let cfg = crate::simgen::SimConfig { n: 12, timesteps: 6, seed: 8, ..Default::default() };
        let seq_a = crate::simgen::generate(&cfg).unwrap();
        let mut per_t: Vec<Vec<(NodeId, NodeId)>> =
            seq_a.snapshots().iter().map(|s| s.edges().collect()).collect();
        let last = per_t.last_mut().unwrap();
        *last = (0..12u32).map(|u| (u, (u + 5) % 12)).collect();
        let seq_b = GraphSequence::from_snapshot_edges(12, per_t);
        assert_ne!(seq_a.snapshot(5), seq_b.snapshot(5));

        let nodes: Vec<NodeId> = (0..12).collect();
        let cfg = EvalConfig { lag: 2, ..Default::default() };
        let a = score_all(&seq_a, 5, &Method::ALL, &cfg, &nodes).unwrap();
        let b = score_all(&seq_b, 5, &Method::ALL, &cfg, &nodes).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn auc_matches_pair_oracle(
            scored in proptest::collection::vec(
                ((0u8..12).prop_map(|s| s as f64 / 4.0), any::<bool>()),
                0..60,
            )
        ) {
            prop_assert_eq!(auc(&scored), auc_by_pairs(&scored));
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            scored in proptest::collection::vec((0.0f64..1.0, any::<bool>()), 2..40)
        ) {
            let base = auc(&scored);
            for transform in [|x: f64| 2.0 * x + 1.0, |x: f64| x.exp(), |x: f64| x.atan()] {
                let mapped: Vec<(f64, bool)> =
                    scored.iter().map(|&(s, l)| (transform(s), l)).collect();
                prop_assert_eq!(auc(&mapped), base);
            }
        }
    }
}
