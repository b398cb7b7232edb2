// Scratch diagnostics for the seasonal benchmark. Not part of the artifact.
use nplink_core::*;

fn feats_for(sim: &SimConfig) -> Vec<Vec<usize>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sim.seed);
    (0..sim.n)
        .map(|_| (0..sim.seasons).map(|_| rng.random_range(0..sim.features)).collect())
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let features: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let noise: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.003);
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let seasons: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(3);
    let lag: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(6);
    let bw: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.6);

    let sim = SimConfig { features, noise, seed, seasons, ..Default::default() };
    let seq = generate(&sim).unwrap();
    let t_test = seq.len() - 1;
    let feats = feats_for(&sim);
    let test_snap = seq.snapshot(t_test);
    println!(
        "F={features} eps={noise} seed={seed} test season = {} |E_T| = {}",
        t_test % 3,
        test_snap.edge_count()
    );

    let mut cfg = EvalConfig { lag, ..Default::default() };
    cfg.kernel.bandwidth = bw;
    let task = EvalTask { seq: &seq, methods: vec![Method::Np, Method::LastLink], cfg };
    let report = evaluate(&task).unwrap();
    let np = report.method(Method::Np).unwrap();
    let ll = report.method(Method::LastLink).unwrap();

    println!("node  blocks     np_auc  ll_auc  cands  pos(np)");
    for nr in &np.nodes {
        let f = &feats[nr.node as usize];
        let ll_nr = ll.nodes.iter().find(|x| x.node == nr.node);
        println!(
            "{:4}  {:<9} {:6.3} {:7} {:6} {:8}",
            nr.node,
            format!("{f:?}"),
            nr.auc,
            ll_nr.map(|x| format!("{:6.3}", x.auc)).unwrap_or_else(|| "  skip".into()),
            nr.n_candidates,
            nr.n_pos,
        );
    }
    println!("mean np = {:.3} ({} nodes, {} skipped)", np.mean_auc, np.nodes.len(), np.skipped);
    println!("mean ll = {:.3} ({} nodes, {} skipped)", ll.mean_auc, ll.nodes.len(), ll.skipped);
}
