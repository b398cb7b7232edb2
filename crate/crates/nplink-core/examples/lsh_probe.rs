// Scratch recall probe for LSH parameter tuning. Not part of the artifact.
use std::time::Instant;

use nplink_core::*;

fn main() {
    let sim = SimConfig {
        n: 200,
        timesteps: 55,
        phi: 0.3,
        seasons: 3,
        features: 40,
        noise: 0.001,
        seed: 7,
    };
    let seq = generate(&sim).unwrap();
    let lag = 3;
    let store = CubeStore::build(&seq, lag, 400, 3, 52).unwrap();
    println!("store: {} cubes", store.len());
    let queries: Vec<Datacube> =
        (0..100u32).map(|i| build_datacube(&seq, i, 53, lag, 400).unwrap()).collect();
    let lambda = 0.5;
    let top_k = 100;

    // brute-force thresholds once
    let thresholds: Vec<f64> = queries
        .iter()
        .map(|q| {
            let mut exact: Vec<f64> =
                store.cubes().iter().map(|cube| datacube_distance(q, cube, lambda)).collect();
            exact.sort_by(f64::total_cmp);
            exact[top_k - 1]
        })
        .collect();

    for k_bits in [16, 32, 48, 64] {
        for tables in [8, 16] {
            let params = LshParams { k_bits, tables, ..Default::default() };
            let index = LshIndex::build(store.cubes().iter(), &params).unwrap();
            let mut recall = 0.0;
            let mut fallbacks = 0;
            let t0 = Instant::now();
            for (q, thr) in queries.iter().zip(&thresholds) {
                let res = index.query(&store, q, top_k, lambda).unwrap();
                recall +=
                    res.hits.iter().filter(|(_, d)| *d <= *thr).count() as f64 / top_k as f64;
                fallbacks += res.used_fallback as usize;
            }
            println!(
                "k={k_bits:2} l={tables:2}: recall={:.3} fallbacks={fallbacks} mean_query={:.2}ms",
                recall / queries.len() as f64,
                1e3 * t0.elapsed().as_secs_f64() / queries.len() as f64,
            );
        }
    }
}
