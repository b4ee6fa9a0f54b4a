//! Scratch diagnostic: where does the significance curve peak, and what
//! precision/recall would each graph size give?

use scanlearn::evaluate::edge_precision_recall;
use scanlearn::learn::{learn_sequence, most_significant, randomization_stats, EdgeSelector};
use scanlearn::scan::Distribution;
use scanlearn::search::SearchEngine;
use scanlearn::simulate::{gen_baselines, gen_erdos_renyi, make_training_set, InjectConfig};
use scanlearn::seeds;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(41);
    let n = 50;
    let truth = gen_erdos_renyi(n, 0.1, seeds::derive(seed, seeds::stage::GRAPH, 0)).unwrap();
    let (mu, _) = gen_baselines(n, 0, 1.0, 10.0, seeds::derive(seed, seeds::stage::BASELINES, 0))
        .unwrap();
    let cfg = InjectConfig::default();
    let (ts, _) =
        make_training_set(&truth, &mu, &cfg, 200, 1.0, Distribution::Poisson, seed).unwrap();
    let engine = SearchEngine::uls();
    let seq = learn_sequence(&ts, EdgeSelector::GrCorr, &engine, Distribution::Poisson).unwrap();
    let stats = randomization_stats(&ts, &engine, Distribution::Poisson, 100, seed).unwrap();
    let curve = most_significant(&seq, &stats).unwrap();
    println!(
        "truth m={} | m*={} (z={:.2})",
        truth.edge_count(),
        curve.m_star,
        curve.z[curve.m_star].unwrap()
    );
    let mut best_z_above_50 = (0usize, f64::MIN);
    for m in 50..=400 {
        if let Some(z) = curve.z[m] {
            if z > best_z_above_50.1 {
                best_z_above_50 = (m, z);
            }
        }
    }
    println!("best z for m in [50,400]: m={} z={:.2}", best_z_above_50.0, best_z_above_50.1);
    for m in [9, 60, 80, 100, 118, 140, 170, 200, 250, 300] {
        let g = seq.graph_at(m).unwrap();
        let rep = edge_precision_recall(&g, &truth).unwrap();
        println!(
            "m={:4}  z={:>8}  precision={:.3} recall={:.3}",
            m,
            curve.z[m].map(|z| format!("{z:.2}")).unwrap_or_default(),
            rep.precision,
            rep.recall
        );
    }
}
