//! Scratch diagnostic 4: baseline scale vs learning quality.

use scanlearn::evaluate::{edge_precision_recall, overlap_coefficient};
use scanlearn::learn::{
    learn_sequence, most_significant, randomization_stats, EdgeSelector,
};
use scanlearn::scan::Distribution;
use scanlearn::search::SearchEngine;
use scanlearn::seeds;
use scanlearn::simulate::{gen_baselines, gen_erdos_renyi, make_training_set, InjectConfig};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(41);
    let n = 50;
    let truth = gen_erdos_renyi(n, 0.1, seeds::derive(seed, seeds::stage::GRAPH, 0)).unwrap();
    let cfg = InjectConfig::default();
    let engine = SearchEngine::uls();
    let truth_m = truth.edge_count();
    println!("truth m={truth_m}");

    for (lo, hi) in [(0.2, 2.0), (0.5, 5.0), (1.0, 10.0)] {
        let (mu, _) =
            gen_baselines(n, 0, lo, hi, seeds::derive(seed, seeds::stage::BASELINES, 0)).unwrap();
        let (ts, labels) =
            make_training_set(&truth, &mu, &cfg, 200, 1.0, Distribution::Poisson, seed).unwrap();
        let mut overlaps: Vec<f64> = (0..ts.len())
            .map(|j| overlap_coefficient(&ts.unconstrained(j).nodes, &labels[j]).unwrap())
            .collect();
        overlaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean: f64 = overlaps.iter().sum::<f64>() / overlaps.len() as f64;

        let seq =
            learn_sequence(&ts, EdgeSelector::GrCorr, &engine, Distribution::Poisson).unwrap();
        let stats = randomization_stats(&ts, &engine, Distribution::Poisson, 100, seed).unwrap();
        let curve = most_significant(&seq, &stats).unwrap();
        let at_star = edge_precision_recall(&curve.graph, &truth).unwrap();
        let at_truth = edge_precision_recall(&seq.graph_at(truth_m).unwrap(), &truth).unwrap();
        // Best achievable along the whole path, for reference.
        let mut best = (0usize, 0.0f64, 0.0f64);
        for m in 1..=seq.m_total() {
            let rep = edge_precision_recall(&seq.graph_at(m).unwrap(), &truth).unwrap();
            if rep.recall >= 0.6 && rep.precision > best.1 {
                best = (m, rep.precision, rep.recall);
            }
        }
        println!(
            "mu [{lo},{hi}]: S* overlap={mean:.3}; m*={} | at m*: p={:.3} r={:.3} | at truth m: p={:.3} r={:.3} | best(p | r>=.6): m={} p={:.3} r={:.3}",
            curve.m_star,
            at_star.precision,
            at_star.recall,
            at_truth.precision,
            at_truth.recall,
            best.0,
            best.1,
            best.2
        );
    }
}
