//! Scratch diagnostic 3: does the training-day distribution drive learning
//! quality and the z landscape?

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use scanlearn::evaluate::{edge_precision_recall, overlap_coefficient};
use scanlearn::learn::{
    learn_sequence, most_significant, randomization_stats, EdgeSelector, TrainingSet,
};
use scanlearn::scan::Distribution;
use scanlearn::search::SearchEngine;
use scanlearn::seeds;
use scanlearn::simulate::{gen_baselines, gen_erdos_renyi, inject_outbreak, InjectConfig};

fn build_ts(
    truth: &scanlearn::Graph,
    mu: &[f64],
    cfg: &InjectConfig,
    j: usize,
    seed: u64,
    day_lo: usize,
    day_hi: usize,
) -> (TrainingSet, Vec<Vec<usize>>) {
    let mut snaps = Vec::new();
    let mut labels = Vec::new();
    for idx in 0..j {
        let sub = seeds::derive(seed, seeds::stage::TRAIN, idx as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        let day = rng.random_range(day_lo..=day_hi);
        let inj = inject_outbreak(truth, mu, cfg, rng.random()).unwrap();
        snaps.push(inj.days[day - 1].clone());
        labels.push(inj.affected[day - 1].clone());
    }
    (TrainingSet::new(snaps, Distribution::Poisson).unwrap(), labels)
}

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(41);
    let n = 50;
    let truth = gen_erdos_renyi(n, 0.1, seeds::derive(seed, seeds::stage::GRAPH, 0)).unwrap();
    let (mu, _) =
        gen_baselines(n, 0, 1.0, 10.0, seeds::derive(seed, seeds::stage::BASELINES, 0)).unwrap();
    let cfg = InjectConfig::default();
    let engine = SearchEngine::uls();
    let truth_m = truth.edge_count();
    println!("truth m={truth_m}");

    for (name, lo, hi) in [("uniform 1..14", 1, 14), ("late 8..14", 8, 14), ("day 14", 14, 14)] {
        let (ts, labels) = build_ts(&truth, &mu, &cfg, 200, seed, lo, hi);
        let mut overlaps: Vec<f64> = (0..ts.len())
            .map(|j| overlap_coefficient(&ts.unconstrained(j).nodes, &labels[j]).unwrap())
            .collect();
        overlaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean: f64 = overlaps.iter().sum::<f64>() / overlaps.len() as f64;

        let seq = learn_sequence(&ts, EdgeSelector::GrCorr, &engine, Distribution::Poisson)
            .unwrap();
        let stats = randomization_stats(&ts, &engine, Distribution::Poisson, 100, seed).unwrap();
        let curve = most_significant(&seq, &stats).unwrap();
        let at_star = edge_precision_recall(&curve.graph, &truth).unwrap();
        let at_truth = edge_precision_recall(&seq.graph_at(truth_m).unwrap(), &truth).unwrap();
        println!(
            "{name}: S* overlap mean={mean:.3}; m*={} z*={:.1} | at m*: p={:.3} r={:.3} | at truth m: p={:.3} r={:.3}",
            curve.m_star,
            curve.z[curve.m_star].unwrap(),
            at_star.precision,
            at_star.recall,
            at_truth.precision,
            at_truth.recall
        );
    }
}
