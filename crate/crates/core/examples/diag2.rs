//! Scratch diagnostic 2: how informative are the unconstrained optima, and
//! does the greedy beat pure correlation at matched sparsity?

use scanlearn::evaluate::{edge_precision_recall, overlap_coefficient};
use scanlearn::learn::{learn_sequence, EdgeSelector};
use scanlearn::scan::Distribution;
use scanlearn::search::SearchEngine;
use scanlearn::seeds;
use scanlearn::simulate::{gen_baselines, gen_erdos_renyi, make_training_set, InjectConfig};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(41);
    let n = 50;
    let truth = gen_erdos_renyi(n, 0.1, seeds::derive(seed, seeds::stage::GRAPH, 0)).unwrap();
    let (mu, _) =
        gen_baselines(n, 0, 1.0, 10.0, seeds::derive(seed, seeds::stage::BASELINES, 0)).unwrap();
    let cfg = InjectConfig::default();
    let (ts, labels) =
        make_training_set(&truth, &mu, &cfg, 200, 1.0, Distribution::Poisson, seed).unwrap();

    // How close is each unconstrained optimum to the true affected set?
    let mut overlaps = Vec::new();
    for j in 0..ts.len() {
        if labels[j].is_empty() {
            continue;
        }
        let s = ts.unconstrained(j);
        overlaps.push(overlap_coefficient(&s.nodes, &labels[j]).unwrap());
    }
    overlaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean: f64 = overlaps.iter().sum::<f64>() / overlaps.len() as f64;
    println!(
        "S*_j vs S^T_j overlap: mean={:.3} median={:.3} q10={:.3} q90={:.3}",
        mean,
        overlaps[overlaps.len() / 2],
        overlaps[overlaps.len() / 10],
        overlaps[overlaps.len() * 9 / 10]
    );

    let engine = SearchEngine::uls();
    let truth_m = truth.edge_count();
    for sel in [EdgeSelector::GrCorr, EdgeSelector::PsCorr, EdgeSelector::Corr] {
        let seq = learn_sequence(&ts, sel, &engine, Distribution::Poisson).unwrap();
        for m in [truth_m, 200, 300] {
            let g = seq.graph_at(m).unwrap();
            let rep = edge_precision_recall(&g, &truth).unwrap();
            println!(
                "{:?} at m={:3}: precision={:.3} recall={:.3} fnorm={:.4}",
                sel, m, rep.precision, rep.recall, seq.fnorm[m]
            );
        }
    }
}
