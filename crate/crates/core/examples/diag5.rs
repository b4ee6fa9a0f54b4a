//! Scratch diagnostic 5: z landscape in the planted strong-signal regime
//! (N=10 tree+chords, pair examples + connected blobs) and in small-baseline
//! noisy regimes.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use scanlearn::evaluate::edge_precision_recall;
use scanlearn::graph::{Edge, Graph};
use scanlearn::learn::{
    learn_sequence, most_significant, randomization_stats, EdgeSelector, TrainingSet,
};
use scanlearn::scan::{Distribution, Snapshot};
use scanlearn::search::SearchEngine;
use scanlearn::seeds;
use scanlearn::simulate::{gen_baselines, gen_erdos_renyi, make_training_set, InjectConfig};

fn strong_signal(n: usize, baselines: &[f64], affected: &[usize]) -> Snapshot {
    let counts: Vec<f64> = (0..n)
        .map(|i| {
            if affected.contains(&i) {
                3.0 * baselines[i]
            } else {
                baselines[i] * (1.0 + 0.001 + 0.009 * (i % 7) as f64 / 7.0)
            }
        })
        .collect();
    Snapshot::new(counts, baselines.to_vec()).unwrap()
}

fn planted_graph(n: usize, chords: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((order[i], parent));
    }
    let mut g = Graph::new(n, edges).unwrap();
    let mut added = 0;
    while added < chords {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b && !g.has_edge(a, b) {
            g = g.add_edge(Edge::new(a, b).unwrap()).unwrap();
            added += 1;
        }
    }
    g
}

fn main() {
    // Planted N=10 scenario.
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let n = 10;
    let g_t = planted_graph(n, 3, &mut rng);
    let baselines: Vec<f64> = (0..n).map(|i| 4.0 + (i % 5) as f64).collect();
    let mut snaps: Vec<Snapshot> = g_t
        .edges()
        .iter()
        .map(|e| strong_signal(n, &baselines, &[e.a(), e.b()]))
        .collect();
    for _ in 0..50 {
        // random connected blob: BFS ball around a random center
        let center = rng.random_range(0..n);
        let size = rng.random_range(3..=6);
        let mut ball = vec![center];
        let mut frontier = vec![center];
        while ball.len() < size && !frontier.is_empty() {
            let v = frontier.remove(0);
            for &w in g_t.neighbors(v) {
                if !ball.contains(&w) && ball.len() < size {
                    ball.push(w);
                    frontier.push(w);
                }
            }
        }
        ball.sort_unstable();
        snaps.push(strong_signal(n, &baselines, &ball));
    }
    let ts = TrainingSet::new(snaps, Distribution::Poisson).unwrap();
    let engine = SearchEngine::uls();
    let seq = learn_sequence(&ts, EdgeSelector::GrCorr, &engine, Distribution::Poisson).unwrap();
    let stats = randomization_stats(&ts, &engine, Distribution::Poisson, 100, 77).unwrap();
    let curve = most_significant(&seq, &stats).unwrap();
    println!(
        "planted N=10: |E_T|={} m*={} | at m_T: edges match={}",
        g_t.edge_count(),
        curve.m_star,
        seq.graph_at(g_t.edge_count()).unwrap().edges() == g_t.edges()
    );
    for m in 1..=20 {
        println!(
            "  m={m:2} fnorm={:.4} mu={:.4} sigma={:.5} z={}",
            seq.fnorm[m],
            stats.mu[m],
            stats.sigma[m],
            curve.z[m].map(|z| format!("{z:.2}")).unwrap_or_default()
        );
    }

    // Small-baseline criterion-7 regime.
    let seed = 41;
    let n = 50;
    let truth = gen_erdos_renyi(n, 0.1, seeds::derive(seed, seeds::stage::GRAPH, 0)).unwrap();
    for (lo, hi) in [(0.1, 1.0)] {
        let (mu, _) =
            gen_baselines(n, 0, lo, hi, seeds::derive(seed, seeds::stage::BASELINES, 0)).unwrap();
        let cfg = InjectConfig::default();
        let (ts, _) =
            make_training_set(&truth, &mu, &cfg, 200, 1.0, Distribution::Poisson, seed).unwrap();
        let seq =
            learn_sequence(&ts, EdgeSelector::GrCorr, &engine, Distribution::Poisson).unwrap();
        let stats = randomization_stats(&ts, &engine, Distribution::Poisson, 100, seed).unwrap();
        let curve = most_significant(&seq, &stats).unwrap();
        let at_star = edge_precision_recall(&curve.graph, &truth).unwrap();
        let mut best = (0usize, 0.0f64, 0.0f64);
        for m in 1..=seq.m_total() {
            let rep = edge_precision_recall(&seq.graph_at(m).unwrap(), &truth).unwrap();
            if rep.recall >= 0.6 && rep.precision > best.1 {
                best = (m, rep.precision, rep.recall);
            }
        }
        println!(
            "mu [{lo},{hi}] truth m={}: m*={} p={:.3} r={:.3} | best(p | r>=.6): m={} p={:.3} r={:.3}",
            truth.edge_count(),
            curve.m_star,
            at_star.precision,
            at_star.recall,
            best.0,
            best.1,
            best.2
        );
        let spots = [5usize, 10, 20, 40, 80, 120, 160, 200, 260, 320];
        for m in spots {
            println!(
                "  m={m:3} fnorm={:.4} mu={:.4} sigma={:.5} z={}",
                seq.fnorm[m],
                stats.mu[m],
                stats.sigma[m],
                curve.z[m].map(|z| format!("{z:.2}")).unwrap_or_default()
            );
        }
    }
}
