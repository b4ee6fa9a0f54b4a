//! Detection and graph-recovery metrics, plus the end-to-end benchmark:
//! generate a truth graph, train on simulated outbreaks, learn a structure
//! with each requested method, pick the most significant graph, and measure
//! edge precision/recall and detection performance on fresh test injects.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as IoWrite;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::learn::{
    learn_sequence, most_significant, randomization_stats, EdgeSelector, RandomizationStats,
    SignificanceCurve,
};
use crate::scan::{Distribution, Snapshot};
use crate::search::{best_subgraph, best_subgraph_indexed, NeighborhoodIndex, SearchEngine, SearchMethod};
use crate::seeds;
use crate::simulate::{
    add_travel_edges, gen_baselines, gen_erdos_renyi, gen_pref_attachment, inject_outbreak,
    make_training_set, null_snapshots, InjectConfig, LabeledInject,
};

/// Days per month used to convert a false-positive budget into a percentile:
/// 1 fp/month maps to the 96.7th percentile of daily null scores.
pub const DAYS_PER_MONTH: f64 = 30.4;

/// Edge precision/recall of a learned graph against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub precision: f64,
    pub recall: f64,
    pub learned_edges: usize,
    pub true_edges: usize,
    /// False when the learned graph has no edges (precision reported as 0).
    pub precision_defined: bool,
}

pub fn edge_precision_recall(learned: &Graph, truth: &Graph) -> Result<EdgeReport> {
    if learned.n() != truth.n() {
        return Err(Error::invalid(format!(
            "graphs disagree on node count ({} vs {})",
            learned.n(),
            truth.n()
        )));
    }
    let truth_set: BTreeSet<_> = truth.edges().iter().collect();
    let hits = learned
        .edges()
        .iter()
        .filter(|e| truth_set.contains(e))
        .count();
    let learned_edges = learned.edge_count();
    let true_edges = truth.edge_count();
    let precision_defined = learned_edges > 0;
    Ok(EdgeReport {
        precision: if precision_defined {
            hits as f64 / learned_edges as f64
        } else {
            0.0
        },
        recall: if true_edges > 0 {
            hits as f64 / true_edges as f64
        } else {
            0.0
        },
        learned_edges,
        true_edges,
        precision_defined,
    })
}

/// Jaccard overlap |detected ∩ truth| / |detected ∪ truth|. The truth set
/// must be non-empty; an empty detection scores 0.
pub fn overlap_coefficient(detected: &[usize], truth: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::invalid("overlap against an empty truth set is undefined"));
    }
    let d: BTreeSet<_> = detected.iter().collect();
    let t: BTreeSet<_> = truth.iter().collect();
    let inter = d.intersection(&t).count();
    let union = d.union(&t).count();
    Ok(inter as f64 / union as f64)
}

/// Score threshold for a daily false-positive budget: the
/// (1 - fp_per_month/30.4) empirical percentile of daily null scores, by the
/// nearest-rank rule (rank = round(level * n), clamped to [1, n]).
pub fn detection_threshold(null_scores: &[f64], fp_per_month: f64) -> Result<f64> {
    if null_scores.len() < 30 {
        return Err(Error::invalid(format!(
            "need at least 30 null scores to calibrate, got {}",
            null_scores.len()
        )));
    }
    if !(fp_per_month > 0.0 && fp_per_month < DAYS_PER_MONTH) {
        return Err(Error::invalid(format!(
            "fp_per_month must lie in (0, {DAYS_PER_MONTH}), got {fp_per_month}"
        )));
    }
    let level = 1.0 - fp_per_month / DAYS_PER_MONTH;
    let mut sorted = null_scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let rank = ((level * n as f64).round() as usize).clamp(1, n);
    Ok(sorted[rank - 1])
}

/// Detection performance for one neighborhood size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Neighborhood size; None means unconstrained connected search.
    pub k: Option<usize>,
    pub threshold: f64,
    /// First day each inject's score exceeds the threshold (duration if never).
    pub detection_days: Vec<usize>,
    pub mean_days: f64,
    /// Midpoint-day overlap between detected and true affected sets.
    pub overlaps: Vec<f64>,
    pub mean_overlap: f64,
    /// Fraction of injects detected at all within the outbreak.
    pub tpr: f64,
}

fn scan_with(
    engine: &SearchEngine,
    g: &Graph,
    index: Option<&NeighborhoodIndex>,
    snap: &Snapshot,
    dist: Distribution,
) -> Result<crate::scan::ScoredSubset> {
    match index {
        Some(idx) => best_subgraph_indexed(engine, idx, snap, dist),
        None => best_subgraph(engine, g, snap, dist),
    }
}

/// Evaluate detection on test injects against null-day calibration, once per
/// entry of `k_sweep`.
pub fn evaluate_detection(
    g_eval: &Graph,
    engine: &SearchEngine,
    dist: Distribution,
    test_injects: &[LabeledInject],
    null_days: &[Snapshot],
    fp_per_month: f64,
    k_sweep: &[Option<usize>],
) -> Result<Vec<DetectionReport>> {
    if test_injects.is_empty() {
        return Err(Error::invalid("no test injects to evaluate"));
    }
    let mut reports = Vec::with_capacity(k_sweep.len());
    for &k in k_sweep {
        let mut eng = *engine;
        eng.neighborhood_k = None;
        let index = match k {
            Some(k) => Some(NeighborhoodIndex::build(g_eval, k)?),
            None => None,
        };
        let null_scores: Vec<f64> = null_days
            .par_iter()
            .map(|d| scan_with(&eng, g_eval, index.as_ref(), d, dist).map(|s| s.score))
            .collect::<Result<_>>()?;
        let threshold = detection_threshold(&null_scores, fp_per_month)?;

        let per_inject: Vec<(usize, f64, bool)> = test_injects
            .par_iter()
            .map(|inj| -> Result<(usize, f64, bool)> {
                let duration = inj.days.len();
                let mut day = duration;
                let mut detected = false;
                for d in 1..=duration {
                    let s = scan_with(&eng, g_eval, index.as_ref(), &inj.days[d - 1], dist)?;
                    if s.score > threshold {
                        day = d;
                        detected = true;
                        break;
                    }
                }
                // Midpoint overlap is computed from the midpoint-day scan
                // regardless of whether that day crossed the threshold.
                let mid = duration.div_ceil(2);
                let mid_scan = scan_with(&eng, g_eval, index.as_ref(), &inj.days[mid - 1], dist)?;
                let overlap = overlap_coefficient(&mid_scan.nodes, &inj.affected[mid - 1])?;
                Ok((day, overlap, detected))
            })
            .collect::<Result<_>>()?;

        let nf = per_inject.len() as f64;
        let detection_days: Vec<usize> = per_inject.iter().map(|r| r.0).collect();
        let overlaps: Vec<f64> = per_inject.iter().map(|r| r.1).collect();
        reports.push(DetectionReport {
            k,
            threshold,
            mean_days: detection_days.iter().sum::<usize>() as f64 / nf,
            mean_overlap: overlaps.iter().sum::<f64>() / nf,
            tpr: per_inject.iter().filter(|r| r.2).count() as f64 / nf,
            detection_days,
            overlaps,
        })
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Benchmark driver
// ---------------------------------------------------------------------------

/// A BestSubgraph/BestEdge combination, e.g. "uls-grcorr".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub engine: SearchMethod,
    pub selector: EdgeSelector,
}

impl MethodSpec {
    /// Accepts "engine-selector" ("uls-grcorr", "exact-pscorr") or a bare
    /// selector ("grcorr"), which defaults to the ULS engine.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        match lower.split_once('-') {
            Some((eng, sel)) => Ok(MethodSpec {
                engine: SearchMethod::parse(eng)?,
                selector: EdgeSelector::parse(sel)?,
            }),
            None => Ok(MethodSpec {
                engine: SearchMethod::Uls,
                selector: EdgeSelector::parse(&lower)?,
            }),
        }
    }

    pub fn name(&self) -> String {
        format!("{}-{}", self.engine.name(), self.selector.name())
    }
}

fn default_mean_low() -> f64 {
    1.0
}
fn default_mean_high() -> f64 {
    10.0
}
fn default_inject_fraction() -> f64 {
    1.0
}
fn default_fp() -> f64 {
    1.0
}
fn default_r() -> usize {
    100
}
fn default_dist() -> Distribution {
    Distribution::Poisson
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphConfig {
    /// "er" (needs `p`) or "pa".
    pub family: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub travel_edges: usize,
}

impl GraphConfig {
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        let g = match self.family.as_str() {
            "er" => {
                let p = self
                    .p
                    .ok_or_else(|| Error::invalid("er graphs need an edge probability p"))?;
                gen_erdos_renyi(self.n, p, seeds::derive(seed, seeds::stage::GRAPH, 0))?
            }
            "pa" => gen_pref_attachment(self.n, seeds::derive(seed, seeds::stage::GRAPH, 0))?,
            other => return Err(Error::invalid(format!("unknown graph family '{other}'"))),
        };
        if self.travel_edges > 0 {
            add_travel_edges(&g, self.travel_edges, seeds::derive(seed, seeds::stage::GRAPH, 1))
        } else {
            Ok(g)
        }
    }
}

/// Everything one benchmark run needs; a run is deterministic in `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub graph: GraphConfig,
    #[serde(default = "default_mean_low")]
    pub mean_low: f64,
    #[serde(default = "default_mean_high")]
    pub mean_high: f64,
    #[serde(default)]
    pub inject: InjectConfig,
    pub train_j: usize,
    #[serde(default = "default_inject_fraction")]
    pub inject_fraction: f64,
    /// Method names per [`MethodSpec::parse`].
    pub methods: Vec<String>,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default = "default_fp")]
    pub fp_per_month: f64,
    /// Neighborhood sizes for detection; 0 means unconstrained.
    pub k_sweep: Vec<usize>,
    pub test_injects: usize,
    pub null_days: usize,
    #[serde(default = "default_dist")]
    pub distribution: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub method: String,
    pub true_edges: usize,
    pub learned_edges: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub method: String,
    pub k: usize,
    pub mean_days: f64,
    pub mean_overlap: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub m_star: usize,
    pub learned_edges: usize,
    pub best_subgraph_calls: u64,
    pub mean_replay_calls_per_example: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchManifest {
    pub config: BenchConfig,
    pub n: usize,
    pub true_edges: usize,
    pub methods: BTreeMap<String, MethodSummary>,
}

/// All outputs of one benchmark run. CSV renderings are exact and stable, so
/// identical configs and seeds produce byte-identical bundles.
#[derive(Debug, Clone)]
pub struct BenchmarkBundle {
    pub edge_rows: Vec<EdgeRow>,
    pub detection_rows: Vec<DetectionRow>,
    pub manifest: BenchManifest,
    /// The significance curve per method, for inspection and tests.
    pub curves: BTreeMap<String, SignificanceCurve>,
}

impl BenchmarkBundle {
    pub fn edges_csv(&self) -> String {
        let mut s = String::from("method,true_edges,learned_edges,precision,recall\n");
        for r in &self.edge_rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.method, r.true_edges, r.learned_edges, r.precision, r.recall
            ));
        }
        s
    }

    pub fn detection_csv(&self) -> String {
        let mut s = String::from("method,k,mean_days,mean_overlap,tpr\n");
        for r in &self.detection_rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.method, r.k, r.mean_days, r.mean_overlap, r.tpr
            ));
        }
        s
    }

    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n"
    }

    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("edges.csv"))?;
        f.write_all(self.edges_csv().as_bytes())?;
        let mut f = std::fs::File::create(dir.join("detection.csv"))?;
        f.write_all(self.detection_csv().as_bytes())?;
        let mut f = std::fs::File::create(dir.join("manifest.json"))?;
        f.write_all(self.manifest_json().as_bytes())?;
        Ok(())
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::in_stage(name, e))
}

/// Run one full benchmark: simulate, learn with every requested method, pick
/// each most significant graph, and evaluate detection on fresh injects.
/// Randomization replays depend only on the engine, so methods sharing an
/// engine share them.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchmarkBundle> {
    let dist = cfg.distribution;
    let methods: Vec<MethodSpec> = cfg
        .methods
        .iter()
        .map(|m| MethodSpec::parse(m))
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::invalid("no methods requested"));
    }
    if cfg.null_days < 30 {
        return Err(Error::invalid("null_days must be at least 30"));
    }

    let truth = stage("simulate", cfg.graph.generate(cfg.seed))?;
    let (baselines, _) = stage(
        "simulate",
        gen_baselines(
            cfg.graph.n,
            0,
            cfg.mean_low,
            cfg.mean_high,
            seeds::derive(cfg.seed, seeds::stage::BASELINES, 0),
        ),
    )?;
    let (ts, _labels) = stage(
        "simulate",
        make_training_set(
            &truth,
            &baselines,
            &cfg.inject,
            cfg.train_j,
            cfg.inject_fraction,
            dist,
            cfg.seed,
        ),
    )?;
    let test_injects: Vec<LabeledInject> = stage(
        "simulate",
        (0..cfg.test_injects)
            .map(|i| {
                inject_outbreak(
                    &truth,
                    &baselines,
                    &cfg.inject,
                    seeds::derive(cfg.seed, seeds::stage::TEST_INJECTS, i as u64),
                )
            })
            .collect(),
    )?;
    let null_days = stage(
        "simulate",
        null_snapshots(
            &baselines,
            cfg.null_days,
            seeds::derive(cfg.seed, seeds::stage::NULL_DAYS, 0),
        ),
    )?;

    // Replay statistics are selector-independent; compute once per engine.
    let mut replay_cache: BTreeMap<&'static str, RandomizationStats> = BTreeMap::new();
    let mut edge_rows = Vec::new();
    let mut detection_rows = Vec::new();
    let mut curves = BTreeMap::new();
    let mut summaries = BTreeMap::new();

    for spec in &methods {
        let engine = SearchEngine::new(spec.engine);
        let name = spec.name();
        let seq = stage("learn", learn_sequence(&ts, spec.selector, &engine, dist))?;
        if !replay_cache.contains_key(spec.engine.name()) {
            let stats = stage(
                "significance",
                randomization_stats(&ts, &engine, dist, cfg.r, cfg.seed),
            )?;
            replay_cache.insert(spec.engine.name(), stats);
        }
        let stats = &replay_cache[spec.engine.name()];
        let curve = stage("significance", most_significant(&seq, stats))?;

        let report = stage("evaluate", edge_precision_recall(&curve.graph, &truth))?;
        edge_rows.push(EdgeRow {
            method: name.clone(),
            true_edges: report.true_edges,
            learned_edges: report.learned_edges,
            precision: report.precision,
            recall: report.recall,
        });

        let k_sweep: Vec<Option<usize>> = cfg
            .k_sweep
            .iter()
            .map(|&k| if k == 0 { None } else { Some(k) })
            .collect();
        let detections = stage(
            "evaluate",
            evaluate_detection(
                &curve.graph,
                &engine,
                dist,
                &test_injects,
                &null_days,
                cfg.fp_per_month,
                &k_sweep,
            ),
        )?;
        for rep in detections {
            detection_rows.push(DetectionRow {
                method: name.clone(),
                k: rep.k.unwrap_or(0),
                mean_days: rep.mean_days,
                mean_overlap: rep.mean_overlap,
                tpr: rep.tpr,
            });
        }

        summaries.insert(
            name.clone(),
            MethodSummary {
                m_star: curve.m_star,
                learned_edges: curve.graph.edge_count(),
                best_subgraph_calls: seq.best_subgraph_calls,
                mean_replay_calls_per_example: stats.mean_calls_per_example,
            },
        );
        curves.insert(name, curve);
    }

    Ok(BenchmarkBundle {
        edge_rows,
        detection_rows,
        manifest: BenchManifest {
            config: cfg.clone(),
            n: truth.n(),
            true_edges: truth.edge_count(),
            methods: summaries,
        },
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use crate::scan::Distribution;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edge_metrics_examples() {
        let truth = gen_erdos_renyi(12, 0.3, 1).unwrap();
        let same = edge_precision_recall(&truth, &truth).unwrap();
        assert_eq!(same.precision, 1.0);
        assert_eq!(same.recall, 1.0);

        // Truth plus one spurious edge when |E_T| = 9: precision 0.9, recall 1.
        let mut nine = Graph::empty(10);
        for i in 0..9 {
            nine = nine.add_edge(crate::graph::Edge::new(i, i + 1).unwrap()).unwrap();
        }
        let extra = nine.add_edge(crate::graph::Edge::new(0, 5).unwrap()).unwrap();
        let rep = edge_precision_recall(&extra, &nine).unwrap();
        assert!((rep.precision - 0.9).abs() < 1e-12);
        assert_eq!(rep.recall, 1.0);

        let disjoint = Graph::new(10, [(0, 2), (4, 6)]).unwrap();
        let other = Graph::new(10, [(1, 3), (5, 7)]).unwrap();
        let rep = edge_precision_recall(&disjoint, &other).unwrap();
        assert_eq!(rep.precision, 0.0);
        assert_eq!(rep.recall, 0.0);

        let none = Graph::empty(10);
        let rep = edge_precision_recall(&none, &nine).unwrap();
        assert!(!rep.precision_defined);
        assert_eq!(rep.precision, 0.0);

        assert!(edge_precision_recall(&Graph::empty(3), &Graph::empty(4)).is_err());
    }

    #[test]
    fn precision_recall_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = gen_erdos_renyi(10, rng.random_range(0.1..0.5), rng.random()).unwrap();
            let b = gen_erdos_renyi(10, rng.random_range(0.1..0.5), rng.random()).unwrap();
            let ab = edge_precision_recall(&a, &b).unwrap();
            let ba = edge_precision_recall(&b, &a).unwrap();
            assert!((ab.precision - ba.recall).abs() < 1e-12);
            assert!((ab.recall - ba.precision).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_coefficient(&[1, 2], &[1, 2]).unwrap(), 1.0);
        assert!((overlap_coefficient(&[1, 2], &[2, 3]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(overlap_coefficient(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(overlap_coefficient(&[], &[1]).unwrap(), 0.0);
        assert!(overlap_coefficient(&[1], &[]).is_err());
    }

    #[test]
    fn threshold_nearest_rank() {
        // 1000 distinct sorted scores: 1 fp/month lands on the 967th order
        // statistic, leaving exactly 33 strictly above.
        let scores: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        let thr = detection_threshold(&scores, 1.0).unwrap();
        assert_eq!(thr, 967.0);
        assert_eq!(scores.iter().filter(|&&s| s > thr).count(), 33);

        let flat = vec![2.5; 100];
        assert_eq!(detection_threshold(&flat, 1.0).unwrap(), 2.5);
        assert!(detection_threshold(&scores[..10], 1.0).is_err());
        assert!(detection_threshold(&scores, 0.0).is_err());
    }

    #[test]
    fn threshold_self_consistency() {
        // Scoring null days against their own threshold flags ~3.3%.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scores: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..50.0)).collect();
        let thr = detection_threshold(&scores, 1.0).unwrap();
        let flagged = scores.iter().filter(|&&s| s > thr).count() as f64 / 1000.0;
        assert!((flagged - 0.033).abs() < 0.015, "flagged {flagged}");
    }

    fn tiny_setup() -> (Graph, Vec<f64>, Vec<LabeledInject>, Vec<Snapshot>) {
        let g = gen_erdos_renyi(15, 0.25, 3).unwrap();
        let (mu, _) = gen_baselines(15, 0, 2.0, 8.0, 4).unwrap();
        let cfg = InjectConfig::default();
        let injects: Vec<LabeledInject> = (0..20)
            .map(|i| inject_outbreak(&g, &mu, &cfg, 100 + i).unwrap())
            .collect();
        let nulls = null_snapshots(&mu, 120, 9).unwrap();
        (g, mu, injects, nulls)
    }

    #[test]
    fn detection_report_basics() {
        let (g, _, injects, nulls) = tiny_setup();
        let reports = evaluate_detection(
            &g,
            &SearchEngine::uls(),
            Distribution::Poisson,
            &injects,
            &nulls,
            1.0,
            &[None, Some(5)],
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        for rep in &reports {
            assert!(rep.detection_days.iter().all(|&d| (1..=14).contains(&d)));
            assert!(rep.overlaps.iter().all(|&o| (0.0..=1.0).contains(&o)));
            assert!((0.0..=1.0).contains(&rep.tpr));
        }
    }

    #[test]
    fn lower_threshold_detects_no_later() {
        let (g, _, injects, nulls) = tiny_setup();
        let eng = SearchEngine::uls();
        let base = evaluate_detection(
            &g,
            &eng,
            Distribution::Poisson,
            &injects,
            &nulls,
            1.0,
            &[None],
        )
        .unwrap();
        let looser = evaluate_detection(
            &g,
            &eng,
            Distribution::Poisson,
            &injects,
            &nulls,
            4.0, // larger fp budget -> lower threshold
            &[None],
        )
        .unwrap();
        for (a, b) in base[0].detection_days.iter().zip(&looser[0].detection_days) {
            assert!(b <= a, "lower threshold delayed a detection");
        }
    }

    #[test]
    fn complete_graph_scores_dominate_sparser_eval_graph() {
        let (g, _, injects, nulls) = tiny_setup();
        let complete = Graph::complete(15);
        let eng = SearchEngine::uls();
        // Per-day score dominance: the unconstrained (complete-graph) search
        // can never score below the constrained one.
        for inj in injects.iter().take(5) {
            for day in &inj.days {
                let un = best_subgraph(&eng, &complete, day, Distribution::Poisson).unwrap();
                let con = best_subgraph(&eng, &g, day, Distribution::Poisson).unwrap();
                assert!(un.score >= con.score - 1e-12);
            }
        }
        let _ = nulls;
    }

    #[test]
    fn saturated_inject_detected_on_day_one() {
        let g = gen_erdos_renyi(10, 0.3, 5).unwrap();
        let (mu, _) = gen_baselines(10, 0, 2.0, 4.0, 6).unwrap();
        let cfg = InjectConfig {
            spread_rate: 5,
            spread_factor: 50.0,
            duration: 5,
        };
        let mut inj = inject_outbreak(&g, &mu, &cfg, 7).unwrap();
        // Saturate day 1 beyond any null fluctuation.
        let huge: Vec<f64> = (0..10).map(|i| inj.days[0].count(i) + 500.0).collect();
        inj.days[0] = Snapshot::new(huge, mu.clone()).unwrap();
        let nulls = null_snapshots(&mu, 60, 8).unwrap();
        let rep = evaluate_detection(
            &g,
            &SearchEngine::uls(),
            Distribution::Poisson,
            &[inj],
            &nulls,
            1.0,
            &[None],
        )
        .unwrap();
        assert_eq!(rep[0].detection_days, vec![1]);
        assert_eq!(rep[0].tpr, 1.0);
    }

    #[test]
    fn method_spec_parsing() {
        let m = MethodSpec::parse("uls-grcorr").unwrap();
        assert_eq!(m.engine, SearchMethod::Uls);
        assert_eq!(m.selector, EdgeSelector::GrCorr);
        let m = MethodSpec::parse("exact-corr").unwrap();
        assert_eq!(m.engine, SearchMethod::Exact);
        let m = MethodSpec::parse("pscorr").unwrap();
        assert_eq!(m.engine, SearchMethod::Uls);
        assert!(MethodSpec::parse("uls-bogus").is_err());
        assert!(MethodSpec::parse("bogus-corr").is_err());
    }

    #[test]
    fn benchmark_bundle_deterministic() {
        let cfg = BenchConfig {
            seed: 11,
            graph: GraphConfig {
                family: "er".into(),
                n: 12,
                p: Some(0.25),
                travel_edges: 0,
            },
            mean_low: 2.0,
            mean_high: 6.0,
            inject: InjectConfig {
                spread_rate: 2,
                spread_factor: 2.0,
                duration: 8,
            },
            train_j: 25,
            inject_fraction: 1.0,
            methods: vec!["uls-pscorr".into(), "uls-corr".into()],
            r: 10,
            fp_per_month: 1.0,
            k_sweep: vec![5],
            test_injects: 10,
            null_days: 40,
            distribution: Distribution::Poisson,
        };
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a.edges_csv(), b.edges_csv());
        assert_eq!(a.detection_csv(), b.detection_csv());
        assert_eq!(a.manifest_json(), b.manifest_json());
        assert_eq!(a.edge_rows.len(), 2);
        assert_eq!(a.detection_rows.len(), 2);
    }
}
