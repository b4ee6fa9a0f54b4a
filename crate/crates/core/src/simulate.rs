//! Synthetic data generation: random graph families, null baseline counts,
//! and graph-propagated outbreak injection.
//!
//! Outbreaks follow a Susceptible-Infected spread over a source graph: a
//! uniformly random center, the remaining nodes ordered by hop distance with
//! random tie-breaks, and on day d the first `spread_rate * d` nodes affected.
//! Each affected node's count is incremented by Poisson(lambda) with
//!
//! `lambda_i_t = spread_factor * d / (spread_factor + ln(dist_i + 1))`
//!
//! so severity grows with the day and decays with distance from the center
//! (the center itself gets exactly d).
//!
//! All generators are pure functions of their seed; sub-seeds derive through
//! [`crate::seeds`] so independent pieces never share a stream.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as SampleDistribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Edge, Graph};
use crate::learn::TrainingSet;
use crate::scan::{Distribution, Snapshot};
use crate::seeds;

/// Outbreak injection parameters. The 14-day duration is the conventional
/// outbreak length; spread rate and severity factor are experiment knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectConfig {
    /// New-nodes-per-day factor: day d affects the spread_rate*d nearest nodes.
    pub spread_rate: usize,
    /// Severity decay control; larger spreads severity farther out.
    pub spread_factor: f64,
    /// Outbreak length in days.
    pub duration: usize,
}

impl Default for InjectConfig {
    fn default() -> Self {
        InjectConfig {
            spread_rate: 2,
            spread_factor: 2.0,
            duration: 14,
        }
    }
}

impl InjectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spread_rate < 1 {
            return Err(Error::invalid("spread_rate must be >= 1"));
        }
        if !(self.spread_factor > 0.0) {
            return Err(Error::invalid("spread_factor must be positive"));
        }
        if self.duration < 1 {
            return Err(Error::invalid("duration must be >= 1 day"));
        }
        Ok(())
    }

    /// Expected injected count at hop distance `dist` on day `d` (1-based).
    pub fn lambda(&self, d: usize, dist: usize) -> f64 {
        self.spread_factor * d as f64 / (self.spread_factor + ((dist + 1) as f64).ln())
    }
}

/// One simulated outbreak: the per-day snapshots (baseline noise plus
/// injected counts), the true affected sets, and the baseline-only counts
/// kept for verification. The labels exist for evaluation only; the learner
/// never sees them.
#[derive(Debug, Clone)]
pub struct LabeledInject {
    /// days[d-1] is the snapshot for outbreak day d.
    pub days: Vec<Snapshot>,
    /// affected[d-1] is S^T_d, ascending; nested across days.
    pub affected: Vec<Vec<usize>>,
    pub center: usize,
    /// Baseline-only counts per day, before injection.
    pub null_counts: Vec<Vec<f64>>,
}

/// Erdős–Rényi G(n, p): every pair independently with probability p.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("graph needs at least one node"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "edge probability must lie in (0, 1), got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, k));
            }
        }
    }
    Graph::new(n, edges)
}

/// Preferential attachment: seed a triangle on three random nodes, then add
/// the remaining nodes in random order, each attaching to existing node v
/// independently with probability deg(v)/sum(deg). Node degrees are capped at
/// ceil(0.2 n) (at least 2, so the seed triangle is legal); capped nodes stop
/// receiving attachments. A new node that would otherwise land isolated gets
/// one forced edge to a random uncapped node, keeping the graph connected.
pub fn gen_pref_attachment(n: usize, seed: u64) -> Result<Graph> {
    if n < 4 {
        return Err(Error::invalid("preferential attachment needs N >= 4"));
    }
    let cap = ((0.2 * n as f64).ceil() as usize).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut degree = vec![0usize; n];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let add = |edges: &mut Vec<(usize, usize)>, degree: &mut Vec<usize>, a: usize, b: usize| {
        edges.push((a, b));
        degree[a] += 1;
        degree[b] += 1;
    };
    let (a, b, c) = (order[0], order[1], order[2]);
    add(&mut edges, &mut degree, a, b);
    add(&mut edges, &mut degree, a, c);
    add(&mut edges, &mut degree, b, c);
    let mut existing = vec![a, b, c];
    existing.sort_unstable();
    for &v in &order[3..] {
        let total: usize = existing.iter().map(|&u| degree[u]).sum();
        let mut attached = false;
        for &u in &existing {
            if degree[u] >= cap {
                continue;
            }
            if degree[v] >= cap {
                break;
            }
            let p = degree[u] as f64 / total as f64;
            if rng.random_bool(p.min(1.0)) {
                add(&mut edges, &mut degree, v, u);
                attached = true;
            }
        }
        if !attached {
            let eligible: Vec<usize> = existing
                .iter()
                .copied()
                .filter(|&u| degree[u] < cap)
                .collect();
            let u = if eligible.is_empty() {
                existing[rng.random_range(0..existing.len())]
            } else {
                eligible[rng.random_range(0..eligible.len())]
            };
            add(&mut edges, &mut degree, v, u);
        }
        let pos = existing.binary_search(&v).unwrap_err();
        existing.insert(pos, v);
    }
    Graph::new(n, edges)
}

/// Add `count` uniformly random non-existing edges (simulated travel).
pub fn add_travel_edges(g: &Graph, count: usize, seed: u64) -> Result<Graph> {
    let n = g.n();
    let mut non_edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            if !g.has_edge(i, k) {
                non_edges.push((i, k));
            }
        }
    }
    if count > non_edges.len() {
        return Err(Error::invalid(format!(
            "asked for {count} travel edges but only {} pairs are free",
            non_edges.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, non_edges.len(), count);
    let mut out = g.clone();
    for idx in picks.iter() {
        let (i, k) = non_edges[idx];
        out = out.add_edge(Edge::new(i, k)?)?;
    }
    Ok(out)
}

/// Per-node expected counts drawn once from Uniform[mean_low, mean_high],
/// plus `days` of null counts x ~ Poisson(mu).
pub fn gen_baselines(
    n: usize,
    days: usize,
    mean_low: f64,
    mean_high: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if !(mean_low > 0.0 && mean_low <= mean_high) {
        return Err(Error::invalid(format!(
            "baseline mean range must satisfy 0 < low <= high, got [{mean_low}, {mean_high}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let baselines: Vec<f64> = (0..n)
        .map(|_| {
            if mean_low == mean_high {
                mean_low
            } else {
                rng.random_range(mean_low..mean_high)
            }
        })
        .collect();
    let counts = (0..days).map(|_| draw_null(&baselines, &mut rng)).collect();
    Ok((baselines, counts))
}

fn draw_null(baselines: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    baselines
        .iter()
        .map(|&mu| Poisson::new(mu).expect("mu > 0").sample(rng))
        .collect()
}

/// Baseline-only snapshots for `days` days (used for detection thresholds).
pub fn null_snapshots(baselines: &[f64], days: usize, seed: u64) -> Result<Vec<Snapshot>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..days)
        .map(|_| Snapshot::new(draw_null(baselines, &mut rng), baselines.to_vec()))
        .collect()
}

/// Simulate one outbreak over `g` per the module docs. The affected sets grow
/// as hop-distance prefixes from the center, so they stay nested over days
/// and connected whenever the source graph is connected.
pub fn inject_outbreak(
    g: &Graph,
    baselines: &[f64],
    cfg: &InjectConfig,
    seed: u64,
) -> Result<LabeledInject> {
    cfg.validate()?;
    if baselines.len() != g.n() {
        return Err(Error::invalid("baselines do not match graph size"));
    }
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = rng.random_range(0..n);
    let ordering = g.graph_distance_ordering(center, &mut rng)?;
    let hop = g.hop_distances(center);
    // Unreachable nodes sit at the end of the ordering; if the outbreak grows
    // past the reachable set, treat them as maximally distant.
    let max_hop = hop.iter().flatten().copied().max().unwrap_or(0);
    let mut days = Vec::with_capacity(cfg.duration);
    let mut affected_sets = Vec::with_capacity(cfg.duration);
    let mut null_counts = Vec::with_capacity(cfg.duration);
    for d in 1..=cfg.duration {
        let base = draw_null(baselines, &mut rng);
        let k = (cfg.spread_rate * d).min(n);
        let mut counts = base.clone();
        let mut affected: Vec<usize> = ordering[..k].to_vec();
        for &i in &affected {
            let dist = hop[i].unwrap_or(max_hop + 1);
            let lambda = cfg.lambda(d, dist);
            counts[i] += Poisson::new(lambda).expect("lambda > 0").sample(&mut rng);
        }
        affected.sort_unstable();
        days.push(Snapshot::new(counts, baselines.to_vec())?);
        affected_sets.push(affected);
        null_counts.push(base);
    }
    Ok(LabeledInject {
        days,
        affected: affected_sets,
        center,
        null_counts,
    })
}

/// Build a training set of J single-day snapshots. Each example is, with
/// probability `inject_fraction`, one uniformly random day of a fresh
/// outbreak, and otherwise a pure baseline day. Returns the per-example true
/// affected sets (empty for null examples) for evaluation only.
pub fn make_training_set(
    g: &Graph,
    baselines: &[f64],
    cfg: &InjectConfig,
    j: usize,
    inject_fraction: f64,
    dist: Distribution,
    seed: u64,
) -> Result<(TrainingSet, Vec<Vec<usize>>)> {
    if j < 1 {
        return Err(Error::invalid("training set needs J >= 1 examples"));
    }
    if !(0.0..=1.0).contains(&inject_fraction) {
        return Err(Error::invalid("inject fraction must lie in [0, 1]"));
    }
    cfg.validate()?;
    let mut snapshots = Vec::with_capacity(j);
    let mut labels = Vec::with_capacity(j);
    for idx in 0..j {
        let sub_seed = seeds::derive(seed, seeds::stage::TRAIN, idx as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        if rng.random_bool(inject_fraction) {
            let day = rng.random_range(1..=cfg.duration);
            let inject = inject_outbreak(g, baselines, cfg, rng.random())?;
            snapshots.push(inject.days[day - 1].clone());
            labels.push(inject.affected[day - 1].clone());
        } else {
            snapshots.push(Snapshot::new(draw_null(baselines, &mut rng), baselines.to_vec())?);
            labels.push(Vec::new());
        }
    }
    Ok((TrainingSet::new(snapshots, dist)?, labels))
}

// ---------------------------------------------------------------------------
// Dataset directory layout
// ---------------------------------------------------------------------------

/// Echo of how a dataset was generated, stored as meta.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub n: usize,
    pub j: usize,
    pub graph_family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_probability: Option<f64>,
    pub travel_edges: usize,
    pub mean_low: f64,
    pub mean_high: f64,
    pub inject_fraction: f64,
    pub inject: InjectConfig,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub baselines: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// True affected nodes per example; evaluation only.
    pub labels: Vec<Vec<usize>>,
    pub meta: DatasetMeta,
}

/// Write a dataset directory: graph.edges, baselines.csv, snapshots.csv,
/// labels.csv, meta.json.
pub fn write_dataset(dir: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    graph::write_edge_list_file(&ds.graph, dir.join("graph.edges"))?;

    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("baselines.csv"))?);
    writeln!(w, "node,mu")?;
    for (i, mu) in ds.baselines.iter().enumerate() {
        writeln!(w, "{i},{mu}")?;
    }

    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("snapshots.csv"))?);
    writeln!(w, "example,node,count")?;
    for (j, snap) in ds.snapshots.iter().enumerate() {
        for i in 0..snap.len() {
            writeln!(w, "{j},{i},{}", snap.count(i))?;
        }
    }

    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("labels.csv"))?);
    writeln!(w, "example,node")?;
    for (j, label) in ds.labels.iter().enumerate() {
        for i in label {
            writeln!(w, "{j},{i}")?;
        }
    }

    let meta = serde_json::to_string_pretty(&ds.meta)?;
    std::fs::write(dir.join("meta.json"), meta + "\n")?;
    Ok(())
}

fn csv_rows(path: &Path, expect_header: &str) -> Result<Vec<Vec<String>>> {
    let f = std::fs::File::open(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 {
            if line != expect_header {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    msg: format!("expected header '{expect_header}', found '{line}'"),
                });
            }
            continue;
        }
        rows.push(line.split(',').map(|s| s.trim().to_string()).collect());
    }
    Ok(rows)
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: usize, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field.parse().map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: row + 2,
        msg: format!("bad field '{field}': {e}"),
    })
}

/// Read a baselines.csv ("node,mu"); the node count is the highest id + 1 and
/// every node must be present.
pub fn read_baselines_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for (row, fields) in csv_rows(path, "node,mu")?.iter().enumerate() {
        if fields.len() != 2 {
            return Err(Error::invalid(format!("baselines.csv row {row} malformed")));
        }
        pairs.push((
            parse_field(path, row, &fields[0])?,
            parse_field(path, row, &fields[1])?,
        ));
    }
    let n = pairs
        .iter()
        .map(|&(i, _)| i + 1)
        .max()
        .ok_or_else(|| Error::invalid("baselines.csv has no rows"))?;
    let mut baselines = vec![f64::NAN; n];
    for (i, mu) in pairs {
        baselines[i] = mu;
    }
    if let Some(i) = baselines.iter().position(|m| m.is_nan()) {
        return Err(Error::invalid(format!("baselines.csv is missing node {i}")));
    }
    Ok(baselines)
}

/// Read a snapshots.csv ("example,node,count") into per-example count rows of
/// width `n`; unlisted cells default to 0.
pub fn read_counts_csv(path: impl AsRef<Path>, n: usize) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    let mut j_max = 0usize;
    for (row, fields) in csv_rows(path, "example,node,count")?.iter().enumerate() {
        if fields.len() != 3 {
            return Err(Error::invalid(format!("snapshots.csv row {row} malformed")));
        }
        let j: usize = parse_field(path, row, &fields[0])?;
        let i: usize = parse_field(path, row, &fields[1])?;
        if i >= n {
            return Err(Error::invalid(format!(
                "snapshots.csv: node {i} out of range (N={n})"
            )));
        }
        j_max = j_max.max(j + 1);
        cells.push((j, i, parse_field(path, row, &fields[2])?));
    }
    let mut counts = vec![vec![0.0; n]; j_max];
    for (j, i, x) in cells {
        counts[j][i] = x;
    }
    Ok(counts)
}

/// Read a dataset directory written by [`write_dataset`].
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json"))?)?;
    let graph = graph::read_edge_list_file(dir.join("graph.edges"), Some(meta.n))?;

    let baselines = read_baselines_csv(dir.join("baselines.csv"))?;
    if baselines.len() != meta.n {
        return Err(Error::invalid(format!(
            "baselines.csv covers {} nodes, meta says {}",
            baselines.len(),
            meta.n
        )));
    }

    let mut counts = read_counts_csv(dir.join("snapshots.csv"), meta.n)?;
    if counts.len() > meta.j {
        return Err(Error::invalid(format!(
            "snapshots.csv has {} examples, meta says {}",
            counts.len(),
            meta.j
        )));
    }
    counts.resize(meta.j, vec![0.0; meta.n]);
    let snapshots: Vec<Snapshot> = counts
        .into_iter()
        .map(|c| Snapshot::new(c, baselines.clone()))
        .collect::<Result<_>>()?;

    let lpath = dir.join("labels.csv");
    let mut labels = vec![Vec::new(); meta.j];
    for (row, fields) in csv_rows(&lpath, "example,node")?.iter().enumerate() {
        if fields.len() != 2 {
            return Err(Error::invalid(format!("labels.csv row {row} malformed")));
        }
        let j: usize = parse_field(&lpath, row, &fields[0])?;
        let i: usize = parse_field(&lpath, row, &fields[1])?;
        if j >= meta.j || i >= meta.n {
            return Err(Error::invalid(format!("labels.csv: example {j} node {i} out of range")));
        }
        labels[j].push(i);
    }
    for l in &mut labels {
        l.sort_unstable();
    }

    Ok(Dataset {
        graph,
        baselines,
        snapshots,
        labels,
        meta,
    })
}
