//! Highest-scoring *connected* subgraph search (the BestSubgraph contract).
//!
//! Two interchangeable methods:
//!
//! * [`best_connected_exact`] — exact maximization over all non-empty
//!   connected subsets via branch-and-bound: connected subsets are enumerated
//!   once each (grow-from-seed with an exclusive-frontier canonical order) and
//!   subtrees are pruned with the unconstrained prefix bound — the relaxed
//!   optimum where the remaining reachable nodes may join without
//!   connectivity. Worst case exponential; a node-expansion budget turns
//!   runaway searches into a hard error instead of a silent fallback.
//! * [`best_connected_uls`] — the upper-level-sets heuristic: scan the
//!   connected components of every priority-threshold level set and return
//!   the best component. Never beats the exact optimum.
//!
//! [`best_subgraph`] adds optional proximity constraints: the search runs
//! separately inside each node's local neighborhood and the best result over
//! all neighborhoods is reported.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scan::{Distribution, ScoreAccum, ScoredSubset, Snapshot};

pub const DEFAULT_MAX_EXPANSIONS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Exact,
    Uls,
}

impl SearchMethod {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "exact" => Ok(SearchMethod::Exact),
            "uls" => Ok(SearchMethod::Uls),
            other => Err(Error::invalid(format!("unknown search method '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SearchMethod::Exact => "exact",
            SearchMethod::Uls => "uls",
        }
    }
}

/// A configured BestSubgraph implementation: method, optional neighborhood
/// constraint, and the exact-search expansion budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchEngine {
    pub method: SearchMethod,
    pub neighborhood_k: Option<usize>,
    pub max_expansions: u64,
}

impl SearchEngine {
    pub fn new(method: SearchMethod) -> Self {
        SearchEngine {
            method,
            neighborhood_k: None,
            max_expansions: DEFAULT_MAX_EXPANSIONS,
        }
    }

    pub fn exact() -> Self {
        Self::new(SearchMethod::Exact)
    }

    pub fn uls() -> Self {
        Self::new(SearchMethod::Uls)
    }

    pub fn with_neighborhood(mut self, k: usize) -> Self {
        self.neighborhood_k = Some(k);
        self
    }

    pub fn with_budget(mut self, max_expansions: u64) -> Self {
        self.max_expansions = max_expansions;
        self
    }
}

fn check_dims(g: &Graph, snap: &Snapshot) -> Result<()> {
    if g.n() != snap.len() {
        return Err(Error::invalid(format!(
            "graph has {} nodes but snapshot covers {}",
            g.n(),
            snap.len()
        )));
    }
    Ok(())
}

/// Replace `best` when strictly better, or on an exact score tie when the
/// candidate is lexicographically smaller (determinism for zero-score data).
fn consider(best: &mut Option<ScoredSubset>, cand: ScoredSubset) {
    match best {
        None => *best = Some(cand),
        Some(cur) => {
            if cand.score > cur.score || (cand.score == cur.score && cand.nodes < cur.nodes) {
                *best = Some(cand);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exact branch-and-bound
// ---------------------------------------------------------------------------

struct ExactSearch<'a> {
    g: &'a Graph,
    snap: &'a Snapshot,
    dist: Distribution,
    /// Node indices by priority descending (global, reused for every bound).
    priority_order: Vec<usize>,
    s_mask: Bits,
    s_nodes: Vec<usize>,
    /// Nodes ever placed on a frontier along the current path (= the explored
    /// neighborhood of S); popped nodes stay marked, which both enforces the
    /// once-per-subset canonical order and removes them from bounds.
    seen: Bits,
    best: Option<ScoredSubset>,
    expansions: u64,
    cap: u64,
}

impl<'a> ExactSearch<'a> {
    fn new(g: &'a Graph, snap: &'a Snapshot, dist: Distribution, cap: u64) -> Self {
        ExactSearch {
            g,
            snap,
            dist,
            priority_order: snap.priority_order(),
            s_mask: Bits::new(g.n()),
            s_nodes: Vec::new(),
            seen: Bits::new(g.n()),
            best: None,
            expansions: 0,
            cap,
        }
    }

    fn run(mut self) -> Result<ScoredSubset> {
        for seed in 0..self.g.n() {
            self.s_mask.clear();
            self.seen.clear();
            self.s_nodes.clear();
            self.s_mask.insert(seed);
            self.s_nodes.push(seed);
            let mut accum = ScoreAccum::new(self.dist);
            accum.add(self.snap, seed);
            let ext: Vec<usize> = self
                .g
                .neighbors(seed)
                .iter()
                .copied()
                .filter(|&w| w > seed)
                .collect();
            for &w in &ext {
                self.seen.insert(w);
            }
            self.extend(seed, accum, ext)?;
        }
        Ok(self.best.expect("n >= 1 guarantees at least one subset"))
    }

    fn extend(&mut self, seed: usize, accum: ScoreAccum, ext: Vec<usize>) -> Result<()> {
        self.expansions += 1;
        if self.expansions > self.cap {
            return Err(Error::BudgetExceeded {
                expansions: self.expansions,
                cap: self.cap,
            });
        }
        let (score, q_mle) = accum.score();
        consider(
            &mut self.best,
            ScoredSubset {
                nodes: {
                    let mut v = self.s_nodes.clone();
                    v.sort_unstable();
                    v
                },
                score,
                q_mle,
            },
        );
        if ext.is_empty() {
            return Ok(());
        }
        if self.upper_bound(seed, accum, &ext) <= self.best.as_ref().unwrap().score {
            return Ok(());
        }

        let mut queue = ext;
        while let Some(u) = queue.pop() {
            // Include u. Its exclusive frontier is every allowed neighbor not
            // already adjacent to S (those are marked in `seen`); the popped u
            // itself stays marked, which bars it from every sibling subtree
            // and makes the enumeration visit each connected subset once.
            let mut child_ext = queue.clone();
            let mut added: Vec<usize> = Vec::new();
            for &w in self.g.neighbors(u) {
                if w > seed && !self.seen.contains(w) && !self.s_mask.contains(w) {
                    child_ext.push(w);
                    self.seen.insert(w);
                    added.push(w);
                }
            }
            self.s_mask.insert(u);
            self.s_nodes.push(u);
            let mut child_accum = accum;
            child_accum.add(self.snap, u);
            let res = self.extend(seed, child_accum, child_ext);
            self.s_nodes.pop();
            self.s_mask.remove(u);
            // u's exclusive frontier is exclusive no longer once u leaves S.
            for &w in &added {
                self.seen.remove(w);
            }
            res?;
        }
        Ok(())
    }

    /// Relaxed optimum over S plus any subset of the nodes still reachable in
    /// this subtree, ignoring connectivity. For each q the optimal relaxation
    /// keeps exactly the positive-contribution nodes, which form a priority
    /// prefix, so scanning prefixes of the reachable set is exact for the
    /// relaxation and an upper bound for the constrained subtree.
    fn upper_bound(&mut self, seed: usize, accum: ScoreAccum, ext: &[usize]) -> f64 {
        let n = self.g.n();
        // available = nodes reachable from ext through unvisited allowed nodes
        let mut allowed = Bits::new(n);
        for w in 0..n {
            if w > seed && !self.s_mask.contains(w) && !self.seen.contains(w) {
                allowed.insert(w);
            }
        }
        let mut avail = Bits::new(n);
        let mut frontier: Vec<usize> = Vec::new();
        for &w in ext {
            avail.insert(w);
            frontier.push(w);
        }
        while let Some(v) = frontier.pop() {
            let before = avail.clone();
            avail.union_masked(self.g.adjacency_mask(v), &allowed);
            for w in avail.iter() {
                if !before.contains(w) {
                    frontier.push(w);
                }
            }
        }
        let mut run = accum;
        let (mut ub, _) = run.score();
        for &w in &self.priority_order {
            if avail.contains(w) {
                run.add(self.snap, w);
                let (f, _) = run.score();
                if f > ub {
                    ub = f;
                }
            }
        }
        ub
    }
}

/// Exact highest-scoring connected subgraph, with the default expansion
/// budget. Score 0 with the lexicographically smallest subset means nothing
/// beats the null.
pub fn best_connected_exact(g: &Graph, snap: &Snapshot, dist: Distribution) -> Result<ScoredSubset> {
    best_connected_exact_budgeted(g, snap, dist, DEFAULT_MAX_EXPANSIONS)
}

pub fn best_connected_exact_budgeted(
    g: &Graph,
    snap: &Snapshot,
    dist: Distribution,
    max_expansions: u64,
) -> Result<ScoredSubset> {
    check_dims(g, snap)?;
    ExactSearch::new(g, snap, dist, max_expansions).run()
}

// ---------------------------------------------------------------------------
// Upper level sets
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Union returning the surviving root.
    fn union(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return (ra, ra);
        }
        let (win, lose) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lose] = win;
        self.size[win] += self.size[lose];
        (win, lose)
    }
}

/// Upper-level-sets heuristic: activate nodes in priority order, maintain
/// connected components incrementally, and score the component touched by
/// each activation — exactly the components of the descending level sets.
/// The result is always connected in `g` and never exceeds the exact score.
pub fn best_connected_uls(g: &Graph, snap: &Snapshot, dist: Distribution) -> Result<ScoredSubset> {
    check_dims(g, snap)?;
    let n = g.n();
    let order = snap.priority_order();
    let mut uf = UnionFind::new(n);
    let mut accums: Vec<ScoreAccum> = vec![ScoreAccum::new(dist); n];
    let mut active = Bits::new(n);
    let mut best_score = f64::NEG_INFINITY;
    let mut best_q = 1.0;
    let mut tied_steps: Vec<usize> = Vec::new();
    for (t, &v) in order.iter().enumerate() {
        active.insert(v);
        accums[v] = ScoreAccum::new(dist);
        accums[v].add(snap, v);
        for &w in g.neighbors(v) {
            if active.contains(w) {
                let (ra, rb) = (uf.find(v), uf.find(w));
                if ra != rb {
                    let (win, lose) = uf.union(ra, rb);
                    let merged = accums[lose];
                    accums[win].merge(&merged);
                }
            }
        }
        let root = uf.find(v);
        let (f, q) = accums[root].score();
        if f > best_score {
            best_score = f;
            best_q = q;
            tied_steps.clear();
            tied_steps.push(t);
        } else if f == best_score {
            tied_steps.push(t);
        }
    }

    // Materialize tied candidates and keep the lexicographically smallest.
    let mut best_nodes: Option<Vec<usize>> = None;
    for &t in &tied_steps {
        let nodes = component_at(g, &order, t);
        match &best_nodes {
            Some(cur) if *cur <= nodes => {}
            _ => best_nodes = Some(nodes),
        }
    }
    Ok(ScoredSubset {
        nodes: best_nodes.unwrap(),
        score: best_score.max(0.0),
        q_mle: best_q,
    })
}

/// The connected component of `order[t]` within the level set `order[..=t]`.
fn component_at(g: &Graph, order: &[usize], t: usize) -> Vec<usize> {
    let mask = Bits::from_indices(g.n(), &order[..=t]);
    let mut visited = Bits::new(g.n());
    visited.insert(order[t]);
    let mut frontier = vec![order[t]];
    while let Some(v) = frontier.pop() {
        let before = visited.clone();
        visited.union_masked(g.adjacency_mask(v), &mask);
        for w in visited.iter() {
            if !before.contains(w) {
                frontier.push(w);
            }
        }
    }
    visited.to_vec()
}

// ---------------------------------------------------------------------------
// Dispatch with optional proximity constraints
// ---------------------------------------------------------------------------

/// Precomputed induced subgraphs for each distinct local neighborhood,
/// so repeated scans against one graph don't rebuild them per snapshot.
#[derive(Debug, Clone)]
pub struct NeighborhoodIndex {
    pub k: usize,
    /// (induced subgraph, new-label -> original-node map), deduplicated.
    pub subgraphs: Vec<(Graph, Vec<usize>)>,
}

impl NeighborhoodIndex {
    pub fn build(g: &Graph, k: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut subgraphs = Vec::new();
        for nb in g.local_neighborhoods(k)? {
            if seen.insert(nb.members.clone()) {
                subgraphs.push(g.induced(&nb.members)?);
            }
        }
        Ok(NeighborhoodIndex { k, subgraphs })
    }
}

fn run_method(
    method: SearchMethod,
    g: &Graph,
    snap: &Snapshot,
    dist: Distribution,
    cap: u64,
) -> Result<ScoredSubset> {
    match method {
        SearchMethod::Exact => best_connected_exact_budgeted(g, snap, dist, cap),
        SearchMethod::Uls => best_connected_uls(g, snap, dist),
    }
}

/// BestSubgraph: run the engine's method over the whole graph, or over every
/// local neighborhood when `neighborhood_k` is set, returning the overall
/// best connected subset.
pub fn best_subgraph(
    engine: &SearchEngine,
    g: &Graph,
    snap: &Snapshot,
    dist: Distribution,
) -> Result<ScoredSubset> {
    match engine.neighborhood_k {
        None => run_method(engine.method, g, snap, dist, engine.max_expansions),
        Some(k) => {
            let index = NeighborhoodIndex::build(g, k)?;
            best_subgraph_indexed(engine, &index, snap, dist)
        }
    }
}

/// Neighborhood-constrained search against a prebuilt index.
pub fn best_subgraph_indexed(
    engine: &SearchEngine,
    index: &NeighborhoodIndex,
    snap: &Snapshot,
    dist: Distribution,
) -> Result<ScoredSubset> {
    let mut best: Option<ScoredSubset> = None;
    for (sub, map) in &index.subgraphs {
        let local_snap = restrict_snapshot(snap, map);
        let local = run_method(engine.method, sub, &local_snap, dist, engine.max_expansions)?;
        let nodes: Vec<usize> = local.nodes.iter().map(|&i| map[i]).collect();
        consider(
            &mut best,
            ScoredSubset {
                nodes,
                score: local.score,
                q_mle: local.q_mle,
            },
        );
    }
    best.ok_or_else(|| Error::invalid("no neighborhoods to search"))
}

fn restrict_snapshot(snap: &Snapshot, nodes: &[usize]) -> Snapshot {
    let counts: Vec<f64> = nodes.iter().map(|&i| snap.count(i)).collect();
    let baselines: Vec<f64> = nodes.iter().map(|&i| snap.baseline(i)).collect();
    let variances: Vec<f64> = nodes.iter().map(|&i| snap.variance(i)).collect();
    Snapshot::with_variances(counts, baselines, variances).expect("restriction of valid snapshot")
}

/// Mean normalized score of `g` on a set of snapshots: the average over
/// examples of (best connected score) / (best unconstrained score), skipping
/// examples whose unconstrained score is zero.
pub fn normalized_score(
    engine: &SearchEngine,
    g: &Graph,
    snap: &Snapshot,
    dist: Distribution,
    unconstrained: f64,
) -> Result<f64> {
    let best = best_subgraph(engine, g, snap, dist)?;
    Ok(best.score / unconstrained)
}
