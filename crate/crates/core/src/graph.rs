//! Undirected graphs on labeled nodes: connectivity queries on induced
//! subgraphs, value-semantics edge mutation, proximity neighborhoods, and the
//! edge-list text format.
//!
//! Graphs are immutable after construction; `remove_edge`/`add_edge` return
//! new values so the learner can walk a whole removal sequence while older
//! graphs stay valid.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// An undirected edge, normalized so `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    a: usize,
    b: usize,
}

impl Edge {
    pub fn new(i: usize, k: usize) -> Result<Self> {
        if i == k {
            return Err(Error::invalid(format!("self-loop on node {i}")));
        }
        Ok(Edge {
            a: i.min(k),
            b: i.max(k),
        })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.a, self.b)
    }
}

/// A node's proximity neighborhood: the node itself plus its k-1 nearest
/// neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: usize,
    /// Member node indices, ascending; always includes `center`.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    /// Sorted lexicographically; no duplicates, no self-loops.
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    masks: Vec<Bits>,
    coords: Option<Vec<(f64, f64)>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one node"));
        }
        let mut list = Vec::new();
        for (i, k) in edges {
            if i >= n || k >= n {
                return Err(Error::invalid(format!(
                    "edge ({i},{k}) out of range for N={n}"
                )));
            }
            list.push(Edge::new(i, k)?);
        }
        list.sort_unstable();
        if list.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate edge in edge list"));
        }
        Ok(Self::from_sorted(n, list, None))
    }

    pub fn empty(n: usize) -> Self {
        Graph::new(n, std::iter::empty()).expect("n >= 1")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |k| (i, k)));
        Graph::new(n, edges).expect("n >= 1")
    }

    fn from_sorted(n: usize, edges: Vec<Edge>, coords: Option<Vec<(f64, f64)>>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut masks = vec![Bits::new(n); n];
        for e in &edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
            masks[e.a].insert(e.b);
            masks[e.b].insert(e.a);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Graph {
            n,
            edges,
            adj,
            masks,
            coords,
        }
    }

    /// Attach 2-D node positions (used by proximity neighborhoods).
    pub fn with_coords(mut self, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::invalid(format!(
                "{} coordinates for {} nodes",
                coords.len(),
                self.n
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn has_edge(&self, i: usize, k: usize) -> bool {
        i < self.n && k < self.n && i != k && self.masks[i].contains(k)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub(crate) fn adjacency_mask(&self, i: usize) -> &Bits {
        &self.masks[i]
    }

    /// New graph with `e` removed; errors if `e` is not present.
    pub fn remove_edge(&self, e: Edge) -> Result<Graph> {
        let pos = self
            .edges
            .binary_search(&e)
            .map_err(|_| Error::invalid(format!("edge {e} not in graph")))?;
        let mut edges = self.edges.clone();
        edges.remove(pos);
        Ok(Self::from_sorted(self.n, edges, self.coords.clone()))
    }

    /// New graph with `e` added; errors if `e` is already present.
    pub fn add_edge(&self, e: Edge) -> Result<Graph> {
        if e.b >= self.n {
            return Err(Error::invalid(format!("edge {e} out of range")));
        }
        match self.edges.binary_search(&e) {
            Ok(_) => Err(Error::invalid(format!("edge {e} already in graph"))),
            Err(pos) => {
                let mut edges = self.edges.clone();
                edges.insert(pos, e);
                Ok(Self::from_sorted(self.n, edges, self.coords.clone()))
            }
        }
    }

    fn check_subset(&self, s: &[usize]) -> Result<()> {
        if s.is_empty() {
            return Err(Error::invalid("subset must be non-empty"));
        }
        if let Some(&i) = s.iter().find(|&&i| i >= self.n) {
            return Err(Error::invalid(format!("node {i} out of range (N={})", self.n)));
        }
        Ok(())
    }

    /// Is the subgraph induced on `s` connected? BFS restricted to `s` with
    /// word-parallel frontier expansion.
    pub fn is_connected_subset(&self, s: &[usize]) -> Result<bool> {
        self.check_subset(s)?;
        let mask = Bits::from_indices(self.n, s);
        Ok(self.connected_within(&mask, s[0], None) == mask.count())
    }

    /// Nodes reachable from `start` inside `mask`, optionally pretending one
    /// edge is absent. Returns the count of reached nodes.
    fn connected_within(&self, mask: &Bits, start: usize, skip: Option<Edge>) -> usize {
        let mut visited = Bits::new(self.n);
        visited.insert(start);
        let mut frontier = vec![start];
        let mut reached = 1usize;
        while let Some(v) = frontier.pop() {
            let before = visited.clone();
            visited.union_masked(&self.masks[v], mask);
            if let Some(e) = skip {
                // Undo traversal of the skipped edge from either endpoint.
                if v == e.a && mask.contains(e.b) && !before.contains(e.b) {
                    visited.remove(e.b);
                }
                if v == e.b && mask.contains(e.a) && !before.contains(e.a) {
                    visited.remove(e.a);
                }
            }
            for w in visited.iter() {
                if !before.contains(w) {
                    frontier.push(w);
                    reached += 1;
                }
            }
        }
        reached
    }

    /// Would removing `e` disconnect the subgraph induced on `s`? False
    /// immediately when either endpoint lies outside `s`; errors if `e` is
    /// not an edge of the graph.
    pub fn edge_disconnects(&self, e: Edge, s: &[usize]) -> Result<bool> {
        if self.edges.binary_search(&e).is_err() {
            return Err(Error::invalid(format!("edge {e} not in graph")));
        }
        self.check_subset(s)?;
        let mask = Bits::from_indices(self.n, s);
        if !mask.contains(e.a) || !mask.contains(e.b) {
            return Ok(false);
        }
        Ok(self.connected_within(&mask, s[0], Some(e)) != mask.count())
    }

    /// Hop distance from `center` to every node; `None` for unreachable.
    pub fn hop_distances(&self, center: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[center] = Some(0);
        let mut frontier = vec![center];
        let mut d = 0usize;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in &self.adj[v] {
                    if dist[w].is_none() {
                        dist[w] = Some(d);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// One neighborhood per node: the node plus its k-1 nearest neighbors,
    /// by Euclidean distance when coordinates are attached and by hop
    /// distance otherwise. Ties break by node index; unreachable nodes sort
    /// last.
    pub fn local_neighborhoods(&self, k: usize) -> Result<Vec<Neighborhood>> {
        if k < 1 || k > self.n {
            return Err(Error::invalid(format!(
                "neighborhood size k={k} out of range [1, {}]",
                self.n
            )));
        }
        let mut out = Vec::with_capacity(self.n);
        for center in 0..self.n {
            let mut others: Vec<usize> = (0..self.n).filter(|&i| i != center).collect();
            match &self.coords {
                Some(coords) => {
                    let (cx, cy) = coords[center];
                    let d2 = |i: usize| {
                        let (x, y) = coords[i];
                        (x - cx) * (x - cx) + (y - cy) * (y - cy)
                    };
                    others.sort_by(|&a, &b| d2(a).partial_cmp(&d2(b)).unwrap().then(a.cmp(&b)));
                }
                None => {
                    let dist = self.hop_distances(center);
                    let key = |i: usize| dist[i].unwrap_or(usize::MAX);
                    others.sort_by(|&a, &b| key(a).cmp(&key(b)).then(a.cmp(&b)));
                }
            }
            let mut members: Vec<usize> = std::iter::once(center)
                .chain(others.into_iter().take(k - 1))
                .collect();
            members.sort_unstable();
            out.push(Neighborhood { center, members });
        }
        Ok(out)
    }

    /// All nodes ordered by hop distance from `center`, ties within a BFS
    /// layer broken uniformly at random; unreachable nodes last, also in
    /// random order.
    pub fn graph_distance_ordering<R: Rng + ?Sized>(
        &self,
        center: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        use rand::seq::SliceRandom;
        if center >= self.n {
            return Err(Error::invalid(format!("center {center} out of range")));
        }
        let dist = self.hop_distances(center);
        let max_d = dist.iter().flatten().copied().max().unwrap_or(0);
        let mut order = Vec::with_capacity(self.n);
        for d in 0..=max_d {
            let mut layer: Vec<usize> = (0..self.n).filter(|&i| dist[i] == Some(d)).collect();
            layer.shuffle(rng);
            order.extend(layer);
        }
        let mut unreachable: Vec<usize> = (0..self.n).filter(|&i| dist[i].is_none()).collect();
        unreachable.shuffle(rng);
        order.extend(unreachable);
        Ok(order)
    }

    /// The subgraph induced on `nodes` (ascending), relabeled 0..len; the
    /// returned vector maps new labels back to original node ids.
    pub fn induced(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        self.check_subset(nodes)?;
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut newid = vec![usize::MAX; self.n];
        for (new, &old) in sorted.iter().enumerate() {
            newid[old] = new;
        }
        let edges = self.edges.iter().filter_map(|e| {
            let (a, b) = (newid[e.a], newid[e.b]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b))
        });
        let mut g = Graph::new(sorted.len(), edges)?;
        if let Some(coords) = &self.coords {
            g = g.with_coords(sorted.iter().map(|&i| coords[i]).collect())?;
        }
        Ok((g, sorted))
    }
}

/// Write the edge-list text format: one "i k" pair per line, 0-based ids.
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    for e in g.edges() {
        writeln!(w, "{e}")?;
    }
    Ok(())
}

pub fn write_edge_list_file(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_edge_list(g, std::io::BufWriter::new(f))
}

/// Read the edge-list format. `n` fixes the node count; when omitted it is
/// inferred as max id + 1 (so trailing isolated nodes need an explicit `n`).
pub fn read_edge_list_file(path: impl AsRef<Path>, n: Option<usize>) -> Result<Graph> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: "expected 'i k'".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("bad node id: {e}"),
            })
        };
        let i = parse(it.next())?;
        let k = parse(it.next())?;
        pairs.push((i, k));
    }
    let n = n.unwrap_or_else(|| {
        pairs
            .iter()
            .map(|&(i, k)| i.max(k) + 1)
            .max()
            .unwrap_or(1)
    });
    Graph::new(n, pairs)
}

/// Read an optional coordinates file: "i x y" per line.
pub fn read_coords_file(path: impl AsRef<Path>, n: usize) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)?;
    let mut coords = vec![(0.0, 0.0); n];
    let mut seen = vec![false; n];
    for (lineno, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(err("expected 'i x y'".into()));
        }
        let i: usize = toks[0].parse().map_err(|e| err(format!("bad id: {e}")))?;
        if i >= n {
            return Err(err(format!("node {i} out of range")));
        }
        let x: f64 = toks[1].parse().map_err(|e| err(format!("bad x: {e}")))?;
        let y: f64 = toks[2].parse().map_err(|e| err(format!("bad y: {e}")))?;
        coords[i] = (x, y);
        seen[i] = true;
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(Error::invalid(format!("no coordinates for node {i}")));
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(Graph::new(0, std::iter::empty()).is_err());
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn connectivity_on_path() {
        let g = path3();
        assert!(!g.is_connected_subset(&[0, 2]).unwrap());
        assert!(g.is_connected_subset(&[0, 1, 2]).unwrap());
        assert!(g.is_connected_subset(&[1]).unwrap());
        assert!(g.is_connected_subset(&[2]).unwrap());
        assert!(g.is_connected_subset(&[]).is_err());
    }

    #[test]
    fn remove_edge_value_semantics() {
        let k3 = Graph::complete(3);
        let e = Edge::new(0, 1).unwrap();
        let g = k3.remove_edge(e).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(0, 2) && g.has_edge(1, 2) && !g.has_edge(0, 1));
        assert_eq!(k3.edge_count(), 3); // original untouched
        assert!(g.remove_edge(e).is_err());
        let k4 = Graph::complete(4);
        for &edge in k4.edges() {
            assert_eq!(k4.remove_edge(edge).unwrap().edge_count(), 5);
        }
    }

    #[test]
    fn edge_disconnects_cases() {
        let g = path3();
        let e01 = Edge::new(0, 1).unwrap();
        assert!(g.edge_disconnects(e01, &[0, 1]).unwrap());
        let tri = Graph::complete(3);
        assert!(!tri.edge_disconnects(e01, &[0, 1, 2]).unwrap());
        let g4 = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!g4.edge_disconnects(e01, &[2, 3]).unwrap());
        assert!(g4.edge_disconnects(Edge::new(2, 3).unwrap(), &[2, 3]).unwrap());
        assert!(g.edge_disconnects(Edge::new(0, 2).unwrap(), &[0, 1]).is_err());
    }

    #[test]
    fn neighborhoods_by_hops() {
        let p4 = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let nb = p4.local_neighborhoods(2).unwrap();
        assert_eq!(nb[0].members, vec![0, 1]);
        assert_eq!(nb[3].members, vec![2, 3]);
        let singletons = p4.local_neighborhoods(1).unwrap();
        assert!(singletons.iter().enumerate().all(|(i, nb)| nb.members == vec![i]));
        let all = p4.local_neighborhoods(4).unwrap();
        assert!(all.iter().all(|nb| nb.members == vec![0, 1, 2, 3]));
        assert!(p4.local_neighborhoods(0).is_err());
        assert!(p4.local_neighborhoods(5).is_err());
    }

    #[test]
    fn neighborhoods_by_coords() {
        let g = Graph::empty(3)
            .with_coords(vec![(0.0, 0.0), (10.0, 0.0), (1.0, 0.0)])
            .unwrap();
        let nb = g.local_neighborhoods(2).unwrap();
        assert_eq!(nb[0].members, vec![0, 2]);
    }

    #[test]
    fn hop_neighborhood_dominates_nonmembers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 8, 0.3);
            let k = 1 + (rng.random_range(0..8usize));
            for nb in g.local_neighborhoods(k.min(8)).unwrap() {
                let dist = g.hop_distances(nb.center);
                let d = |i: usize| dist[i].unwrap_or(usize::MAX);
                let max_in = nb.members.iter().map(|&i| d(i)).max().unwrap();
                for out in (0..g.n()).filter(|i| !nb.members.contains(i)) {
                    assert!(d(out) >= max_in, "non-member closer than member");
                }
            }
        }
    }

    #[test]
    fn distance_ordering_examples() {
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ord = star.graph_distance_ordering(0, &mut rng).unwrap();
        assert_eq!(ord[0], 0);
        let mut leaves = ord[1..].to_vec();
        leaves.sort_unstable();
        assert_eq!(leaves, vec![1, 2, 3]);

        let g = path3();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(g.graph_distance_ordering(0, &mut rng).unwrap(), vec![0, 1, 2]);

        // Determinism under a fixed seed.
        let big = Graph::complete(12);
        let a = big
            .graph_distance_ordering(3, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let b = big
            .graph_distance_ordering(3, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::new(5, [(0, 4), (1, 2)]).unwrap();
        let dir = std::env::temp_dir().join("scanlearn_graph_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.edges");
        write_edge_list_file(&g, &path).unwrap();
        let back = read_edge_list_file(&path, Some(5)).unwrap();
        assert_eq!(back.edges(), g.edges());
        let inferred = read_edge_list_file(&path, None).unwrap();
        assert_eq!(inferred.n(), 5);
        std::fs::remove_dir_all(&dir).ok();
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |k| (i, k)))
            .filter(|_| rng.random_bool(p))
            .collect::<Vec<_>>();
        Graph::new(n, edges).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn remove_then_add_restores(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, 8, 0.4);
            if let Some(&e) = g.edges().first() {
                let back = g.remove_edge(e).unwrap().add_edge(e).unwrap();
                prop_assert_eq!(back.edges(), g.edges());
            }
        }

        #[test]
        fn edge_disconnects_matches_two_step_check(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, 7, 0.35);
            for &e in g.edges() {
                // All connected subsets containing both endpoints.
                for mask in 1u32..(1 << 7) {
                    let s: Vec<usize> = (0..7).filter(|&i| mask >> i & 1 == 1).collect();
                    if !g.is_connected_subset(&s).unwrap() {
                        continue;
                    }
                    let direct = g.edge_disconnects(e, &s).unwrap();
                    let two_step = !g.remove_edge(e).unwrap().is_connected_subset(&s).unwrap();
                    prop_assert_eq!(direct, two_step);
                }
            }
        }
    }
}
