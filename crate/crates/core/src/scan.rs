//! Expectation-based scan statistics for the separable exponential family and
//! the linear-time unconstrained subset scan.
//!
//! The score of a node subset `S` is the log-likelihood ratio
//! `F(S) = max_{q>1} sum_{i in S} lambda_i(q)` comparing "counts in S inflated
//! by a relative risk q" against "all counts at baseline". Each supported
//! family admits a closed form:
//!
//! * Poisson:     `F = C ln(C/B) + B - C` with `C = sum x_i`, `B = sum mu_i`
//! * Gaussian:    `F = (C - B)^2 / (2B)` with `C = sum x_i mu_i / s2_i`,
//!   `B = sum mu_i^2 / s2_i`
//! * Exponential: `F = C - B - B ln(C/B)` with `C = sum x_i / mu_i`, `B = |S|`
//!
//! all under the constraint `C > B` (score 0 otherwise), with
//! `q_mle = max(1, C/B)` in every case.
//!
//! Because each family satisfies the linear-time subset scanning property with
//! priority `T(x_i)/mu_i = x_i/mu_i`, the unconstrained optimum over all
//! `2^N - 1` subsets is attained by one of the `N` priority-ordered prefixes,
//! which is what [`fast_subset_scan`] evaluates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution family tag for the expectation-based statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Poisson,
    Gaussian,
    Exponential,
}

impl Distribution {
    /// Natural-parameter map restricted to the relative risk: log q, q, -1/q.
    pub fn theta0(self, q: f64) -> f64 {
        match self {
            Distribution::Poisson => q.ln(),
            Distribution::Gaussian => q,
            Distribution::Exponential => -1.0 / q,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "poisson" => Ok(Distribution::Poisson),
            "gaussian" => Ok(Distribution::Gaussian),
            "exponential" => Ok(Distribution::Exponential),
            other => Err(Error::invalid(format!("unknown distribution '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Poisson => "poisson",
            Distribution::Gaussian => "gaussian",
            Distribution::Exponential => "exponential",
        }
    }
}

/// One training or test example: observed counts `x_i` and expected counts
/// `mu_i` for every node, plus optional Gaussian variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    counts: Vec<f64>,
    baselines: Vec<f64>,
    /// Per-node variances sigma_i^2, Gaussian only. Defaults to mu_i.
    variances: Option<Vec<f64>>,
}

impl Snapshot {
    pub fn new(counts: Vec<f64>, baselines: Vec<f64>) -> Result<Self> {
        Self::build(counts, baselines, None)
    }

    pub fn with_variances(
        counts: Vec<f64>,
        baselines: Vec<f64>,
        variances: Vec<f64>,
    ) -> Result<Self> {
        Self::build(counts, baselines, Some(variances))
    }

    fn build(counts: Vec<f64>, baselines: Vec<f64>, variances: Option<Vec<f64>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("snapshot must cover at least one node"));
        }
        if counts.len() != baselines.len() {
            return Err(Error::invalid(format!(
                "counts ({}) and baselines ({}) differ in length",
                counts.len(),
                baselines.len()
            )));
        }
        if counts.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::invalid("counts must be finite and non-negative"));
        }
        if baselines.iter().any(|&m| !m.is_finite() || m <= 0.0) {
            return Err(Error::invalid("baselines must be finite and positive"));
        }
        if let Some(v) = &variances {
            if v.len() != counts.len() {
                return Err(Error::invalid("variances length mismatch"));
            }
            if v.iter().any(|&s| !s.is_finite() || s <= 0.0) {
                return Err(Error::invalid("variances must be finite and positive"));
            }
        }
        Ok(Snapshot {
            counts,
            baselines,
            variances,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: N >= 1
    }

    pub fn count(&self, i: usize) -> f64 {
        self.counts[i]
    }

    pub fn baseline(&self, i: usize) -> f64 {
        self.baselines[i]
    }

    /// sigma_i^2, defaulting to mu_i when no variances were supplied.
    pub fn variance(&self, i: usize) -> f64 {
        match &self.variances {
            Some(v) => v[i],
            None => self.baselines[i],
        }
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn baselines(&self) -> &[f64] {
        &self.baselines
    }

    /// Node indices sorted by priority descending, ties broken by index.
    pub fn priority_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            let pa = self.counts[a] / self.baselines[a];
            let pb = self.counts[b] / self.baselines[b];
            pb.partial_cmp(&pa).unwrap().then(a.cmp(&b))
        });
        order
    }
}

/// A node subset together with its log-likelihood ratio score and the
/// maximum-likelihood relative risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSubset {
    /// Member node indices, ascending.
    pub nodes: Vec<usize>,
    /// F(S) >= 0; 0 means nothing beats the null here.
    pub score: f64,
    /// max(1, C/B); >= 1 whenever score > 0.
    pub q_mle: f64,
}

impl ScoredSubset {
    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

/// Additive sufficient statistics for a subset under one family. `c` and `b`
/// are the family-specific aggregates named in the module docs; both merge by
/// summation, which the union-find in the ULS search relies on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScoreAccum {
    dist: Distribution,
    c: f64,
    b: f64,
}

impl ScoreAccum {
    pub fn new(dist: Distribution) -> Self {
        ScoreAccum { dist, c: 0.0, b: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, snap: &Snapshot, i: usize) {
        let x = snap.count(i);
        let mu = snap.baseline(i);
        match self.dist {
            Distribution::Poisson => {
                self.c += x;
                self.b += mu;
            }
            Distribution::Gaussian => {
                let s2 = snap.variance(i);
                self.c += x * mu / s2;
                self.b += mu * mu / s2;
            }
            Distribution::Exponential => {
                self.c += x / mu;
                self.b += 1.0;
            }
        }
    }

    #[inline]
    pub fn merge(&mut self, other: &ScoreAccum) {
        self.c += other.c;
        self.b += other.b;
    }

    /// (F, q_mle) for the accumulated subset.
    #[inline]
    pub fn score(&self) -> (f64, f64) {
        let (c, b) = (self.c, self.b);
        if !(c > b) || b <= 0.0 {
            return (0.0, if b > 0.0 { (c / b).max(1.0) } else { 1.0 });
        }
        let q = c / b;
        let f = match self.dist {
            Distribution::Poisson => c * (c / b).ln() + b - c,
            Distribution::Gaussian => (c - b) * (c - b) / (2.0 * b),
            Distribution::Exponential => c - b - b * (c / b).ln(),
        };
        // Guard against -0.0 and tiny negative round-off at c ~ b.
        (f.max(0.0), q)
    }
}

/// Priority function G(v_i) = T(x_i)/mu_i; all supported families share
/// T(x) = x.
pub fn priority(x: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("priority requires mu > 0, got {mu}")));
    }
    Ok(x / mu)
}

/// Score one subset. Errors on an empty subset, out-of-range or duplicate
/// indices.
pub fn score_subset(subset: &[usize], snap: &Snapshot, dist: Distribution) -> Result<ScoredSubset> {
    if subset.is_empty() {
        return Err(Error::invalid("cannot score an empty subset"));
    }
    let n = snap.len();
    let mut seen = vec![false; n];
    let mut accum = ScoreAccum::new(dist);
    for &i in subset {
        if i >= n {
            return Err(Error::invalid(format!("node index {i} out of range (N={n})")));
        }
        if seen[i] {
            return Err(Error::invalid(format!("duplicate node index {i} in subset")));
        }
        seen[i] = true;
        accum.add(snap, i);
    }
    let (score, q_mle) = accum.score();
    let mut nodes: Vec<usize> = subset.to_vec();
    nodes.sort_unstable();
    Ok(ScoredSubset { nodes, score, q_mle })
}

/// Linear-time unconstrained subset scan: evaluates only the N priority-order
/// prefixes and returns the best one, which is the global optimum over all
/// non-empty subsets for these score functions.
///
/// When nothing scores above 0 (e.g. all counts at baseline) the single
/// highest-priority node is returned with score 0; callers treat score-0
/// results as "no detection".
pub fn fast_subset_scan(snap: &Snapshot, dist: Distribution) -> ScoredSubset {
    let order = snap.priority_order();
    let mut accum = ScoreAccum::new(dist);
    let mut best_k = 0usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_q = 1.0;
    for (k, &i) in order.iter().enumerate() {
        accum.add(snap, i);
        let (f, q) = accum.score();
        if f > best {
            best = f;
            best_q = q;
            best_k = k;
        }
    }
    let mut nodes: Vec<usize> = order[..=best_k].to_vec();
    nodes.sort_unstable();
    ScoredSubset {
        nodes,
        score: best,
        q_mle: best_q,
    }
}

/// Per-node contribution lambda_i(q) to the subset score, so that
/// `F(S) = max_{q>1} sum lambda_i(q)`. For the Gaussian the default variance
/// sigma_i^2 = mu_i is assumed. Zero at q = 1 exactly; concave in q with
/// maximum at q = x/mu.
pub fn lambda_i(q: f64, x: f64, mu: f64, dist: Distribution) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::invalid(format!("lambda_i requires q > 0, got {q}")));
    }
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("lambda_i requires mu > 0, got {mu}")));
    }
    Ok(match dist {
        Distribution::Poisson => x * q.ln() - mu * (q - 1.0),
        Distribution::Gaussian => x * (q - 1.0) - mu * (q * q - 1.0) / 2.0,
        Distribution::Exponential => (x / mu) * (1.0 - 1.0 / q) - q.ln(),
    })
}

/// Map the larger root r_max of lambda_i (the excess risk at which a node's
/// contribution returns to zero) to the maximizer r_mle, via
///
/// `r_mle = r_max * (theta0(r_max+1) - mean(theta0)) / (theta0(r_max+1) - theta0(1))`
///
/// where the mean is taken over [1, r_max+1]. Closed forms per family:
/// `r/ln(1+r) - 1` (Poisson), `r/2` (Gaussian), `(1+r)ln(1+r)/r - 1`
/// (exponential). Monotone increasing, and at most `r_max/2` whenever theta0
/// is concave (equality for the linear Gaussian theta0).
pub fn r_mle_from_r_max(r_max: f64, dist: Distribution) -> Result<f64> {
    if !(r_max > 0.0) {
        return Err(Error::invalid(format!(
            "r_mle_from_r_max requires r_max > 0, got {r_max}"
        )));
    }
    Ok(match dist {
        Distribution::Poisson => r_max / r_max.ln_1p() - 1.0,
        Distribution::Gaussian => r_max / 2.0,
        Distribution::Exponential => (1.0 + r_max) * r_max.ln_1p() / r_max - 1.0,
    })
}

/// Inverse of [`r_mle_from_r_max`]: the zero-crossing excess risk implied by
/// an observed maximizer. Closed form `2 r` for the Gaussian; monotone
/// bisection otherwise.
pub fn r_max_from_r_mle(r_mle: f64, dist: Distribution) -> Result<f64> {
    if !(r_mle > 0.0) {
        return Err(Error::invalid(format!(
            "r_max_from_r_mle requires r_mle > 0, got {r_mle}"
        )));
    }
    if dist == Distribution::Gaussian {
        return Ok(2.0 * r_mle);
    }
    let f = |r: f64| r_mle_from_r_max(r, dist).unwrap();
    let mut hi = 2.0 * r_mle;
    while f(hi) < r_mle {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < r_mle {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snap(pairs: &[(f64, f64)]) -> Snapshot {
        Snapshot::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    /// Exhaustive maximization over all 2^N - 1 subsets.
    pub(crate) fn brute_force_scan(snap: &Snapshot, dist: Distribution) -> (Vec<usize>, f64) {
        let n = snap.len();
        assert!(n <= 20);
        let mut best_score = f64::NEG_INFINITY;
        let mut best: Vec<usize> = vec![];
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let s = score_subset(&subset, snap, dist).unwrap();
            if s.score > best_score {
                best_score = s.score;
                best = subset;
            }
        }
        (best, best_score)
    }

    #[test]
    fn poisson_single_node_score() {
        let s = snap(&[(10.0, 5.0)]);
        let r = score_subset(&[0], &s, Distribution::Poisson).unwrap();
        assert!((r.score - (10.0 * 2.0_f64.ln() + 5.0 - 10.0)).abs() < 1e-12);
        assert!((r.score - 1.931_471_805_599_453).abs() < 1e-9);
        assert!((r.q_mle - 2.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_boundary_scores_zero() {
        let s = snap(&[(5.0, 5.0)]);
        assert_eq!(score_subset(&[0], &s, Distribution::Poisson).unwrap().score, 0.0);
        let s = snap(&[(3.0, 5.0)]);
        let r = score_subset(&[0], &s, Distribution::Poisson).unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.q_mle, 1.0);
    }

    #[test]
    fn score_subset_rejects_bad_input() {
        let s = snap(&[(1.0, 1.0), (2.0, 1.0)]);
        assert!(score_subset(&[], &s, Distribution::Poisson).is_err());
        assert!(score_subset(&[2], &s, Distribution::Poisson).is_err());
        assert!(score_subset(&[0, 0], &s, Distribution::Poisson).is_err());
    }

    #[test]
    fn priority_examples() {
        assert_eq!(priority(10.0, 5.0).unwrap(), 2.0);
        assert_eq!(priority(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(priority(4.0, 5.0).unwrap(), 0.8);
        assert!(priority(1.0, 0.0).is_err());
        assert!(priority(1.0, -2.0).is_err());
    }

    #[test]
    fn fast_scan_three_node_example() {
        let s = snap(&[(10.0, 5.0), (6.0, 5.0), (4.0, 5.0)]);
        let r = fast_subset_scan(&s, Distribution::Poisson);
        assert_eq!(r.nodes, vec![0]);
        assert!((r.score - 1.931_471_805_599_453).abs() < 1e-9);
        // Cross-check the runners-up quoted from the brute force.
        let pair = score_subset(&[0, 1], &s, Distribution::Poisson).unwrap();
        assert!((pair.score - 1.520_058_067_931_770).abs() < 1e-9);
        let all = score_subset(&[0, 1, 2], &s, Distribution::Poisson).unwrap();
        assert!((all.score - 0.753_641_449_035_618).abs() < 1e-9);
        let (bf_nodes, bf_score) = brute_force_scan(&s, Distribution::Poisson);
        assert_eq!(bf_nodes, r.nodes);
        assert!((bf_score - r.score).abs() < 1e-12);
    }

    #[test]
    fn fast_scan_null_data_returns_top_priority_singleton() {
        let s = snap(&[(5.0, 5.0), (3.0, 3.0), (7.0, 7.0)]);
        let r = fast_subset_scan(&s, Distribution::Poisson);
        assert_eq!(r.score, 0.0);
        assert_eq!(r.nodes.len(), 1);
        assert_eq!(r.nodes, vec![0]); // equal priorities tie-break by index
    }

    #[test]
    fn fast_scan_matches_brute_force_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for dist in [
            Distribution::Poisson,
            Distribution::Gaussian,
            Distribution::Exponential,
        ] {
            for _ in 0..25 {
                let n = rng.random_range(1..=10);
                let counts: Vec<f64> = (0..n).map(|_| rng.random_range(0..20) as f64).collect();
                let baselines: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
                let s = Snapshot::new(counts, baselines).unwrap();
                let fast = fast_subset_scan(&s, dist);
                let (_, bf_score) = brute_force_scan(&s, dist);
                assert!(
                    (fast.score - bf_score).abs() < 1e-9,
                    "{dist:?}: fast {} vs brute {bf_score}",
                    fast.score
                );
            }
        }
    }

    #[test]
    fn lambda_examples() {
        for dist in [
            Distribution::Poisson,
            Distribution::Gaussian,
            Distribution::Exponential,
        ] {
            assert_eq!(lambda_i(1.0, 7.0, 3.0, dist).unwrap(), 0.0);
        }
        let l = lambda_i(2.0, 10.0, 5.0, Distribution::Poisson).unwrap();
        assert!((l - (10.0 * 2.0_f64.ln() - 5.0)).abs() < 1e-12);
        assert!(lambda_i(0.0, 1.0, 1.0, Distribution::Poisson).is_err());
        assert!(lambda_i(-1.0, 1.0, 1.0, Distribution::Poisson).is_err());
    }

    #[test]
    fn lambda_max_at_x_over_mu() {
        let (x, mu) = (10.0, 5.0);
        for dist in [
            Distribution::Poisson,
            Distribution::Gaussian,
            Distribution::Exponential,
        ] {
            let q_mle = x / mu;
            let h = 1e-5;
            let at = |q: f64| lambda_i(q, x, mu, dist).unwrap();
            // Finite-difference gradient vanishes at the maximizer, rising
            // before it and falling after: a unique global maximum.
            let grad = (at(q_mle + h) - at(q_mle - h)) / (2.0 * h);
            assert!(grad.abs() < 1e-6, "{dist:?} grad {grad}");
            for q in [0.5, 1.0, 1.5, 1.9] {
                assert!((at(q + h) - at(q)) > 0.0, "{dist:?} not rising at q={q}");
            }
            for q in [2.1, 3.0, 5.0, 20.0] {
                assert!((at(q + h) - at(q)) < 0.0, "{dist:?} not falling at q={q}");
            }
        }
        // Concavity in q (the Poisson statistic's grid check).
        let h = 1e-4;
        let at = |q: f64| lambda_i(q, x, mu, Distribution::Poisson).unwrap();
        for q in [0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
            let second = (at(q + h) - 2.0 * at(q) + at(q - h)) / (h * h);
            assert!(second < 0.0, "Poisson lambda not concave at q={q}");
        }
    }

    #[test]
    fn r_mle_closed_forms() {
        assert_eq!(r_mle_from_r_max(4.0, Distribution::Gaussian).unwrap(), 2.0);
        let p = r_mle_from_r_max(1.0, Distribution::Poisson).unwrap();
        assert!((p - (1.0 / 2.0_f64.ln() - 1.0)).abs() < 1e-12);
        assert!((p - 0.442_695_040_888_963).abs() < 1e-9);
        assert!(r_mle_from_r_max(0.0, Distribution::Poisson).is_err());
        // Degenerate signal: r_mle -> 0 as r_max -> 0+.
        for dist in [
            Distribution::Poisson,
            Distribution::Gaussian,
            Distribution::Exponential,
        ] {
            assert!(r_mle_from_r_max(1e-9, dist).unwrap() < 1e-8);
        }
    }

    #[test]
    fn r_mle_poisson_cross_check_via_lambda_root() {
        // At r_max = 1 the node (x, mu) with x/mu = 1 + r_mle has its second
        // lambda zero at q = 2: x ln q = mu (q - 1).
        let r_mle = r_mle_from_r_max(1.0, Distribution::Poisson).unwrap();
        let (mu, x) = (5.0, 5.0 * (1.0 + r_mle));
        let at_two = lambda_i(2.0, x, mu, Distribution::Poisson).unwrap();
        assert!(at_two.abs() < 1e-9, "lambda at q_max should vanish: {at_two}");
    }

    #[test]
    fn r_mle_bounded_by_half_and_monotone() {
        for dist in [
            Distribution::Poisson,
            Distribution::Gaussian,
            Distribution::Exponential,
        ] {
            let mut prev = 0.0;
            let mut r = 0.01;
            while r <= 100.0 {
                let m = r_mle_from_r_max(r, dist).unwrap();
                assert!(m <= r / 2.0 + 1e-12, "{dist:?} r={r} m={m}");
                if dist == Distribution::Gaussian {
                    assert!((m - r / 2.0).abs() < 1e-12);
                }
                assert!(m > prev, "{dist:?} not monotone at r={r}");
                prev = m;
                r *= 1.17;
            }
        }
    }

    #[test]
    fn r_max_inverts_r_mle() {
        for dist in [
            Distribution::Poisson,
            Distribution::Gaussian,
            Distribution::Exponential,
        ] {
            for r in [0.05, 0.3, 1.0, 4.0, 20.0] {
                let m = r_mle_from_r_max(r, dist).unwrap();
                let back = r_max_from_r_mle(m, dist).unwrap();
                assert!((back - r).abs() < 1e-8, "{dist:?} {r} -> {m} -> {back}");
            }
        }
    }

    proptest! {
        #[test]
        fn prefix_property_and_nonnegativity(
            xs in proptest::collection::vec(0u32..40, 1..10),
            mus in proptest::collection::vec(1u32..12, 1..10),
        ) {
            let n = xs.len().min(mus.len());
            let counts: Vec<f64> = xs[..n].iter().map(|&x| x as f64).collect();
            let baselines: Vec<f64> = mus[..n].iter().map(|&m| m as f64).collect();
            let s = Snapshot::new(counts, baselines).unwrap();
            let r = fast_subset_scan(&s, Distribution::Poisson);
            prop_assert!(r.score >= 0.0);
            prop_assert!(r.q_mle >= 1.0);
            // The returned subset is a prefix of the priority ordering.
            let order = s.priority_order();
            let prefix: std::collections::BTreeSet<usize> =
                order[..r.nodes.len()].iter().copied().collect();
            let got: std::collections::BTreeSet<usize> = r.nodes.iter().copied().collect();
            prop_assert_eq!(prefix, got);
        }

        #[test]
        fn null_data_scores_zero(mus in proptest::collection::vec(1u32..15, 1..12)) {
            let baselines: Vec<f64> = mus.iter().map(|&m| m as f64).collect();
            let s = Snapshot::new(baselines.clone(), baselines).unwrap();
            for dist in [Distribution::Poisson, Distribution::Gaussian, Distribution::Exponential] {
                prop_assert_eq!(fast_subset_scan(&s, dist).score, 0.0);
            }
        }
    }
}
