//! Learn a latent graph structure from unlabeled count snapshots and use it
//! for timely, accurate event detection.
//!
//! The pipeline, end to end:
//!
//! 1. [`scan`] — expectation-based scan statistics for the separable
//!    exponential family (Poisson, Gaussian, exponential) and the linear-time
//!    unconstrained subset scan.
//! 2. [`graph`] — undirected graphs, induced-subgraph connectivity, and
//!    proximity neighborhoods.
//! 3. [`search`] — highest-scoring *connected* subgraph search: exact
//!    branch-and-bound and the upper-level-sets heuristic, with optional
//!    local-neighborhood constraints.
//! 4. [`learn`] — greedy edge-removal structure learning with Corr / PsCorr /
//!    GrCorr edge selection and the most-significant-graph randomization test.
//! 5. [`simulate`] — random graph families, synthetic baselines, and
//!    graph-propagated outbreak injection.
//! 6. [`evaluate`] — edge precision/recall, detection timeliness and overlap
//!    metrics, and the end-to-end benchmark driver.

pub mod error;
pub mod evaluate;
pub mod graph;
pub mod learn;
pub mod scan;
pub mod search;
pub mod seeds;
pub mod simulate;

mod bits;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, Neighborhood};
pub use scan::{Distribution, ScoredSubset, Snapshot};
pub use search::{SearchEngine, SearchMethod};
