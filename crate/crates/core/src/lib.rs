//! Exact edge-weighted Steiner tree solver via dynamic programming on nice
//! tree decompositions.
//!
//! The solver pipeline is: find a tree decomposition with the greedy-degree
//! heuristic ([`td::greedy_degree_decompose`]), transform it into a nice tree
//! decomposition rooted at a forget bag of a terminal ([`nice::make_nice`]),
//! then run a bottom-up dynamic program whose per-bag tables map vertex-usage
//! assignments to sets of weighted partitions ([`dp`]). Three table-management
//! strategies are supported ([`reduce::ReductionPolicy`]):
//!
//! * `cdp` — the classic DP, tables only deduplicated by minimum weight;
//! * `rba` — after every bag, shrink each sub-table to a lightest row basis
//!   of its GF(2) cut matrix (rank-based reduction);
//! * `rbc` — apply the same reduction only to sub-tables that exceed the
//!   guaranteed post-reduction bound.
//!
//! All three return the same optimum; they differ in how many partial
//! solutions they generate. [`solver::solve`] and [`solver::compare`] drive
//! whole runs and produce [`report::RunReport`]s; [`oracle`] holds the
//! brute-force reference used by the test suites.

pub mod dp;
pub mod graph;
pub mod nice;
pub mod oracle;
pub mod partition;
pub mod reduce;
pub mod report;
pub mod solver;
pub mod td;

pub use dp::{BagTable, SolveError, SolveStats, WeightedPartition};
pub use graph::{Instance, VertexId};
pub use nice::NiceTreeDecomposition;
pub use partition::{Cut, Partition};
pub use reduce::ReductionPolicy;
pub use report::RunReport;
pub use td::TreeDecomposition;
