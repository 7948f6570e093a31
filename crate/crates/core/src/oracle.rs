//! Brute-force reference solver and the definitional `opt` evaluation.
//!
//! Everything here is deliberately naive: the point is an independent check
//! for the dynamic program and the table reductions, not speed.

use itertools::Itertools;
use thiserror::Error;

use crate::dp::WeightedPartition;
use crate::graph::{Instance, VertexId};
use crate::partition::Partition;

/// Result of the brute-force search: the optimum and an edge set achieving it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Optimum { weight: u64, witness: Vec<usize> },
    Infeasible,
}

impl OracleResult {
    pub fn weight(&self) -> Option<u64> {
        match self {
            OracleResult::Optimum { weight, .. } => Some(*weight),
            OracleResult::Infeasible => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} edges exceed the brute-force budget of {MAX_ORACLE_EDGES}")]
    TooManyEdges(usize),
}

/// Enumeration budget: 2^24 edge subsets.
pub const MAX_ORACLE_EDGES: usize = 24;

/// Finds the minimum-weight edge set whose induced subgraph is connected and
/// covers every terminal, by scanning all edge subsets in ascending
/// cardinality order (no early exit: weights are not uniform). The witness is
/// re-checked structurally before returning.
pub fn brute_force_steiner(instance: &Instance) -> Result<OracleResult, OracleError> {
    let m = instance.edge_count();
    if m > MAX_ORACLE_EDGES {
        return Err(OracleError::TooManyEdges(m));
    }
    if instance.terminal_count() == 1 {
        // a single terminal is itself a Steiner tree of weight 0
        return Ok(OracleResult::Optimum {
            weight: 0,
            witness: vec![],
        });
    }
    let mut best: Option<(u64, Vec<usize>)> = None;
    for size in 0..=m {
        for subset in (0..m).combinations(size) {
            if !subgraph_is_feasible(instance, &subset) {
                continue;
            }
            let weight: u64 = subset.iter().map(|&i| instance.edges()[i].weight).sum();
            if best.as_ref().is_none_or(|(w, _)| weight < *w) {
                best = Some((weight, subset));
            }
        }
    }
    match best {
        Some((weight, witness)) => {
            assert!(
                check_witness(instance, &witness, weight),
                "oracle witness failed its structural re-check"
            );
            Ok(OracleResult::Optimum { weight, witness })
        }
        None => Ok(OracleResult::Infeasible),
    }
}

/// True iff the subgraph induced by the edge subset is connected and contains
/// every terminal.
fn subgraph_is_feasible(instance: &Instance, subset: &[usize]) -> bool {
    let mut vertices: Vec<VertexId> = Vec::new();
    for &i in subset {
        let e = instance.edges()[i];
        vertices.push(e.u);
        vertices.push(e.v);
    }
    vertices.sort_unstable();
    vertices.dedup();
    if !instance.terminals().iter().all(|t| vertices.binary_search(t).is_ok()) {
        return false;
    }
    if vertices.is_empty() {
        return instance.terminals().is_empty();
    }
    // connectivity over the subset's endpoints only
    let pos = |v: VertexId| vertices.binary_search(&v).unwrap();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &i in subset {
        let e = instance.edges()[i];
        let (a, b) = (find(&mut parent, pos(e.u)), find(&mut parent, pos(e.v)));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (0..vertices.len()).all(|i| find(&mut parent, i) == root)
}

fn check_witness(instance: &Instance, witness: &[usize], claimed: u64) -> bool {
    let weight: u64 = witness.iter().map(|&i| instance.edges()[i].weight).sum();
    weight == claimed
        && (subgraph_is_feasible(instance, witness)
            || (witness.is_empty() && instance.terminal_count() == 1))
}

/// The definitional minimum completion weight: the smallest `w` such that
/// `(p, w)` is in `entries` and `meet(p, q)` is the single-block partition.
/// `None` means no entry of `entries` completes `q`.
pub fn opt_value(q: &Partition, entries: &[WeightedPartition]) -> Option<u64> {
    entries
        .iter()
        .filter(|wp| wp.partition.meet(q).block_count() <= 1)
        .map(|wp| wp.weight)
        .min()
}
