//! The per-bag dynamic program: tables mapping vertex-usage assignments to
//! sets of weighted partitions, and the recurrences for the five node types
//! of a nice tree decomposition.
//!
//! Tables are nested hash maps: the outer key is the usage assignment (a bit
//! mask over the sorted bag), the inner key the canonical partition of the
//! used vertices, hashed through its multiplicative fingerprint, the value
//! the minimum weight seen. Inserting through [`BagTable::insert_min`] keeps
//! only the minimum-weight copy of each partition, so tables are always
//! deduplicated. Assignments with no entries are not stored; an absent entry
//! means "no partial solution", never a sentinel weight.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::VertexId;
use crate::partition::Partition;

/// A partition of the used bag vertices together with the minimum weight of
/// a partial solution realizing exactly that connectivity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct WeightedPartition {
    pub partition: Partition,
    pub weight: u64,
}

/// A vertex-usage assignment over a bag: which bag vertices the partial tree
/// uses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Assignment {
    bag: Vec<VertexId>,
    mask: u64,
}

impl Assignment {
    pub fn bag(&self) -> &[VertexId] {
        &self.bag
    }

    pub fn is_used(&self, v: VertexId) -> bool {
        match self.bag.binary_search(&v) {
            Ok(pos) => (self.mask >> pos) & 1 == 1,
            Err(_) => false,
        }
    }

    /// The used vertices, i.e. the ground set of this assignment's partitions.
    pub fn used(&self) -> Vec<VertexId> {
        mask_ground(&self.bag, self.mask)
    }
}

fn mask_ground(bag: &[VertexId], mask: u64) -> Vec<VertexId> {
    bag.iter()
        .enumerate()
        .filter(|(i, _)| (mask >> i) & 1 == 1)
        .map(|(_, v)| *v)
        .collect()
}

/// Per-bag table: assignment mask -> (partition -> minimum weight).
#[derive(Clone, Debug)]
pub struct BagTable {
    bag: Vec<VertexId>,
    subs: HashMap<u64, HashMap<Partition, u64>>,
}

impl BagTable {
    pub fn new(bag: Vec<VertexId>) -> Self {
        debug_assert!(bag.windows(2).all(|w| w[0] < w[1]), "bag must be sorted");
        assert!(bag.len() <= 32, "bags above 32 vertices are unsupported");
        BagTable {
            bag,
            subs: HashMap::new(),
        }
    }

    pub fn bag(&self) -> &[VertexId] {
        &self.bag
    }

    /// Total number of stored entries across all assignments.
    pub fn len(&self) -> usize {
        self.subs.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }

    /// Keeps the minimum weight per (assignment, partition); this is the
    /// "remove non-minimal copies" step applied on every insertion.
    pub fn insert_min(&mut self, mask: u64, partition: Partition, weight: u64) {
        let slot = self
            .subs
            .entry(mask)
            .or_default()
            .entry(partition)
            .or_insert(weight);
        if weight < *slot {
            *slot = weight;
        }
    }

    /// Inserts by used-vertex set instead of raw mask.
    pub fn insert(&mut self, used: &[VertexId], partition: Partition, weight: u64) {
        let mut mask = 0u64;
        for v in used {
            let pos = self
                .bag
                .binary_search(v)
                .expect("used vertex must be in the bag");
            mask |= 1 << pos;
        }
        self.insert_min(mask, partition, weight);
    }

    /// The ground set selected by an assignment mask.
    pub fn ground_of(&self, mask: u64) -> Vec<VertexId> {
        mask_ground(&self.bag, mask)
    }

    /// Entries for the assignment using exactly `used`, sorted by partition.
    pub fn entries_for(&self, used: &[VertexId]) -> Option<Vec<WeightedPartition>> {
        let mut mask = 0u64;
        for v in used {
            mask |= 1 << self.bag.binary_search(v).ok()?;
        }
        let sub = self.subs.get(&mask)?;
        let mut out: Vec<WeightedPartition> = sub
            .iter()
            .map(|(p, w)| WeightedPartition {
                partition: p.clone(),
                weight: *w,
            })
            .collect();
        out.sort();
        Some(out)
    }

    /// All entries in deterministic order (ascending mask, then partition).
    pub fn entries(&self) -> Vec<(Assignment, WeightedPartition)> {
        let mut masks: Vec<u64> = self.subs.keys().copied().collect();
        masks.sort_unstable();
        let mut out = Vec::with_capacity(self.len());
        for mask in masks {
            let mut sub: Vec<WeightedPartition> = self.subs[&mask]
                .iter()
                .map(|(p, w)| WeightedPartition {
                    partition: p.clone(),
                    weight: *w,
                })
                .collect();
            sub.sort();
            for wp in sub {
                out.push((
                    Assignment {
                        bag: self.bag.clone(),
                        mask,
                    },
                    wp,
                ));
            }
        }
        out
    }

    pub(crate) fn subs(&self) -> &HashMap<u64, HashMap<Partition, u64>> {
        &self.subs
    }

    pub(crate) fn subs_mut(&mut self) -> &mut HashMap<u64, HashMap<Partition, u64>> {
        &mut self.subs
    }
}

/// Counters and phase timings collected over one solve.
///
/// `partial_solutions_generated` counts every candidate entry handed to a
/// table before deduplication or reduction: one for the leaf seed, one per
/// emitted variant at introduce-vertex and forget nodes, two per entry of an
/// affected sub-table at introduce-edge nodes (kept and merged variants), and
/// one per combined pair at join nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub partial_solutions_generated: u64,
    /// bag size -> largest table (total entries) seen for a bag of that size,
    /// measured after the node's recurrence and any reduction.
    pub max_table_size_by_bag_size: BTreeMap<usize, u64>,
    /// Number of sub-table reductions performed.
    pub reduce_calls: u64,
    /// Sub-tables that still exceeded 2^(|U|-1) entries after a reduction;
    /// always zero, counted so the bound is checkable from the outside.
    pub reduced_bound_violations: u64,
    pub decompose_time: Duration,
    pub nicify_time: Duration,
    pub dp_time: Duration,
    /// Time spent filling cut matrices, across all reductions.
    pub matrix_fill_time: Duration,
    /// Time spent on Gaussian elimination, across all reductions.
    pub elimination_time: Duration,
}

impl SolveStats {
    pub fn record_table(&mut self, bag_size: usize, entries: u64) {
        let slot = self.max_table_size_by_bag_size.entry(bag_size).or_insert(0);
        *slot = (*slot).max(entries);
    }
}

/// Solver failure modes.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("time budget exhausted")]
    Timeout,
    #[error("terminals cannot be connected; instance is infeasible")]
    Infeasible,
    #[error("partial-solution weight overflows u64")]
    WeightOverflow,
    #[error("bag of size {0} exceeds the supported maximum of 32")]
    BagTooLarge(usize),
}

/// Mutable context threaded through the recurrences: stats plus an optional
/// deadline that is polled every few thousand emissions.
pub(crate) struct DpCtx<'a> {
    pub stats: &'a mut SolveStats,
    deadline: Option<Instant>,
    since_check: u32,
}

const CHECK_INTERVAL: u32 = 8192;

impl<'a> DpCtx<'a> {
    pub(crate) fn new(stats: &'a mut SolveStats, deadline: Option<Instant>) -> Self {
        DpCtx {
            stats,
            deadline,
            since_check: 0,
        }
    }

    fn emit(&mut self, n: u64) -> Result<(), SolveError> {
        self.stats.partial_solutions_generated += n;
        self.since_check = self.since_check.saturating_add(n as u32);
        if self.since_check >= CHECK_INTERVAL {
            self.since_check = 0;
            self.check_deadline()?;
        }
        Ok(())
    }

    pub(crate) fn check_deadline(&self) -> Result<(), SolveError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(SolveError::Timeout),
            _ => Ok(()),
        }
    }
}

/// The table of a leaf node: the empty assignment mapping to the empty
/// partition with weight zero.
pub fn leaf_table() -> BagTable {
    let mut stats = SolveStats::default();
    leaf_table_ctx(&mut DpCtx::new(&mut stats, None)).expect("leaf table cannot fail")
}

pub(crate) fn leaf_table_ctx(ctx: &mut DpCtx) -> Result<BagTable, SolveError> {
    let mut table = BagTable::new(vec![]);
    ctx.emit(1)?;
    table.insert_min(0, Partition::empty(), 0);
    Ok(table)
}

fn expand_mask(mask: u64, pos: usize) -> u64 {
    let low = mask & ((1 << pos) - 1);
    let high = mask >> pos;
    low | (high << (pos + 1))
}

fn collapse_mask(mask: u64, pos: usize) -> u64 {
    let low = mask & ((1 << pos) - 1);
    let high = mask >> (pos + 1);
    low | (high << pos)
}

/// Introduce vertex `v`: each child entry yields a variant with `v` used (as
/// a singleton block) and, unless `v` is a terminal, a variant with `v`
/// unused. Terminals must always be used.
pub fn introduce_vertex(child: &BagTable, v: VertexId, v_is_terminal: bool) -> BagTable {
    let mut stats = SolveStats::default();
    introduce_vertex_ctx(child, v, v_is_terminal, &mut DpCtx::new(&mut stats, None))
        .expect("introduce-vertex cannot fail without a deadline")
}

pub(crate) fn introduce_vertex_ctx(
    child: &BagTable,
    v: VertexId,
    v_is_terminal: bool,
    ctx: &mut DpCtx,
) -> Result<BagTable, SolveError> {
    debug_assert!(child.bag.binary_search(&v).is_err(), "vertex already in bag");
    let mut bag = child.bag.clone();
    let pos = bag.binary_search(&v).unwrap_err();
    bag.insert(pos, v);
    if bag.len() > 32 {
        return Err(SolveError::BagTooLarge(bag.len()));
    }
    let mut out = BagTable::new(bag);
    for (&mask, sub) in &child.subs {
        let unused_mask = expand_mask(mask, pos);
        let used_mask = unused_mask | (1 << pos);
        let mut ground_with_v = child.ground_of(mask);
        let gpos = ground_with_v.binary_search(&v).unwrap_err();
        ground_with_v.insert(gpos, v);
        for (p, &w) in sub {
            ctx.emit(1)?;
            out.insert_min(used_mask, p.project_up(&ground_with_v), w);
            if !v_is_terminal {
                ctx.emit(1)?;
                out.insert_min(unused_mask, p.clone(), w);
            }
        }
    }
    Ok(out)
}

/// Introduce the edge `u-v` of weight `w`: in every sub-table where both
/// endpoints are used, each entry keeps an unchanged variant and adds a
/// variant with the blocks of `u` and `v` merged and `w` added. Sub-tables
/// where either endpoint is unused are left as they are.
pub fn introduce_edge(child: BagTable, u: VertexId, v: VertexId, w: u64) -> BagTable {
    let mut stats = SolveStats::default();
    introduce_edge_ctx(child, u, v, w, &mut DpCtx::new(&mut stats, None))
        .expect("partial-solution weight overflowed u64")
}

pub(crate) fn introduce_edge_ctx(
    mut child: BagTable,
    u: VertexId,
    v: VertexId,
    w: u64,
    ctx: &mut DpCtx,
) -> Result<BagTable, SolveError> {
    let pu = child.bag.binary_search(&u).expect("edge endpoint not in bag");
    let pv = child.bag.binary_search(&v).expect("edge endpoint not in bag");
    let both = (1u64 << pu) | (1 << pv);
    let masks: Vec<u64> = child
        .subs
        .keys()
        .copied()
        .filter(|m| m & both == both)
        .collect();
    for mask in masks {
        let ground = child.ground_of(mask);
        let uv_block = Partition::block_partition(&ground, &[u, v]);
        let sub = child.subs.get_mut(&mask).unwrap();
        let mut merged: Vec<(Partition, u64)> = Vec::with_capacity(sub.len());
        for (p, &w0) in sub.iter() {
            // one emission for the kept entry, one for the merged variant
            ctx.emit(2)?;
            let total = w0.checked_add(w).ok_or(SolveError::WeightOverflow)?;
            merged.push((p.meet(&uv_block), total));
        }
        for (p, total) in merged {
            let slot = sub.entry(p).or_insert(total);
            if total < *slot {
                *slot = total;
            }
        }
    }
    Ok(child)
}

/// Forget vertex `v`: entries with `v` unused are carried over; entries with
/// `v` used survive only if `v` is co-blocked with another used vertex (a
/// used-but-isolated `v` can never reach the root terminal any more) and are
/// projected down to drop `v`. Colliding partitions keep the minimum weight.
pub fn forget_vertex(child: &BagTable, v: VertexId) -> BagTable {
    let mut stats = SolveStats::default();
    forget_vertex_ctx(child, v, &mut DpCtx::new(&mut stats, None))
        .expect("forget-vertex cannot fail without a deadline")
}

pub(crate) fn forget_vertex_ctx(
    child: &BagTable,
    v: VertexId,
    ctx: &mut DpCtx,
) -> Result<BagTable, SolveError> {
    let pos = child.bag.binary_search(&v).expect("forgotten vertex not in bag");
    let mut bag = child.bag.clone();
    bag.remove(pos);
    let mut out = BagTable::new(bag);
    for (&mask, sub) in &child.subs {
        let new_mask = collapse_mask(mask, pos);
        if (mask >> pos) & 1 == 0 {
            for (p, &w) in sub {
                ctx.emit(1)?;
                out.insert_min(new_mask, p.clone(), w);
            }
        } else {
            let ground = child.ground_of(mask);
            let rest: Vec<VertexId> = ground.iter().copied().filter(|&x| x != v).collect();
            for (p, &w) in sub {
                if p.is_singleton(v) {
                    // dead component: dropped, not an emission
                    continue;
                }
                ctx.emit(1)?;
                out.insert_min(new_mask, p.project_down(&rest), w);
            }
        }
    }
    Ok(out)
}

/// Join two tables over the same bag: for every assignment present on both
/// sides, combine all entry pairs by meeting their partitions and adding
/// their weights.
pub fn join(left: &BagTable, right: &BagTable) -> BagTable {
    let mut stats = SolveStats::default();
    join_ctx(left, right, &mut DpCtx::new(&mut stats, None))
        .expect("partial-solution weight overflowed u64")
}

pub(crate) fn join_ctx(
    left: &BagTable,
    right: &BagTable,
    ctx: &mut DpCtx,
) -> Result<BagTable, SolveError> {
    assert_eq!(left.bag, right.bag, "join requires identical bags");
    let mut out = BagTable::new(left.bag.clone());
    for (&mask, lsub) in &left.subs {
        let Some(rsub) = right.subs.get(&mask) else {
            continue; // both children must agree on the assignment
        };
        for (p, &w1) in lsub {
            for (q, &w2) in rsub {
                ctx.emit(1)?;
                let total = w1.checked_add(w2).ok_or(SolveError::WeightOverflow)?;
                out.insert_min(mask, p.meet(q), total);
            }
        }
    }
    Ok(out)
}

/// Keeps, for each distinct partition, exactly the minimum weight.
pub fn deduplicate(entries: impl IntoIterator<Item = WeightedPartition>) -> Vec<WeightedPartition> {
    let mut min: HashMap<Partition, u64> = HashMap::new();
    for wp in entries {
        let slot = min.entry(wp.partition).or_insert(wp.weight);
        if wp.weight < *slot {
            *slot = wp.weight;
        }
    }
    let mut out: Vec<WeightedPartition> = min
        .into_iter()
        .map(|(partition, weight)| WeightedPartition { partition, weight })
        .collect();
    out.sort();
    out
}

/// Reads the answer from the child table of the root forget node: the weight
/// of the single-block partition over the root terminal alone. No such entry
/// means the terminals cannot be connected.
pub fn extract_answer(root_child: &BagTable, root_terminal: VertexId) -> Result<u64, SolveError> {
    assert_eq!(
        root_child.bag,
        vec![root_terminal],
        "root must forget the last remaining terminal"
    );
    let single = Partition::singletons(&[root_terminal]);
    root_child
        .subs
        .get(&1)
        .and_then(|sub| sub.get(&single).copied())
        .ok_or(SolveError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vid(i: u32) -> VertexId {
        VertexId::new(i)
    }

    fn wp(blocks: &[&[u32]], weight: u64) -> WeightedPartition {
        let blocks: Vec<Vec<VertexId>> = blocks
            .iter()
            .map(|b| b.iter().map(|&i| vid(i)).collect())
            .collect();
        let refs: Vec<&[VertexId]> = blocks.iter().map(|b| b.as_slice()).collect();
        WeightedPartition {
            partition: Partition::from_blocks(&refs),
            weight,
        }
    }

    #[test]
    fn leaf_table_is_the_empty_seed() {
        let t = leaf_table();
        assert_eq!(t.len(), 1);
        let entries = t.entries();
        assert_eq!(entries[0].1.partition, Partition::empty());
        assert_eq!(entries[0].1.weight, 0);
    }

    #[test]
    fn introduce_vertex_branches_on_usage() {
        let t = introduce_vertex(&leaf_table(), vid(1), false);
        assert_eq!(t.len(), 2);
        assert_eq!(
            t.entries_for(&[]).unwrap(),
            vec![WeightedPartition {
                partition: Partition::empty(),
                weight: 0
            }]
        );
        assert_eq!(t.entries_for(&[vid(1)]).unwrap(), vec![wp(&[&[1]], 0)]);
    }

    #[test]
    fn introduce_terminal_forces_usage() {
        let t = introduce_vertex(&leaf_table(), vid(1), true);
        assert_eq!(t.len(), 1);
        assert!(t.entries_for(&[]).is_none());
        assert_eq!(t.entries_for(&[vid(1)]).unwrap(), vec![wp(&[&[1]], 0)]);
    }

    #[test]
    fn introduce_vertex_leaves_weights_alone() {
        let mut child = BagTable::new(vec![vid(1)]);
        child.insert(&[vid(1)], Partition::singletons(&[vid(1)]), 9);
        let t = introduce_vertex(&child, vid(2), false);
        for (_, entry) in t.entries() {
            assert_eq!(entry.weight, 9);
        }
    }

    #[test]
    fn introduce_edge_adds_merged_variant() {
        let (u, v) = (vid(1), vid(2));
        let mut child = BagTable::new(vec![u, v]);
        child.insert(&[u, v], Partition::singletons(&[u, v]), 0);
        let t = introduce_edge(child, u, v, 7);
        assert_eq!(
            t.entries_for(&[u, v]).unwrap(),
            vec![wp(&[&[1, 2]], 7), wp(&[&[1], &[2]], 0)]
        );
    }

    #[test]
    fn introduce_edge_keeps_dominating_entry() {
        let (u, v) = (vid(1), vid(2));
        let mut child = BagTable::new(vec![u, v]);
        child.insert(&[u, v], Partition::from_blocks(&[&[u, v]]), 3);
        let t = introduce_edge(child, u, v, 7);
        // merged variant weighs 10 with the same partition: dominated
        assert_eq!(t.entries_for(&[u, v]).unwrap(), vec![wp(&[&[1, 2]], 3)]);
    }

    #[test]
    fn introduce_edge_skips_unused_endpoints() {
        let (u, v) = (vid(1), vid(2));
        let mut child = BagTable::new(vec![u, v]);
        child.insert(&[u], Partition::singletons(&[u]), 4);
        let t = introduce_edge(child, u, v, 7);
        assert_eq!(t.entries_for(&[u]).unwrap(), vec![wp(&[&[1]], 4)]);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn forget_drops_used_singletons() {
        let (v, a) = (vid(1), vid(2));
        let mut child = BagTable::new(vec![v, a]);
        child.insert(&[v, a], Partition::singletons(&[v, a]), 5);
        let t = forget_vertex(&child, v);
        // v was used but isolated: the whole entry dies
        assert!(t.entries_for(&[a]).is_none());
    }

    #[test]
    fn forget_projects_connected_entries() {
        let (v, a) = (vid(1), vid(2));
        let mut child = BagTable::new(vec![v, a]);
        child.insert(&[v, a], Partition::from_blocks(&[&[v, a]]), 5);
        let t = forget_vertex(&child, v);
        assert_eq!(t.entries_for(&[a]).unwrap(), vec![wp(&[&[2]], 5)]);
    }

    #[test]
    fn forget_merges_branches_by_minimum() {
        let (v, a) = (vid(1), vid(2));
        let mut child = BagTable::new(vec![v, a]);
        child.insert(&[v, a], Partition::from_blocks(&[&[v, a]]), 5);
        child.insert(&[a], Partition::singletons(&[a]), 3);
        let t = forget_vertex(&child, v);
        assert_eq!(t.entries_for(&[a]).unwrap(), vec![wp(&[&[2]], 3)]);
    }

    #[test]
    fn join_meets_partitions_and_adds_weights() {
        let (a, b) = (vid(1), vid(2));
        let mut left = BagTable::new(vec![a, b]);
        left.insert(&[a, b], Partition::singletons(&[a, b]), 2);
        let mut right = BagTable::new(vec![a, b]);
        right.insert(&[a, b], Partition::from_blocks(&[&[a, b]]), 3);
        let t = join(&left, &right);
        assert_eq!(t.entries_for(&[a, b]).unwrap(), vec![wp(&[&[1, 2]], 5)]);

        let mut right2 = BagTable::new(vec![a, b]);
        right2.insert(&[a, b], Partition::singletons(&[a, b]), 4);
        let t2 = join(&left, &right2);
        assert_eq!(t2.entries_for(&[a, b]).unwrap(), vec![wp(&[&[1], &[2]], 6)]);
    }

    #[test]
    fn join_requires_agreement_on_assignments() {
        let (a, b) = (vid(1), vid(2));
        let mut left = BagTable::new(vec![a, b]);
        left.insert(&[a], Partition::singletons(&[a]), 2);
        let right = BagTable::new(vec![a, b]);
        let t = join(&left, &right);
        assert!(t.is_empty());
    }

    #[test]
    fn deduplicate_keeps_minimum_per_partition() {
        let entries = vec![wp(&[&[1], &[2]], 5), wp(&[&[1], &[2]], 3), wp(&[&[1, 2]], 4)];
        assert_eq!(
            deduplicate(entries),
            vec![wp(&[&[1, 2]], 4), wp(&[&[1], &[2]], 3)]
        );
        let already = vec![wp(&[&[1, 2]], 4)];
        assert_eq!(deduplicate(already.clone()), already);
        assert_eq!(deduplicate(vec![]), vec![]);
    }

    #[test]
    fn extract_answer_reads_the_single_block() {
        let t = vid(7);
        let mut child = BagTable::new(vec![t]);
        child.insert(&[t], Partition::singletons(&[t]), 12);
        assert_eq!(extract_answer(&child, t), Ok(12));

        let mut zero = BagTable::new(vec![t]);
        zero.insert(&[t], Partition::singletons(&[t]), 0);
        assert_eq!(extract_answer(&zero, t), Ok(0));

        let empty = BagTable::new(vec![t]);
        assert_eq!(extract_answer(&empty, t), Err(SolveError::Infeasible));
    }

    #[test]
    fn weight_overflow_is_loud() {
        let (a, b) = (vid(1), vid(2));
        let mut left = BagTable::new(vec![a, b]);
        left.insert(&[a, b], Partition::singletons(&[a, b]), u64::MAX - 1);
        let mut stats = SolveStats::default();
        let res = join_ctx(&left, &left, &mut DpCtx::new(&mut stats, None));
        assert_eq!(res.err(), Some(SolveError::WeightOverflow));
    }

    #[test]
    fn mask_surgery_round_trips() {
        for pos in 0..5 {
            for mask in 0u64..32 {
                assert_eq!(collapse_mask(expand_mask(mask, pos), pos), mask);
            }
        }
        assert_eq!(expand_mask(0b1011, 2), 0b10011);
        assert_eq!(collapse_mask(0b10111, 2), 0b1011);
    }
}
