//! Rank-based table reduction: shrink a set of weighted partitions to a
//! representative subset by taking a lightest row basis of its GF(2) cut
//! matrix, found with weight-ordered Gaussian elimination.
//!
//! A cut matrix has one row per weighted partition and one column per cut of
//! the ground set; the entry is 1 iff the cut does not split any block of the
//! partition. A maximal independent set of rows, preferring lighter rows,
//! preserves every completion optimum of the original set.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dp::{BagTable, DpCtx, SolveError, SolveStats, WeightedPartition};
use crate::graph::VertexId;

/// When to run the reduction during a solve.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionPolicy {
    /// Classic DP: never reduce.
    #[serde(rename = "cdp")]
    Classic,
    /// Reduce every sub-table after every bag.
    #[serde(rename = "rba")]
    ReduceAlways,
    /// Reduce a sub-table only once it holds at least 2^|U| entries, the
    /// point where the reduction is guaranteed to delete something.
    #[serde(rename = "rbc")]
    ReduceWhenLarge,
}

impl ReductionPolicy {
    pub const ALL: [ReductionPolicy; 3] = [
        ReductionPolicy::Classic,
        ReductionPolicy::ReduceAlways,
        ReductionPolicy::ReduceWhenLarge,
    ];
}

impl fmt::Display for ReductionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ReductionPolicy::Classic => "cdp",
            ReductionPolicy::ReduceAlways => "rba",
            ReductionPolicy::ReduceWhenLarge => "rbc",
        };
        write!(f, "{name}")
    }
}

impl FromStr for ReductionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cdp" => Ok(ReductionPolicy::Classic),
            "rba" => Ok(ReductionPolicy::ReduceAlways),
            "rbc" => Ok(ReductionPolicy::ReduceWhenLarge),
            other => Err(format!("unknown algorithm `{other}`, expected cdp|rba|rbc")),
        }
    }
}

/// The GF(2) cut matrix of a set of weighted partitions: rows sorted by
/// ascending weight (ties by canonical partition order), columns ordered as
/// in [`crate::partition::enumerate_cuts`], bits packed into words.
pub struct CutMatrix {
    rows: Vec<MatrixRow>,
    columns: usize,
    words: usize,
}

struct MatrixRow {
    entry: WeightedPartition,
    bits: Vec<u64>,
}

impl CutMatrix {
    /// Fills the matrix for `entries`, all over the same nonempty ground set.
    pub fn build(entries: &[WeightedPartition], ground: &[VertexId]) -> CutMatrix {
        let n = ground.len();
        assert!(n >= 1, "cut matrix needs a nonempty ground set");
        assert!(n <= 32, "ground set too large for a cut matrix");
        for e in entries {
            assert_eq!(e.partition.ground(), ground, "ground-set mismatch");
        }
        let columns = 1usize << (n - 1);
        let words = columns.div_ceil(64);

        let mut sorted: Vec<WeightedPartition> = entries.to_vec();
        sorted.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.partition.cmp(&b.partition)));

        // scratch for the column index of each block subset
        let mut subset_cols: Vec<u32> = Vec::new();
        let rows = sorted
            .into_iter()
            .map(|entry| {
                let mut bits = vec![0u64; words];
                // masks of the blocks not containing the first element,
                // in coordinates of the counter over ground[1..]
                let labels = entry.partition.block_labels();
                let mut others: Vec<u32> = Vec::new();
                for lead in 1..n {
                    if labels[lead] as usize == lead {
                        let mut mask = 0u32;
                        for (i, &l) in labels.iter().enumerate() {
                            if l as usize == lead {
                                mask |= 1 << (i - 1);
                            }
                        }
                        others.push(mask);
                    }
                }
                // a cut refines the partition iff its side2 is a union of
                // whole non-first blocks: enumerate those unions directly
                let k = others.len();
                subset_cols.clear();
                subset_cols.resize(1 << k, 0);
                for s in 1usize..(1 << k) {
                    let low = s.trailing_zeros() as usize;
                    subset_cols[s] = subset_cols[s & (s - 1)] | others[low];
                }
                for &col in subset_cols.iter() {
                    bits[col as usize / 64] |= 1u64 << (col % 64);
                }
                MatrixRow { entry, bits }
            })
            .collect();
        CutMatrix {
            rows,
            columns,
            words,
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns
    }

    /// The weighted partition of a row, in weight-sorted order.
    pub fn row_entry(&self, row: usize) -> &WeightedPartition {
        &self.rows[row].entry
    }

    pub fn bit(&self, row: usize, col: usize) -> bool {
        (self.rows[row].bits[col / 64] >> (col % 64)) & 1 == 1
    }

    /// Weight-ordered Gaussian elimination: walk the rows from lightest to
    /// heaviest, keep each row that is independent of the kept ones, and add
    /// it into every later row sharing its leading column. All-zero rows are
    /// dependent and dropped. Stops once the kept set saturates the column
    /// rank (processing more rows could only produce zero rows).
    pub fn lightest_basis(&mut self) -> Vec<WeightedPartition> {
        let mut kept: Vec<usize> = Vec::new();
        for i in 0..self.rows.len() {
            if kept.len() == self.columns {
                break;
            }
            let Some(pivot) = leading_one(&self.rows[i].bits) else {
                continue;
            };
            kept.push(i);
            let (before, after) = self.rows.split_at_mut(i + 1);
            let row = &before[i];
            for later in after.iter_mut() {
                if (later.bits[pivot / 64] >> (pivot % 64)) & 1 == 1 {
                    for w in 0..self.words {
                        later.bits[w] ^= row.bits[w];
                    }
                }
            }
        }
        kept.into_iter().map(|i| self.rows[i].entry.clone()).collect()
    }
}

fn leading_one(bits: &[u64]) -> Option<usize> {
    bits.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Shrinks `entries` (deduplicated weighted partitions over one ground set)
/// to a representative subset: every completion optimum is preserved and at
/// most 2^(|U|-1) entries survive. The empty ground set is returned as is.
pub fn reduce(entries: &[WeightedPartition]) -> Vec<WeightedPartition> {
    let Some(first) = entries.first() else {
        return Vec::new();
    };
    let ground: Vec<VertexId> = first.partition.ground().to_vec();
    if ground.is_empty() {
        return entries.to_vec();
    }
    let mut matrix = CutMatrix::build(entries, &ground);
    matrix.lightest_basis()
}

/// Applies the reduction policy to every sub-table of a bag table.
pub fn apply_policy(table: BagTable, policy: ReductionPolicy, stats: &mut SolveStats) -> BagTable {
    let mut ctx = DpCtx::new(stats, None);
    apply_policy_ctx(table, policy, &mut ctx).expect("reduction cannot fail without a deadline")
}

pub(crate) fn apply_policy_ctx(
    mut table: BagTable,
    policy: ReductionPolicy,
    ctx: &mut DpCtx,
) -> Result<BagTable, SolveError> {
    if policy == ReductionPolicy::Classic {
        return Ok(table);
    }
    let masks: Vec<u64> = table.subs().keys().copied().collect();
    for mask in masks {
        let ground_size = mask.count_ones() as usize;
        if ground_size == 0 {
            continue;
        }
        let len = table.subs()[&mask].len();
        if len <= 1 {
            continue;
        }
        if policy == ReductionPolicy::ReduceWhenLarge && len < (1usize << ground_size) {
            continue;
        }
        ctx.check_deadline()?;
        let ground = table.ground_of(mask);
        let entries: Vec<WeightedPartition> = table.subs()[&mask]
            .iter()
            .map(|(p, w)| WeightedPartition {
                partition: p.clone(),
                weight: *w,
            })
            .collect();

        let fill_start = Instant::now();
        let mut matrix = CutMatrix::build(&entries, &ground);
        ctx.stats.matrix_fill_time += fill_start.elapsed();

        let elim_start = Instant::now();
        let basis = matrix.lightest_basis();
        ctx.stats.elimination_time += elim_start.elapsed();

        ctx.stats.reduce_calls += 1;
        if basis.len() > (1usize << (ground_size - 1)) {
            ctx.stats.reduced_bound_violations += 1;
        }
        let sub = table.subs_mut().get_mut(&mask).unwrap();
        sub.clear();
        for wp in basis {
            sub.insert(wp.partition, wp.weight);
        }
    }
    Ok(table)
}
