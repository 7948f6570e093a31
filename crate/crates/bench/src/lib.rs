//! Deterministic instance fixtures shared by the benchmark harness.

use steiner_core::graph::{generate_instance, Instance, PlainGraph};
use steiner_core::partition::{enumerate_partitions, Partition};
use steiner_core::{VertexId, WeightedPartition};

/// Splitmix-style generator, enough to scatter edges reproducibly.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// A rows x cols grid graph with seeded weights; every seventh vertex and
/// the two far corners are terminals. Grids keep the heuristic width near
/// the short dimension, so this pins the table sizes benchmarks see.
pub fn grid_instance(rows: u32, cols: u32, seed: u64) -> Instance {
    let at = |r: u32, c: u32| r * cols + c + 1;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((at(r, c), at(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((at(r, c), at(r + 1, c)));
            }
        }
    }
    let n = rows * cols;
    let graph = PlainGraph {
        vertex_count: n as usize,
        edges,
    };
    let mut instance = generate_instance(&graph, 0.15, (1, 10), seed).unwrap();
    // stabilize the terminal spread regardless of the sampled set
    let mut terminals: Vec<u32> = (1..=n).filter(|v| v % 7 == 1).collect();
    terminals.push(n);
    instance = Instance::new(
        n as usize,
        instance
            .edges()
            .iter()
            .map(|e| (e.u.get(), e.v.get(), e.weight))
            .collect(),
        terminals,
    )
    .unwrap();
    instance
}

/// A connected sparse graph in the style of the benchmark corpus: a random
/// spanning tree plus extra edges, seeded weights and terminals.
pub fn sparse_instance(n: u32, m: usize, seed: u64) -> Instance {
    let mut mix = Mix(seed);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 2..=n {
        let j = 1 + mix.below(u64::from(i - 1)) as u32;
        edges.push((j, i));
    }
    while edges.len() < m {
        let u = 1 + mix.below(u64::from(n)) as u32;
        let v = 1 + mix.below(u64::from(n)) as u32;
        let key = (u.min(v), u.max(v));
        if u != v && !edges.contains(&key) {
            edges.push(key);
        }
    }
    let graph = PlainGraph {
        vertex_count: n as usize,
        edges,
    };
    generate_instance(&graph, 0.25, (1, 10), seed).unwrap()
}

/// A deduplicated weighted-partition set over `1..=n`, thinned to roughly
/// `keep_one_in` of all partitions.
pub fn partition_set(n: u32, keep_one_in: usize, seed: u64) -> Vec<WeightedPartition> {
    let ground: Vec<VertexId> = (1..=n).map(VertexId::new).collect();
    let mut mix = Mix(seed);
    enumerate_partitions(&ground)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % keep_one_in == 0)
        .map(|(_, partition): (usize, Partition)| WeightedPartition {
            partition,
            weight: 1 + mix.below(1000),
        })
        .collect()
}
