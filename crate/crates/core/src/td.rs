//! Tree decompositions: the greedy-degree construction heuristic and a
//! validity checker for the three decomposition properties.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::graph::{Instance, VertexId};

/// A tree decomposition: bags of vertices connected by tree edges.
#[derive(Clone, Debug)]
pub struct TreeDecomposition {
    bags: Vec<BTreeSet<VertexId>>,
    tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new(bags: Vec<BTreeSet<VertexId>>, tree_edges: Vec<(usize, usize)>) -> Self {
        TreeDecomposition { bags, tree_edges }
    }

    pub fn bags(&self) -> &[BTreeSet<VertexId>] {
        &self.bags
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.tree_edges
    }

    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Neighbour lists over bag indices.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.tree_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Text export for debugging: one `bag` line per node, then the tree
    /// edges. Not consumed by the solver path.
    pub fn export_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (i, bag) in self.bags.iter().enumerate() {
            let _ = write!(out, "bag {i}:");
            for v in bag {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        for &(a, b) in &self.tree_edges {
            let _ = writeln!(out, "edge {a} {b}");
        }
        out
    }
}

/// A violated tree-decomposition property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The tree edges do not form a tree over the bags.
    NotATree,
    /// A graph vertex appears in no bag.
    UncoveredVertex(VertexId),
    /// No bag contains both endpoints of a graph edge.
    UncoveredEdge(VertexId, VertexId),
    /// The bags containing a vertex do not induce a connected subtree.
    DisconnectedOccurrences(VertexId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree => write!(f, "tree edges do not form a tree"),
            Violation::UncoveredVertex(v) => write!(f, "vertex {v} not in any bag"),
            Violation::UncoveredEdge(u, v) => write!(f, "edge {u}-{v} not covered by any bag"),
            Violation::DisconnectedOccurrences(v) => {
                write!(f, "bags containing {v} are not connected")
            }
        }
    }
}

/// Checks the three decomposition properties (plus tree-ness of the node
/// structure). An empty report means the decomposition is valid.
pub fn validate(td: &TreeDecomposition, instance: &Instance) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = td.bags().len();

    // tree-ness: n - 1 edges and connectedness
    let adj = td.adjacency();
    let connected = {
        if n == 0 {
            true
        } else {
            let mut seen = vec![false; n];
            let mut queue = vec![0usize];
            seen[0] = true;
            let mut head = 0;
            while head < queue.len() {
                let x = queue[head];
                head += 1;
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push(y);
                    }
                }
            }
            seen.iter().all(|&s| s)
        }
    };
    if n == 0 || td.tree_edges().len() != n - 1 || !connected {
        violations.push(Violation::NotATree);
    }

    // vertex coverage
    let mut covered = vec![false; instance.vertex_count()];
    for bag in td.bags() {
        for v in bag {
            if v.index0() < covered.len() {
                covered[v.index0()] = true;
            }
        }
    }
    for v in instance.vertices() {
        if !covered[v.index0()] {
            violations.push(Violation::UncoveredVertex(v));
        }
    }

    // edge coverage
    for e in instance.edges() {
        if !td
            .bags()
            .iter()
            .any(|bag| bag.contains(&e.u) && bag.contains(&e.v))
        {
            violations.push(Violation::UncoveredEdge(e.u, e.v));
        }
    }

    // occurrence connectivity, per vertex
    for v in instance.vertices() {
        let members: Vec<usize> = (0..n).filter(|&i| td.bags()[i].contains(&v)).collect();
        if members.len() <= 1 {
            continue;
        }
        let member_set: HashSet<usize> = members.iter().copied().collect();
        let mut seen = HashSet::new();
        let mut queue = vec![members[0]];
        seen.insert(members[0]);
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &y in &adj[x] {
                if member_set.contains(&y) && seen.insert(y) {
                    queue.push(y);
                }
            }
        }
        if seen.len() != members.len() {
            violations.push(Violation::DisconnectedOccurrences(v));
        }
    }

    violations
}

/// Builds a tree decomposition with the greedy-degree heuristic: repeatedly
/// eliminate a minimum-degree vertex (ties broken by lowest id), taking its
/// closed neighbourhood as a bag and turning the open neighbourhood into a
/// clique. Once the remaining graph is a clique it becomes the final bag.
/// Each bag links to the bag of the earliest-eliminated remaining neighbour.
///
/// Requires a connected instance.
pub fn greedy_degree_decompose(instance: &Instance) -> TreeDecomposition {
    assert!(
        instance.is_connected(),
        "greedy-degree decomposition requires a connected graph"
    );
    let n = instance.vertex_count();
    let mut neighbours: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); n];
    for e in instance.edges() {
        neighbours[e.u.index0()].insert(e.v);
        neighbours[e.v.index0()].insert(e.u);
    }
    let mut alive: BTreeSet<VertexId> = instance.vertices().collect();

    let mut bags: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    // for each eliminated vertex: its bag index and elimination time
    let mut bag_of: vec_map::VecMap = vec_map::VecMap::new(n);

    loop {
        let min_degree = alive
            .iter()
            .map(|v| neighbours[v.index0()].len())
            .min()
            .expect("alive set never empties before the clique stop");
        if min_degree == alive.len() - 1 {
            // remaining graph is a clique: one final bag
            let final_bag: BTreeSet<VertexId> = alive.iter().copied().collect();
            let final_idx = bags.len();
            bags.push(final_bag);
            for &v in &alive {
                bag_of.set_final(v, final_idx);
            }
            break;
        }
        // minimum degree, ties by lowest id (BTreeSet iterates ascending)
        let v = *alive
            .iter()
            .find(|v| neighbours[v.index0()].len() == min_degree)
            .unwrap();
        let mut bag: BTreeSet<VertexId> = neighbours[v.index0()].clone();
        bag.insert(v);
        let idx = bags.len();
        bags.push(bag);
        bag_of.set_eliminated(v, idx);

        // fill: neighbourhood becomes a clique
        let nbrs: Vec<VertexId> = neighbours[v.index0()].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                neighbours[a.index0()].insert(b);
                neighbours[b.index0()].insert(a);
            }
        }
        for &a in &nbrs {
            neighbours[a.index0()].remove(&v);
        }
        neighbours[v.index0()].clear();
        alive.remove(&v);
    }

    // each eliminated bag links to the bag of its earliest-eliminated
    // neighbour at elimination time (final-bag members count as latest)
    for (idx, bag) in bags.iter().enumerate() {
        let Some(owner) = bag_of.owner_of_bag(idx, bag) else {
            continue; // the final bag, or a single-vertex graph
        };
        let parent = bag
            .iter()
            .filter(|&&w| w != owner)
            .min_by_key(|w| bag_of.elimination_time(**w))
            .map(|w| bag_of.bag_index(*w));
        if let Some(parent) = parent {
            tree_edges.push((idx, parent));
        }
    }

    TreeDecomposition { bags, tree_edges }
}

/// Bookkeeping for elimination order: which bag a vertex's elimination
/// created and when, with final-clique members ordered after everyone else.
mod vec_map {
    use super::VertexId;

    pub struct VecMap {
        bag: Vec<usize>,
        time: Vec<usize>,
        next_time: usize,
    }

    impl VecMap {
        pub fn new(n: usize) -> Self {
            VecMap {
                bag: vec![usize::MAX; n],
                time: vec![usize::MAX; n],
                next_time: 0,
            }
        }

        pub fn set_eliminated(&mut self, v: VertexId, bag: usize) {
            self.bag[v.index0()] = bag;
            self.time[v.index0()] = self.next_time;
            self.next_time += 1;
        }

        pub fn set_final(&mut self, v: VertexId, bag: usize) {
            self.bag[v.index0()] = bag;
            // final-bag members keep time MAX: they order after all others
        }

        pub fn elimination_time(&self, v: VertexId) -> usize {
            self.time[v.index0()]
        }

        pub fn bag_index(&self, v: VertexId) -> usize {
            self.bag[v.index0()]
        }

        /// The vertex whose elimination created this bag, if it was an
        /// elimination bag rather than the final clique.
        pub fn owner_of_bag(
            &self,
            idx: usize,
            bag: &std::collections::BTreeSet<VertexId>,
        ) -> Option<VertexId> {
            bag.iter()
                .copied()
                .find(|v| self.bag[v.index0()] == idx && self.time[v.index0()] != usize::MAX)
        }
    }
}
