//! Nice tree decompositions: rooted trees of leaf, introduce-vertex,
//! introduce-edge, forget and join nodes, plus the transformation from an
//! arbitrary tree decomposition and a dedicated validator.
//!
//! The transformation roots the tree at a bag containing the lowest-id
//! terminal and forgets that terminal last, so the root is always a forget
//! node of a terminal with an empty bag. Every graph edge is introduced
//! exactly once: immediately below the forget node of whichever endpoint is
//! forgotten first on the path to the root.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::graph::{Instance, VertexId};
use crate::td::TreeDecomposition;

/// Node type of a nice tree decomposition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeKind {
    Leaf,
    IntroduceVertex(VertexId),
    IntroduceEdge(VertexId, VertexId),
    ForgetVertex(VertexId),
    Join,
}

#[derive(Clone, Debug)]
pub struct NiceNode {
    pub kind: NodeKind,
    /// Sorted bag contents.
    pub bag: Vec<VertexId>,
    /// Child node indices: empty for leaves, one for unary nodes, two for joins.
    pub children: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
    root: usize,
}

impl NiceTreeDecomposition {
    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NiceNode {
        &self.nodes[i]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Children-before-parents order, computed iteratively.
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            order.push(x);
            stack.extend(&self.nodes[x].children);
        }
        order.reverse();
        order
    }
}

/// A violated nice-decomposition constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NiceViolation {
    LeafNotEmpty(usize),
    WrongChildCount(usize),
    BagRelation(usize, &'static str),
    IntroducedNonEdge(VertexId, VertexId),
    EdgeIntroducedAgain(VertexId, VertexId),
    EdgeNeverIntroduced(VertexId, VertexId),
    RootNotTerminalForget,
    UncoveredVertex(VertexId),
    DisconnectedOccurrences(VertexId),
    WidthChanged { expected: usize, actual: usize },
}

impl fmt::Display for NiceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NiceViolation::LeafNotEmpty(i) => write!(f, "leaf {i} has a nonempty bag"),
            NiceViolation::WrongChildCount(i) => write!(f, "node {i} has the wrong child count"),
            NiceViolation::BagRelation(i, what) => write!(f, "node {i}: {what}"),
            NiceViolation::IntroducedNonEdge(u, v) => {
                write!(f, "introduced edge {u}-{v} is not a graph edge")
            }
            NiceViolation::EdgeIntroducedAgain(u, v) => {
                write!(f, "edge {u}-{v} introduced more than once")
            }
            NiceViolation::EdgeNeverIntroduced(u, v) => {
                write!(f, "edge {u}-{v} never introduced")
            }
            NiceViolation::RootNotTerminalForget => {
                write!(f, "root is not a forget node of a terminal")
            }
            NiceViolation::UncoveredVertex(v) => write!(f, "vertex {v} not in any bag"),
            NiceViolation::DisconnectedOccurrences(v) => {
                write!(f, "bags containing {v} are not connected")
            }
            NiceViolation::WidthChanged { expected, actual } => {
                write!(f, "width {actual} differs from source width {expected}")
            }
        }
    }
}

/// Transforms a valid tree decomposition into a nice one of the same width,
/// rooted at a forget node of the lowest-id terminal.
pub fn make_nice(td: &TreeDecomposition, instance: &Instance) -> NiceTreeDecomposition {
    let t_star = instance.lowest_terminal();
    let root_bag = (0..td.bags().len())
        .find(|&i| td.bags()[i].contains(&t_star))
        .expect("every vertex occurs in some bag");

    // root the source tree at root_bag
    let n = td.bags().len();
    let adj = td.adjacency();
    let mut parent = vec![usize::MAX; n];
    let mut bfs = vec![root_bag];
    let mut seen = vec![false; n];
    seen[root_bag] = true;
    let mut head = 0;
    while head < bfs.len() {
        let x = bfs[head];
        head += 1;
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                bfs.push(y);
            }
        }
    }
    let mut children = vec![Vec::new(); n];
    for &x in &bfs {
        if parent[x] != usize::MAX {
            children[parent[x]].push(x);
        }
    }

    let mut builder = Builder::new(instance);
    // children before parents: reversed BFS order works for any rooting
    let mut top_of = vec![usize::MAX; n];
    for &x in bfs.iter().rev() {
        let bag = &td.bags()[x];
        let mut tops: Vec<usize> = children[x]
            .iter()
            .map(|&c| {
                let child_top = top_of[c];
                builder.transition(child_top, td.bags()[c].clone(), bag)
            })
            .collect();
        if tops.is_empty() {
            tops.push(builder.leaf_chain(bag));
        }
        let mut acc = tops[0];
        for &t in &tops[1..] {
            acc = builder.join(acc, t, bag);
        }
        top_of[x] = acc;
    }

    // forget everything still in the root bag, the lowest terminal last
    let mut order: Vec<VertexId> = td.bags()[root_bag]
        .iter()
        .copied()
        .filter(|&v| v != t_star)
        .collect();
    order.push(t_star);
    let root = builder.forget_all(top_of[root_bag], td.bags()[root_bag].clone(), &order);

    debug_assert_eq!(builder.introduced.len(), instance.edge_count());
    NiceTreeDecomposition {
        nodes: builder.nodes,
        root,
    }
}

struct Builder {
    nodes: Vec<NiceNode>,
    introduced: HashSet<(VertexId, VertexId)>,
    /// Adjacency lists of the graph, for edge introduction below forgets.
    neighbours: HashMap<VertexId, Vec<VertexId>>,
}

impl Builder {
    fn new(instance: &Instance) -> Self {
        let mut neighbours: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for e in instance.edges() {
            neighbours.entry(e.u).or_default().push(e.v);
            neighbours.entry(e.v).or_default().push(e.u);
        }
        Builder {
            nodes: Vec::new(),
            introduced: HashSet::new(),
            neighbours,
        }
    }

    fn push(&mut self, kind: NodeKind, bag: &BTreeSet<VertexId>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode {
            kind,
            bag: bag.iter().copied().collect(),
            children,
        });
        self.nodes.len() - 1
    }

    /// Leaf node followed by introductions of the whole bag, ascending.
    fn leaf_chain(&mut self, bag: &BTreeSet<VertexId>) -> usize {
        let mut current = BTreeSet::new();
        let mut top = self.push(NodeKind::Leaf, &current, vec![]);
        for &v in bag {
            current.insert(v);
            top = self.push(NodeKind::IntroduceVertex(v), &current, vec![top]);
        }
        top
    }

    /// Rewrites the bag on top of `top` from `from` to `to`: forgets first
    /// (ascending, each preceded by its edge introductions), then introduces
    /// (ascending).
    fn transition(&mut self, mut top: usize, from: BTreeSet<VertexId>, to: &BTreeSet<VertexId>) -> usize {
        let mut current = from;
        let forget: Vec<VertexId> = current.iter().copied().filter(|v| !to.contains(v)).collect();
        for v in forget {
            top = self.forget_one(top, &mut current, v);
        }
        for &v in to {
            if current.insert(v) {
                top = self.push(NodeKind::IntroduceVertex(v), &current, vec![top]);
            }
        }
        top
    }

    /// Introduce-edge nodes for all edges from `v` into the current bag, in
    /// ascending endpoint order, then the forget node for `v` itself.
    fn forget_one(&mut self, mut top: usize, current: &mut BTreeSet<VertexId>, v: VertexId) -> usize {
        let mut edges: Vec<(VertexId, VertexId)> = self
            .neighbours
            .get(&v)
            .map(|ns| {
                ns.iter()
                    .filter(|w| current.contains(w) && **w != v)
                    .map(|&w| if v < w { (v, w) } else { (w, v) })
                    .collect()
            })
            .unwrap_or_default();
        edges.sort_unstable();
        for (a, b) in edges {
            let fresh = self.introduced.insert((a, b));
            debug_assert!(fresh, "edge {a}-{b} would be introduced twice");
            top = self.push(NodeKind::IntroduceEdge(a, b), current, vec![top]);
        }
        current.remove(&v);
        self.push(NodeKind::ForgetVertex(v), current, vec![top])
    }

    fn join(&mut self, a: usize, b: usize, bag: &BTreeSet<VertexId>) -> usize {
        debug_assert_eq!(self.nodes[a].bag, self.nodes[b].bag);
        self.push(NodeKind::Join, bag, vec![a, b])
    }

    fn forget_all(&mut self, mut top: usize, bag: BTreeSet<VertexId>, order: &[VertexId]) -> usize {
        let mut current = bag;
        for &v in order {
            top = self.forget_one(top, &mut current, v);
        }
        top
    }
}

/// Checks every nice-decomposition constraint: the five node-type bag
/// relations, the exactly-once edge introduction rule, the terminal-forget
/// root, vertex coverage and occurrence connectivity, and (when given) width
/// preservation.
pub fn validate_nice(
    ntd: &NiceTreeDecomposition,
    instance: &Instance,
    expected_width: Option<usize>,
) -> Vec<NiceViolation> {
    let mut out = Vec::new();
    let nodes = ntd.nodes();

    let mut introduced: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for (i, node) in nodes.iter().enumerate() {
        let child_bags: Vec<&[VertexId]> = node
            .children
            .iter()
            .map(|&c| nodes[c].bag.as_slice())
            .collect();
        match node.kind {
            NodeKind::Leaf => {
                if !node.children.is_empty() {
                    out.push(NiceViolation::WrongChildCount(i));
                }
                if !node.bag.is_empty() {
                    out.push(NiceViolation::LeafNotEmpty(i));
                }
            }
            NodeKind::IntroduceVertex(v) => {
                if child_bags.len() != 1 {
                    out.push(NiceViolation::WrongChildCount(i));
                    continue;
                }
                let mut expect: Vec<VertexId> = child_bags[0].to_vec();
                if child_bags[0].contains(&v) {
                    out.push(NiceViolation::BagRelation(i, "introduced vertex already in child bag"));
                }
                expect.push(v);
                expect.sort_unstable();
                if node.bag != expect {
                    out.push(NiceViolation::BagRelation(i, "bag is not child bag plus introduced vertex"));
                }
            }
            NodeKind::IntroduceEdge(u, v) => {
                if child_bags.len() != 1 {
                    out.push(NiceViolation::WrongChildCount(i));
                    continue;
                }
                if node.bag != child_bags[0] {
                    out.push(NiceViolation::BagRelation(i, "introduce-edge bag differs from child bag"));
                }
                if !(node.bag.contains(&u) && node.bag.contains(&v)) {
                    out.push(NiceViolation::BagRelation(i, "introduced edge endpoints not in bag"));
                }
                let key = if u < v { (u, v) } else { (v, u) };
                if instance.weight_of(u, v).is_none() {
                    out.push(NiceViolation::IntroducedNonEdge(key.0, key.1));
                }
                *introduced.entry(key).or_insert(0) += 1;
            }
            NodeKind::ForgetVertex(v) => {
                if child_bags.len() != 1 {
                    out.push(NiceViolation::WrongChildCount(i));
                    continue;
                }
                let mut expect: Vec<VertexId> = child_bags[0].to_vec();
                let before = expect.len();
                expect.retain(|&w| w != v);
                if expect.len() + 1 != before || node.bag != expect {
                    out.push(NiceViolation::BagRelation(i, "bag is not child bag minus forgotten vertex"));
                }
            }
            NodeKind::Join => {
                if child_bags.len() != 2 {
                    out.push(NiceViolation::WrongChildCount(i));
                    continue;
                }
                if node.bag != child_bags[0] || node.bag != child_bags[1] {
                    out.push(NiceViolation::BagRelation(i, "join bags differ"));
                }
            }
        }
    }

    for ((u, v), count) in &introduced {
        if *count > 1 {
            out.push(NiceViolation::EdgeIntroducedAgain(*u, *v));
        }
    }
    for e in instance.edges() {
        if !introduced.contains_key(&(e.u, e.v)) {
            out.push(NiceViolation::EdgeNeverIntroduced(e.u, e.v));
        }
    }

    let root = &nodes[ntd.root()];
    match root.kind {
        NodeKind::ForgetVertex(v) if instance.is_terminal(v) && root.bag.is_empty() => {}
        _ => out.push(NiceViolation::RootNotTerminalForget),
    }

    // vertex coverage and occurrence connectivity over the rooted tree
    let mut parent = vec![usize::MAX; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        for &c in &node.children {
            parent[c] = i;
        }
    }
    let mut covered = vec![false; instance.vertex_count()];
    for node in nodes {
        for v in &node.bag {
            covered[v.index0()] = true;
        }
    }
    for v in instance.vertices() {
        if !covered[v.index0()] {
            out.push(NiceViolation::UncoveredVertex(v));
            continue;
        }
        // the occurrence subtree is connected iff exactly one occurrence has
        // a non-occurrence parent (or is the root)
        let mut tops = 0;
        for (i, node) in nodes.iter().enumerate() {
            if !node.bag.contains(&v) {
                continue;
            }
            let p = parent[i];
            if p == usize::MAX || !nodes[p].bag.contains(&v) {
                tops += 1;
            }
        }
        if tops != 1 {
            out.push(NiceViolation::DisconnectedOccurrences(v));
        }
    }

    if let Some(expected) = expected_width {
        let actual = ntd.width();
        if actual != expected {
            out.push(NiceViolation::WidthChanged { expected, actual });
        }
    }

    out
}
