//! Graph instances: the edge-weighted Steiner tree input model, SteinLib STP
//! parsing and writing, DIMACS-like plain edge lists, and seeded random
//! instance generation.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::num::NonZeroU32;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// 1-based vertex identifier, matching STP file numbering. Internal arrays
/// index from 0 via [`VertexId::index0`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(NonZeroU32);

impl VertexId {
    pub fn new(raw: u32) -> Self {
        VertexId(NonZeroU32::new(raw).expect("vertex ids are 1-based"))
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    pub fn index0(self) -> usize {
        self.0.get() as usize - 1
    }

    pub fn from_index0(i: usize) -> Self {
        VertexId::new(i as u32 + 1)
    }
}

impl std::fmt::Debug for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected edge with a positive weight, stored with `u < v`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u64,
}

/// An edge-weighted Steiner tree instance: a simple undirected graph with
/// positive integer edge weights and a nonempty terminal set.
///
/// Immutable after construction; safe to share across concurrent solver runs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    vertex_count: usize,
    edges: Vec<Edge>,
    terminals: BTreeSet<VertexId>,
}

/// Instance construction failure, independent of any file format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("vertex {0} out of range 1..={1}")]
    VertexOutOfRange(u32, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
    #[error("edge {0}-{1} has weight {2}, weights must be >= 1")]
    InvalidWeight(u32, u32, u64),
    #[error("terminal {0} out of range 1..={1}")]
    TerminalOutOfRange(u32, usize),
    #[error("instance has no terminals")]
    NoTerminals,
    #[error("instance has no vertices")]
    NoVertices,
}

impl Instance {
    pub fn new(
        vertex_count: usize,
        edges: Vec<(u32, u32, u64)>,
        terminals: Vec<u32>,
    ) -> Result<Self, InstanceError> {
        if vertex_count == 0 {
            return Err(InstanceError::NoVertices);
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v, weight) in edges {
            for x in [u, v] {
                if x == 0 || x as usize > vertex_count {
                    return Err(InstanceError::VertexOutOfRange(x, vertex_count));
                }
            }
            if u == v {
                return Err(InstanceError::SelfLoop(u));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(InstanceError::DuplicateEdge(a, b));
            }
            if weight == 0 {
                return Err(InstanceError::InvalidWeight(a, b, weight));
            }
            normalized.push(Edge {
                u: VertexId::new(a),
                v: VertexId::new(b),
                weight,
            });
        }
        normalized.sort_by_key(|e| (e.u, e.v));
        let mut term_set = BTreeSet::new();
        for t in terminals {
            if t == 0 || t as usize > vertex_count {
                return Err(InstanceError::TerminalOutOfRange(t, vertex_count));
            }
            term_set.insert(VertexId::new(t));
        }
        if term_set.is_empty() {
            return Err(InstanceError::NoTerminals);
        }
        Ok(Instance {
            vertex_count,
            edges: normalized,
            terminals: term_set,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (1..=self.vertex_count as u32).map(VertexId::new)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn terminals(&self) -> &BTreeSet<VertexId> {
        &self.terminals
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.terminals.contains(&v)
    }

    pub fn lowest_terminal(&self) -> VertexId {
        *self.terminals.iter().next().expect("terminals are nonempty")
    }

    /// Weight of the edge between `u` and `v`, if present.
    pub fn weight_of(&self, u: VertexId, v: VertexId) -> Option<u64> {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges
            .binary_search_by_key(&(a, b), |e| (e.u, e.v))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    /// Adjacency lists indexed by `VertexId::index0`.
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.u.index0()].push(e.v);
            adj[e.v.index0()].push(e.u);
        }
        adj
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertex_count];
        let mut components = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = vec![VertexId::from_index0(start)];
            let mut head = 0;
            while head < queue.len() {
                let v = queue[head];
                head += 1;
                for &w in &adj[v.index0()] {
                    if !seen[w.index0()] {
                        seen[w.index0()] = true;
                        queue.push(w);
                    }
                }
            }
            queue.sort_unstable();
            components.push(queue);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// The subinstance induced by `vertices`, with ids compacted to
    /// `1..=vertices.len()` in sorted order. Returns the instance and the
    /// original id of each new vertex.
    pub fn induced(&self, vertices: &[VertexId]) -> Result<(Instance, Vec<VertexId>), InstanceError> {
        let mut keep: Vec<VertexId> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let index: HashMap<VertexId, u32> = keep
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i as u32 + 1))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let u = index.get(&e.u)?;
                let v = index.get(&e.v)?;
                Some((*u, *v, e.weight))
            })
            .collect();
        let terminals = self
            .terminals
            .iter()
            .filter_map(|t| index.get(t).copied())
            .collect();
        Ok((Instance::new(keep.len(), edges, terminals)?, keep))
    }
}

/// STP parse failure with the 1-based line it occurred on.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("declared {declared} {what}, found {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("unexpected end of input: {0}")]
    UnexpectedEnd(&'static str),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    err(line, ParseErrorKind::Malformed(msg.into()))
}

/// Parses the STP Format Version 1.0 subset used by SteinLib: an optional
/// header line, comment and unknown sections (skipped), a `Graph` section
/// with `Nodes`/`Edges`/`E` lines, a `Terminals` section, and a terminating
/// `EOF`. Keywords are matched case-insensitively.
pub fn parse_stp(text: &str) -> Result<Instance, ParseError> {
    let mut nodes: Option<usize> = None;
    let mut declared_edges: Option<(usize, usize)> = None; // (count, line)
    let mut declared_terminals: Option<(usize, usize)> = None;
    let mut edges: Vec<(u32, u32, u64)> = Vec::new();
    let mut seen_edges: HashSet<(u32, u32)> = HashSet::new();
    let mut terminals: Vec<u32> = Vec::new();

    #[derive(PartialEq)]
    enum Section {
        None,
        Graph,
        Terminals,
        Skipped,
    }
    let mut section = Section::None;
    let mut seen_any = false;
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap();
        let lower = keyword.to_ascii_lowercase();

        if section == Section::None {
            match lower.as_str() {
                "section" => {
                    let name = words
                        .next()
                        .ok_or_else(|| malformed(lineno, "SECTION without a name"))?
                        .to_ascii_lowercase();
                    section = match name.as_str() {
                        "graph" => Section::Graph,
                        "terminals" => Section::Terminals,
                        _ => Section::Skipped,
                    };
                }
                "eof" => {
                    let n = nodes.ok_or(err(
                        lineno,
                        ParseErrorKind::UnexpectedEnd("no Graph section with Nodes"),
                    ))?;
                    let (m, m_line) = declared_edges.ok_or(err(
                        lineno,
                        ParseErrorKind::UnexpectedEnd("no Edges declaration"),
                    ))?;
                    let (k, k_line) = declared_terminals.ok_or(err(
                        lineno,
                        ParseErrorKind::UnexpectedEnd("no Terminals declaration"),
                    ))?;
                    if edges.len() != m {
                        return Err(err(
                            m_line,
                            ParseErrorKind::CountMismatch {
                                what: "edges",
                                declared: m,
                                found: edges.len(),
                            },
                        ));
                    }
                    if terminals.len() != k {
                        return Err(err(
                            k_line,
                            ParseErrorKind::CountMismatch {
                                what: "terminals",
                                declared: k,
                                found: terminals.len(),
                            },
                        ));
                    }
                    // all line-attributable problems were rejected inline
                    return Instance::new(n, edges, terminals)
                        .map_err(|ie| err(k_line, ie.into()));
                }
                _ if !seen_any && line.to_ascii_lowercase().contains("stp") => {
                    // header / magic line, e.g. "33D32945 STP File, STP Format Version 1.0"
                }
                _ => return Err(malformed(lineno, format!("unexpected `{keyword}`"))),
            }
            seen_any = true;
            continue;
        }

        seen_any = true;
        if lower == "end" {
            section = Section::None;
            continue;
        }
        match section {
            Section::Skipped => {}
            Section::Graph => match lower.as_str() {
                "nodes" => {
                    nodes = Some(parse_number(lineno, words.next(), "node count")?);
                }
                "edges" => {
                    let m = parse_number(lineno, words.next(), "edge count")?;
                    declared_edges = Some((m, lineno));
                }
                "e" => {
                    let n = nodes.ok_or_else(|| malformed(lineno, "E line before Nodes"))?;
                    let u = parse_number(lineno, words.next(), "edge endpoint")? as u32;
                    let v = parse_number(lineno, words.next(), "edge endpoint")? as u32;
                    let w = parse_number(lineno, words.next(), "edge weight")? as u64;
                    if words.next().is_some() {
                        return Err(malformed(lineno, "trailing tokens on E line"));
                    }
                    for x in [u, v] {
                        if x == 0 || x as usize > n {
                            return Err(err(
                                lineno,
                                InstanceError::VertexOutOfRange(x, n).into(),
                            ));
                        }
                    }
                    if u == v {
                        return Err(err(lineno, InstanceError::SelfLoop(u).into()));
                    }
                    let key = if u < v { (u, v) } else { (v, u) };
                    if !seen_edges.insert(key) {
                        return Err(err(
                            lineno,
                            InstanceError::DuplicateEdge(key.0, key.1).into(),
                        ));
                    }
                    if w == 0 {
                        return Err(err(
                            lineno,
                            InstanceError::InvalidWeight(key.0, key.1, w).into(),
                        ));
                    }
                    edges.push((u, v, w));
                }
                _ => return Err(malformed(lineno, format!("unexpected `{keyword}` in Graph"))),
            },
            Section::Terminals => match lower.as_str() {
                "terminals" => {
                    let k = parse_number(lineno, words.next(), "terminal count")?;
                    declared_terminals = Some((k, lineno));
                }
                "t" => {
                    let t = parse_number(lineno, words.next(), "terminal id")? as u32;
                    if words.next().is_some() {
                        return Err(malformed(lineno, "trailing tokens on T line"));
                    }
                    let n = nodes.ok_or_else(|| malformed(lineno, "T line before Nodes"))?;
                    if t == 0 || t as usize > n {
                        return Err(err(
                            lineno,
                            InstanceError::TerminalOutOfRange(t, n).into(),
                        ));
                    }
                    terminals.push(t);
                }
                _ => {
                    return Err(malformed(
                        lineno,
                        format!("unexpected `{keyword}` in Terminals"),
                    ))
                }
            },
            Section::None => unreachable!(),
        }
    }
    Err(err(
        last_line,
        ParseErrorKind::UnexpectedEnd("missing EOF marker"),
    ))
}

fn parse_number(line: usize, word: Option<&str>, what: &str) -> Result<usize, ParseError> {
    let w = word.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    w.parse()
        .map_err(|_| malformed(line, format!("invalid {what} `{w}`")))
}

/// Writes an instance in STP Format Version 1.0. Output is canonical:
/// edges sorted by endpoints, terminals ascending, so
/// `parse ∘ write ∘ parse = parse`.
pub fn write_stp(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("33D32945 STP File, STP Format Version 1.0\n\n");
    out.push_str("SECTION Graph\n");
    let _ = writeln!(out, "Nodes {}", instance.vertex_count());
    let _ = writeln!(out, "Edges {}", instance.edge_count());
    for e in instance.edges() {
        let _ = writeln!(out, "E {} {} {}", e.u, e.v, e.weight);
    }
    out.push_str("END\n\nSECTION Terminals\n");
    let _ = writeln!(out, "Terminals {}", instance.terminal_count());
    for t in instance.terminals() {
        let _ = writeln!(out, "T {t}");
    }
    out.push_str("END\n\nEOF\n");
    out
}

/// An unweighted simple graph, the ingestion target for random instance
/// generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainGraph {
    pub vertex_count: usize,
    pub edges: Vec<(u32, u32)>,
}

/// Parses a DIMACS-like plain edge list: `c` comment lines, one
/// `p <type> <nodes> <edges>` line, and `e <u> <v>` lines.
pub fn parse_plain_graph(text: &str) -> Result<PlainGraph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next().unwrap().to_ascii_lowercase().as_str() {
            "c" => {}
            "p" => {
                let _format = words
                    .next()
                    .ok_or_else(|| malformed(lineno, "p line missing format"))?;
                let n = parse_number(lineno, words.next(), "node count")?;
                let m = parse_number(lineno, words.next(), "edge count")?;
                if header.replace((n, m)).is_some() {
                    return Err(malformed(lineno, "duplicate p line"));
                }
            }
            "e" => {
                let u = parse_number(lineno, words.next(), "edge endpoint")? as u32;
                let v = parse_number(lineno, words.next(), "edge endpoint")? as u32;
                edges.push((u, v));
            }
            other => return Err(malformed(lineno, format!("unexpected `{other}`"))),
        }
    }
    let (n, m) = header.ok_or(err(
        last_line,
        ParseErrorKind::UnexpectedEnd("missing p line"),
    ))?;
    if edges.len() != m {
        return Err(err(
            last_line,
            ParseErrorKind::CountMismatch {
                what: "edges",
                declared: m,
                found: edges.len(),
            },
        ));
    }
    Ok(PlainGraph {
        vertex_count: n,
        edges,
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("plain graph is empty")]
    EmptyGraph,
    #[error("terminal fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("weight range {0}..={1} is empty or includes 0")]
    BadWeightRange(u64, u64),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Turns a plain graph into a Steiner tree instance: weights drawn uniformly
/// from `weight_range` and `ceil(terminal_fraction * |V|)` distinct terminals
/// chosen uniformly.
///
/// Deterministic for a fixed seed: randomness comes from a ChaCha8 stream
/// seeded with `seed`, edges are weighted in sorted order, and the terminal
/// sample is drawn after the weights. This layout is stable across releases.
pub fn generate_instance(
    graph: &PlainGraph,
    terminal_fraction: f64,
    weight_range: (u64, u64),
    seed: u64,
) -> Result<Instance, GenerateError> {
    if graph.vertex_count == 0 {
        return Err(GenerateError::EmptyGraph);
    }
    if !(terminal_fraction > 0.0 && terminal_fraction <= 1.0) {
        return Err(GenerateError::BadFraction(terminal_fraction));
    }
    let (lo, hi) = weight_range;
    if lo == 0 || lo > hi {
        return Err(GenerateError::BadWeightRange(lo, hi));
    }
    let mut normalized: Vec<(u32, u32)> = graph
        .edges
        .iter()
        .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
        .collect();
    normalized.sort_unstable();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weighted: Vec<(u32, u32, u64)> = normalized
        .into_iter()
        .map(|(u, v)| (u, v, rng.random_range(lo..=hi)))
        .collect();

    let n = graph.vertex_count;
    let k = (terminal_fraction * n as f64).ceil() as usize;
    let k = k.clamp(1, n);
    let terminals: Vec<u32> = sample(&mut rng, n, k)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();

    Ok(Instance::new(n, weighted, terminals)?)
}
