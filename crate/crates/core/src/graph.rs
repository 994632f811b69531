//! Weighted interaction graphs: edge-list parsing, weight normalization and
//! adjacency queries.
//!
//! The text format is one edge per line, `i j w`, with 0-based vertex
//! indices and a non-negative decimal weight. An optional header line
//! `n <count>` fixes the vertex count so that isolated vertices survive;
//! without it the count is one more than the largest index seen. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    IndexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("graph has no edge with positive weight")]
    EmptyInstance,
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl Edge {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn other(&self, v: usize) -> Option<usize> {
        if v == self.i {
            Some(self.j)
        } else if v == self.j {
            Some(self.i)
        } else {
            None
        }
    }
}

/// Undirected graph with canonical edges `i < j`, sorted, no duplicates and
/// strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    /// Per-vertex incident edge indices, ascending by the other endpoint.
    incidence: Vec<Vec<usize>>,
}

impl WeightedGraph {
    /// Builds a graph from raw `(i, j, w)` triples, applying the same
    /// validation as the text parser. Zero-weight edges are dropped.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, GraphError> {
        let mut list = Vec::new();
        for (k, (i, j, w)) in edges.into_iter().enumerate() {
            push_edge(&mut list, n, k + 1, i, j, w)?;
        }
        Self::from_checked(n, list)
    }

    fn from_checked(n: usize, mut edges: Vec<(Edge, usize)>) -> Result<Self, GraphError> {
        edges.sort_by_key(|(e, _)| (e.i, e.j));
        for pair in edges.windows(2) {
            let (a, b) = (&pair[0].0, &pair[1].0);
            if (a.i, a.j) == (b.i, b.j) {
                return Err(GraphError::DuplicateEdge { line: pair[0].1.max(pair[1].1), i: a.i, j: a.j });
            }
        }
        let edges: Vec<Edge> = edges.into_iter().map(|(e, _)| e).filter(|e| e.w > 0.0).collect();
        let mut incidence = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            incidence[e.i].push(k);
            incidence[e.j].push(k);
        }
        for (v, list) in incidence.iter_mut().enumerate() {
            list.sort_by_key(|&k| edges[k].other(v));
        }
        Ok(Self { n, edges, incidence })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Divides every weight by the total so that the weights sum to one.
    pub fn normalized(&self) -> Result<Self, GraphError> {
        let total = self.total_weight();
        if self.edges.is_empty() || total.is_nan() || total <= 0.0 {
            return Err(GraphError::EmptyInstance);
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            e.w /= total;
        }
        Ok(g)
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> Result<Vec<usize>, GraphError> {
        Ok(self.incident(v)?.iter().map(|&k| self.edges[k].other(v).expect("incident edge")).collect())
    }

    /// Indices (into [`Self::edges`]) of the edges touching `v`.
    pub fn incident(&self, v: usize) -> Result<&[usize], GraphError> {
        self.incidence.get(v).map(Vec::as_slice).ok_or(GraphError::VertexOutOfRange { vertex: v, n: self.n })
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.edges.binary_search_by_key(&(i, j), |e| (e.i, e.j)).ok()
    }

    /// Two-colouring of the vertices, if one exists. Side 0 holds the
    /// smallest vertex of every connected component.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        for start in 0..self.n {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(false);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let sv = side[v].expect("coloured");
                for &k in &self.incidence[v] {
                    let u = self.edges[k].other(v).expect("incident edge");
                    match side[u] {
                        None => {
                            side[u] = Some(!sv);
                            stack.push(u);
                        }
                        Some(su) if su == sv => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(|s| s.unwrap_or(false)).collect())
    }

    /// Edge-list text that [`parse_graph`] reads back to an identical graph.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.i, e.j, e.w).expect("write to string");
        }
        out
    }
}

fn push_edge(
    list: &mut Vec<(Edge, usize)>,
    n: usize,
    line: usize,
    i: usize,
    j: usize,
    w: f64,
) -> Result<(), GraphError> {
    if !w.is_finite() {
        return Err(GraphError::Syntax { line, msg: format!("weight {w} is not finite") });
    }
    if w < 0.0 {
        return Err(GraphError::NegativeWeight { line, weight: w });
    }
    if i == j {
        return Err(GraphError::SelfLoop { line, vertex: i });
    }
    for vertex in [i, j] {
        if vertex >= n {
            return Err(GraphError::IndexOutOfRange { line, vertex, n });
        }
    }
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    list.push((Edge { i, j, w }, line));
    Ok(())
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Syntax { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| GraphError::Syntax { line, msg: format!("cannot parse {what} from {tok:?}") })
}

/// Parses the edge-list format described in the module docs.
pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        if trimmed.starts_with('n') {
            toks.next();
            if declared.is_some() || !raw.is_empty() {
                return Err(GraphError::Syntax {
                    line: line_no,
                    msg: "header must appear once, before any edge".into(),
                });
            }
            let count: usize = field(toks.next(), line_no, "vertex count")?;
            if count == 0 {
                return Err(GraphError::Syntax { line: line_no, msg: "vertex count must be positive".into() });
            }
            declared = Some(count);
        } else {
            let i: usize = field(toks.next(), line_no, "first vertex")?;
            let j: usize = field(toks.next(), line_no, "second vertex")?;
            let w: f64 = field(toks.next(), line_no, "weight")?;
            raw.push((line_no, i, j, w));
        }
        if let Some(extra) = toks.next() {
            return Err(GraphError::Syntax { line: line_no, msg: format!("unexpected trailing token {extra:?}") });
        }
    }
    let n = declared.unwrap_or_else(|| raw.iter().map(|&(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0));
    let mut list = Vec::with_capacity(raw.len());
    for (line, i, j, w) in raw {
        push_edge(&mut list, n, line, i, j, w)?;
    }
    WeightedGraph::from_checked(n, list)
}

/// Small named instances used by tests and the acceptance corpus.
pub mod fixtures {
    use super::WeightedGraph;

    fn equal(n: usize, edges: Vec<(usize, usize)>) -> WeightedGraph {
        let w = 1.0 / edges.len() as f64;
        WeightedGraph::new(n, edges.into_iter().map(|(i, j)| (i, j, w))).expect("valid fixture")
    }

    pub fn single_edge() -> WeightedGraph {
        equal(2, vec![(0, 1)])
    }

    /// `K_{1,m}` centred at vertex 0.
    pub fn star(m: usize) -> WeightedGraph {
        equal(m + 1, (1..=m).map(|k| (0, k)).collect())
    }

    pub fn path(n: usize) -> WeightedGraph {
        equal(n, (0..n - 1).map(|k| (k, k + 1)).collect())
    }

    pub fn cycle(n: usize) -> WeightedGraph {
        equal(n, (0..n).map(|k| (k, (k + 1) % n)).collect())
    }

    pub fn complete(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        equal(n, e)
    }

    /// Vertex-disjoint edges (0,1), (2,3), ...
    pub fn matching(pairs: usize) -> WeightedGraph {
        equal(2 * pairs, (0..pairs).map(|k| (2 * k, 2 * k + 1)).collect())
    }
}
