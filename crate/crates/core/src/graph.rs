//! Simple undirected graphs, the named families used throughout the crate and
//! the four standard graph products.
//!
//! Vertices are dense indices `0..n`. Every vertex also carries a [`Label`];
//! constructors label path/cycle vertices `1..=n` and product vertices with the
//! coordinate pair of their factors, so a vertex keeps its identity after
//! deletions re-index the graph.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Vertex label: an integer or a (possibly nested) tuple of labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Tuple(Vec<Label>),
}

impl Label {
    pub fn pair(a: Label, b: Label) -> Self {
        Label::Tuple(vec![a, b])
    }

    /// Integer coordinates of a pair label such as those produced by products.
    pub fn as_int_pair(&self) -> Option<(i64, i64)> {
        match self {
            Label::Tuple(items) if items.len() == 2 => match (&items[0], &items[1]) {
                (Label::Int(a), Label::Int(b)) => Some((*a, *b)),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(v) => write!(f, "{v}"),
            Label::Tuple(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a path needs at least one vertex")]
    EmptyPath,
    #[error("a cycle needs at least three vertices, got {0}")]
    CycleTooShort(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph products need non-empty factors")]
    EmptyProductFactor,
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("duplicate vertex label {0}")]
    DuplicateLabel(String),
    #[error("malformed graph JSON: {0}")]
    Json(String),
}

/// The four products on `V(G) x V(H)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Categorical,
    Cartesian,
    Strong,
    Lexicographic,
}

impl std::str::FromStr for ProductKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "categorical" | "cat" | "tensor" => Ok(ProductKind::Categorical),
            "cartesian" | "cart" | "box" => Ok(ProductKind::Cartesian),
            "strong" | "kings" => Ok(ProductKind::Strong),
            "lexicographic" | "lex" => Ok(ProductKind::Lexicographic),
            other => Err(format!("unknown product kind `{other}`")),
        }
    }
}

/// A simple undirected graph with labelled vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<FixedBitSet>,
    labels: Vec<Label>,
}

fn default_labels(n: usize) -> Vec<Label> {
    (0..n).map(|i| Label::Int(i as i64 + 1)).collect()
}

impl Graph {
    /// Edgeless graph on `n` vertices (`n = 0` is the empty graph).
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![FixedBitSet::with_capacity(n); n],
            labels: default_labels(n),
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Replaces the labels; they must be total and pairwise distinct.
    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self, GraphError> {
        if labels.len() != self.vertex_count() {
            return Err(GraphError::LabelCount {
                expected: self.vertex_count(),
                got: labels.len(),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l) {
                return Err(GraphError::DuplicateLabel(l.to_string()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.vertex_count();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.vertex_count(),
            })
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones(..)).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, a) in self.adj.iter().enumerate() {
            out.extend(a.ones().filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && v < self.vertex_count() && self.adj[u].contains(v)
    }

    /// Open neighbourhood as a bitset. Panics on an out-of-range vertex.
    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    /// Closed neighbourhood `N[v]` as a bitset.
    pub fn closed_neighbors(&self, v: usize) -> FixedBitSet {
        let mut s = self.adj[v].clone();
        s.insert(v);
        s
    }

    /// Open or closed neighbourhood as a sorted vertex list.
    pub fn neighborhood(&self, v: usize, closed: bool) -> Result<Vec<usize>, GraphError> {
        self.check_vertex(v)?;
        Ok(if closed {
            self.closed_neighbors(v).ones().collect()
        } else {
            self.adj[v].ones().collect()
        })
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    pub fn label(&self, v: usize) -> &Label {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn find_label(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    // ----- named families -----

    /// `P_n`: vertices labelled `1..=n`, edges `{i, i+1}`.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyPath);
        }
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    /// `C_n` for `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::CycleTooShort(n));
        }
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// `K_n`.
    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.adj[u].insert(v);
                g.adj[v].insert(u);
            }
        }
        g
    }

    /// `K_{1,n}` with the centre at index 0.
    pub fn star(n: usize) -> Self {
        Graph::from_edges(n + 1, (1..=n).map(|i| (0, i))).expect("star edges are in range")
    }

    /// `Q_n`: `P_n ⊠ P_4` plus an apex adjacent to `(1,1)` and `(1,2)`; `Q_0 = K_1`.
    /// The apex is labelled `0`, which no coordinate pair can collide with.
    pub fn q_graph(n: usize) -> Self {
        if n == 0 {
            return Graph::empty(1)
                .with_labels(vec![Label::Int(0)])
                .expect("one label");
        }
        let base = product(
            ProductKind::Strong,
            &Graph::path(n).expect("n >= 1"),
            &Graph::path(4).expect("4 >= 1"),
        )
        .expect("non-empty factors");
        let apex = base.vertex_count();
        let mut edges = base.edges();
        edges.push((0, apex));
        edges.push((1, apex));
        let mut labels = base.labels.clone();
        labels.push(Label::Int(0));
        Graph::from_edges(apex + 1, edges)
            .and_then(|g| g.with_labels(labels))
            .expect("apex construction is well formed")
    }

    // ----- operations -----

    pub fn complement(&self) -> Self {
        let n = self.vertex_count();
        let mut adj = Vec::with_capacity(n);
        for v in 0..n {
            let mut a = self.adj[v].clone();
            a.toggle_range(..);
            a.set(v, false);
            adj.push(a);
        }
        Graph {
            adj,
            labels: self.labels.clone(),
        }
    }

    /// `G + H`. Labels become `(1, l)` for vertices of `self` and `(2, l)` for `other`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let n1 = self.vertex_count();
        let n = n1 + other.vertex_count();
        let mut edges = self.edges();
        edges.extend(other.edges().into_iter().map(|(u, v)| (u + n1, v + n1)));
        let labels = self
            .labels
            .iter()
            .map(|l| Label::pair(Label::Int(1), l.clone()))
            .chain(
                other
                    .labels
                    .iter()
                    .map(|l| Label::pair(Label::Int(2), l.clone())),
            )
            .collect();
        Graph::from_edges(n, edges)
            .and_then(|g| g.with_labels(labels))
            .expect("union of valid graphs is valid")
    }

    /// Subgraph induced by `subset`, re-indexed in increasing vertex order.
    pub fn induced_subgraph(&self, subset: &[usize]) -> Result<Self, GraphError> {
        let n = self.vertex_count();
        let mut keep = FixedBitSet::with_capacity(n);
        for &v in subset {
            self.check_vertex(v)?;
            keep.insert(v);
        }
        Ok(self.induced_by_set(&keep))
    }

    /// Induced subgraph on a vertex bitset (indices beyond `n` are ignored).
    pub fn induced_by_set(&self, keep: &FixedBitSet) -> Self {
        let n = self.vertex_count();
        let verts: Vec<usize> = keep.ones().filter(|&v| v < n).collect();
        let mut index = vec![usize::MAX; n];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let m = verts.len();
        let mut adj = vec![FixedBitSet::with_capacity(m); m];
        for (i, &v) in verts.iter().enumerate() {
            for w in self.adj[v].ones() {
                if index[w] != usize::MAX {
                    adj[i].insert(index[w]);
                }
            }
        }
        Graph {
            adj,
            labels: verts.iter().map(|&v| self.labels[v].clone()).collect(),
        }
    }

    /// `G - S`.
    pub fn remove_vertices(&self, remove: &[usize]) -> Result<Self, GraphError> {
        let n = self.vertex_count();
        let mut keep = FixedBitSet::with_capacity(n);
        keep.insert_range(..);
        for &v in remove {
            self.check_vertex(v)?;
            keep.set(v, false);
        }
        Ok(self.induced_by_set(&keep))
    }

    /// `G - v` without bounds checking beyond the usual panic.
    pub fn remove_vertex(&self, v: usize) -> Self {
        let mut keep = FixedBitSet::with_capacity(self.vertex_count());
        keep.insert_range(..);
        keep.set(v, false);
        self.induced_by_set(&keep)
    }

    /// `G - N[v]`.
    pub fn remove_closed_neighborhood(&self, v: usize) -> Result<Self, GraphError> {
        self.check_vertex(v)?;
        let mut keep = self.closed_neighbors(v);
        keep.toggle_range(..);
        Ok(self.induced_by_set(&keep))
    }

    /// Same vertex set, extra edges added.
    pub fn with_extra_edges<I>(&self, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = self.clone();
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut comps = Vec::new();
        for s in 0..n {
            if seen.contains(s) {
                continue;
            }
            let mut comp = vec![s];
            seen.insert(s);
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for w in self.adj[v].ones() {
                    if !seen.contains(w) {
                        seen.insert(w);
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Is `set` independent?
    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }

    /// Vertex order from iterated degree refinement; ties broken by label then index.
    fn refined_order(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut color: Vec<u64> = (0..n).map(|v| self.degree(v) as u64).collect();
        for _ in 0..n {
            let mut sigs: Vec<(u64, Vec<u64>)> = (0..n)
                .map(|v| {
                    let mut nb: Vec<u64> = self.adj[v].ones().map(|w| color[w]).collect();
                    nb.sort_unstable();
                    (color[v], nb)
                })
                .collect();
            let mut distinct = sigs.clone();
            distinct.sort();
            distinct.dedup();
            let next: Vec<u64> = sigs
                .iter_mut()
                .map(|s| distinct.binary_search(s).expect("present") as u64)
                .collect();
            let before = {
                let mut c = color.clone();
                c.sort_unstable();
                c.dedup();
                c.len()
            };
            let after = distinct.len();
            color = next;
            if after == before {
                break;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            color[a]
                .cmp(&color[b])
                .then_with(|| self.labels[a].cmp(&self.labels[b]))
                .then(a.cmp(&b))
        });
        order
    }

    /// Hex SHA-256 of the degree-refined, sorted adjacency serialization.
    ///
    /// Deterministic for a labelled graph; not an isomorphism invariant.
    pub fn canonical_hash(&self) -> String {
        let order = self.refined_order();
        let mut pos = vec![0usize; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (pos[u], pos[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        let mut h = Sha256::new();
        h.update(format!("n={};", self.vertex_count()).as_bytes());
        for (u, v) in edges {
            h.update(format!("{u}-{v},").as_bytes());
        }
        h.update(b";");
        for &v in &order {
            h.update(format!("{},", self.labels[v]).as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Exact structural key (edges + labels), used for memoization.
    pub fn structure_key(&self) -> String {
        let mut s = String::with_capacity(16 * self.vertex_count());
        for l in &self.labels {
            s.push_str(&l.to_string());
            s.push(',');
        }
        s.push('|');
        for (u, v) in self.edges() {
            s.push_str(&format!("{u}-{v},"));
        }
        s
    }

    // ----- JSON -----

    /// `{"n": .., "edges": [[u,v],..], "labels": {..}}`; labels omitted when they
    /// are the defaults `1..=n`.
    pub fn to_json(&self) -> String {
        let labels = if self.labels == default_labels(self.vertex_count()) {
            None
        } else {
            Some(
                self.labels
                    .iter()
                    .cloned()
                    .enumerate()
                    .collect::<BTreeMap<usize, Label>>(),
            )
        };
        let doc = GraphJson {
            n: self.vertex_count(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            labels,
        };
        serde_json::to_string(&doc).expect("graph JSON serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        let g = Graph::from_edges(doc.n, doc.edges.into_iter().map(|[u, v]| (u, v)))?;
        match doc.labels {
            None => Ok(g),
            Some(map) => {
                let mut labels = Vec::with_capacity(doc.n);
                for v in 0..doc.n {
                    match map.get(&v) {
                        Some(l) => labels.push(l.clone()),
                        None => {
                            return Err(GraphError::LabelCount {
                                expected: doc.n,
                                got: map.len(),
                            })
                        }
                    }
                }
                if map.len() != doc.n {
                    return Err(GraphError::LabelCount {
                        expected: doc.n,
                        got: map.len(),
                    });
                }
                g.with_labels(labels)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<BTreeMap<usize, Label>>,
}

/// Graph product on `V(g) x V(h)`; vertex `(u, v)` has index `u * |V(h)| + v`.
pub fn product(kind: ProductKind, g: &Graph, h: &Graph) -> Result<Graph, GraphError> {
    if g.is_empty() || h.is_empty() {
        return Err(GraphError::EmptyProductFactor);
    }
    let (n1, n2) = (g.vertex_count(), h.vertex_count());
    let id = |u: usize, v: usize| u * n2 + v;
    let mut out = Graph::empty(n1 * n2);
    let mut link = |a: usize, b: usize| {
        out.adj[a].insert(b);
        out.adj[b].insert(a);
    };
    let ge = g.edges();
    let he = h.edges();
    let categorical = matches!(kind, ProductKind::Categorical | ProductKind::Strong);
    let cartesian = matches!(kind, ProductKind::Cartesian | ProductKind::Strong);
    if categorical {
        for &(u1, u2) in &ge {
            for &(v1, v2) in &he {
                link(id(u1, v1), id(u2, v2));
                link(id(u1, v2), id(u2, v1));
            }
        }
    }
    if cartesian {
        for &(u1, u2) in &ge {
            for v in 0..n2 {
                link(id(u1, v), id(u2, v));
            }
        }
        for &(v1, v2) in &he {
            for u in 0..n1 {
                link(id(u, v1), id(u, v2));
            }
        }
    }
    if kind == ProductKind::Lexicographic {
        for &(v1, v2) in &he {
            for u in 0..n1 {
                link(id(u, v1), id(u, v2));
            }
        }
        for &(u1, u2) in &ge {
            for v1 in 0..n2 {
                for v2 in 0..n2 {
                    link(id(u1, v1), id(u2, v2));
                }
            }
        }
    }
    let mut labels = Vec::with_capacity(n1 * n2);
    for u in 0..n1 {
        for v in 0..n2 {
            labels.push(Label::pair(g.labels[u].clone(), h.labels[v].clone()));
        }
    }
    out.labels = labels;
    Ok(out)
}
