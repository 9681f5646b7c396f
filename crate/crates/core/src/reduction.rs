//! Homotopy-type rewriting of independence complexes.
//!
//! `reduce` repeatedly applies neighbourhood folds, the degree-2 star-cluster
//! move, inverse edge subdivision and column stripping until every subproblem is
//! a recognised base case. Each run produces a [`DerivationTrace`] that
//! [`replay`] can re-execute against the original graph.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_forms::{predict_cycle, predict_path};
use crate::complex::DEFAULT_FACE_BUDGET;
use crate::graph::{Graph, GraphError, Label};
use crate::homology::{independence_homology, BettiTable, HomologyError};
use crate::homotopy::{HtError, HtType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Components,
    FoldOpen,
    FoldClosed,
    StarClusterDeg2,
    EdgeSubdivisionInverse,
    ColumnStrip,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Components => "components",
            Rule::FoldOpen => "fold_open",
            Rule::FoldClosed => "fold_closed",
            Rule::StarClusterDeg2 => "star_cluster_deg2",
            Rule::EdgeSubdivisionInverse => "edge_subdivision_inverse",
            Rule::ColumnStrip => "column_strip",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Named priority list of rules tried after the base-case and component checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOrder {
    name: String,
    rules: Vec<Rule>,
}

const PRESETS: &[(&str, &[Rule])] = &[
    (
        "default",
        &[
            Rule::FoldOpen,
            Rule::FoldClosed,
            Rule::StarClusterDeg2,
            Rule::EdgeSubdivisionInverse,
            Rule::ColumnStrip,
        ],
    ),
    (
        "column-first",
        &[
            Rule::ColumnStrip,
            Rule::FoldOpen,
            Rule::FoldClosed,
            Rule::StarClusterDeg2,
            Rule::EdgeSubdivisionInverse,
        ],
    ),
    ("folds-only", &[Rule::FoldOpen, Rule::FoldClosed]),
    (
        "subdivision-first",
        &[
            Rule::EdgeSubdivisionInverse,
            Rule::StarClusterDeg2,
            Rule::FoldOpen,
            Rule::FoldClosed,
            Rule::ColumnStrip,
        ],
    ),
];

impl RuleOrder {
    pub fn named(name: &str) -> Option<Self> {
        PRESETS.iter().find(|(n, _)| *n == name).map(|(n, r)| RuleOrder {
            name: n.to_string(),
            rules: r.to_vec(),
        })
    }

    pub fn custom(name: &str, rules: Vec<Rule>) -> Self {
        RuleOrder { name: name.to_string(), rules }
    }

    pub fn preset_names() -> Vec<&'static str> {
        PRESETS.iter().map(|(n, _)| *n).collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
}

impl Default for RuleOrder {
    fn default() -> Self {
        Self::named("default").expect("default preset exists")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn precondition<T>(msg: impl Into<String>) -> Result<T, RuleError> {
    Err(RuleError::Precondition(msg.into()))
}

fn check(g: &Graph, v: usize) -> Result<(), RuleError> {
    if v >= g.vertex_count() {
        return Err(GraphError::VertexOutOfRange { vertex: v, n: g.vertex_count() }.into());
    }
    Ok(())
}

// ----- rules -----

/// `N(u) ⊆ N(v)` gives `I(G) ≃ I(G - v)`.
pub fn rule_fold_open(g: &Graph, u: usize, v: usize) -> Result<Graph, RuleError> {
    check(g, u)?;
    check(g, v)?;
    if u == v {
        return precondition("u and v must differ");
    }
    if !g.neighbors(u).is_subset(g.neighbors(v)) {
        return precondition(format!("N({}) is not contained in N({})", g.label(u), g.label(v)));
    }
    Ok(g.remove_vertex(v))
}

/// `N[u] ⊆ N[v]` gives `I(G) ≃ I(G - v) ∨ Σ I(G - N[v])`.
pub fn rule_fold_closed(g: &Graph, u: usize, v: usize) -> Result<(Graph, Graph), RuleError> {
    check(g, u)?;
    check(g, v)?;
    if u == v {
        return precondition("u and v must differ");
    }
    if !g.closed_neighbors(u).is_subset(&g.closed_neighbors(v)) {
        return precondition(format!("N[{}] is not contained in N[{}]", g.label(u), g.label(v)));
    }
    Ok((g.remove_vertex(v), g.remove_closed_neighborhood(v)?))
}

/// Degree-2 star cluster: `I(G) ≃ Σ I(H - v1 - v2)`.
pub fn rule_star_cluster_deg2(g: &Graph, v: usize) -> Result<Graph, RuleError> {
    check(g, v)?;
    let nb: Vec<usize> = g.neighbors(v).ones().collect();
    let [v1, v2] = nb[..] else {
        return precondition(format!("{} has degree {}, not 2", g.label(v), nb.len()));
    };
    if g.has_edge(v1, v2) {
        return precondition("the two neighbours are adjacent");
    }
    let n1 = g.neighbors(v1);
    let n2 = g.neighbors(v2);
    let only1: Vec<usize> = n1.difference(n2).collect();
    let only2: Vec<usize> = n2.difference(n1).collect();
    let mut extra = Vec::new();
    for &a in &only1 {
        for &b in &only2 {
            if a != b && !g.has_edge(a, b) {
                extra.push((a, b));
            }
        }
    }
    let h = g.with_extra_edges(extra)?;
    let mut keep = FixedBitSet::with_capacity(g.vertex_count());
    keep.insert_range(..);
    for w in n1.intersection(n2) {
        keep.set(w, false);
    }
    keep.set(v1, false);
    keep.set(v2, false);
    Ok(h.induced_by_set(&keep))
}

/// Inverse edge subdivision along `u - a - b - c - v`: `I(G) ≃ Σ I(G - {a,b,c} + uv)`.
pub fn rule_edge_subdivision_inverse(g: &Graph, witness: &[usize]) -> Result<Graph, RuleError> {
    let &[u, a, b, c, v] = witness else {
        return precondition("witness must list five vertices u, a, b, c, v");
    };
    for &x in witness {
        check(g, x)?;
    }
    let mut sorted = witness.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != 5 {
        return precondition("witness vertices must be distinct");
    }
    for &(x, y) in &[(u, a), (a, b), (b, c), (c, v)] {
        if !g.has_edge(x, y) {
            return precondition(format!("{}{} is not an edge", g.label(x), g.label(y)));
        }
    }
    for &x in &[a, b, c] {
        if g.degree(x) != 2 {
            return precondition(format!("interior vertex {} has degree {}", g.label(x), g.degree(x)));
        }
    }
    if g.has_edge(u, v) {
        return precondition("endpoints are already adjacent");
    }
    let h = g.with_extra_edges([(u, v)])?;
    Ok(h.remove_vertices(&[a, b, c])?)
}

fn dominated_partner(g: &Graph, c: usize) -> Option<usize> {
    let nc = g.closed_neighbors(c);
    g.neighbors(c)
        .ones()
        .find(|&u| g.closed_neighbors(u).is_subset(&nc))
}

/// Strips `column` vertex by vertex, branching into `G - c` and `G - N[c]`.
///
/// Returns the leaves with their suspension shifts; `I(G)` is the wedge of
/// `Σ^shift I(leaf)`. Column vertices deleted by an earlier branch are skipped.
pub fn rule_column_strip(g: &Graph, column: &[usize]) -> Result<Vec<(Graph, u32)>, RuleError> {
    if column.is_empty() {
        return precondition("empty column");
    }
    for &c in column {
        check(g, c)?;
    }
    let labels: Vec<Label> = column.iter().map(|&c| g.label(c).clone()).collect();
    let mut frontier = vec![(g.clone(), 0u32)];
    for label in &labels {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (h, t) in frontier {
            let Some(c) = h.find_label(label) else {
                next.push((h, t));
                continue;
            };
            if dominated_partner(&h, c).is_none() {
                return precondition(format!("no vertex is dominated by {label}"));
            }
            next.push((h.remove_vertex(c), t));
            next.push((h.remove_closed_neighborhood(c)?, t + 1));
        }
        frontier = next;
    }
    Ok(frontier)
}

// ----- base cases -----

fn connected_base(g: &Graph) -> Option<(HtType, String)> {
    let n = g.vertex_count();
    let e = g.edge_count();
    if n == 1 {
        return Some((HtType::contractible(), "K_1".into()));
    }
    if e == n * (n - 1) / 2 {
        return Some((HtType::wedge_of(&[(0, n as u64 - 1)]).ok()?, format!("K_{n}")));
    }
    if (0..n).all(|v| g.degree(v) <= 2) {
        if e + 1 == n {
            return Some((predict_path(n).ok()?, format!("P_{n}")));
        }
        if e == n {
            return Some((predict_cycle(n).ok()?, format!("C_{n}")));
        }
    }
    None
}

/// Recognises disjoint unions of paths, cycles and complete graphs, and the
/// empty graph. A contractible component makes the whole complex contractible.
pub fn base_case(g: &Graph) -> Option<(HtType, String)> {
    if g.is_empty() {
        return Some((HtType::empty(), "empty".into()));
    }
    let comps = g.connected_components();
    let mut ht = HtType::empty();
    let mut names = Vec::with_capacity(comps.len());
    let mut unknown = false;
    for comp in &comps {
        let sub = g.induced_subgraph(comp).expect("component is valid");
        match connected_base(&sub) {
            Some((t, name)) => {
                if t.is_contractible() {
                    return Some((HtType::contractible(), format!("{name} component")));
                }
                ht = ht.join(&t).ok()?;
                names.push(name);
            }
            None => unknown = true,
        }
    }
    if unknown {
        None
    } else {
        Some((ht, names.join(" + ")))
    }
}

// ----- witness search -----

fn find_fold_open(g: &Graph) -> Option<Vec<usize>> {
    let n = g.vertex_count();
    for u in 0..n {
        for v in 0..n {
            if u != v && g.neighbors(u).is_subset(g.neighbors(v)) {
                return Some(vec![u, v]);
            }
        }
    }
    None
}

fn fold_closed_witnesses(g: &Graph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for u in 0..g.vertex_count() {
        let nu = g.closed_neighbors(u);
        for v in g.neighbors(u).ones() {
            if nu.is_subset(&g.closed_neighbors(v)) {
                out.push(vec![u, v]);
                if out.len() == MAX_ALTERNATIVES {
                    return out;
                }
            }
        }
    }
    out
}

fn find_star_cluster(g: &Graph) -> Option<Vec<usize>> {
    (0..g.vertex_count())
        .find(|&v| {
            let nb: Vec<usize> = g.neighbors(v).ones().collect();
            nb.len() == 2 && !g.has_edge(nb[0], nb[1])
        })
        .map(|v| vec![v])
}

fn find_subdivision(g: &Graph) -> Option<Vec<usize>> {
    let deg2 = |x: usize| g.degree(x) == 2;
    let other = |x: usize, not: usize| g.neighbors(x).ones().find(|&y| y != not);
    for b in 0..g.vertex_count() {
        if !deg2(b) {
            continue;
        }
        let nb: Vec<usize> = g.neighbors(b).ones().collect();
        let (a, c) = (nb[0], nb[1]);
        if !deg2(a) || !deg2(c) {
            continue;
        }
        let (Some(u), Some(v)) = (other(a, b), other(c, b)) else {
            continue;
        };
        if u == v || u == c || v == a || g.has_edge(u, v) {
            continue;
        }
        return Some(vec![u, a, b, c, v]);
    }
    None
}

/// Vertices labelled `(j, 2)`, ordered by `j`.
fn find_column(g: &Graph) -> Option<Vec<usize>> {
    let mut col: Vec<(i64, usize)> = (0..g.vertex_count())
        .filter_map(|v| match g.label(v).as_int_pair() {
            Some((j, 2)) => Some((j, v)),
            _ => None,
        })
        .collect();
    if col.is_empty() {
        return None;
    }
    col.sort_unstable();
    let col: Vec<usize> = col.into_iter().map(|(_, v)| v).collect();
    rule_column_strip(g, &col).ok().map(|_| col)
}

/// Closed folds whose wedge cannot be formed are retried with other witnesses.
const MAX_ALTERNATIVES: usize = 32;

/// Witnesses in scan order; only closed folds list more than one.
fn find_witnesses(rule: Rule, g: &Graph) -> Vec<Vec<usize>> {
    let one = |w: Option<Vec<usize>>| w.into_iter().collect();
    match rule {
        Rule::Components => one((!g.is_connected()).then(Vec::new)),
        Rule::FoldOpen => one(find_fold_open(g)),
        Rule::FoldClosed => fold_closed_witnesses(g),
        Rule::StarClusterDeg2 => one(find_star_cluster(g)),
        Rule::EdgeSubdivisionInverse => one(find_subdivision(g)),
        Rule::ColumnStrip => one(find_column(g)),
    }
}

/// Subproblems with suspension shifts produced by one rule application.
pub fn apply_rule(rule: Rule, g: &Graph, witness: &[usize]) -> Result<Vec<(Graph, u32)>, RuleError> {
    let pair = |w: &[usize]| match *w {
        [u, v] => Ok((u, v)),
        _ => precondition("witness must be a vertex pair"),
    };
    match rule {
        Rule::Components => Ok(g
            .connected_components()
            .iter()
            .map(|c| (g.induced_subgraph(c).expect("component is valid"), 0))
            .collect()),
        Rule::FoldOpen => {
            let (u, v) = pair(witness)?;
            Ok(vec![(rule_fold_open(g, u, v)?, 0)])
        }
        Rule::FoldClosed => {
            let (u, v) = pair(witness)?;
            let (a, b) = rule_fold_closed(g, u, v)?;
            Ok(vec![(a, 0), (b, 1)])
        }
        Rule::StarClusterDeg2 => match *witness {
            [v] => Ok(vec![(rule_star_cluster_deg2(g, v)?, 1)]),
            _ => precondition("witness must be one vertex"),
        },
        Rule::EdgeSubdivisionInverse => Ok(vec![(rule_edge_subdivision_inverse(g, witness)?, 1)]),
        Rule::ColumnStrip => rule_column_strip(g, witness),
    }
}

fn combine(rule: Rule, parts: &[(HtType, u32)]) -> Result<HtType, HtError> {
    if rule == Rule::Components {
        let mut acc = HtType::empty();
        for (t, _) in parts {
            acc = acc.join(t)?;
        }
        return Ok(acc);
    }
    let suspended: Vec<HtType> = parts.iter().map(|(t, s)| t.suspend(*s)).collect();
    if suspended.len() == 1 {
        return Ok(suspended.into_iter().next().expect("one part"));
    }
    // The rules do not say which component a summand is glued to, so a
    // disconnected summand is only allowed when every gluing gives the same space.
    let positive = |t: &HtType| t.to_betti().coeffs().keys().any(|&d| d >= 1);
    let disconnected: Vec<&HtType> = suspended.iter().filter(|t| t.path_components() > 1).collect();
    let nontrivial = suspended.iter().filter(|t| !t.is_contractible()).count();
    let positives = suspended.iter().filter(|t| positive(t)).count();
    let ambiguous = !disconnected.is_empty()
        && nontrivial > 1
        && (disconnected.iter().any(|t| positive(t)) || positives > 1);
    if ambiguous {
        return Err(HtError::DisconnectedWedge);
    }
    HtType::wedge_all(&suspended)
}

// ----- trace -----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub id: usize,
    pub rule: Rule,
    pub witness: Vec<usize>,
    pub witness_labels: Vec<String>,
    pub children: Vec<usize>,
    pub shifts: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeafKind {
    Base { name: String },
    Oracle { ranks: Vec<(i32, u64)> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLeaf {
    #[serde(flatten)]
    pub kind: LeafKind,
    pub ht: HtType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub root: usize,
    pub steps: Vec<TraceStep>,
    pub leaves: BTreeMap<usize, TraceLeaf>,
    /// Vertex count of every subproblem.
    pub sizes: BTreeMap<usize, usize>,
}

impl DerivationTrace {
    pub fn step(&self, id: usize) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn oracle_leaves(&self) -> usize {
        self.leaves
            .values()
            .filter(|l| matches!(l.kind, LeafKind::Oracle { .. }))
            .count()
    }

    /// One JSON object per step, then one per leaf.
    pub fn json_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.steps {
            let mut v = serde_json::to_value(s).expect("step serializes");
            v["vertices"] = self.sizes[&s.id].into();
            out.push(v.to_string());
        }
        for (id, leaf) in &self.leaves {
            let mut v = serde_json::to_value(leaf).expect("leaf serializes");
            v["id"] = (*id).into();
            v["vertices"] = self.sizes[id].into();
            out.push(v.to_string());
        }
        out
    }

    /// Every child strictly smaller than its parent and ids form a DAG rooted at `root`.
    pub fn is_well_founded(&self) -> bool {
        self.steps.iter().all(|s| {
            s.children
                .iter()
                .all(|c| self.sizes.get(c).is_some_and(|&k| k < self.sizes[&s.id]))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// Every leaf is a base case; the type is a homotopy equivalence.
    Derived,
    /// Some leaf is an oracle Betti table read as a wedge of spheres.
    BettiCertified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub ht: HtType,
    pub trace: DerivationTrace,
    pub certification: Certification,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("no rule applies to a subproblem on {vertices} vertices")]
    Stuck { vertices: usize, graph: String },
    #[error("oracle homology {0} has torsion: not a wedge of spheres")]
    NotWedge(String),
    #[error("face budget of {0} exceeded")]
    Budget(usize),
    #[error(transparent)]
    Homology(HomologyError),
}

#[derive(Clone, Copy, Debug)]
pub struct ReduceOptions {
    pub oracle_fallback: bool,
    pub budget: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { oracle_fallback: false, budget: DEFAULT_FACE_BUDGET }
    }
}

enum Node {
    Step(TraceStep),
    Leaf(TraceLeaf),
}

struct Engine<'a> {
    order: &'a RuleOrder,
    opts: ReduceOptions,
    nodes: BTreeMap<usize, (usize, Node)>,
    memo: HashMap<String, (usize, HtType)>,
    next: usize,
}

fn shape_key(g: &Graph) -> String {
    let mut s = format!("{}|", g.vertex_count());
    for (u, v) in g.edges() {
        s.push_str(&format!("{u}-{v},"));
    }
    s
}

fn oracle_table(g: &Graph, budget: usize) -> Result<BettiTable, ReduceError> {
    independence_homology(g, budget).map_err(|e| {
        if e.is_budget() {
            ReduceError::Budget(budget)
        } else {
            ReduceError::Homology(e)
        }
    })
}

fn oracle_leaf(g: &Graph, budget: usize) -> Result<TraceLeaf, ReduceError> {
    let table = oracle_table(g, budget)?;
    let wedge = |t: &BettiTable| HtType::from_betti_table(t).map_err(|_| ReduceError::NotWedge(t.to_string()));
    // each path component of I(g) comes from a component of the complement
    let comps = g.complement().connected_components();
    let ht = if comps.len() > 1 {
        let mut acc: Option<HtType> = None;
        for c in &comps {
            let piece = wedge(&oracle_table(&g.induced_subgraph(c).expect("component vertices are valid"), budget)?)?;
            acc = Some(acc.map_or(piece.clone(), |a| a.disjoint(&piece)));
        }
        acc.expect("at least two components")
    } else {
        wedge(&table)?
    };
    Ok(TraceLeaf {
        kind: LeafKind::Oracle { ranks: table.ranks().into_iter().collect() },
        ht,
    })
}

impl Engine<'_> {
    fn solve(&mut self, g: &Graph) -> Result<(usize, HtType), ReduceError> {
        let key = shape_key(g);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let id = self.next;
        self.next += 1;
        let (node, ht) = self.expand(id, g)?;
        self.nodes.insert(id, (g.vertex_count(), node));
        self.memo.insert(key, (id, ht.clone()));
        Ok((id, ht))
    }

    fn expand(&mut self, id: usize, g: &Graph) -> Result<(Node, HtType), ReduceError> {
        if let Some((ht, name)) = base_case(g) {
            let leaf = TraceLeaf { kind: LeafKind::Base { name }, ht: ht.clone() };
            return Ok((Node::Leaf(leaf), ht));
        }
        let rules = std::iter::once(Rule::Components).chain(self.order.rules.iter().copied());
        for rule in rules {
            for witness in find_witnesses(rule, g) {
                let subs = apply_rule(rule, g, &witness).expect("witness search checks preconditions");
                let mut children = Vec::with_capacity(subs.len());
                let mut parts = Vec::with_capacity(subs.len());
                for (h, shift) in &subs {
                    let (cid, t) = self.solve(h)?;
                    children.push(cid);
                    parts.push((t, *shift));
                }
                if let Ok(ht) = combine(rule, &parts) {
                    let step = TraceStep {
                        id,
                        rule,
                        witness_labels: witness.iter().map(|&v| g.label(v).to_string()).collect(),
                        witness,
                        children,
                        shifts: subs.iter().map(|(_, s)| *s).collect(),
                    };
                    return Ok((Node::Step(step), ht));
                }
            }
        }
        if !self.opts.oracle_fallback {
            return Err(ReduceError::Stuck { vertices: g.vertex_count(), graph: g.to_json() });
        }
        let leaf = oracle_leaf(g, self.opts.budget)?;
        let ht = leaf.ht.clone();
        Ok((Node::Leaf(leaf), ht))
    }

    /// Keeps the nodes reachable from `root`, renumbered in pre-order.
    fn into_trace(mut self, root: usize) -> DerivationTrace {
        let mut renum: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if renum.contains_key(&id) {
                continue;
            }
            renum.insert(id, order.len());
            order.push(id);
            if let Some((_, Node::Step(s))) = self.nodes.get(&id) {
                stack.extend(s.children.iter().rev());
            }
        }
        let mut trace = DerivationTrace {
            root: 0,
            steps: Vec::new(),
            leaves: BTreeMap::new(),
            sizes: BTreeMap::new(),
        };
        for old in order {
            let (size, node) = self.nodes.remove(&old).expect("reachable node exists");
            let new = renum[&old];
            trace.sizes.insert(new, size);
            match node {
                Node::Step(mut s) => {
                    s.id = new;
                    s.children = s.children.iter().map(|c| renum[c]).collect();
                    trace.steps.push(s);
                }
                Node::Leaf(l) => {
                    trace.leaves.insert(new, l);
                }
            }
        }
        trace.steps.sort_by_key(|s| s.id);
        trace
    }
}

/// Reduces `I(g)` with the default face budget.
pub fn reduce(g: &Graph, order: &RuleOrder, oracle_fallback: bool) -> Result<Reduction, ReduceError> {
    reduce_with(g, order, ReduceOptions { oracle_fallback, ..ReduceOptions::default() })
}

pub fn reduce_with(g: &Graph, order: &RuleOrder, opts: ReduceOptions) -> Result<Reduction, ReduceError> {
    let mut engine = Engine {
        order,
        opts,
        nodes: BTreeMap::new(),
        memo: HashMap::new(),
        next: 0,
    };
    let (root, ht) = engine.solve(g)?;
    let trace = engine.into_trace(root);
    let certification = if trace.oracle_leaves() == 0 {
        Certification::Derived
    } else {
        Certification::BettiCertified
    };
    Ok(Reduction { ht, trace, certification })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("subproblem {0} is missing from the trace")]
    MissingNode(usize),
    #[error("subproblem {id} has {found} vertices, trace records {expected}")]
    SizeMismatch { id: usize, expected: usize, found: usize },
    #[error("rule {rule} no longer applies at subproblem {id}: {source}")]
    Rule { id: usize, rule: Rule, source: RuleError },
    #[error("leaf {0} disagrees with the recorded type")]
    LeafMismatch(usize),
    #[error("types do not combine at subproblem {0}")]
    Combine(usize),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

/// Re-applies every recorded step to `g` and recomputes the leaves.
pub fn replay(g: &Graph, trace: &DerivationTrace, budget: usize) -> Result<HtType, ReplayError> {
    let steps: HashMap<usize, &TraceStep> = trace.steps.iter().map(|s| (s.id, s)).collect();
    let mut done: HashMap<usize, HtType> = HashMap::new();
    replay_node(g, trace.root, trace, &steps, &mut done, budget)
}

fn replay_node(
    g: &Graph,
    id: usize,
    trace: &DerivationTrace,
    steps: &HashMap<usize, &TraceStep>,
    done: &mut HashMap<usize, HtType>,
    budget: usize,
) -> Result<HtType, ReplayError> {
    if let Some(t) = done.get(&id) {
        return Ok(t.clone());
    }
    let expected = *trace.sizes.get(&id).ok_or(ReplayError::MissingNode(id))?;
    if expected != g.vertex_count() {
        return Err(ReplayError::SizeMismatch { id, expected, found: g.vertex_count() });
    }
    let ht = if let Some(leaf) = trace.leaves.get(&id) {
        let got = match &leaf.kind {
            LeafKind::Base { .. } => base_case(g).map(|(t, _)| t),
            LeafKind::Oracle { .. } => Some(oracle_leaf(g, budget)?.ht),
        };
        if got.as_ref() != Some(&leaf.ht) {
            return Err(ReplayError::LeafMismatch(id));
        }
        leaf.ht.clone()
    } else {
        let step = steps.get(&id).ok_or(ReplayError::MissingNode(id))?;
        let subs = apply_rule(step.rule, g, &step.witness)
            .map_err(|source| ReplayError::Rule { id, rule: step.rule, source })?;
        if subs.len() != step.children.len() {
            return Err(ReplayError::Combine(id));
        }
        let mut parts = Vec::with_capacity(subs.len());
        for ((h, shift), &cid) in subs.iter().zip(&step.children) {
            parts.push((replay_node(h, cid, trace, steps, done, budget)?, *shift));
        }
        combine(step.rule, &parts).map_err(|_| ReplayError::Combine(id))?
    };
    done.insert(id, ht.clone());
    Ok(ht)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{product, ProductKind};

    fn p(n: usize) -> Graph {
        Graph::path(n).unwrap()
    }

    fn c(n: usize) -> Graph {
        Graph::cycle(n).unwrap()
    }

    fn oracle(g: &Graph) -> BettiTable {
        independence_homology(g, DEFAULT_FACE_BUDGET).unwrap()
    }

    #[test]
    fn base_cases() {
        assert!(base_case(&p(4)).unwrap().0.is_contractible());
        assert_eq!(base_case(&c(9)).unwrap().0, HtType::wedge_of(&[(2, 2)]).unwrap());
        let two = p(2).disjoint_union(&p(5));
        assert_eq!(base_case(&two).unwrap().0, HtType::sphere(2));
        assert!(base_case(&Graph::empty(0)).unwrap().0.is_empty_space());
        assert!(base_case(&Graph::star(3)).is_none());
    }

    #[test]
    fn fold_rules() {
        assert_eq!(rule_fold_open(&p(3), 0, 2).unwrap().vertex_count(), 2);
        assert!(rule_fold_open(&p(3), 0, 1).is_err());
        let isolated = Graph::from_edges(3, [(1, 2)]).unwrap();
        assert_eq!(rule_fold_open(&isolated, 0, 1).unwrap().edge_count(), 0);
        let (a, b) = rule_fold_closed(&Graph::complete(2), 0, 1).unwrap();
        assert_eq!((a.vertex_count(), b.vertex_count()), (1, 0));
    }

    #[test]
    fn star_cluster_examples() {
        assert!(rule_star_cluster_deg2(&p(3), 1).unwrap().is_empty());
        let h = rule_star_cluster_deg2(&c(5), 0).unwrap();
        assert_eq!((h.vertex_count(), h.edge_count()), (2, 1));
        let h = rule_star_cluster_deg2(&c(6), 0).unwrap();
        assert_eq!(oracle(&h), BettiTable::from_ranks([(0, 2)]));
        assert!(rule_star_cluster_deg2(&Graph::complete(3), 0).is_err());
    }

    #[test]
    fn subdivision_examples() {
        let h = rule_edge_subdivision_inverse(&c(7), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!((h.vertex_count(), h.edge_count()), (4, 4));
        assert_eq!(oracle(&h).suspend(1), oracle(&c(7)));
        let h = rule_edge_subdivision_inverse(&c(8), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(h.vertex_count(), 5);
        assert_eq!(oracle(&c(8)), BettiTable::from_ranks([(2, 1)]));
        assert_eq!(oracle(&h).suspend(1), oracle(&c(8)));
        // an endpoint may serve as u, but never as an interior vertex
        let h = rule_edge_subdivision_inverse(&p(6), &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(oracle(&h).suspend(1), oracle(&p(6)));
        assert!(rule_edge_subdivision_inverse(&p(6), &[2, 1, 0, 3, 4]).is_err());
        let spider = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)]).unwrap();
        assert!(rule_edge_subdivision_inverse(&spider, &[0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn column_strip_matches_fold_on_single_vertex() {
        let g = product(ProductKind::Strong, &p(2), &p(2)).unwrap();
        let v = g.find_label(&Label::pair(Label::Int(1), Label::Int(2))).unwrap();
        let leaves = rule_column_strip(&g, &[v]).unwrap();
        let u = g.find_label(&Label::pair(Label::Int(1), Label::Int(1))).unwrap();
        let (a, b) = rule_fold_closed(&g, u, v).unwrap();
        assert_eq!(leaves, vec![(a, 0), (b, 1)]);
    }

    #[test]
    fn column_strip_on_kings_graphs() {
        for (n, expect) in [(3usize, vec![(0, 1), (1, 2)]), (4, vec![(1, 3), (2, 2)])] {
            let g = product(ProductKind::Strong, &p(n), &p(3)).unwrap();
            let col = find_column(&g).unwrap();
            assert_eq!(col.len(), n);
            let leaves = rule_column_strip(&g, &col).unwrap();
            let mut acc = BettiTable::new();
            for (h, t) in &leaves {
                assert!(h.labels().iter().all(|l| l.as_int_pair().map(|(_, y)| y) != Some(2)));
                let bt = oracle(h).suspend(*t);
                for (d, grp) in bt.iter() {
                    let r = acc.rank(d) + grp.rank;
                    acc.set(d, crate::homology::HomologyGroup { rank: r, torsion: vec![] });
                }
            }
            assert_eq!(acc.ranks(), BettiTable::from_ranks(expect).ranks());
        }
    }

    #[test]
    fn reduce_examples() {
        let order = RuleOrder::default();
        assert!(reduce(&p(7), &order, false).unwrap().ht.is_contractible());
        let r = reduce(&product(ProductKind::Strong, &p(3), &p(3)).unwrap(), &order, false).unwrap();
        assert_eq!(r.ht, HtType::wedge_of(&[(1, 2), (0, 1)]).unwrap());
        assert_eq!(r.certification, Certification::Derived);
        let r = reduce(&Graph::q_graph(2), &order, false).unwrap();
        assert_eq!(r.ht, HtType::wedge_of(&[(1, 4)]).unwrap());
    }

    #[test]
    fn disconnected_summands_are_not_wedged() {
        // I(C_4[K_2]) is two disjoint circles; a fold leads to (S^1 ⊔ pt) ∨ S^1
        let g = product(ProductKind::Lexicographic, &c(4), &p(2)).unwrap();
        let order = RuleOrder::default();
        let k = crate::complex::independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        let parts = crate::homology::component_homology(&k).unwrap();
        match reduce(&g, &order, false) {
            Ok(r) => assert!(crate::homotopy::component_match(&r.ht, &parts), "{}", r.ht),
            Err(e) => assert!(matches!(e, ReduceError::Stuck { .. })),
        }
        let circle = HtType::sphere(1);
        let bad = HtType::wedge_of(&[(1, 1), (0, 1)]).unwrap();
        assert!(combine(Rule::FoldClosed, &[(bad, 0), (circle.clone(), 0)]).is_err());
        let point_like = HtType::wedge_of(&[(0, 2)]).unwrap();
        assert!(combine(Rule::FoldClosed, &[(point_like.clone(), 0), (circle.clone(), 0)]).is_ok());
        let two = [(point_like, 0), (circle.clone(), 0), (circle, 0)];
        assert!(combine(Rule::ColumnStrip, &two).is_err());
    }

    #[test]
    fn oracle_leaves_keep_components_apart() {
        let g = product(ProductKind::Lexicographic, &c(4), &p(2)).unwrap();
        let r = reduce(&g, &RuleOrder::default(), true).unwrap();
        assert_eq!(r.ht, HtType::sphere(1).disjoint(&HtType::sphere(1)));
        assert_eq!(replay(&g, &r.trace, DEFAULT_FACE_BUDGET).unwrap(), r.ht);
    }

    #[test]
    fn every_preset_agrees_and_replays() {
        let g = product(ProductKind::Strong, &p(4), &p(3)).unwrap();
        for name in RuleOrder::preset_names() {
            let order = RuleOrder::named(name).unwrap();
            let r = reduce(&g, &order, true).unwrap();
            assert_eq!(r.ht, HtType::wedge_of(&[(2, 2), (1, 3)]).unwrap(), "{name}");
            assert!(r.trace.is_well_founded());
            assert_eq!(replay(&g, &r.trace, DEFAULT_FACE_BUDGET).unwrap(), r.ht);
        }
    }

    #[test]
    fn fallback_and_stuck() {
        // no fold applies to the 3-cube
        let cube = product(
            ProductKind::Cartesian,
            &product(ProductKind::Cartesian, &p(2), &p(2)).unwrap(),
            &p(2),
        )
        .unwrap();
        let order = RuleOrder::named("folds-only").unwrap();
        match reduce(&cube, &order, false) {
            Err(ReduceError::Stuck { vertices, .. }) => assert_eq!(vertices, 8),
            other => panic!("expected stuck, got {other:?}"),
        }
        let r = reduce(&cube, &order, true).unwrap();
        assert_eq!(r.certification, Certification::BettiCertified);
        assert!(crate::homotopy::betti_match(&r.ht, &oracle(&cube)));
    }

    #[test]
    fn trace_json_lines() {
        // C_8 with a pendant vertex
        let g = Graph::from_edges(9, c(8).edges().into_iter().chain([(0, 8)])).unwrap();
        let r = reduce(&g, &RuleOrder::named("subdivision-first").unwrap(), false).unwrap();
        assert!(crate::homotopy::betti_match(&r.ht, &oracle(&g)));
        let lines = r.trace.json_lines();
        assert!(lines[0].contains("\"rule\":\"edge_subdivision_inverse\""));
        assert!(lines.last().unwrap().contains("\"kind\":\"base\""));
        let back: DerivationTrace = serde_json::from_str(&serde_json::to_string(&r.trace).unwrap()).unwrap();
        assert_eq!(back, r.trace);
    }
}
