//! Explicit simplicial complexes: independence complexes, links, joins and
//! polyhedral joins.
//!
//! A face is a `u128` vertex mask, so complexes live on at most 128 vertices.
//! Faces are grouped by dimension starting at `-1`; within a dimension they are
//! kept in lexicographic order of their sorted vertex tuples.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Graph, Label};

/// Vertex mask of a face.
pub type Face = u128;

/// Hard limit imposed by the mask width.
pub const MAX_VERTICES: usize = 128;

/// Default cap on the number of enumerated faces.
pub const DEFAULT_FACE_BUDGET: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("face budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("{0} vertices exceed the supported maximum of 128")]
    TooManyVertices(usize),
    #[error("{0:?} is not a face of the complex")]
    NotAFace(Vec<usize>),
    #[error("expected {expected} complexes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("complex number {0} of the family is void")]
    VoidMember(usize),
    #[error("face {face:?} is missing its subface {missing:?}")]
    NotDownwardClosed { face: Vec<usize>, missing: Vec<usize> },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
}

/// Lexicographic order of two equal-size faces as sorted vertex tuples.
#[inline]
pub fn lex_cmp(a: Face, b: Face) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let low = (a ^ b).trailing_zeros();
    if a >> low & 1 == 1 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn face_from_vertices(vertices: &[usize]) -> Result<Face, ComplexError> {
    let mut f = 0u128;
    for &v in vertices {
        if v >= MAX_VERTICES {
            return Err(ComplexError::TooManyVertices(v + 1));
        }
        f |= 1u128 << v;
    }
    Ok(f)
}

pub fn face_vertices(face: Face) -> Vec<usize> {
    let mut out = Vec::with_capacity(face.count_ones() as usize);
    let mut f = face;
    while f != 0 {
        out.push(f.trailing_zeros() as usize);
        f &= f - 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    faces_by_dim: Vec<Vec<Face>>,
    provenance: Option<Vec<Label>>,
    /// Adjacency masks when the complex is `I(G)`, so cofaces can be listed directly.
    graph_adj: Option<Vec<Face>>,
}

impl SimplicialComplex {
    /// The void complex: no faces at all.
    pub fn void(vertex_count: usize) -> Self {
        SimplicialComplex {
            vertex_count,
            faces_by_dim: Vec::new(),
            provenance: None,
            graph_adj: None,
        }
    }

    /// The complex `{∅}`.
    pub fn empty_face_only() -> Self {
        SimplicialComplex {
            vertex_count: 0,
            faces_by_dim: vec![vec![0]],
            provenance: None,
            graph_adj: Some(Vec::new()),
        }
    }

    /// Downward closure of the given facets.
    pub fn from_facets(vertex_count: usize, facets: &[Vec<usize>]) -> Result<Self, ComplexError> {
        if vertex_count > MAX_VERTICES {
            return Err(ComplexError::TooManyVertices(vertex_count));
        }
        let mut all = std::collections::HashSet::new();
        for facet in facets {
            for &v in facet {
                if v >= vertex_count {
                    return Err(ComplexError::VertexOutOfRange {
                        vertex: v,
                        n: vertex_count,
                    });
                }
            }
            let f = face_from_vertices(facet)?;
            if all.contains(&f) {
                continue;
            }
            // enumerate all submasks
            let mut sub = f;
            loop {
                all.insert(sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & f;
            }
        }
        Ok(Self::from_face_set(vertex_count, all.into_iter().collect()))
    }

    /// Builds a complex from a face list that is assumed to be downward closed.
    pub fn from_face_set(vertex_count: usize, faces: Vec<Face>) -> Self {
        let top = faces.iter().map(|f| f.count_ones() as usize).max();
        let mut by_dim: Vec<Vec<Face>> = match top {
            None => Vec::new(),
            Some(t) => vec![Vec::new(); t + 1],
        };
        for f in faces {
            by_dim[f.count_ones() as usize].push(f);
        }
        for layer in &mut by_dim {
            layer.sort_unstable_by(|a, b| lex_cmp(*a, *b));
            layer.dedup();
        }
        SimplicialComplex {
            vertex_count,
            faces_by_dim: by_dim,
            provenance: None,
            graph_adj: None,
        }
    }

    pub fn with_provenance(mut self, labels: Vec<Label>) -> Self {
        self.provenance = Some(labels);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn provenance(&self) -> Option<&[Label]> {
        self.provenance.as_deref()
    }

    pub(crate) fn graph_adjacency(&self) -> Option<&[Face]> {
        self.graph_adj.as_deref()
    }

    pub fn is_void(&self) -> bool {
        self.faces_by_dim.is_empty()
    }

    /// Dimension; `None` for the void complex, `-1` for `{∅}`.
    pub fn dim(&self) -> Option<i32> {
        if self.is_void() {
            None
        } else {
            Some(self.faces_by_dim.len() as i32 - 2)
        }
    }

    /// Faces of dimension `d` (empty slice outside the range).
    pub fn faces(&self, d: i32) -> &[Face] {
        if d < -1 {
            return &[];
        }
        self.faces_by_dim
            .get((d + 1) as usize)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn faces_by_dim(&self) -> &[Vec<Face>] {
        &self.faces_by_dim
    }

    /// All faces, by increasing dimension.
    pub fn iter_faces(&self) -> impl Iterator<Item = Face> + '_ {
        self.faces_by_dim.iter().flatten().copied()
    }

    pub fn face_count(&self) -> usize {
        self.faces_by_dim.iter().map(Vec::len).sum()
    }

    /// Face numbers `(f_{-1}, f_0, f_1, ...)`.
    pub fn f_vector(&self) -> Vec<usize> {
        self.faces_by_dim.iter().map(Vec::len).collect()
    }

    /// Index of `face` within its dimension.
    pub fn index_of(&self, face: Face) -> Option<usize> {
        let layer = self.faces_by_dim.get(face.count_ones() as usize)?;
        layer.binary_search_by(|probe| lex_cmp(*probe, face)).ok()
    }

    pub fn contains(&self, face: Face) -> bool {
        self.index_of(face).is_some()
    }

    /// Checks that every codimension-one subface of every face is present.
    pub fn audit_downward_closed(&self) -> Result<(), ComplexError> {
        for f in self.iter_faces() {
            let mut rest = f;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                if !self.contains(f ^ bit) {
                    return Err(ComplexError::NotDownwardClosed {
                        face: face_vertices(f),
                        missing: face_vertices(f ^ bit),
                    });
                }
            }
        }
        Ok(())
    }

    /// Keeps only faces on the vertices actually used, re-indexed in order.
    fn compact(self) -> Self {
        let used: Face = self.faces(0).iter().fold(0, |acc, f| acc | f);
        let verts = face_vertices(used);
        if verts.len() == self.vertex_count {
            return self;
        }
        let remap = |f: Face| -> Face {
            let mut out = 0u128;
            for (i, &v) in verts.iter().enumerate() {
                if f >> v & 1 == 1 {
                    out |= 1 << i;
                }
            }
            out
        };
        let faces = self.iter_faces().map(remap).collect();
        let mut out = Self::from_face_set(verts.len(), faces);
        if let Some(p) = &self.provenance {
            out.provenance = Some(verts.iter().map(|&v| p[v].clone()).collect());
        }
        if let Some(adj) = &self.graph_adj {
            out.graph_adj = Some(verts.iter().map(|&v| remap(adj[v])).collect());
        }
        out
    }

    /// `lk(σ) = {τ : τ ∩ σ = ∅, τ ∪ σ ∈ K}`, re-indexed over its own vertices.
    pub fn link(&self, sigma: &[usize]) -> Result<Self, ComplexError> {
        let s = face_from_vertices(sigma)?;
        if !self.contains(s) {
            return Err(ComplexError::NotAFace(face_vertices(s)));
        }
        let faces: Vec<Face> = self
            .faces_by_dim
            .iter()
            .skip(s.count_ones() as usize)
            .flatten()
            .filter(|&&f| f & s == s)
            .map(|&f| f ^ s)
            .collect();
        let mut lk = Self::from_face_set(self.vertex_count, faces);
        lk.provenance = self.provenance.clone();
        if let Some(adj) = &self.graph_adj {
            lk.graph_adj = Some(adj.clone());
        }
        Ok(lk.compact())
    }

    /// `A * B`: faces `α ∪ β` over the disjoint union of vertex sets.
    ///
    /// The join with the void complex is void; `{∅}` is the identity.
    pub fn join(&self, other: &Self) -> Result<Self, ComplexError> {
        let n = self.vertex_count + other.vertex_count;
        if n > MAX_VERTICES {
            return Err(ComplexError::TooManyVertices(n));
        }
        if self.is_void() || other.is_void() {
            return Ok(Self::void(n));
        }
        let shift = self.vertex_count;
        let mut faces = Vec::with_capacity(self.face_count() * other.face_count());
        for a in self.iter_faces() {
            for b in other.iter_faces() {
                faces.push(a | (b << shift));
            }
        }
        let mut out = Self::from_face_set(n, faces);
        if let (Some(x), Some(y)) = (&self.graph_adj, &other.graph_adj) {
            let mut adj = x.clone();
            adj.extend(y.iter().map(|m| m << shift));
            out.graph_adj = Some(adj);
        }
        Ok(out)
    }

    /// Path components as subcomplexes on the same vertex set, ordered by
    /// their smallest vertex. `{∅}` and the void complex have none.
    pub fn path_components(&self) -> Vec<SimplicialComplex> {
        let n = self.vertex_count;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &e in self.faces(1) {
            let v = face_vertices(e);
            let (a, b) = (find(&mut parent, v[0]), find(&mut parent, v[1]));
            parent[a.max(b)] = a.min(b);
        }
        let mut masks: BTreeMap<usize, Face> = BTreeMap::new();
        for &f in self.faces(0) {
            let v = f.trailing_zeros() as usize;
            *masks.entry(find(&mut parent, v)).or_insert(0) |= f;
        }
        masks
            .values()
            .map(|&m| {
                let faces = self.iter_faces().filter(|&f| f & !m == 0).collect();
                Self::from_face_set(n, faces)
            })
            .collect()
    }

    /// Two isolated points.
    pub fn sphere0() -> Self {
        Self::from_facets(2, &[vec![0], vec![1]]).expect("two points")
    }

    /// The boundary of the `(d+1)`-simplex, a `d`-sphere on `d + 2` vertices.
    pub fn simplex_boundary(d: usize) -> Result<Self, ComplexError> {
        let n = d + 2;
        let facets: Vec<Vec<usize>> = (0..n)
            .map(|skip| (0..n).filter(|&v| v != skip).collect())
            .collect();
        Self::from_facets(n, &facets)
    }

    /// `ΣK = K * S^0`.
    pub fn suspension(&self) -> Result<Self, ComplexError> {
        self.join(&Self::sphere0())
    }

    /// `(L)^{*K}`: unions `⋃_{i∈σ} τ_i` with `σ ∈ K` and non-empty `τ_i ∈ L_i`.
    pub fn polyhedral_join(&self, family: &[SimplicialComplex]) -> Result<Self, ComplexError> {
        if family.len() != self.vertex_count {
            return Err(ComplexError::LengthMismatch {
                expected: self.vertex_count,
                got: family.len(),
            });
        }
        if let Some(i) = family.iter().position(|l| l.is_void()) {
            return Err(ComplexError::VoidMember(i));
        }
        let mut offsets = Vec::with_capacity(family.len());
        let mut total = 0usize;
        for l in family {
            offsets.push(total);
            total += l.vertex_count;
        }
        if total > MAX_VERTICES {
            return Err(ComplexError::TooManyVertices(total));
        }
        let nonempty: Vec<Vec<Face>> = family
            .iter()
            .zip(&offsets)
            .map(|(l, &off)| {
                l.faces_by_dim
                    .iter()
                    .skip(1)
                    .flatten()
                    .map(|&f| f << off)
                    .collect()
            })
            .collect();
        let mut faces = Vec::new();
        for sigma in self.iter_faces() {
            let support = face_vertices(sigma);
            let mut partial = vec![0u128];
            for &i in &support {
                let mut next = Vec::with_capacity(partial.len() * nonempty[i].len());
                for &p in &partial {
                    for &t in &nonempty[i] {
                        next.push(p | t);
                    }
                }
                partial = next;
            }
            faces.extend(partial);
        }
        Ok(Self::from_face_set(total, faces))
    }

    /// Vertices of a face, mapped through the provenance labels when present.
    pub fn face_labels(&self, face: Face) -> Vec<String> {
        face_vertices(face)
            .into_iter()
            .map(|v| match &self.provenance {
                Some(p) => p[v].to_string(),
                None => v.to_string(),
            })
            .collect()
    }
}

/// `I(G)` by depth-first extension over larger vertices, pruned on adjacency.
pub fn independence_complex(
    g: &Graph,
    max_dim: Option<usize>,
    budget: usize,
) -> Result<SimplicialComplex, ComplexError> {
    let n = g.vertex_count();
    if n > MAX_VERTICES {
        return Err(ComplexError::TooManyVertices(n));
    }
    let adj: Vec<Face> = (0..n)
        .map(|v| g.neighbors(v).ones().fold(0u128, |m, w| m | 1 << w))
        .collect();
    let max_size = max_dim.map(|d| d + 1).unwrap_or(n);
    let mut by_dim: Vec<Vec<Face>> = vec![vec![0]];
    let mut count = 1usize;
    let all: Face = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };

    // explicit stack of (face, candidates)
    let mut stack: Vec<(Face, Face)> = Vec::with_capacity(n + 1);
    stack.push((0, all));
    while let Some((face, cand)) = stack.last_mut() {
        if *cand == 0 || face.count_ones() as usize >= max_size {
            stack.pop();
            continue;
        }
        let v = cand.trailing_zeros() as usize;
        *cand &= *cand - 1;
        let new_face = *face | 1 << v;
        let above = if v == 127 { 0 } else { u128::MAX << (v + 1) };
        let new_cand = *cand & !adj[v] & above;
        let k = new_face.count_ones() as usize;
        if by_dim.len() <= k {
            by_dim.push(Vec::new());
        }
        by_dim[k].push(new_face);
        count += 1;
        if count > budget {
            return Err(ComplexError::BudgetExceeded { budget });
        }
        stack.push((new_face, new_cand));
    }
    Ok(SimplicialComplex {
        vertex_count: n,
        faces_by_dim: by_dim,
        provenance: Some(g.labels().to_vec()),
        // a capped complex is not I(G), so cofaces cannot be read off the graph
        graph_adj: if max_dim.is_none() { Some(adj) } else { None },
    })
}

/// Face count of `I(G)` without storing the faces.
pub fn count_independent_sets(g: &Graph) -> u64 {
    let n = g.vertex_count();
    assert!(n <= MAX_VERTICES, "at most 128 vertices");
    let adj: Vec<Face> = (0..n)
        .map(|v| g.neighbors(v).ones().fold(0u128, |m, w| m | 1 << w))
        .collect();
    fn go(cand: Face, adj: &[Face]) -> u64 {
        let mut total = 1;
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            total += go(c & !adj[v], adj);
        }
        total
    }
    let all: Face = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    go(all, &adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_components_of_two_squares() {
        let g = Graph::from_edges(8, [(0, 2), (0, 3), (1, 2), (1, 3), (4, 6), (4, 7), (5, 6), (5, 7)]).unwrap();
        let k = independence_complex(&g.complement(), None, DEFAULT_FACE_BUDGET).unwrap();
        let comps = k.path_components();
        assert_eq!(comps.len(), 2);
        let total: usize = comps.iter().map(|c| c.faces(0).len()).sum();
        assert_eq!(total, 8);
        assert!(SimplicialComplex::empty_face_only().path_components().is_empty());
        let two = SimplicialComplex::from_facets(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let parts = two.path_components();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[1].faces(1).len(), 1);
        assert!(parts[1].contains(0));
    }
    use crate::graph::{product, ProductKind};

    fn faces_as_lists(k: &SimplicialComplex, d: i32) -> Vec<Vec<usize>> {
        k.faces(d).iter().map(|&f| face_vertices(f)).collect()
    }

    #[test]
    fn lex_order_matches_tuple_order() {
        let a = face_from_vertices(&[0, 3]).unwrap();
        let b = face_from_vertices(&[1, 2]).unwrap();
        assert_eq!(lex_cmp(a, b), Ordering::Less);
        let c = face_from_vertices(&[0, 2]).unwrap();
        assert_eq!(lex_cmp(c, a), Ordering::Less);
    }

    #[test]
    fn independence_complex_of_small_graphs() {
        let k4 = independence_complex(&Graph::complete(4), None, DEFAULT_FACE_BUDGET).unwrap();
        assert_eq!(k4.f_vector(), vec![1, 4]);
        let p5 = independence_complex(&Graph::path(5).unwrap(), None, DEFAULT_FACE_BUDGET).unwrap();
        assert_eq!(p5.f_vector(), vec![1, 5, 6, 1]);
        assert_eq!(faces_as_lists(&p5, 2), vec![vec![0, 2, 4]]);
        let strong = product(
            ProductKind::Strong,
            &Graph::path(2).unwrap(),
            &Graph::path(2).unwrap(),
        )
        .unwrap();
        let c = independence_complex(&strong, None, DEFAULT_FACE_BUDGET).unwrap();
        assert_eq!(c.f_vector(), vec![1, 4]);
        assert_eq!(
            independence_complex(&Graph::empty(0), None, 10).unwrap().f_vector(),
            vec![1]
        );
    }

    #[test]
    fn faces_sorted_and_budget_enforced() {
        let c = independence_complex(&Graph::cycle(9).unwrap(), None, DEFAULT_FACE_BUDGET).unwrap();
        for layer in c.faces_by_dim() {
            for w in layer.windows(2) {
                assert_eq!(lex_cmp(w[0], w[1]), Ordering::Less);
            }
        }
        c.audit_downward_closed().unwrap();
        assert_eq!(
            independence_complex(&Graph::empty(10), None, 100),
            Err(ComplexError::BudgetExceeded { budget: 100 })
        );
        let capped = independence_complex(&Graph::empty(5), Some(1), 1000).unwrap();
        assert_eq!(capped.f_vector(), vec![1, 5, 10]);
        assert_eq!(count_independent_sets(&Graph::empty(5)), 32);
    }

    #[test]
    fn links() {
        let p5 = independence_complex(&Graph::path(5).unwrap(), None, DEFAULT_FACE_BUDGET).unwrap();
        let lk = p5.link(&[2]).unwrap();
        assert_eq!(lk.vertex_count(), 2);
        assert_eq!(faces_as_lists(&lk, 1), vec![vec![0, 1]]);
        assert_eq!(
            lk.provenance().unwrap(),
            &[Label::Int(1), Label::Int(5)]
        );
        assert_eq!(p5.link(&[]).unwrap().f_vector(), p5.f_vector());
        assert!(p5.link(&[0, 1]).is_err());
        let tri = SimplicialComplex::simplex_boundary(1).unwrap();
        assert_eq!(tri.link(&[0]).unwrap().f_vector(), vec![1, 2]);
    }

    #[test]
    fn joins_and_suspensions() {
        let s0 = SimplicialComplex::sphere0();
        let s1 = s0.join(&s0).unwrap();
        assert_eq!(s1.f_vector(), vec![1, 4, 4]);
        let id = SimplicialComplex::empty_face_only();
        assert_eq!(s1.join(&id).unwrap().f_vector(), s1.f_vector());
        assert!(s1.join(&SimplicialComplex::void(0)).unwrap().is_void());
        assert_eq!(s0.suspension().unwrap().f_vector(), vec![1, 4, 4]);
    }

    #[test]
    fn union_of_graphs_is_join_of_complexes() {
        let g = Graph::path(3).unwrap();
        let h = Graph::cycle(4).unwrap();
        let lhs = independence_complex(&g.disjoint_union(&h), None, 1 << 20).unwrap();
        let a = independence_complex(&g, None, 1 << 20).unwrap();
        let b = independence_complex(&h, None, 1 << 20).unwrap();
        let rhs = a.join(&b).unwrap();
        assert_eq!(lhs.faces_by_dim(), rhs.faces_by_dim());
    }

    #[test]
    fn polyhedral_join_identities() {
        // I(K_{1,2} o K_2) as a polyhedral join
        let k12 = Graph::path(3).unwrap();
        let k2 = Graph::path(2).unwrap();
        let base = independence_complex(&k12, None, 1 << 20).unwrap();
        let leaf = independence_complex(&k2, None, 1 << 20).unwrap();
        let pj = base.polyhedral_join(&vec![leaf.clone(); 3]).unwrap();
        let lex = product(ProductKind::Lexicographic, &k12, &k2).unwrap();
        let direct = independence_complex(&lex, None, 1 << 20).unwrap();
        assert_eq!(pj.faces_by_dim(), direct.faces_by_dim());

        // over I(C_4): two disjoint squares
        let c4 = independence_complex(&Graph::cycle(4).unwrap(), None, 1 << 20).unwrap();
        let pj = c4.polyhedral_join(&vec![leaf; 4]).unwrap();
        assert_eq!(pj.f_vector(), vec![1, 8, 8]);

        // joining single points reproduces the base
        let pt = independence_complex(&Graph::empty(1), None, 10).unwrap();
        let p4 = independence_complex(&Graph::path(4).unwrap(), None, 1 << 20).unwrap();
        let same = p4.polyhedral_join(&vec![pt; 4]).unwrap();
        assert_eq!(same.faces_by_dim(), p4.faces_by_dim());
        assert!(p4.polyhedral_join(&[]).is_err());
    }

    #[test]
    fn from_facets_closes_downward() {
        let k = SimplicialComplex::from_facets(3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(k.f_vector(), vec![1, 3, 3, 1]);
        k.audit_downward_closed().unwrap();
        let broken = SimplicialComplex::from_face_set(2, vec![0, 0b11]);
        assert!(broken.audit_downward_closed().is_err());
    }
}
