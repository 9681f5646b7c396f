//! Exact reduced integer homology of simplicial complexes.
//!
//! [`reduced_homology`] first cancels elementary coreduction/collapse pairs
//! and then takes Smith forms of what is left; [`reduced_homology_direct`]
//! runs Smith forms on the full augmented boundary matrices. Both are exact.

mod coreduce;
pub mod matrix;
pub mod snf;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{
    face_vertices, independence_complex, lex_cmp, ComplexError, Face, SimplicialComplex,
};
use crate::graph::Graph;
pub use matrix::IntegerMatrix;
pub use snf::{invariant_factors, smith_normal_form, Overflow};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("the void complex has no reduced homology in this convention")]
    Void,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("boundary index {k} outside -1..={dim}")]
    BoundaryIndex { k: i32, dim: i32 },
    #[error("torsion coefficient {0} does not fit in 64 bits")]
    TorsionTooLarge(String),
    #[error("Euler characteristic check failed: faces give {faces}, homology gives {homology}")]
    EulerMismatch { faces: i64, homology: i64 },
}

impl HomologyError {
    pub fn is_budget(&self) -> bool {
        matches!(self, HomologyError::Complex(ComplexError::BudgetExceeded { .. }))
    }
}

/// `Z^rank ⊕ Z/t_1 ⊕ … ⊕ Z/t_s` with `t_1 | t_2 | …`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub rank: u64,
    pub torsion: Vec<u64>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

/// Reduced homology by dimension; only non-zero groups are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiTable {
    by_dim: BTreeMap<i32, HomologyGroup>,
}

impl BettiTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Torsion-free table from `(dimension, rank)` pairs.
    pub fn from_ranks<I: IntoIterator<Item = (i32, u64)>>(ranks: I) -> Self {
        let mut t = Self::new();
        for (d, r) in ranks {
            t.add(d, HomologyGroup { rank: r, torsion: Vec::new() });
        }
        t
    }

    fn add(&mut self, d: i32, g: HomologyGroup) {
        if g.is_zero() {
            return;
        }
        let slot = self.by_dim.entry(d).or_default();
        slot.rank += g.rank;
        let mut orders = std::mem::take(&mut slot.torsion);
        orders.extend(g.torsion);
        slot.torsion = normalize_torsion(&orders);
    }

    pub fn set(&mut self, d: i32, g: HomologyGroup) {
        if g.is_zero() {
            self.by_dim.remove(&d);
        } else {
            let torsion = normalize_torsion(&g.torsion);
            self.by_dim.insert(d, HomologyGroup { rank: g.rank, torsion });
        }
    }

    pub fn group(&self, d: i32) -> HomologyGroup {
        self.by_dim.get(&d).cloned().unwrap_or_default()
    }

    pub fn rank(&self, d: i32) -> u64 {
        self.by_dim.get(&d).map_or(0, |g| g.rank)
    }

    pub fn torsion(&self, d: i32) -> &[u64] {
        self.by_dim.get(&d).map_or(&[], |g| g.torsion.as_slice())
    }

    pub fn is_torsion_free(&self) -> bool {
        self.by_dim.values().all(|g| g.torsion.is_empty())
    }

    /// All groups vanish (the complex is acyclic).
    pub fn is_trivial(&self) -> bool {
        self.by_dim.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &HomologyGroup)> {
        self.by_dim.iter().map(|(&d, g)| (d, g))
    }

    /// Non-zero ranks as `(dimension, rank)`.
    pub fn ranks(&self) -> BTreeMap<i32, u64> {
        self.by_dim
            .iter()
            .filter(|(_, g)| g.rank > 0)
            .map(|(&d, g)| (d, g.rank))
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.by_dim
            .iter()
            .map(|(&d, g)| if d.rem_euclid(2) == 0 { g.rank as i64 } else { -(g.rank as i64) })
            .sum()
    }

    /// `H̃_*(ΣK)` from `H̃_*(K)`.
    pub fn suspend(&self, k: u32) -> Self {
        BettiTable {
            by_dim: self
                .by_dim
                .iter()
                .map(|(&d, g)| (d + k as i32, g.clone()))
                .collect(),
        }
    }

    /// Vanishing of every group in dimensions `<= bound`.
    pub fn vanishes_through(&self, bound: i32) -> bool {
        self.by_dim.keys().all(|&d| d > bound)
    }

    /// Künneth formula for joins:
    /// `H̃_{r+1}(A*B) = ⊕_{i+j=r} H̃_i⊗H̃_j ⊕ ⊕_{i+j=r-1} Tor(H̃_i, H̃_j)`.
    pub fn join(&self, other: &Self) -> Self {
        let mut out = BettiTable::new();
        for (&i, a) in &self.by_dim {
            for (&j, b) in &other.by_dim {
                let mut torsion = Vec::new();
                for _ in 0..b.rank {
                    torsion.extend(&a.torsion);
                }
                for _ in 0..a.rank {
                    torsion.extend(&b.torsion);
                }
                let mut tor = Vec::new();
                for &p in &a.torsion {
                    for &q in &b.torsion {
                        let g = num_integer::gcd(p, q);
                        if g > 1 {
                            torsion.push(g);
                            tor.push(g);
                        }
                    }
                }
                out.add(i + j + 1, HomologyGroup { rank: a.rank * b.rank, torsion });
                out.add(i + j + 2, HomologyGroup { rank: 0, torsion: tor });
            }
        }
        out
    }

    /// One JSON object per dimension in `lo..=hi`.
    pub fn json_lines(&self, lo: i32, hi: i32) -> Vec<String> {
        (lo..=hi)
            .map(|d| {
                let g = self.group(d);
                serde_json::json!({"dim": d, "rank": g.rank, "torsion": g.torsion}).to_string()
            })
            .collect()
    }

    /// Highest dimension carrying a non-zero group.
    pub fn top_dim(&self) -> Option<i32> {
        self.by_dim.keys().next_back().copied()
    }
}

impl fmt::Display for BettiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.by_dim.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, (d, g)) in self.by_dim.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}: {}", g.rank)?;
            if !g.torsion.is_empty() {
                let t: Vec<String> = g.torsion.iter().map(|t| format!("Z/{t}")).collect();
                write!(f, " + {}", t.join(" + "))?;
            }
        }
        write!(f, "}}")
    }
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Invariant-factor form of `⊕ Z/c_i`, ascending, every factor `>= 2`.
pub fn normalize_torsion(orders: &[u64]) -> Vec<u64> {
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &c in orders {
        assert!(c != 0, "torsion order zero");
        for (p, e) in factor(c) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for (p, mut exps) in by_prime {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        for (i, e) in exps.into_iter().enumerate() {
            out[len - 1 - i] *= p.pow(e);
        }
    }
    out.retain(|&x| x > 1);
    out
}

fn layer_index(layer: &[Face], face: Face) -> Option<usize> {
    layer.binary_search_by(|p| lex_cmp(*p, face)).ok()
}

/// Augmented boundary between consecutive layers (`cols` has one more vertex).
fn boundary_between(rows: &[Face], cols: &[Face]) -> IntegerMatrix<i64> {
    let mut m = IntegerMatrix::zeros(rows.len(), cols.len());
    for (j, &f) in cols.iter().enumerate() {
        for (pos, v) in face_vertices(f).into_iter().enumerate() {
            if let Some(i) = layer_index(rows, f & !(1u128 << v)) {
                m.set(i, j, if pos % 2 == 0 { 1 } else { -1 });
            }
        }
    }
    m
}

/// `∂_k`: rows indexed by `(k-1)`-faces, columns by `k`-faces, lex order.
pub fn boundary_matrix(k: &SimplicialComplex, dim: i32) -> Result<IntegerMatrix<BigInt>, HomologyError> {
    let top = k.dim().ok_or(HomologyError::Void)?;
    if dim < -1 || dim > top {
        return Err(HomologyError::BoundaryIndex { k: dim, dim: top });
    }
    Ok(boundary_between(k.faces(dim - 1), k.faces(dim)).to_big())
}

fn exact_factors(m: &IntegerMatrix<i64>) -> Vec<BigInt> {
    match smith_normal_form(m) {
        Ok(f) => f.into_iter().map(BigInt::from).collect(),
        Err(Overflow) => smith_normal_form(&m.to_big()).expect("arbitrary precision"),
    }
}

/// Homology of a chain complex whose cells are the given face layers
/// (index 0 = dimension −1) with the restricted simplicial boundary.
fn homology_of_layers(layers: &[Vec<Face>]) -> Result<BettiTable, HomologyError> {
    let n = layers.len();
    // factors[l] are the invariant factors of the map out of layer l
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); n + 1];
    for l in 1..n {
        if layers[l].is_empty() || layers[l - 1].is_empty() {
            continue;
        }
        factors[l] = exact_factors(&boundary_between(&layers[l - 1], &layers[l]));
    }
    let mut table = BettiTable::new();
    for l in 0..n {
        let f = layers[l].len() as u64;
        let rank_out = factors[l].len() as u64;
        let rank_in = factors[l + 1].len() as u64;
        let rank = f - rank_out - rank_in;
        let mut torsion = Vec::new();
        for d in &factors[l + 1] {
            if !d.is_one() {
                torsion.push(
                    d.to_u64()
                        .ok_or_else(|| HomologyError::TorsionTooLarge(d.to_string()))?,
                );
            }
        }
        table.set(l as i32 - 1, HomologyGroup { rank, torsion });
    }
    Ok(table)
}

fn euler_of_faces(k: &SimplicialComplex) -> i64 {
    k.f_vector()
        .iter()
        .enumerate()
        .map(|(l, &c)| if l % 2 == 1 { c as i64 } else { -(c as i64) })
        .sum()
}

fn check_euler(k: &SimplicialComplex, t: &BettiTable) -> Result<(), HomologyError> {
    let faces = euler_of_faces(k);
    let homology = t.euler_characteristic();
    if faces != homology {
        return Err(HomologyError::EulerMismatch { faces, homology });
    }
    Ok(())
}

/// Reduced homology after coreduction preprocessing.
pub fn reduced_homology(k: &SimplicialComplex) -> Result<BettiTable, HomologyError> {
    if k.is_void() {
        return Err(HomologyError::Void);
    }
    let residual = coreduce::coreduce(k);
    let t = homology_of_layers(&residual.layers)?;
    check_euler(k, &t)?;
    Ok(t)
}

/// Reduced homology from the full boundary matrices.
pub fn reduced_homology_direct(k: &SimplicialComplex) -> Result<BettiTable, HomologyError> {
    if k.is_void() {
        return Err(HomologyError::Void);
    }
    let t = homology_of_layers(k.faces_by_dim())?;
    check_euler(k, &t)?;
    Ok(t)
}

/// Reduced homology of each path component, in component order.
pub fn component_homology(k: &SimplicialComplex) -> Result<Vec<BettiTable>, HomologyError> {
    k.path_components().iter().map(reduced_homology).collect()
}

/// Reduced homology of each path component of `I(G)`. These are the
/// independence complexes of the components of the complement of `G`.
pub fn independence_pieces(g: &Graph, budget: usize) -> Result<Vec<BettiTable>, HomologyError> {
    let comps = g.complement().connected_components();
    if comps.len() == 1 {
        return Ok(vec![independence_homology(g, budget)?]);
    }
    comps
        .iter()
        .map(|c| independence_homology(&g.induced_subgraph(c).expect("component vertices are valid"), budget))
        .collect()
}

/// Number of cells surviving coreduction, per dimension (diagnostics).
pub fn residual_profile(k: &SimplicialComplex) -> Vec<usize> {
    coreduce::coreduce(k).layers.iter().map(Vec::len).collect()
}

/// `H̃_*(I(G))`, computed per connected component and joined by Künneth,
/// since `I(G + H) = I(G) * I(H)`. The face budget applies to each component.
pub fn independence_homology(g: &Graph, budget: usize) -> Result<BettiTable, HomologyError> {
    let mut acc = BettiTable::from_ranks([(-1, 1)]);
    for comp in g.connected_components() {
        let sub = g.induced_subgraph(&comp).expect("component vertices are valid");
        let k = independence_complex(&sub, None, budget)?;
        let t = reduced_homology(&k)?;
        acc = acc.join(&t);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::DEFAULT_FACE_BUDGET;

    fn homology_of(g: &Graph) -> BettiTable {
        let k = independence_complex(g, None, DEFAULT_FACE_BUDGET).unwrap();
        reduced_homology(&k).unwrap()
    }

    /// Minimal 6-vertex triangulation of the real projective plane.
    fn rp2() -> SimplicialComplex {
        let facets = [
            [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 1],
            [1, 2, 4], [2, 3, 5], [3, 4, 1], [4, 5, 2], [5, 1, 3],
        ];
        let facets: Vec<Vec<usize>> = facets.iter().map(|f| f.to_vec()).collect();
        SimplicialComplex::from_facets(6, &facets).unwrap()
    }

    #[test]
    fn pieces_from_the_complement() {
        let g = crate::product(crate::ProductKind::Lexicographic, &Graph::cycle(4).unwrap(), &Graph::path(2).unwrap()).unwrap();
        let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
        assert_eq!(independence_pieces(&g, DEFAULT_FACE_BUDGET).unwrap(), component_homology(&k).unwrap());
    }

    #[test]
    fn kozlov_spot_checks() {
        assert_eq!(homology_of(&Graph::path(5).unwrap()), BettiTable::from_ranks([(1, 1)]));
        assert_eq!(homology_of(&Graph::complete(4)), BettiTable::from_ranks([(0, 3)]));
        assert_eq!(homology_of(&Graph::cycle(6).unwrap()), BettiTable::from_ranks([(1, 2)]));
        assert!(homology_of(&Graph::path(7).unwrap()).is_trivial());
    }

    #[test]
    fn conventions_in_dimension_minus_one() {
        let e = SimplicialComplex::empty_face_only();
        assert_eq!(reduced_homology(&e).unwrap(), BettiTable::from_ranks([(-1, 1)]));
        assert_eq!(reduced_homology(&SimplicialComplex::void(0)), Err(HomologyError::Void));
        assert_eq!(homology_of(&Graph::empty(0)), BettiTable::from_ranks([(-1, 1)]));
    }

    #[test]
    fn boundary_matrices() {
        let tri = SimplicialComplex::from_facets(3, &[vec![0, 1, 2]]).unwrap();
        let d1 = boundary_matrix(&tri, 1).unwrap();
        assert_eq!((d1.rows(), d1.cols()), (3, 3));
        let d0 = boundary_matrix(&tri, 0).unwrap();
        assert_eq!(d0.rows(), 1);
        assert!(d0.entries().all(|(_, _, v)| *v == BigInt::from(1)));
        assert!(d0.checked_mul(&d1).unwrap().is_zero());
        assert!(boundary_matrix(&tri, 3).is_err());
        assert!(boundary_matrix(&tri, -2).is_err());
        assert_eq!(boundary_matrix(&tri, -1).unwrap().rows(), 0);

        let p6 = independence_complex(&Graph::path(6).unwrap(), None, 1000).unwrap();
        for k in 0..=p6.dim().unwrap() {
            let a = boundary_matrix(&p6, k).unwrap();
            let b = boundary_matrix(&p6, k + 1).unwrap_or_else(|_| IntegerMatrix::zeros(a.cols(), 0));
            if b.cols() > 0 {
                assert!(a.checked_mul(&b).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn projective_plane_torsion() {
        let k = rp2();
        let expect = {
            let mut t = BettiTable::new();
            t.set(1, HomologyGroup { rank: 0, torsion: vec![2] });
            t
        };
        assert_eq!(reduced_homology_direct(&k).unwrap(), expect);
        assert_eq!(reduced_homology(&k).unwrap(), expect);
    }

    #[test]
    fn spheres_and_suspensions() {
        for d in 0..5 {
            let s = SimplicialComplex::simplex_boundary(d).unwrap();
            let expect = BettiTable::from_ranks([(d as i32, 1)]);
            assert_eq!(reduced_homology(&s).unwrap(), expect);
            assert_eq!(reduced_homology(&s.suspension().unwrap()).unwrap(), expect.suspend(1));
        }
    }

    #[test]
    fn routes_agree_on_products() {
        use crate::graph::{product, ProductKind};
        for (kind, a, b) in [
            (ProductKind::Strong, 3, 3),
            (ProductKind::Categorical, 3, 4),
            (ProductKind::Lexicographic, 3, 2),
            (ProductKind::Cartesian, 3, 3),
        ] {
            let g = product(kind, &Graph::path(a).unwrap(), &Graph::path(b).unwrap()).unwrap();
            let k = independence_complex(&g, None, DEFAULT_FACE_BUDGET).unwrap();
            assert_eq!(reduced_homology(&k).unwrap(), reduced_homology_direct(&k).unwrap());
            assert_eq!(independence_homology(&g, DEFAULT_FACE_BUDGET).unwrap(), reduced_homology(&k).unwrap());
        }
    }

    #[test]
    fn kunneth_with_torsion() {
        let k = rp2();
        let t = reduced_homology(&k).unwrap();
        let joined = reduced_homology(&k.join(&k).unwrap()).unwrap();
        assert_eq!(t.join(&t), joined);
        let s0 = SimplicialComplex::sphere0();
        let with_s0 = reduced_homology(&k.join(&s0).unwrap()).unwrap();
        assert_eq!(t.join(&reduced_homology(&s0).unwrap()), with_s0);
    }

    #[test]
    fn torsion_normal_form() {
        assert_eq!(normalize_torsion(&[4, 6]), vec![2, 12]);
        assert_eq!(normalize_torsion(&[2, 3]), vec![6]);
        assert_eq!(normalize_torsion(&[1, 1]), Vec::<u64>::new());
        assert_eq!(normalize_torsion(&[2, 2, 4]), vec![2, 2, 4]);
    }

    #[test]
    fn display_and_json() {
        let mut t = BettiTable::from_ranks([(1, 2)]);
        t.set(2, HomologyGroup { rank: 1, torsion: vec![2] });
        assert_eq!(t.to_string(), "{1: 2, 2: 1 + Z/2}");
        assert_eq!(t.json_lines(1, 1), vec![r#"{"dim":1,"rank":2,"torsion":[]}"#]);
    }
}
