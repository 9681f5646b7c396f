//! Homotopy types in the wedge-of-spheres fragment.
//!
//! A value is a disjoint union of connected pieces, each a point or a wedge of
//! spheres of positive dimension. When at most one piece is non-trivial the
//! union is itself a wedge, since `X ⊔ pt ≃ X ∨ S^0`; that single-component form
//! is the normal form. Two or more non-trivial pieces give a genuine disjoint
//! union. The empty space `S^{-1}` has no pieces.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::BettiTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HtError {
    #[error("wedge with a disconnected space whose basepoint component is ambiguous")]
    DisconnectedWedge,
    #[error("join with a disconnected space is outside the representable fragment")]
    DisconnectedJoin,
    #[error("wedge with the empty space S^-1 is undefined")]
    EmptyWedge,
    #[error("sphere dimension {0} is below -1")]
    BadDimension(i32),
    #[error("S^-1 must be the only summand of the only component")]
    MisplacedEmpty,
    #[error("a homotopy type needs at least one component")]
    NoComponents,
    #[error("table has torsion, not a wedge of spheres")]
    Torsion,
    #[error("cannot parse homotopy type: {0}")]
    Parse(String),
}

/// One connected component (or, for the single-component form, the whole space).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    Contractible,
    /// Sphere dimensions, sorted in decreasing order.
    Wedge(Vec<i32>),
}

/// Normalised homotopy type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HtType {
    components: Vec<Component>,
}

/// Connected pieces: each is a multiset of positive sphere dimensions.
type Pieces = Vec<Vec<i32>>;

fn sorted_desc(mut v: Vec<i32>) -> Vec<i32> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

impl HtType {
    pub fn contractible() -> Self {
        HtType { components: vec![Component::Contractible] }
    }

    /// `S^d`, `d >= -1`.
    pub fn sphere(d: i32) -> Self {
        Self::wedge_of(&[(d, 1)]).expect("single sphere")
    }

    /// The empty space, identity for join.
    pub fn empty() -> Self {
        HtType { components: vec![Component::Wedge(vec![-1])] }
    }

    /// `⋁ S^{d}` with the given `(dimension, multiplicity)` pairs.
    pub fn wedge_of(spheres: &[(i32, u64)]) -> Result<Self, HtError> {
        let mut dims = Vec::new();
        for &(d, m) in spheres {
            if d < -1 {
                return Err(HtError::BadDimension(d));
            }
            dims.extend(std::iter::repeat(d).take(m as usize));
        }
        if dims.contains(&-1) {
            if dims.len() == 1 {
                return Ok(Self::empty());
            }
            return Err(HtError::MisplacedEmpty);
        }
        Ok(Self::from_single(dims))
    }

    fn from_single(dims: Vec<i32>) -> Self {
        if dims.is_empty() {
            Self::contractible()
        } else {
            HtType { components: vec![Component::Wedge(sorted_desc(dims))] }
        }
    }

    /// Validating constructor from explicit components.
    pub fn from_components(components: Vec<Component>) -> Result<Self, HtError> {
        if components.is_empty() {
            return Err(HtError::NoComponents);
        }
        let mut pieces = Vec::new();
        for c in &components {
            match c {
                Component::Contractible => pieces.push(Vec::new()),
                Component::Wedge(d) => {
                    if d.iter().any(|&x| x < -1) {
                        return Err(HtError::BadDimension(*d.iter().min().unwrap()));
                    }
                    if d.contains(&-1) {
                        if components.len() == 1 && d.len() == 1 {
                            return Ok(Self::empty());
                        }
                        return Err(HtError::MisplacedEmpty);
                    }
                    if components.len() == 1 {
                        return Ok(Self::from_single(d.clone()));
                    }
                    pieces.extend(Self::from_single(d.clone()).pieces());
                }
            }
        }
        Ok(Self::from_pieces(pieces))
    }

    fn from_pieces(pieces: Pieces) -> Self {
        if pieces.is_empty() {
            return Self::empty();
        }
        let nontrivial = pieces.iter().filter(|p| !p.is_empty()).count();
        if nontrivial <= 1 {
            let mut dims: Vec<i32> = pieces.iter().flatten().copied().collect();
            dims.extend(std::iter::repeat(0).take(pieces.len() - 1));
            return Self::from_single(dims);
        }
        let mut comps: Vec<Component> = pieces
            .into_iter()
            .map(|p| {
                if p.is_empty() {
                    Component::Contractible
                } else {
                    Component::Wedge(sorted_desc(p))
                }
            })
            .collect();
        comps.sort();
        HtType { components: comps }
    }

    fn pieces(&self) -> Pieces {
        if self.is_empty_space() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for c in &self.components {
            match c {
                Component::Contractible => out.push(Vec::new()),
                Component::Wedge(d) => {
                    let positive: Vec<i32> = d.iter().copied().filter(|&x| x > 0).collect();
                    let zeros = d.iter().filter(|&&x| x == 0).count();
                    out.push(positive);
                    out.extend(std::iter::repeat(Vec::new()).take(zeros));
                }
            }
        }
        out
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_contractible(&self) -> bool {
        self.components == [Component::Contractible]
    }

    pub fn is_empty_space(&self) -> bool {
        self.components == [Component::Wedge(vec![-1])]
    }

    /// Normal form has a single component (contractible, a wedge, or `S^{-1}`).
    pub fn is_single_component(&self) -> bool {
        self.components.len() == 1
    }

    /// Number of path components of the space.
    pub fn path_components(&self) -> usize {
        self.pieces().len()
    }

    /// Sphere dimensions of the single-component form.
    pub fn wedge_dims(&self) -> Option<&[i32]> {
        match self.components.as_slice() {
            [Component::Wedge(d)] => Some(d),
            [Component::Contractible] => Some(&[]),
            _ => None,
        }
    }

    /// `a ∨ b`.
    pub fn wedge(&self, other: &Self) -> Result<Self, HtError> {
        if self.is_empty_space() || other.is_empty_space() {
            return Err(HtError::EmptyWedge);
        }
        let (pa, pb) = (self.pieces(), other.pieces());
        let na = pa.iter().filter(|p| !p.is_empty()).count();
        let nb = pb.iter().filter(|p| !p.is_empty()).count();
        if na <= 1 && nb <= 1 {
            let mut dims = self.wedge_dims().expect("single").to_vec();
            dims.extend_from_slice(other.wedge_dims().expect("single"));
            return Ok(Self::from_single(dims));
        }
        // one side consists of points only: glue one of them anywhere
        let (big, points) = if nb == 0 { (pa, pb) } else if na == 0 { (pb, pa) } else {
            return Err(HtError::DisconnectedWedge);
        };
        let mut pieces = big;
        pieces.extend(points.into_iter().skip(1));
        Ok(Self::from_pieces(pieces))
    }

    /// Wedge of a list; the empty list is a point.
    pub fn wedge_all<'a, I: IntoIterator<Item = &'a HtType>>(items: I) -> Result<Self, HtError> {
        let mut acc = Self::contractible();
        for x in items {
            acc = acc.wedge(x)?;
        }
        Ok(acc)
    }

    /// `Σ^k a`.
    pub fn suspend(&self, k: u32) -> Self {
        let mut cur = self.clone();
        for _ in 0..k {
            cur = cur.suspend_once();
        }
        cur
    }

    fn suspend_once(&self) -> Self {
        if self.is_empty_space() {
            return Self::sphere(0);
        }
        let pieces = self.pieces();
        let mut dims: Vec<i32> = pieces.iter().flatten().map(|d| d + 1).collect();
        dims.extend(std::iter::repeat(1).take(pieces.len() - 1));
        Self::from_single(dims)
    }

    /// `a * b`.
    pub fn join(&self, other: &Self) -> Result<Self, HtError> {
        if self.is_empty_space() {
            return Ok(other.clone());
        }
        if other.is_empty_space() {
            return Ok(self.clone());
        }
        if self.is_contractible() || other.is_contractible() {
            return Ok(Self::contractible());
        }
        let (Some(a), Some(b)) = (self.wedge_dims(), other.wedge_dims()) else {
            return Err(HtError::DisconnectedJoin);
        };
        let mut dims = Vec::with_capacity(a.len() * b.len());
        for &x in a {
            for &y in b {
                dims.push(x + y + 1);
            }
        }
        Ok(Self::from_single(dims))
    }

    /// `a^{*r}`; `r = 0` gives `S^{-1}`.
    pub fn join_power(&self, r: u32) -> Result<Self, HtError> {
        let mut acc = Self::empty();
        for _ in 0..r {
            acc = acc.join(self)?;
        }
        Ok(acc)
    }

    /// `a ⊔ b`.
    pub fn disjoint(&self, other: &Self) -> Self {
        let mut p = self.pieces();
        p.extend(other.pieces());
        Self::from_pieces(p)
    }

    /// Reduced Betti numbers as a polynomial.
    pub fn to_betti(&self) -> BettiPolynomial {
        let mut coeffs = BTreeMap::new();
        if self.is_empty_space() {
            coeffs.insert(-1, 1);
            return BettiPolynomial { coeffs };
        }
        let pieces = self.pieces();
        for d in pieces.iter().flatten() {
            *coeffs.entry(*d).or_insert(0) += 1;
        }
        if pieces.len() > 1 {
            *coeffs.entry(0).or_insert(0) += pieces.len() as u64 - 1;
        }
        BettiPolynomial { coeffs }
    }

    /// Reduced Betti polynomial of each path component, sorted.
    pub fn piece_betti(&self) -> Vec<BettiPolynomial> {
        let mut out: Vec<BettiPolynomial> = self
            .pieces()
            .iter()
            .map(|p| BettiPolynomial::from_coeffs(p.iter().map(|&d| (d, 1))))
            .collect();
        out.sort_by(|a, b| a.coeffs.iter().cmp(b.coeffs.iter()));
        out
    }

    /// Torsion-free table read as a wedge of spheres (Betti-level certificate only).
    pub fn from_betti_table(t: &BettiTable) -> Result<Self, HtError> {
        if !t.is_torsion_free() {
            return Err(HtError::Torsion);
        }
        let spheres: Vec<(i32, u64)> = t.ranks().into_iter().collect();
        Self::wedge_of(&spheres)
    }
}

/// [`betti_match`] component by component: `tables` holds the homology of
/// each path component, in any order.
pub fn component_match(a: &HtType, tables: &[BettiTable]) -> bool {
    if tables.iter().any(|t| !t.is_torsion_free()) {
        return false;
    }
    let mut got: Vec<BettiPolynomial> = tables.iter().map(BettiPolynomial::from_table_ranks).collect();
    got.sort_by(|x, y| x.coeffs.iter().cmp(y.coeffs.iter()));
    got == a.piece_betti()
}

/// Equal ranks in every dimension and no torsion.
pub fn betti_match(a: &HtType, t: &BettiTable) -> bool {
    t.is_torsion_free() && a.to_betti().coeffs == t.ranks()
}

impl fmt::Display for HtType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn comp(c: &Component, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match c {
                Component::Contractible => write!(f, "pt"),
                Component::Wedge(dims) => {
                    write!(f, "∨[")?;
                    let mut i = 0;
                    let mut first = true;
                    while i < dims.len() {
                        let mut j = i;
                        while j < dims.len() && dims[j] == dims[i] {
                            j += 1;
                        }
                        if !first {
                            write!(f, ", ")?;
                        }
                        first = false;
                        write!(f, "S^{}", dims[i])?;
                        if j - i > 1 {
                            write!(f, " x{}", j - i)?;
                        }
                        i = j;
                    }
                    write!(f, "]")
                }
            }
        }
        if self.components.len() == 1 {
            return comp(&self.components[0], f);
        }
        write!(f, "⊔[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            comp(c, f)?;
        }
        write!(f, "]")
    }
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> HtError {
        HtError::Parse(format!("{what} at byte {} of `{}`", self.pos, self.s))
    }

    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64, HtError> {
        self.skip_ws();
        let rest = &self.s[self.pos..];
        let len = rest
            .char_indices()
            .take_while(|(i, c)| c.is_ascii_digit() || (*i == 0 && *c == '-'))
            .count();
        let v = rest[..len].parse().map_err(|_| self.err("expected integer"))?;
        self.pos += len;
        Ok(v)
    }

    fn component(&mut self) -> Result<Component, HtError> {
        if self.eat("pt") {
            return Ok(Component::Contractible);
        }
        if !(self.eat("∨[") || self.eat("v[")) {
            return Err(self.err("expected `pt` or `∨[`"));
        }
        let mut dims = Vec::new();
        if !self.eat("]") {
            loop {
                if !self.eat("S^") {
                    return Err(self.err("expected `S^`"));
                }
                let d = self.int()? as i32;
                let mut m = 1;
                if self.eat("x") {
                    m = self.int()?;
                    if m < 1 {
                        return Err(self.err("multiplicity must be positive"));
                    }
                }
                dims.extend(std::iter::repeat(d).take(m as usize));
                if self.eat("]") {
                    break;
                }
                if !self.eat(",") {
                    return Err(self.err("expected `,` or `]`"));
                }
            }
        }
        if dims.is_empty() {
            return Ok(Component::Contractible);
        }
        Ok(Component::Wedge(sorted_desc(dims)))
    }

    fn ht(&mut self) -> Result<HtType, HtError> {
        let comps = if self.eat("⊔[") || self.eat("u[") {
            let mut comps = Vec::new();
            loop {
                comps.push(self.component()?);
                if self.eat("]") {
                    break;
                }
                if !self.eat(",") {
                    return Err(self.err("expected `,` or `]`"));
                }
            }
            comps
        } else {
            vec![self.component()?]
        };
        self.skip_ws();
        if self.pos != self.s.len() {
            return Err(self.err("trailing input"));
        }
        HtType::from_components(comps)
    }
}

impl FromStr for HtType {
    type Err = HtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser { s, pos: 0 }.ht()
    }
}

impl TryFrom<String> for HtType {
    type Error = HtError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<HtType> for String {
    fn from(h: HtType) -> String {
        h.to_string()
    }
}

/// `Σ β̃_i x^i` with non-negative integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiPolynomial {
    coeffs: BTreeMap<i32, u64>,
}

impl BettiPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i32, u64)>>(items: I) -> Self {
        let mut p = Self::zero();
        for (d, c) in items {
            p.add_term(d, c);
        }
        p
    }

    /// Coefficients listed from degree 0 upward.
    pub fn from_dense(coeffs: &[u64]) -> Self {
        Self::from_coeffs(coeffs.iter().enumerate().map(|(i, &c)| (i as i32, c)))
    }

    pub fn add_term(&mut self, degree: i32, c: u64) {
        if c == 0 {
            return;
        }
        *self.coeffs.entry(degree).or_insert(0) += c;
    }

    pub fn coeff(&self, degree: i32) -> u64 {
        self.coeffs.get(&degree).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, u64> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (&d, &c) in &other.coeffs {
            p.add_term(d, c);
        }
        p
    }

    /// Multiplication by `c·x^k`.
    pub fn shift_scale(&self, k: i32, c: u64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|(&d, &v)| (d + k, v * c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (&a, &x) in &self.coeffs {
            for (&b, &y) in &other.coeffs {
                p.add_term(a + b, x * y);
            }
        }
        p
    }

    pub fn matches_table(&self, t: &BettiTable) -> bool {
        t.is_torsion_free() && self.coeffs == t.ranks()
    }

    pub fn from_table_ranks(t: &BettiTable) -> Self {
        Self::from_coeffs(t.ranks())
    }
}

impl fmt::Display for BettiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&d, &c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coef = if c == 1 && d != 0 { String::new() } else { c.to_string() };
            match d {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{coef}x")?,
                _ => write!(f, "{coef}x^{d}")?,
            }
        }
        Ok(())
    }
}
