use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::scalar::IntegerScalar;

/// Sparse integer matrix; zero entries are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerMatrix<T> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: IntegerScalar> IntegerMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores `value` at `(r, c)`; storing zero removes the entry.
    pub fn set(&mut self, r: usize, c: usize, value: T) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        if value.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), value);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(T::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, c, v) in self.entries() {
            t.entries.insert((c, r), v.clone());
        }
        t
    }

    /// Matrix product; `None` on overflow.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut by_row: Vec<Vec<(usize, &T)>> = vec![Vec::new(); other.rows];
        for (r, c, v) in other.entries() {
            by_row[r].push((c, v));
        }
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (i, k, a) in self.entries() {
            for &(j, b) in &by_row[k] {
                let p = a.checked_mul(b)?;
                let slot = acc.entry((i, j)).or_insert_with(T::zero);
                *slot = slot.checked_add(&p)?;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Some(IntegerMatrix {
            rows: self.rows,
            cols: other.cols,
            entries: acc,
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.cols]; self.rows];
        for (r, c, v) in self.entries() {
            out[r][c] = v.clone();
        }
        out
    }

    /// Entry-wise conversion into another scalar type; `None` if an entry does not fit.
    pub fn try_convert<U: IntegerScalar>(&self) -> Option<IntegerMatrix<U>> {
        let mut out = IntegerMatrix::<U>::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            let x = U::from_i128(v.to_i128()?)?;
            out.entries.insert((r, c), x);
        }
        Some(out)
    }
}

impl IntegerMatrix<BigInt> {
    /// Narrows to `i64` when every entry fits.
    pub fn to_small(&self) -> Option<IntegerMatrix<i64>> {
        let mut out = IntegerMatrix::<i64>::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            out.entries.insert((r, c), v.to_i64()?);
        }
        Some(out)
    }
}

impl IntegerMatrix<i64> {
    pub fn to_big(&self) -> IntegerMatrix<BigInt> {
        let mut out = IntegerMatrix::<BigInt>::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            out.entries.insert((r, c), BigInt::from(*v));
        }
        out
    }
}

impl<T: IntegerScalar> fmt::Debug for IntegerMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerMatrix {}x{} [", self.rows, self.cols)?;
        for (i, (r, c, v)) in self.entries().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({r},{c})={v}")?;
        }
        write!(f, "]")
    }
}
