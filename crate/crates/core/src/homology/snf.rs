//! Smith normal form invariant factors.
//!
//! Phase one eliminates unit pivots on a sparse row/column structure, which is
//! where boundary matrices spend nearly all of their rank. Once no unit pivot is
//! left, or the active block is more than 30% full, the remainder is copied to
//! a dense array and finished with minimal-magnitude pivoting plus the usual
//! divisibility fix-up.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use thiserror::Error;

use super::matrix::IntegerMatrix;
use crate::scalar::IntegerScalar;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("integer overflow during elimination")]
pub struct Overflow;

const DENSE_FILL: f64 = 0.30;

struct SparseWork<T> {
    rows: Vec<BTreeMap<usize, T>>,
    cols: Vec<BTreeSet<usize>>,
    col_alive: Vec<bool>,
    row_alive: Vec<bool>,
    nnz: usize,
    live_rows: usize,
    live_cols: usize,
}

impl<T: IntegerScalar> SparseWork<T> {
    fn new(m: &IntegerMatrix<T>) -> Self {
        let mut rows = vec![BTreeMap::new(); m.rows()];
        let mut cols = vec![BTreeSet::new(); m.cols()];
        for (r, c, v) in m.entries() {
            rows[r].insert(c, v.clone());
            cols[c].insert(r);
        }
        SparseWork {
            nnz: m.nnz(),
            live_rows: m.rows(),
            live_cols: m.cols(),
            rows,
            cols,
            col_alive: vec![true; m.cols()],
            row_alive: vec![true; m.rows()],
        }
    }

    fn fill(&self) -> f64 {
        let area = self.live_rows as f64 * self.live_cols as f64;
        if area == 0.0 {
            0.0
        } else {
            self.nnz as f64 / area
        }
    }

    /// Unit entry in column `c` whose row is shortest.
    fn unit_pivot(&self, c: usize) -> Option<usize> {
        self.cols[c]
            .iter()
            .copied()
            .filter(|&r| self.rows[r][&c].abs().is_one())
            .min_by_key(|&r| (self.rows[r].len(), r))
    }

    /// Clears column `c` with row operations from pivot row `p`, then drops both.
    fn eliminate(&mut self, p: usize, c: usize) -> Result<(), Overflow> {
        let pivot_row: Vec<(usize, T)> = self.rows[p]
            .iter()
            .map(|(&j, v)| (j, v.clone()))
            .collect();
        let pivot_val = self.rows[p][&c].clone();
        let others: Vec<usize> = self.cols[c].iter().copied().filter(|&r| r != p).collect();
        for r in others {
            // pivot is ±1, so the multiplier is a_rc * pivot
            let factor = self.rows[r][&c].checked_mul(&pivot_val).ok_or(Overflow)?;
            for (j, v) in &pivot_row {
                let delta = factor.checked_mul(v).ok_or(Overflow)?;
                let cur = self.rows[r].get(j).cloned().unwrap_or_else(T::zero);
                let was_zero = cur.is_zero();
                let next = cur.checked_sub(&delta).ok_or(Overflow)?;
                if next.is_zero() {
                    if !was_zero {
                        self.rows[r].remove(j);
                        self.cols[*j].remove(&r);
                        self.nnz -= 1;
                    }
                } else {
                    if was_zero {
                        self.cols[*j].insert(r);
                        self.nnz += 1;
                    }
                    self.rows[r].insert(*j, next);
                }
            }
        }
        for (j, _) in &pivot_row {
            self.cols[*j].remove(&p);
        }
        self.nnz -= pivot_row.len();
        self.rows[p].clear();
        self.row_alive[p] = false;
        self.col_alive[c] = false;
        self.live_rows -= 1;
        self.live_cols -= 1;
        Ok(())
    }

    /// Remaining non-empty block as a dense array.
    fn dense_rest(&self) -> Vec<Vec<T>> {
        let live_cols: Vec<usize> = (0..self.cols.len())
            .filter(|&c| self.col_alive[c] && !self.cols[c].is_empty())
            .collect();
        let pos: BTreeMap<usize, usize> = live_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            if !self.row_alive[r] || row.is_empty() {
                continue;
            }
            let mut dense = vec![T::zero(); live_cols.len()];
            for (c, v) in row {
                dense[pos[c]] = v.clone();
            }
            out.push(dense);
        }
        out
    }
}

fn axpy_row<T: IntegerScalar>(a: &mut [Vec<T>], dst: usize, src: usize, q: &T, from: usize) -> Result<(), Overflow> {
    for j in from..a[0].len() {
        if a[src][j].is_zero() {
            continue;
        }
        let d = q.checked_mul(&a[src][j]).ok_or(Overflow)?;
        a[dst][j] = a[dst][j].checked_sub(&d).ok_or(Overflow)?;
    }
    Ok(())
}

fn axpy_col<T: IntegerScalar>(a: &mut [Vec<T>], dst: usize, src: usize, q: &T, from: usize) -> Result<(), Overflow> {
    for row in a.iter_mut().skip(from) {
        if row[src].is_zero() {
            continue;
        }
        let d = q.checked_mul(&row[src]).ok_or(Overflow)?;
        row[dst] = row[dst].checked_sub(&d).ok_or(Overflow)?;
    }
    Ok(())
}

/// Diagonal of the dense Smith form, in divisibility order.
fn dense_snf<T: IntegerScalar>(mut a: Vec<Vec<T>>) -> Result<Vec<T>, Overflow> {
    let rows = a.len();
    if rows == 0 {
        return Ok(Vec::new());
    }
    let cols = a[0].len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // minimal |entry| over the active block
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if !v.is_zero() && best.map_or(true, |(bi, bj)| v.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    axpy_row(&mut a, i, t, &q, t)?;
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    axpy_col(&mut a, j, t, &q, t)?;
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // move the smallest remainder in row/column t into the pivot
                let mut m = (t, t);
                for i in t + 1..rows {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[m.0][m.1].abs() {
                        m = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[m.0][m.1].abs() {
                        m = (t, j);
                    }
                }
                if m.1 == t {
                    a.swap(t, m.0);
                } else {
                    for row in a.iter_mut() {
                        row.swap(t, m.1);
                    }
                }
                continue;
            }
            // divisibility fix-up
            let mut bad = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !a[i][j].is_zero() && !a[i][j].is_multiple_of(&a[t][t]) {
                        bad = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let minus_one = T::zero() - T::one();
                    axpy_row(&mut a, t, i, &minus_one, t)?;
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    Ok(diag)
}

/// Invariant factors `d_1 | d_2 | … | d_r` of `m` (r = rank), over `T`.
pub fn smith_normal_form<T: IntegerScalar>(m: &IntegerMatrix<T>) -> Result<Vec<T>, Overflow> {
    let mut w = SparseWork::new(m);
    let mut units = 0usize;
    let mut dense_now = false;
    loop {
        let mut progress = false;
        let mut order: Vec<usize> = (0..w.cols.len())
            .filter(|&c| w.col_alive[c] && !w.cols[c].is_empty())
            .collect();
        order.sort_by_key(|&c| (w.cols[c].len(), c));
        for c in order {
            if !w.col_alive[c] || w.cols[c].is_empty() {
                continue;
            }
            if let Some(p) = w.unit_pivot(c) {
                w.eliminate(p, c)?;
                units += 1;
                progress = true;
                if w.live_rows * w.live_cols > 64 && w.fill() > DENSE_FILL {
                    dense_now = true;
                    break;
                }
            }
        }
        if !progress || dense_now {
            break;
        }
    }
    let mut factors = vec![T::one(); units];
    factors.extend(dense_snf(w.dense_rest())?);
    Ok(factors)
}

/// Exact invariant factors: `i64` elimination first, `BigInt` on overflow.
pub fn invariant_factors(m: &IntegerMatrix<BigInt>) -> Vec<BigInt> {
    if let Some(small) = m.to_small() {
        if let Ok(f) = smith_normal_form(&small) {
            return f.into_iter().map(BigInt::from).collect();
        }
    }
    smith_normal_form(m).expect("arbitrary precision cannot overflow")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[Vec<i64>]) -> IntegerMatrix<BigInt> {
        IntegerMatrix::from_dense(rows).to_big()
    }

    #[test]
    fn classical_examples() {
        let d = IntegerMatrix::diagonal(&[2i64, 3]);
        assert_eq!(smith_normal_form(&d).unwrap(), vec![1, 6]);
        assert!(smith_normal_form(&IntegerMatrix::<i64>::zeros(3, 4)).unwrap().is_empty());
        let m = IntegerMatrix::from_dense(&[vec![2i64, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(smith_normal_form(&m).unwrap(), vec![2, 6, 12]);
        let m = IntegerMatrix::diagonal(&[4i64, 6, 10]);
        assert_eq!(smith_normal_form(&m).unwrap(), vec![2, 2, 60]);
    }

    #[test]
    fn big_fallback_agrees() {
        let m = big(&[vec![i64::MAX, 2], vec![3, i64::MAX]]);
        let f = invariant_factors(&m);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0], BigInt::from(1));
        let det = BigInt::from(i64::MAX) * BigInt::from(i64::MAX) - BigInt::from(6);
        assert_eq!(f[1], det);
    }

    #[test]
    fn unit_phase_and_dense_phase_agree() {
        let m = IntegerMatrix::from_dense(&[
            vec![1i64, 1, 0, 0],
            vec![0, 2, 2, 0],
            vec![0, 0, 3, 3],
            vec![1, 0, 0, 1],
        ]);
        let sparse = smith_normal_form(&m).unwrap();
        let dense = dense_snf(m.to_dense()).unwrap();
        assert_eq!(sparse, dense);
    }
}
