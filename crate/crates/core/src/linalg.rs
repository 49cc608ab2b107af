//! Sparse matrices over the rationals with exact Gaussian elimination.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::gca::Rational;

type SparseRow = BTreeMap<usize, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

/// Outcome of solving `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    /// A particular solution, free variables set to zero.
    Solvable(Vec<Rational>),
    /// A row functional `y` with `y A = 0` and `y b != 0`.
    Inconsistent(Vec<Rational>),
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = RationalMatrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
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

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn column(&self, col: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn matmul(&self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut by_row: BTreeMap<usize, Vec<(usize, &Rational)>> = BTreeMap::new();
        for (&(i, j), v) in &rhs.entries {
            by_row.entry(i).or_default().push((j, v));
        }
        let mut out: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (&(i, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, b) in row {
                    let e = out.entry((i, j)).or_insert_with(Rational::zero);
                    *e += a * b;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        RationalMatrix {
            rows: self.rows,
            cols: rhs.cols,
            entries: out,
        }
    }

    fn sparse_rows(&self) -> Vec<SparseRow> {
        let mut rows = vec![SparseRow::new(); self.rows];
        for (&(i, j), v) in &self.entries {
            rows[i].insert(j, v.clone());
        }
        rows
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<SparseRow> = self
            .sparse_rows()
            .into_iter()
            .filter(|r| !r.is_empty())
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = pick_pivot(&rows, col) else {
                continue;
            };
            let pivot = rows.swap_remove(p);
            rank += 1;
            for row in rows.iter_mut() {
                eliminate(row, &pivot, col);
            }
            rows.retain(|r| !r.is_empty());
        }
        rank
    }

    /// Solves `A x = b` exactly, or returns a cokernel functional proving
    /// that `b` is not in the column space.
    pub fn solve(&self, b: &[Rational]) -> Solution {
        assert_eq!(b.len(), self.rows, "right-hand side has wrong length");
        // Columns past `cols` hold the right-hand side and then an identity
        // block that records which original rows were combined.
        let rhs_col = self.cols;
        let track = rhs_col + 1;
        let mut rows = self.sparse_rows();
        for (i, row) in rows.iter_mut().enumerate() {
            if !b[i].is_zero() {
                row.insert(rhs_col, b[i].clone());
            }
            row.insert(track + i, Rational::one());
        }
        let mut pivots: Vec<(usize, SparseRow)> = Vec::new();
        for col in 0..self.cols {
            let Some(p) = pick_pivot(&rows, col) else {
                continue;
            };
            let pivot = rows.swap_remove(p);
            for row in rows.iter_mut() {
                eliminate(row, &pivot, col);
            }
            pivots.push((col, pivot));
        }
        for row in &rows {
            let lead = row.keys().next().copied();
            if lead == Some(rhs_col) {
                let mut y = vec![Rational::zero(); self.rows];
                for (&k, v) in row.range(track..) {
                    y[k - track] = v.clone();
                }
                return Solution::Inconsistent(y);
            }
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (col, row) in pivots.iter().rev() {
            let mut acc = row.get(&rhs_col).cloned().unwrap_or_else(Rational::zero);
            for (&k, v) in row.range(col + 1..rhs_col) {
                acc -= v * &x[k];
            }
            x[*col] = acc / &row[col];
        }
        Solution::Solvable(x)
    }
}

fn pick_pivot(rows: &[SparseRow], col: usize) -> Option<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.contains_key(&col))
        .min_by_key(|(_, r)| r.len())
        .map(|(i, _)| i)
}

fn eliminate(row: &mut SparseRow, pivot: &SparseRow, col: usize) {
    let Some(v) = row.get(&col) else {
        return;
    };
    let factor = v / &pivot[&col];
    for (&k, pv) in pivot {
        let delta = &factor * pv;
        let entry = row.entry(k).or_insert_with(Rational::zero);
        *entry -= delta;
        if entry.is_zero() {
            row.remove(&k);
        }
    }
}
