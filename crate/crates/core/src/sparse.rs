//! Minimal compressed-sparse-row complex matrix.

use crate::model::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `r` as (col, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map_or(C64::new(0.0, 0.0), |(_, v)| v)
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// wᵀA for a row vector w.
    pub fn left_matvec(&self, w: &[C64]) -> Vec<C64> {
        assert_eq!(w.len(), self.nrows);
        let mut out = vec![C64::new(0.0, 0.0); self.ncols];
        for (r, &wr) in w.iter().enumerate() {
            if wr == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.col_idx[k]] += wr * self.values[k];
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            vec![
                (1, 2, c(1.0)),
                (0, 0, c(2.0)),
                (1, 2, c(3.0)),
                (0, 1, c(1.0)),
                (0, 1, c(-1.0)),
            ],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), c(4.0));
        assert_eq!(m.get(0, 1), c(0.0));
        assert_eq!(m.matvec(&[c(1.0), c(1.0), c(1.0)]), vec![c(2.0), c(4.0)]);
        assert_eq!(m.left_matvec(&[c(1.0), c(1.0)]), vec![c(2.0), c(0.0), c(4.0)]);
        let d = m.to_dense();
        assert_eq!(d[(0, 0)], c(2.0));
        assert_eq!(d[(1, 2)], c(4.0));
    }
}
