//! Dense linear algebra over GF(2) with bit-packed rows.

use serde::{Deserialize, Serialize};

/// A dense binary matrix, each row packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from row-major 0/1 values.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v & 1 == 1);
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&lo[src * w..(src + 1) * w], &mut hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&hi[..w], &mut lo[dst * w..(dst + 1) * w])
        };
        for (d, s) in b.iter_mut().zip(a) {
            *d ^= s;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.words {
                self.data.swap(a * self.words + k, b * self.words + k);
            }
        }
    }

    /// Reduces in place to reduced row-echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// `M·x` for a 0/1 vector `x`.
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        let mut packed = vec![0u64; self.words];
        for (c, &b) in x.iter().enumerate() {
            if b & 1 == 1 {
                packed[c / 64] |= 1 << (c % 64);
            }
        }
        (0..self.rows)
            .map(|r| {
                let ones: u32 = self.row(r).iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
                (ones & 1) as u8
            })
            .collect()
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            aug.set(r, n + r, true);
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if aug.get(r, n + c) {
                    inv.set(r, c, true);
                }
            }
        }
        Some(inv)
    }

    /// A basis of the right null space, as the rows of a generator matrix in
    /// systematic form over the free columns. Returns `(G, info_columns)`:
    /// `G` is `k×cols`, and column `info_columns[j]` of row `j` is its only
    /// set information bit.
    pub fn null_space(&self) -> (Self, Vec<usize>) {
        let mut red = self.clone();
        let pivots = red.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut g = Self::zeros(free.len(), self.cols);
        for (j, &f) in free.iter().enumerate() {
            g.set(j, f, true);
            for (i, &p) in pivots.iter().enumerate() {
                if red.get(i, f) {
                    g.set(j, p, true);
                }
            }
        }
        (g, free)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut m = self.clone();
        m.rows += other.rows;
        m.data.extend_from_slice(&other.data);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, bits: &[bool]) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, bits[(r * cols + c) % bits.len()]);
            }
        }
        m
    }

    #[test]
    fn repetition_code() {
        let h = BitMatrix::from_rows(&[vec![1, 1]]);
        let (g, info) = h.null_space();
        assert_eq!(g, BitMatrix::from_rows(&[vec![1, 1]]));
        assert_eq!(info, vec![1]);
    }

    #[test]
    fn inverse_round_trip() {
        let a = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]);
        let inv = a.inverse().unwrap();
        for c in 0..3 {
            let e: Vec<u8> = (0..3).map(|i| (i == c) as u8).collect();
            assert_eq!(a.mul_vec(&inv.mul_vec(&e)), e);
        }
        let singular = BitMatrix::from_rows(&[vec![1, 1], vec![1, 1]]);
        assert!(singular.inverse().is_none());
    }

    proptest! {
        #[test]
        fn null_space_is_annihilated(rows in 1usize..8, cols in 1usize..70, bits in prop::collection::vec(any::<bool>(), 1..200)) {
            let h = random_matrix(rows, cols, &bits);
            let (g, info) = h.null_space();
            prop_assert_eq!(g.rows(), cols - h.rank());
            prop_assert_eq!(info.len(), g.rows());
            for j in 0..g.rows() {
                let row: Vec<u8> = (0..cols).map(|c| g.get(j, c) as u8).collect();
                prop_assert!(h.mul_vec(&row).iter().all(|&b| b == 0));
                for (k, &ic) in info.iter().enumerate() {
                    prop_assert_eq!(g.get(j, ic), j == k);
                }
            }
        }
    }
}
