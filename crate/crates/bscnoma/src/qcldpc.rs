//! Quasi-cyclic LDPC matrices from cyclic designs.
//!
//! The base matrix is a `2f × wf` array of exponents. Row block 1 holds, for
//! each base block, the `f×f` circulant whose first row is the block and whose
//! later rows are right cyclic shifts. Row block 2 holds the same circulants
//! built from negated base blocks. Each exponent `e` is then dispersed into the
//! `(ς−1)×(ς−1)` circulant permutation matrix with ones at `(r, (e+r) mod (ς−1))`.
//!
//! Negation alone cannot give a 4-cycle-free array: every base block contains
//! 0, and `−0 = 0`, so a row of block 1 and the matching row of block 2 agree
//! on one column of every circulant. Row block 2 therefore uses a translate
//! `s_c − B_c` of each negated block (still a block of the developed design),
//! with the translate vector `(s_0, s_1, …)` chosen as the lexicographically
//! smallest one that makes the whole array satisfy the RC constraint.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::CbsecDesign;
use crate::gf2::BitMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("field size {0} is not a prime power")]
    NotPrimePower(usize),
    #[error("field size {sigma} is too small: need ς−1 ≥ Ω = {omega}")]
    FieldTooSmall { sigma: usize, omega: usize },
    #[error("no translate of the negated blocks yields a 4-cycle-free base matrix")]
    NoRcTranslate,
    #[error("expanded matrix violates the row-column constraint")]
    RcViolation,
    #[error("subarray {lambda_c}×{mu_r} exceeds the {rows}×{cols} block array")]
    SubarrayOutOfRange { lambda_c: usize, mu_r: usize, rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("the relay's square parity block is singular over GF(2); choose different λc₃ or μr")]
    SingularRelayBlock,
    #[error("the intersection code has no information bits")]
    EmptyCode,
    #[error("malformed alist: {0}")]
    Alist(String),
}

/// Whether `n` is a power of a prime.
pub fn is_prime_power(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..=n).find(|&d| n.is_multiple_of(d)).expect("n ≥ 2 has a divisor");
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

/// The smallest prime power `ς` with `ς − 1 ≥ Ω`.
pub fn field_size_for(omega: usize) -> usize {
    (omega + 1..).find(|&q| is_prime_power(q)).expect("prime powers are unbounded")
}

/// `2f × wf` exponent array; `None` stands for the field zero (all-zero block).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseMatrix {
    pub entries: Vec<Vec<Option<usize>>>,
    pub f: usize,
    pub w: usize,
    pub omega: usize,
    pub sigma: usize,
    /// Translate applied to each negated base block in row block 2.
    pub translates: Vec<usize>,
}

impl BaseMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// Circulant size `ς − 1`.
    pub fn circulant(&self) -> usize {
        self.sigma - 1
    }
}

/// Exponent-level RC check: two block rows of circulant permutations close a
/// 4-cycle exactly when two columns share the same exponent difference.
fn exponents_rc_free(rows: &[Vec<Option<usize>>], m: usize) -> bool {
    let mut seen = vec![usize::MAX; m];
    for (i1, a) in rows.iter().enumerate() {
        for (i2, b) in rows.iter().enumerate().skip(i1 + 1) {
            let tag = i1 * rows.len() + i2;
            for (x, y) in a.iter().zip(b) {
                if let (Some(x), Some(y)) = (x, y) {
                    let d = (x + m - y) % m;
                    if seen[d] == tag {
                        return false;
                    }
                    seen[d] = tag;
                }
            }
        }
    }
    true
}

fn assemble(d: &CbsecDesign, translates: &[usize]) -> Vec<Vec<Option<usize>>> {
    let f = d.f;
    let om = d.omega;
    let blocks = &d.base_blocks[..translates.len()];
    let mut rows = Vec::with_capacity(2 * f);
    for r in 0..f {
        rows.push(blocks.iter().flat_map(|b| (0..f).map(move |t| Some(b[(t + f - r) % f]))).collect());
    }
    for r in 0..f {
        rows.push(
            blocks
                .iter()
                .zip(translates)
                .flat_map(|(b, &s)| (0..f).map(move |t| Some((s + om - b[(t + f - r) % f]) % om)))
                .collect(),
        );
    }
    rows
}

fn search_translates(d: &CbsecDesign, m: usize, prefix: &mut Vec<usize>) -> bool {
    if !exponents_rc_free(&assemble(d, prefix), m) {
        return false;
    }
    if prefix.len() == d.base_blocks.len() {
        return true;
    }
    for s in 0..d.omega {
        prefix.push(s);
        if search_translates(d, m, prefix) {
            return true;
        }
        prefix.pop();
    }
    false
}

/// Assembles the exponent array for field size `ς`.
pub fn base_matrix(d: &CbsecDesign, sigma: usize) -> Result<BaseMatrix, CodeError> {
    if !is_prime_power(sigma) {
        return Err(CodeError::NotPrimePower(sigma));
    }
    if sigma - 1 < d.omega {
        return Err(CodeError::FieldTooSmall { sigma, omega: d.omega });
    }
    let mut translates = Vec::with_capacity(d.base_blocks.len());
    if !search_translates(d, sigma - 1, &mut translates) {
        return Err(CodeError::NoRcTranslate);
    }
    Ok(BaseMatrix {
        entries: assemble(d, &translates),
        f: d.f,
        w: d.base_blocks.len(),
        omega: d.omega,
        sigma,
        translates,
    })
}

/// Sparse binary matrix with row and column adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheckMatrix {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
    /// Circulant size when the matrix is an array of square blocks.
    pub circulant: Option<usize>,
}

impl ParityCheckMatrix {
    /// Builds from one-positions; duplicates are rejected.
    pub fn from_positions(
        rows: usize,
        cols: usize,
        ones: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CodeError> {
        let mut row_adj = vec![Vec::new(); rows];
        for (r, c) in ones {
            if r >= rows || c >= cols {
                return Err(CodeError::Dimension(format!("one at ({r}, {c}) outside {rows}×{cols}")));
            }
            row_adj[r].push(c);
        }
        for row in &mut row_adj {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(CodeError::Dimension("duplicate one-position".into()));
            }
        }
        let mut col_adj = vec![Vec::new(); cols];
        for (r, row) in row_adj.iter().enumerate() {
            for &c in row {
                col_adj[c].push(r);
            }
        }
        Ok(Self { rows, cols, row_adj, col_adj, circulant: None })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_positions(n, n, (0..n).map(|i| (i, i))).expect("in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_adj[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_adj[c]
    }

    pub fn ones(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_adj[r].binary_search(&c).is_ok()
    }

    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_adj.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&c| (r, c)))
    }

    /// Syndrome `H·x` over GF(2).
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        self.row_adj.iter().map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1))).collect()
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        x.len() == self.cols && self.syndrome(x).iter().all(|&b| b == 0)
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows, self.cols);
        for (r, c) in self.positions() {
            m.set(r, c, true);
        }
        m
    }

    /// The block rectangle rows `[r0, r1)`, columns `[c0, c1)`.
    pub fn slice(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let ones = (r0..r1)
            .flat_map(|r| self.row_adj[r].iter().filter(move |&&c| c >= c0 && c < c1).map(move |&c| (r - r0, c - c0)));
        let mut out = Self::from_positions(r1 - r0, c1 - c0, ones.collect::<Vec<_>>()).expect("slice stays in range");
        out.circulant = self.circulant;
        out
    }

    /// `[self; other]`.
    pub fn vstack(&self, other: &Self) -> Result<Self, CodeError> {
        if self.cols != other.cols {
            return Err(CodeError::Dimension(format!("cannot stack {} and {} columns", self.cols, other.cols)));
        }
        let ones = self.positions().chain(other.positions().map(|(r, c)| (r + self.rows, c)));
        let mut out = Self::from_positions(self.rows + other.rows, self.cols, ones.collect::<Vec<_>>())?;
        out.circulant = if self.circulant == other.circulant { self.circulant } else { None };
        Ok(out)
    }

    /// Serializes to the alist text format (1-based indices, zero padded).
    pub fn to_alist(&self) -> String {
        let mut s = String::new();
        let col_w: Vec<usize> = self.col_adj.iter().map(Vec::len).collect();
        let row_w: Vec<usize> = self.row_adj.iter().map(Vec::len).collect();
        let max_c = col_w.iter().copied().max().unwrap_or(0);
        let max_r = row_w.iter().copied().max().unwrap_or(0);
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        writeln!(s, "{} {}", self.cols, self.rows).unwrap();
        writeln!(s, "{max_c} {max_r}").unwrap();
        writeln!(s, "{}", join(&col_w)).unwrap();
        writeln!(s, "{}", join(&row_w)).unwrap();
        for (adj, width) in [(&self.col_adj, max_c), (&self.row_adj, max_r)] {
            for list in adj {
                let mut idx: Vec<usize> = list.iter().map(|i| i + 1).collect();
                idx.resize(width, 0);
                writeln!(s, "{}", join(&idx)).unwrap();
            }
        }
        s
    }

    /// Parses the alist text format; zero padding is optional.
    pub fn from_alist(text: &str) -> Result<Self, CodeError> {
        let bad = |m: &str| CodeError::Alist(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let nums = |line: Option<&str>| -> Result<Vec<usize>, CodeError> {
            line.ok_or_else(|| bad("truncated"))?
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| CodeError::Alist(e.to_string())))
                .collect()
        };
        let dims = nums(lines.next())?;
        let [cols, rows] = dims[..] else { return Err(bad("first line must hold N M")) };
        nums(lines.next())?;
        let col_w = nums(lines.next())?;
        let row_w = nums(lines.next())?;
        if col_w.len() != cols || row_w.len() != rows {
            return Err(bad("weight line length"));
        }
        let mut from_cols = Vec::new();
        for (c, &w) in col_w.iter().enumerate() {
            let list = nums(lines.next())?;
            let idx: Vec<usize> = list.into_iter().filter(|&i| i != 0).collect();
            if idx.len() != w {
                return Err(bad("column list disagrees with its weight"));
            }
            from_cols.extend(idx.into_iter().map(|r| (r - 1, c)));
        }
        let mut from_rows = Vec::new();
        for (r, &w) in row_w.iter().enumerate() {
            let idx: Vec<usize> = nums(lines.next())?.into_iter().filter(|&i| i != 0).collect();
            if idx.len() != w {
                return Err(bad("row list disagrees with its weight"));
            }
            from_rows.extend(idx.into_iter().map(|c| (r, c - 1)));
        }
        let h = Self::from_positions(rows, cols, from_rows)?;
        let mut check: Vec<(usize, usize)> = from_cols;
        check.sort_unstable();
        let mut mine: Vec<(usize, usize)> = h.positions().collect();
        mine.sort_unstable();
        if check != mine {
            return Err(bad("row and column lists describe different matrices"));
        }
        Ok(h)
    }
}

/// Circulant permutation matrix of exponent `s`, or the zero block for `None`.
pub fn binary_dispersion(exponent: Option<usize>, sigma: usize) -> ParityCheckMatrix {
    let m = sigma - 1;
    let ones: Vec<(usize, usize)> = match exponent {
        Some(s) => (0..m).map(|r| (r, (s + r) % m)).collect(),
        None => Vec::new(),
    };
    let mut out = ParityCheckMatrix::from_positions(m, m, ones).expect("in range");
    out.circulant = Some(m);
    out
}

/// Replaces every exponent by its dispersion; fails if the result has 4-cycles.
pub fn expand(b: &BaseMatrix) -> Result<ParityCheckMatrix, CodeError> {
    let m = b.circulant();
    let mut ones = Vec::new();
    for (i, row) in b.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if let Some(s) = e {
                ones.extend((0..m).map(|r| (i * m + r, j * m + (s + r) % m)));
            }
        }
    }
    let mut h = ParityCheckMatrix::from_positions(b.rows() * m, b.cols() * m, ones)?;
    h.circulant = Some(m);
    if !girth_check(&h) {
        return Err(CodeError::RcViolation);
    }
    Ok(h)
}

/// The top-left `λc × μr` array of circulant blocks.
pub fn subarray(hb: &ParityCheckMatrix, lambda_c: usize, mu_r: usize) -> Result<ParityCheckMatrix, CodeError> {
    let m = hb.circulant.ok_or_else(|| CodeError::Dimension("matrix has no circulant structure".into()))?;
    let (rows, cols) = (hb.rows / m, hb.cols / m);
    if lambda_c == 0 || mu_r == 0 || lambda_c > rows || mu_r > cols {
        return Err(CodeError::SubarrayOutOfRange { lambda_c, mu_r, rows, cols });
    }
    Ok(hb.slice(0, lambda_c * m, 0, mu_r * m))
}

/// True iff no two rows share ones in two or more columns (no 4-cycles, girth ≥ 6).
pub fn girth_check(h: &ParityCheckMatrix) -> bool {
    let mut hits = vec![usize::MAX; h.rows];
    for r in 0..h.rows {
        for &c in h.row(r) {
            for &r2 in h.col(c) {
                if r2 > r {
                    if hits[r2] == r {
                        return false;
                    }
                    hits[r2] = r;
                }
            }
        }
    }
    true
}

/// Block counts for carving the joint matrix out of an expanded array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointLayout {
    pub lambda_c1: usize,
    pub lambda_c2: usize,
    pub lambda_c3: usize,
    pub mu_r: usize,
}

impl Default for JointLayout {
    fn default() -> Self {
        Self { lambda_c1: 1, lambda_c2: 1, lambda_c3: 1, mu_r: 10 }
    }
}

/// The four component matrices: `H¹`, `H²`, `H³` over the information
/// columns, and the square relay block `H³_sq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointComponents {
    pub h1: ParityCheckMatrix,
    pub h2: ParityCheckMatrix,
    pub h3_left: ParityCheckMatrix,
    pub h3_right: ParityCheckMatrix,
}

/// Takes consecutive block rows `λc₁`, `λc₂`, `λc₃` of the array over the
/// first `μr` block columns, and the relay block from the next `λc₃` block
/// columns of the third group.
pub fn joint_components(hb: &ParityCheckMatrix, layout: &JointLayout) -> Result<JointComponents, CodeError> {
    let m = hb.circulant.ok_or_else(|| CodeError::Dimension("matrix has no circulant structure".into()))?;
    let JointLayout { lambda_c1: a, lambda_c2: b, lambda_c3: c, mu_r } = *layout;
    let (rows, cols) = (hb.rows / m, hb.cols / m);
    if a == 0 || b == 0 || c == 0 || a + b + c > rows || mu_r == 0 || mu_r + c > cols {
        return Err(CodeError::SubarrayOutOfRange { lambda_c: a + b + c, mu_r: mu_r + c, rows, cols });
    }
    let n = mu_r * m;
    Ok(JointComponents {
        h1: hb.slice(0, a * m, 0, n),
        h2: hb.slice(a * m, (a + b) * m, 0, n),
        h3_left: hb.slice((a + b) * m, (a + b + c) * m, 0, n),
        h3_right: hb.slice((a + b) * m, (a + b + c) * m, n, n + c * m),
    })
}

/// `[H¹ 0; H² 0; H³ H³_sq]` with its block sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointMatrix {
    pub matrix: ParityCheckMatrix,
    pub j1: usize,
    pub j2: usize,
    pub j3: usize,
    pub n: usize,
}

pub fn joint_parity_matrix(
    h1: &ParityCheckMatrix,
    h2: &ParityCheckMatrix,
    h3_left: &ParityCheckMatrix,
    h3_right: &ParityCheckMatrix,
) -> Result<JointMatrix, CodeError> {
    let n = h1.cols;
    if h2.cols != n || h3_left.cols != n {
        return Err(CodeError::Dimension("H¹, H², H³ must share their column count".into()));
    }
    let j3 = h3_left.rows;
    if h3_right.rows != j3 || h3_right.cols != j3 {
        return Err(CodeError::Dimension(format!("relay block must be {j3}×{j3}")));
    }
    if h3_right.to_dense().inverse().is_none() {
        return Err(CodeError::SingularRelayBlock);
    }
    let (j1, j2) = (h1.rows, h2.rows);
    let ones = h1
        .positions()
        .chain(h2.positions().map(|(r, c)| (r + j1, c)))
        .chain(h3_left.positions().map(|(r, c)| (r + j1 + j2, c)))
        .chain(h3_right.positions().map(|(r, c)| (r + j1 + j2, c + n)));
    let mut matrix = ParityCheckMatrix::from_positions(j1 + j2 + j3, n + j3, ones.collect::<Vec<_>>())?;
    matrix.circulant = h1.circulant;
    Ok(JointMatrix { matrix, j1, j2, j3, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{cbsec_from_triples, triples_from_sequence, LangfordSequence};

    fn demo_design() -> CbsecDesign {
        let seq = LangfordSequence { order: 5, defect: 1, hooked: false, entries: vec![2, 4, 2, 3, 5, 4, 3, 1, 1, 5] };
        cbsec_from_triples(&triples_from_sequence(&seq), 31, 0).unwrap()
    }

    #[test]
    fn prime_powers() {
        let pp: Vec<usize> = (0..33).filter(|&n| is_prime_power(n)).collect();
        assert_eq!(pp, vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32]);
        assert_eq!(field_size_for(31), 32);
        assert_eq!(field_size_for(25), 27);
    }

    #[test]
    fn demo_base_matrix_layout() {
        let b = base_matrix(&demo_design(), 32).unwrap();
        assert_eq!((b.rows(), b.cols()), (6, 15));
        assert_eq!(&b.entries[0][..3], &[Some(0), Some(1), Some(14)]);
        // Second row of the first circulant is the first row shifted right.
        assert_eq!(&b.entries[1][..3], &[Some(14), Some(0), Some(1)]);
        // Negation of {0, 1, 14} mod 31; the first translate is zero.
        assert_eq!(b.translates[0], 0);
        assert_eq!(&b.entries[3][..3], &[Some(0), Some(30), Some(17)]);
        assert_eq!(b.translates, vec![0, 5, 8, 17, 24]);
    }

    #[test]
    fn plain_negation_has_four_cycles() {
        let d = demo_design();
        assert!(!exponents_rc_free(&assemble(&d, &[0, 0, 0, 0, 0]), 31));
    }

    #[test]
    fn field_errors() {
        let d = demo_design();
        assert_eq!(base_matrix(&d, 31), Err(CodeError::FieldTooSmall { sigma: 31, omega: 31 }));
        assert_eq!(base_matrix(&d, 33), Err(CodeError::NotPrimePower(33)));
    }

    #[test]
    fn dispersion_blocks() {
        assert_eq!(
            binary_dispersion(Some(0), 8).positions().collect::<Vec<_>>(),
            ParityCheckMatrix::identity(7).positions().collect::<Vec<_>>()
        );
        let shift = binary_dispersion(Some(1), 4);
        assert_eq!(shift.positions().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 0)]);
        for e in 0..7 {
            let d = binary_dispersion(Some(e), 8);
            assert!((0..7).all(|i| d.row(i).len() == 1 && d.col(i).len() == 1));
        }
        assert_eq!(binary_dispersion(None, 8).ones(), 0);
    }

    #[test]
    fn trivial_expansion_is_identity() {
        let b = BaseMatrix { entries: vec![vec![Some(0)]], f: 1, w: 1, omega: 7, sigma: 8, translates: vec![] };
        let h = expand(&b).unwrap();
        assert_eq!(h.positions().collect::<Vec<_>>(), ParityCheckMatrix::identity(7).positions().collect::<Vec<_>>());
    }

    #[test]
    fn girth_small_cases() {
        let full = ParityCheckMatrix::from_positions(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!(!girth_check(&full));
        assert!(girth_check(&ParityCheckMatrix::identity(5)));
    }

    #[test]
    fn subarray_dimensions() {
        let h = expand(&base_matrix(&demo_design(), 32).unwrap()).unwrap();
        let s = subarray(&h, 1, 2).unwrap();
        assert_eq!((s.rows(), s.cols()), (31, 62));
        assert_eq!(subarray(&h, 6, 15).unwrap(), h);
        assert!(subarray(&h, 7, 1).is_err());
    }

    #[test]
    fn joint_demo_dimensions() {
        let h = expand(&base_matrix(&demo_design(), 32).unwrap()).unwrap();
        let parts = joint_components(&h, &JointLayout::default()).unwrap();
        let j = joint_parity_matrix(&parts.h1, &parts.h2, &parts.h3_left, &parts.h3_right).unwrap();
        assert_eq!((j.matrix.rows(), j.matrix.cols()), (93, 341));
        assert_eq!((j.j1, j.j2, j.j3, j.n), (31, 31, 31, 310));
        assert!(j.matrix.positions().all(|(r, c)| !(r < 62 && c >= 310)));
        assert!(girth_check(&j.matrix));
    }

    #[test]
    fn singular_relay_block_is_rejected() {
        let h = ParityCheckMatrix::from_positions(1, 2, [(0, 0), (0, 1)]).unwrap();
        let zero = ParityCheckMatrix::from_positions(1, 1, []).unwrap();
        assert_eq!(joint_parity_matrix(&h, &h, &h, &zero), Err(CodeError::SingularRelayBlock));
    }

    #[test]
    fn alist_round_trip() {
        let h = expand(&base_matrix(&demo_design(), 32).unwrap()).unwrap();
        let text = h.to_alist();
        assert!(text.starts_with("465 186\n6 15\n"));
        let back = ParityCheckMatrix::from_alist(&text).unwrap();
        assert_eq!(back.positions().collect::<Vec<_>>(), h.positions().collect::<Vec<_>>());
        assert!(ParityCheckMatrix::from_alist("3 2\n1 1\n1 1 1\n").is_err());
    }
}
