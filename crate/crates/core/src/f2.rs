//! Exact linear algebra over the two-element field.
//!
//! Vectors and matrix rows are bit-packed into `u64` words. Row reduction
//! scans columns left to right and takes the lowest-indexed unused row with
//! a one in the current column as the pivot, so every derived quantity
//! (kernel bases, solutions, homology representatives) is reproducible.

use std::fmt;
use std::ops::{Add, AddAssign};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Vector {
    len: usize,
    words: Vec<u64>,
}

impl F2Vector {
    pub fn zeros(len: usize) -> Self {
        F2Vector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, e.g. `"101"`.
    pub fn from_bit_str(s: &str) -> Self {
        let bits: Vec<bool> = s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1').collect();
        Self::from_bools(&bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for vector of length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "index {i} out of range for vector of length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of the nonzero coordinates, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn dot(&self, other: &F2Vector) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &F2Vector) -> F2Vector {
        let mut v = F2Vector::zeros(self.len + other.len);
        for i in self.ones() {
            v.set(i, true);
        }
        for i in other.ones() {
            v.set(self.len + i, true);
        }
        v
    }

    /// The coordinates in `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> F2Vector {
        assert!(start + len <= self.len);
        let mut v = F2Vector::zeros(len);
        for i in self.ones().filter(|&i| i >= start && i < start + len) {
            v.set(i - start, true);
        }
        v
    }

    fn xor_words(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a ^= b;
        }
    }
}

impl AddAssign<&F2Vector> for F2Vector {
    fn add_assign(&mut self, rhs: &F2Vector) {
        assert_eq!(self.len, rhs.len, "vector length mismatch");
        self.xor_words(&rhs.words);
    }
}

impl Add for &F2Vector {
    type Output = F2Vector;
    fn add(self, rhs: &F2Vector) -> F2Vector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Vector(")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

/// Returned by [`F2Matrix::solve`] when the right-hand side is not in the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("right-hand side is not in the image of the matrix")]
pub struct NoSolution;

/// A dense, row-major, bit-packed matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        F2Matrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from the positions holding a one. Repeated positions
    /// cancel, as in any sum over GF(2).
    pub fn from_entries<I>(rows: usize, cols: usize, entries: I) -> Result<Self, (usize, usize)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::zeros(rows, cols);
        for (r, c) in entries {
            if r >= rows || c >= cols {
                return Err((r, c));
            }
            m.flip(r, c);
        }
        Ok(m)
    }

    /// Rows written as bit strings, e.g. `&["110", "011"]`.
    pub fn from_rows_str(rows: &[&str]) -> Self {
        let parsed: Vec<F2Vector> = rows.iter().map(|r| F2Vector::from_bit_str(r)).collect();
        let cols = parsed.first().map_or(0, |r| r.len());
        Self::from_row_vectors(cols, &parsed)
    }

    pub fn from_row_vectors(cols: usize, rows: &[F2Vector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.row_words_mut(i).copy_from_slice(&r.words);
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[F2Vector]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in c.ones() {
                m.set(i, j, true);
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

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        if src == dst {
            return;
        }
        let (s, d) = (src * self.stride, dst * self.stride);
        for k in 0..self.stride {
            let v = self.data[s + k];
            self.data[d + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    pub fn row(&self, r: usize) -> F2Vector {
        F2Vector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn column(&self, c: usize) -> F2Vector {
        let mut v = F2Vector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn columns(&self) -> Vec<F2Vector> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    /// Positions holding a one, in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            let row = F2Vector {
                len: self.cols,
                words: self.row_words(r).to_vec(),
            };
            out.extend(row.ones().map(|c| (r, c)));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.cols, self.rows);
        for (r, c) in self.entries() {
            t.set(c, r, true);
        }
        t
    }

    /// Matrix product; panics when the inner dimensions differ.
    pub fn mul(&self, rhs: &F2Matrix) -> F2Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = F2Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for k in row.ones() {
                let (o, s) = (r * out.stride, k * rhs.stride);
                for w in 0..rhs.stride {
                    out.data[o + w] ^= rhs.data[s + w];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &F2Vector) -> F2Vector {
        assert_eq!(self.cols, v.len());
        let mut out = F2Vector::zeros(self.rows);
        for r in 0..self.rows {
            let bit = self
                .row_words(r)
                .iter()
                .zip(&v.words)
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            if bit == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &F2Matrix) -> F2Matrix {
        assert_eq!(self.rows, rhs.rows);
        let mut out = F2Matrix::zeros(self.rows, self.cols + rhs.cols);
        for (r, c) in self.entries() {
            out.set(r, c, true);
        }
        for (r, c) in rhs.entries() {
            out.set(r, self.cols + c, true);
        }
        out
    }

    /// `self` on top of `rhs`.
    pub fn vstack(&self, rhs: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, rhs.cols);
        let mut out = F2Matrix::zeros(self.rows + rhs.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&rhs.data);
        out
    }

    /// The submatrix picking the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> F2Matrix {
        let mut out = F2Matrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn row_reduce(&self) -> RowReduction {
        RowReduction::new(self)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in rank + 1..m.rows {
                if m.get(r, c) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    /// A basis of `{x : self * x = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<F2Vector> {
        self.row_reduce().kernel_basis()
    }

    /// The pivot columns of `self`, which form a basis of its column space.
    pub fn image_basis(&self) -> Vec<F2Vector> {
        self.row_reduce().pivots().iter().map(|&c| self.column(c)).collect()
    }

    /// Some `x` with `self * x = b`; free variables are set to zero.
    pub fn solve(&self, b: &F2Vector) -> Result<F2Vector, NoSolution> {
        self.row_reduce().solve(b)
    }
}

impl AddAssign<&F2Matrix> for F2Matrix {
    fn add_assign(&mut self, rhs: &F2Matrix) {
        assert_eq!(self.shape(), rhs.shape(), "matrix shape mismatch in addition");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a ^= b;
        }
    }
}

impl Add for &F2Matrix {
    type Output = F2Matrix;
    fn add(self, rhs: &F2Matrix) -> F2Matrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            for c in 0..self.cols {
                write!(f, "{}", if self.get(r, c) { '1' } else { '0' })?;
            }
        }
        write!(f, "]")
    }
}

/// Reduced row echelon form of a matrix together with the row operations
/// that produced it, so that several right-hand sides can be solved
/// against one reduction.
#[derive(Clone, Debug)]
pub struct RowReduction {
    rref: F2Matrix,
    /// `transform * original = rref`.
    transform: F2Matrix,
    pivots: Vec<usize>,
}

impl RowReduction {
    pub fn new(m: &F2Matrix) -> Self {
        let mut rref = m.clone();
        let mut transform = F2Matrix::identity(m.rows);
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..m.cols {
            if next == m.rows {
                break;
            }
            let Some(p) = (next..m.rows).find(|&r| rref.get(r, c)) else {
                continue;
            };
            rref.swap_rows(next, p);
            transform.swap_rows(next, p);
            for r in 0..m.rows {
                if r != next && rref.get(r, c) {
                    rref.xor_row_into(next, r);
                    transform.xor_row_into(next, r);
                }
            }
            pivots.push(c);
            next += 1;
        }
        RowReduction {
            rref,
            transform,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rref(&self) -> &F2Matrix {
        &self.rref
    }

    pub fn kernel_basis(&self) -> Vec<F2Vector> {
        let cols = self.rref.cols;
        let mut is_pivot = vec![false; cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = F2Vector::unit(cols, free);
                for (row, &p) in self.pivots.iter().enumerate() {
                    if self.rref.get(row, free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    pub fn solve(&self, b: &F2Vector) -> Result<F2Vector, NoSolution> {
        assert_eq!(b.len(), self.rref.rows, "right-hand side has the wrong length");
        let reduced = self.transform.mul_vec(b);
        if reduced.ones().any(|r| r >= self.rank()) {
            return Err(NoSolution);
        }
        let mut x = F2Vector::zeros(self.rref.cols);
        for (row, &p) in self.pivots.iter().enumerate() {
            if reduced.get(row) {
                x.set(p, true);
            }
        }
        Ok(x)
    }
}

/// Dimension of the span of the given vectors (all of length `len`).
pub fn span_dim(len: usize, vectors: &[F2Vector]) -> usize {
    F2Matrix::from_row_vectors(len, vectors).rank()
}
