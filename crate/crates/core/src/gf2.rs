//! Bit strings and matrices over GF(2).
//!
//! Bits are packed little-endian into `u64` words: bit `i` of a string lives
//! in word `i / 64` at position `i % 64`. The textual form writes bit 0 first,
//! so `"0110"` has bits 1 and 2 set.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length string of bits with XOR addition and parity dot product.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.clear_tail();
        s
    }

    /// The weight-one string with bit `i` set.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut s = Self::zeros(len);
        s.set(i, true);
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut s = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Builds a string of length `len` from the low bits of `value`, bit `i`
    /// of the string taken from bit `i` of the integer.
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = value;
            s.clear_tail();
        }
        s
    }

    /// Inverse of [`BitString::from_u64`]; panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = rng.gen();
        }
        s.clear_tail();
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    fn check_len(&self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Dimension {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitString) -> BitString {
        assert_eq!(self.len, other.len, "and of unequal lengths");
        BitString {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn or(&self, other: &BitString) -> BitString {
        assert_eq!(self.len, other.len, "or of unequal lengths");
        BitString {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    /// Checked XOR for public APIs that take caller-supplied strings.
    pub fn try_xor(&self, other: &BitString) -> Result<BitString> {
        self.check_len(other)?;
        Ok(self.xor(other))
    }

    /// Parity of the bitwise AND, i.e. the dot product mod 2.
    pub fn dot(&self, other: &BitString) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn try_dot(&self, other: &BitString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.dot(other))
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        BitString::from_bits(self.iter().chain(other.iter()))
    }

    /// Substring `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        BitString::from_bits((start..start + len).map(|i| self.get(i)))
    }

    pub fn select(&self, positions: &[usize]) -> BitString {
        BitString::from_bits(positions.iter().map(|&i| self.get(i)))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' | ' ' => {}
                other => return Err(Error::Parse(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(BitString::from_bits(bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Convenience for tests and literals: `bits("0110")`.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("invalid bit literal")
}

/// A dense binary matrix stored as a list of row bit strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    cols: usize,
    rows: Vec<BitString>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            cols,
            rows: vec![BitString::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BinaryMatrix {
            cols: n,
            rows: (0..n).map(|i| BitString::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitString>) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Ok(BinaryMatrix { cols, rows })
    }

    /// Parses rows of `0`/`1` characters; all rows must share a length.
    pub fn from_strs(cols: usize, rows: &[&str]) -> Result<Self> {
        let rows = rows.iter().map(|r| r.parse()).collect::<Result<Vec<BitString>>>()?;
        Self::from_rows(cols, rows)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitString {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.ones_positions() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    /// `M · vᵀ`: one output bit per row.
    pub fn mul_vec(&self, v: &BitString) -> Result<BitString> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(BitString::from_bits(self.rows.iter().map(|r| r.dot(v))))
    }

    /// `v · M`: XOR of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BitString) -> Result<BitString> {
        if v.len() != self.rows.len() {
            return Err(Error::Dimension {
                expected: self.rows.len(),
                found: v.len(),
            });
        }
        let mut out = BitString::zeros(self.cols);
        for i in v.ones_positions() {
            out.xor_assign(&self.rows[i]);
        }
        Ok(out)
    }

    /// Matrix product `self · otherᵀ`, convenient for checking `G·Hᵀ = 0`.
    pub fn mul_transpose(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.cols,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| BitString::from_bits(other.rows.iter().map(|o| r.dot(o))))
            .collect();
        Ok(BinaryMatrix {
            cols: other.rows.len(),
            rows,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitString::is_zero)
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (BinaryMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        (
            BinaryMatrix {
                cols: self.cols,
                rows,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : M·vᵀ = 0}` as the rows of the returned matrix.
    pub fn null_space(&self) -> BinaryMatrix {
        let (reduced, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitString::unit(self.cols, free);
            for (row, &p) in reduced.rows.iter().zip(&pivots) {
                if row.get(free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        BinaryMatrix {
            cols: self.cols,
            rows: basis,
        }
    }

    /// True when `v` lies in the row space.
    pub fn row_space_contains(&self, v: &BitString) -> bool {
        RowSolver::new(self).coordinates(v).is_some()
    }

    pub fn vstack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BinaryMatrix {
            cols: self.cols,
            rows,
        })
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// Solves `a · M = v` for the coefficient row `a`, for matrices with
/// linearly independent rows. Elimination is done once at construction.
#[derive(Clone, Debug)]
pub struct RowSolver {
    reduced: Vec<(usize, BitString, BitString)>,
    num_rows: usize,
}

impl RowSolver {
    pub fn new(m: &BinaryMatrix) -> Self {
        let k = m.num_rows();
        // (row, combination of original rows that produced it)
        let mut work: Vec<(BitString, BitString)> = m
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), BitString::unit(k, i)))
            .collect();
        let mut reduced = Vec::new();
        let mut next = 0;
        for c in 0..m.num_cols() {
            let Some(p) = (next..work.len()).find(|&i| work[i].0.get(c)) else {
                continue;
            };
            work.swap(next, p);
            let (prow, pcomb) = work[next].clone();
            for (i, (row, comb)) in work.iter_mut().enumerate() {
                if i != next && row.get(c) {
                    row.xor_assign(&prow);
                    comb.xor_assign(&pcomb);
                }
            }
            next += 1;
        }
        for (row, comb) in work.into_iter().take(next) {
            let pivot = row.ones_positions().next().expect("nonzero reduced row");
            reduced.push((pivot, row, comb));
        }
        RowSolver {
            reduced,
            num_rows: k,
        }
    }

    pub fn rank(&self) -> usize {
        self.reduced.len()
    }

    /// Coefficients expressing `v` in the rows, or `None` if `v` is outside
    /// the row space. Unique when the rows are independent.
    pub fn coordinates(&self, v: &BitString) -> Option<BitString> {
        let mut rest = v.clone();
        let mut coef = BitString::zeros(self.num_rows);
        for (pivot, row, comb) in &self.reduced {
            if rest.get(*pivot) {
                rest.xor_assign(row);
                coef.xor_assign(comb);
            }
        }
        rest.is_zero().then_some(coef)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let s = bits("1101001");
        assert_eq!(s.len(), 7);
        assert_eq!(s.to_string(), "1101001");
        assert!(s.get(0) && s.get(1) && !s.get(2));
        assert!("10x".parse::<BitString>().is_err());
    }

    #[test]
    fn dot_and_weight_cross_word_boundary() {
        let mut a = BitString::zeros(130);
        let mut b = BitString::zeros(130);
        for i in [0, 63, 64, 129] {
            a.set(i, true);
        }
        for i in [63, 64, 100] {
            b.set(i, true);
        }
        assert_eq!(a.weight(), 4);
        assert!(!a.dot(&b));
        b.set(129, true);
        assert!(a.dot(&b));
        assert_eq!(BitString::ones(130).weight(), 130);
    }

    #[test]
    fn mismatched_lengths_are_dimension_errors() {
        let a = bits("101");
        let b = bits("10");
        assert!(matches!(a.try_xor(&b), Err(Error::Dimension { .. })));
        assert!(a.try_dot(&b).is_err());
    }

    #[test]
    fn rank_and_null_space() {
        let m = BinaryMatrix::from_strs(4, &["1100", "0110", "1010"]).unwrap();
        assert_eq!(m.rank(), 2);
        let ns = m.null_space();
        assert_eq!(ns.num_rows(), 2);
        assert!(m.mul_transpose(&ns).unwrap().is_zero());
    }

    #[test]
    fn row_solver_recovers_coefficients() {
        let m = BinaryMatrix::from_strs(5, &["10110", "01011", "00111"]).unwrap();
        let solver = RowSolver::new(&m);
        for a in 0..8u64 {
            let coef = BitString::from_u64(3, a);
            let v = m.vec_mul(&coef).unwrap();
            assert_eq!(solver.coordinates(&v), Some(coef));
        }
        assert_eq!(solver.coordinates(&bits("10000")), None);
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = BinaryMatrix::from_strs(3, &["110", "011"]).unwrap();
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.mul_vec(&bits("110")).unwrap(), bits("01"));
    }
}
