// Copyright contributors to the weakrot project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Packed binary vectors and matrices over GF(2).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A binary vector of fixed length, packed into 64-bit words.
///
/// Bits past `len` in the last word are always zero, so word-wise
/// equality and hashing agree with GF(2) equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.mask_tail();
        v
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from the low `len` bits of `value` (bit i = qubit i).
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.mask_tail();
        }
        v
    }

    /// Low 64 bits as an integer (bit i = entry i).
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    fn mask_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of the nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * WORD + b);
                w &= w - 1;
            }
        }
        out
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
    }

    pub fn xor_assign(&mut self, other: &Self) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn or(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn and_not(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn not(&self) -> Self {
        let mut out = Self {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.mask_tail();
        out
    }

    /// Size of the overlap `|self ∧ other|`.
    pub fn and_weight(&self, other: &Self) -> usize {
        self.check_len(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> bool {
        self.and_weight(other) % 2 == 1
    }

    /// Keeps the listed entries, in the listed order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(indices.len());
        for (j, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.set(j, true);
            }
        }
        out
    }

    /// Inverse of [`BitVec::restrict`]: scatters `self` into a vector of length `len`.
    pub fn expand(&self, len: usize, indices: &[usize]) -> Self {
        assert_eq!(indices.len(), self.len);
        let mut out = Self::zeros(len);
        for (j, &i) in indices.iter().enumerate() {
            if self.get(j) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for i in self.support() {
            out.set(i, true);
        }
        for i in other.support() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut v = Self::zeros(s.chars().count());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        column: i + 1,
                        message: format!("expected 0 or 1, found {c:?}"),
                    })
                }
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Row-major binary matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

/// Output of [`BitMatrix::rref_with_transform`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrefResult {
    pub rref: BitMatrix,
    pub pivot_cols: Vec<usize>,
    /// Row operations applied: `transform * input == rref`.
    pub transform: BitMatrix,
}

impl RrefResult {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Builds a matrix from rows that all have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length does not match column count");
        }
        Self { cols, rows }
    }

    /// Parses rows of `0`/`1` characters.
    pub fn from_strs(rows: &[&str]) -> Result<Self, Error> {
        let parsed: Vec<BitVec> = rows.iter().map(|r| r.parse()).collect::<Result<_, _>>()?;
        let cols = parsed.first().map_or(0, BitVec::len);
        if parsed.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("rows have unequal lengths".into()));
        }
        Ok(Self { cols, rows: parsed })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.support() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows.len(), "inner dimension mismatch");
        let mut out = Self::zeros(self.rows.len(), other.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for k in row.support() {
                out.rows[r].xor_assign(&other.rows[k]);
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    /// Row combination `Σ c_i row_i`.
    pub fn combine_rows(&self, coeffs: &BitVec) -> BitVec {
        assert_eq!(coeffs.len(), self.rows.len());
        let mut out = BitVec::zeros(self.cols);
        for i in coeffs.support() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    /// Gauss-Jordan elimination, recording the row operations.
    pub fn rref_with_transform(&self) -> RrefResult {
        let mut a = self.clone();
        let mut t = Self::identity(self.rows.len());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == a.rows.len() {
                break;
            }
            let Some(p) = (r..a.rows.len()).find(|&i| a.rows[i].get(c)) else {
                continue;
            };
            a.rows.swap(r, p);
            t.rows.swap(r, p);
            for i in 0..a.rows.len() {
                if i != r && a.rows[i].get(c) {
                    let (pr, tr) = (a.rows[r].clone(), t.rows[r].clone());
                    a.rows[i].xor_assign(&pr);
                    t.rows[i].xor_assign(&tr);
                }
            }
            pivots.push(c);
            r += 1;
        }
        RrefResult {
            rref: a,
            pivot_cols: pivots,
            transform: t,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref_with_transform().rank()
    }

    /// Basis of `{v : self * v = 0}`.
    pub fn kernel(&self) -> Vec<BitVec> {
        let res = self.rref_with_transform();
        let mut is_pivot = vec![false; self.cols];
        for &p in &res.pivot_cols {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for (i, &p) in res.pivot_cols.iter().enumerate() {
                if res.rref.rows[i].get(f) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Finds `c` with `Σ c_i row_i = v`, if `v` is in the row space.
    pub fn solve_rows(&self, v: &BitVec) -> Option<BitVec> {
        self.rref_with_transform().solve_rows(v)
    }

    /// Vertical stack.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Self {
            cols: self.cols,
            rows,
        }
    }

    /// Selects a maximal independent subset of rows, keeping the first occurrences.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut basis: Vec<(usize, BitVec)> = Vec::new();
        let mut keep = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let mut v = row.clone();
            for (p, b) in &basis {
                if v.get(*p) {
                    v.xor_assign(b);
                }
            }
            if let Some(p) = v.support().first().copied() {
                for (_, b) in basis.iter_mut() {
                    if b.get(p) {
                        b.xor_assign(&v);
                    }
                }
                basis.push((p, v));
                keep.push(i);
            }
        }
        keep
    }
}

impl RrefResult {
    /// Coefficients over the original rows that reproduce `v`, if any.
    pub fn solve_rows(&self, v: &BitVec) -> Option<BitVec> {
        let mut rem = v.clone();
        let mut a = BitVec::zeros(self.rref.num_rows());
        for (i, &p) in self.pivot_cols.iter().enumerate() {
            if rem.get(p) {
                rem.xor_assign(self.rref.row(i));
                a.set(i, true);
            }
        }
        if !rem.is_zero() {
            return None;
        }
        let mut c = BitVec::zeros(self.transform.num_cols());
        for j in a.support() {
            c.xor_assign(self.transform.row(j));
        }
        Some(c)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_small_example() {
        let m = BitMatrix::from_strs(&["110", "011"]).unwrap();
        let res = m.rref_with_transform();
        assert_eq!(res.rref, BitMatrix::from_strs(&["101", "011"]).unwrap());
        assert_eq!(res.pivot_cols, vec![0, 1]);
        assert_eq!(res.transform.mul(&m), res.rref);
    }

    #[test]
    fn rref_identity_and_zero() {
        let id = BitMatrix::identity(4);
        let res = id.rref_with_transform();
        assert_eq!(res.rref, id);
        assert_eq!(res.transform, id);
        assert_eq!(res.pivot_cols, vec![0, 1, 2, 3]);

        let z = BitMatrix::zeros(2, 3);
        let res = z.rref_with_transform();
        assert!(res.rref.is_zero());
        assert!(res.pivot_cols.is_empty());
    }

    #[test]
    fn kernel_is_annihilated() {
        let m = BitMatrix::from_strs(&["1101000", "0110100", "0011010"]).unwrap();
        let ker = m.kernel();
        assert_eq!(ker.len(), 4);
        for v in &ker {
            assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn solve_rows_roundtrip() {
        let m = BitMatrix::from_strs(&["1100", "0110", "1111"]).unwrap();
        let v: BitVec = "1010".parse().unwrap();
        let c = m.solve_rows(&v).unwrap();
        assert_eq!(m.combine_rows(&c), v);
        assert!(m.solve_rows(&"1000".parse().unwrap()).is_none());
    }

    #[test]
    fn tail_bits_stay_clear() {
        let v = BitVec::ones(70);
        assert_eq!(v.weight(), 70);
        assert_eq!(v.not().weight(), 0);
    }
}
