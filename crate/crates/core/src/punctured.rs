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

//! Classical decoding of rotation-term syndromes.
//!
//! Each term `P_m` of a rotation layer flips the generators it anticommutes
//! with. Restricting the check matrix to those generators gives a classical
//! code on the terms; its minimum-weight decoder yields the correction
//! pattern and its weight `χ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliOp;

/// Default cap on materialized tables, in bits of support.
pub const DEFAULT_TABLE_CAP: usize = 25;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PuncturedCode {
    /// Qubits touched by the terms, ascending.
    pub support: Vec<usize>,
    pub terms: Vec<PauliOp>,
    /// Indices of the generators that see at least one term.
    pub check_generators: Vec<usize>,
    /// Rows: `check_generators`; columns: terms.
    pub check_matrix: BitMatrix,
    /// Rows of `check_matrix` forming a basis of its row space; the syndrome
    /// bits on these rows determine the whole syndrome.
    key_rows: Vec<usize>,
    /// Key of each term's column.
    column_keys: Vec<u64>,
    /// `key -> pattern`, `u32::MAX` where no pattern was found.
    #[serde(skip)]
    table: Option<Vec<u32>>,
}

/// A decoded syndrome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    /// Terms to apply as the correction.
    pub pattern: BitVec,
    pub chi: usize,
}

impl PuncturedCode {
    /// Decoder for the single-qubit components of `target`.
    pub fn for_target(code: &StabilizerCode, target: &PauliOp) -> Result<Self> {
        let terms = target
            .support()
            .into_iter()
            .map(|q| target.mask(&BitVec::from_indices(target.num_qubits(), &[q])))
            .collect();
        Self::from_terms(code, terms, DEFAULT_TABLE_CAP)
    }

    /// Decoder over arbitrary commuting terms.
    pub fn from_terms(code: &StabilizerCode, terms: Vec<PauliOp>, cap: usize) -> Result<Self> {
        let m = terms.len();
        if m > 63 {
            return Err(Error::CapExceeded(format!("{m} terms exceed 63")));
        }
        let mut mask = BitVec::zeros(code.n());
        for t in &terms {
            if t.num_qubits() != code.n() {
                return Err(Error::LengthMismatch {
                    left: t.num_qubits(),
                    right: code.n(),
                });
            }
            mask = mask.or(&t.support_mask());
        }
        let mut check_generators = Vec::new();
        let mut rows = Vec::new();
        for (gi, g) in code.generators().iter().enumerate() {
            let mut row = BitVec::zeros(m);
            for (ti, t) in terms.iter().enumerate() {
                if g.anticommutes(t) {
                    row.set(ti, true);
                }
            }
            if !row.is_zero() {
                check_generators.push(gi);
                rows.push(row);
            }
        }
        let check_matrix = BitMatrix::from_rows(m, rows);
        let key_rows = check_matrix.independent_rows();
        let mut column_keys = vec![0u64; m];
        for (bit, &r) in key_rows.iter().enumerate() {
            for t in check_matrix.row(r).support() {
                column_keys[t] |= 1 << bit;
            }
        }
        let mut pc = Self {
            support: mask.support(),
            terms,
            check_generators,
            check_matrix,
            key_rows,
            column_keys,
            table: None,
        };
        if pc.support.len() <= cap && pc.key_rows.len() <= cap {
            pc.table = Some(pc.build_table());
        }
        Ok(pc)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    /// Key of a pattern's syndrome.
    pub fn pattern_key(&self, pattern: u64) -> u64 {
        let mut key = 0;
        let mut p = pattern;
        while p != 0 {
            let t = p.trailing_zeros() as usize;
            key ^= self.column_keys[t];
            p &= p - 1;
        }
        key
    }

    fn key_of_syndrome(&self, syndrome: &BitVec) -> u64 {
        let mut key = 0;
        for (bit, &r) in self.key_rows.iter().enumerate() {
            if syndrome.get(r) {
                key |= 1 << bit;
            }
        }
        key
    }

    /// Syndrome (over `check_generators`) of a term pattern.
    pub fn syndrome_of(&self, pattern: &BitVec) -> BitVec {
        self.check_matrix.mul_vec(pattern)
    }

    /// Weight-ordered search; the first hit in lexicographic order wins.
    fn search(&self, key: u64) -> Option<u64> {
        let m = self.terms.len();
        for w in 0..=m {
            let mut found = None;
            for_each_combination(m, w, |p| {
                if found.is_none() && self.pattern_key(p) == key {
                    found = Some(p);
                }
                found.is_none()
            });
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn build_table(&self) -> Vec<u32> {
        let m = self.terms.len();
        let size = 1usize << self.key_rows.len();
        let mut table = vec![u32::MAX; size];
        let mut filled = 0usize;
        for w in 0..=m {
            for_each_combination(m, w, |p| {
                let k = self.pattern_key(p) as usize;
                if table[k] == u32::MAX {
                    table[k] = p as u32;
                    filled += 1;
                }
                filled < size
            });
            if filled == size {
                break;
            }
        }
        table
    }

    /// Minimum-weight pattern for a syndrome over `check_generators`.
    pub fn decode(&self, syndrome: &BitVec) -> Option<Decoded> {
        let key = self.key_of_syndrome(syndrome);
        // reject syndromes outside the column space
        let p = self.decode_key(key)?;
        let pattern = BitVec::from_u64(self.terms.len(), p);
        if self.syndrome_of(&pattern) != *syndrome {
            return None;
        }
        Some(Decoded {
            chi: pattern.weight(),
            pattern,
        })
    }

    /// Decodes a key as produced by [`PuncturedCode::pattern_key`].
    pub fn decode_key(&self, key: u64) -> Option<u64> {
        match &self.table {
            Some(t) => t.get(key as usize).copied().filter(|&p| p != u32::MAX).map(u64::from),
            None => self.search(key),
        }
    }

    /// Materialized entries as `(syndrome, pattern)` pairs, ordered by syndrome.
    pub fn syndrome_table(&self) -> Option<BTreeMap<BitVec, BitVec>> {
        let t = self.table.as_ref()?;
        let m = self.terms.len();
        let mut out = BTreeMap::new();
        for &p in t.iter().filter(|&&p| p != u32::MAX) {
            let pattern = BitVec::from_u64(m, u64::from(p));
            out.insert(self.syndrome_of(&pattern), pattern);
        }
        Some(out)
    }

    /// Product of the terms selected by `pattern`.
    pub fn correction(&self, pattern: &BitVec) -> PauliOp {
        let n = self.terms.first().map_or(0, PauliOp::num_qubits);
        let mut out = PauliOp::identity(n);
        for t in pattern.support() {
            out = out.mul(&self.terms[t]);
        }
        out
    }
}

/// Calls `f` on every `w`-subset of `0..m` as a bitmask, in lexicographic
/// order of index lists, until `f` returns `false`.
pub fn for_each_combination(m: usize, w: usize, mut f: impl FnMut(u64) -> bool) {
    if w > m {
        return;
    }
    let mut idx: Vec<usize> = (0..w).collect();
    loop {
        let mask = idx.iter().fold(0u64, |acc, &i| acc | (1 << i));
        if !f(mask) {
            return;
        }
        // advance
        let mut i = w;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < m - w + i {
                idx[i] += 1;
                for j in i + 1..w {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Convenience wrapper matching the library's operation naming.
pub fn build_punctured(code: &StabilizerCode, target: &PauliOp) -> Result<PuncturedCode> {
    PuncturedCode::for_target(code, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_rotated_surface, build_steane, compute_logicals, load_stabilizer_file};

    fn weights(pc: &PuncturedCode) -> Vec<usize> {
        let mut w: Vec<usize> = pc.syndrome_table().unwrap().values().map(BitVec::weight).collect();
        w.sort();
        w
    }

    #[test]
    fn steane_table() {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let pc = build_punctured(&c, &l.logical_z[0]).unwrap();
        assert_eq!(weights(&pc), vec![0, 1, 1, 1]);
    }

    #[test]
    fn surface5_table() {
        let c = build_rotated_surface(5).unwrap();
        let l = compute_logicals(&c).unwrap();
        let pc = build_punctured(&c, &l.logical_z[0]).unwrap();
        let w = weights(&pc);
        assert_eq!(w.len(), 16);
        assert_eq!(*w.iter().max().unwrap(), 2);
    }

    #[test]
    fn weight_one_logical() {
        let c = load_stabilizer_file("ZZ\n").unwrap();
        // k=1 with Z̄ = Z on qubit 0 would commute with ZZ; X̄ = XX
        let t: PauliOp = "ZI".parse().unwrap();
        let pc = build_punctured(&c, &t).unwrap();
        assert_eq!(weights(&pc), vec![0]);
    }

    #[test]
    fn combinations_in_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |m| {
            seen.push(m);
            true
        });
        assert_eq!(seen, vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100]);
    }
}
