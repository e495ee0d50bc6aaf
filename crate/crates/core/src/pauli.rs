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

//! Symplectic representation of n-qubit Pauli operators.
//!
//! An operator is stored as `i^phase · X^x Z^z` with the X factor to the
//! left on every qubit, so `Y = i·X·Z` has `x = z = 1` and `phase = 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::BitVec;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    /// `i^phase · X^x Z^z` exactly as given.
    pub fn from_parts(x: BitVec, z: BitVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: z.len(),
            });
        }
        Ok(Self {
            x,
            z,
            phase: phase % 4,
        })
    }

    /// The Hermitian operator with unit sign on the given support, i.e. a plain
    /// tensor product of I, X, Y, Z.
    pub fn hermitian(x: BitVec, z: BitVec) -> Result<Self> {
        let ny = x.and_weight(&z);
        Self::from_parts(x, z, (ny % 4) as u8)
    }

    pub fn x_type(x: BitVec) -> Self {
        let n = x.len();
        Self {
            x,
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    pub fn z_type(z: BitVec) -> Self {
        let n = z.len();
        Self {
            x: BitVec::zeros(n),
            z,
            phase: 0,
        }
    }

    /// Single-qubit `X`, `Y` or `Z` on qubit `q` of `n`.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        match letter {
            'I' => {}
            'X' => x.set(q, true),
            'Z' => z.set(q, true),
            'Y' => {
                x.set(q, true);
                z.set(q, true);
            }
            _ => return Err(Error::Domain(format!("unknown Pauli letter {letter:?}"))),
        }
        Self::hermitian(x, z)
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &BitVec {
        &self.x
    }

    pub fn z(&self) -> &BitVec {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Multiplies by `i^k`.
    pub fn times_i(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn negate(self) -> Self {
        self.times_i(2)
    }

    pub fn support_mask(&self) -> BitVec {
        self.x.or(&self.z)
    }

    pub fn support(&self) -> Vec<usize> {
        self.support_mask().support()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().weight()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_x_type(&self) -> bool {
        self.z.is_zero()
    }

    pub fn is_z_type(&self) -> bool {
        self.x.is_zero()
    }

    /// True if `P = P†`, i.e. the phase matches the number of `Y` factors mod 2.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + self.x.and_weight(&self.z)) % 2 == 0
    }

    /// Sign `±1` relative to the plain tensor product, or `None` if not Hermitian.
    pub fn sign(&self) -> Option<i8> {
        let rel = (4 + self.phase as usize - self.x.and_weight(&self.z) % 4) % 4;
        match rel {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::LengthMismatch {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Symplectic form: `true` when the operators anticommute.
    pub fn anticommutes(&self, other: &Self) -> bool {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        (self.x.and_weight(&other.z) + self.z.and_weight(&other.x)) % 2 == 1
    }

    pub fn commutes(&self, other: &Self) -> bool {
        !self.anticommutes(other)
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.num_qubits(), other.num_qubits(), "qubit count mismatch");
        // Z^z1 X^x2 = (-1)^{z1·x2} X^x2 Z^z1
        let swap = self.z.and_weight(&other.x) % 2;
        let phase = (self.phase as usize + other.phase as usize + 2 * swap) % 4;
        Self {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
            phase: phase as u8,
        }
    }

    /// Inverse: `(i^p X^x Z^z)^{-1} = i^{-p} (-1)^{x·z} X^x Z^z`.
    pub fn inverse(&self) -> Self {
        let flip = self.x.and_weight(&self.z) % 2;
        let phase = (8 - self.phase as usize + 2 * flip) % 4;
        Self {
            x: self.x.clone(),
            z: self.z.clone(),
            phase: phase as u8,
        }
    }

    /// Keeps only the listed qubits (in order), preserving the per-qubit letters
    /// and the overall sign relative to the plain tensor product.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let x = self.x.restrict(qubits);
        let z = self.z.restrict(qubits);
        Self::hermitian(x, z).expect("equal lengths")
    }

    /// Zeroes every qubit outside `mask` and returns a Hermitian operator
    /// with unit sign on the kept qubits.
    pub fn mask(&self, mask: &BitVec) -> Self {
        Self::hermitian(self.x.and(mask), self.z.and(mask)).expect("equal lengths")
    }

    /// Like [`PauliOp::mask`], with the kept qubits given as indices.
    pub fn on_qubits(&self, qubits: &[usize]) -> Self {
        self.mask(&BitVec::from_indices(self.num_qubits(), qubits))
    }

    /// Tensor product `self ⊗ other` (qubits of `other` appended).
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            x: self.x.concat(&other.x),
            z: self.z.concat(&other.z),
            phase: (self.phase + other.phase) % 4,
        }
    }

    /// Letter on qubit `q`.
    pub fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    /// Symplectic vector `(x | z)` of length `2n`.
    pub fn symplectic(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    pub fn from_symplectic(v: &BitVec) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::Shape("symplectic vector must have even length".into()));
        }
        let n = v.len() / 2;
        let idx_x: Vec<usize> = (0..n).collect();
        let idx_z: Vec<usize> = (n..2 * n).collect();
        Self::from_parts(v.restrict(&idx_x), v.restrict(&idx_z), 0)
    }
}

/// `0` when `p` and `q` commute, `1` when they anticommute.
pub fn symplectic_commutes(p: &PauliOp, q: &PauliOp) -> Result<u8> {
    p.check(q)?;
    Ok(u8::from(p.anticommutes(q)))
}

/// Checked product.
pub fn pauli_multiply(p: &PauliOp, q: &PauliOp) -> Result<PauliOp> {
    p.check(q)?;
    Ok(p.mul(q))
}

impl fmt::Display for PauliOp {
    /// Sign prefix (`+`, `-`, `+i`, `-i`) relative to the plain tensor product,
    /// followed by one letter per qubit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = (4 + self.phase as usize - self.x.and_weight(&self.z) % 4) % 4;
        f.write_str(["+", "+i", "-", "-i"][rel])?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp({self})")
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    /// Accepts an optional sign prefix (`+`, `-`, `i`, `+i`, `-i`) and letters `IXYZ`.
    /// `_` is accepted as a synonym for `I`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (rel, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let offset = s.len() - body.len();
        let n = body.chars().count();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' | '_' => {}
                'X' => x.set(q, true),
                'Z' => z.set(q, true),
                'Y' => {
                    x.set(q, true);
                    z.set(q, true);
                }
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        column: offset + q + 1,
                        message: format!("illegal Pauli character {c:?}"),
                    })
                }
            }
        }
        let ny = x.and_weight(&z);
        Self::from_parts(x, z, ((ny + rel) % 4) as u8)
    }
}

impl Serialize for PauliOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn commutation_examples() {
        assert_eq!(symplectic_commutes(&p("X"), &p("Z")).unwrap(), 1);
        assert_eq!(symplectic_commutes(&p("ZZ"), &p("XX")).unwrap(), 0);
        assert_eq!(symplectic_commutes(&p("XZZXI"), &p("ZZZZZ")).unwrap(), 0);
        assert!(symplectic_commutes(&p("XX"), &p("XXX")).is_err());
    }

    #[test]
    fn xz_gives_y() {
        // X·Z = -iY
        let prod = p("X").mul(&p("Z"));
        assert_eq!(prod, p("-iY"));
        assert_eq!(p("Z").mul(&p("X")), p("iY"));
        assert_eq!(p("Y").mul(&p("Y")), p("I"));
    }

    #[test]
    fn supports_xor() {
        let prod = p("XXI").mul(&p("IXX"));
        assert_eq!(prod, p("XIX"));
    }

    #[test]
    fn display_roundtrip() {
        for s in ["+XYZI", "-YY", "+iZ", "-iXY"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!(p("Y").is_hermitian());
        assert!(!p("iZ").is_hermitian());
        let err = "XQZ".parse::<PauliOp>().unwrap_err();
        assert!(matches!(err, Error::Parse { column: 2, .. }));
    }

    #[test]
    fn inverse_cancels() {
        let a = p("-iXYZ");
        let id = a.mul(&a.inverse());
        assert_eq!(id, PauliOp::identity(3));
    }
}
