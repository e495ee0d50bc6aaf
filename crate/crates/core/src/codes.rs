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

//! Stabilizer codes, built-in constructors, the plain-text code format and
//! logical operator computation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliOp;

/// Default cap on exhaustive coset minimization, as log2 of the coset size.
pub const DEFAULT_COSET_CAP_LOG2: usize = 20;

/// Codes with at most this many qubits get their distances computed exhaustively.
pub const EXHAUSTIVE_DISTANCE_MAX_N: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerCode {
    pub name: String,
    n: usize,
    k: usize,
    generators: Vec<PauliOp>,
    is_css: bool,
    /// Declared `(d_x, d_z)`.
    distances: Option<(usize, usize)>,
    /// Preferred logical basis supplied by a constructor or file.
    logical_hint: Option<LogicalBasis>,
    /// Non-fatal notes from construction (dependent generators dropped, ...).
    pub warnings: Vec<String>,
}

/// Logical generators `X̄_i`, `Z̄_i` without search metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalBasis {
    pub logical_x: Vec<PauliOp>,
    pub logical_z: Vec<PauliOp>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Every representative of each coset was examined.
    Exhaustive,
    /// Coset too large; greedy descent only, result may not be minimal.
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalOperatorSet {
    pub logical_x: Vec<PauliOp>,
    pub logical_z: Vec<PauliOp>,
    pub search: SearchMode,
    pub from_hint: bool,
}

impl LogicalOperatorSet {
    pub fn k(&self) -> usize {
        self.logical_x.len()
    }

    /// `X̄^mu Z̄^nu` with `i^{mu_i nu_i}` on every logical qubit carrying both,
    /// so that a `1` in both vectors means `Ȳ_i = i X̄_i Z̄_i`.
    pub fn logical_pauli(&self, mu: &BitVec, nu: &BitVec) -> Result<PauliOp> {
        let k = self.k();
        if mu.len() != k || nu.len() != k {
            return Err(Error::LengthMismatch {
                left: mu.len().max(nu.len()),
                right: k,
            });
        }
        let n = self.logical_x.first().map_or(0, PauliOp::num_qubits);
        let mut out = PauliOp::identity(n);
        for i in 0..k {
            let mut factor = PauliOp::identity(n);
            if mu.get(i) {
                factor = factor.mul(&self.logical_x[i]);
            }
            if nu.get(i) {
                factor = factor.mul(&self.logical_z[i]);
            }
            if mu.get(i) && nu.get(i) {
                factor = factor.times_i(1);
            }
            out = out.mul(&factor);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CssReport {
    pub is_css: bool,
    pub diagnostics: Vec<String>,
}

impl StabilizerCode {
    /// Builds a code from generators. Anticommuting generators are rejected;
    /// dependent generators are dropped with a warning.
    pub fn from_generators(name: impl Into<String>, generators: Vec<PauliOp>) -> Result<Self> {
        let name = name.into();
        let n = generators
            .first()
            .map(PauliOp::num_qubits)
            .ok_or_else(|| Error::InvalidCode("no generators".into()))?;
        for (i, g) in generators.iter().enumerate() {
            if g.num_qubits() != n {
                return Err(Error::InvalidCode(format!(
                    "generator {i} has {} qubits, expected {n}",
                    g.num_qubits()
                )));
            }
            if !g.is_hermitian() {
                return Err(Error::InvalidCode(format!("generator {i} is not Hermitian")));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if generators[i].anticommutes(&generators[j]) {
                    return Err(Error::InvalidCode(format!(
                        "generators {i} ({}) and {j} ({}) anticommute",
                        generators[i], generators[j]
                    )));
                }
            }
        }
        let sym = BitMatrix::from_rows(2 * n, generators.iter().map(PauliOp::symplectic).collect());
        let keep = sym.independent_rows();
        let mut warnings = Vec::new();
        if keep.len() < generators.len() {
            let dropped: Vec<usize> = (0..generators.len()).filter(|i| !keep.contains(i)).collect();
            warnings.push(format!("dependent generators dropped: {dropped:?}"));
        }
        let generators: Vec<PauliOp> = keep.iter().map(|&i| generators[i].clone()).collect();
        // -I in the group would make the code space empty
        let group_check = generators.iter().all(|g| g.sign().is_some());
        if !group_check {
            return Err(Error::InvalidCode("generator without a real sign".into()));
        }
        let is_css = generators.iter().all(|g| g.is_x_type() || g.is_z_type());
        let k = n - generators.len();
        Ok(Self {
            name,
            n,
            k,
            generators,
            is_css,
            distances: None,
            logical_hint: None,
            warnings,
        })
    }

    pub fn with_distances(mut self, dx: usize, dz: usize) -> Self {
        self.distances = Some((dx, dz));
        self
    }

    /// Attaches a preferred logical basis after checking it.
    pub fn with_logical_hint(mut self, hint: LogicalBasis) -> Result<Self> {
        check_logical_basis(&self, &hint.logical_x, &hint.logical_z)?;
        self.logical_hint = Some(hint);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[PauliOp] {
        &self.generators
    }

    pub fn is_css(&self) -> bool {
        self.is_css
    }

    pub fn declared_distances(&self) -> Option<(usize, usize)> {
        self.distances
    }

    pub fn logical_hint(&self) -> Option<&LogicalBasis> {
        self.logical_hint.as_ref()
    }

    /// X-type checks as rows of x-vectors.
    pub fn hx(&self) -> BitMatrix {
        BitMatrix::from_rows(
            self.n,
            self.generators
                .iter()
                .filter(|g| g.is_x_type() && !g.is_identity_up_to_phase())
                .map(|g| g.x().clone())
                .collect(),
        )
    }

    /// Z-type checks as rows of z-vectors.
    pub fn hz(&self) -> BitMatrix {
        BitMatrix::from_rows(
            self.n,
            self.generators
                .iter()
                .filter(|g| g.is_z_type() && !g.is_identity_up_to_phase())
                .map(|g| g.z().clone())
                .collect(),
        )
    }

    /// Syndrome of `p`: bit `i` set when `p` anticommutes with generator `i`.
    pub fn syndrome(&self, p: &PauliOp) -> BitVec {
        let mut s = BitVec::zeros(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            if g.anticommutes(p) {
                s.set(i, true);
            }
        }
        s
    }

    pub fn commutes_with_all(&self, p: &PauliOp) -> bool {
        self.generators.iter().all(|g| g.commutes(p))
    }

    /// Symplectic check matrix with rows `(g.x | g.z)`.
    pub fn symplectic_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(2 * self.n, self.generators.iter().map(PauliOp::symplectic).collect())
    }

    /// True if `p` is (up to phase) an element of the stabilizer group.
    pub fn in_stabilizer_group(&self, p: &PauliOp) -> bool {
        self.symplectic_matrix().solve_rows(&p.symplectic()).is_some()
    }

    /// Writes `p` as `i^c · S · L` with `S` a product of generators and `L` a
    /// product of the given logical operators. Returns generator coefficients,
    /// logical coefficients `(x-part, z-part)` and the phase `c`.
    pub fn decompose_normalizer(
        &self,
        p: &PauliOp,
        logicals: &LogicalOperatorSet,
    ) -> Option<(BitVec, BitVec, BitVec, u8)> {
        let k = logicals.k();
        let mut rows: Vec<BitVec> = self.generators.iter().map(PauliOp::symplectic).collect();
        rows.extend(logicals.logical_x.iter().map(PauliOp::symplectic));
        rows.extend(logicals.logical_z.iter().map(PauliOp::symplectic));
        let basis = BitMatrix::from_rows(2 * self.n, rows);
        let c = basis.solve_rows(&p.symplectic())?;
        let m = self.generators.len();
        let gens = c.restrict(&(0..m).collect::<Vec<_>>());
        let lx = c.restrict(&(m..m + k).collect::<Vec<_>>());
        let lz = c.restrict(&(m + k..m + 2 * k).collect::<Vec<_>>());
        let mut prod = PauliOp::identity(self.n);
        for i in gens.support() {
            prod = prod.mul(&self.generators[i]);
        }
        for i in lx.support() {
            prod = prod.mul(&logicals.logical_x[i]);
        }
        for i in lz.support() {
            prod = prod.mul(&logicals.logical_z[i]);
        }
        // p = i^c prod
        let c_phase = (4 + p.phase() as i32 - prod.phase() as i32).rem_euclid(4) as u8;
        Some((gens, lx, lz, c_phase))
    }
}

/// Checks the CSS property and `H_X H_Z^T = 0`.
pub fn validate_css(code: &StabilizerCode) -> CssReport {
    let mut diagnostics = Vec::new();
    for (i, g) in code.generators.iter().enumerate() {
        if !(g.is_x_type() || g.is_z_type()) {
            diagnostics.push(format!("generator {i} ({g}) mixes X and Z"));
            break;
        }
    }
    if diagnostics.is_empty() {
        let xs: Vec<(usize, &PauliOp)> =
            code.generators.iter().enumerate().filter(|(_, g)| g.is_x_type()).collect();
        let zs: Vec<(usize, &PauliOp)> =
            code.generators.iter().enumerate().filter(|(_, g)| !g.is_x_type()).collect();
        'outer: for (i, gx) in &xs {
            for (j, gz) in &zs {
                if gx.x().dot(gz.z()) {
                    diagnostics.push(format!("X check {i} and Z check {j} overlap oddly"));
                    break 'outer;
                }
            }
        }
    }
    CssReport {
        is_css: diagnostics.is_empty(),
        diagnostics,
    }
}

fn check_logical_basis(code: &StabilizerCode, lx: &[PauliOp], lz: &[PauliOp]) -> Result<()> {
    if lx.len() != code.k || lz.len() != code.k {
        return Err(Error::InvalidCode(format!(
            "expected {} logical pairs, got {}/{}",
            code.k,
            lx.len(),
            lz.len()
        )));
    }
    for l in lx.iter().chain(lz) {
        if l.num_qubits() != code.n || !code.commutes_with_all(l) {
            return Err(Error::InvalidCode(format!("{l} is not in the normalizer")));
        }
        if code.in_stabilizer_group(l) {
            return Err(Error::InvalidCode(format!("{l} is a stabilizer")));
        }
    }
    for i in 0..code.k {
        for j in 0..code.k {
            if lx[i].anticommutes(&lz[j]) != (i == j) {
                return Err(Error::InvalidCode(format!("pairing fails at ({i}, {j})")));
            }
            if i < j && (lx[i].anticommutes(&lx[j]) || lz[i].anticommutes(&lz[j])) {
                return Err(Error::InvalidCode(format!("logicals {i} and {j} anticommute")));
            }
        }
    }
    Ok(())
}

/// Extends a row set by candidates that are independent of it.
fn extend_independent(base: &[BitVec], candidates: &[BitVec], want: usize) -> Vec<BitVec> {
    let mut reduced: Vec<(usize, BitVec)> = Vec::new();
    let push = |v: &BitVec, reduced: &mut Vec<(usize, BitVec)>| -> bool {
        let mut v = v.clone();
        for (p, b) in reduced.iter() {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        match v.support().first().copied() {
            Some(p) => {
                for (_, b) in reduced.iter_mut() {
                    if b.get(p) {
                        b.xor_assign(&v);
                    }
                }
                reduced.push((p, v));
                true
            }
            None => false,
        }
    };
    for b in base {
        push(b, &mut reduced);
    }
    let mut out = Vec::new();
    for c in candidates {
        if out.len() == want {
            break;
        }
        if push(c, &mut reduced) {
            out.push(c.clone());
        }
    }
    out
}

/// Minimizes the weight of `op` over `op · ⟨gens⟩`. Exhaustive (Gray code)
/// when `gens.len() <= cap_log2`, greedy otherwise. On ties the input is kept.
fn minimize_in_coset(op: &PauliOp, gens: &[PauliOp], cap_log2: usize) -> (PauliOp, SearchMode) {
    let sym = |p: &PauliOp| (p.x().clone(), p.z().clone());
    let weight = |x: &BitVec, z: &BitVec| x.or(z).weight();
    let (mut x, mut z) = sym(op);
    let mut best = (weight(&x, &z), x.clone(), z.clone());
    let mode;
    if gens.len() <= cap_log2 {
        let total: u64 = 1u64 << gens.len();
        for step in 1..total {
            let flip = step.trailing_zeros() as usize;
            x.xor_assign(gens[flip].x());
            z.xor_assign(gens[flip].z());
            let w = weight(&x, &z);
            if w < best.0 {
                best = (w, x.clone(), z.clone());
            }
        }
        mode = SearchMode::Exhaustive;
    } else {
        loop {
            let mut improved = false;
            for g in gens {
                let nx = best.1.xor(g.x());
                let nz = best.2.xor(g.z());
                let w = weight(&nx, &nz);
                if w < best.0 {
                    best = (w, nx, nz);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        mode = SearchMode::Heuristic;
    }
    let out = PauliOp::hermitian(best.1, best.2).expect("equal lengths");
    (out, mode)
}

/// Logical generators with minimum-weight representatives (see [`SearchMode`]).
pub fn compute_logicals(code: &StabilizerCode) -> Result<LogicalOperatorSet> {
    compute_logicals_with_cap(code, DEFAULT_COSET_CAP_LOG2)
}

pub fn compute_logicals_with_cap(code: &StabilizerCode, cap_log2: usize) -> Result<LogicalOperatorSet> {
    let (lx, lz, from_hint) = match &code.logical_hint {
        Some(h) => (h.logical_x.clone(), h.logical_z.clone(), true),
        None if code.is_css => {
            let (a, b) = css_logical_basis(code)?;
            (a, b, false)
        }
        None => {
            let (a, b) = symplectic_logical_basis(code)?;
            (a, b, false)
        }
    };
    let mut search = SearchMode::Exhaustive;
    let mut minimize = |ops: Vec<PauliOp>, gens: Vec<PauliOp>| -> Vec<PauliOp> {
        ops.iter()
            .map(|op| {
                let (m, mode) = minimize_in_coset(op, &gens, cap_log2);
                if mode == SearchMode::Heuristic {
                    search = SearchMode::Heuristic;
                }
                m
            })
            .collect()
    };
    let (lx, lz) = if code.is_css {
        // keep X̄ pure X and Z̄ pure Z by only using same-type generators
        let gx: Vec<PauliOp> = code.generators.iter().filter(|g| g.is_x_type()).cloned().collect();
        let gz: Vec<PauliOp> = code.generators.iter().filter(|g| g.is_z_type()).cloned().collect();
        let lx = if lx.iter().all(PauliOp::is_x_type) { minimize(lx, gx) } else { lx };
        let lz = if lz.iter().all(PauliOp::is_z_type) { minimize(lz, gz) } else { lz };
        (lx, lz)
    } else {
        let g = code.generators.clone();
        (minimize(lx, g.clone()), minimize(lz, g))
    };
    check_logical_basis(code, &lx, &lz)?;
    Ok(LogicalOperatorSet {
        logical_x: lx,
        logical_z: lz,
        search,
        from_hint,
    })
}

fn css_logical_basis(code: &StabilizerCode) -> Result<(Vec<PauliOp>, Vec<PauliOp>)> {
    let hx = code.hx();
    let hz = code.hz();
    let k = code.k;
    let xs = extend_independent(hx.rows(), &hz.kernel(), k);
    let zs = extend_independent(hz.rows(), &hx.kernel(), k);
    if xs.len() != k || zs.len() != k {
        return Err(Error::InvalidCode("could not complete the logical basis".into()));
    }
    let mut g = BitMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g.set(i, j, xs[i].dot(&zs[j]));
        }
    }
    let inv = g.rref_with_transform();
    if inv.rank() != k {
        return Err(Error::InvalidCode("logical pairing matrix is singular".into()));
    }
    // B' = (G^{-1})^T B so that A B'^T = I
    let ginv_t = inv.transform.transpose();
    let zmat = BitMatrix::from_rows(code.n, zs);
    let z2 = ginv_t.mul(&zmat);
    let lx = xs.into_iter().map(PauliOp::x_type).collect();
    let lz = z2.rows().iter().cloned().map(PauliOp::z_type).collect();
    Ok((lx, lz))
}

fn symplectic_logical_basis(code: &StabilizerCode) -> Result<(Vec<PauliOp>, Vec<PauliOp>)> {
    let n = code.n;
    // P commutes with g iff (g.z | g.x) · (P.x | P.z) = 0
    let swapped = BitMatrix::from_rows(
        2 * n,
        code.generators.iter().map(|g| g.z().concat(g.x())).collect(),
    );
    let normalizer = swapped.kernel();
    let stab: Vec<BitVec> = code.generators.iter().map(PauliOp::symplectic).collect();
    let mut cands: Vec<PauliOp> = extend_independent(&stab, &normalizer, normalizer.len())
        .iter()
        .map(|v| PauliOp::from_symplectic(v).expect("even length"))
        .collect();
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    while let Some(a) = cands.first().cloned() {
        cands.remove(0);
        let Some(pos) = cands.iter().position(|c| c.anticommutes(&a)) else {
            continue;
        };
        let b = cands.remove(pos);
        for c in cands.iter_mut() {
            let mut v = c.clone();
            if v.anticommutes(&b) {
                v = v.mul(&a);
            }
            if v.anticommutes(&a) {
                v = v.mul(&b);
            }
            *c = v;
        }
        lx.push(PauliOp::hermitian(a.x().clone(), a.z().clone())?);
        lz.push(PauliOp::hermitian(b.x().clone(), b.z().clone())?);
    }
    if lx.len() != code.k {
        return Err(Error::InvalidCode(format!(
            "found {} logical pairs, expected {}",
            lx.len(),
            code.k
        )));
    }
    Ok((lx, lz))
}

/// `(d_x, d_z)`: declared values if present, otherwise computed exhaustively for
/// `n <= 20`. For non-CSS codes both entries are the code distance.
pub fn code_distances(code: &StabilizerCode) -> Option<(usize, usize)> {
    if let Some(d) = code.distances {
        return Some(d);
    }
    if code.n > EXHAUSTIVE_DISTANCE_MAX_N || code.k == 0 {
        return None;
    }
    if code.is_css {
        let dz = min_nontrivial_weight(&code.hx().kernel(), &code.hz())?;
        let dx = min_nontrivial_weight(&code.hz().kernel(), &code.hx())?;
        Some((dx, dz))
    } else {
        let n = code.n;
        let swapped = BitMatrix::from_rows(
            2 * n,
            code.generators.iter().map(|g| g.z().concat(g.x())).collect(),
        );
        let normalizer = swapped.kernel();
        if normalizer.len() > 24 {
            return None;
        }
        let stab = code.symplectic_matrix().rref_with_transform();
        let mut best = usize::MAX;
        let mut v = BitVec::zeros(2 * n);
        for step in 1u64..(1u64 << normalizer.len()) {
            v.xor_assign(&normalizer[step.trailing_zeros() as usize]);
            let w = support_weight_sym(&v, n);
            if w < best && stab.solve_rows(&v).is_none() {
                best = w;
            }
        }
        (best != usize::MAX).then_some((best, best))
    }
}

fn support_weight_sym(v: &BitVec, n: usize) -> usize {
    (0..n).filter(|&i| v.get(i) || v.get(n + i)).count()
}

fn min_nontrivial_weight(kernel: &[BitVec], stabilizers: &BitMatrix) -> Option<usize> {
    if kernel.len() > 24 {
        return None;
    }
    let rref = stabilizers.rref_with_transform();
    let n = stabilizers.num_cols();
    let mut best = usize::MAX;
    let mut v = BitVec::zeros(n);
    for step in 1u64..(1u64 << kernel.len()) {
        v.xor_assign(&kernel[step.trailing_zeros() as usize]);
        let w = v.weight();
        if w < best && rref.solve_rows(&v).is_none() {
            best = w;
        }
    }
    (best != usize::MAX).then_some(best)
}

fn paulis(rows: &[&str]) -> Vec<PauliOp> {
    rows.iter().map(|r| r.parse().expect("static generator")).collect()
}

/// The [[7,1,3]] Steane code.
pub fn build_steane() -> StabilizerCode {
    let h = ["1010101", "0110011", "0001111"];
    let mut gens = Vec::new();
    for r in h {
        gens.push(PauliOp::x_type(r.parse().unwrap()));
    }
    for r in h {
        gens.push(PauliOp::z_type(r.parse().unwrap()));
    }
    StabilizerCode::from_generators("steane", gens)
        .expect("valid code")
        .with_distances(3, 3)
}

/// Rotated surface code of odd distance `d`.
///
/// Qubit `(r, c)` has index `r*d + c`. Bulk face `(r, c)` (lower-left corner at
/// qubit `(r, c)`) is X-type when `r + c` is even. Weight-2 Z checks sit on the
/// top and bottom edges, weight-2 X checks on the left and right edges, so
/// `Z̄` runs down column 0 and `X̄` along row 0.
pub fn build_rotated_surface(d: usize) -> Result<StabilizerCode> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::Domain(format!("surface distance must be odd and >= 3, got {d}")));
    }
    let n = d * d;
    let q = |r: usize, c: usize| r * d + c;
    let mut gens = Vec::new();
    let make = |qs: &[usize], x_type: bool| {
        let v = BitVec::from_indices(n, qs);
        if x_type {
            PauliOp::x_type(v)
        } else {
            PauliOp::z_type(v)
        }
    };
    for r in 0..d - 1 {
        for c in 0..d - 1 {
            let qs = [q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1)];
            gens.push(make(&qs, (r + c) % 2 == 0));
        }
    }
    for c in (0..d - 1).step_by(2) {
        gens.push(make(&[q(0, c), q(0, c + 1)], false));
    }
    for c in (1..d - 1).step_by(2) {
        gens.push(make(&[q(d - 1, c), q(d - 1, c + 1)], false));
    }
    for r in (1..d - 1).step_by(2) {
        gens.push(make(&[q(r, 0), q(r + 1, 0)], true));
    }
    for r in (0..d - 1).step_by(2) {
        gens.push(make(&[q(r, d - 1), q(r + 1, d - 1)], true));
    }
    let code = StabilizerCode::from_generators(format!("surface-{d}"), gens)?.with_distances(d, d);
    let zbar = PauliOp::z_type(BitVec::from_indices(n, &(0..d).map(|r| q(r, 0)).collect::<Vec<_>>()));
    let xbar = PauliOp::x_type(BitVec::from_indices(n, &(0..d).map(|c| q(0, c)).collect::<Vec<_>>()));
    code.with_logical_hint(LogicalBasis {
        logical_x: vec![xbar],
        logical_z: vec![zbar],
    })
}

/// The [[4,2,2]] code with stabilizers XXXX, ZZZZ.
///
/// The logical basis is chosen so that `X̄_1` and `Z̄_2` have disjoint supports.
pub fn build_code_422() -> StabilizerCode {
    StabilizerCode::from_generators("code-422", paulis(&["XXXX", "ZZZZ"]))
        .expect("valid code")
        .with_distances(2, 2)
        .with_logical_hint(LogicalBasis {
            logical_x: paulis(&["IIXX", "XIXI"]),
            logical_z: paulis(&["ZIZI", "ZZII"]),
        })
        .expect("valid hint")
}

/// The [[5,1,3]] code, generators XZZXI and cyclic shifts.
pub fn build_five_qubit() -> StabilizerCode {
    StabilizerCode::from_generators("five-qubit", paulis(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]))
        .expect("valid code")
        .with_distances(3, 3)
}

/// [[8,3,3]] non-CSS code.
pub fn build_833() -> StabilizerCode {
    StabilizerCode::from_generators(
        "code-833",
        paulis(&["XXXXXXXX", "ZZZZZZZZ", "IXIXYZYZ", "IXZYIXZY", "IYXZXZIY"]),
    )
    .expect("valid code")
}

/// Four-qubit code with X checks on neighbouring pairs; `Z̄ = ZZZZ` has even weight.
pub fn build_x_repetition4() -> StabilizerCode {
    StabilizerCode::from_generators("xrep-4", paulis(&["XXII", "IXXI", "IIXX"]))
        .expect("valid code")
        .with_logical_hint(LogicalBasis {
            logical_x: paulis(&["XIII"]),
            logical_z: paulis(&["ZZZZ"]),
        })
        .expect("valid hint")
}

/// Independent blocks side by side. Logical hints are concatenated when both
/// blocks carry one.
pub fn block_diagonal(name: impl Into<String>, a: &StabilizerCode, b: &StabilizerCode) -> Result<StabilizerCode> {
    let ia = PauliOp::identity(a.n);
    let ib = PauliOp::identity(b.n);
    let mut gens: Vec<PauliOp> = a.generators.iter().map(|g| g.tensor(&ib)).collect();
    gens.extend(b.generators.iter().map(|g| ia.tensor(g)));
    let mut code = StabilizerCode::from_generators(name, gens)?;
    if let (Some(da), Some(db)) = (a.distances, b.distances) {
        code = code.with_distances(da.0.min(db.0), da.1.min(db.1));
    }
    let la = a.logical_hint.clone().map(Ok).unwrap_or_else(|| compute_logicals(a).map(|l| LogicalBasis { logical_x: l.logical_x, logical_z: l.logical_z }))?;
    let lb = b.logical_hint.clone().map(Ok).unwrap_or_else(|| compute_logicals(b).map(|l| LogicalBasis { logical_x: l.logical_x, logical_z: l.logical_z }))?;
    let mut lx: Vec<PauliOp> = la.logical_x.iter().map(|l| l.tensor(&ib)).collect();
    lx.extend(lb.logical_x.iter().map(|l| ia.tensor(l)));
    let mut lz: Vec<PauliOp> = la.logical_z.iter().map(|l| l.tensor(&ib)).collect();
    lz.extend(lb.logical_z.iter().map(|l| ia.tensor(l)));
    code.with_logical_hint(LogicalBasis {
        logical_x: lx,
        logical_z: lz,
    })
}

/// Names accepted by [`builtin`].
pub const BUILTIN_CODES: &[&str] = &[
    "steane",
    "surface-3",
    "surface-5",
    "surface-7",
    "code-422",
    "code-822",
    "five-qubit",
    "code-833",
    "xrep-4",
    "surface-3x2",
];

pub fn builtin(name: &str) -> Result<StabilizerCode> {
    match name {
        "steane" => Ok(build_steane()),
        "code-422" => Ok(build_code_422()),
        "code-822" => block_diagonal("code-822", &build_code_422(), &build_code_422()),
        "five-qubit" => Ok(build_five_qubit()),
        "code-833" => Ok(build_833()),
        "xrep-4" => Ok(build_x_repetition4()),
        "surface-3x2" => {
            let s = build_rotated_surface(3)?;
            block_diagonal("surface-3x2", &s, &s)
        }
        _ => match name.strip_prefix("surface-").and_then(|d| d.parse().ok()) {
            Some(d) => build_rotated_surface(d),
            None => Err(Error::Domain(format!("unknown code {name:?}"))),
        },
    }
}

/// Parses the plain-text code format: one generator per line, `#` comments,
/// optional `key=value` headers (`name`, `n`, `k`, `dx`, `dz`, `logical_x`,
/// `logical_z`; the last two may repeat).
pub fn load_stabilizer_file(text: &str) -> Result<StabilizerCode> {
    let mut name = String::from("loaded");
    let mut gens = Vec::new();
    let (mut n_decl, mut k_decl, mut dx, mut dz) = (None, None, None, None);
    let mut lx = Vec::new();
    let mut lz = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line_no = li + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |col: usize, msg: String| Error::Parse {
            line: line_no,
            column: col,
            message: msg,
        };
        if let Some((key, value)) = line.split_once('=') {
            let key = key.trim();
            let value = value.trim();
            let col = raw.find('=').unwrap_or(0) + 2;
            let num = || value.parse::<usize>().map_err(|e| bad(col, format!("{key}: {e}")));
            match key {
                "name" => name = value.to_string(),
                "n" => n_decl = Some(num()?),
                "k" => k_decl = Some(num()?),
                "dx" => dx = Some(num()?),
                "dz" => dz = Some(num()?),
                "logical_x" | "logical_z" => {
                    let p: PauliOp = value.parse().map_err(|e| relocate(e, line_no, col - 1))?;
                    if key == "logical_x" { lx.push(p) } else { lz.push(p) }
                }
                _ => return Err(bad(1, format!("unknown header {key:?}"))),
            }
            continue;
        }
        let start = raw.find(|c: char| !c.is_whitespace()).unwrap_or(0);
        let p: PauliOp = line.parse().map_err(|e| relocate(e, line_no, start))?;
        if let Some(first) = gens.first().map(PauliOp::num_qubits) {
            if p.num_qubits() != first {
                return Err(bad(start + 1, format!("row has {} qubits, expected {first}", p.num_qubits())));
            }
        }
        gens.push(p);
    }
    let mut code = StabilizerCode::from_generators(name, gens)?;
    if let Some(n) = n_decl {
        if n != code.n {
            return Err(Error::InvalidCode(format!("declared n={n} but rows have {} qubits", code.n)));
        }
    }
    if let Some(k) = k_decl {
        if k != code.k {
            code.warnings.push(format!("declared k={k} but rank gives k={}", code.k));
        }
    }
    match (dx, dz) {
        (Some(a), Some(b)) => code = code.with_distances(a, b),
        (Some(a), None) | (None, Some(a)) => code = code.with_distances(a, a),
        _ => {}
    }
    if !lx.is_empty() || !lz.is_empty() {
        code = code.with_logical_hint(LogicalBasis {
            logical_x: lx,
            logical_z: lz,
        })?;
    }
    Ok(code)
}

fn relocate(e: Error, line: usize, offset: usize) -> Error {
    match e {
        Error::Parse { column, message, .. } => Error::Parse {
            line,
            column: column + offset,
            message,
        },
        other => other,
    }
}

/// Inverse of [`load_stabilizer_file`].
pub fn serialize_code(code: &StabilizerCode) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "name={}", code.name);
    let _ = writeln!(s, "n={}", code.n);
    let _ = writeln!(s, "k={}", code.k);
    if let Some((dx, dz)) = code.distances {
        let _ = writeln!(s, "dx={dx}");
        let _ = writeln!(s, "dz={dz}");
    }
    if let Some(h) = &code.logical_hint {
        for l in &h.logical_x {
            let _ = writeln!(s, "logical_x={l}");
        }
        for l in &h.logical_z {
            let _ = writeln!(s, "logical_z={l}");
        }
    }
    for g in &code.generators {
        let _ = writeln!(s, "{g}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn css_checks() {
        assert!(validate_css(&build_steane()).is_css);
        assert!(validate_css(&build_rotated_surface(3).unwrap()).is_css);
        let r = validate_css(&build_five_qubit());
        assert!(!r.is_css);
        assert!(r.diagnostics[0].contains("generator 0"));
    }

    #[test]
    fn surface_parameters() {
        for d in [3, 5, 7] {
            let c = build_rotated_surface(d).unwrap();
            assert_eq!((c.n(), c.k()), (d * d, 1));
            let l = compute_logicals(&c).unwrap();
            assert_eq!(l.logical_z[0].weight(), d);
            assert_eq!(l.logical_z[0].support(), (0..d).map(|r| r * d).collect::<Vec<_>>());
        }
        assert!(build_rotated_surface(4).is_err());
    }

    #[test]
    fn surface3_distance_exhaustive() {
        let mut c = build_rotated_surface(3).unwrap();
        c.distances = None;
        assert_eq!(code_distances(&c), Some((3, 3)));
    }

    #[test]
    fn five_qubit_logicals() {
        let c = build_five_qubit();
        assert_eq!(c.k(), 1);
        let l = compute_logicals(&c).unwrap();
        assert_eq!(l.logical_x[0].weight(), 3);
        assert_eq!(l.logical_z[0].weight(), 3);
        let mut c2 = c.clone();
        c2.distances = None;
        assert_eq!(code_distances(&c2), Some((3, 3)));
    }

    #[test]
    fn code_833_parameters() {
        let c = build_833();
        assert_eq!((c.n(), c.k()), (8, 3));
        assert_eq!(code_distances(&c), Some((3, 3)));
        compute_logicals(&c).unwrap();
    }

    #[test]
    fn parse_errors_name_position() {
        let err = load_stabilizer_file("XXXX\nZZQZ\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 3,
                message: "illegal Pauli character 'Q'".into()
            }
        );
        assert!(matches!(
            load_stabilizer_file("XX\nZI\n"),
            Err(Error::InvalidCode(_))
        ));
    }

    #[test]
    fn dependent_rows_are_dropped() {
        let c = load_stabilizer_file("XXXX\nZZZZ\nXXXX\n").unwrap();
        assert_eq!(c.generators().len(), 2);
        assert_eq!(c.k(), 2);
        assert_eq!(c.warnings.len(), 1);
    }
}
