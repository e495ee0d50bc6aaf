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

//! Brute-force certification of weak transversality.
//!
//! Two engines produce the same per-branch logical maps. The dense engine
//! simulates state vectors (up to [`MAX_DENSE_QUBITS`]) and measures
//! generators one at a time; the Pauli-expansion engine expands the rotation
//! layer into Pauli strings and reduces each corrected string to a logical
//! Pauli, which reaches larger codes as long as the layer has few terms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::{canonical_angle, logical_angle};
use crate::codes::{LogicalOperatorSet, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::partition::{split_even, terms_from_groups, CircuitPlan, PlanStep, SupportPartition};
use crate::pauli::PauliOp;

pub const MAX_DENSE_QUBITS: usize = 17;
/// Cap on terms for the Pauli-expansion engine (`2^M` strings).
pub const MAX_EXPANSION_TERMS: usize = 20;
const PRUNE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// Computational basis state `|b⟩`, qubit `i` on bit `i`.
    pub fn basis(n: usize, b: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::CapExceeded(format!(
                "{n} qubits exceed the dense cap of {MAX_DENSE_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[b] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    fn zeros_like(&self) -> Self {
        Self {
            n: self.n,
            amps: vec![Complex64::new(0.0, 0.0); self.amps.len()],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_sqr().sqrt();
        if n < 1e-300 {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        self.scale(Complex64::new(1.0 / n, 0.0));
        Ok(n)
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amps {
            *a *= c;
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn pauli_image(&self, p: &PauliOp) -> Self {
        let x = p.x().to_u64() as usize;
        let z = p.z().to_u64();
        let ph = I_POW[p.phase() as usize];
        let mut out = self.zeros_like();
        for (b, o) in out.amps.iter_mut().enumerate() {
            let src = b ^ x;
            let sign = if (z & src as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            *o = ph * sign * self.amps[src];
        }
        out
    }

    pub fn apply_pauli(&mut self, p: &PauliOp) {
        *self = self.pauli_image(p);
    }

    /// `e^{iθP}` for Hermitian `P`.
    pub fn apply_rotation(&mut self, p: &PauliOp, theta: f64) {
        let img = self.pauli_image(p);
        let (s, c) = theta.sin_cos();
        for (a, b) in self.amps.iter_mut().zip(&img.amps) {
            *a = c * *a + Complex64::new(0.0, s) * b;
        }
    }

    /// `(1 ± g)/2 |ψ⟩`, unnormalized.
    pub fn project(&self, g: &PauliOp, plus: bool) -> Self {
        let img = self.pauli_image(g);
        let sign = if plus { 0.5 } else { -0.5 };
        let mut out = self.clone();
        for (a, b) in out.amps.iter_mut().zip(&img.amps) {
            *a = 0.5 * *a + sign * b;
        }
        out
    }

    pub fn expectation(&self, p: &PauliOp) -> Complex64 {
        self.inner(&self.pauli_image(p))
    }
}

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Logical basis `|x̄⟩ = X̄^x |0̄⟩`, where `|0̄⟩` is the first computational
/// basis state with a nonzero projection onto the `+1` eigenspace of every
/// generator and every `Z̄_j`.
pub fn logical_basis(code: &StabilizerCode, logicals: &LogicalOperatorSet) -> Result<Vec<DenseState>> {
    let n = code.n();
    let k = logicals.k();
    let mut zero = None;
    for b in 0..(1usize << n) {
        let mut psi = DenseState::basis(n, b)?;
        for g in code.generators().iter().chain(&logicals.logical_z) {
            psi = psi.project(g, true);
            if psi.norm_sqr() < 1e-12 {
                break;
            }
        }
        if psi.norm_sqr() > 1e-6 {
            psi.normalize()?;
            zero = Some(psi);
            break;
        }
    }
    let zero = zero.ok_or_else(|| Error::InvalidCode("code space is empty".into()))?;
    Ok((0..(1usize << k))
        .map(|x| {
            let mut s = zero.clone();
            for (i, lx) in logicals.logical_x.iter().enumerate() {
                if x >> i & 1 == 1 {
                    s.apply_pauli(lx);
                }
            }
            s
        })
        .collect())
}

/// `Σ_x a_x |x̄⟩`, normalized.
pub fn encode(code: &StabilizerCode, logicals: &LogicalOperatorSet, amplitudes: &[Complex64]) -> Result<DenseState> {
    let basis = logical_basis(code, logicals)?;
    if amplitudes.len() != basis.len() {
        return Err(Error::LengthMismatch {
            left: amplitudes.len(),
            right: basis.len(),
        });
    }
    let mut psi = basis[0].zeros_like();
    for (a, b) in amplitudes.iter().zip(&basis) {
        psi.add_scaled(*a, b);
    }
    psi.normalize()
        .map_err(|_| Error::Domain("logical amplitudes are all zero".into()))?;
    Ok(psi)
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub syndrome: BitVec,
    pub probability: f64,
    pub state: DenseState,
}

/// Measures every generator in order, keeping both outcomes while they have
/// weight above `1e−14`.
pub fn branch_decompose(code: &StabilizerCode, state: &DenseState) -> Vec<Branch> {
    split(code, std::slice::from_ref(state))
        .into_iter()
        .map(|(syndrome, mut v)| {
            let mut s = v.pop().expect("one state");
            let probability = s.normalize().map(|n| n * n).unwrap_or(0.0);
            Branch {
                syndrome,
                probability,
                state: s,
            }
        })
        .collect()
}

/// Joint projection of several vectors; a branch is kept if any vector has
/// weight in it. Output is ordered by syndrome.
fn split(code: &StabilizerCode, states: &[DenseState]) -> Vec<(BitVec, Vec<DenseState>)> {
    let r = code.generators().len();
    let mut level: Vec<(BitVec, Vec<DenseState>)> = vec![(BitVec::zeros(r), states.to_vec())];
    for (gi, g) in code.generators().iter().enumerate() {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (syn, vs) in level {
            for bit in [false, true] {
                let proj: Vec<DenseState> = vs.par_iter().map(|v| v.project(g, !bit)).collect();
                if proj.iter().any(|v| v.norm_sqr() > PRUNE) {
                    let mut s = syn.clone();
                    s.set(gi, bit);
                    next.push((s, proj));
                }
            }
        }
        level = next;
    }
    level.sort_by(|a, b| a.0.cmp(&b.0));
    level
}

/// Minimum-weight decoder over a list of terms, built by brute force over
/// all term patterns. Ties go to the numerically smallest pattern.
#[derive(Clone, Debug)]
pub struct TermDecoder {
    terms: Vec<PauliOp>,
    table: BTreeMap<BitVec, u64>,
}

impl TermDecoder {
    pub fn new(code: &StabilizerCode, terms: &[PauliOp]) -> Result<Self> {
        let m = terms.len();
        if m > MAX_EXPANSION_TERMS {
            return Err(Error::CapExceeded(format!("{m} terms exceed {MAX_EXPANSION_TERMS}")));
        }
        let cols: Vec<BitVec> = terms.iter().map(|t| code.syndrome(t)).collect();
        let mut patterns: Vec<u64> = (0..(1u64 << m)).collect();
        patterns.sort_by_key(|p| (p.count_ones(), *p));
        let mut table = BTreeMap::new();
        for p in patterns {
            let mut s = BitVec::zeros(code.generators().len());
            for (i, c) in cols.iter().enumerate() {
                if p >> i & 1 == 1 {
                    s.xor_assign(c);
                }
            }
            table.entry(s).or_insert(p);
        }
        Ok(Self {
            terms: terms.to_vec(),
            table,
        })
    }

    pub fn decode(&self, syndrome: &BitVec) -> Option<u64> {
        self.table.get(syndrome).copied()
    }

    /// Product of the terms in `pattern`, in index order.
    pub fn correction(&self, pattern: u64) -> PauliOp {
        let n = self.terms[0].num_qubits();
        let mut c = PauliOp::identity(n);
        for (i, t) in self.terms.iter().enumerate() {
            if pattern >> i & 1 == 1 {
                c = c.mul(t);
            }
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Dense up to [`MAX_DENSE_QUBITS`], Pauli expansion beyond.
    Auto,
    Dense,
    PauliExpansion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub n_random_inputs: usize,
    pub tol: f64,
    pub seed: u64,
    pub engine: Engine,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_random_inputs: 8,
            tol: 1e-8,
            seed: 0,
            engine: Engine::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    /// Syndromes of every measurement round, `|`-separated.
    pub syndrome: String,
    /// Term pattern applied as the correction in each round.
    pub corrections: Vec<u64>,
    /// Probability averaged over the logical basis.
    pub probability: f64,
    /// Fitted `θ̄` in `e^{iθ̄P̄}`, in `(−π/2, π/2]`.
    pub angle: f64,
    /// Normalized Frobenius distance from the best rotation about the target.
    pub residual: f64,
    /// Fraction of the branch weight outside the code space.
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub code: String,
    pub target: String,
    pub engine: Engine,
    pub independence_deviation: f64,
    pub total_probability: f64,
    pub branches: Vec<BranchReport>,
    pub tol: f64,
    pub weak_transversal: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Branches grouped by rounded angle: `(angle, total probability, count)`.
    pub fn angle_groups(&self, digits: i32) -> Vec<(f64, f64, usize)> {
        let scale = 10f64.powi(digits);
        let mut m: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
        for b in &self.branches {
            let key = (b.angle * scale).round() as i64;
            let e = m.entry(key).or_insert((b.angle, 0.0, 0));
            e.1 += b.probability;
            e.2 += 1;
        }
        m.into_values().collect()
    }
}

/// Complex `D × D` matrix, row-major.
type Mat = Vec<Complex64>;

fn mat_mul(a: &Mat, b: &Mat, d: usize) -> Mat {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

fn gram_of(k: &Mat, d: usize) -> Mat {
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];
    for x in 0..d {
        for y in 0..d {
            g[x * d + y] = (0..d).map(|r| k[r * d + x].conj() * k[r * d + y]).sum();
        }
    }
    g
}

/// One measurement branch reduced to the logical subspace.
struct BranchMap {
    syndromes: Vec<BitVec>,
    corrections: Vec<u64>,
    /// `⟨ȳ|K|x̄⟩`.
    logical: Mat,
    /// `⟨K x̄|K ȳ⟩`, which includes weight outside the code space.
    gram: Mat,
}

/// `p`, `θ̄`, residual and leakage of a branch against target `P̄`.
fn fit(map: &BranchMap, target: &Mat, d: usize) -> (f64, f64, f64, f64) {
    let trace_gram: f64 = (0..d).map(|x| map.gram[x * d + x].re).sum();
    let p = trace_gram / d as f64;
    let in_space: f64 = map.logical.iter().map(|a| a.norm_sqr()).sum();
    let leakage = ((trace_gram - in_space) / d as f64).max(0.0);
    if p < PRUNE {
        return (p, 0.0, 0.0, leakage);
    }
    let w: Mat = map.logical.iter().map(|a| a / p.sqrt()).collect();
    let a: Complex64 = (0..d).map(|i| w[i * d + i]).sum::<Complex64>() / d as f64;
    let pw = mat_mul(target, &w, d);
    let b: Complex64 = (0..d).map(|i| pw[i * d + i]).sum::<Complex64>() / (Complex64::new(0.0, 1.0) * d as f64);
    let phi = (a * a + b * b).arg() / 2.0;
    let rot = Complex64::from_polar(1.0, -phi);
    let raw = (b * rot).re.atan2((a * rot).re);
    let angle = canonical_angle(raw);
    let (s, c) = raw.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let mut err = 0.0;
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { c } else { 0.0 };
            let model = e * (Complex64::new(id, 0.0) + Complex64::new(0.0, s) * target[i * d + j]);
            err += (w[i * d + j] - model).norm_sqr();
        }
    }
    let residual = (err / d as f64).sqrt();
    (p, angle, residual, leakage / p)
}

fn random_inputs(d: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<Complex64> = (0..d)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= n);
            v
        })
        .collect()
}

fn input_probability(gram: &Mat, a: &[Complex64], d: usize) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for x in 0..d {
        for y in 0..d {
            s += a[x].conj() * gram[x * d + y] * a[y];
        }
    }
    s.re
}

fn report(
    code: &StabilizerCode,
    target: &PauliOp,
    target_mat: &Mat,
    maps: Vec<BranchMap>,
    d: usize,
    engine: Engine,
    opts: &VerifyOptions,
) -> VerificationReport {
    let inputs = random_inputs(d, opts.n_random_inputs.max(2), opts.seed);
    let mut deviation: f64 = 0.0;
    let mut branches = Vec::with_capacity(maps.len());
    let mut total = 0.0;
    for m in &maps {
        let ps: Vec<f64> = inputs.iter().map(|a| input_probability(&m.gram, a, d)).collect();
        let hi = ps.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ps.iter().cloned().fold(f64::MAX, f64::min);
        deviation = deviation.max(hi - lo);
        let (p, angle, residual, leakage) = fit(m, target_mat, d);
        total += p;
        if p < PRUNE {
            continue;
        }
        let syndrome = m.syndromes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("|");
        branches.push(BranchReport {
            syndrome,
            corrections: m.corrections.clone(),
            probability: p,
            angle,
            residual,
            leakage,
        });
    }
    let weak_transversal = deviation <= opts.tol
        && branches.iter().all(|b| b.residual <= opts.tol && b.leakage <= opts.tol)
        && (total - 1.0).abs() <= 1e-8;
    VerificationReport {
        code: code.name.clone(),
        target: target.to_string(),
        engine,
        independence_deviation: deviation,
        total_probability: total,
        branches,
        tol: opts.tol,
        weak_transversal,
    }
}

fn resolve_engine(code: &StabilizerCode, engine: Engine) -> Engine {
    match engine {
        Engine::Auto if code.n() <= MAX_DENSE_QUBITS => Engine::Dense,
        Engine::Auto => Engine::PauliExpansion,
        e => e,
    }
}

fn single_layer_plan(p: &SupportPartition) -> CircuitPlan {
    CircuitPlan {
        target: p.target.clone(),
        steps: vec![
            PlanStep::RotationLayer { partition: p.clone() },
            PlanStep::SyndromeMeasurement,
            PlanStep::Recovery(crate::partition::Recovery { fixup: None }),
        ],
    }
}

/// Applies the partition's rotation layer, measures, corrects with the
/// minimum-weight term pattern and fits each branch.
pub fn verify_partition(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    partition: &SupportPartition,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    verify_plan(code, logicals, &single_layer_plan(partition), opts)
}

/// Walks a plan (rotation layers, measurements, recoveries, S blocks) and fits
/// every branch against a rotation about the plan's target.
pub fn verify_plan(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    plan: &CircuitPlan,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let engine = resolve_engine(code, opts.engine);
    let d = 1usize << logicals.k();
    match engine {
        Engine::Dense => {
            let basis = logical_basis(code, logicals)?;
            let mut tracks = vec![DenseTrack {
                syndromes: Vec::new(),
                corrections: Vec::new(),
                layer: None,
                outs: basis.clone(),
            }];
            walk_dense(code, &plan.steps, &mut tracks)?;
            let target_mat = dense_logical_matrix(&basis, |s| s.apply_pauli(&plan.target));
            let maps = tracks
                .into_iter()
                .map(|t| {
                    let logical = {
                        let mut m = vec![Complex64::new(0.0, 0.0); d * d];
                        for (x, w) in t.outs.iter().enumerate() {
                            for (y, b) in basis.iter().enumerate() {
                                m[y * d + x] = b.inner(w);
                            }
                        }
                        m
                    };
                    let mut gram = vec![Complex64::new(0.0, 0.0); d * d];
                    for x in 0..d {
                        for y in 0..d {
                            gram[x * d + y] = t.outs[x].inner(&t.outs[y]);
                        }
                    }
                    BranchMap {
                        syndromes: t.syndromes,
                        corrections: t.corrections,
                        logical,
                        gram,
                    }
                })
                .collect();
            Ok(report(code, &plan.target, &target_mat, maps, d, engine, opts))
        }
        _ => {
            let target_mat = logical_pauli_matrix(code, logicals, &plan.target)?;
            let identity: Mat = (0..d * d)
                .map(|i| if i / d == i % d { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
                .collect();
            let mut tracks = vec![ExpansionTrack {
                syndromes: Vec::new(),
                corrections: Vec::new(),
                map: identity,
            }];
            walk_expansion(code, logicals, &plan.steps, &mut tracks, d)?;
            let maps = tracks
                .into_iter()
                .map(|t| BranchMap {
                    gram: gram_of(&t.map, d),
                    logical: t.map,
                    syndromes: t.syndromes,
                    corrections: t.corrections,
                })
                .collect();
            Ok(report(code, &plan.target, &target_mat, maps, d, Engine::PauliExpansion, opts))
        }
    }
}

fn dense_logical_matrix(basis: &[DenseState], apply: impl Fn(&mut DenseState)) -> Mat {
    let d = basis.len();
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for (x, bx) in basis.iter().enumerate() {
        let mut v = bx.clone();
        apply(&mut v);
        for (y, by) in basis.iter().enumerate() {
            m[y * d + x] = by.inner(&v);
        }
    }
    m
}

struct Layer {
    partition: SupportPartition,
    decoder: TermDecoder,
}

impl Layer {
    fn new(code: &StabilizerCode, partition: &SupportPartition) -> Result<Self> {
        Ok(Self {
            decoder: TermDecoder::new(code, &partition.terms)?,
            partition: partition.clone(),
        })
    }

    /// Sign the fix-up logic reads off the decoded weight.
    fn realized_sign(&self, pattern: u64) -> i8 {
        let m = self.partition.m();
        let w = pattern.count_ones() as usize;
        let chi = w.min(m - w);
        let theta = self.partition.homogeneous_angle().unwrap_or(self.partition.angles[0]);
        if logical_angle(m, chi, theta) > 0.0 {
            1
        } else {
            -1
        }
    }
}

struct DenseTrack {
    syndromes: Vec<BitVec>,
    corrections: Vec<u64>,
    layer: Option<std::sync::Arc<Layer>>,
    /// Image of each logical basis state.
    outs: Vec<DenseState>,
}

fn walk_dense(code: &StabilizerCode, steps: &[PlanStep], tracks: &mut Vec<DenseTrack>) -> Result<()> {
    for step in steps {
        match step {
            PlanStep::RotationLayer { partition } => {
                let layer = std::sync::Arc::new(Layer::new(code, partition)?);
                for t in tracks.iter_mut() {
                    t.outs.par_iter_mut().for_each(|v| {
                        for (term, &a) in partition.terms.iter().zip(&partition.angles) {
                            v.apply_rotation(term, a);
                        }
                    });
                    t.layer = Some(layer.clone());
                }
            }
            PlanStep::SyndromeMeasurement => {
                let mut next = Vec::new();
                for t in tracks.drain(..) {
                    for (syn, outs) in split(code, &t.outs) {
                        let mut syndromes = t.syndromes.clone();
                        syndromes.push(syn);
                        next.push(DenseTrack {
                            syndromes,
                            corrections: t.corrections.clone(),
                            layer: t.layer.clone(),
                            outs,
                        });
                    }
                }
                *tracks = next;
            }
            PlanStep::Recovery(r) => {
                for t in tracks.iter_mut() {
                    let layer = t
                        .layer
                        .as_ref()
                        .ok_or_else(|| Error::Unsupported("recovery before any rotation layer".into()))?;
                    let syn = t.syndromes.last().ok_or_else(|| Error::Unsupported("recovery before measurement".into()))?;
                    let pattern = layer
                        .decoder
                        .decode(syn)
                        .ok_or_else(|| Error::Unsupported(format!("syndrome {syn} not reachable by the terms")))?;
                    let c = layer.decoder.correction(pattern);
                    let fix = r.fixup.as_ref().filter(|f| layer.realized_sign(pattern) != f.sign);
                    t.outs.par_iter_mut().for_each(|v| {
                        v.apply_pauli(&c);
                        if let Some(f) = fix {
                            v.apply_pauli(&f.logical);
                        }
                    });
                    t.corrections.push(pattern);
                }
            }
            PlanStep::SGateBlock { steps, .. } => walk_dense(code, steps, tracks)?,
        }
    }
    Ok(())
}

/// Matrix of a logical Pauli on the basis `|x̄⟩ = X̄^x|0̄⟩`.
pub fn logical_pauli_matrix(code: &StabilizerCode, logicals: &LogicalOperatorSet, p: &PauliOp) -> Result<Mat> {
    let (_, lx, lz, c) = code
        .decompose_normalizer(p, logicals)
        .ok_or_else(|| Error::Domain(format!("{p} is not in the normalizer")))?;
    let k = logicals.k();
    let d = 1usize << k;
    let lxm = if k == 0 { 0 } else { lx.to_u64() as usize };
    let lzm = if k == 0 { 0 } else { lz.to_u64() as usize };
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for x in 0..d {
        let sign = if (lzm & x).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        m[(x ^ lxm) * d + x] = I_POW[c as usize] * sign;
    }
    Ok(m)
}

struct ExpansionTrack {
    syndromes: Vec<BitVec>,
    corrections: Vec<u64>,
    /// Logical map so far.
    map: Mat,
}

/// Per-syndrome logical Kraus operators of one layer followed by the
/// minimum-weight correction: `K_s = Σ_{R: syn(P_R)=s} coef_R · C_s P_R`.
fn layer_kraus(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    layer: &Layer,
    d: usize,
) -> Result<Vec<(BitVec, u64, Mat)>> {
    let terms = &layer.partition.terms;
    let m = terms.len();
    if m > MAX_EXPANSION_TERMS {
        return Err(Error::CapExceeded(format!("{m} terms exceed {MAX_EXPANSION_TERMS}")));
    }
    let trig: Vec<(f64, f64)> = layer.partition.angles.iter().map(|a| a.sin_cos()).collect();
    let mut groups: BTreeMap<BitVec, Mat> = BTreeMap::new();
    let mut patterns: BTreeMap<BitVec, u64> = BTreeMap::new();
    for r in 0..(1u64 << m) {
        let mut coef = Complex64::new(1.0, 0.0);
        let mut p = PauliOp::identity(code.n());
        for (i, t) in terms.iter().enumerate() {
            let (s, c) = trig[i];
            if r >> i & 1 == 1 {
                coef *= Complex64::new(0.0, s);
                p = p.mul(t);
            } else {
                coef *= c;
            }
        }
        if coef.norm_sqr() == 0.0 {
            continue;
        }
        let syn = code.syndrome(&p);
        let pattern = match patterns.get(&syn) {
            Some(&q) => q,
            None => {
                let q = layer
                    .decoder
                    .decode(&syn)
                    .ok_or_else(|| Error::Unsupported(format!("syndrome {syn} not reachable")))?;
                patterns.insert(syn.clone(), q);
                q
            }
        };
        let cp = layer.decoder.correction(pattern).mul(&p);
        let lm = logical_pauli_matrix(code, logicals, &cp)?;
        let acc = groups.entry(syn).or_insert_with(|| vec![Complex64::new(0.0, 0.0); d * d]);
        for (a, b) in acc.iter_mut().zip(&lm) {
            *a += coef * b;
        }
    }
    Ok(groups
        .into_iter()
        .map(|(s, k)| {
            let pattern = patterns[&s];
            (s, pattern, k)
        })
        .collect())
}

fn walk_expansion(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    steps: &[PlanStep],
    tracks: &mut Vec<ExpansionTrack>,
    d: usize,
) -> Result<()> {
    // a layer, its measurement and its recovery are applied together
    let mut i = 0;
    while i < steps.len() {
        match &steps[i] {
            PlanStep::RotationLayer { partition } => {
                let layer = Layer::new(code, partition)?;
                let fixup = match (steps.get(i + 1), steps.get(i + 2)) {
                    (Some(PlanStep::SyndromeMeasurement), Some(PlanStep::Recovery(r))) => r.fixup.clone(),
                    _ => {
                        return Err(Error::Unsupported(
                            "the expansion engine needs measurement and recovery after each layer".into(),
                        ))
                    }
                };
                let kraus = layer_kraus(code, logicals, &layer, d)?;
                let fix_mat = match &fixup {
                    Some(f) => Some(logical_pauli_matrix(code, logicals, &f.logical)?),
                    None => None,
                };
                let mut next = Vec::new();
                for t in tracks.drain(..) {
                    for (syn, pattern, k) in &kraus {
                        let mut k = k.clone();
                        if let (Some(f), Some(fm)) = (&fixup, &fix_mat) {
                            if layer.realized_sign(*pattern) != f.sign {
                                k = mat_mul(fm, &k, d);
                            }
                        }
                        let mut syndromes = t.syndromes.clone();
                        syndromes.push(syn.clone());
                        let mut corrections = t.corrections.clone();
                        corrections.push(*pattern);
                        next.push(ExpansionTrack {
                            syndromes,
                            corrections,
                            map: mat_mul(&k, &t.map, d),
                        });
                    }
                }
                *tracks = next;
                i += 3;
            }
            PlanStep::SGateBlock { steps: inner, .. } => {
                walk_expansion(code, logicals, inner, tracks, d)?;
                i += 1;
            }
            _ => {
                return Err(Error::Unsupported(
                    "measurement or recovery without a preceding rotation layer".into(),
                ))
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Yes,
    No,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// Logical Pauli, one letter per logical qubit.
    pub pauli: String,
    pub representative: String,
    /// Number of terms of the attempt that decided the verdict.
    pub m: usize,
    pub verdict: Verdict,
    pub max_deviation: f64,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Term counts to try; `0` stands for one term per qubit of the
    /// representative.
    pub m_choices: Vec<usize>,
    pub theta_probe: f64,
    pub tol: f64,
    pub max_qubits: usize,
    pub max_logical_qubits: usize,
    pub n_random_inputs: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            m_choices: vec![0],
            theta_probe: 0.3,
            tol: 1e-6,
            max_qubits: 14,
            max_logical_qubits: 5,
            n_random_inputs: 8,
            seed: 0,
        }
    }
}

/// Lowest-weight element of `p·S` over the stabilizer group, first found in
/// Gray-code order. Groups with more than `2^20` elements are not searched.
pub fn min_weight_representative(code: &StabilizerCode, p: &PauliOp) -> PauliOp {
    let gens = code.generators();
    if gens.len() > 20 {
        return p.clone();
    }
    let mut cur = p.clone();
    let mut best = p.clone();
    for i in 1u64..(1u64 << gens.len()) {
        let bit = i.trailing_zeros() as usize;
        cur = cur.mul(&gens[bit]);
        if cur.weight() < best.weight() {
            best = cur.clone();
        }
    }
    best
}

fn logical_label(mu: usize, nu: usize, k: usize) -> String {
    (0..k)
        .map(|i| match (mu >> i & 1, nu >> i & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        })
        .collect()
}

/// Tries uniform rotations on a minimum-weight representative of every
/// nontrivial logical Pauli and records whether the oracle certifies them.
pub fn scan_code(code: &StabilizerCode, logicals: &LogicalOperatorSet, opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    let k = logicals.k();
    let n = code.n();
    let labels: Vec<(usize, usize)> = (0..(1usize << k))
        .flat_map(|mu| (0..(1usize << k)).map(move |nu| (mu, nu)))
        .filter(|&(mu, nu)| mu | nu != 0)
        .collect();
    let skip = if n > opts.max_qubits {
        Some(format!("{n} qubits exceed the scan cap of {}", opts.max_qubits))
    } else if k > opts.max_logical_qubits {
        Some(format!("{k} logical qubits exceed the scan cap of {}", opts.max_logical_qubits))
    } else {
        None
    };
    let mut labels_sorted = labels;
    labels_sorted.sort_by_key(|&(mu, nu)| logical_label(mu, nu, k));
    labels_sorted
        .into_iter()
        .map(|(mu, nu)| {
            let pauli = logical_label(mu, nu, k);
            let target = logicals.logical_pauli(&BitVec::from_u64(k, mu as u64), &BitVec::from_u64(k, nu as u64))?;
            let rep = min_weight_representative(code, &target);
            if let Some(reason) = &skip {
                return Ok(ScanRow {
                    pauli,
                    representative: rep.to_string(),
                    m: 0,
                    verdict: Verdict::Skipped,
                    max_deviation: f64::NAN,
                    note: Some(reason.clone()),
                });
            }
            let support = rep.support();
            let mut last = None;
            for &choice in &opts.m_choices {
                let m = if choice == 0 { support.len() } else { choice };
                if m == 0 || m > support.len() || m > MAX_EXPANSION_TERMS {
                    continue;
                }
                let groups = split_even(&support, m);
                let terms = terms_from_groups(&rep, &groups);
                let partition = SupportPartition {
                    target: rep.clone(),
                    angles: vec![opts.theta_probe; terms.len()],
                    terms,
                };
                let vopts = VerifyOptions {
                    n_random_inputs: opts.n_random_inputs,
                    tol: opts.tol,
                    seed: opts.seed,
                    engine: Engine::Dense,
                };
                let r = verify_partition(code, logicals, &partition, &vopts)?;
                let worst = r.branches.iter().map(|b| b.residual.max(b.leakage)).fold(r.independence_deviation, f64::max);
                let row = ScanRow {
                    pauli: pauli.clone(),
                    representative: rep.to_string(),
                    m,
                    verdict: if r.weak_transversal { Verdict::Yes } else { Verdict::No },
                    max_deviation: worst,
                    note: None,
                };
                if r.weak_transversal {
                    return Ok(row);
                }
                last = Some(row);
            }
            Ok(last.unwrap_or(ScanRow {
                pauli,
                representative: rep.to_string(),
                m: 0,
                verdict: Verdict::Skipped,
                max_deviation: f64::NAN,
                note: Some("no usable term count".into()),
            }))
        })
        .collect()
}

pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("pauli_string,verdict,max_deviation\n");
    for r in rows {
        let v = match r.verdict {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Skipped => "skipped",
        };
        let _ = writeln!(s, "{},{},{:e}", r.pauli, v, r.max_deviation);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_five_qubit, build_rotated_surface, build_steane, compute_logicals};
    use crate::partition::{partition_z, plan_pauli_rotation};

    fn one(k: usize) -> BitVec {
        BitVec::from_indices(k, &[0])
    }

    #[test]
    fn steane_zero_state() {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let psi = encode(&c, &l, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert!((psi.expectation(&l.logical_z[0]).re - 1.0).abs() < 1e-12);
        for g in c.generators() {
            assert!((psi.expectation(g).re - 1.0).abs() < 1e-12);
        }
        let plus = encode(&c, &l, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert!((plus.expectation(&l.logical_x[0]).re - 1.0).abs() < 1e-12);
        let b = branch_decompose(&c, &psi);
        assert_eq!(b.len(), 1);
        assert!(b[0].syndrome.is_zero());
        assert!((b[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steane_branches() {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let p = partition_z(&c, &l, &one(1), 3, 0.3).unwrap();
        let r = verify_partition(&c, &l, &p, &VerifyOptions::default()).unwrap();
        assert!(r.weak_transversal, "{}", r.to_json());
        assert_eq!(r.branches.len(), 4);
        let (s, co) = 0.3f64.sin_cos();
        let groups = r.angle_groups(8);
        assert_eq!(groups.len(), 2);
        let p0 = co.powi(6) + s.powi(6);
        let small = groups.iter().find(|g| g.0 < 0.0).unwrap();
        assert!((small.0 - (-(s / co).powi(3)).atan()).abs() < 1e-10);
        assert!((small.1 - p0).abs() < 1e-10);
        let big = groups.iter().find(|g| g.0 > 0.0).unwrap();
        assert!((big.0 - 0.3).abs() < 1e-10);
        assert_eq!(big.2, 3);
    }

    #[test]
    fn engines_agree() {
        for c in [build_steane(), build_rotated_surface(3).unwrap()] {
            let l = compute_logicals(&c).unwrap();
            let p = partition_z(&c, &l, &one(1), 3, 0.41).unwrap();
            let mut o = VerifyOptions::default();
            o.engine = Engine::Dense;
            let a = verify_partition(&c, &l, &p, &o).unwrap();
            o.engine = Engine::PauliExpansion;
            let b = verify_partition(&c, &l, &p, &o).unwrap();
            assert_eq!(a.branches.len(), b.branches.len());
            for (x, y) in a.branches.iter().zip(&b.branches) {
                assert_eq!(x.syndrome, y.syndrome);
                assert!((x.probability - y.probability).abs() < 1e-10);
                assert!((x.angle - y.angle).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn subset_logical_detected() {
        let c = build_rotated_surface(3).unwrap();
        let l = compute_logicals(&c).unwrap();
        let z = |q: &[usize]| PauliOp::z_type(BitVec::from_indices(9, q));
        let terms = vec![z(&[0, 3]), z(&[6]), z(&[1]), z(&[2]), z(&[4, 5])];
        let target = terms.iter().fold(PauliOp::identity(9), |a, t| a.mul(t));
        assert!(c.commutes_with_all(&target));
        let p = SupportPartition {
            target,
            angles: vec![0.3; 5],
            terms,
        };
        let r = verify_partition(&c, &l, &p, &VerifyOptions::default()).unwrap();
        assert!(!r.weak_transversal);
        assert!(r.independence_deviation > 1e-3);
    }

    #[test]
    fn five_qubit_rotation() {
        let c = build_five_qubit();
        let l = compute_logicals(&c).unwrap();
        let rep = min_weight_representative(&c, &l.logical_z[0]);
        assert_eq!(rep.weight(), 3);
        let groups: Vec<Vec<usize>> = rep.support().into_iter().map(|q| vec![q]).collect();
        let terms = terms_from_groups(&rep, &groups);
        let p = SupportPartition {
            target: rep,
            angles: vec![0.2; 3],
            terms,
        };
        let r = verify_partition(&c, &l, &p, &VerifyOptions::default()).unwrap();
        assert!(r.weak_transversal, "{}", r.to_json());
    }

    #[test]
    fn y_rotation_plan() {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let plan = plan_pauli_rotation(&c, &l, &one(1), &one(1), 3, 0.05).unwrap();
        let r = verify_plan(&c, &l, &plan, &VerifyOptions::default()).unwrap();
        assert!(r.weak_transversal, "{}", r.to_json());
        let hit: f64 = r.branches.iter().filter(|b| (b.angle - 0.05).abs() < 1e-10).map(|b| b.probability).sum();
        assert!(hit > 0.5);
    }

    #[test]
    fn scan_steane() {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let rows = scan_code(&c, &l, &ScanOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.verdict == Verdict::Yes));
        assert!(scan_to_csv(&rows).starts_with("pauli_string,verdict,max_deviation\nX,yes,"));
    }
}
