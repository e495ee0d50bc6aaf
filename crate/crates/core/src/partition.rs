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

//! Disjoint support partitions of logical Pauli operators and circuit plans
//! for rotations about them.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::{logical_angle, physical_angle_for_target, s_gate_probability};
use crate::codes::{code_distances, LogicalOperatorSet, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliOp;

/// Largest term count accepted by [`validate_partition`].
pub const MAX_TERMS: usize = 15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportPartition {
    /// The logical operator whose rotation is implemented; equals the product of the terms.
    pub target: PauliOp,
    pub terms: Vec<PauliOp>,
    /// Physical angle per term.
    pub angles: Vec<f64>,
}

impl SupportPartition {
    pub fn m(&self) -> usize {
        self.terms.len()
    }

    /// Common angle when all terms share one.
    pub fn homogeneous_angle(&self) -> Option<f64> {
        let first = *self.angles.first()?;
        self.angles.iter().all(|&a| a == first).then_some(first)
    }

    pub fn product(&self) -> PauliOp {
        let n = self.target.num_qubits();
        self.terms.iter().fold(PauliOp::identity(n), |acc, t| acc.mul(t))
    }

    pub fn with_angle(mut self, theta: f64) -> Self {
        self.angles = vec![theta; self.terms.len()];
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub m_odd: bool,
    pub product_matches: bool,
    pub x_disjoint: bool,
    pub z_disjoint: bool,
    pub terms_commute: bool,
    /// Proper subsets (as term-index lists) whose product commutes with every generator.
    pub failing_subsets: Vec<Vec<usize>>,
    pub subsets_checked: u64,
    /// Homogeneous angles are needed for the closed-form ensemble.
    pub closed_form: bool,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// Checks oddness, product, sector disjointness and that every proper nonempty
/// subset product is detected by some generator.
pub fn validate_partition(code: &StabilizerCode, p: &SupportPartition) -> PartitionReport {
    let m = p.m();
    let mut notes = Vec::new();
    let m_odd = m % 2 == 1;
    if !m_odd {
        notes.push(format!("term count {m} is even"));
    }
    let prod = p.product();
    let product_matches = prod.x() == p.target.x() && prod.z() == p.target.z() && prod.phase() == p.target.phase();
    if !product_matches {
        notes.push(format!("product {prod} differs from target {}", p.target));
    }
    let n = code.n();
    let mut seen_x = BitVec::zeros(n);
    let mut seen_z = BitVec::zeros(n);
    let (mut x_disjoint, mut z_disjoint) = (true, true);
    for t in &p.terms {
        x_disjoint &= seen_x.and_weight(t.x()) == 0;
        z_disjoint &= seen_z.and_weight(t.z()) == 0;
        seen_x = seen_x.or(t.x());
        seen_z = seen_z.or(t.z());
    }
    if !(x_disjoint && z_disjoint) {
        notes.push("term supports overlap".into());
    }
    let terms_commute = (0..m).all(|i| (i + 1..m).all(|j| p.terms[i].commutes(&p.terms[j])));
    let closed_form = p.homogeneous_angle().is_some();
    if !closed_form {
        notes.push("inhomogeneous angles: no closed-form ensemble".into());
    }
    let mut failing_subsets = Vec::new();
    let mut subsets_checked = 0;
    if m > MAX_TERMS {
        notes.push(format!("{m} terms exceed the subset-check cap of {MAX_TERMS}"));
    } else if m >= 2 {
        let syndromes: Vec<BitVec> = p.terms.iter().map(|t| code.syndrome(t)).collect();
        let full = (1u32 << m) - 1;
        failing_subsets = (1..full)
            .into_par_iter()
            .filter(|&mask| {
                let mut s = BitVec::zeros(syndromes[0].len());
                for (i, syn) in syndromes.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        s.xor_assign(syn);
                    }
                }
                s.is_zero()
            })
            .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
            .collect();
        subsets_checked = u64::from(full) - 1;
        if !failing_subsets.is_empty() {
            notes.push(format!(
                "{} proper subsets commute with all generators, first {:?}",
                failing_subsets.len(),
                failing_subsets[0]
            ));
        }
    }
    let passed = m_odd
        && product_matches
        && x_disjoint
        && z_disjoint
        && terms_commute
        && m <= MAX_TERMS
        && failing_subsets.is_empty();
    PartitionReport {
        m_odd,
        product_matches,
        x_disjoint,
        z_disjoint,
        terms_commute,
        failing_subsets,
        subsets_checked,
        closed_form,
        notes,
        passed,
    }
}

/// Splits `rest` (in order) into `parts` consecutive groups whose sizes differ
/// by at most one, larger groups first.
pub fn split_even(rest: &[usize], parts: usize) -> Vec<Vec<usize>> {
    let base = rest.len() / parts;
    let extra = rest.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut pos = 0;
    for g in 0..parts {
        let size = base + usize::from(g < extra);
        out.push(rest[pos..pos + size].to_vec());
        pos += size;
    }
    out
}

/// Restricts `target` to each qubit group; the product of the pieces equals
/// `target` exactly (the first piece absorbs any sign).
pub fn terms_from_groups(target: &PauliOp, groups: &[Vec<usize>]) -> Vec<PauliOp> {
    let n = target.num_qubits();
    let mut terms: Vec<PauliOp> =
        groups.iter().map(|g| target.mask(&BitVec::from_indices(n, g))).collect();
    let prod = terms.iter().fold(PauliOp::identity(n), |a, t| a.mul(t));
    let fix = (4 + target.phase() - prod.phase()) % 4;
    if fix != 0 {
        let first = terms.remove(0).times_i(fix);
        terms.insert(0, first);
    }
    terms
}

fn pivot_mask(rows: Vec<BitVec>, n: usize) -> BitVec {
    if rows.is_empty() {
        return BitVec::zeros(n);
    }
    let g = BitMatrix::from_rows(n, rows);
    BitVec::from_indices(n, &g.rref_with_transform().pivot_cols)
}

fn check_mu(mu: &BitVec, k: usize, what: &str) -> Result<()> {
    if mu.len() != k {
        return Err(Error::LengthMismatch {
            left: mu.len(),
            right: k,
        });
    }
    let _ = what;
    Ok(())
}

fn build_partition(
    code: &StabilizerCode,
    target: PauliOp,
    first: BitVec,
    m: usize,
    theta: f64,
) -> Result<SupportPartition> {
    if m % 2 == 0 {
        return Err(Error::Partition(format!("term count must be odd, got {m}")));
    }
    if m > MAX_TERMS {
        return Err(Error::Unsupported(format!("{m} terms exceed the cap of {MAX_TERMS}")));
    }
    let support = target.support();
    if support.len() < m {
        return Err(Error::Partition(format!(
            "target weight {} is smaller than the requested {m} terms",
            support.len()
        )));
    }
    let groups = if m == 1 {
        vec![support]
    } else {
        let first_idx = first.support();
        let rest: Vec<usize> = support.iter().copied().filter(|q| !first.get(*q)).collect();
        if first_idx.is_empty() || rest.len() < m - 1 {
            return Err(Error::Partition(format!(
                "cannot split {} qubits into {m} nonempty groups around the pivot set",
                support.len()
            )));
        }
        let mut groups = vec![first_idx];
        groups.extend(split_even(&rest, m - 1));
        groups
    };
    let terms = terms_from_groups(&target, &groups);
    let p = SupportPartition {
        target,
        terms,
        angles: vec![theta; m],
    };
    let report = validate_partition(code, &p);
    if !report.passed {
        return Err(Error::Partition(report.notes.join("; ")));
    }
    Ok(p)
}

/// Partition of `Z̄^mu` into `m` terms: the pivot columns of the stacked
/// logical Z rows form the first term, the rest is split in index order.
/// A single even-weight logical pairs its two lowest qubits instead.
pub fn partition_z(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    mu: &BitVec,
    m: usize,
    theta: f64,
) -> Result<SupportPartition> {
    partition_xz(code, logicals, &BitVec::zeros(mu.len()), mu, m, theta)
}

/// Partition of `X̄^mu Z̄^nu` for disjoint `mu`, `nu`.
pub fn partition_xz(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    mu: &BitVec,
    nu: &BitVec,
    m: usize,
    theta: f64,
) -> Result<SupportPartition> {
    let k = logicals.k();
    check_mu(mu, k, "mu")?;
    check_mu(nu, k, "nu")?;
    if mu.and_weight(nu) != 0 {
        return Err(Error::Domain(
            "mu and nu overlap: Y components need plan_pauli_rotation".into(),
        ));
    }
    let (qx, qz) = (mu.weight(), nu.weight());
    if qx + qz == 0 {
        return Err(Error::Domain("target is the identity".into()));
    }
    if let Some((dx, dz)) = code_distances(code) {
        if qx > dx || qz > dz {
            return Err(Error::Domain(format!(
                "({qx}, {qz})-body target exceeds distances ({dx}, {dz})"
            )));
        }
    }
    let n = code.n();
    let target = logicals.logical_pauli(mu, nu)?;
    let ax = pivot_mask(mu.support().iter().map(|&i| logicals.logical_x[i].x().clone()).collect(), n);
    let bz = pivot_mask(nu.support().iter().map(|&i| logicals.logical_z[i].z().clone()).collect(), n);
    let mut first = target.x().and(&ax).or(&target.z().and(&bz));
    let support = target.support();
    if qx == 0 && qz == 1 && support.len() % 2 == 0 {
        first = BitVec::from_indices(n, &support[..2]);
    }
    build_partition(code, target, first, m, theta)
}

/// Recovery after a syndrome measurement: apply the decoded correction, then
/// optionally a logical Pauli to force the sign of a `±π/4` rotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub fixup: Option<LogicalFixup>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalFixup {
    /// Logical Pauli applied when the realized sign is wrong.
    pub logical: PauliOp,
    /// Desired sign of the realized `±π/4` angle.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum PlanStep {
    RotationLayer { partition: SupportPartition },
    SyndromeMeasurement,
    Recovery(Recovery),
    /// `e^{sign·iπ/4 Z̄_q}` on logical qubit `q`.
    SGateBlock {
        sign: i8,
        logical_qubit: usize,
        steps: Vec<PlanStep>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitPlan {
    /// Logical operator the whole plan rotates about.
    pub target: PauliOp,
    pub steps: Vec<PlanStep>,
}

impl CircuitPlan {
    /// Number of top-level blocks (rotation layers and S blocks).
    pub fn block_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, PlanStep::RotationLayer { .. } | PlanStep::SGateBlock { .. }))
            .count()
    }

    /// Every rotation layer is followed by a syndrome measurement and a recovery.
    pub fn is_well_formed(&self) -> bool {
        fn check(steps: &[PlanStep]) -> bool {
            steps.iter().enumerate().all(|(i, s)| match s {
                PlanStep::RotationLayer { .. } => {
                    matches!(steps.get(i + 1), Some(PlanStep::SyndromeMeasurement))
                        && matches!(steps.get(i + 2), Some(PlanStep::Recovery(_)))
                }
                PlanStep::SGateBlock { steps, .. } => check(steps),
                _ => true,
            })
        }
        check(&self.steps)
    }

    /// Probability that the logical fix-up of an S block fires.
    pub fn fixup_probability(&self) -> Option<f64> {
        self.steps.iter().find_map(|s| match s {
            PlanStep::Recovery(Recovery { fixup: Some(f) }) => {
                let m = self.steps.iter().find_map(|s| match s {
                    PlanStep::RotationLayer { partition } => Some(partition.m()),
                    _ => None,
                })?;
                let (plus, minus) = s_gate_probability(m).ok()?;
                Some(if f.sign > 0 { minus } else { plus })
            }
            _ => None,
        })
    }
}

/// Odd term count used when none is given: the weight, or one less when even.
pub fn default_m(weight: usize) -> usize {
    if weight % 2 == 1 {
        weight
    } else {
        weight.saturating_sub(1).max(1)
    }
}

/// Rotation layer at `±π/4` about `Z̄^mu`, then measurement and a recovery
/// that fixes the sign with `Z̄^mu`.
pub fn plan_s_gate(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    mu: &BitVec,
    m: Option<usize>,
    sign: i8,
) -> Result<CircuitPlan> {
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("sign must be +1 or -1, got {sign}")));
    }
    let target = logicals.logical_pauli(&BitVec::zeros(mu.len()), mu)?;
    let m = m.unwrap_or_else(|| default_m(target.weight()));
    let partition = partition_z(code, logicals, mu, m, FRAC_PI_4)?;
    let fixup = LogicalFixup {
        logical: partition.target.clone(),
        sign,
    };
    Ok(CircuitPlan {
        target: partition.target.clone(),
        steps: vec![
            PlanStep::RotationLayer { partition },
            PlanStep::SyndromeMeasurement,
            PlanStep::Recovery(Recovery { fixup: Some(fixup) }),
        ],
    })
}

/// Sign of `θ̄_χ` for a `π/4` rotation layer: decides whether the fix-up fires.
pub fn s_block_realized_sign(m: usize, chi: usize) -> i8 {
    if logical_angle(m, chi, FRAC_PI_4) > 0.0 {
        1
    } else {
        -1
    }
}

/// Rotation about `X̄^mu Z̄^nu` (with `Ȳ_i = iX̄_iZ̄_i` wherever both are set).
/// The layer angle is chosen so that the `χ = 0` branch realizes `target_angle`.
/// Y components are handled by conjugating an X rotation with S blocks:
/// `e^{+iπ/4 Z̄}` first, the rotation, then `e^{-iπ/4 Z̄}`.
pub fn plan_pauli_rotation(
    code: &StabilizerCode,
    logicals: &LogicalOperatorSet,
    mu: &BitVec,
    nu: &BitVec,
    m: usize,
    target_angle: f64,
) -> Result<CircuitPlan> {
    let theta = physical_angle_for_target(m, target_angle)?;
    let both = mu.and(nu);
    let nu_rest = nu.and_not(&both);
    let partition = partition_xz(code, logicals, mu, &nu_rest, m, theta)?;
    let rotation = [
        PlanStep::RotationLayer { partition },
        PlanStep::SyndromeMeasurement,
        PlanStep::Recovery(Recovery { fixup: None }),
    ];
    let target = logicals.logical_pauli(mu, nu)?;
    if both.is_zero() {
        return Ok(CircuitPlan {
            target,
            steps: rotation.to_vec(),
        });
    }
    let k = logicals.k();
    let s_block = |q: usize, sign: i8| -> Result<PlanStep> {
        let e = BitVec::from_indices(k, &[q]);
        let plan = plan_s_gate(code, logicals, &e, None, sign)?;
        Ok(PlanStep::SGateBlock {
            sign,
            logical_qubit: q,
            steps: plan.steps,
        })
    };
    let mut steps = Vec::new();
    for q in both.support() {
        steps.push(s_block(q, 1)?);
    }
    steps.extend(rotation);
    for q in both.support() {
        steps.push(s_block(q, -1)?);
    }
    Ok(CircuitPlan { target, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_rotated_surface, build_steane, compute_logicals};

    #[test]
    fn split_sizes() {
        let groups = split_even(&[1, 2, 3, 4, 5, 6], 4);
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 2, 1, 1]);
    }

    #[test]
    fn steane_singletons() {
        let c = build_steane();
        let l = compute_logicals(&c).unwrap();
        let p = partition_z(&c, &l, &BitVec::ones(1), 3, 0.3).unwrap();
        assert!(p.terms.iter().all(|t| t.weight() == 1));
    }

    #[test]
    fn surface7_m5_sizes() {
        let c = build_rotated_surface(7).unwrap();
        let l = compute_logicals(&c).unwrap();
        let p = partition_z(&c, &l, &BitVec::ones(1), 5, 0.1).unwrap();
        let mut sizes: Vec<usize> = p.terms.iter().map(PauliOp::weight).collect();
        assert_eq!(sizes[0], 1);
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn even_m_and_subset_logical_fail() {
        let c = build_rotated_surface(3).unwrap();
        let l = compute_logicals(&c).unwrap();
        let target = l.logical_z[0].clone();
        let bad = SupportPartition {
            target: target.clone(),
            terms: vec![target.clone(), PauliOp::identity(9), PauliOp::identity(9)],
            angles: vec![0.1; 3],
        };
        assert!(!validate_partition(&c, &bad).passed);
        let q = target.support();
        let two = SupportPartition {
            target: target.clone(),
            terms: vec![target.on_qubits(&q[..1]), target.on_qubits(&q[1..])],
            angles: vec![0.1; 2],
        };
        let r = validate_partition(&c, &two);
        assert!(!r.m_odd && !r.passed);
    }
}
