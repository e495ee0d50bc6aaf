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

//! Repeat-until-success rotation synthesis under phenomenological noise,
//! closed-form diamond distances for same-axis rotation mixtures, and the
//! diluted (identity-mixed) variant.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::{
    branch_probability, canonical_angle, logical_angle, physical_angle_for_branch, physical_angle_for_target,
};
use crate::error::{Error, Result};
use crate::punctured::for_each_combination;

/// How the controller picks the next physical angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Controller {
    /// Target the residual with the `χ = 0` branch only.
    ZeroBranch,
    /// Pick the `χ` (and, with a Pauli frame, the residual modulo `π/2`)
    /// whose branch probability is largest.
    BestBranch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RusConfig {
    pub m: usize,
    pub target_angle: f64,
    pub p_phys: f64,
    pub max_iterations: usize,
    pub truncation_threshold: f64,
    pub rounds_per_iteration: usize,
    /// Discarded mass above this is flagged in the outcome.
    pub truncation_budget: f64,
    pub controller: Controller,
    /// Treat residuals modulo `π/2`: a leftover `e^{iπ/2 P̄}` is a logical Pauli.
    pub pauli_frame: bool,
    /// Keep per-branch `(decoded χ, true χ)` histories.
    pub record_history: bool,
    /// Unused by the exact branch enumeration; kept so configs are reproducible
    /// if a sampling back end is added.
    pub seed: u64,
}

impl Default for RusConfig {
    fn default() -> Self {
        Self {
            m: 5,
            target_angle: 0.003,
            p_phys: 0.0,
            max_iterations: 30,
            truncation_threshold: 1e-12,
            rounds_per_iteration: 1,
            truncation_budget: 1e-6,
            controller: Controller::BestBranch,
            pauli_frame: true,
            record_history: false,
            seed: 0,
        }
    }
}

impl RusConfig {
    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m % 2 == 0 || self.m > 25 {
            return Err(Error::Domain(format!("M must be odd and at most 25, got {}", self.m)));
        }
        if !(0.0..1.0).contains(&self.p_phys) {
            return Err(Error::Domain(format!("p_phys must lie in [0, 1), got {}", self.p_phys)));
        }
        if !(self.truncation_threshold >= 0.0) {
            return Err(Error::Domain("truncation threshold must be non-negative".into()));
        }
        if !self.target_angle.is_finite() || self.target_angle.abs() > FRAC_PI_2 {
            return Err(Error::Domain(format!("target angle {} out of range", self.target_angle)));
        }
        if self.rounds_per_iteration == 0 {
            return Err(Error::Domain("rounds_per_iteration must be positive".into()));
        }
        Ok(())
    }

    /// Per-site fault probability over one iteration.
    pub fn p_eff(&self) -> f64 {
        1.0 - (1.0 - self.p_phys).powi(self.rounds_per_iteration as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub decoded_chi: u8,
    pub true_chi: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RusBranch {
    pub history: Vec<IterationRecord>,
    pub probability: f64,
    /// Cumulative angle the controller believes was applied.
    pub believed_angle: f64,
    /// Cumulative logical angle actually applied.
    pub true_angle: f64,
    pub terminated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    /// Distance if the protocol stopped after this iteration.
    pub diamond_distance: f64,
    /// `Σ p e^{2iφ}` over retained branches, normalized by retained mass.
    pub mean_phase: (f64, f64),
    pub live_mass: f64,
    pub live_branches: usize,
    pub discarded_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RusOutcome {
    pub config: RusConfig,
    /// Terminated and still-running branches at the end.
    pub branches: Vec<RusBranch>,
    pub discarded_mass: f64,
    /// Output channel as `(probability, logical angle)`, merged by angle.
    pub channel: Vec<(f64, f64)>,
    pub diamond_distance: f64,
    pub mean_iterations: f64,
    pub success_probability: f64,
    pub per_iteration: Vec<IterationStats>,
    pub budget_exceeded: bool,
}

/// `½|Σ p_b e^{2iφ_b} − e^{2iβ}|`, the diamond distance between a mixture of
/// rotations about one axis and the target rotation.
pub fn diamond_distance_zmix(branches: &[(f64, f64)], target: f64) -> Result<f64> {
    let total: f64 = branches.iter().map(|b| b.0).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("branch probabilities sum to {total}, not 1")));
    }
    Ok(distance_from_phase(phase_sum(branches), target))
}

fn phase_sum(branches: &[(f64, f64)]) -> Complex64 {
    branches
        .iter()
        .map(|&(p, phi)| p * Complex64::from_polar(1.0, 2.0 * phi))
        .sum()
}

fn distance_from_phase(mean: Complex64, target: f64) -> f64 {
    0.5 * (mean - Complex64::from_polar(1.0, 2.0 * target)).norm()
}

/// Weight on `angle_pos` that cancels the first-order error of mixing two
/// rotations (angles relative to the target), and the resulting distance.
pub fn optimal_mixture(angle_pos: f64, angle_neg: f64) -> Result<(f64, f64)> {
    if !(angle_pos > 0.0 && angle_neg < 0.0) {
        return Err(Error::Domain(format!(
            "need angle_pos > 0 > angle_neg, got {angle_pos}, {angle_neg}"
        )));
    }
    let a = (2.0 * angle_pos).sin();
    let b = (2.0 * angle_neg).sin().abs();
    let p1 = b / (a + b);
    let d = diamond_distance_zmix(&[(p1, angle_pos), (1.0 - p1, angle_neg)], 0.0)?;
    Ok((p1, d))
}

/// Noise kernel: for true weight `χ_t`, the distribution over decoded
/// `(χ_d, flip)` when each site independently faults with probability `p`.
/// `flip` marks decoding onto the complement, a logical `e^{iπ/2 P̄}` error.
pub fn fault_kernel(m: usize, p: f64) -> Vec<Vec<(usize, bool, f64)>> {
    let half = (m - 1) / 2;
    let mut out = Vec::with_capacity(half + 1);
    for chi_t in 0..=half {
        let mut acc: BTreeMap<(usize, bool), f64> = BTreeMap::new();
        let mut count = 0.0;
        for_each_combination(m, chi_t, |s| {
            count += 1.0;
            for f in 0u64..(1u64 << m) {
                let wf = f.count_ones() as i32;
                let pf = p.powi(wf) * (1.0 - p).powi(m as i32 - wf);
                if pf == 0.0 {
                    continue;
                }
                let w = (s ^ f).count_ones() as usize;
                let key = if w <= half { (w, false) } else { (m - w, true) };
                *acc.entry(key).or_insert(0.0) += pf;
            }
            true
        });
        out.push(acc.into_iter().map(|((c, fl), v)| (c, fl, v / count)).collect());
    }
    out
}

#[derive(Clone, Debug)]
struct Live {
    prob: f64,
    believed: f64,
    delta: f64,
    history: Vec<IterationRecord>,
}

/// Residual rotation the controller still needs, and whether it is done.
fn residual(cfg: &RusConfig, believed: f64) -> f64 {
    let r = canonical_angle(cfg.target_angle - believed);
    if cfg.pauli_frame {
        crate::angles::canonical_angle_mod_pauli(r)
    } else {
        r
    }
}

/// `(θ, χ*)` for the next layer.
fn choose(cfg: &RusConfig, r: f64) -> (f64, usize) {
    let m = cfg.m;
    match cfg.controller {
        Controller::ZeroBranch => (physical_angle_for_target(m, r).expect("valid angle"), 0),
        Controller::BestBranch => {
            let mut cands = vec![canonical_angle(r)];
            if cfg.pauli_frame {
                let other = canonical_angle(r + FRAC_PI_2);
                if other != cands[0] {
                    cands.push(other);
                }
            }
            let mut best: Option<(f64, f64, usize)> = None;
            for &rc in &cands {
                for chi in 0..=(m - 1) / 2 {
                    let th = physical_angle_for_branch(m, chi, rc).expect("valid angle");
                    let p = branch_probability(m, chi, th);
                    if best.map_or(true, |b| p > b.0) {
                        best = Some((p, th, chi));
                    }
                }
            }
            let b = best.expect("nonempty");
            (b.1, b.2)
        }
    }
}

/// Runs the branch-tree simulation.
///
/// Each iteration applies the chosen layer to every live branch. The true
/// correction weight `χ_t` follows `p_χ(θ)`; faults turn it into the decoded
/// `χ_d` via [`fault_kernel`]. The controller only sees `χ_d`: a branch stops
/// when `χ_d` is the targeted weight, otherwise it carries on from the
/// believed cumulative angle. Branches with probability below the threshold
/// are dropped and their mass tallied.
pub fn run_rus(cfg: &RusConfig) -> Result<RusOutcome> {
    cfg.validate()?;
    let m = cfg.m;
    let kernel = fault_kernel(m, cfg.p_eff());
    let target = cfg.target_angle;
    let mut live = vec![Live {
        prob: 1.0,
        believed: 0.0,
        delta: 0.0,
        history: Vec::new(),
    }];
    let mut done: Vec<RusBranch> = Vec::new();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut success_mass = 0.0;
    let mut iter_weighted = 0.0;
    let mut discarded = 0.0;
    let mut per_iteration = Vec::with_capacity(cfg.max_iterations);

    // a zero target needs no layer at all
    if residual(cfg, 0.0) == 0.0 {
        live.clear();
        done.push(RusBranch {
            history: Vec::new(),
            probability: 1.0,
            believed_angle: 0.0,
            true_angle: target,
            terminated: true,
        });
        acc = Complex64::from_polar(1.0, 2.0 * target);
        success_mass = 1.0;
    }

    for it in 1..=cfg.max_iterations {
        if live.is_empty() {
            break;
        }
        // expand in parallel, merge in parent order
        let children: Vec<Vec<(Live, bool)>> = live
            .par_iter()
            .map(|b| {
                let r = residual(cfg, b.believed);
                let (theta, chi_star) = choose(cfg, r);
                let half = kernel.len();
                let mut pt = [0.0f64; 13];
                let mut ang = [0.0f64; 13];
                for chi in 0..half {
                    pt[chi] = branch_probability(m, chi, theta);
                    ang[chi] = logical_angle(m, chi, theta);
                }
                let mut out = Vec::with_capacity(half * 4);
                for (chi_t, row) in kernel.iter().enumerate() {
                    for &(chi_d, flip, pk) in row {
                        let q = b.prob * pt[chi_t] * pk;
                        let mut delta = b.delta;
                        if chi_t != chi_d || flip {
                            delta += ang[chi_t] - ang[chi_d] + if flip { FRAC_PI_2 } else { 0.0 };
                        }
                        let mut history = Vec::new();
                        if cfg.record_history {
                            history = b.history.clone();
                            history.push(IterationRecord {
                                decoded_chi: chi_d as u8,
                                true_chi: chi_t as u8,
                            });
                        }
                        out.push((
                            Live {
                                prob: q,
                                believed: b.believed + ang[chi_d],
                                delta,
                                history,
                            },
                            chi_d == chi_star,
                        ));
                    }
                }
                out
            })
            .collect();
        let mut next: HashMap<(u64, u64), Live> = HashMap::with_capacity(live.len() * 4);
        for (child, success) in children.into_iter().flatten() {
            if child.prob < cfg.truncation_threshold || child.prob == 0.0 {
                discarded += child.prob;
                continue;
            }
            if success {
                let true_angle = target + child.delta;
                acc += child.prob * Complex64::from_polar(1.0, 2.0 * true_angle);
                success_mass += child.prob;
                iter_weighted += child.prob * it as f64;
                done.push(RusBranch {
                    history: child.history,
                    probability: child.prob,
                    believed_angle: target,
                    true_angle,
                    terminated: true,
                });
                continue;
            }
            let key = (child.believed.to_bits(), child.delta.to_bits());
            match next.get_mut(&key) {
                Some(e) => {
                    if child.prob > e.prob && cfg.record_history {
                        e.history = child.history;
                    }
                    e.prob += child.prob;
                }
                None => {
                    next.insert(key, child);
                }
            }
        }
        let mut merged: Vec<((u64, u64), Live)> = next.into_iter().collect();
        merged.sort_unstable_by_key(|e| e.0);
        live = merged.into_iter().map(|e| e.1).collect();
        let live_mass: f64 = live.iter().map(|b| b.prob).sum();
        let live_phase: Complex64 = live
            .iter()
            .map(|b| b.prob * Complex64::from_polar(1.0, 2.0 * (b.believed + b.delta)))
            .sum();
        let kept = 1.0 - discarded;
        let mean = (acc + live_phase) / kept;
        per_iteration.push(IterationStats {
            iteration: it,
            diamond_distance: distance_from_phase(mean, target),
            mean_phase: (mean.re, mean.im),
            live_mass,
            live_branches: live.len(),
            discarded_mass: discarded,
        });
    }

    let kept = 1.0 - discarded;
    let mut channel_map: BTreeMap<u64, f64> = BTreeMap::new();
    for b in &done {
        *channel_map.entry(b.true_angle.to_bits()).or_insert(0.0) += b.probability / kept;
    }
    let mut branches = done;
    for b in live {
        let true_angle = b.believed + b.delta;
        *channel_map.entry(true_angle.to_bits()).or_insert(0.0) += b.prob / kept;
        branches.push(RusBranch {
            history: b.history,
            probability: b.prob,
            believed_angle: b.believed,
            true_angle,
            terminated: false,
        });
    }
    let channel: Vec<(f64, f64)> = channel_map.into_iter().map(|(a, p)| (p, f64::from_bits(a))).collect();
    let diamond_distance = match per_iteration.last() {
        Some(s) => s.diamond_distance,
        None => distance_from_phase(acc, target),
    };
    let mean_iterations = if success_mass > 0.0 { iter_weighted / success_mass } else { 0.0 };
    Ok(RusOutcome {
        config: cfg.clone(),
        branches,
        discarded_mass: discarded,
        channel,
        diamond_distance,
        mean_iterations,
        success_probability: success_mass,
        per_iteration,
        budget_exceeded: discarded > cfg.truncation_budget,
    })
}

/// Choice of the larger base angle for [`run_diluted_rus`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dilution {
    Fixed { theta_big: f64 },
    /// Geometric grid of `points` base angles in `[min, max]`, plus the plain
    /// run (`θ_big = |target|`); the smallest final distance wins. Grid
    /// points not above `|target|` are skipped.
    Optimized { min: f64, max: f64, points: usize },
}

impl Default for Dilution {
    fn default() -> Self {
        Dilution::Optimized {
            min: 0.005,
            max: 0.2,
            points: 12,
        }
    }
}

impl Dilution {
    /// Base angles tried for `target`.
    pub fn candidates(&self, target: f64) -> Result<Vec<f64>> {
        let t = target.abs();
        match *self {
            Dilution::Fixed { theta_big } => {
                if !(theta_big.abs() >= t) {
                    return Err(Error::Domain(format!("base angle {theta_big} must be at least |target| = {t}")));
                }
                Ok(vec![theta_big.abs()])
            }
            Dilution::Optimized { min, max, points } => {
                if !(min > 0.0 && max >= min && max < FRAC_PI_2 / 2.0) || points == 0 {
                    return Err(Error::Domain(format!("invalid dilution grid [{min}, {max}] x {points}")));
                }
                let mut out = vec![t];
                for i in 0..points {
                    let f = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
                    let g = min * (max / min).powf(f);
                    if g > t {
                        out.push(g);
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilutedOutcome {
    pub target: f64,
    pub theta_big: f64,
    /// Weight on the RUS channel; the identity gets `1 − q`.
    pub q: f64,
    pub diamond_distance: f64,
    /// Distance after each iteration of the inner run.
    pub per_iteration: Vec<f64>,
    pub inner: RusOutcome,
}

/// Mixing weight that puts the average phase of `(1−q)·I + q·R(θ_big)` on
/// the target. Both angles are taken positive.
pub fn dilution_weight(target: f64, theta_big: f64) -> f64 {
    if theta_big == target {
        return 1.0;
    }
    let a = (2.0 * (theta_big - target)).sin();
    let b = (2.0 * target).sin();
    b / (a + b)
}

fn mean_of(s: &IterationStats) -> Complex64 {
    Complex64::new(s.mean_phase.0, s.mean_phase.1)
}

/// Mixes a finished inner run (targeting `±θ_big`) with the identity so the
/// average lands on `target`.
pub fn dilute(inner: &RusOutcome, target: f64) -> Result<DilutedOutcome> {
    let big = inner.config.target_angle;
    if target == 0.0 || big.signum() != target.signum() || big.abs() < target.abs() {
        return Err(Error::Domain(format!("cannot dilute a {big} rotation down to {target}")));
    }
    let q = dilution_weight(target.abs(), big.abs());
    let dist = |mean: Complex64| distance_from_phase((1.0 - q) + q * mean, target);
    let per_iteration: Vec<f64> = inner.per_iteration.iter().map(|s| dist(mean_of(s))).collect();
    let final_mean = match inner.per_iteration.last() {
        Some(s) => mean_of(s),
        None => phase_sum(&inner.channel),
    };
    Ok(DilutedOutcome {
        target,
        theta_big: big,
        q,
        diamond_distance: dist(final_mean),
        per_iteration,
        inner: inner.clone(),
    })
}

/// Runs the inner RUS for every candidate base angle.
fn inner_runs(cfg: &RusConfig, angles: &[f64]) -> Result<Vec<RusOutcome>> {
    angles
        .par_iter()
        .map(|&g| {
            let mut c = cfg.clone();
            c.target_angle = g;
            run_rus(&c)
        })
        .collect()
}

fn best_diluted(inners: &[RusOutcome], target: f64) -> Result<DilutedOutcome> {
    let mut best: Option<DilutedOutcome> = None;
    for inner in inners {
        if inner.config.target_angle.abs() < target.abs() {
            continue;
        }
        let mut inner = inner.clone();
        if inner.config.target_angle.signum() != target.signum() {
            mirror(&mut inner);
        }
        let d = dilute(&inner, target)?;
        if best.as_ref().map_or(true, |b| d.diamond_distance < b.diamond_distance) {
            best = Some(d);
        }
    }
    best.ok_or_else(|| Error::Domain(format!("no usable base angle for target {target}")))
}

/// Reflects a run about zero: the tree for `−β` is the mirror of the tree for `β`.
fn mirror(o: &mut RusOutcome) {
    o.config.target_angle = -o.config.target_angle;
    for s in &mut o.per_iteration {
        s.mean_phase.1 = -s.mean_phase.1;
    }
    for c in &mut o.channel {
        c.1 = -c.1;
    }
    for b in &mut o.branches {
        b.believed_angle = -b.believed_angle;
        b.true_angle = -b.true_angle;
    }
}

/// `(1−q)·identity + q·RUS(θ_big)`.
pub fn run_diluted_rus(cfg: &RusConfig, dilution: Dilution) -> Result<DilutedOutcome> {
    cfg.validate()?;
    let target = cfg.target_angle;
    if target == 0.0 {
        return Err(Error::Domain("dilution needs a nonzero target".into()));
    }
    let angles: Vec<f64> = dilution
        .candidates(target)?
        .into_iter()
        .map(|g| g * target.signum())
        .collect();
    let inners = inner_runs(cfg, &angles)?;
    best_diluted(&inners, target)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Plain,
    Diluted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub m: usize,
    pub p_phys: f64,
    pub target: f64,
    pub iteration: usize,
    pub diamond_distance: f64,
    pub discarded_mass: f64,
}

/// Distance-versus-iteration curves for every `(M, target, variant)`.
/// Diluted rows reuse one set of inner runs per `M`.
pub fn sweep_fig4(
    ms: &[usize],
    targets: &[f64],
    base: &RusConfig,
    variants: &[Variant],
    dilution: Dilution,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &m in ms {
        let mut cfg = base.clone();
        cfg.m = m;
        let mut angles: Vec<f64> = Vec::new();
        for &t in targets {
            if variants.contains(&Variant::Plain) {
                angles.push(t);
            }
            if variants.contains(&Variant::Diluted) {
                angles.extend(dilution.candidates(t)?.into_iter().map(|g| g * t.signum()));
            }
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup();
        let runs = inner_runs(&cfg, &angles)?;
        let find = |a: f64| runs.iter().find(|r| r.config.target_angle == a).expect("run present");
        for &t in targets {
            for &v in variants {
                let curve: Vec<(usize, f64, f64)> = match v {
                    Variant::Plain => find(t)
                        .per_iteration
                        .iter()
                        .map(|s| (s.iteration, s.diamond_distance, s.discarded_mass))
                        .collect(),
                    Variant::Diluted => {
                        let cands: Vec<RusOutcome> = dilution
                            .candidates(t)?
                            .into_iter()
                            .map(|g| find(g * t.signum()).clone())
                            .collect();
                        let d = best_diluted(&cands, t)?;
                        d.inner
                            .per_iteration
                            .iter()
                            .zip(&d.per_iteration)
                            .map(|(s, &dd)| (s.iteration, dd, s.discarded_mass))
                            .collect()
                    }
                };
                rows.extend(curve.into_iter().map(|(iteration, diamond_distance, discarded_mass)| SweepRow {
                    variant: v,
                    m,
                    p_phys: cfg.p_phys,
                    target: t,
                    iteration,
                    diamond_distance,
                    discarded_mass,
                }));
            }
        }
    }
    Ok(rows)
}

/// Final-iteration distance per `(variant, M, target)`.
pub fn sweep_final(rows: &[SweepRow]) -> Vec<&SweepRow> {
    let mut out: Vec<&SweepRow> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some(last) if last.variant == r.variant && last.m == r.m && last.target == r.target => *last = r,
            _ => out.push(r),
        }
    }
    out
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "# schema: weakrot-rus-sweep v1\nvariant,M,p_phys,target,iteration,diamond_distance,discarded_mass\n",
    );
    for r in rows {
        let v = match r.variant {
            Variant::Plain => "plain",
            Variant::Diluted => "diluted",
        };
        let _ = writeln!(
            s,
            "{v},{},{:e},{:e},{},{:e},{:e}",
            r.m, r.p_phys, r.target, r.iteration, r.diamond_distance, r.discarded_mass
        );
    }
    s
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_branch_is_sine() {
        let d = diamond_distance_zmix(&[(1.0, 0.3)], 0.0).unwrap();
        assert!((d - 0.3f64.sin()).abs() < 1e-15);
        assert_eq!(diamond_distance_zmix(&[(1.0, 0.0)], 0.0).unwrap(), 0.0);
        assert!(diamond_distance_zmix(&[(0.5, 0.0)], 0.0).is_err());
    }

    #[test]
    fn symmetric_mixture_is_quadratic() {
        let t: f64 = 0.01;
        let d = diamond_distance_zmix(&[(0.5, t), (0.5, -t)], 0.0).unwrap();
        assert!((d - t.sin().powi(2)).abs() < 1e-15);
        let (p, d2) = optimal_mixture(t, -t).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((d2 - t.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn kernel_rows_normalized() {
        for m in [3, 5, 7] {
            for row in fault_kernel(m, 0.01) {
                let s: f64 = row.iter().map(|r| r.2).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        let k = fault_kernel(3, 0.0);
        assert_eq!(k[0], vec![(0, false, 1.0)]);
        assert_eq!(k[1], vec![(1, false, 1.0)]);
    }

    #[test]
    fn dilution_reduces_to_plain() {
        let cfg = RusConfig {
            m: 3,
            target_angle: 0.01,
            max_iterations: 5,
            ..Default::default()
        };
        let plain = run_rus(&cfg).unwrap();
        let dil = run_diluted_rus(&cfg, Dilution::Fixed { theta_big: 0.01 }).unwrap();
        assert_eq!(dil.per_iteration.len(), plain.per_iteration.len());
        assert_eq!(dil.q, 1.0);
        assert_eq!(dil.diamond_distance, plain.diamond_distance);
    }
}
