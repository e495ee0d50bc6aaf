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

//! Resource estimates for the Trotter-like benchmark on four architectures:
//! surface code with Clifford+T or in-place rotations, and gross code with
//! Pauli-based computation or in-place rotations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "surface-cliffordT")]
    SurfaceCliffordT,
    #[serde(rename = "surface-cliffordPhi")]
    SurfaceCliffordPhi,
    #[serde(rename = "gross-pbc")]
    GrossPbc,
    #[serde(rename = "gross-cliffordPhi")]
    GrossCliffordPhi,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::SurfaceCliffordT,
        Architecture::SurfaceCliffordPhi,
        Architecture::GrossPbc,
        Architecture::GrossCliffordPhi,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Architecture::SurfaceCliffordT => "surface-cliffordT",
            Architecture::SurfaceCliffordPhi => "surface-cliffordPhi",
            Architecture::GrossPbc => "gross-pbc",
            Architecture::GrossCliffordPhi => "gross-cliffordPhi",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Domain(format!("unknown architecture {s:?}")))
    }

    pub fn default_policy(self) -> SchedulingPolicy {
        match self {
            Architecture::SurfaceCliffordT => SchedulingPolicy::SerialFactory,
            Architecture::GrossPbc => SchedulingPolicy::PbcSerialFactory,
            _ => SchedulingPolicy::ParallelLayers,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    /// Code cycles; absent for gross-code entries, which are quoted in timesteps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<f64>,
    pub timesteps: u64,
    pub error: f64,
}

impl CostEntry {
    fn new(cycles: Option<f64>, timesteps: u64, error: f64) -> Self {
        Self {
            cycles,
            timesteps,
            error,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerCycleErrorMode {
    /// Use `per_cycle_error` as given.
    Table,
    /// `0.01 (p_phys / p_th)^{(d+1)/2}`.
    Formula,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableParameters {
    pub d: u64,
    pub p_phys: f64,
    pub p_th: f64,
    pub timesteps_per_cycle: u64,
    pub per_cycle_error: f64,
    pub per_cycle_error_mode: PerCycleErrorMode,
    /// Physical qubits per magic state factory.
    pub factory_area: u64,
    pub factory_count: u64,
    /// Gross module constants `(c, u, a, a')`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<ModuleConstants>,
    /// Synthesis error per rotation.
    pub eps_syn: f64,
    /// Additive constant in the T-count model.
    pub t_count_offset: f64,
    /// Logical qubits per gross module.
    pub qubits_per_module: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleConstants {
    pub c: u64,
    pub u: u64,
    pub a: u64,
    pub a_prime: u64,
}

pub const GROSS_MODULE: ModuleConstants = ModuleConstants {
    c: 288,
    u: 90,
    a: 22,
    a_prime: 13,
};

impl TableParameters {
    pub fn surface_default() -> Self {
        Self {
            d: 7,
            p_phys: 1e-4,
            p_th: 1e-2,
            timesteps_per_cycle: 6,
            per_cycle_error: 1e-16,
            per_cycle_error_mode: PerCycleErrorMode::Table,
            factory_area: 810,
            factory_count: 1,
            module: None,
            eps_syn: 1e-4,
            t_count_offset: 0.0,
            qubits_per_module: 12,
        }
    }

    pub fn gross_default() -> Self {
        Self {
            timesteps_per_cycle: 8,
            module: Some(GROSS_MODULE),
            ..Self::surface_default()
        }
    }

    /// Logical error per code cycle under the selected mode.
    pub fn effective_per_cycle_error(&self) -> f64 {
        match self.per_cycle_error_mode {
            PerCycleErrorMode::Table => self.per_cycle_error,
            PerCycleErrorMode::Formula => {
                0.01 * (self.p_phys / self.p_th).powf((self.d as f64 + 1.0) / 2.0)
            }
        }
    }

    /// `p̄ · cycles`. A per-cycle error of exactly `10^{-k}` is applied as a
    /// division so that e.g. `14 · 10^{-16}` comes out as the literal `1.4e-15`.
    pub fn clifford_error(&self, cycles: f64) -> f64 {
        let p = self.effective_per_cycle_error();
        let k = -p.log10().round();
        if (0.0..=22.0).contains(&k) && 10f64.powi(-(k as i32)) == p {
            cycles / 10f64.powi(k as i32)
        } else {
            cycles * p
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstructionCostTable {
    pub architecture: Architecture,
    pub parameters: TableParameters,
    pub entries: BTreeMap<String, CostEntry>,
}

impl InstructionCostTable {
    pub fn entry(&self, name: &str) -> Result<&CostEntry> {
        self.entries.get(name).ok_or_else(|| {
            Error::MissingEntry(format!("{} table has no entry {name:?}", self.architecture.tag()))
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in &self.entries {
            if let Some(c) = e.cycles {
                if (e.timesteps as f64) < c {
                    return Err(Error::Domain(format!("{name}: timesteps below cycles")));
                }
            }
            if !(0.0..=1.0).contains(&e.error) {
                return Err(Error::Domain(format!("{name}: error {} outside [0, 1]", e.error)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

pub mod names {
    pub const CNOT: &str = "CNOT";
    pub const H: &str = "H";
    pub const S: &str = "S";
    pub const T: &str = "T";
    pub const IN_PLACE_ROTATION: &str = "in-place rotation";
    pub const IDLE: &str = "idle";
    pub const SHIFT: &str = "shift automorphism";
    pub const IN_MODULE: &str = "in-module meas";
    pub const INTER_MODULE: &str = "inter-module meas";
    pub const T_INJECTION: &str = "T injection";
    pub const CNOT_ALL: &str = "CNOT all-neighbor";
    pub const SIM_ROTATION: &str = "simultaneous in-place Z rot";
    pub const IN_PLACE_Z: &str = "in-place Z rotation";
}

fn surface_clifford(p: &TableParameters, cycles: u64) -> CostEntry {
    CostEntry::new(
        Some(cycles as f64),
        cycles * p.timesteps_per_cycle,
        p.clifford_error(cycles as f64),
    )
}

/// Default cost tables, one per architecture.
pub fn default_tables() -> Vec<InstructionCostTable> {
    use names::*;
    let sp = TableParameters::surface_default();
    let d = sp.d;
    let mut t = BTreeMap::new();
    t.insert(CNOT.to_string(), surface_clifford(&sp, 2 * d));
    t.insert(H.to_string(), surface_clifford(&sp, 3 * d));
    t.insert(S.to_string(), surface_clifford(&sp, d));
    t.insert(T.to_string(), CostEntry::new(Some(18.1), 109, 4.4e-8));
    let surface_t = InstructionCostTable {
        architecture: Architecture::SurfaceCliffordT,
        parameters: sp.clone(),
        entries: t,
    };

    let mut phi = BTreeMap::new();
    phi.insert(CNOT.to_string(), surface_clifford(&sp, 2 * d));
    // 30 iterations of d rounds each
    let rot_cycles = 30 * d;
    phi.insert(
        IN_PLACE_ROTATION.to_string(),
        CostEntry::new(Some(rot_cycles as f64), rot_cycles * sp.timesteps_per_cycle, 9.5e-5),
    );
    let surface_phi = InstructionCostTable {
        architecture: Architecture::SurfaceCliffordPhi,
        parameters: sp,
        entries: phi,
    };

    let gp = TableParameters::gross_default();
    let mut pbc = BTreeMap::new();
    pbc.insert(IDLE.to_string(), CostEntry::new(None, 8, 1.4e-15));
    pbc.insert(SHIFT.to_string(), CostEntry::new(None, 12, 6.1e-14));
    pbc.insert(IN_MODULE.to_string(), CostEntry::new(None, 120, 1.0e-9));
    pbc.insert(INTER_MODULE.to_string(), CostEntry::new(None, 120, 4.8e-8));
    pbc.insert(T_INJECTION.to_string(), CostEntry::new(None, 73 + 120, 8.8e-7));
    let gross_pbc = InstructionCostTable {
        architecture: Architecture::GrossPbc,
        parameters: gp.clone(),
        entries: pbc,
    };

    let mut gphi = BTreeMap::new();
    gphi.insert(IDLE.to_string(), CostEntry::new(None, 8, 1.44e-15));
    gphi.insert(CNOT_ALL.to_string(), CostEntry::new(None, 129552, 6.3e-5));
    gphi.insert(SIM_ROTATION.to_string(), CostEntry::new(None, 2940, 1.0e-2));
    gphi.insert(CNOT.to_string(), CostEntry::new(None, 1920, 1.3e-6));
    gphi.insert(IN_PLACE_Z.to_string(), CostEntry::new(None, 2940, 9.5e-5));
    let gross_phi = InstructionCostTable {
        architecture: Architecture::GrossCliffordPhi,
        parameters: TableParameters { factory_count: 0, ..gp },
        entries: gphi,
    };
    vec![surface_t, surface_phi, gross_pbc, gross_phi]
}

pub fn default_table(arch: Architecture) -> InstructionCostTable {
    default_tables()
        .into_iter()
        .find(|t| t.architecture == arch)
        .expect("every architecture has a default table")
}

/// `⌈3 log₂(1/ε) + offset⌉` T gates per synthesized rotation.
pub fn t_count(epsilon: f64, offset: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok((3.0 * (1.0 / epsilon).log2() + offset).ceil().max(0.0) as u64)
}

/// Benchmark: per repeat, a Z rotation on every qubit, then CNOTs on the
/// even chain edges `(0,1), (2,3), …`, then on the odd edges `(1,2), (3,4), …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n: u64,
    pub angle: f64,
    pub repeats: u64,
}

impl CircuitSpec {
    pub fn rotations(&self) -> u64 {
        self.n * self.repeats
    }

    pub fn cnots(&self) -> u64 {
        (self.n - 1) * self.repeats
    }

    /// Non-empty CNOT layers per repeat.
    pub fn cnot_layers(&self) -> u64 {
        u64::from(self.n >= 2) + u64::from(self.n >= 3)
    }

    pub fn even_edges(&self) -> Vec<(u64, u64)> {
        (0..self.n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect()
    }

    pub fn odd_edges(&self) -> Vec<(u64, u64)> {
        (1..self.n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect()
    }
}

pub fn build_benchmark(n: u64, angle: f64, repeats: u64) -> Result<CircuitSpec> {
    if n < 2 {
        return Err(Error::Domain(format!("benchmark needs at least 2 qubits, got {n}")));
    }
    Ok(CircuitSpec { n, angle, repeats })
}

/// `1.5² · N · 2d² + n_F · A_F`.
pub fn n_phys_surface(n: u64, d: u64, factories: u64, factory_area: u64) -> u64 {
    // 1.5^2 * 2 = 9/2
    (9 * n * d * d) / 2 + factories * factory_area
}

/// `N_patch (c + u + a) − a`, plus `a' + n_F A_F` when a factory is attached.
pub fn n_phys_gross(n_patch: u64, m: &ModuleConstants, factories: u64, factory_area: u64) -> u64 {
    let base = n_patch * (m.c + m.u + m.a) - m.a;
    if factories > 0 {
        base + m.a_prime + factories * factory_area
    } else {
        base
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulingPolicy {
    /// T states come one at a time from the factories; synthesis Cliffords
    /// overlap with the wait; each CNOT layer is one lattice-surgery block.
    SerialFactory,
    /// Every rotation of a layer runs at once; each CNOT layer is one block.
    ParallelLayers,
    /// Each `π/8` rotation is one T injection, one shift automorphism and one
    /// inter-module measurement, serialized through the factory; Cliffords are
    /// absorbed into the rotated Paulis.
    PbcSerialFactory,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorComponents {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_dec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_dis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_syn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rot: Option<f64>,
}

impl ErrorComponents {
    pub fn total(&self) -> f64 {
        [self.p_dec, self.p_dis, self.p_syn, self.p_rot].iter().flatten().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub architecture: Architecture,
    pub policy: SchedulingPolicy,
    pub circuit: CircuitSpec,
    pub tau: u64,
    pub n_phys: u64,
    pub volume: u64,
    pub p_tot: f64,
    pub errors: ErrorComponents,
    /// Instruction name → number of uses.
    pub counts: BTreeMap<String, u64>,
    pub assumptions: Vec<String>,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "architecture  {}", self.architecture.tag());
        let _ = writeln!(s, "policy        {}", policy_tag(self.policy));
        let _ = writeln!(s, "timesteps     {}", self.tau);
        let _ = writeln!(s, "n_phys        {}", self.n_phys);
        let _ = writeln!(s, "volume        {:.4e}", self.volume as f64);
        let _ = writeln!(s, "p_tot         {:.4}", self.p_tot);
        for (k, v) in [
            ("p_dec", self.errors.p_dec),
            ("p_dis", self.errors.p_dis),
            ("p_syn", self.errors.p_syn),
            ("p_rot", self.errors.p_rot),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "  {k:<11} {v:.4e}");
            }
        }
        for (k, v) in &self.counts {
            let _ = writeln!(s, "  #{k:<10} {v}");
        }
        s
    }
}

pub fn policy_tag(p: SchedulingPolicy) -> &'static str {
    match p {
        SchedulingPolicy::SerialFactory => "serial-factory",
        SchedulingPolicy::ParallelLayers => "parallel-layers",
        SchedulingPolicy::PbcSerialFactory => "pbc-serial-factory",
    }
}

pub fn estimate(circuit: &CircuitSpec, table: &InstructionCostTable, policy: SchedulingPolicy) -> Result<EstimateReport> {
    use names::*;
    table.validate()?;
    let p = &table.parameters;
    let arch = table.architecture;
    let expected = arch.default_policy();
    if policy != expected {
        return Err(Error::Unsupported(format!(
            "{} supports the {} policy only",
            arch.tag(),
            policy_tag(expected)
        )));
    }
    let n_rot = circuit.rotations();
    let n_cnot = circuit.cnots();
    let layers = circuit.cnot_layers();
    let mut counts = BTreeMap::new();
    let mut errors = ErrorComponents::default();
    let mut assumptions = vec![format!("policy {}", policy_tag(policy))];
    let n_patch = circuit.n.div_ceil(p.qubits_per_module);
    let module = p.module.unwrap_or(GROSS_MODULE);
    let (tau, n_phys) = match arch {
        Architecture::SurfaceCliffordT => {
            let (cnot, h, s, t) = (table.entry(CNOT)?, table.entry(H)?, table.entry(S)?, table.entry(T)?);
            let per_rot = t_count(p.eps_syn, p.t_count_offset)?;
            let n_t = n_rot * per_rot;
            // synthesis normal form: one H per T, one S per two T
            let n_h = n_t;
            let n_s = n_t.div_ceil(2);
            counts.insert(CNOT.to_string(), n_cnot);
            counts.insert(H.to_string(), n_h);
            counts.insert(S.to_string(), n_s);
            counts.insert(T.to_string(), n_t);
            errors.p_dec = Some(n_cnot as f64 * cnot.error + n_h as f64 * h.error + n_s as f64 * s.error);
            errors.p_dis = Some(n_t as f64 * t.error);
            errors.p_syn = Some(n_rot as f64 * p.eps_syn);
            let factories = p.factory_count.max(1);
            let supply = (circuit.n * per_rot * t.timesteps).div_ceil(factories);
            let per_qubit = per_rot * (t.timesteps + h.timesteps) + per_rot.div_ceil(2) * s.timesteps;
            let per_repeat = supply.max(per_qubit) + layers * cnot.timesteps;
            assumptions.push(format!("{per_rot} T gates per rotation at eps_syn = {:e}", p.eps_syn));
            assumptions.push(format!("T states serialized through {factories} factory(ies)"));
            assumptions.push("synthesis Cliffords overlap with T-state supply".into());
            assumptions.push(format!("{layers} CNOT layer(s) per repeat, each one CNOT block"));
            (
                per_repeat * circuit.repeats,
                n_phys_surface(circuit.n, p.d, p.factory_count, p.factory_area),
            )
        }
        Architecture::SurfaceCliffordPhi => {
            let (cnot, rot) = (table.entry(CNOT)?, table.entry(IN_PLACE_ROTATION)?);
            counts.insert(CNOT.to_string(), n_cnot);
            counts.insert(IN_PLACE_ROTATION.to_string(), n_rot);
            errors.p_dec = Some(n_cnot as f64 * cnot.error);
            errors.p_rot = Some(n_rot as f64 * rot.error);
            assumptions.push("all rotations of a layer in parallel, one in-place rotation block".into());
            assumptions.push(format!("{layers} CNOT layer(s) per repeat, each one CNOT block"));
            assumptions.push("no magic state factory".into());
            (
                (rot.timesteps + layers * cnot.timesteps) * circuit.repeats,
                n_phys_surface(circuit.n, p.d, 0, p.factory_area),
            )
        }
        Architecture::GrossPbc => {
            let (inj, shift, inter) = (table.entry(T_INJECTION)?, table.entry(SHIFT)?, table.entry(INTER_MODULE)?);
            let per_rot = t_count(p.eps_syn, p.t_count_offset)?;
            let n_t = n_rot * per_rot;
            counts.insert(T_INJECTION.to_string(), n_t);
            counts.insert(SHIFT.to_string(), n_t);
            counts.insert(INTER_MODULE.to_string(), n_t);
            errors.p_dec = Some(n_t as f64 * (shift.error + inter.error));
            errors.p_dis = Some(n_t as f64 * inj.error);
            errors.p_syn = Some(n_rot as f64 * p.eps_syn);
            let factories = p.factory_count.max(1);
            let per_t = inj.timesteps + shift.timesteps + inter.timesteps;
            assumptions.push(format!("{per_rot} pi/8 rotations per synthesized rotation"));
            assumptions.push(format!("{n_patch} module(s), factory count {factories}"));
            (
                (n_t * per_t).div_ceil(factories),
                n_phys_gross(n_patch, &module, p.factory_count, p.factory_area),
            )
        }
        Architecture::GrossCliffordPhi => {
            let (cnot_all, sim) = (table.entry(CNOT_ALL)?, table.entry(SIM_ROTATION)?);
            counts.insert(CNOT_ALL.to_string(), circuit.repeats);
            counts.insert(SIM_ROTATION.to_string(), circuit.repeats);
            errors.p_dec = Some(circuit.repeats as f64 * cnot_all.error);
            errors.p_rot = Some(circuit.repeats as f64 * sim.error);
            assumptions.push("one simultaneous rotation layer and one all-neighbor CNOT block per repeat".into());
            assumptions.push(format!("{n_patch} module(s), no factory"));
            (
                (sim.timesteps + cnot_all.timesteps) * circuit.repeats,
                n_phys_gross(n_patch, &module, 0, p.factory_area),
            )
        }
    };
    let p_tot = errors.total();
    Ok(EstimateReport {
        architecture: arch,
        policy,
        circuit: circuit.clone(),
        tau,
        n_phys,
        volume: tau * n_phys,
        p_tot,
        errors,
        counts,
        assumptions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: Architecture,
    pub candidate: Architecture,
    /// `τ_baseline / τ_candidate`, three significant figures.
    pub tau_ratio: f64,
    pub volume_ratio: f64,
    pub baseline_assumptions: Vec<String>,
    pub candidate_assumptions: Vec<String>,
}

fn sig3(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.2e}").parse().expect("formatted float parses")
}

pub fn compare(baseline: &EstimateReport, candidate: &EstimateReport) -> Result<Comparison> {
    if baseline.circuit != candidate.circuit {
        return Err(Error::Domain("reports are for different circuits".into()));
    }
    Ok(Comparison {
        baseline: baseline.architecture,
        candidate: candidate.architecture,
        tau_ratio: sig3(baseline.tau as f64 / candidate.tau as f64),
        volume_ratio: sig3(baseline.volume as f64 / candidate.volume as f64),
        baseline_assumptions: baseline.assumptions.clone(),
        candidate_assumptions: candidate.assumptions.clone(),
    })
}

/// Published reduction factor and the accepted window around it (a factor of
/// three either way, since the scheduling behind the figure is not known).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionWindow {
    pub reference: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ReductionWindow {
    pub const fn around(reference: f64) -> Self {
        Self {
            reference,
            lo: reference / 3.0,
            hi: reference * 3.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

pub const SURFACE_TAU_WINDOW: ReductionWindow = ReductionWindow::around(119.0);
pub const GROSS_TAU_WINDOW: ReductionWindow = ReductionWindow::around(15.0);
pub const SURFACE_VOLUME_WINDOW: ReductionWindow = ReductionWindow::around(127.0);
pub const GROSS_VOLUME_WINDOW: ReductionWindow = ReductionWindow::around(18.0);

/// One row per report: `architecture,policy,tau,n_phys,volume,p_tot`.
pub fn reports_to_csv(reports: &[EstimateReport]) -> String {
    let mut s = String::from("architecture,policy,tau,n_phys,volume,p_tot\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:e}",
            r.architecture.tag(),
            policy_tag(r.policy),
            r.tau,
            r.n_phys,
            r.volume,
            r.p_tot
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_counts() {
        assert_eq!(t_count(1e-4, 0.0).unwrap(), 40);
        assert_eq!(t_count(0.5, 0.0).unwrap(), 3);
        assert_eq!(t_count(1e-2, 0.0).unwrap(), 20);
        assert!(t_count(0.0, 0.0).is_err());
        assert!(t_count(1.0, 0.0).is_err());
    }

    #[test]
    fn benchmark_counts() {
        let c = build_benchmark(108, 0.003, 100).unwrap();
        assert_eq!((c.rotations(), c.cnots()), (10800, 10700));
        let c = build_benchmark(2, 0.003, 1).unwrap();
        assert_eq!((c.rotations(), c.cnots()), (2, 1));
        let c = build_benchmark(3, 0.003, 2).unwrap();
        assert_eq!((c.rotations(), c.cnots()), (6, 4));
        assert_eq!(c.even_edges().len() + c.odd_edges().len(), 2);
        assert!(build_benchmark(1, 0.003, 1).is_err());
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(n_phys_surface(108, 7, 1, 810), 24624);
        assert_eq!(n_phys_surface(108, 7, 0, 810), 23814);
        assert_eq!(n_phys_gross(9, &GROSS_MODULE, 1, 810), 4401);
        assert_eq!(n_phys_gross(9, &GROSS_MODULE, 0, 810), 3578);
    }

    #[test]
    fn formula_mode() {
        let mut p = TableParameters::surface_default();
        p.per_cycle_error_mode = PerCycleErrorMode::Formula;
        assert!((p.effective_per_cycle_error() - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn policy_mismatch_rejected() {
        let c = build_benchmark(4, 0.003, 1).unwrap();
        let t = default_table(Architecture::SurfaceCliffordT);
        assert!(estimate(&c, &t, SchedulingPolicy::ParallelLayers).is_err());
    }
}
