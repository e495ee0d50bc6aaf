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

//! End-to-end acceptance suite. Every criterion runs, prints one PASS/FAIL
//! line, and the test fails at the end if any criterion failed. Smaller CLI
//! checks live here too so they run in the same binary.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weakrot::angles::{
    binomial, branch_ensemble, branch_probability, canonical_angle, logical_angle, physical_angle_for_branch,
};
use weakrot::codes::{build_five_qubit, build_rotated_surface, build_steane, builtin, compute_logicals};
use weakrot::estimate::{
    build_benchmark, compare, default_table, default_tables, estimate, n_phys_gross, n_phys_surface, names,
    Architecture, CostEntry, GROSS_MODULE, GROSS_TAU_WINDOW, GROSS_VOLUME_WINDOW, SURFACE_TAU_WINDOW,
    SURFACE_VOLUME_WINDOW,
};
use weakrot::oracle::{scan_code, verify_partition, verify_plan, ScanOptions, Verdict, VerifyOptions};
use weakrot::partition::{partition_xz, partition_z, plan_pauli_rotation, SupportPartition};
use weakrot::rus::{
    diamond_distance_zmix, loglog_slope, optimal_mixture, run_rus, sweep_fig4, sweep_final, RusConfig, Variant,
};
use weakrot::{BitVec, PauliOp};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    if e <= limit {
        Ok(e)
    } else {
        Err(format!("took {e:?}, limit {limit:?}"))
    }
}

fn one(k: usize) -> BitVec {
    BitVec::from_indices(k, &[0])
}

fn zero(k: usize) -> BitVec {
    BitVec::zeros(k)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for code in [build_steane(), build_rotated_surface(3).unwrap()] {
        let l = compute_logicals(&code).unwrap();
        for _ in 0..20 {
            let theta: f64 = rng.gen_range(-1.5..1.5);
            let p = partition_z(&code, &l, &one(1), 3, theta).unwrap();
            let r = verify_partition(&code, &l, &p, &VerifyOptions::default()).unwrap();
            for b in &r.branches {
                let pop = b.corrections[0].count_ones() as usize;
                let chi = pop.min(3 - pop);
                let want_p = branch_probability(3, chi, theta) / binomial(3, chi);
                let want_a = logical_angle(3, chi, theta);
                worst = worst
                    .max((b.probability - want_p).abs())
                    .max(canonical_angle(b.angle - want_a).abs());
            }
        }
    }
    let e = within(t0, Duration::from_secs(30))?;
    check(worst < 1e-10, format!("max deviation {worst:.2e} over 40 runs in {e:.1?}"))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let code = build_steane();
    let l = compute_logicals(&code).unwrap();
    let opts = VerifyOptions::default();
    let mut worst: f64 = 0.0;
    let mut all_yes = true;
    for (mu, nu) in [(zero(1), one(1)), (one(1), zero(1))] {
        let p = partition_xz(&code, &l, &mu, &nu, 3, 0.27).unwrap();
        let r = verify_partition(&code, &l, &p, &opts).unwrap();
        all_yes &= r.weak_transversal;
        worst = worst.max(r.independence_deviation);
    }
    let plan = plan_pauli_rotation(&code, &l, &one(1), &one(1), 3, 0.05).unwrap();
    let r = verify_plan(&code, &l, &plan, &opts).unwrap();
    all_yes &= r.weak_transversal;
    worst = worst.max(r.independence_deviation);

    // Surface-3 partition whose terms Z{0,3}·Z{6} multiply to a logical operator.
    let s3 = build_rotated_surface(3).unwrap();
    let l3 = compute_logicals(&s3).unwrap();
    let z = |q: &[usize]| PauliOp::z_type(BitVec::from_indices(9, q));
    let terms = vec![z(&[0, 3]), z(&[6]), z(&[1]), z(&[2]), z(&[4, 5])];
    let target = terms.iter().fold(PauliOp::identity(9), |a, t| a.mul(t));
    let bad = SupportPartition {
        target,
        angles: vec![0.3; 5],
        terms,
    };
    let rb = verify_partition(&s3, &l3, &bad, &opts).unwrap();
    let e = within(t0, Duration::from_secs(60))?;
    check(
        all_yes && worst < 1e-10 && !rb.weak_transversal,
        format!(
            "Z/X/Y verdicts yes={all_yes}, max deviation {worst:.2e}; invalid partition verdict {}; {e:.1?}",
            if rb.weak_transversal { "yes" } else { "no" }
        ),
    )
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let c = build_five_qubit();
    let l = compute_logicals(&c).unwrap();
    let rows = scan_code(&c, &l, &ScanOptions::default()).unwrap();
    let five_ok = rows.len() == 3 && rows.iter().all(|r| r.verdict == Verdict::Yes);
    let mut summary = vec![format!("five-qubit {}/3 yes", rows.iter().filter(|r| r.verdict == Verdict::Yes).count())];
    for name in ["steane", "code-422", "code-833", "surface-3"] {
        let c = builtin(name).unwrap();
        let l = compute_logicals(&c).unwrap();
        let rows = scan_code(&c, &l, &ScanOptions::default()).unwrap();
        let yes = rows.iter().filter(|r| r.verdict == Verdict::Yes).count();
        summary.push(format!("{name} {yes}/{}", rows.len()));
    }
    let e = within(t0, Duration::from_secs(600))?;
    check(five_ok, format!("{}; {e:.1?}", summary.join(", ")))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut norm: f64 = 0.0;
    for m in (1..=21).step_by(2) {
        for _ in 0..1000 {
            let theta: f64 = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
            let e = branch_ensemble(m, theta).unwrap();
            norm = norm.max((e.total_probability() - 1.0).abs());
        }
    }
    let mut quarter: f64 = 0.0;
    for m in (1..=21).step_by(2) {
        for b in &branch_ensemble(m, FRAC_PI_4).unwrap().branches {
            quarter = quarter.max((b.logical_angle.abs() - FRAC_PI_4).abs());
        }
    }
    let mut round_trip: f64 = 0.0;
    for _ in 0..1000 {
        let m = 2 * rng.gen_range(0..11usize) + 1;
        let chi = rng.gen_range(0..=(m - 1) / 2);
        let beta: f64 = rng.gen_range(-1.5..1.5);
        let theta = physical_angle_for_branch(m, chi, beta).unwrap();
        round_trip = round_trip.max(canonical_angle(logical_angle(m, chi, theta) - beta).abs());
    }
    check(
        norm < 1e-12 && quarter < 1e-12 && round_trip < 1e-12,
        format!("sum error {norm:.1e}, pi/4 error {quarter:.1e}, inversion error {round_trip:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut single, mut sym, mut excess): (f64, f64, f64) = (0.0, 0.0, f64::NEG_INFINITY);
    for _ in 0..100 {
        let t: f64 = rng.gen_range(-1.5..1.5);
        single = single.max((diamond_distance_zmix(&[(1.0, t)], 0.0).unwrap() - t.sin().abs()).abs());
        sym = sym.max((diamond_distance_zmix(&[(0.5, t), (0.5, -t)], 0.0).unwrap() - t.sin().powi(2)).abs());
        let a: f64 = rng.gen_range(1e-4..0.5);
        let b: f64 = -rng.gen_range(1e-4..0.5);
        let (_, d) = optimal_mixture(a, b).unwrap();
        let eps = a.abs().max(b.abs());
        excess = excess.max(d - eps * eps);
    }
    check(
        single < 1e-12 && sym < 1e-12 && excess <= 0.0,
        format!("single {single:.1e}, symmetric {sym:.1e}, max(d - eps^2) {excess:.2e}"),
    )
}

fn final_distance(rows: &[&weakrot::rus::SweepRow], v: Variant, m: usize, target: f64) -> f64 {
    rows.iter()
        .find(|r| r.variant == v && r.m == m && r.target == target)
        .map(|r| r.diamond_distance)
        .expect("row present")
}

fn criterion_6() -> Outcome {
    let base = RusConfig {
        p_phys: 1e-4,
        max_iterations: 30,
        truncation_threshold: 1e-12,
        ..RusConfig::default()
    };
    let targets = [0.001, 0.003, 0.01, 0.03, 0.1];
    let mut notes = Vec::new();
    let mut ok = true;
    for m in [5usize, 3] {
        let t0 = Instant::now();
        let rows = sweep_fig4(&[m], &targets, &base, &[Variant::Plain, Variant::Diluted], Default::default()).unwrap();
        let e = within(t0, Duration::from_secs(600))?;
        let fin = sweep_final(&rows);
        let plain: Vec<(f64, f64)> = targets.iter().map(|&t| (t, final_distance(&fin, Variant::Plain, m, t))).collect();
        let alpha = loglog_slope(&plain);
        ok &= alpha < 1.0;
        notes.push(format!("M={m} plain slope {alpha:.3}"));
        if m == 5 {
            let head = final_distance(&fin, Variant::Diluted, 5, 0.003);
            let factor = (head / 9.5e-5).max(9.5e-5 / head);
            ok &= factor <= 2.0;
            // Dilution mixes in the identity, leaving an error of order
            // beta * (theta_big - beta); the linear regime is the small-angle end.
            let small = [0.001, 0.003, 0.01];
            let dil: Vec<(f64, f64)> = small.iter().map(|&t| (t, final_distance(&fin, Variant::Diluted, 5, t))).collect();
            let beta = loglog_slope(&dil);
            ok &= (beta - 1.0).abs() <= 0.15;
            notes.insert(0, format!("M=5 target 0.003 diluted {head:.3e} (x{factor:.2} from 9.5e-5)"));
            notes.push(format!("M=5 diluted slope {beta:.3} on {small:?}"));
        }
        notes.push(format!("M={m} sweep {e:.1?}"));
    }
    check(ok, notes.join("; "))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [3usize, 5] {
        for target in [0.003, 0.01, 0.1] {
            let cfg = RusConfig {
                m,
                target_angle: target,
                p_phys: 0.0,
                max_iterations: 30,
                ..RusConfig::default()
            };
            let d = run_rus(&cfg).unwrap().diamond_distance;
            ok &= d < 1e-10;
            notes.push(format!("M={m} {target}: {d:.1e}"));
        }
    }
    check(ok, notes.join(", "))
}

fn criterion_8() -> Outcome {
    let want: &[(Architecture, &str, Option<f64>, u64, f64)] = &[
        (Architecture::SurfaceCliffordT, names::CNOT, Some(14.0), 84, 1.4e-15),
        (Architecture::SurfaceCliffordT, names::H, Some(21.0), 126, 2.1e-15),
        (Architecture::SurfaceCliffordT, names::S, Some(7.0), 42, 7.0e-16),
        (Architecture::SurfaceCliffordT, names::T, Some(18.1), 109, 4.4e-8),
        (Architecture::SurfaceCliffordPhi, names::CNOT, Some(14.0), 84, 1.4e-15),
        (Architecture::SurfaceCliffordPhi, names::IN_PLACE_ROTATION, Some(210.0), 1260, 9.5e-5),
        (Architecture::GrossPbc, names::IDLE, None, 8, 1.4e-15),
        (Architecture::GrossPbc, names::SHIFT, None, 12, 6.1e-14),
        (Architecture::GrossPbc, names::IN_MODULE, None, 120, 1.0e-9),
        (Architecture::GrossPbc, names::INTER_MODULE, None, 120, 4.8e-8),
        (Architecture::GrossPbc, names::T_INJECTION, None, 193, 8.8e-7),
        (Architecture::GrossCliffordPhi, names::IDLE, None, 8, 1.44e-15),
        (Architecture::GrossCliffordPhi, names::CNOT_ALL, None, 129552, 6.3e-5),
        (Architecture::GrossCliffordPhi, names::SIM_ROTATION, None, 2940, 1.0e-2),
        (Architecture::GrossCliffordPhi, names::CNOT, None, 1920, 1.3e-6),
        (Architecture::GrossCliffordPhi, names::IN_PLACE_Z, None, 2940, 9.5e-5),
    ];
    let tables = default_tables();
    let mut bad = Vec::new();
    for &(arch, name, cycles, timesteps, error) in want {
        let t = tables.iter().find(|t| t.architecture == arch).unwrap();
        let expect = CostEntry {
            cycles,
            timesteps,
            error,
        };
        if t.entries.get(name) != Some(&expect) {
            bad.push(format!("{}[{name}]", arch.tag()));
        }
    }
    let count: usize = tables.iter().map(|t| t.entries.len()).sum();
    if count != want.len() {
        bad.push(format!("{count} entries, expected {}", want.len()));
    }
    // Clifford rows: p̄ · cycles with p̄ = 1e-16, reproduced as the decimal literal.
    let st = default_table(Architecture::SurfaceCliffordT);
    for name in [names::CNOT, names::H, names::S] {
        let e = st.entry(name).unwrap();
        if e.error != st.parameters.clifford_error(e.cycles.unwrap()) || st.parameters.per_cycle_error != 1e-16 {
            bad.push(format!("{name} != 1e-16 x cycles"));
        }
    }
    let q = [
        n_phys_surface(108, 7, 1, 810),
        n_phys_surface(108, 7, 0, 810),
        n_phys_gross(9, &GROSS_MODULE, 1, 810),
    ];
    if q != [24624, 23814, 4401] {
        bad.push(format!("n_phys {q:?}"));
    }
    check(bad.is_empty(), if bad.is_empty() { format!("{count} entries exact, n_phys {q:?}") } else { bad.join(", ") })
}

fn criterion_9() -> Outcome {
    let c = build_benchmark(108, 0.003, 100).unwrap();
    let r: Vec<_> = Architecture::ALL
        .iter()
        .map(|&a| estimate(&c, &default_table(a), a.default_policy()).unwrap())
        .collect();
    let s = compare(&r[0], &r[1]).unwrap();
    let g = compare(&r[2], &r[3]).unwrap();
    let ok = (0.5..=2.0).contains(&r[0].p_tot)
        && (0.5..=2.0).contains(&r[1].p_tot)
        && SURFACE_TAU_WINDOW.contains(s.tau_ratio)
        && GROSS_TAU_WINDOW.contains(g.tau_ratio)
        && SURFACE_VOLUME_WINDOW.contains(s.volume_ratio)
        && GROSS_VOLUME_WINDOW.contains(g.volume_ratio)
        && r.iter().all(|x| x.assumptions.iter().any(|a| a.starts_with("policy ")));
    check(
        ok,
        format!(
            "p_tot {:.3}/{:.3}; surface tau x{} in [{:.0}, {:.0}], volume x{}; gross tau x{} in [{:.0}, {:.0}], volume x{}; policies {:?}/{:?}",
            r[0].p_tot,
            r[1].p_tot,
            s.tau_ratio,
            SURFACE_TAU_WINDOW.lo,
            SURFACE_TAU_WINDOW.hi,
            s.volume_ratio,
            g.tau_ratio,
            GROSS_TAU_WINDOW.lo,
            GROSS_TAU_WINDOW.hi,
            g.volume_ratio,
            r[0].policy,
            r[2].policy
        ),
    )
}

fn run_cli(threads: usize, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_weakrot"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_10() -> Outcome {
    let cases: &[&[&str]] = &[
        &["partition", "--code", "surface-5", "--pauli", "Z", "--theta", "0.2"],
        &["partition", "--code", "steane", "--pauli", "Y", "--theta", "0.05"],
        &["verify", "--code", "steane", "--pauli", "Z", "--theta", "0.3", "--seed", "7"],
        &["scan", "--code", "five-qubit", "--seed", "3"],
        &["angles", "--M", "5", "--theta", "0.3129"],
        &["angles", "--M", "3", "--sample", "binormal", "--seed", "11", "--samples", "20000"],
        &["rus", "--M", "3", "--target", "0.01,0.03", "--p-phys", "1e-4", "--iterations", "12"],
        &["estimate", "--arch", "all", "--format", "csv"],
        &["compare", "--baseline", "surface-cliffordT", "--candidate", "surface-cliffordPhi"],
    ];
    let mut bad = Vec::new();
    for args in cases {
        let a = run_cli(1, args);
        let b = run_cli(4, args);
        let c = run_cli(4, args);
        if a.is_empty() || a != b || b != c {
            bad.push(args[0].to_string());
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} invocations identical at 1 and 4 threads", cases.len())
        } else {
            format!("differs: {}", bad.join(", "))
        },
    )
}

#[test]
fn acceptance() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        match f() {
            Ok(d) => println!("criterion {n:>2}: PASS  {d}"),
            Err(d) => {
                println!("criterion {n:>2}: FAIL  {d}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

// CLI behaviour

fn weakrot(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weakrot")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn verify_reports_yes() {
    let (code, out) = weakrot(&["verify", "--code", "steane", "--pauli", "Z", "--theta", "0.3", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"weak_transversal\": true"), "{out}");
}

#[test]
fn angles_csv() {
    let (code, out) = weakrot(&["angles", "--M", "5", "--theta", "0.3129"]);
    assert_eq!(code, 0);
    let row0 = out.lines().nth(2).unwrap();
    let p0: f64 = row0.split(',').nth(1).unwrap().parse().unwrap();
    assert!((p0 - 0.608).abs() < 1e-3);
}

#[test]
fn estimate_default_circuit() {
    let (code, out) = weakrot(&["estimate", "--arch", "surface-cliffordT", "--circuit", "default"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let p = v["p_tot"].as_f64().unwrap();
    assert!((p - 1.1).abs() < 0.01, "{p}");
}

#[test]
fn exit_codes() {
    assert_eq!(weakrot(&["verify", "--code", "steane"]).0, 2);
    assert_eq!(weakrot(&["angles", "--M", "3"]).0, 2);
    assert_eq!(weakrot(&["angles", "--M", "4", "--theta", "0.1"]).0, 1);
    assert_eq!(weakrot(&["partition", "--code", "no-such-code", "--pauli", "Z"]).0, 1);
    assert_eq!(weakrot(&["estimate", "--arch", "surface-cliffordT", "--n", "1"]).0, 1);
}

#[test]
fn table_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("weakrot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let table = weakrot::estimate::default_table(weakrot::estimate::Architecture::GrossPbc);
    let path = dir.join("gross.json");
    std::fs::write(&path, table.to_json()).unwrap();
    let builtin = weakrot(&["estimate", "--arch", "gross-pbc"]);
    let loaded = weakrot(&["estimate", "--arch", "gross-pbc", "--table", path.to_str().unwrap()]);
    assert_eq!(builtin, loaded);
    let _ = std::fs::remove_dir_all(&dir);
}
