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

//! `weakrot` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use weakrot::angles::{branch_ensemble, sample_logical_angles, InputDistribution};
use weakrot::codes::{builtin, compute_logicals, load_stabilizer_file, LogicalOperatorSet, StabilizerCode};
use weakrot::estimate::{
    build_benchmark, compare, default_table, estimate, reports_to_csv, Architecture, CircuitSpec,
    InstructionCostTable, PerCycleErrorMode,
};
use weakrot::oracle::{scan_code, scan_to_csv, verify_partition, verify_plan, Engine, ScanOptions, VerifyOptions};
use weakrot::partition::{default_m, partition_xz, plan_pauli_rotation};
use weakrot::rus::{sweep_fig4, sweep_final, sweep_to_csv, Controller, Dilution, RusConfig, Variant};
use weakrot::BitVec;

/// Directory searched for relative config, table and code files that are not
/// found in the working directory.
const CONFIG_DIR_ENV: &str = "WEAKROT_CONFIG_DIR";

#[derive(Parser, Debug)]
#[command(name = "weakrot", version, about = "Weak transversal Pauli rotations: partitions, certification, RUS and resource estimates")]
struct Cli {
    /// Cap on worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a support partition (or a plan, for Y components) as JSON.
    Partition(PartitionArgs),
    /// Certify a partition by dense simulation.
    Verify(VerifyArgs),
    /// Check every logical Pauli of a code for weak transversal rotations.
    Scan(ScanArgs),
    /// Branch ensemble of an M-term layer, or a sampled logical-angle histogram.
    Angles(AnglesArgs),
    /// Repeat-until-success sweep: distance per iteration.
    Rus(RusArgs),
    /// Resource estimate for the benchmark circuit.
    Estimate(EstimateArgs),
    /// Timestep and volume ratios between two architectures.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct CodeArgs {
    /// Built-in code name (steane, code-422, five-qubit, surface-<d>, ...) or a code file.
    #[arg(long)]
    code: String,
    /// Logical Pauli, one letter per logical qubit (e.g. Z, XZ, Y).
    #[arg(long)]
    pauli: String,
    /// Number of terms; defaults to the target weight, made odd.
    #[arg(long = "M", alias = "m")]
    m: Option<usize>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Physical angle per term; for Y targets, the logical target angle.
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Physical angle per term; for Y targets, the logical target angle.
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    inputs: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    engine: EngineArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Auto,
    Dense,
    PauliExpansion,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    code: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    theta: f64,
    /// Term counts to try, comma separated; 0 means one term per qubit.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    m_choices: Vec<usize>,
    #[arg(long, default_value_t = 14)]
    max_qubits: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct AnglesArgs {
    #[arg(long = "M", alias = "m")]
    m: usize,
    /// Physical angle for the closed-form ensemble.
    #[arg(long, conflicts_with = "sample")]
    theta: Option<f64>,
    /// Sample physical angles from this distribution and histogram the result.
    #[arg(long, value_enum)]
    sample: Option<SampleKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Width of each normal for `binormal`.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SampleKind {
    Uniform,
    Binormal,
}

#[derive(Args, Debug)]
struct RusArgs {
    /// Base configuration (TOML or JSON); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "M", alias = "m", value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    target: Vec<f64>,
    #[arg(long)]
    p_phys: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    truncation: Option<f64>,
    #[arg(long, value_enum)]
    controller: Option<ControllerArg>,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
    /// Fixed base angle for dilution instead of the optimized grid.
    #[arg(long)]
    theta_big: Option<f64>,
    /// Emit only the last iteration of every curve.
    #[arg(long)]
    final_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ControllerArg {
    ZeroBranch,
    BestBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Plain,
    Diluted,
    Both,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// `default` is N=108, angle 0.003, 100 repeats.
    #[arg(long, default_value = "default")]
    circuit: String,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    angle: Option<f64>,
    #[arg(long)]
    repeats: Option<u64>,
    /// Use the distance formula for the per-cycle error instead of the table value.
    #[arg(long)]
    formula_error: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Architecture tag, or `all`.
    #[arg(long)]
    arch: String,
    /// Cost table file (TOML or JSON) replacing the built-in one.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    circuit: CircuitArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    baseline: String,
    #[arg(long)]
    candidate: String,
    #[arg(long)]
    baseline_table: Option<PathBuf>,
    #[arg(long)]
    candidate_table: Option<PathBuf>,
    #[command(flatten)]
    circuit: CircuitArgs,
}

fn resolve_path(p: &Path) -> PathBuf {
    if p.exists() || p.is_absolute() {
        return p.to_path_buf();
    }
    match std::env::var_os(CONFIG_DIR_ENV) {
        Some(dir) => {
            let q = Path::new(&dir).join(p);
            if q.exists() {
                q
            } else {
                p.to_path_buf()
            }
        }
        None => p.to_path_buf(),
    }
}

fn read_text(p: &Path) -> anyhow::Result<String> {
    let p = resolve_path(p);
    fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))
}

/// Parses TOML, or JSON when the extension says so.
fn parse_config<T: serde::de::DeserializeOwned>(p: &Path) -> anyhow::Result<T> {
    let text = read_text(p)?;
    if p.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
    }
}

fn load_code(spec: &str) -> anyhow::Result<(StabilizerCode, LogicalOperatorSet)> {
    let path = resolve_path(Path::new(spec));
    let code = if path.is_file() {
        load_stabilizer_file(&read_text(&path)?)?
    } else {
        builtin(spec)?
    };
    let logicals = compute_logicals(&code)?;
    Ok((code, logicals))
}

/// Logical Pauli letters to `(mu, nu)` with `Y = XZ` on a qubit.
fn logical_masks(pauli: &str, k: usize) -> anyhow::Result<(BitVec, BitVec)> {
    let letters: Vec<char> = pauli.trim().chars().collect();
    if letters.len() != k {
        return Err(anyhow!("logical Pauli {pauli:?} has {} letters, code has k = {k}", letters.len()));
    }
    let (mut xs, mut zs) = (Vec::new(), Vec::new());
    for (i, c) in letters.into_iter().enumerate() {
        match c.to_ascii_uppercase() {
            'I' | '_' => {}
            'X' => xs.push(i),
            'Z' => zs.push(i),
            'Y' => {
                xs.push(i);
                zs.push(i);
            }
            other => return Err(anyhow!("bad Pauli letter {other:?}")),
        }
    }
    Ok((BitVec::from_indices(k, &xs), BitVec::from_indices(k, &zs)))
}

fn engine(e: EngineArg) -> Engine {
    match e {
        EngineArg::Auto => Engine::Auto,
        EngineArg::Dense => Engine::Dense,
        EngineArg::PauliExpansion => Engine::PauliExpansion,
    }
}

fn circuit(args: &CircuitArgs) -> anyhow::Result<CircuitSpec> {
    let (n, angle, repeats) = match args.circuit.as_str() {
        "default" => (108, 0.003, 100),
        other => return Err(anyhow!("unknown circuit {other:?}; use `default` with --n/--angle/--repeats")),
    };
    Ok(build_benchmark(
        args.n.unwrap_or(n),
        args.angle.unwrap_or(angle),
        args.repeats.unwrap_or(repeats),
    )?)
}

fn table_for(arch: Architecture, file: Option<&PathBuf>, formula: bool) -> anyhow::Result<InstructionCostTable> {
    let mut t = match file {
        Some(p) => parse_config::<InstructionCostTable>(p)?,
        None => default_table(arch),
    };
    if t.architecture != arch {
        return Err(anyhow!("table is for {}, not {}", t.architecture.tag(), arch.tag()));
    }
    if formula {
        t.parameters.per_cycle_error_mode = PerCycleErrorMode::Formula;
    }
    Ok(t)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn unsupported(cmd: &str, f: Format) -> anyhow::Error {
    anyhow!("{cmd} does not support --format {f:?}")
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    let fmt = cli.format;
    match &cli.command {
        Command::Partition(a) => {
            let (code, logicals) = load_code(&a.code.code)?;
            let (mu, nu) = logical_masks(&a.code.pauli, logicals.k())?;
            let target = logicals.logical_pauli(&mu, &nu)?;
            let m = a.code.m.unwrap_or_else(|| default_m(target.weight()));
            let doc = if mu.and_weight(&nu) == 0 {
                serde_json::to_value(partition_xz(&code, &logicals, &mu, &nu, m, a.theta)?)?
            } else {
                serde_json::to_value(plan_pauli_rotation(&code, &logicals, &mu, &nu, m, a.theta)?)?
            };
            match fmt.unwrap_or(Format::Json) {
                Format::Json => Ok(json(&doc)),
                f => Err(unsupported("partition", f)),
            }
        }
        Command::Verify(a) => {
            let (code, logicals) = load_code(&a.code.code)?;
            let (mu, nu) = logical_masks(&a.code.pauli, logicals.k())?;
            let target = logicals.logical_pauli(&mu, &nu)?;
            let m = a.code.m.unwrap_or_else(|| default_m(target.weight()));
            let opts = VerifyOptions {
                n_random_inputs: a.inputs,
                tol: a.tol,
                seed: a.seed,
                engine: engine(a.engine),
            };
            let report = if mu.and_weight(&nu) == 0 {
                verify_partition(&code, &logicals, &partition_xz(&code, &logicals, &mu, &nu, m, a.theta)?, &opts)?
            } else {
                verify_plan(&code, &logicals, &plan_pauli_rotation(&code, &logicals, &mu, &nu, m, a.theta)?, &opts)?
            };
            match fmt.unwrap_or(Format::Json) {
                Format::Json => Ok(report.to_json() + "\n"),
                Format::Text => {
                    let mut s = format!(
                        "code {}  target {}  verdict {}\nindependence deviation {:.3e}  total probability {:.12}\n",
                        report.code,
                        report.target,
                        if report.weak_transversal { "yes" } else { "no" },
                        report.independence_deviation,
                        report.total_probability
                    );
                    for (angle, p, count) in report.angle_groups(10) {
                        s += &format!("  angle {angle:+.10}  probability {p:.10}  branches {count}\n");
                    }
                    Ok(s)
                }
                f => Err(unsupported("verify", f)),
            }
        }
        Command::Scan(a) => {
            let (code, logicals) = load_code(&a.code)?;
            let opts = ScanOptions {
                m_choices: a.m_choices.clone(),
                theta_probe: a.theta,
                tol: a.tol,
                max_qubits: a.max_qubits,
                seed: a.seed,
                ..ScanOptions::default()
            };
            let rows = scan_code(&code, &logicals, &opts)?;
            match fmt.unwrap_or(Format::Csv) {
                Format::Csv => Ok(scan_to_csv(&rows)),
                Format::Json => Ok(json(&rows)),
                Format::Text => Ok(rows
                    .iter()
                    .map(|r| format!("{:<8} {:<4?} M={} rep={} dev={:.2e}\n", r.pauli, r.verdict, r.m, r.representative, r.max_deviation))
                    .collect()),
            }
        }
        Command::Angles(a) => match (a.theta, a.sample) {
            (Some(theta), None) => {
                let e = branch_ensemble(a.m, theta)?;
                match fmt.unwrap_or(Format::Csv) {
                    Format::Csv => Ok(e.to_csv()),
                    Format::Json => Ok(json(&e)),
                    f => Err(unsupported("angles", f)),
                }
            }
            (None, Some(kind)) => {
                let seed = a.seed.ok_or_else(|| UsageError("angles --sample requires --seed".into()))?;
                let dist = match kind {
                    SampleKind::Uniform => InputDistribution::Uniform {
                        low: -std::f64::consts::FRAC_PI_2,
                        high: std::f64::consts::FRAC_PI_2,
                    },
                    SampleKind::Binormal => InputDistribution::Binormal { sigma: a.sigma },
                };
                let h = sample_logical_angles(a.m, dist, a.samples, a.bins, seed)?;
                match fmt.unwrap_or(Format::Csv) {
                    Format::Csv => Ok(h.to_csv()),
                    Format::Json => Ok(json(&h)),
                    f => Err(unsupported("angles", f)),
                }
            }
            _ => Err(UsageError("angles needs exactly one of --theta or --sample".into()).into()),
        },
        Command::Rus(a) => {
            let mut base: RusConfig = match &a.config {
                Some(p) => parse_config(p)?,
                None => RusConfig::default(),
            };
            if let Some(v) = a.p_phys {
                base.p_phys = v;
            }
            if let Some(v) = a.iterations {
                base.max_iterations = v;
            }
            if let Some(v) = a.rounds {
                base.rounds_per_iteration = v;
            }
            if let Some(v) = a.truncation {
                base.truncation_threshold = v;
            }
            if let Some(c) = a.controller {
                base.controller = match c {
                    ControllerArg::ZeroBranch => Controller::ZeroBranch,
                    ControllerArg::BestBranch => Controller::BestBranch,
                };
            }
            let ms = if a.m.is_empty() { vec![base.m] } else { a.m.clone() };
            let targets = if a.target.is_empty() { vec![base.target_angle] } else { a.target.clone() };
            let variants: &[Variant] = match a.variant {
                VariantArg::Plain => &[Variant::Plain],
                VariantArg::Diluted => &[Variant::Diluted],
                VariantArg::Both => &[Variant::Plain, Variant::Diluted],
            };
            let dilution = match a.theta_big {
                Some(theta_big) => Dilution::Fixed { theta_big },
                None => Dilution::default(),
            };
            let mut rows = sweep_fig4(&ms, &targets, &base, variants, dilution)?;
            if a.final_only {
                rows = sweep_final(&rows).into_iter().cloned().collect();
            }
            match fmt.unwrap_or(Format::Csv) {
                Format::Csv => Ok(sweep_to_csv(&rows)),
                Format::Json => Ok(json(&rows)),
                f => Err(unsupported("rus", f)),
            }
        }
        Command::Estimate(a) => {
            let c = circuit(&a.circuit)?;
            let archs: Vec<Architecture> = if a.arch == "all" {
                if a.table.is_some() {
                    return Err(UsageError("--table needs a single --arch".into()).into());
                }
                Architecture::ALL.to_vec()
            } else {
                vec![Architecture::from_tag(&a.arch)?]
            };
            let reports = archs
                .iter()
                .map(|&arch| {
                    let t = table_for(arch, a.table.as_ref(), a.circuit.formula_error)?;
                    Ok(estimate(&c, &t, arch.default_policy())?)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            match fmt.unwrap_or(Format::Json) {
                Format::Csv => Ok(reports_to_csv(&reports)),
                Format::Json if reports.len() == 1 => Ok(json(&reports[0])),
                Format::Json => Ok(json(&reports)),
                Format::Text => Ok(reports.iter().map(|r| r.to_table()).collect::<Vec<_>>().join("\n")),
            }
        }
        Command::Compare(a) => {
            let c = circuit(&a.circuit)?;
            let run_one = |tag: &str, file: Option<&PathBuf>| -> anyhow::Result<_> {
                let arch = Architecture::from_tag(tag)?;
                let t = table_for(arch, file, a.circuit.formula_error)?;
                Ok(estimate(&c, &t, arch.default_policy())?)
            };
            let b = run_one(&a.baseline, a.baseline_table.as_ref())?;
            let k = run_one(&a.candidate, a.candidate_table.as_ref())?;
            let cmp = compare(&b, &k)?;
            match fmt.unwrap_or(Format::Json) {
                Format::Json => Ok(json(&cmp)),
                Format::Text => Ok(format!(
                    "{} vs {}: timesteps x{}, volume x{}\n",
                    cmp.baseline.tag(),
                    cmp.candidate.tag(),
                    cmp.tau_ratio,
                    cmp.volume_ratio
                )),
                Format::Csv => Ok(reports_to_csv(&[b, k])),
            }
        }
    }
}

/// Argument problems found after parsing; exit code 2 like clap's own.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let out = match run(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 });
        }
    };
    let written = match &cli.output {
        Some(p) => fs::write(p, out).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.as_bytes()).context("writing stdout")
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
