//! Command-line surface: one binary, seven subcommands, machine-readable
//! artifacts.
//!
//! Every successful run writes a single JSON document (stdout by default,
//! `--output PATH` otherwise) embedding a `format_version` string and the
//! fully resolved configuration, so artifacts are self-describing and
//! byte-identical across reruns of the same config. Numerical failures with
//! an output path leave a `{"failed": true, …}` marker instead of a partial
//! artifact. Exit codes: 0 success, 1 numerical failure (guards, convergence,
//! divergent series), 2 usage error. Usage errors print one machine-parsable
//! line on stderr.

use crate::algebra::{BosonKind, GeneralizedBoson};
use crate::dynamics::{default_cutoffs, peropadre_distribution, tv_scaling_experiment};
use crate::fbs::{
    full_distribution, outcome_probability, sample, NumericalPolicy, OccupationVector,
};
use crate::gbs::{displaced_probability, gaussian_threshold_probability, GaussianState};
use crate::linalg::{haar_unitary, ComplexMatrix, ModeUnitary};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

pub const FORMAT_VERSION: &str = "1";

/// Exit status plus the single-line stderr message for failures.
#[derive(Debug)]
enum CliError {
    /// Invalid input: exit 2.
    Usage(String),
    /// Guards, convergence, divergence: exit 1.
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

fn one_line(s: String) -> String {
    s.replace('\n', " ")
}

#[derive(Parser)]
#[command(
    name = "genboson",
    version,
    about = "Exact numerics for boson sampling with generalized bosons",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker threads for parallel sections (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate f(n), |f(n)|², and F(n) for a species, with the f ↔ F
    /// round-trip report.
    Catalog(CatalogArgs),
    /// Exact probability of one output occupation given one input.
    Prob(ProbArgs),
    /// Exact distribution over all particle-conserving outcomes.
    Distribution(DistributionArgs),
    /// Draw seeded samples from the exact output distribution.
    Sample(SampleArgs),
    /// Mode-mixing transfer protocol: evolve, marginalize, report leakage.
    Dynamics(DynamicsArgs),
    /// Dilution experiment: mean TV distance to ideal versus mode count.
    Scaling(ScalingArgs),
    /// Gaussian-state outcome probability through the Hafnian formula.
    Gbs(GbsArgs),
}

#[derive(Args)]
struct CatalogArgs {
    /// Species: standard | boson_pair | spin_s:S | q_boson:Q | m_paraboson:M | custom:PATH.
    #[arg(long)]
    boson: Option<String>,
    /// Largest occupation tabulated.
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct ProbArgs {
    #[arg(long)]
    boson: Option<String>,
    /// Mode transformation: file:PATH | haar:M=..,seed=..
    #[arg(long)]
    unitary: Option<String>,
    /// Input occupations, comma-separated.
    #[arg(long = "in")]
    input: Option<String>,
    /// Output occupations, comma-separated.
    #[arg(long = "out")]
    out: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct DistributionArgs {
    #[arg(long)]
    boson: Option<String>,
    #[arg(long)]
    unitary: Option<String>,
    #[arg(long = "in")]
    input: Option<String>,
    /// raw keeps the formula mass; renormalize divides it out.
    #[arg(long, value_enum, default_value_t = Policy::Raw)]
    policy: Policy,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    boson: Option<String>,
    #[arg(long)]
    unitary: Option<String>,
    #[arg(long = "in")]
    input: Option<String>,
    /// Number of samples to draw.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampling requires a normalized distribution; raw fails unless the
    /// species conserves mass.
    #[arg(long, value_enum, default_value_t = Policy::Renormalize)]
    policy: Policy,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct DynamicsArgs {
    #[arg(long)]
    boson: Option<String>,
    #[arg(long)]
    unitary: Option<String>,
    #[arg(long = "in")]
    input: Option<String>,
    /// Uniform per-mode cutoff override (default: N+1 capped by the local
    /// dimension).
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long)]
    boson: Option<String>,
    /// Particle number of the collision-free input (1..=3).
    #[arg(long)]
    n: Option<usize>,
    /// Mode counts, comma-separated.
    #[arg(long)]
    m_list: Option<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<String>,
    /// Also write the table as plot-ready CSV.
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args)]
struct GbsArgs {
    #[arg(long)]
    boson: Option<String>,
    /// Gaussian state JSON: {"sigma_q": matrix, "displacement": null | [[re,im],..]}.
    #[arg(long)]
    state: Option<String>,
    /// Binary outcome, comma-separated.
    #[arg(long = "out")]
    out: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Policy {
    Raw,
    Renormalize,
}

impl Policy {
    fn as_str(self) -> &'static str {
        match self {
            Policy::Raw => "raw",
            Policy::Renormalize => "renormalize",
        }
    }
}

impl From<Policy> for NumericalPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Raw => NumericalPolicy::Raw,
            Policy::Renormalize => NumericalPolicy::Renormalize,
        }
    }
}

/// Entry point for the binary: parses, dispatches, maps errors to exit codes.
pub fn main_from_args<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let line = e
                .to_string()
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{line}");
            return 2;
        }
    };
    if cli.threads > 0 {
        // ignore "already built": tests may dispatch repeatedly in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let (output_path, outcome) = dispatch(cli.command);
    match outcome {
        Ok(artifact) => match write_artifact(output_path.as_deref(), &artifact) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("{}", e.message());
                e.code()
            }
        },
        Err((config, e)) => {
            if let (Some(path), CliError::Numerical(msg)) = (&output_path, &e) {
                let marker = json!({
                    "format_version": FORMAT_VERSION,
                    "failed": true,
                    "error": msg,
                    "config": config,
                });
                let _ = write_artifact(Some(path), &marker);
            }
            eprintln!("{}", e.message());
            e.code()
        }
    }
}

fn write_artifact(path: Option<&str>, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(one_line(format!("serialization failed: {e}"))))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(one_line(format!("cannot write {p}: {e}")))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

type Dispatch = (Option<String>, Result<Value, (Value, CliError)>);

fn dispatch(command: Command) -> Dispatch {
    match command {
        Command::Catalog(a) => {
            let out = a.output.clone();
            (out, run_catalog(a))
        }
        Command::Prob(a) => {
            let out = a.output.clone();
            (out, run_prob(a))
        }
        Command::Distribution(a) => {
            let out = a.output.clone();
            (out, run_distribution(a))
        }
        Command::Sample(a) => {
            let out = a.output.clone();
            (out, run_sample(a))
        }
        Command::Dynamics(a) => {
            let out = a.output.clone();
            (out, run_dynamics(a))
        }
        Command::Scaling(a) => {
            let out = a.output.clone();
            (out, run_scaling(a))
        }
        Command::Gbs(a) => {
            let out = a.output.clone();
            (out, run_gbs(a))
        }
    }
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required: {name}")))
}

fn parse_occupations(text: &str, name: &str) -> Result<OccupationVector, CliError> {
    let occ: Result<Vec<usize>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    match occ {
        Ok(v) if !v.is_empty() => Ok(OccupationVector::new(v)),
        _ => Err(CliError::Usage(format!(
            "invalid value for {name}: expected comma-separated occupations, got {text:?}"
        ))),
    }
}

fn parse_usize_list(text: &str, name: &str) -> Result<Vec<usize>, CliError> {
    let v: Result<Vec<usize>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    match v {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "invalid value for {name}: expected comma-separated integers, got {text:?}"
        ))),
    }
}

/// Accepts "1.5", "2i", "-i", "0.3+0.4i", "1-2i".
fn parse_complex(text: &str) -> Option<C64> {
    let t = text.trim();
    if let Ok(re) = t.parse::<f64>() {
        return Some(C64::new(re, 0.0));
    }
    let t = t.strip_suffix('i')?;
    // split into real part and signed imaginary coefficient
    let split = t
        .char_indices()
        .skip(1)
        .find(|&(idx, ch)| (ch == '+' || ch == '-') && !t[..idx].ends_with(['e', 'E']))
        .map(|(idx, _)| idx);
    match split {
        Some(idx) => {
            let re = t[..idx].parse::<f64>().ok()?;
            let im = match &t[idx..] {
                "+" => 1.0,
                "-" => -1.0,
                rest => rest.parse::<f64>().ok()?,
            };
            Some(C64::new(re, im))
        }
        None => {
            let im = match t {
                "" => 1.0,
                "-" => -1.0,
                rest => rest.parse::<f64>().ok()?,
            };
            Some(C64::new(0.0, im))
        }
    }
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexJson> for C64 {
    fn from(c: ComplexJson) -> Self {
        match c {
            ComplexJson::Real(re) => C64::new(re, 0.0),
            ComplexJson::Pair([re, im]) => C64::new(re, im),
        }
    }
}

/// Custom species file: exactly one of the two tables.
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomSpeciesJson {
    f_table: Option<Vec<ComplexJson>>,
    commutator_table: Option<Vec<ComplexJson>>,
}

fn parse_boson(spec: &str) -> Result<GeneralizedBoson, CliError> {
    let usage = |msg: String| CliError::Usage(format!("invalid value for boson: {msg}"));
    let (head, param) = match spec.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (spec, None),
    };
    let need = |p: Option<&str>| {
        p.map(str::to_string)
            .ok_or_else(|| usage(format!("{head} takes a parameter, e.g. {head}:VALUE")))
    };
    match head {
        "standard" => Ok(GeneralizedBoson::standard()),
        "boson_pair" => Ok(GeneralizedBoson::boson_pair()),
        "spin_s" => {
            let s: f64 = need(param)?
                .parse()
                .map_err(|_| usage(format!("spin must be numeric, got {spec:?}")))?;
            let two_s = (2.0 * s).round();
            if (2.0 * s - two_s).abs() > 1e-9 || two_s < 1.0 {
                return Err(usage(format!("spin must be a positive half-integer, got {s}")));
            }
            GeneralizedBoson::spin(two_s as usize)
                .map_err(|e| usage(one_line(e.to_string())))
        }
        "q_boson" => {
            let q = parse_complex(&need(param)?)
                .ok_or_else(|| usage(format!("cannot parse complex q in {spec:?}")))?;
            GeneralizedBoson::q_boson(q).map_err(|e| usage(one_line(e.to_string())))
        }
        "m_paraboson" => {
            let m: usize = need(param)?
                .parse()
                .map_err(|_| usage(format!("m must be a nonnegative integer, got {spec:?}")))?;
            Ok(GeneralizedBoson::m_paraboson(m))
        }
        "custom" => {
            let path = need(param)?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read {path}: {e}")))?;
            let parsed: CustomSpeciesJson = serde_json::from_str(&text)
                .map_err(|e| usage(one_line(format!("cannot parse {path}: {e}"))))?;
            let kind = match (parsed.f_table, parsed.commutator_table) {
                (Some(f), None) => BosonKind::CustomFactor {
                    f_table: f.into_iter().map(C64::from).collect(),
                },
                (None, Some(t)) => BosonKind::CustomCommutator {
                    table: t.into_iter().map(C64::from).collect(),
                },
                _ => {
                    return Err(usage(format!(
                        "{path} must define exactly one of f_table, commutator_table"
                    )))
                }
            };
            GeneralizedBoson::new(kind).map_err(|e| usage(one_line(e.to_string())))
        }
        _ => Err(usage(format!(
            "unknown species {spec:?}; expected standard | boson_pair | spin_s:S | q_boson:Q | m_paraboson:M | custom:PATH"
        ))),
    }
}

/// Resolved species parameters for the config echo.
fn species_json(boson: &GeneralizedBoson) -> Value {
    let pair = |z: &C64| json!([z.re, z.im]);
    let body = match boson.kind() {
        BosonKind::Standard => json!({"kind": "standard"}),
        BosonKind::BosonPair => json!({"kind": "boson_pair"}),
        BosonKind::SpinS { two_s } => json!({"kind": "spin_s", "two_s": two_s}),
        BosonKind::QBoson { q } => json!({"kind": "q_boson", "q": pair(q)}),
        BosonKind::MParaboson { m } => json!({"kind": "m_paraboson", "m": m}),
        BosonKind::CustomFactor { f_table } => json!({
            "kind": "custom_factor",
            "f_table": f_table.iter().map(pair).collect::<Vec<_>>(),
        }),
        BosonKind::CustomCommutator { table } => json!({
            "kind": "custom_commutator",
            "commutator_table": table.iter().map(pair).collect::<Vec<_>>(),
        }),
    };
    let mut obj = body.as_object().cloned().expect("object");
    obj.insert("local_dim".into(), json!(boson.local_dim()));
    Value::Object(obj)
}

/// "file:PATH" or "haar:M=..,seed=.."; returns the unitary and its config echo.
fn parse_unitary(spec: &str) -> Result<(ModeUnitary, Value), CliError> {
    let usage = |msg: String| CliError::Usage(format!("invalid value for unitary: {msg}"));
    match spec.split_once(':') {
        Some(("file", path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {path}: {e}")))?;
            let matrix: ComplexMatrix = serde_json::from_str(&text)
                .map_err(|e| usage(one_line(format!("cannot parse {path}: {e}"))))?;
            let unitary =
                ModeUnitary::new(matrix).map_err(|e| usage(one_line(format!("{path}: {e}"))))?;
            let echo = json!({"source": "file", "path": path, "modes": unitary.modes()});
            Ok((unitary, echo))
        }
        Some(("haar", params)) => {
            let mut m: Option<usize> = None;
            let mut seed: Option<u64> = None;
            for part in params.split(',') {
                match part.split_once('=') {
                    Some(("M", v)) | Some(("m", v)) => {
                        m = Some(
                            v.trim()
                                .parse()
                                .map_err(|_| usage(format!("cannot parse M in {spec:?}")))?,
                        )
                    }
                    Some(("seed", v)) => {
                        seed = Some(
                            v.trim()
                                .parse()
                                .map_err(|_| usage(format!("cannot parse seed in {spec:?}")))?,
                        )
                    }
                    _ => return Err(usage(format!("unknown haar parameter in {spec:?}"))),
                }
            }
            let m = m.ok_or_else(|| usage(format!("haar spec needs M=, got {spec:?}")))?;
            let seed = seed.ok_or_else(|| usage(format!("haar spec needs seed=, got {spec:?}")))?;
            if m == 0 {
                return Err(usage("haar spec needs M >= 1".into()));
            }
            let echo = json!({"source": "haar", "modes": m, "seed": seed});
            Ok((haar_unitary(m, seed), echo))
        }
        _ => Err(usage(format!(
            "expected file:PATH or haar:M=..,seed=.., got {spec:?}"
        ))),
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(one_line(e.to_string()))
}

type RunResult = Result<Value, (Value, CliError)>;

fn run_catalog(a: CatalogArgs) -> RunResult {
    let stage = (|| parse_boson(required(a.boson.as_ref(), "boson")?))();
    let boson = match stage {
        Ok(b) => b,
        Err(e) => return Err((Value::Null, e)),
    };
    let config = json!({
        "command": "catalog",
        "boson": species_json(&boson),
        "n_max": a.n_max,
    });
    let pair = |z: C64| json!([z.re, z.im]);
    let mut rows = Vec::new();
    for n in 0..=a.n_max {
        let f = match boson.factor(n) {
            Ok(f) => f,
            // explicit tables simply end; later rows are unavailable, not wrong
            Err(crate::algebra::AlgebraError::TableExhausted(_)) => break,
            Err(e) => return Err((config, numerical(e))),
        };
        let commutator = boson.commutator(n).ok().map(pair);
        rows.push(json!({
            "n": n,
            "f": pair(f),
            "f_norm_sq": f.norm_sqr(),
            "F": commutator,
        }));
    }
    let tabulated = rows.len().saturating_sub(1);
    let roundtrip = match crate::algebra::roundtrip_check(&boson, tabulated) {
        Ok(r) => r,
        Err(e) => return Err((config, numerical(e))),
    };
    Ok(json!({
        "format_version": FORMAT_VERSION,
        "config": config,
        "local_dim": boson.local_dim(),
        "table": rows,
        "roundtrip": {
            "max_recursion_residual": roundtrip.max_recursion_residual,
            "max_catalog_residual": roundtrip.max_catalog_residual,
            "catalog_discrepancy": roundtrip.catalog_discrepancy,
            "branch_warnings": roundtrip.branch_warnings,
        },
    }))
}

fn run_prob(a: ProbArgs) -> RunResult {
    let stage = (|| {
        let boson = parse_boson(required(a.boson.as_ref(), "boson")?)?;
        let (unitary, unitary_echo) = parse_unitary(required(a.unitary.as_ref(), "unitary")?)?;
        let input = parse_occupations(required(a.input.as_ref(), "in")?, "in")?;
        let out = parse_occupations(required(a.out.as_ref(), "out")?, "out")?;
        Ok((boson, unitary, unitary_echo, input, out))
    })();
    let (boson, unitary, unitary_echo, input, out) = match stage {
        Ok(v) => v,
        Err(e) => return Err((Value::Null, e)),
    };
    let config = json!({
        "command": "prob",
        "boson": species_json(&boson),
        "unitary": unitary_echo,
        "in": input.as_slice(),
        "out": out.as_slice(),
    });
    match outcome_probability(&boson, &unitary, &input, &out) {
        Ok(p) => Ok(json!({
            "format_version": FORMAT_VERSION,
            "config": config,
            "probability": p,
        })),
        Err(e) => Err((config, numerical(e))),
    }
}

fn run_distribution(a: DistributionArgs) -> RunResult {
    let stage = (|| {
        let boson = parse_boson(required(a.boson.as_ref(), "boson")?)?;
        let (unitary, unitary_echo) = parse_unitary(required(a.unitary.as_ref(), "unitary")?)?;
        let input = parse_occupations(required(a.input.as_ref(), "in")?, "in")?;
        Ok((boson, unitary, unitary_echo, input))
    })();
    let (boson, unitary, unitary_echo, input) = match stage {
        Ok(v) => v,
        Err(e) => return Err((Value::Null, e)),
    };
    let config = json!({
        "command": "distribution",
        "boson": species_json(&boson),
        "unitary": unitary_echo,
        "in": input.as_slice(),
        "policy": a.policy.as_str(),
    });
    match full_distribution(&boson, &unitary, &input, a.policy.into()) {
        Ok(dist) => Ok(json!({
            "format_version": FORMAT_VERSION,
            "config": config,
            "distribution": dist,
        })),
        Err(e) => Err((config, numerical(e))),
    }
}

fn run_sample(a: SampleArgs) -> RunResult {
    let stage = (|| {
        let boson = parse_boson(required(a.boson.as_ref(), "boson")?)?;
        let (unitary, unitary_echo) = parse_unitary(required(a.unitary.as_ref(), "unitary")?)?;
        let input = parse_occupations(required(a.input.as_ref(), "in")?, "in")?;
        let count = *required(a.count.as_ref(), "count")?;
        Ok((boson, unitary, unitary_echo, input, count))
    })();
    let (boson, unitary, unitary_echo, input, count) = match stage {
        Ok(v) => v,
        Err(e) => return Err((Value::Null, e)),
    };
    let config = json!({
        "command": "sample",
        "boson": species_json(&boson),
        "unitary": unitary_echo,
        "in": input.as_slice(),
        "count": count,
        "seed": a.seed,
        "policy": a.policy.as_str(),
    });
    let run = (|| {
        let dist = full_distribution(&boson, &unitary, &input, a.policy.into())?;
        let draws = sample(&dist, count, a.seed)?;
        Ok::<_, crate::fbs::FbsError>((dist, draws))
    })();
    match run {
        Ok((dist, draws)) => {
            let mut counts: std::collections::BTreeMap<Vec<usize>, usize> =
                std::collections::BTreeMap::new();
            for d in &draws {
                *counts.entry(d.as_slice().to_vec()).or_insert(0) += 1;
            }
            Ok(json!({
                "format_version": FORMAT_VERSION,
                "config": config,
                "total_mass": dist.total_mass,
                "samples": draws.iter().map(|d| d.as_slice().to_vec()).collect::<Vec<_>>(),
                "counts": counts
                    .into_iter()
                    .map(|(occ, c)| json!({"outcome": occ, "count": c}))
                    .collect::<Vec<_>>(),
            }))
        }
        Err(e) => Err((config, numerical(e))),
    }
}

fn run_dynamics(a: DynamicsArgs) -> RunResult {
    let stage = (|| {
        let boson = parse_boson(required(a.boson.as_ref(), "boson")?)?;
        let (unitary, unitary_echo) = parse_unitary(required(a.unitary.as_ref(), "unitary")?)?;
        let input = parse_occupations(required(a.input.as_ref(), "in")?, "in")?;
        Ok((boson, unitary, unitary_echo, input))
    })();
    let (boson, unitary, unitary_echo, input) = match stage {
        Ok(v) => v,
        Err(e) => return Err((Value::Null, e)),
    };
    let total: usize = input.as_slice().iter().sum();
    let cutoffs = match a.cutoff {
        Some(c) => vec![c; 2 * unitary.modes()],
        None => default_cutoffs(&boson, 2 * unitary.modes(), total),
    };
    let config = json!({
        "command": "dynamics",
        "boson": species_json(&boson),
        "unitary": unitary_echo,
        "in": input.as_slice(),
        "cutoffs": cutoffs,
    });
    match peropadre_distribution(&boson, &unitary, &input, &cutoffs) {
        Ok(report) => Ok(json!({
            "format_version": FORMAT_VERSION,
            "config": config,
            "transfer_time": report.transfer_time,
            "leakage": report.leakage,
            "distribution": report.distribution,
        })),
        Err(e) => Err((config, numerical(e))),
    }
}

fn run_scaling(a: ScalingArgs) -> RunResult {
    let stage = (|| {
        let boson = parse_boson(required(a.boson.as_ref(), "boson")?)?;
        let n = *required(a.n.as_ref(), "n")?;
        let m_list = parse_usize_list(required(a.m_list.as_ref(), "m-list")?, "m-list")?;
        Ok((boson, n, m_list))
    })();
    let (boson, n, m_list) = match stage {
        Ok(v) => v,
        Err(e) => return Err((Value::Null, e)),
    };
    let config = json!({
        "command": "scaling",
        "boson": species_json(&boson),
        "n": n,
        "m_list": m_list,
        "trials": a.trials,
        "seed": a.seed,
    });
    let table = match tv_scaling_experiment(&boson, n, &m_list, a.trials, a.seed) {
        Ok(t) => t,
        Err(e) => return Err((config, numerical(e))),
    };
    if let Some(csv_path) = &a.csv {
        let mut csv = String::from("M,mean_tv,stderr\n");
        for ((m, tv), se) in table.m.iter().zip(&table.mean_tv).zip(&table.stderr) {
            csv.push_str(&format!("{m},{tv},{se}\n"));
        }
        if let Err(e) = std::fs::write(csv_path, csv) {
            return Err((
                config,
                CliError::Usage(one_line(format!("cannot write {csv_path}: {e}"))),
            ));
        }
    }
    Ok(json!({
        "format_version": FORMAT_VERSION,
        "config": config,
        "table": table,
    }))
}

fn run_gbs(a: GbsArgs) -> RunResult {
    let stage = (|| {
        let boson = parse_boson(required(a.boson.as_ref(), "boson")?)?;
        let path = required(a.state.as_ref(), "state")?.clone();
        let text = std::fs::read_to_string(&path).map_err(|e| {
            CliError::Usage(format!("invalid value for state: cannot read {path}: {e}"))
        })?;
        let state: GaussianState = serde_json::from_str(&text).map_err(|e| {
            CliError::Usage(one_line(format!(
                "invalid value for state: cannot parse {path}: {e}"
            )))
        })?;
        let out = parse_occupations(required(a.out.as_ref(), "out")?, "out")?;
        Ok((boson, path, state, out))
    })();
    let (boson, path, state, out) = match stage {
        Ok(v) => v,
        Err(e) => return Err((Value::Null, e)),
    };
    let config = json!({
        "command": "gbs",
        "boson": species_json(&boson),
        "state": {"path": path, "modes": state.modes(), "displaced": state.displacement().is_some()},
        "out": out.as_slice(),
    });
    let result = if state.displacement().is_some() {
        displaced_probability(&boson, &state, &out)
    } else {
        gaussian_threshold_probability(&boson, &state, &out)
    };
    match result {
        Ok(p) => Ok(json!({
            "format_version": FORMAT_VERSION,
            "config": config,
            "probability": p,
        })),
        Err(e) => Err((config, numerical(e))),
    }
}
