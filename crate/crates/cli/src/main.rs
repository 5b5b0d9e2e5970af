//! `shortqip`: exact values, simulations, tomography and the decision pipelines from the shell.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use shortqip::channels::choi_of_channel;
use shortqip::linalg::trace_norm;
use shortqip::protocols::{exact_value, interact, parse_protocol, parse_prover, rewire_verifier, ProtocolSpec, ProverSpec};
use shortqip::reductions::{
    arthur_acceptance, arthur_params, definetti_bound, honest_witness, parse_qam, parse_rational, qam_decide,
    qiplog_decide, ArthurOverrides, QiplogMode,
};
use shortqip::sampling::sample_counts;
use shortqip::seesaw::{seesaw, SeesawConfig};
use shortqip::strategies::SdpOptions;
use shortqip::tomography::{canonical_frame, reconstruct, sample_outcomes, sample_size, sample_size_exact, MeasureMode};
use shortqip::Error;

#[derive(Parser, Debug)]
#[command(name = "shortqip", version, about = "Short-message quantum interactive proofs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum acceptance probability of a protocol.
    Value(Common),
    /// Acceptance probability of a protocol against a given prover.
    Simulate(Common),
    /// Tomography of the rewired verifier's Choi state.
    Tomo(Common),
    /// Run a decision pipeline.
    Reduce {
        #[arg(value_enum)]
        pipeline: PipelineArg,
        #[command(flatten)]
        common: Common,
    },
    /// Parameter calculators.
    Params {
        /// Question qubits.
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Completeness-soundness gap `1/p`, as `a/b` or a decimal.
        #[arg(long, default_value = "1/4")]
        gap: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PipelineArg {
    Qma,
    Qiplog,
    Qam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    protocol: Option<PathBuf>,
    #[arg(long)]
    prover: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long)]
    shots: Option<u64>,
    /// Comma-separated `key=value` replacements, e.g. `n=1000,m=10,trials=200`.
    #[arg(long = "override")]
    overrides: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render the report as `key = value` lines instead of JSON.
    #[arg(long)]
    human: bool,
}

/// Failures with their exit codes.
#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Lib(e) => match e {
                Error::Parse(_) => 2,
                Error::Solver { .. } => 4,
                Error::CapExceeded(_) => 5,
                _ => 3,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(m) | Failure::Usage(m) => m.clone(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

const OVERRIDE_KEYS: [&str; 7] = ["epsilon", "delta", "n", "m", "trials", "iters", "shots"];

fn parse_overrides(text: Option<&str>) -> Outcome<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let Some(text) = text else { return Ok(map) };
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{item}` is not key=value")))?;
        let k = k.trim();
        if !OVERRIDE_KEYS.contains(&k) {
            return Err(Error::Parse(format!("unknown override `{k}`; expected one of {OVERRIDE_KEYS:?}")).into());
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Outcome<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Parse(format!("override {key}={v} is not a valid value")).into())
        })
        .transpose()
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_protocol(common: &Common) -> Outcome<ProtocolSpec> {
    let path = common
        .protocol
        .as_ref()
        .ok_or_else(|| Failure::Usage("--protocol is required".into()))?;
    Ok(parse_protocol(&read(path)?)?)
}

fn load_prover(common: &Common) -> Outcome<ProverSpec> {
    let path = common
        .prover
        .as_ref()
        .ok_or_else(|| Failure::Usage("--prover is required".into()))?;
    Ok(parse_prover(&read(path)?)?)
}

fn measure_mode(common: &Common, shots: Option<u64>, default_shots: u64) -> MeasureMode {
    match common.mode {
        ModeArg::Exact => MeasureMode::Exact,
        ModeArg::Sampled => MeasureMode::Sampled {
            shots: shots.or(common.shots).unwrap_or(default_shots),
            seed: common.seed,
        },
    }
}

fn shape_json(v: &ProtocolSpec) -> Value {
    json!({"rounds": v.rounds(), "q": v.shape.q, "r": v.shape.r, "v": v.memory, "a": v.a, "b": v.b, "gap": v.gap})
}

fn cmd_value(common: &Common, ov: &BTreeMap<String, String>) -> Outcome<Value> {
    let v = load_protocol(common)?;
    let exact = exact_value(&v)?;
    let mut out = json!({
        "protocol": shape_json(&v),
        "value": exact.value,
        "method": exact.method,
        "sdp_gap": exact.gap,
    });
    if let Some(iters) = get::<usize>(ov, "iters")? {
        let res = seesaw(&v, &SeesawConfig { iters, seed: common.seed, ..SeesawConfig::default() })?;
        out["seesaw"] = json!({"value": res.value, "history": res.history, "iters": iters});
    }
    Ok(out)
}

fn cmd_simulate(common: &Common, ov: &BTreeMap<String, String>) -> Outcome<Value> {
    let v = load_protocol(common)?;
    let p = load_prover(common)?;
    let prob = interact(&v, &p)?;
    let mut out = json!({"protocol": shape_json(&v), "acceptance_probability": prob});
    if let MeasureMode::Sampled { shots, seed } = measure_mode(common, get(ov, "shots")?, 10_000) {
        let counts = sample_counts(&[1.0 - prob, prob], shots, seed, &[0x51]);
        out["shots"] = json!(shots);
        out["accepted"] = json!(counts[1]);
        out["acceptance_rate"] = json!(counts[1] as f64 / shots as f64);
    }
    Ok(out)
}

fn cmd_tomo(common: &Common, ov: &BTreeMap<String, String>) -> Outcome<Value> {
    let v = load_protocol(common)?;
    let rho = choi_of_channel(&rewire_verifier(&v)?);
    let k = 1 + v.shape.total_q() + v.shape.total_r();
    let frame = canonical_frame(k)?;
    let p = frame.probabilities(rho.matrix())?;
    let mode = measure_mode(common, get(ov, "shots")?, 100_000);
    let q = sample_outcomes(&p, mode)?;
    let h = reconstruct(&q, &frame)?;
    let l1: f64 = q.weights.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
    let error = trace_norm(&(&h - rho.matrix()));
    let bound = 10f64.powf(k as f64 / 2.0) * l1;
    let eps = get::<f64>(ov, "epsilon")?.unwrap_or(0.5);
    Ok(json!({
        "protocol": shape_json(&v),
        "qubits": k,
        "mode": mode,
        "outcome_l1": l1,
        "trace_error": error,
        "bound": bound,
        "bound_holds": error <= bound + 1e-9,
        "sample_size": {"epsilon": eps, "n": sample_size(k, eps)?.to_string()},
    }))
}

fn arthur_overrides(ov: &BTreeMap<String, String>) -> Outcome<ArthurOverrides> {
    Ok(ArthurOverrides {
        epsilon: get(ov, "epsilon")?,
        delta: get(ov, "delta")?,
        n: get(ov, "n")?,
        m: get(ov, "m")?,
    })
}

fn cmd_reduce(pipeline: PipelineArg, common: &Common, ov: &BTreeMap<String, String>) -> Outcome<Value> {
    match pipeline {
        PipelineArg::Qma => {
            let v = load_protocol(common)?;
            let p = load_prover(common)?;
            if v.rounds() != 1 {
                return Err(Error::DimensionMismatch("the QMA pipeline needs a one-round protocol".into()).into());
            }
            let q = v.shape.q[0];
            let gap = parse_rational(&v.gap.to_string())?;
            let params = arthur_params(q, &gap)?;
            let settings = params.resolve(&arthur_overrides(ov)?)?;
            let copies = (settings.n + settings.m).max(settings.n + 1);
            let witness = honest_witness(&v, &p, copies)?;
            let mode = match common.mode {
                ModeArg::Exact => MeasureMode::Exact,
                ModeArg::Sampled => MeasureMode::Sampled { shots: settings.n, seed: common.seed },
            };
            let trials = get(ov, "trials")?.unwrap_or(100);
            let report = arthur_acceptance(&v, &witness, &settings, mode, trials, common.seed)?;
            let definetti = if q > 0 && settings.m > 0 {
                json!(definetti_bound(settings.n, settings.m, q)?.to_string())
            } else {
                Value::Null
            };
            Ok(json!({
                "protocol": shape_json(&v),
                "report": report,
                "params": {"full": params.report(), "resolved": settings, "definetti_bound": definetti},
            }))
        }
        PipelineArg::Qiplog => {
            let v = load_protocol(common)?;
            let mode = match measure_mode(common, get(ov, "shots")?, 100_000) {
                MeasureMode::Exact => QiplogMode::Exact,
                sampled => QiplogMode::Tomography { measure: sampled },
            };
            let report = qiplog_decide(&v, mode, &SdpOptions::default())?;
            Ok(json!({"protocol": shape_json(&v), "report": report}))
        }
        PipelineArg::Qam => {
            let path = common
                .protocol
                .as_ref()
                .ok_or_else(|| Failure::Usage("--protocol is required".into()))?;
            let fam = parse_qam(&read(path)?)?;
            let mode = measure_mode(common, get(ov, "shots")?, 10_000);
            let trials = get(ov, "trials")?.unwrap_or(10_000);
            let report = qam_decide(&fam.instances, fam.a, fam.b, mode, trials, common.seed)?;
            Ok(json!({"a": fam.a, "b": fam.b, "instances": fam.instances.len(), "report": report}))
        }
    }
}

fn cmd_params(q: usize, gap: &str, ov: &BTreeMap<String, String>) -> Outcome<Value> {
    let gap = parse_rational(gap)?;
    let params = arthur_params(q, &gap)?;
    let overrides = arthur_overrides(ov)?;
    let resolved = match params.resolve(&overrides) {
        Ok(s) => json!(s),
        Err(Error::CapExceeded(m)) => json!({"executable": false, "reason": m}),
        Err(e) => return Err(e.into()),
    };
    let mut table = Map::new();
    for eps in ["1/2", "1/10", "1/100"] {
        let e = parse_rational(eps)?;
        let row: Vec<String> = (1..=6)
            .map(|k| sample_size_exact(k, &e).map(|n| n.to_string()))
            .collect::<Result<_, _>>()?;
        table.insert(eps.to_string(), json!(row));
    }
    let definetti = match (overrides.n, overrides.m) {
        (Some(n), Some(m)) if q > 0 => json!(definetti_bound(n, m, q)?.to_string()),
        _ => Value::Null,
    };
    Ok(json!({
        "arthur": {"full": params.report(), "resolved": resolved},
        "sample_size": {"k": [1, 2, 3, 4, 5, 6], "by_epsilon": table},
        "definetti_bound": definetti,
    }))
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push(format!("{prefix} = {other}")),
    }
}

fn render(report: &Value, human: bool) -> String {
    if human {
        let mut lines = Vec::new();
        flatten("", report, &mut lines);
        lines.join("\n") + "\n"
    } else {
        serde_json::to_string_pretty(report).expect("reports serialize") + "\n"
    }
}

fn run(cli: &Cli) -> Outcome<(String, Option<PathBuf>)> {
    let (name, common) = match &cli.command {
        Command::Value(c) => ("value", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Tomo(c) => ("tomo", c),
        Command::Reduce { common, .. } => ("reduce", common),
        Command::Params { common, .. } => ("params", common),
    };
    let ov = parse_overrides(common.overrides.as_deref())?;
    let result = match &cli.command {
        Command::Value(c) => cmd_value(c, &ov)?,
        Command::Simulate(c) => cmd_simulate(c, &ov)?,
        Command::Tomo(c) => cmd_tomo(c, &ov)?,
        Command::Reduce { pipeline, common } => cmd_reduce(*pipeline, common, &ov)?,
        Command::Params { q, gap, .. } => cmd_params(*q, gap, &ov)?,
    };
    let mut report = json!({
        "command": name,
        "seed": common.seed,
        "mode": match common.mode { ModeArg::Exact => "exact", ModeArg::Sampled => "sampled" },
        "overrides": ov,
        "result": result,
    });
    if let Command::Reduce { pipeline, .. } = &cli.command {
        report["pipeline"] = json!(format!("{pipeline:?}").to_lowercase());
    }
    Ok((render(&report, common.human), common.out.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, None)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok((text, Some(path))) => match fs::write(&path, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                ExitCode::from(1)
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
