//! Command-line front end. Flags win over `key = value` config-file entries;
//! `SWAPSIM_SEED` supplies the seed when neither sets one.
//!
//! Exit codes: 0 success, 2 usage or invalid configuration, 3 I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{self, Hypothesis};
use crate::engine::{self, AngleMap, ExperimentConfig, HeraldPredicate};
use crate::geometry::{self, GeometryPreset, PresetName, SpacetimeEvent};
use crate::qcore::BsmMode;
use crate::toys::{self, AcceptanceRule, RpsVerdict, ToyVariant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const SEED_ENV: &str = "SWAPSIM_SEED";

const CONFIG_KEYS: &[&str] = &[
    "geometry", "preset", "trials", "seed", "angles_a", "angles_b", "herald", "bsm", "c_enabled", "exact", "out",
    "variant", "boost", "controlled",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "swapsim", version, about = "Entanglement-swapping Bell test simulator and collider-bias diagnostics")]
pub struct Cli {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the swapping experiment and analyze the heralded subensemble.
    Simulate(SimulateArgs),
    /// Run a classical collider toy.
    Toy(ToyArgs),
    /// Rock-paper-scissors with a verdict-selecting referee.
    Rps(RpsArgs),
    /// Classify event pairs and show time orders in boosted frames.
    Geometry(GeometryArgs),
    /// Teleportation through a controlled or uncontrolled Bell measurement.
    Teleport(TeleportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// early | delayed | spacelike
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Two comma-separated angles in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub angles_a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub angles_b: Option<String>,
    /// Comma-separated Bell outcomes (phi+,phi-,psi+,psi-,none) or `any`.
    #[arg(long)]
    pub herald: Option<String>,
    /// full | partial | partial-psi-plus
    #[arg(long)]
    pub bsm: Option<String>,
    /// Compute exact distributions instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Output path prefix.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// collider | source
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub angles_a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub angles_b: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RpsArgs {
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// early | delayed | spacelike
    #[arg(long, alias = "geometry")]
    pub preset: Option<String>,
    /// Custom event `LABEL=t,x` with LABEL in SL|SR|A|B|C; repeatable.
    #[arg(long = "event", allow_hyphen_values = true)]
    pub events: Vec<String>,
    /// Boost velocities, comma-separated or repeated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub boost: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    /// true | false
    #[arg(long)]
    pub controlled: Option<bool>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed `key = value` entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = k.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(usage(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.0
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| usage(format!("config `{key}`: {e}"))))
            .transpose()
    }
}

/// Resolves one setting: flag, then config file, then default.
fn layer<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(file.get(key)?.unwrap_or(default)),
    }
}

fn resolve_seed(flag: Option<u64>, file: &ConfigFile) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file.get("seed")?) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|e| usage(format!("{SEED_ENV}: {e}"))),
        Err(_) => Ok(0),
    }
}

fn parse_angles(s: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| usage(format!("angle `{p}`: {e}"))))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() => Ok([*x, *y]),
        _ => Err(usage(format!("expected two finite comma-separated angles, got `{s}`"))),
    }
}

fn format_angles(a: [f64; 2]) -> String {
    format!("{},{}", a[0], a[1])
}

fn resolve_angles(flag_a: Option<String>, flag_b: Option<String>, file: &ConfigFile) -> Result<AngleMap, CliError> {
    let d = AngleMap::default();
    let a = match flag_a.or(file.get("angles_a")?) {
        Some(s) => parse_angles(&s)?,
        None => d.a,
    };
    let b = match flag_b.or(file.get("angles_b")?) {
        Some(s) => parse_angles(&s)?,
        None => d.b,
    };
    Ok(AngleMap { a, b })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes `report` to `<out>.report.json`, or to `stdout` without `--out`.
fn emit_report(report: &Value, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = to_json(report);
    match out {
        Some(prefix) => write_file(&with_suffix(prefix, ".report.json"), &bytes),
        None => stdout.write_all(&bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn cmd_simulate(args: SimulateArgs, file: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let geometry: PresetName = layer(args.geometry, file, "geometry", "early".to_string())?.parse().map_err(usage)?;
    let herald: HeraldPredicate = layer(args.herald, file, "herald", "psi-".to_string())?.parse().map_err(usage)?;
    let bsm_mode: BsmMode = layer(args.bsm, file, "bsm", "full".to_string())?.parse().map_err(usage)?;
    let exact = args.exact || file.get("exact")?.unwrap_or(false);
    let out = args.out.or(file.get("out")?);
    let config = ExperimentConfig {
        geometry,
        n_trials: layer(args.trials, file, "trials", 100_000)?,
        seed: resolve_seed(args.seed, file)?,
        angles: resolve_angles(args.angles_a, args.angles_b, file)?,
        herald,
        c_enabled: layer(None, file, "c_enabled", true)?,
        bsm_mode,
    };
    config.validate().map_err(usage)?;
    let meta = json!({
        "command": "simulate",
        "geometry": geometry.token(),
        "trials": config.n_trials,
        "seed": config.seed,
        "angles_a": format_angles(config.angles.a),
        "angles_b": format_angles(config.angles.b),
        "herald": herald.name(),
        "bsm": bsm_mode.token(),
        "c_enabled": config.c_enabled,
        "exact": exact,
        "config_digest": config.meta().config_digest,
    });

    let nda = analysis::no_difference_check(&config).map_err(usage)?;
    if exact {
        let table = engine::exact_experiment_distribution(&config).map_err(usage)?;
        let cond = table.conditional_on(&herald);
        let correlators = cond.as_ref().map(analysis::CorrelatorTable::from_distribution);
        let chsh = correlators.as_ref().and_then(|t| analysis::chsh(t).ok());
        let fragility = if config.c_enabled { Some(analysis::fragility(&config).map_err(usage)?) } else { None };
        let herald_probability: f64 =
            table.cells.iter().filter(|(c, _)| c.c.is_some_and(|o| herald.accepts(o))).map(|(_, p)| p).sum();
        let report = json!({
            "meta": meta,
            "mode": "exact",
            "herald_probability": herald_probability,
            "correlators": correlators,
            "chsh": chsh,
            "nda": nda,
            "post_selection_shift": analysis::post_selection_shift(&config).map_err(usage)?,
            "fragility": fragility,
        });
        return emit_report(&report, out.as_deref(), stdout);
    }

    let out = out.ok_or_else(|| usage("simulate needs --out <prefix> unless --exact is given"))?;
    let ensemble = engine::run_trials(&config).map_err(usage)?;
    let ec = engine::post_select(&ensemble, &herald);
    let (fraction, fraction_se) = analysis::heralded_fraction(&ensemble.records);
    let correlators = analysis::correlators(&ec.records);
    let chsh = analysis::chsh(&correlators).ok();
    let mut ci_tests = Vec::new();
    for h in [Hypothesis::NoSignalingA, Hypothesis::NoSignalingB, Hypothesis::LocalCausalityA, Hypothesis::LocalCausalityB] {
        ci_tests.push(analysis::run_hypothesis(&ensemble.records, h, false).map_err(usage)?);
    }
    for h in [Hypothesis::LocalCausalityA, Hypothesis::LocalCausalityB, Hypothesis::NoSignalingA, Hypothesis::NoSignalingB] {
        ci_tests.push(analysis::run_hypothesis(&ec.records, h, true).map_err(usage)?);
    }
    let report = json!({
        "meta": meta,
        "mode": "monte_carlo",
        "n_trials": ensemble.len(),
        "heralded": ec.len(),
        "heralded_fraction": fraction,
        "heralded_fraction_stderr": fraction_se,
        "correlators": correlators,
        "chsh": chsh,
        "ci_tests": ci_tests,
        "nda": nda,
    });

    let mut csv = Vec::new();
    engine::write_csv(&ensemble, &mut csv).map_err(usage)?;
    write_file(&with_suffix(&out, ".csv"), &csv)?;
    let mut mirror = Vec::new();
    engine::write_json(&ensemble, &config.meta(), &mut mirror).map_err(usage)?;
    mirror.push(b'\n');
    write_file(&with_suffix(&out, ".json"), &mirror)?;
    emit_report(&report, Some(&out), stdout)
}

fn marginal_up(trials: &[toys::ToyTrial], wing_a: bool) -> Value {
    let n = trials.len() as f64;
    let ups = trials
        .iter()
        .filter(|t| if wing_a { t.outcome_a } else { t.outcome_b } == crate::qcore::Spin::Up)
        .count() as f64;
    let p = ups / n;
    json!({ "p_up": p, "stderr": (p * (1.0 - p) / n).sqrt() })
}

fn cmd_toy(args: ToyArgs, file: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let variant: ToyVariant = layer(args.variant, file, "variant", "collider".to_string())?.parse().map_err(usage)?;
    let n = layer(args.trials, file, "trials", 100_000)?;
    let seed = resolve_seed(args.seed, file)?;
    let angles = resolve_angles(args.angles_a, args.angles_b, file)?;
    let out = args.out.or(file.get("out")?);
    let rule = AcceptanceRule::bell(&angles);
    let trials = toys::run_toy(variant, n, seed, &rule).map_err(usage)?;
    let acc = toys::accepted(&trials);

    let mut hypotheses = vec![Hypothesis::LocalCausalityA, Hypothesis::LocalCausalityB];
    if variant == ToyVariant::Source {
        hypotheses.push(Hypothesis::StatisticalIndependence);
    }
    let mut ci_tests = Vec::new();
    for &h in &hypotheses {
        ci_tests.push(analysis::run_hypothesis(&trials, h, false).map_err(usage)?);
        ci_tests.push(analysis::run_hypothesis(&acc, h, true).map_err(usage)?);
    }
    let correlators = analysis::correlators(&acc);
    let report = json!({
        "meta": {
            "command": "toy",
            "variant": variant.token(),
            "trials": n,
            "seed": seed,
            "angles_a": format_angles(angles.a),
            "angles_b": format_angles(angles.b),
        },
        "accepted": acc.len(),
        "acceptance_rate": acc.len() as f64 / n as f64,
        "correlators": correlators,
        "chsh": analysis::chsh(&correlators).ok(),
        "generator_marginals": { "A": marginal_up(&trials, true), "B": marginal_up(&trials, false) },
        "ci_tests": ci_tests,
    });
    if let Some(prefix) = &out {
        let mut csv = Vec::new();
        toys::write_toy_csv(&trials, &mut csv).map_err(usage)?;
        write_file(&with_suffix(prefix, ".csv"), &csv)?;
    }
    emit_report(&report, out.as_deref(), stdout)
}

fn cmd_rps(args: RpsArgs, file: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let n = layer(args.trials, file, "trials", 10_000)?;
    let seed = resolve_seed(args.seed, file)?;
    let out = args.out.or(file.get("out")?);
    let trials = toys::run_rps(n, seed).map_err(usage)?;
    let mut tests = vec![analysis::run_hypothesis(&trials, Hypothesis::ChoiceIndependence, false).map_err(usage)?];
    for v in RpsVerdict::ALL {
        let sel: Vec<_> = trials.iter().filter(|t| t.verdict == v).copied().collect();
        let mut r = analysis::run_hypothesis(&sel, Hypothesis::ChoiceIndependence, true).map_err(usage)?;
        r.hypothesis = format!("{} | {}", r.hypothesis, v.token());
        tests.push(r);
    }
    let report = json!({
        "meta": { "command": "rps", "trials": n, "seed": seed },
        "verdict_counts": RpsVerdict::ALL
            .iter()
            .map(|v| (v.token().to_string(), json!(trials.iter().filter(|t| t.verdict == *v).count())))
            .collect::<serde_json::Map<_, _>>(),
        "ci_tests": tests,
    });
    if let Some(prefix) = &out {
        let mut csv = Vec::new();
        toys::write_rps_csv(&trials, &mut csv).map_err(usage)?;
        write_file(&with_suffix(prefix, ".csv"), &csv)?;
    }
    emit_report(&report, out.as_deref(), stdout)
}

fn parse_event(raw: &str) -> Result<SpacetimeEvent, CliError> {
    let (label, coords) = raw.split_once('=').ok_or_else(|| usage(format!("event `{raw}`: expected LABEL=t,x")))?;
    let label = label.parse().map_err(usage)?;
    let [t, x] = parse_angles(coords).map_err(|_| usage(format!("event `{raw}`: expected two finite coordinates")))?;
    Ok(SpacetimeEvent::new(label, t, x))
}

fn cmd_geometry(args: GeometryArgs, file: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let preset_name = args.preset.or(file.get("preset")?).or(file.get("geometry")?);
    let mut preset = match &preset_name {
        Some(name) => GeometryPreset::named(name.parse().map_err(usage)?).expect("built-in preset"),
        None if args.events.is_empty() => GeometryPreset::early_delft(),
        None => GeometryPreset { name: PresetName::Custom, events: Vec::new() },
    };
    if !args.events.is_empty() {
        let mut events = preset.events.clone();
        for raw in &args.events {
            let e = parse_event(raw)?;
            events.retain(|x| x.label != e.label);
            events.push(e);
        }
        events.sort_by_key(|e| e.label);
        preset = GeometryPreset::custom(events).map_err(usage)?;
    }
    let mut boosts = args.boost;
    if boosts.is_empty() {
        if let Some(s) = file.0.get("boost") {
            boosts = s
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| usage(format!("config `boost`: {e}"))))
                .collect::<Result<_, _>>()?;
        }
    }
    if let Some(v) = boosts.iter().find(|v| v.is_nan() || v.abs() >= 1.0) {
        return Err(usage(geometry::GeometryError::Superluminal(*v)));
    }

    let mut text = String::new();
    text.push_str(&format!("preset: {}\n", preset.name));
    text.push_str("events:\n");
    for e in &preset.events {
        text.push_str(&format!("  {:<3} t={:<8} x={}\n", e.label.token(), e.t, e.x));
    }
    text.push_str("relations (second relative to first):\n");
    for (l1, l2, rel) in preset.pair_relations() {
        text.push_str(&format!("  {:<3} {:<3} {}\n", l1.token(), l2.token(), rel));
    }
    match geometry::classify_geometry(&preset) {
        Ok(class) => text.push_str(&format!("classification: {class}\n")),
        Err(e) => text.push_str(&format!("classification: unavailable ({e})\n")),
    }
    text.push_str("time order:\n");
    for v in std::iter::once(0.0).chain(boosts) {
        let order = geometry::boosted_time_order(&preset, v).map_err(usage)?;
        let labels: Vec<&str> = order.iter().map(|l| l.token()).collect();
        text.push_str(&format!("  v={v:<6} {}\n", labels.join(" < ")));
    }
    stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn cmd_teleport(args: TeleportArgs, file: &ConfigFile, stdout: &mut dyn Write) -> Result<(), CliError> {
    let controlled = layer(args.controlled, file, "controlled", true)?;
    let n = layer(args.trials, file, "trials", 100_000)?;
    let seed = resolve_seed(args.seed, file)?;
    let out = args.out.or(file.get("out")?);
    let report = analysis::teleport_channel_demo(controlled, n, seed).map_err(usage)?;
    let doc = json!({
        "meta": { "command": "teleport", "controlled": controlled, "trials": n, "seed": seed },
        "teleport": report,
    });
    emit_report(&doc, out.as_deref(), stdout)
}

/// Runs a parsed command.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a, &file, stdout),
        Command::Toy(a) => cmd_toy(a, &file, stdout),
        Command::Rps(a) => cmd_rps(a, &file, stdout),
        Command::Geometry(a) => cmd_geometry(a, &file, stdout),
        Command::Teleport(a) => cmd_teleport(a, &file, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let CliError::Usage(_) = e {
                let _ = writeln!(stderr, "run `swapsim --help` for usage");
            }
            e.exit_code()
        }
    }
}
