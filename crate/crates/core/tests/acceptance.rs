//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::SQRT_2;
use std::fs;
use std::time::{Duration, Instant};

use swapsim::analysis::{self, Hypothesis, NdaVerdict, Verdict};
use swapsim::engine::{self, AngleMap, ExperimentConfig};
use swapsim::geometry::PresetName;
use swapsim::qcore::{self, BellOutcome, BsmMode, Spin, StateVector};
use swapsim::toys::{self, AcceptanceRule, RpsVerdict, ToyVariant};

const PRESETS: [PresetName; 3] = [PresetName::EarlyDelft, PresetName::DelayedDelft, PresetName::SpacelikeDelft];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok { Ok(detail) } else { Err(detail) }
}

fn preset_config(geometry: PresetName) -> ExperimentConfig {
    ExperimentConfig { geometry, ..ExperimentConfig::default() }
}

fn within_time(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn tsirelson_exact() -> Check {
    let start = Instant::now();
    let s = analysis::exact_chsh(&ExperimentConfig::default()).map_err(|e| e.to_string())?.s;
    let elapsed = start.elapsed();
    let target = 2.0 * SQRT_2;
    ensure(
        (s - target).abs() < 1e-9 && within_time(elapsed, Duration::from_secs(1)),
        format!("S = {s:.15}, |S - 2√2| = {:.2e}, {elapsed:?}", (s - target).abs()),
    )
}

fn swap_fidelity() -> Check {
    let state = qcore::make_two_singlets();
    // Cumulative order is phi+, phi-, psi+, psi-, each 1/4: 0.875 lands on psi-.
    let (outcome, post) = qcore::bell_state_measurement(&state, 1, 2, 0.875, BsmMode::Full).map_err(|e| e.to_string())?;
    let f = post.reduced_fidelity(&[0, 3], &StateVector::singlet()).ok_or("fidelity undefined")?;
    ensure(
        outcome == BellOutcome::PsiMinus && (f - 1.0).abs() < 1e-12,
        format!("outcome {outcome}, F(1,4 ; psi-) = {f:.15}"),
    )
}

fn timing_insensitivity() -> Check {
    let start = Instant::now();
    let tables: Vec<_> = PRESETS
        .iter()
        .map(|&g| engine::exact_experiment_distribution(&preset_config(g)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let diff = tables[1..].iter().map(|t| tables[0].max_abs_diff(t)).fold(0.0, f64::max);
    ensure(
        diff < 1e-12 && within_time(elapsed, Duration::from_secs(1)),
        format!("max entrywise diff {diff:.2e} across ED/DD/Spacelike, {elapsed:?}"),
    )
}

fn nda_surrogate() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for g in PRESETS {
        let r = analysis::no_difference_check(&preset_config(g)).map_err(|e| e.to_string())?;
        ok &= r.verdict == NdaVerdict::NoDifference && r.max_abs_diff < 1e-12;
        parts.push(format!("{}: {:?} ({:.1e})", g.token(), r.verdict, r.max_abs_diff));
    }
    ensure(ok, parts.join(", "))
}

fn monte_carlo_consistency() -> Check {
    let start = Instant::now();
    let config = ExperimentConfig { n_trials: 100_000, seed: 1, ..ExperimentConfig::default() };
    let ensemble = engine::run_trials(&config).map_err(|e| e.to_string())?;
    let (frac, _) = analysis::heralded_fraction(&ensemble.records);
    let n = ensemble.len() as f64;
    let sigma = (0.25 * 0.75 / n).sqrt();
    let ec = engine::post_select(&ensemble, &config.herald);
    let chsh = analysis::chsh(&analysis::correlators(&ec.records)).map_err(|e| e.to_string())?;
    let ns_a = analysis::run_hypothesis(&ensemble.records, Hypothesis::NoSignalingA, false).map_err(|e| e.to_string())?;
    let ns_b = analysis::run_hypothesis(&ensemble.records, Hypothesis::NoSignalingB, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ok = (frac - 0.25).abs() < 5.0 * sigma
        && (chsh.s - 2.828).abs() < 5.0 * chsh.stderr
        && ns_a.verdict == Verdict::Holds
        && ns_b.verdict == Verdict::Holds
        && within_time(elapsed, Duration::from_secs(30));
    ensure(
        ok,
        format!(
            "herald {frac:.4} (5σ = {:.4}), S = {:.4} ± {:.4}, no-signaling A {:?} B {:?}, {elapsed:?}",
            5.0 * sigma,
            chsh.s,
            chsh.stderr,
            ns_a.verdict,
            ns_b.verdict
        ),
    )
}

fn toy_collider() -> Check {
    let rule = AcceptanceRule::bell(&AngleMap::default());
    let big = toys::run_toy(ToyVariant::Collider, 1_000_000, 11, &rule).map_err(|e| e.to_string())?;
    let s = analysis::chsh(&analysis::correlators(&toys::accepted(&big))).map_err(|e| e.to_string())?.s;

    let trials = toys::run_toy(ToyVariant::Collider, 100_000, 12, &rule).map_err(|e| e.to_string())?;
    let acc = toys::accepted(&trials);
    let mut ok = (s - 2.8284).abs() < 0.05;
    let mut parts = vec![format!("S_acc = {s:.4}")];
    for h in [Hypothesis::LocalCausalityA, Hypothesis::LocalCausalityB] {
        let ps = analysis::run_hypothesis(&acc, h, true).map_err(|e| e.to_string())?;
        let full = analysis::run_hypothesis(&trials, h, false).map_err(|e| e.to_string())?;
        ok &= ps.verdict == Verdict::Violated && full.verdict == Verdict::Holds;
        parts.push(format!("{} {:?}, {} {:?}", ps.hypothesis, ps.verdict, full.hypothesis, full.verdict));
    }
    let n = trials.len() as f64;
    let sigma = (0.25 / n).sqrt();
    for (name, pick) in [("A", true), ("B", false)] {
        let up = trials
            .iter()
            .filter(|t| (if pick { t.outcome_a } else { t.outcome_b }) == Spin::Up)
            .count() as f64
            / n;
        ok &= (up - 0.5).abs() < 5.0 * sigma;
        parts.push(format!("P({name}=+1) = {up:.4}"));
    }
    ensure(ok, parts.join(", "))
}

fn toy_source_variant() -> Check {
    let rule = AcceptanceRule::bell(&AngleMap::default());
    let trials = toys::run_toy(ToyVariant::Source, 100_000, 13, &rule).map_err(|e| e.to_string())?;
    let acc = toys::accepted(&trials);
    let ps = analysis::run_hypothesis(&acc, Hypothesis::StatisticalIndependence, true).map_err(|e| e.to_string())?;
    let full = analysis::run_hypothesis(&trials, Hypothesis::StatisticalIndependence, false).map_err(|e| e.to_string())?;
    ensure(
        ps.verdict == Verdict::Violated && full.verdict == Verdict::Holds,
        format!(
            "{} {:?} (G = {:.1}), {} {:?} (G = {:.1}, threshold {:.1})",
            ps.hypothesis, ps.verdict, ps.divergence, full.hypothesis, full.verdict, full.divergence, full.threshold
        ),
    )
}

fn fragility_closed_form() -> Check {
    let config = ExperimentConfig::default();
    let report = analysis::fragility(&config).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for a in 0..2u8 {
        for b in 0..2u8 {
            for oa in [Spin::Up, Spin::Down] {
                for ob in [Spin::Up, Spin::Down] {
                    let oracle = (1.0
                        - f64::from(oa.sign() * ob.sign())
                            * (config.angles.angle_a(a) - config.angles.angle_b(b)).cos())
                        / 4.0;
                    let got = report.p_herald(a, b, oa, ob).ok_or("missing cell")?;
                    worst = worst.max((got - oracle).abs());
                    cells += 1;
                }
            }
        }
    }
    ensure(
        cells == 16 && worst < 1e-12 && report.max_spread > 0.0,
        format!("{cells} cells, max |P - closed form| = {worst:.2e}, max_spread = {:.6}", report.max_spread),
    )
}

fn teleport_dichotomy() -> Check {
    let controlled = analysis::teleport_channel_demo(true, 100_000, 21).map_err(|e| e.to_string())?;
    let uncontrolled = analysis::teleport_channel_demo(false, 100_000, 22).map_err(|e| e.to_string())?;
    ensure(
        controlled.mutual_information_bits > 0.9 && uncontrolled.mutual_information_bits < 0.05,
        format!(
            "controlled I = {:.4} bits, uncontrolled I = {:.2e} bits",
            controlled.mutual_information_bits, uncontrolled.mutual_information_bits
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["swapsim"];
    argv.extend_from_slice(args);
    match swapsim::cli::run(argv, &mut out, &mut err) {
        0 => Ok(()),
        code => Err(format!("exit {code}: {}", String::from_utf8_lossy(&err))),
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (cmd, suffixes) in [
        ("simulate", &[".csv", ".json", ".report.json"][..]),
        ("toy", &[".csv", ".report.json"][..]),
        ("rps", &[".csv", ".report.json"][..]),
        ("teleport", &[".report.json"][..]),
    ] {
        let mut runs = Vec::new();
        for run in 0..2 {
            let prefix = dir.path().join(format!("{cmd}-{run}"));
            let prefix = prefix.to_str().ok_or("non-utf8 temp path")?;
            run_cli(&[cmd, "--trials", "20000", "--seed", "99", "--out", prefix])?;
            runs.push(prefix.to_string());
        }
        for s in suffixes {
            let a = fs::read(format!("{}{s}", runs[0])).map_err(|e| e.to_string())?;
            let b = fs::read(format!("{}{s}", runs[1])).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{cmd}{s} differs between runs"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} artifacts byte-identical across repeated runs"))
}

fn rps_selection() -> Check {
    let trials = toys::run_rps(10_000, 31).map_err(|e| e.to_string())?;
    let full = analysis::run_hypothesis(&trials, Hypothesis::ChoiceIndependence, false).map_err(|e| e.to_string())?;
    let mut ok = full.verdict == Verdict::Holds;
    let mut parts = vec![format!("unconditional {:?}", full.verdict)];
    for v in RpsVerdict::ALL {
        let sel: Vec<_> = trials.iter().filter(|t| t.verdict == v).copied().collect();
        let r = analysis::run_hypothesis(&sel, Hypothesis::ChoiceIndependence, true).map_err(|e| e.to_string())?;
        ok &= r.verdict == Verdict::Violated;
        parts.push(format!("| {} {:?}", v.token(), r.verdict));
    }
    ensure(ok, parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Tsirelson attainment (exact)", tsirelson_exact),
        ("entanglement swapping fidelity", swap_fidelity),
        ("timing insensitivity", timing_insensitivity),
        ("no-difference surrogate", nda_surrogate),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("toy collider", toy_collider),
        ("toy source variant", toy_source_variant),
        ("fragility closed form", fragility_closed_form),
        ("teleport channel dichotomy", teleport_dichotomy),
        ("determinism", determinism),
        ("rock-paper-scissors selection", rps_selection),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
