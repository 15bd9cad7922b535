//! Diagnostics: CHSH statistics, likelihood-ratio conditional-independence
//! tests, the C-present/C-absent comparison, herald fragility, and the
//! controlled-teleportation channel.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::engine::{self, EngineError, ExperimentConfig, HeraldPredicate, TrialRecord, WingKey};
use crate::qcore::{self, BellOutcome, BsmMode, QcoreError, Spin, SpinMeasurement, StateVector};
use crate::rng::trial_rng;
use crate::toys::{RpsTrial, ToyTrial};

/// Significance level of the independence tests.
pub const SIGNIFICANCE: f64 = 1e-3;

/// Minimum count per (given, versus) cell before a test is trusted.
pub const MIN_CELL_COUNT: u64 = 50;

pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("correlator cell (a={0}, b={1}) has no samples")]
    MissingCell(u8, u8),
    #[error("record lacks variable {0}")]
    MissingVariable(Variable),
    #[error("fragility needs the C measurement enabled")]
    CDisabled,
    #[error("n must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Quantum(#[from] QcoreError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// Settings and ±1 outcomes of one Bell-type trial.
pub trait BellData {
    fn settings_outcomes(&self) -> (u8, u8, Spin, Spin);
}

impl BellData for TrialRecord {
    fn settings_outcomes(&self) -> (u8, u8, Spin, Spin) {
        (self.a, self.b, self.outcome_a, self.outcome_b)
    }
}

impl BellData for ToyTrial {
    fn settings_outcomes(&self) -> (u8, u8, Spin, Spin) {
        (self.a, self.b, self.outcome_a, self.outcome_b)
    }
}

/// Per-setting-pair correlators E(a, b) = ⟨A·B⟩.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorTable {
    /// `None` for a cell without samples.
    #[serde(rename = "E")]
    pub e: [[Option<f64>; 2]; 2],
    pub counts: [[u64; 2]; 2],
    /// Values are exact probabilities rather than sample means.
    pub exact: bool,
}

impl CorrelatorTable {
    pub fn get(&self, a: u8, b: u8) -> Option<f64> {
        self.e[a as usize][b as usize]
    }

    /// Correlators of a distribution P(a, b, A, B) (any normalization).
    pub fn from_distribution(dist: &BTreeMap<WingKey, f64>) -> Self {
        let mut num = [[0.0; 2]; 2];
        let mut den = [[0.0; 2]; 2];
        for (&(a, b, oa, ob), &p) in dist {
            num[a as usize][b as usize] += f64::from(oa.sign() * ob.sign()) * p;
            den[a as usize][b as usize] += p;
        }
        let mut e = [[None; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                if den[a][b] > 0.0 {
                    e[a][b] = Some(num[a][b] / den[a][b]);
                }
            }
        }
        Self { e, counts: [[0; 2]; 2], exact: true }
    }
}

pub fn correlators<T: BellData>(records: &[T]) -> CorrelatorTable {
    let mut sums = [[0i64; 2]; 2];
    let mut counts = [[0u64; 2]; 2];
    for r in records {
        let (a, b, oa, ob) = r.settings_outcomes();
        sums[a as usize][b as usize] += i64::from(oa.sign() * ob.sign());
        counts[a as usize][b as usize] += 1;
    }
    let mut e = [[None; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            if counts[a][b] > 0 {
                e[a][b] = Some(sums[a][b] as f64 / counts[a][b] as f64);
            }
        }
    }
    CorrelatorTable { e, counts, exact: false }
}

/// CHSH sign pattern: one correlator enters with the opposite sign to the
/// other three, and `negate` flips the whole sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChshCombination {
    pub minus: (u8, u8),
    pub negate: bool,
}

impl Default for ChshCombination {
    /// `-+--`: S = −E(0,0) + E(0,1) − E(1,0) − E(1,1), which equals +2√2 for
    /// the singlet at the default angles.
    fn default() -> Self {
        Self { minus: (0, 1), negate: true }
    }
}

impl ChshCombination {
    /// All eight CHSH sign patterns.
    pub fn all() -> impl Iterator<Item = ChshCombination> {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .flat_map(|minus| [false, true].into_iter().map(move |negate| ChshCombination { minus, negate }))
    }

    fn sign(&self, a: u8, b: u8) -> f64 {
        let s = if (a, b) == self.minus { -1.0 } else { 1.0 };
        if self.negate {
            -s
        } else {
            s
        }
    }

    /// Signs of E(0,0), E(0,1), E(1,0), E(1,1), e.g. `+++-`.
    pub fn pattern(&self) -> String {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| if self.sign(a, b) < 0.0 { '-' } else { '+' })
            .collect()
    }
}

impl fmt::Display for ChshCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern())
    }
}

impl Serialize for ChshCombination {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.pattern())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshResult {
    #[serde(rename = "S")]
    pub s: f64,
    pub stderr: f64,
    pub combination: ChshCombination,
}

impl ChshResult {
    /// |S| exceeds 2√2 by more than five standard errors.
    pub fn exceeds_tsirelson(&self) -> bool {
        self.s.abs() > TSIRELSON + 5.0 * self.stderr + 1e-12
    }
}

pub fn chsh(t: &CorrelatorTable) -> Result<ChshResult> {
    chsh_with(t, ChshCombination::default())
}

/// S = Σ ±E(a, b). The standard error treats the four cell means as
/// independent, each with variance (1 − E²)/n.
pub fn chsh_with(t: &CorrelatorTable, combination: ChshCombination) -> Result<ChshResult> {
    let mut s = 0.0;
    let mut var = 0.0;
    for a in 0..2u8 {
        for b in 0..2u8 {
            let e = t.get(a, b).ok_or(AnalysisError::MissingCell(a, b))?;
            s += combination.sign(a, b) * e;
            if !t.exact {
                var += (1.0 - e * e) / t.counts[a as usize][b as usize] as f64;
            }
        }
    }
    Ok(ChshResult { s, stderr: var.sqrt(), combination })
}

/// Exact CHSH of the heralded subensemble.
pub fn exact_chsh(config: &ExperimentConfig) -> Result<ChshResult> {
    let table = engine::exact_experiment_distribution(config)?;
    let cond = table.conditional_on(&config.herald).unwrap_or_default();
    chsh(&CorrelatorTable::from_distribution(&cond))
}

/// Discrete variables a record may expose to the independence tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Variable {
    SettingA,
    SettingB,
    OutcomeA,
    OutcomeB,
    /// Source-generated outcome pair, four values.
    Lambda,
    Alice,
    Bob,
    Verdict,
}

impl Variable {
    pub fn domain_size(self) -> u8 {
        match self {
            Variable::SettingA | Variable::SettingB | Variable::OutcomeA | Variable::OutcomeB => 2,
            Variable::Lambda => 4,
            Variable::Alice | Variable::Bob | Variable::Verdict => 3,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variable::SettingA => "a",
            Variable::SettingB => "b",
            Variable::OutcomeA => "A",
            Variable::OutcomeB => "B",
            Variable::Lambda => "lambda",
            Variable::Alice => "alice",
            Variable::Bob => "bob",
            Variable::Verdict => "verdict",
        };
        f.write_str(s)
    }
}

/// A record whose variables can be read as small integers.
pub trait Observation {
    fn value(&self, v: Variable) -> Option<u8>;
}

impl Observation for TrialRecord {
    fn value(&self, v: Variable) -> Option<u8> {
        match v {
            Variable::SettingA => Some(self.a),
            Variable::SettingB => Some(self.b),
            Variable::OutcomeA => Some(self.outcome_a.index() as u8),
            Variable::OutcomeB => Some(self.outcome_b.index() as u8),
            _ => None,
        }
    }
}

impl Observation for ToyTrial {
    fn value(&self, v: Variable) -> Option<u8> {
        match v {
            Variable::SettingA => Some(self.a),
            Variable::SettingB => Some(self.b),
            Variable::OutcomeA => Some(self.outcome_a.index() as u8),
            Variable::OutcomeB => Some(self.outcome_b.index() as u8),
            Variable::Lambda => self.lambda.map(|(x, y)| (x.index() * 2 + y.index()) as u8),
            _ => None,
        }
    }
}

impl Observation for RpsTrial {
    fn value(&self, v: Variable) -> Option<u8> {
        match v {
            Variable::Alice => Some(self.alice.index()),
            Variable::Bob => Some(self.bob.index()),
            Variable::Verdict => Some(self.verdict as u8),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiTestResult {
    pub hypothesis: String,
    /// G statistic, 2·n·KL(empirical ‖ independent fit).
    pub divergence: f64,
    /// Chi-squared critical value at `SIGNIFICANCE` for `df`.
    pub threshold: f64,
    pub df: u64,
    pub samples: u64,
    pub verdict: Verdict,
}

fn key_of<T: Observation>(r: &T, vars: &[Variable]) -> Result<Vec<u8>> {
    vars.iter().map(|&v| r.value(v).ok_or(AnalysisError::MissingVariable(v))).collect()
}

fn all_keys(vars: &[Variable]) -> Vec<Vec<u8>> {
    vars.iter().fold(vec![Vec::new()], |acc, v| {
        acc.into_iter()
            .flat_map(|k| {
                (0..v.domain_size()).map(move |x| {
                    let mut k = k.clone();
                    k.push(x);
                    k
                })
            })
            .collect()
    })
}

/// Counts keyed by versus values, then target value.
type Contingency = BTreeMap<Vec<u8>, BTreeMap<u8, u64>>;

/// G-test of `target ⟂ versus | given`. Returns `Inconclusive` when any
/// combination of `given` and `versus` values has fewer than
/// `MIN_CELL_COUNT` records.
pub fn test_conditional_independence<T: Observation>(
    records: &[T],
    hypothesis: &str,
    target: Variable,
    given: &[Variable],
    versus: &[Variable],
) -> Result<CiTestResult> {
    // strata[given][versus][target]
    let mut strata: BTreeMap<Vec<u8>, Contingency> = BTreeMap::new();
    for r in records {
        let g = key_of(r, given)?;
        let v = key_of(r, versus)?;
        let t = r.value(target).ok_or(AnalysisError::MissingVariable(target))?;
        *strata.entry(g).or_default().entry(v).or_default().entry(t).or_insert(0) += 1;
    }
    let sparse = all_keys(given).iter().any(|g| {
        all_keys(versus).iter().any(|v| {
            let n: u64 = strata.get(g).and_then(|s| s.get(v)).map_or(0, |t| t.values().sum());
            n < MIN_CELL_COUNT
        })
    });

    let mut g_stat = 0.0;
    let mut df = 0u64;
    for table in strata.values() {
        let n: f64 = table.values().flat_map(|t| t.values()).sum::<u64>() as f64;
        let mut target_totals: BTreeMap<u8, u64> = BTreeMap::new();
        for t in table.values() {
            for (&k, &c) in t {
                *target_totals.entry(k).or_insert(0) += c;
            }
        }
        for row in table.values() {
            let row_total: u64 = row.values().sum();
            for (k, &observed) in row {
                if observed == 0 {
                    continue;
                }
                let expected = row_total as f64 * target_totals[k] as f64 / n;
                g_stat += 2.0 * observed as f64 * (observed as f64 / expected).ln();
            }
        }
        let rows = table.values().filter(|t| t.values().sum::<u64>() > 0).count() as u64;
        let cols = target_totals.values().filter(|&&c| c > 0).count() as u64;
        df += rows.saturating_sub(1) * cols.saturating_sub(1);
    }
    let g_stat = g_stat.max(0.0);
    let threshold = if df == 0 {
        0.0
    } else {
        ChiSquared::new(df as f64).expect("positive df").inverse_cdf(1.0 - SIGNIFICANCE)
    };
    let verdict = if sparse {
        Verdict::Inconclusive
    } else if df > 0 && g_stat > threshold {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    Ok(CiTestResult {
        hypothesis: hypothesis.to_string(),
        divergence: g_stat,
        threshold,
        df,
        samples: records.len() as u64,
        verdict,
    })
}

/// Named independence hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// P(A | a, b, B) = P(A | a).
    LocalCausalityA,
    /// P(B | a, b, A) = P(B | b).
    LocalCausalityB,
    /// P(λ | a, b) = P(λ).
    StatisticalIndependence,
    /// P(A | a, b) = P(A | a).
    NoSignalingA,
    /// P(B | a, b) = P(B | b).
    NoSignalingB,
    /// P(bob | alice) = P(bob).
    ChoiceIndependence,
}

impl Hypothesis {
    /// `(target, given, versus)`.
    pub fn variables(self) -> (Variable, &'static [Variable], &'static [Variable]) {
        use Variable::*;
        match self {
            Hypothesis::LocalCausalityA => (OutcomeA, &[SettingA], &[SettingB, OutcomeB]),
            Hypothesis::LocalCausalityB => (OutcomeB, &[SettingB], &[SettingA, OutcomeA]),
            Hypothesis::StatisticalIndependence => (Lambda, &[], &[SettingA, SettingB]),
            Hypothesis::NoSignalingA => (OutcomeA, &[SettingA], &[SettingB]),
            Hypothesis::NoSignalingB => (OutcomeB, &[SettingB], &[SettingA]),
            Hypothesis::ChoiceIndependence => (Bob, &[], &[Alice]),
        }
    }

    /// Label; `post_selected` marks tests run on a selected subensemble.
    pub fn label(self, post_selected: bool) -> String {
        let ps = if post_selected { "_ps" } else { "" };
        match self {
            Hypothesis::LocalCausalityA => format!("LC{ps}-A"),
            Hypothesis::LocalCausalityB => format!("LC{ps}-B"),
            Hypothesis::StatisticalIndependence => format!("SI{ps}"),
            Hypothesis::NoSignalingA => format!("no-signaling{ps}-A"),
            Hypothesis::NoSignalingB => format!("no-signaling{ps}-B"),
            Hypothesis::ChoiceIndependence => format!("choice-independence{ps}"),
        }
    }
}

pub fn run_hypothesis<T: Observation>(records: &[T], h: Hypothesis, post_selected: bool) -> Result<CiTestResult> {
    let (target, given, versus) = h.variables();
    test_conditional_independence(records, &h.label(post_selected), target, given, versus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NdaVerdict {
    NoDifference,
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NdaReport {
    pub max_abs_diff: f64,
    pub verdict: NdaVerdict,
}

fn max_diff(x: &BTreeMap<WingKey, f64>, y: &BTreeMap<WingKey, f64>) -> f64 {
    x.keys()
        .chain(y.keys())
        .map(|k| (x.get(k).copied().unwrap_or(0.0) - y.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Compares exact P(a, b, A, B) with C performed (summed over its outcome)
/// against the same table with C absent.
pub fn no_difference_check(config: &ExperimentConfig) -> Result<NdaReport> {
    let with_c = ExperimentConfig { c_enabled: true, ..config.clone() };
    let without_c = ExperimentConfig { c_enabled: false, ..config.clone() };
    let on = engine::exact_experiment_distribution(&with_c)?.wing_marginal();
    let off = engine::exact_experiment_distribution(&without_c)?.wing_marginal();
    let max_abs_diff = max_diff(&on, &off);
    let verdict = if max_abs_diff < qcore::EXACT_TOL { NdaVerdict::NoDifference } else { NdaVerdict::Difference };
    Ok(NdaReport { max_abs_diff, verdict })
}

/// Largest change in P(a, b, A, B) caused by conditioning on the herald.
/// `None` if the herald never fires.
pub fn post_selection_shift(config: &ExperimentConfig) -> Result<Option<f64>> {
    let with_c = ExperimentConfig { c_enabled: true, ..config.clone() };
    let table = engine::exact_experiment_distribution(&with_c)?;
    Ok(table.conditional_on(&config.herald).map(|cond| max_diff(&cond, &table.wing_marginal())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FragilityCell {
    pub a: u8,
    pub b: u8,
    #[serde(rename = "A")]
    pub outcome_a: i8,
    #[serde(rename = "B")]
    pub outcome_b: i8,
    /// P(herald | a, b, A, B); `None` for a zero-probability cell.
    pub p_herald: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragilityReport {
    pub cells: Vec<FragilityCell>,
    pub max_spread: f64,
}

impl FragilityReport {
    pub fn p_herald(&self, a: u8, b: u8, oa: Spin, ob: Spin) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| (c.a, c.b, c.outcome_a, c.outcome_b) == (a, b, oa.sign(), ob.sign()))
            .and_then(|c| c.p_herald)
    }
}

/// How strongly membership in the heralded subensemble depends on a setting
/// once both outcomes are fixed.
pub fn fragility(config: &ExperimentConfig) -> Result<FragilityReport> {
    if !config.c_enabled {
        return Err(AnalysisError::CDisabled);
    }
    let table = engine::exact_experiment_distribution(config)?;
    let mut joint: BTreeMap<WingKey, f64> = BTreeMap::new();
    let mut heralded: BTreeMap<WingKey, f64> = BTreeMap::new();
    for (cell, p) in &table.cells {
        let key = (cell.a, cell.b, cell.outcome_a, cell.outcome_b);
        *joint.entry(key).or_insert(0.0) += p;
        if cell.c.is_some_and(|o| config.herald.accepts(o)) {
            *heralded.entry(key).or_insert(0.0) += p;
        }
    }
    let cond = |key: WingKey| -> Option<f64> {
        let p = joint.get(&key).copied().unwrap_or(0.0);
        (p > 0.0).then(|| heralded.get(&key).copied().unwrap_or(0.0) / p)
    };
    let mut cells = Vec::with_capacity(16);
    for a in 0..2u8 {
        for b in 0..2u8 {
            for oa in Spin::ALL {
                for ob in Spin::ALL {
                    cells.push(FragilityCell {
                        a,
                        b,
                        outcome_a: oa.sign(),
                        outcome_b: ob.sign(),
                        p_herald: cond((a, b, oa, ob)),
                    });
                }
            }
        }
    }
    let mut max_spread = 0.0f64;
    for x in 0..2u8 {
        for oa in Spin::ALL {
            for ob in Spin::ALL {
                // Flip a with b = x held fixed, then flip b with a = x held fixed.
                let pairs = [((0, x), (1, x)), ((x, 0), (x, 1))];
                for ((a0, b0), (a1, b1)) in pairs {
                    if let (Some(p), Some(q)) = (cond((a0, b0, oa, ob)), cond((a1, b1, oa, ob))) {
                        max_spread = max_spread.max((p - q).abs());
                    }
                }
            }
        }
    }
    Ok(FragilityReport { cells, max_spread })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportReport {
    pub controlled: bool,
    pub n: u64,
    /// Trials kept after the optional post-selection.
    pub kept: u64,
    /// counts[input][output].
    pub counts: [[u64; 2]; 2],
    pub p_match: f64,
    /// Also serves as the channel-capacity proxy.
    pub mutual_information_bits: f64,
}

/// Mutual information of a 2×2 count table, with 0.5 added to every cell.
pub fn mutual_information_bits(counts: &[[u64; 2]; 2]) -> f64 {
    let smoothed: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|&c| c as f64 + 0.5).collect()).collect();
    let total: f64 = smoothed.iter().flatten().sum();
    let row: Vec<f64> = smoothed.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let col: Vec<f64> = (0..2).map(|j| smoothed.iter().map(|r| r[j]).sum::<f64>() / total).collect();
    let mut mi = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let p = smoothed[i][j] / total;
            mi += p * (p / (row[i] * col[j])).log2();
        }
    }
    mi.max(0.0)
}

/// Sends a bit through an uncorrected teleportation: input |bit⟩ on qubit 0,
/// singlet on (1, 2), Bell measurement on (0, 1), Z readout of qubit 2.
/// With `controlled`, only trials whose Bell outcome is ψ− are kept.
pub fn teleport_channel_demo(controlled: bool, n: u64, seed: u64) -> Result<TeleportReport> {
    if n == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let resource = StateVector::singlet();
    let trials = (0..n)
        .into_par_iter()
        .map(|id| -> Result<Option<(u8, u8)>> {
            let mut rng = trial_rng(seed, id);
            let input: u8 = rng.random_range(0..2);
            let state = StateVector::basis(1, input as usize)?.tensor(&resource)?;
            let (bell, state) = qcore::bell_state_measurement(&state, 0, 1, rng.random(), BsmMode::Full)?;
            let readout_draw: f64 = rng.random();
            if controlled && bell != BellOutcome::PsiMinus {
                return Ok(None);
            }
            let (spin, _) = qcore::measure_spin(&state, SpinMeasurement::new(2, 0.0), readout_draw)?;
            Ok(Some((input, spin.index() as u8)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = [[0u64; 2]; 2];
    for (i, o) in trials.into_iter().flatten() {
        counts[i as usize][o as usize] += 1;
    }
    let kept: u64 = counts.iter().flatten().sum();
    let p_match = if kept == 0 { f64::NAN } else { (counts[0][0] + counts[1][1]) as f64 / kept as f64 };
    Ok(TeleportReport {
        controlled,
        n,
        kept,
        counts,
        p_match,
        mutual_information_bits: mutual_information_bits(&counts),
    })
}

/// Heralded fraction with its binomial standard error.
pub fn heralded_fraction(records: &[TrialRecord]) -> (f64, f64) {
    let n = records.len() as f64;
    let p = records.iter().filter(|r| r.heralded).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Fraction of records with the given herald predicate; convenience for
/// tests comparing against an exact probability.
pub fn herald_rate(records: &[TrialRecord], herald: &HeraldPredicate) -> f64 {
    records.iter().filter(|r| r.c_outcome.is_some_and(|o| herald.accepts(o))).count() as f64 / records.len() as f64
}
