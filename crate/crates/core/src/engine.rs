//! Trial engine for the two-singlet swapping experiment.
//!
//! Qubits (0,1) form the left singlet and (2,3) the right one. A measures
//! qubit 0, B measures qubit 3 and C performs the Bell measurement on (1,2).
//! The three measurements run in the order the geometry preset assigns them
//! in its rest frame.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{self, EventLabel, GeometryError, GeometryPreset, PresetName};
use crate::qcore::{
    self, bell_state_measurement, make_two_singlets, measure_spin, BellOutcome, BsmMode, MeasurementPlan,
    Outcome, QcoreError, Spin, SpinMeasurement,
};
use crate::rng::trial_rng;

pub const QUBIT_A: usize = 0;
pub const QUBIT_B: usize = 3;
pub const BSM_QUBITS: (usize, usize) = (1, 2);

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("n_trials must be at least 1")]
    NoTrials,
    #[error("geometry `{0}` cannot drive a run; use early, delayed or spacelike")]
    InvalidGeometry(String),
    #[error("angles must be finite")]
    BadAngle,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantum(#[from] QcoreError),
    #[error("malformed ensemble file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// Map from binary setting to analyzer angle, one pair per wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleMap {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Default for AngleMap {
    /// CHSH-optimal angles for the singlet.
    fn default() -> Self {
        Self { a: [0.0, FRAC_PI_2], b: [FRAC_PI_4, 3.0 * FRAC_PI_4] }
    }
}

impl AngleMap {
    pub fn angle_a(&self, setting: u8) -> f64 {
        self.a[setting as usize]
    }

    pub fn angle_b(&self, setting: u8) -> f64 {
        self.b[setting as usize]
    }

    fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|x| x.is_finite())
    }
}

/// Set of Bell outcomes that count as an event-ready signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeraldPredicate(u8);

impl HeraldPredicate {
    pub fn only(outcome: BellOutcome) -> Self {
        Self(Self::bit(outcome))
    }

    pub fn from_outcomes(outcomes: impl IntoIterator<Item = BellOutcome>) -> Self {
        Self(outcomes.into_iter().fold(0, |m, o| m | Self::bit(o)))
    }

    /// Accepts every outcome, including `NoHerald`.
    pub fn any() -> Self {
        Self::from_outcomes(BellOutcome::ALL)
    }

    fn bit(o: BellOutcome) -> u8 {
        1 << (o as u8)
    }

    pub fn accepts(&self, o: BellOutcome) -> bool {
        self.0 & Self::bit(o) != 0
    }

    pub fn outcomes(&self) -> impl Iterator<Item = BellOutcome> + '_ {
        BellOutcome::ALL.into_iter().filter(|o| self.accepts(*o))
    }

    pub fn name(&self) -> String {
        if *self == Self::any() {
            return "any".to_string();
        }
        self.outcomes().map(BellOutcome::token).collect::<Vec<_>>().join(",")
    }
}

impl Default for HeraldPredicate {
    fn default() -> Self {
        Self::only(BellOutcome::PsiMinus)
    }
}

impl fmt::Display for HeraldPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for HeraldPredicate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("any") || s.eq_ignore_ascii_case("all") {
            return Ok(Self::any());
        }
        let outcomes = s.split(',').map(str::parse).collect::<std::result::Result<Vec<BellOutcome>, _>>()?;
        if outcomes.is_empty() {
            return Err("empty herald predicate".into());
        }
        Ok(Self::from_outcomes(outcomes))
    }
}

impl Serialize for HeraldPredicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for HeraldPredicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: PresetName,
    pub n_trials: u64,
    pub seed: u64,
    pub angles: AngleMap,
    pub herald: HeraldPredicate,
    pub c_enabled: bool,
    pub bsm_mode: BsmMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: PresetName::EarlyDelft,
            n_trials: 100_000,
            seed: 0,
            angles: AngleMap::default(),
            herald: HeraldPredicate::default(),
            c_enabled: true,
            bsm_mode: BsmMode::Full,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(EngineError::NoTrials);
        }
        if !self.angles.is_finite() {
            return Err(EngineError::BadAngle);
        }
        execution_order(self.geometry)?;
        Ok(())
    }

    pub fn meta(&self) -> EnsembleMeta {
        let mut meta = EnsembleMeta {
            seed: self.seed,
            geometry: self.geometry.token().to_string(),
            n_trials: self.n_trials,
            angles_a: self.angles.a,
            angles_b: self.angles.b,
            herald: self.herald,
            c_enabled: self.c_enabled,
            bsm: self.bsm_mode.token().to_string(),
            config_digest: String::new(),
        };
        meta.config_digest = digest(&meta);
        meta
    }
}

fn digest(meta: &EnsembleMeta) -> String {
    let canonical = serde_json::to_string(meta).expect("meta serializes");
    let hash = Sha256::digest(canonical.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Measurement stations in the order they are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Station {
    A,
    B,
    C,
}

/// Rest-frame time order of A, B and C for a built-in preset; simultaneous
/// events fall back to label order, so the spacelike preset runs A, B, C.
pub fn execution_order(name: PresetName) -> Result<[Station; 3]> {
    let preset = GeometryPreset::named(name).ok_or_else(|| EngineError::InvalidGeometry(name.to_string()))?;
    let order: Vec<Station> = geometry::boosted_time_order(&preset, 0.0)?
        .into_iter()
        .filter_map(|l| match l {
            EventLabel::A => Some(Station::A),
            EventLabel::B => Some(Station::B),
            EventLabel::C => Some(Station::C),
            _ => None,
        })
        .collect();
    Ok([order[0], order[1], order[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub a: u8,
    pub b: u8,
    pub outcome_a: Spin,
    pub outcome_b: Spin,
    /// `None` when C was disabled.
    pub c_outcome: Option<BellOutcome>,
    pub heralded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub seed: u64,
    pub geometry: String,
    pub n_trials: u64,
    pub angles_a: [f64; 2],
    pub angles_b: [f64; 2],
    pub herald: HeraldPredicate,
    pub c_enabled: bool,
    pub bsm: String,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub records: Vec<TrialRecord>,
    pub config_digest: String,
    pub seed: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn heralded_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return f64::NAN;
        }
        self.records.iter().filter(|r| r.heralded).count() as f64 / self.records.len() as f64
    }

    /// The event-ready subensemble under the run's own herald flag.
    pub fn heralded(&self) -> Ensemble {
        self.filtered(|r| r.heralded)
    }

    fn filtered(&self, keep: impl Fn(&TrialRecord) -> bool) -> Ensemble {
        Ensemble {
            records: self.records.iter().filter(|r| keep(r)).copied().collect(),
            config_digest: self.config_digest.clone(),
            seed: self.seed,
        }
    }
}

fn simulate_trial(cfg: &ExperimentConfig, order: &[Station; 3], trial_id: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, trial_id);
    let a: u8 = rng.random_range(0..2);
    let b: u8 = rng.random_range(0..2);
    let mut state = make_two_singlets();
    let (mut outcome_a, mut outcome_b, mut c_outcome) = (Spin::Up, Spin::Up, None);
    for station in order {
        // Every station consumes one draw, so streams line up across configs.
        let draw: f64 = rng.random();
        match station {
            Station::A => {
                let (o, s) = measure_spin(&state, SpinMeasurement::new(QUBIT_A, cfg.angles.angle_a(a)), draw)?;
                outcome_a = o;
                state = s;
            }
            Station::B => {
                let (o, s) = measure_spin(&state, SpinMeasurement::new(QUBIT_B, cfg.angles.angle_b(b)), draw)?;
                outcome_b = o;
                state = s;
            }
            Station::C if cfg.c_enabled => {
                let (o, s) = bell_state_measurement(&state, BSM_QUBITS.0, BSM_QUBITS.1, draw, cfg.bsm_mode)?;
                c_outcome = Some(o);
                state = s;
            }
            Station::C => {}
        }
    }
    let heralded = c_outcome.is_some_and(|o| cfg.herald.accepts(o));
    Ok(TrialRecord { trial_id, a, b, outcome_a, outcome_b, c_outcome, heralded })
}

/// Runs `n_trials` independent trials. Trials are generated in parallel;
/// the output is identical to a sequential run.
pub fn run_trials(config: &ExperimentConfig) -> Result<Ensemble> {
    config.validate()?;
    let order = execution_order(config.geometry)?;
    let records = (0..config.n_trials)
        .into_par_iter()
        .map(|id| simulate_trial(config, &order, id))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { records, config_digest: config.meta().config_digest, seed: config.seed })
}

/// Records whose C outcome satisfies `herald`, in original order and with
/// original trial ids. Records without a C outcome never match.
pub fn post_select(e: &Ensemble, herald: &HeraldPredicate) -> Ensemble {
    e.filtered(|r| r.c_outcome.is_some_and(|o| herald.accepts(o)))
}

/// One cell of the exact joint distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExperimentCell {
    pub a: u8,
    pub b: u8,
    pub outcome_a: Spin,
    pub outcome_b: Spin,
    pub c: Option<BellOutcome>,
}

/// Settings and wing outcomes, with C marginalized or conditioned away.
pub type WingKey = (u8, u8, Spin, Spin);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub cells: BTreeMap<ExperimentCell, f64>,
}

impl ExperimentTable {
    pub fn total(&self) -> f64 {
        self.cells.values().sum()
    }

    pub fn get(&self, cell: &ExperimentCell) -> f64 {
        self.cells.get(cell).copied().unwrap_or(0.0)
    }

    pub fn max_abs_diff(&self, other: &ExperimentTable) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.cells.keys().chain(other.cells.keys()).collect();
        keys.into_iter().map(|k| (self.get(k) - other.get(k)).abs()).fold(0.0, f64::max)
    }

    /// P(a, b, A, B) summed over C.
    pub fn wing_marginal(&self) -> BTreeMap<WingKey, f64> {
        let mut out = BTreeMap::new();
        for (c, p) in &self.cells {
            *out.entry((c.a, c.b, c.outcome_a, c.outcome_b)).or_insert(0.0) += p;
        }
        out
    }

    /// P(a, b, A, B | herald). `None` when the herald has zero probability.
    pub fn conditional_on(&self, herald: &HeraldPredicate) -> Option<BTreeMap<WingKey, f64>> {
        let mut out: BTreeMap<WingKey, f64> = self.wing_marginal().keys().map(|k| (*k, 0.0)).collect();
        let mut norm = 0.0;
        for (c, p) in &self.cells {
            if c.c.is_some_and(|o| herald.accepts(o)) {
                *out.get_mut(&(c.a, c.b, c.outcome_a, c.outcome_b)).expect("key from marginal") += p;
                norm += p;
            }
        }
        if norm <= 0.0 {
            return None;
        }
        out.values_mut().for_each(|v| *v /= norm);
        Some(out)
    }

    /// P(c | a, b) marginalized over the wing outcomes.
    pub fn c_given_settings(&self) -> BTreeMap<(u8, u8), BTreeMap<Option<BellOutcome>, f64>> {
        let mut joint: BTreeMap<(u8, u8), BTreeMap<Option<BellOutcome>, f64>> = BTreeMap::new();
        for (c, p) in &self.cells {
            *joint.entry((c.a, c.b)).or_default().entry(c.c).or_insert(0.0) += p;
        }
        for dist in joint.values_mut() {
            let total: f64 = dist.values().sum();
            dist.values_mut().for_each(|v| *v /= total);
        }
        joint
    }
}

fn to_map<T, E: fmt::Display>(r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| EngineError::Format(e.to_string()))
}

/// Exact P(a, b, A, B, c) with uniform settings, by enumerating every
/// measurement branch in the preset's execution order.
pub fn exact_experiment_distribution(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let order = execution_order(config.geometry)?;
    let mut cells = BTreeMap::new();
    for a in 0..2u8 {
        for b in 0..2u8 {
            let mut plan = MeasurementPlan::new(make_two_singlets());
            for station in order {
                plan = match station {
                    Station::A => plan.spin("A", QUBIT_A, config.angles.angle_a(a)),
                    Station::B => plan.spin("B", QUBIT_B, config.angles.angle_b(b)),
                    Station::C if config.c_enabled => plan.bell("C", BSM_QUBITS.0, BSM_QUBITS.1, config.bsm_mode),
                    Station::C => plan,
                };
            }
            let table = qcore::exact_branch_enumeration(&plan)?;
            let pos = |label: &str| table.labels().iter().position(|l| l == label);
            let (ia, ib, ic) = (pos("A").expect("A measured"), pos("B").expect("B measured"), pos("C"));
            for (key, p) in table.entries() {
                let spin = |i: usize| match key[i] {
                    Outcome::Spin(s) => s,
                    Outcome::Bell(_) => unreachable!("spin station"),
                };
                let c = ic.map(|i| match key[i] {
                    Outcome::Bell(o) => o,
                    Outcome::Spin(_) => unreachable!("Bell station"),
                });
                let cell = ExperimentCell { a, b, outcome_a: spin(ia), outcome_b: spin(ib), c };
                *cells.entry(cell).or_insert(0.0) += 0.25 * p;
            }
        }
    }
    Ok(ExperimentTable { cells })
}

/// Token written for a C outcome in ensemble files.
pub fn c_token(c: Option<BellOutcome>) -> &'static str {
    c.map_or("absent", BellOutcome::token)
}

pub fn parse_c_token(s: &str) -> std::result::Result<Option<BellOutcome>, String> {
    if s == "absent" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    trial_id: u64,
    a: u8,
    b: u8,
    #[serde(rename = "A")]
    outcome_a: i8,
    #[serde(rename = "B")]
    outcome_b: i8,
    c_outcome: String,
    heralded: bool,
}

impl From<&TrialRecord> for RecordRow {
    fn from(r: &TrialRecord) -> Self {
        RecordRow {
            trial_id: r.trial_id,
            a: r.a,
            b: r.b,
            outcome_a: r.outcome_a.sign(),
            outcome_b: r.outcome_b.sign(),
            c_outcome: c_token(r.c_outcome).to_string(),
            heralded: r.heralded,
        }
    }
}

impl TryFrom<RecordRow> for TrialRecord {
    type Error = EngineError;

    fn try_from(row: RecordRow) -> Result<Self> {
        let spin = |v: i8| Spin::from_sign(v.into()).ok_or_else(|| EngineError::Format(format!("outcome {v} is not ±1")));
        if row.a > 1 || row.b > 1 {
            return Err(EngineError::Format(format!("setting out of range in trial {}", row.trial_id)));
        }
        Ok(TrialRecord {
            trial_id: row.trial_id,
            a: row.a,
            b: row.b,
            outcome_a: spin(row.outcome_a)?,
            outcome_b: spin(row.outcome_b)?,
            c_outcome: to_map(parse_c_token(&row.c_outcome))?,
            heralded: row.heralded,
        })
    }
}

/// Writes `trial_id,a,b,A,B,c_outcome,heralded` rows.
pub fn write_csv<W: Write>(e: &Ensemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &e.records {
        w.serialize(RecordRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize::<RecordRow>().map(|row| TrialRecord::try_from(row?)).collect()
}

#[derive(Serialize)]
struct EnsembleJson<'a> {
    meta: &'a EnsembleMeta,
    records: Vec<RecordRow>,
}

/// JSON mirror of the CSV with a `meta` block.
pub fn write_json<W: Write>(e: &Ensemble, meta: &EnsembleMeta, out: W) -> Result<()> {
    let doc = EnsembleJson { meta, records: e.records.iter().map(RecordRow::from).collect() };
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(geometry: PresetName, n: u64) -> ExperimentConfig {
        ExperimentConfig { geometry, n_trials: n, seed: 42, ..Default::default() }
    }

    #[test]
    fn execution_orders() {
        assert_eq!(execution_order(PresetName::EarlyDelft).unwrap(), [Station::C, Station::A, Station::B]);
        assert_eq!(execution_order(PresetName::DelayedDelft).unwrap(), [Station::A, Station::B, Station::C]);
        assert_eq!(execution_order(PresetName::SpacelikeDelft).unwrap(), [Station::A, Station::B, Station::C]);
        assert!(matches!(execution_order(PresetName::Custom), Err(EngineError::InvalidGeometry(_))));
    }

    #[test]
    fn herald_predicate_parsing() {
        let p: HeraldPredicate = "psi-".parse().unwrap();
        assert_eq!(p, HeraldPredicate::default());
        let q: HeraldPredicate = "psi+,psi-".parse().unwrap();
        assert!(q.accepts(BellOutcome::PsiPlus) && !q.accepts(BellOutcome::PhiPlus));
        assert_eq!(q.name(), "psi+,psi-");
        assert_eq!("any".parse::<HeraldPredicate>().unwrap().name(), "any");
        assert!("psi".parse::<HeraldPredicate>().is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(run_trials(&config(PresetName::EarlyDelft, 0)), Err(EngineError::NoTrials)));
        assert!(matches!(run_trials(&config(PresetName::Custom, 5)), Err(EngineError::InvalidGeometry(_))));
        let mut c = config(PresetName::EarlyDelft, 5);
        c.angles.a[1] = f64::INFINITY;
        assert!(matches!(run_trials(&c), Err(EngineError::BadAngle)));
    }

    #[test]
    fn ids_are_consecutive_and_runs_deterministic() {
        let cfg = config(PresetName::DelayedDelft, 2_000);
        let e1 = run_trials(&cfg).unwrap();
        let e2 = run_trials(&cfg).unwrap();
        assert_eq!(e1, e2);
        assert!(e1.records.iter().enumerate().all(|(i, r)| r.trial_id == i as u64));
        let seq: Vec<TrialRecord> = (0..cfg.n_trials)
            .map(|i| simulate_trial(&cfg, &execution_order(cfg.geometry).unwrap(), i).unwrap())
            .collect();
        assert_eq!(seq, e1.records);
    }

    #[test]
    fn disabled_c_is_absent() {
        let cfg = ExperimentConfig { c_enabled: false, ..config(PresetName::EarlyDelft, 500) };
        let e = run_trials(&cfg).unwrap();
        assert!(e.records.iter().all(|r| r.c_outcome.is_none() && !r.heralded));
        assert!(post_select(&e, &HeraldPredicate::any()).is_empty());
    }

    #[test]
    fn heralded_fraction_is_one_quarter() {
        let e = run_trials(&config(PresetName::EarlyDelft, 100_000)).unwrap();
        let f = e.heralded_fraction();
        let se = (0.25f64 * 0.75 / 1e5).sqrt();
        assert!((f - 0.25).abs() < 5.0 * se, "fraction {f}");
    }

    #[test]
    fn post_select_keeps_ids_and_order() {
        let e = run_trials(&config(PresetName::SpacelikeDelft, 1_000)).unwrap();
        let ec = post_select(&e, &HeraldPredicate::default());
        assert_eq!(ec, e.heralded());
        assert!(ec.records.windows(2).all(|w| w[0].trial_id < w[1].trial_id));
        assert!(ec.records.iter().all(|r| r.c_outcome == Some(BellOutcome::PsiMinus)));
        let all = post_select(&e, &HeraldPredicate::any());
        assert_eq!(all.records, e.records);
        let none = post_select(&Ensemble { records: vec![], config_digest: String::new(), seed: 0 }, &HeraldPredicate::any());
        assert!(none.is_empty());
    }

    fn wing_cos(angles: &AngleMap, a: u8, b: u8) -> f64 {
        (angles.angle_a(a) - angles.angle_b(b)).cos()
    }

    #[test]
    fn exact_tables_agree_across_geometries() {
        let base = exact_experiment_distribution(&config(PresetName::EarlyDelft, 1)).unwrap();
        assert_abs_diff_eq!(base.total(), 1.0, epsilon = 1e-12);
        for g in [PresetName::DelayedDelft, PresetName::SpacelikeDelft] {
            let other = exact_experiment_distribution(&config(g, 1)).unwrap();
            assert!(base.max_abs_diff(&other) < 1e-12, "{g}");
        }
    }

    #[test]
    fn exact_marginals() {
        let cfg = config(PresetName::DelayedDelft, 1);
        let t = exact_experiment_distribution(&cfg).unwrap();
        let wings = t.wing_marginal();
        for a in 0..2u8 {
            for b in 0..2u8 {
                for oa in Spin::ALL {
                    let p: f64 = Spin::ALL.iter().map(|&ob| wings[&(a, b, oa, ob)]).sum::<f64>() / 0.25;
                    assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
                }
                // Full ensemble: A and B are uncorrelated.
                for (oa, ob) in [(Spin::Up, Spin::Up), (Spin::Up, Spin::Down)] {
                    assert_abs_diff_eq!(wings[&(a, b, oa, ob)], 0.0625, epsilon = 1e-12);
                }
            }
        }
        for dist in t.c_given_settings().values() {
            for o in BellOutcome::BELL_STATES {
                assert_abs_diff_eq!(dist[&Some(o)], 0.25, epsilon = 1e-12);
            }
        }
        let off = exact_experiment_distribution(&ExperimentConfig { c_enabled: false, ..cfg }).unwrap();
        let off_wings = off.wing_marginal();
        for (k, p) in &wings {
            assert_abs_diff_eq!(*p, off_wings[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn heralded_correlations_are_singlet_like() {
        let cfg = config(PresetName::EarlyDelft, 1);
        let t = exact_experiment_distribution(&cfg).unwrap();
        let cond = t.conditional_on(&cfg.herald).unwrap();
        for a in 0..2u8 {
            for b in 0..2u8 {
                let e: f64 = Spin::ALL
                    .iter()
                    .flat_map(|&oa| Spin::ALL.iter().map(move |&ob| (oa, ob)))
                    .map(|(oa, ob)| f64::from(oa.sign() * ob.sign()) * cond[&(a, b, oa, ob)] / 0.25)
                    .sum();
                assert_abs_diff_eq!(e, -wing_cos(&cfg.angles, a, b), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let cfg = ExperimentConfig { bsm_mode: BsmMode::Partial { resolve_psi_plus: false }, ..config(PresetName::EarlyDelft, 200) };
        let e = run_trials(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&e, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("trial_id,a,b,A,B,c_outcome,heralded\n"));
        assert!(text.contains(",none,false"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), e.records);

        let mut json = Vec::new();
        write_json(&e, &cfg.meta(), &mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["meta"]["seed"], 42);
        assert_eq!(v["meta"]["geometry"], "early");
        assert_eq!(v["meta"]["herald"], "psi-");
        assert_eq!(v["records"].as_array().unwrap().len(), 200);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        let bad = "trial_id,a,b,A,B,c_outcome,heralded\n0,0,1,2,1,psi-,true\n";
        assert!(read_csv(bad.as_bytes()).is_err());
        let bad = "trial_id,a,b,A,B,c_outcome,heralded\n0,0,1,1,1,psi,true\n";
        assert!(matches!(read_csv(bad.as_bytes()), Err(EngineError::Format(_))));
    }
}
