//! Dense state vectors for up to five qubits, spin and Bell-state
//! measurements, and exhaustive enumeration of measurement branches.
//!
//! Qubits are indexed from 0. Qubit 0 is the most significant bit of the
//! basis-state index, so for two singlets the left wing is (0, 1) and the
//! right wing is (2, 3). Spin up is |0⟩ and spin down is |1⟩.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_QUBITS: usize = 5;

/// Tolerance used for exact-mode equalities.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcoreError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("Bell measurement needs two distinct qubits, got {0} twice")]
    QubitCollision(usize),
    #[error("random draw {0} outside [0, 1)")]
    BadDraw(f64),
    #[error("projection onto the selected outcome has zero norm")]
    ZeroNormProjection,
}

pub type Result<T> = std::result::Result<T, QcoreError>;

/// Normalized pure state of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from explicit amplitudes, checking length and norm.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let expected = 1usize << num_qubits;
        if amplitudes.len() != expected {
            return Err(QcoreError::LengthMismatch { expected, got: amplitudes.len() });
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(QcoreError::NotNormalized(norm));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QcoreError::LengthMismatch { expected: dim, got: index + 1 });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// The two-qubit singlet (|01⟩ − |10⟩)/√2.
    pub fn singlet() -> Self {
        Self::bell(BellOutcome::PsiMinus).expect("singlet is a Bell state")
    }

    /// One of the four Bell states on two qubits. `NoHerald` has no state.
    pub fn bell(which: BellOutcome) -> Option<Self> {
        let v = bell_vector(which)?;
        Some(Self {
            num_qubits: 2,
            amplitudes: v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        })
    }

    /// Kronecker product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_qubit_count(num_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << num_qubits);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Option<f64> {
        if self.num_qubits != other.num_qubits {
            return None;
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Some(overlap.norm_sqr())
    }

    /// Fidelity ⟨target|ρ|target⟩ of the reduced state of the `keep` qubits
    /// (in the listed order) against a pure `target`.
    pub fn reduced_fidelity(&self, keep: &[usize], target: &StateVector) -> Option<f64> {
        let n = self.num_qubits;
        if keep.len() != target.num_qubits || keep.iter().any(|&q| q >= n) {
            return None;
        }
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        // ρ = Σ_r |φ_r⟩⟨φ_r| with φ_r the block of amplitudes at rest-configuration r.
        let mut overlaps = vec![Complex64::new(0.0, 0.0); 1 << rest.len()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let rest_key = rest.iter().fold(0, |k, &q| (k << 1) | bit(idx, q, n));
            let keep_key = keep.iter().fold(0, |k, &q| (k << 1) | bit(idx, q, n));
            overlaps[rest_key] += target.amplitudes[keep_key].conj() * amp;
        }
        Some(overlaps.iter().map(|o| o.norm_sqr()).sum())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            Err(QcoreError::QubitOutOfRange { qubit, num_qubits: self.num_qubits })
        } else {
            Ok(())
        }
    }

    fn renormalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes);
        if norm <= f64::EPSILON {
            return Err(QcoreError::ZeroNormProjection);
        }
        let scale = 1.0 / norm.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(Self { num_qubits, amplitudes })
    }
}

/// Two singlets, (0,1) and (2,3).
pub fn make_two_singlets() -> StateVector {
    StateVector::singlet()
        .tensor(&StateVector::singlet())
        .expect("four qubits fit the budget")
}

fn check_qubit_count(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(QcoreError::QubitCount(n))
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

#[inline]
fn bit(index: usize, qubit: usize, num_qubits: usize) -> usize {
    (index >> (num_qubits - 1 - qubit)) & 1
}

fn check_draw(draw: f64) -> Result<()> {
    if (0.0..1.0).contains(&draw) {
        Ok(())
    } else {
        Err(QcoreError::BadDraw(draw))
    }
}

/// Outcome of a spin measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn sign(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn from_sign(sign: i64) -> Option<Spin> {
        match sign {
            1 => Some(Spin::Up),
            -1 => Some(Spin::Down),
            _ => None,
        }
    }

    /// 0 for up, 1 for down.
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Spin measurement along cos(angle)·Z + sin(angle)·X on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMeasurement {
    pub qubit: usize,
    pub angle: f64,
}

impl SpinMeasurement {
    pub fn new(qubit: usize, angle: f64) -> Self {
        Self { qubit, angle }
    }

    /// Eigenvector of the observable for `outcome`, as real (|0⟩, |1⟩) components.
    fn eigenvector(&self, outcome: Spin) -> [f64; 2] {
        let half = 0.5 * self.angle;
        match outcome {
            Spin::Up => [half.cos(), half.sin()],
            Spin::Down => [-half.sin(), half.cos()],
        }
    }

    /// Unnormalized projection of `amps` onto `outcome`.
    fn project(&self, num_qubits: usize, amps: &[Complex64], outcome: Spin) -> Vec<Complex64> {
        let v = self.eigenvector(outcome);
        let stride = 1usize << (num_qubits - 1 - self.qubit);
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for i0 in (0..amps.len()).filter(|i| i & stride == 0) {
            let i1 = i0 | stride;
            let overlap = amps[i0] * v[0] + amps[i1] * v[1];
            out[i0] = overlap * v[0];
            out[i1] = overlap * v[1];
        }
        out
    }
}

/// Born probability of outcome +1.
pub fn prob_spin_up(state: &StateVector, m: SpinMeasurement) -> Result<f64> {
    state.check_qubit(m.qubit)?;
    let projected = m.project(state.num_qubits, &state.amplitudes, Spin::Up);
    Ok(norm_sqr(&projected).clamp(0.0, 1.0))
}

/// Projective spin measurement. The outcome is +1 when `draw < P(+1)`.
pub fn measure_spin(state: &StateVector, m: SpinMeasurement, draw: f64) -> Result<(Spin, StateVector)> {
    check_draw(draw)?;
    let p_up = prob_spin_up(state, m)?;
    let outcome = if draw < p_up { Spin::Up } else { Spin::Down };
    let projected = m.project(state.num_qubits, &state.amplitudes, outcome);
    let post = StateVector::renormalized(state.num_qubits, projected)?;
    Ok((outcome, post))
}

/// Result of a Bell-state measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    NoHerald,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 5] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
        BellOutcome::NoHerald,
    ];

    pub const BELL_STATES: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// ASCII token used in files.
    pub fn token(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
            BellOutcome::NoHerald => "none",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for BellOutcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        BellOutcome::ALL
            .into_iter()
            .find(|o| o.token() == s.trim())
            .ok_or_else(|| format!("unknown Bell outcome `{s}`"))
    }
}

/// Amplitudes over |00⟩,|01⟩,|10⟩,|11⟩ with the left qubit first.
fn bell_vector(which: BellOutcome) -> Option<[f64; 4]> {
    let h = FRAC_1_SQRT_2;
    Some(match which {
        BellOutcome::PhiPlus => [h, 0.0, 0.0, h],
        BellOutcome::PhiMinus => [h, 0.0, 0.0, -h],
        BellOutcome::PsiPlus => [0.0, h, h, 0.0],
        BellOutcome::PsiMinus => [0.0, h, -h, 0.0],
        BellOutcome::NoHerald => return None,
    })
}

/// How completely the Bell analyzer resolves the four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BsmMode {
    /// All four Bell states are distinguished.
    #[default]
    Full,
    /// Only ψ− (and ψ+ when `resolve_psi_plus`) is resolved. Everything
    /// else is reported as `NoHerald`.
    Partial { resolve_psi_plus: bool },
}

impl BsmMode {
    /// Possible outcomes in collapse order.
    pub fn outcomes(self) -> &'static [BellOutcome] {
        match self {
            BsmMode::Full => &BellOutcome::BELL_STATES,
            BsmMode::Partial { resolve_psi_plus: true } => {
                &[BellOutcome::PsiPlus, BellOutcome::PsiMinus, BellOutcome::NoHerald]
            }
            BsmMode::Partial { resolve_psi_plus: false } => &[BellOutcome::PsiMinus, BellOutcome::NoHerald],
        }
    }

    fn resolved(self) -> impl Iterator<Item = BellOutcome> {
        self.outcomes().iter().copied().filter(|o| *o != BellOutcome::NoHerald)
    }

    pub fn token(self) -> &'static str {
        match self {
            BsmMode::Full => "full",
            BsmMode::Partial { resolve_psi_plus: false } => "partial",
            BsmMode::Partial { resolve_psi_plus: true } => "partial-psi-plus",
        }
    }
}

impl FromStr for BsmMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "full" => Ok(BsmMode::Full),
            "partial" => Ok(BsmMode::Partial { resolve_psi_plus: false }),
            "partial-psi-plus" => Ok(BsmMode::Partial { resolve_psi_plus: true }),
            other => Err(format!("unknown BSM mode `{other}` (full|partial|partial-psi-plus)")),
        }
    }
}

/// Bell measurement on an ordered qubit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellMeasurement {
    pub left: usize,
    pub right: usize,
    pub mode: BsmMode,
}

impl BellMeasurement {
    pub fn new(left: usize, right: usize, mode: BsmMode) -> Self {
        Self { left, right, mode }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        for q in [self.left, self.right] {
            if q >= num_qubits {
                return Err(QcoreError::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        if self.left == self.right {
            return Err(QcoreError::QubitCollision(self.left));
        }
        Ok(())
    }

    /// Unnormalized projection onto one Bell state of the pair.
    fn project_bell(&self, num_qubits: usize, amps: &[Complex64], which: BellOutcome) -> Vec<Complex64> {
        let v = bell_vector(which).expect("resolved outcomes are Bell states");
        let sl = 1usize << (num_qubits - 1 - self.left);
        let sr = 1usize << (num_qubits - 1 - self.right);
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for base in (0..amps.len()).filter(|i| i & (sl | sr) == 0) {
            let idx = [base, base | sr, base | sl, base | sl | sr];
            let overlap: Complex64 = idx.iter().zip(v).map(|(&i, c)| amps[i] * c).sum();
            for (&i, c) in idx.iter().zip(v) {
                out[i] = overlap * c;
            }
        }
        out
    }

    /// Unnormalized projection onto the subspace reported as `outcome`.
    fn project(&self, num_qubits: usize, amps: &[Complex64], outcome: BellOutcome) -> Vec<Complex64> {
        if outcome != BellOutcome::NoHerald {
            return self.project_bell(num_qubits, amps, outcome);
        }
        let mut rest = amps.to_vec();
        for resolved in self.mode.resolved() {
            let part = self.project_bell(num_qubits, amps, resolved);
            rest.iter_mut().zip(part).for_each(|(r, p)| *r -= p);
        }
        rest
    }
}

/// Outcome probabilities of a Bell measurement, in collapse order.
pub fn bell_outcome_probabilities(state: &StateVector, m: BellMeasurement) -> Result<Vec<(BellOutcome, f64)>> {
    m.validate(state.num_qubits)?;
    Ok(m.mode
        .outcomes()
        .iter()
        .map(|&o| (o, norm_sqr(&m.project(state.num_qubits, &state.amplitudes, o))))
        .collect())
}

/// Bell-state measurement on `(q_left, q_right)`, sampled with `draw` against
/// the cumulative outcome probabilities in enum order.
pub fn bell_state_measurement(
    state: &StateVector,
    q_left: usize,
    q_right: usize,
    draw: f64,
    mode: BsmMode,
) -> Result<(BellOutcome, StateVector)> {
    check_draw(draw)?;
    let m = BellMeasurement::new(q_left, q_right, mode);
    let probs = bell_outcome_probabilities(state, m)?;
    let mut cumulative = 0.0;
    let mut chosen = None;
    for &(o, p) in &probs {
        cumulative += p;
        if p > 0.0 && draw < cumulative {
            chosen = Some(o);
            break;
        }
    }
    // Rounding can leave the last threshold a hair below 1.
    let outcome = chosen
        .or_else(|| probs.iter().rev().find(|(_, p)| *p > 0.0).map(|(o, _)| *o))
        .ok_or(QcoreError::ZeroNormProjection)?;
    let projected = m.project(state.num_qubits, &state.amplitudes, outcome);
    Ok((outcome, StateVector::renormalized(state.num_qubits, projected)?))
}

/// One measurement in a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementStep {
    Spin(SpinMeasurement),
    Bell(BellMeasurement),
}

impl MeasurementStep {
    fn qubits(&self) -> Vec<usize> {
        match self {
            MeasurementStep::Spin(m) => vec![m.qubit],
            MeasurementStep::Bell(m) => vec![m.left, m.right],
        }
    }

    fn outcomes(&self) -> Vec<Outcome> {
        match self {
            MeasurementStep::Spin(_) => Spin::ALL.iter().map(|&s| Outcome::Spin(s)).collect(),
            MeasurementStep::Bell(m) => m.mode.outcomes().iter().map(|&b| Outcome::Bell(b)).collect(),
        }
    }

    fn project(&self, num_qubits: usize, amps: &[Complex64], outcome: Outcome) -> Vec<Complex64> {
        match (self, outcome) {
            (MeasurementStep::Spin(m), Outcome::Spin(s)) => m.project(num_qubits, amps, s),
            (MeasurementStep::Bell(m), Outcome::Bell(b)) => m.project(num_qubits, amps, b),
            _ => unreachable!("outcome kind always matches step kind"),
        }
    }
}

/// Outcome of any plan step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Spin(Spin),
    Bell(BellOutcome),
}

/// Ordered, labeled measurements applied to an initial state.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub initial: StateVector,
    pub steps: Vec<(String, MeasurementStep)>,
}

impl MeasurementPlan {
    pub fn new(initial: StateVector) -> Self {
        Self { initial, steps: Vec::new() }
    }

    pub fn then(mut self, label: impl Into<String>, step: MeasurementStep) -> Self {
        self.steps.push((label.into(), step));
        self
    }

    pub fn spin(self, label: impl Into<String>, qubit: usize, angle: f64) -> Self {
        self.then(label, MeasurementStep::Spin(SpinMeasurement::new(qubit, angle)))
    }

    pub fn bell(self, label: impl Into<String>, left: usize, right: usize, mode: BsmMode) -> Self {
        self.then(label, MeasurementStep::Bell(BellMeasurement::new(left, right, mode)))
    }
}

/// Joint outcome distribution; each key lists one outcome per label.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    labels: Vec<String>,
    entries: BTreeMap<Vec<Outcome>, f64>,
}

impl JointTable {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &BTreeMap<Vec<Outcome>, f64> {
        &self.entries
    }

    pub fn get(&self, outcomes: &[Outcome]) -> f64 {
        self.entries.get(outcomes).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    fn positions(&self, labels: &[&str]) -> Option<Vec<usize>> {
        labels.iter().map(|l| self.labels.iter().position(|x| x == l)).collect()
    }

    /// Marginal over the listed labels, keyed in the listed order.
    pub fn marginal(&self, labels: &[&str]) -> Option<JointTable> {
        let pos = self.positions(labels)?;
        let mut entries = BTreeMap::new();
        for (key, p) in &self.entries {
            let sub: Vec<Outcome> = pos.iter().map(|&i| key[i]).collect();
            *entries.entry(sub).or_insert(0.0) += p;
        }
        Some(JointTable { labels: labels.iter().map(|s| s.to_string()).collect(), entries })
    }

    /// Largest entrywise difference after aligning label order. `None` when
    /// the tables do not share the same label set.
    pub fn max_abs_diff(&self, other: &JointTable) -> Option<f64> {
        if self.labels.len() != other.labels.len() {
            return None;
        }
        let order: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let aligned = other.marginal(&order)?;
        let keys: std::collections::BTreeSet<_> = self.entries.keys().chain(aligned.entries.keys()).collect();
        Some(keys.into_iter().map(|k| (self.get(k) - aligned.get(k)).abs()).fold(0.0, f64::max))
    }
}

/// Exhaustive depth-first expansion of every measurement branch. Zero-weight
/// branches are kept so the table always lists every outcome combination.
pub fn exact_branch_enumeration(plan: &MeasurementPlan) -> Result<JointTable> {
    let n = plan.initial.num_qubits;
    for (_, step) in &plan.steps {
        for q in step.qubits() {
            if q >= n {
                return Err(QcoreError::QubitOutOfRange { qubit: q, num_qubits: n });
            }
        }
        if let MeasurementStep::Bell(m) = step {
            m.validate(n)?;
        }
    }
    let mut entries = BTreeMap::new();
    let mut prefix = Vec::with_capacity(plan.steps.len());
    expand(plan, 0, &plan.initial.amplitudes, &mut prefix, &mut entries);
    Ok(JointTable { labels: plan.steps.iter().map(|(l, _)| l.clone()).collect(), entries })
}

fn expand(
    plan: &MeasurementPlan,
    depth: usize,
    amps: &[Complex64],
    prefix: &mut Vec<Outcome>,
    entries: &mut BTreeMap<Vec<Outcome>, f64>,
) {
    let Some((_, step)) = plan.steps.get(depth) else {
        entries.insert(prefix.clone(), norm_sqr(amps));
        return;
    };
    for outcome in step.outcomes() {
        let branch = step.project(plan.initial.num_qubits, amps, outcome);
        prefix.push(outcome);
        expand(plan, depth + 1, &branch, prefix, entries);
        prefix.pop();
    }
}
