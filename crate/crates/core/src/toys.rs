//! Classical collider toys. Settings and outcomes are independent fair bits;
//! a third party accepts each quadruple with a probability that depends on
//! all four. Everything correlated in the accepted subset comes from that
//! selection.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::AngleMap;
use crate::qcore::Spin;
use crate::rng::trial_rng;

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("n must be at least 1")]
    NoTrials,
    #[error("acceptance weight {weight} at (a={a}, b={b}, A={outcome_a}, B={outcome_b}) outside [0, 1]")]
    WeightOutOfRange { a: u8, b: u8, outcome_a: i8, outcome_b: i8, weight: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ToyError>;

/// Acceptance probability w(a, b, A, B), tabulated over all 16 inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceRule {
    table: [f64; 16],
}

fn rule_index(a: u8, b: u8, oa: Spin, ob: Spin) -> usize {
    ((a as usize) << 3) | ((b as usize) << 2) | (oa.index() << 1) | ob.index()
}

impl AcceptanceRule {
    pub fn from_fn(w: impl Fn(u8, u8, Spin, Spin) -> f64) -> Result<Self> {
        let mut table = [0.0; 16];
        for a in 0..2u8 {
            for b in 0..2u8 {
                for oa in Spin::ALL {
                    for ob in Spin::ALL {
                        let weight = w(a, b, oa, ob);
                        if !(0.0..=1.0).contains(&weight) {
                            return Err(ToyError::WeightOutOfRange {
                                a,
                                b,
                                outcome_a: oa.sign(),
                                outcome_b: ob.sign(),
                                weight,
                            });
                        }
                        table[rule_index(a, b, oa, ob)] = weight;
                    }
                }
            }
        }
        Ok(Self { table })
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::from_fn(|_, _, _, _| p)
    }

    /// w = (1 − A·B·cos(θa − θb)) / 2. Renormalizing the uniform prior by this
    /// weight gives the singlet distribution (1 − A·B·cos(θa − θb)) / 4.
    pub fn bell(angles: &AngleMap) -> Self {
        Self::from_fn(|a, b, oa, ob| {
            let ab = f64::from(oa.sign() * ob.sign());
            (1.0 - ab * (angles.angle_a(a) - angles.angle_b(b)).cos()) / 2.0
        })
        .expect("Bell weight lies in [0, 1]")
    }

    pub fn weight(&self, a: u8, b: u8, oa: Spin, ob: Spin) -> f64 {
        self.table[rule_index(a, b, oa, ob)]
    }
}

impl Default for AcceptanceRule {
    fn default() -> Self {
        Self::bell(&AngleMap::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyTrial {
    pub trial_id: u64,
    pub a: u8,
    pub b: u8,
    pub outcome_a: Spin,
    pub outcome_b: Spin,
    /// Source-generated outcome pair; set only in the source variant, where
    /// it always equals `(outcome_a, outcome_b)`.
    pub lambda: Option<(Spin, Spin)>,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyVariant {
    /// Outcomes generated locally by Alice and Bob.
    Collider,
    /// Outcomes generated as a pair at a common source.
    Source,
}

impl ToyVariant {
    pub fn token(self) -> &'static str {
        match self {
            ToyVariant::Collider => "collider",
            ToyVariant::Source => "source",
        }
    }
}

impl FromStr for ToyVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "collider" => Ok(ToyVariant::Collider),
            "source" => Ok(ToyVariant::Source),
            other => Err(format!("unknown toy variant `{other}` (collider|source)")),
        }
    }
}

fn spin_from_bit(bit: bool) -> Spin {
    if bit {
        Spin::Down
    } else {
        Spin::Up
    }
}

fn toy_trial(seed: u64, trial_id: u64, rule: &AcceptanceRule, variant: ToyVariant) -> ToyTrial {
    let mut rng = trial_rng(seed, trial_id);
    // Each draw below touches one variable only; no cross-wing input.
    let a: u8 = rng.random_range(0..2);
    let b: u8 = rng.random_range(0..2);
    let outcome_a = spin_from_bit(rng.random());
    let outcome_b = spin_from_bit(rng.random());
    let accept_draw: f64 = rng.random();
    let accepted = accept_draw < rule.weight(a, b, outcome_a, outcome_b);
    let lambda = (variant == ToyVariant::Source).then_some((outcome_a, outcome_b));
    ToyTrial { trial_id, a, b, outcome_a, outcome_b, lambda, accepted }
}

fn run_variant(n: u64, seed: u64, rule: &AcceptanceRule, variant: ToyVariant) -> Result<Vec<ToyTrial>> {
    if n == 0 {
        return Err(ToyError::NoTrials);
    }
    Ok((0..n).into_par_iter().map(|id| toy_trial(seed, id, rule, variant)).collect())
}

/// Random-bit collider: settings and outcomes are local fair bits.
pub fn run_toy_collider(n: u64, seed: u64, rule: &AcceptanceRule) -> Result<Vec<ToyTrial>> {
    run_variant(n, seed, rule, ToyVariant::Collider)
}

/// Midpoint-source variant: the outcome pair comes from the source and is
/// recorded as the hidden variable.
pub fn run_toy_source_variant(n: u64, seed: u64, rule: &AcceptanceRule) -> Result<Vec<ToyTrial>> {
    run_variant(n, seed, rule, ToyVariant::Source)
}

pub fn run_toy(variant: ToyVariant, n: u64, seed: u64, rule: &AcceptanceRule) -> Result<Vec<ToyTrial>> {
    run_variant(n, seed, rule, variant)
}

pub fn accepted(trials: &[ToyTrial]) -> Vec<ToyTrial> {
    trials.iter().filter(|t| t.accepted).copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RpsChoice {
    Rock,
    Paper,
    Scissors,
}

impl RpsChoice {
    pub const ALL: [RpsChoice; 3] = [RpsChoice::Rock, RpsChoice::Paper, RpsChoice::Scissors];

    /// The choice this one defeats.
    pub fn beats(self) -> RpsChoice {
        match self {
            RpsChoice::Rock => RpsChoice::Scissors,
            RpsChoice::Paper => RpsChoice::Rock,
            RpsChoice::Scissors => RpsChoice::Paper,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for RpsChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RpsChoice::Rock => "rock",
            RpsChoice::Paper => "paper",
            RpsChoice::Scissors => "scissors",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RpsVerdict {
    AliceWins,
    BobWins,
    Draw,
}

impl RpsVerdict {
    pub const ALL: [RpsVerdict; 3] = [RpsVerdict::AliceWins, RpsVerdict::BobWins, RpsVerdict::Draw];

    pub fn judge(alice: RpsChoice, bob: RpsChoice) -> Self {
        if alice == bob {
            RpsVerdict::Draw
        } else if alice.beats() == bob {
            RpsVerdict::AliceWins
        } else {
            RpsVerdict::BobWins
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RpsVerdict::AliceWins => "alice_wins",
            RpsVerdict::BobWins => "bob_wins",
            RpsVerdict::Draw => "draw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RpsTrial {
    pub trial_id: u64,
    pub alice: RpsChoice,
    pub bob: RpsChoice,
    pub verdict: RpsVerdict,
}

pub fn run_rps(n: u64, seed: u64) -> Result<Vec<RpsTrial>> {
    if n == 0 {
        return Err(ToyError::NoTrials);
    }
    Ok((0..n)
        .into_par_iter()
        .map(|trial_id| {
            let mut rng = trial_rng(seed, trial_id);
            let alice = RpsChoice::ALL[rng.random_range(0..3)];
            let bob = RpsChoice::ALL[rng.random_range(0..3)];
            RpsTrial { trial_id, alice, bob, verdict: RpsVerdict::judge(alice, bob) }
        })
        .collect())
}

#[derive(Serialize)]
struct ToyRow {
    trial_id: u64,
    a: u8,
    b: u8,
    #[serde(rename = "A")]
    outcome_a: i8,
    #[serde(rename = "B")]
    outcome_b: i8,
    lambda_a: Option<i8>,
    lambda_b: Option<i8>,
    accepted: bool,
}

/// Writes `trial_id,a,b,A,B,lambda_A,lambda_B,accepted`; lambda columns are
/// empty in the collider variant.
pub fn write_toy_csv<W: Write>(trials: &[ToyTrial], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["trial_id", "a", "b", "A", "B", "lambda_A", "lambda_B", "accepted"])?;
    for t in trials {
        w.serialize(ToyRow {
            trial_id: t.trial_id,
            a: t.a,
            b: t.b,
            outcome_a: t.outcome_a.sign(),
            outcome_b: t.outcome_b.sign(),
            lambda_a: t.lambda.map(|l| l.0.sign()),
            lambda_b: t.lambda.map(|l| l.1.sign()),
            accepted: t.accepted,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trial_id,alice,bob,verdict`.
pub fn write_rps_csv<W: Write>(trials: &[RpsTrial], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial_id", "alice", "bob", "verdict"])?;
    for t in trials {
        w.write_record([t.trial_id.to_string(), t.alice.to_string(), t.bob.to_string(), t.verdict.token().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_rule_renormalizes_to_singlet() {
        // Exact 16-cell computation: uniform prior 1/16 times w, renormalized per (a, b).
        let angles = AngleMap::default();
        let rule = &AcceptanceRule::default();
        for a in 0..2u8 {
            for b in 0..2u8 {
                let z: f64 = Spin::ALL
                    .iter()
                    .flat_map(|&x| Spin::ALL.iter().map(move |&y| rule.weight(a, b, x, y) / 16.0))
                    .sum();
                for oa in Spin::ALL {
                    for ob in Spin::ALL {
                        let p = rule.weight(a, b, oa, ob) / 16.0 / z;
                        let ab = f64::from(oa.sign() * ob.sign());
                        let singlet = (1.0 - ab * (angles.a[a as usize] - angles.b[b as usize]).cos()) / 4.0;
                        assert_abs_diff_eq!(p, singlet, epsilon = 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn weights_are_validated() {
        assert!(matches!(AcceptanceRule::constant(1.5), Err(ToyError::WeightOutOfRange { .. })));
        assert!(AcceptanceRule::constant(-0.1).is_err());
        assert!(AcceptanceRule::constant(f64::NAN).is_err());
        assert!(AcceptanceRule::from_fn(|a, _, _, _| if a == 1 { 2.0 } else { 0.5 }).is_err());
    }

    #[test]
    fn constant_rules() {
        let all = run_toy_collider(1_000, 3, &AcceptanceRule::constant(1.0).unwrap()).unwrap();
        assert!(all.iter().all(|t| t.accepted && t.lambda.is_none()));
        let none = run_toy_collider(1_000, 3, &AcceptanceRule::constant(0.0).unwrap()).unwrap();
        assert!(accepted(&none).is_empty());
        assert!(matches!(run_toy_collider(0, 3, &AcceptanceRule::default()), Err(ToyError::NoTrials)));
    }

    #[test]
    fn source_variant_stores_lambda() {
        let t = run_toy_source_variant(500, 9, &AcceptanceRule::default()).unwrap();
        assert!(t.iter().all(|x| x.lambda == Some((x.outcome_a, x.outcome_b))));
        let one = run_toy_source_variant(1, 9, &AcceptanceRule::default()).unwrap();
        assert_eq!(one.len(), 1);
        // Same draws as the collider variant.
        let c = run_toy_collider(500, 9, &AcceptanceRule::default()).unwrap();
        assert!(t.iter().zip(&c).all(|(s, c)| (s.a, s.b, s.outcome_a, s.outcome_b, s.accepted)
            == (c.a, c.b, c.outcome_a, c.outcome_b, c.accepted)));
    }

    #[test]
    fn toys_are_deterministic() {
        let r = AcceptanceRule::default();
        assert_eq!(run_toy_collider(2_000, 5, &r).unwrap(), run_toy_collider(2_000, 5, &r).unwrap());
        assert_eq!(run_rps(2_000, 5).unwrap(), run_rps(2_000, 5).unwrap());
    }

    #[test]
    fn rps_rules() {
        assert_eq!(RpsVerdict::judge(RpsChoice::Rock, RpsChoice::Scissors), RpsVerdict::AliceWins);
        assert_eq!(RpsVerdict::judge(RpsChoice::Rock, RpsChoice::Paper), RpsVerdict::BobWins);
        assert_eq!(RpsVerdict::judge(RpsChoice::Paper, RpsChoice::Paper), RpsVerdict::Draw);
        let trials = run_rps(20_000, 1).unwrap();
        for t in &trials {
            match t.verdict {
                RpsVerdict::Draw => assert_eq!(t.alice, t.bob),
                RpsVerdict::AliceWins if t.alice == RpsChoice::Rock => assert_eq!(t.bob, RpsChoice::Scissors),
                _ => {}
            }
        }
        let n = trials.len() as f64;
        let both_rock = trials.iter().filter(|t| t.alice == RpsChoice::Rock && t.bob == RpsChoice::Rock).count() as f64;
        let p = 1.0 / 9.0;
        assert!((both_rock / n - p).abs() < 5.0 * (p * (1.0 - p) / n).sqrt());
    }

    #[test]
    fn csv_layouts() {
        let t = run_toy_collider(3, 2, &AcceptanceRule::default()).unwrap();
        let mut buf = Vec::new();
        write_toy_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("trial_id,a,b,A,B,lambda_A,lambda_B,accepted"));
        assert!(lines.next().unwrap().contains(",,"));

        let s = run_toy_source_variant(3, 2, &AcceptanceRule::default()).unwrap();
        let mut buf = Vec::new();
        write_toy_csv(&s, &mut buf).unwrap();
        assert!(!String::from_utf8(buf).unwrap().lines().nth(1).unwrap().contains(",,"));

        let r = run_rps(2, 2).unwrap();
        let mut buf = Vec::new();
        write_rps_csv(&r, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("trial_id,alice,bob,verdict\n0,"));
    }
}
