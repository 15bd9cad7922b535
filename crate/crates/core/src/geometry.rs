//! 1+1 dimensional event bookkeeping (c = 1): causal classification of event
//! pairs, the three experiment layouts, and time ordering in boosted frames.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Band on Δt² − Δx² inside which a separation counts as lightlike.
pub const LIGHTLIKE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("preset is missing event {0}")]
    MissingEvent(EventLabel),
    #[error("boost velocity {0} must satisfy |v| < 1")]
    Superluminal(f64),
    #[error("event {0} has non-finite coordinates")]
    NonFinite(EventLabel),
    #[error("unknown geometry `{0}` (early|delayed|spacelike)")]
    UnknownPreset(String),
}

/// Event labels, declared in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventLabel {
    SourceLeft,
    SourceRight,
    A,
    B,
    C,
}

impl EventLabel {
    pub const ALL: [EventLabel; 5] =
        [EventLabel::SourceLeft, EventLabel::SourceRight, EventLabel::A, EventLabel::B, EventLabel::C];

    pub fn token(self) -> &'static str {
        match self {
            EventLabel::SourceLeft => "SL",
            EventLabel::SourceRight => "SR",
            EventLabel::A => "A",
            EventLabel::B => "B",
            EventLabel::C => "C",
        }
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for EventLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventLabel::ALL
            .into_iter()
            .find(|l| l.token().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown event label `{s}` (SL|SR|A|B|C)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub label: EventLabel,
    pub t: f64,
    pub x: f64,
}

impl SpacetimeEvent {
    pub fn new(label: EventLabel, t: f64, x: f64) -> Self {
        Self { label, t, x }
    }

    /// Time coordinate seen from a frame moving with velocity `v`.
    pub fn boosted_time(&self, v: f64) -> f64 {
        lorentz_gamma(v) * (self.t - v * self.x)
    }
}

fn lorentz_gamma(v: f64) -> f64 {
    1.0 / (1.0 - v * v).sqrt()
}

/// Where the second event of a pair sits relative to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalRelation {
    TimelikePast,
    TimelikeFuture,
    Lightlike,
    Spacelike,
}

impl fmt::Display for CausalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CausalRelation::TimelikePast => "timelike-past",
            CausalRelation::TimelikeFuture => "timelike-future",
            CausalRelation::Lightlike => "lightlike",
            CausalRelation::Spacelike => "spacelike",
        };
        f.write_str(s)
    }
}

/// Relation of `e2` relative to `e1`. Coincident events have no causal
/// order and are reported as spacelike.
pub fn classify(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> CausalRelation {
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    let interval = dt * dt - dx * dx;
    let coincident = dt == 0.0 && dx == 0.0;
    if coincident {
        CausalRelation::Spacelike
    } else if interval.abs() <= LIGHTLIKE_TOL {
        CausalRelation::Lightlike
    } else if interval < 0.0 {
        CausalRelation::Spacelike
    } else if dt > 0.0 {
        CausalRelation::TimelikeFuture
    } else {
        CausalRelation::TimelikePast
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PresetName {
    EarlyDelft,
    DelayedDelft,
    SpacelikeDelft,
    Custom,
}

impl PresetName {
    /// Short name used on the command line and in file metadata.
    pub fn token(self) -> &'static str {
        match self {
            PresetName::EarlyDelft => "early",
            PresetName::DelayedDelft => "delayed",
            PresetName::SpacelikeDelft => "spacelike",
            PresetName::Custom => "custom",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PresetName {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "early" | "ed" | "earlydelft" => Ok(PresetName::EarlyDelft),
            "delayed" | "dd" | "delayeddelft" => Ok(PresetName::DelayedDelft),
            "spacelike" | "spacelikedelft" => Ok(PresetName::SpacelikeDelft),
            other => Err(GeometryError::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryPreset {
    pub name: PresetName,
    pub events: Vec<SpacetimeEvent>,
}

impl GeometryPreset {
    pub fn early_delft() -> Self {
        Self::from_coords(
            PresetName::EarlyDelft,
            [(0.5, -0.5), (0.5, 0.5), (2.0, -1.0), (2.0, 1.0), (0.0, 0.0)],
        )
    }

    pub fn delayed_delft() -> Self {
        Self::from_coords(
            PresetName::DelayedDelft,
            [(0.0, -1.0), (0.0, 1.0), (1.0, -1.0), (1.0, 1.0), (3.0, 0.0)],
        )
    }

    pub fn spacelike_delft() -> Self {
        Self::from_coords(
            PresetName::SpacelikeDelft,
            [(0.0, -1.0), (0.0, 1.0), (1.5, -1.5), (1.5, 1.5), (1.5, 0.0)],
        )
    }

    /// `(t, x)` per event in `EventLabel::ALL` order.
    fn from_coords(name: PresetName, coords: [(f64, f64); 5]) -> Self {
        let events = EventLabel::ALL
            .iter()
            .zip(coords)
            .map(|(&label, (t, x))| SpacetimeEvent::new(label, t, x))
            .collect();
        Self { name, events }
    }

    pub fn custom(events: Vec<SpacetimeEvent>) -> Result<Self, GeometryError> {
        if let Some(e) = events.iter().find(|e| !e.t.is_finite() || !e.x.is_finite()) {
            return Err(GeometryError::NonFinite(e.label));
        }
        Ok(Self { name: PresetName::Custom, events })
    }

    /// Built-in preset by name. `Custom` has no built-in coordinates.
    pub fn named(name: PresetName) -> Option<Self> {
        match name {
            PresetName::EarlyDelft => Some(Self::early_delft()),
            PresetName::DelayedDelft => Some(Self::delayed_delft()),
            PresetName::SpacelikeDelft => Some(Self::spacelike_delft()),
            PresetName::Custom => None,
        }
    }

    pub fn event(&self, label: EventLabel) -> Result<&SpacetimeEvent, GeometryError> {
        self.events
            .iter()
            .find(|e| e.label == label)
            .ok_or(GeometryError::MissingEvent(label))
    }

    /// Relation of every later-listed event to every earlier one.
    pub fn pair_relations(&self) -> Vec<(EventLabel, EventLabel, CausalRelation)> {
        let mut out = Vec::new();
        for (i, e1) in self.events.iter().enumerate() {
            for e2 in &self.events[i + 1..] {
                out.push((e1.label, e2.label, classify(e1, e2)));
            }
        }
        out
    }

    /// Each source lies in the timelike past of the wing it feeds.
    pub fn sources_precede_wings(&self) -> Result<bool, GeometryError> {
        let left = classify(self.event(EventLabel::SourceLeft)?, self.event(EventLabel::A)?);
        let right = classify(self.event(EventLabel::SourceRight)?, self.event(EventLabel::B)?);
        Ok(left == CausalRelation::TimelikeFuture && right == CausalRelation::TimelikeFuture)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryClass {
    /// C in the timelike past of both A and B.
    ED,
    /// C in the timelike future of both A and B.
    DD,
    Spacelike,
    Mixed,
}

impl fmt::Display for GeometryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeometryClass::ED => "ED",
            GeometryClass::DD => "DD",
            GeometryClass::Spacelike => "Spacelike",
            GeometryClass::Mixed => "Mixed",
        };
        f.write_str(s)
    }
}

pub fn classify_geometry(preset: &GeometryPreset) -> Result<GeometryClass, GeometryError> {
    for label in EventLabel::ALL {
        preset.event(label)?;
    }
    let c = preset.event(EventLabel::C)?;
    let rel_a = classify(preset.event(EventLabel::A)?, c);
    let rel_b = classify(preset.event(EventLabel::B)?, c);
    Ok(match (rel_a, rel_b) {
        (CausalRelation::TimelikePast, CausalRelation::TimelikePast) => GeometryClass::ED,
        (CausalRelation::TimelikeFuture, CausalRelation::TimelikeFuture) => GeometryClass::DD,
        (CausalRelation::Spacelike, CausalRelation::Spacelike) => GeometryClass::Spacelike,
        _ => GeometryClass::Mixed,
    })
}

/// Event labels sorted by t' = γ(t − v·x); exact ties fall back to label order.
pub fn boosted_time_order(preset: &GeometryPreset, v: f64) -> Result<Vec<EventLabel>, GeometryError> {
    if v.is_nan() || v.abs() >= 1.0 {
        return Err(GeometryError::Superluminal(v));
    }
    let mut keyed: Vec<(f64, EventLabel)> = preset.events.iter().map(|e| (e.boosted_time(v), e.label)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, l)| l).collect())
}
