//! Mobility traces: per-instant vehicle states and their ingestion.

mod fcd;
mod synth;
mod tabular;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub use fcd::{parse_fcd, write_fcd};
pub use synth::{synth_trace, SynthConfig};
pub use tabular::parse_trace_csv;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed XML at line {line}: {message}")]
    Xml { line: usize, message: String },
    #[error("line {line}: <{element}> is missing required attribute `{attribute}`")]
    MissingAttribute {
        line: usize,
        element: String,
        attribute: String,
    },
    #[error("line {line}: invalid value {value:?} for `{attribute}` on <{element}>")]
    InvalidValue {
        line: usize,
        element: String,
        attribute: String,
        value: String,
    },
    #[error("trace structure: {0}")]
    Structure(String),
    #[error("invalid vehicle state: {0}")]
    InvalidState(String),
    #[error("vehicle {id:?} appears twice in the snapshot at t={time}")]
    DuplicateVehicle { id: String, time: String },
    #[error("synthetic trace config: {0}")]
    Config(String),
    #[error("CSV trace: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Bus,
    Private,
    Other,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 3] = [VehicleClass::Bus, VehicleClass::Private, VehicleClass::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::Bus => "bus",
            VehicleClass::Private => "private",
            VehicleClass::Other => "other",
        }
    }
}

impl std::fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bus" => Ok(VehicleClass::Bus),
            "private" => Ok(VehicleClass::Private),
            "other" => Ok(VehicleClass::Other),
            other => Err(format!("unknown vehicle class {other:?}")),
        }
    }
}

/// Maps the free-form vehicle `type` of a trace onto a [`VehicleClass`].
///
/// Rules are checked in order; a rule matches when the type contains its
/// pattern (ASCII case-insensitive). Vehicles without a type, or matching no
/// rule, get the fallback class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMap {
    pub rules: Vec<(String, VehicleClass)>,
    pub fallback: VehicleClass,
}

impl Default for ClassMap {
    fn default() -> Self {
        Self {
            rules: vec![("bus".to_owned(), VehicleClass::Bus)],
            fallback: VehicleClass::Private,
        }
    }
}

impl ClassMap {
    pub fn classify(&self, vehicle_type: Option<&str>) -> VehicleClass {
        let Some(ty) = vehicle_type else {
            return self.fallback;
        };
        let ty = ty.to_ascii_lowercase();
        self.rules
            .iter()
            .find(|(pattern, _)| ty.contains(&pattern.to_ascii_lowercase()))
            .map_or(self.fallback, |(_, class)| *class)
    }
}

/// One vehicle sample at one trace instant.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleState<S> {
    pub vehicle_id: String,
    /// Planar network coordinates, meters.
    pub pos_x: S,
    pub pos_y: S,
    /// m/s, never negative.
    pub speed: S,
    pub vehicle_class: VehicleClass,
    /// The raw `type` attribute, kept so traces can be written back verbatim.
    pub vehicle_type: Option<String>,
}

impl<S: Scalar> VehicleState<S> {
    pub fn new(
        vehicle_id: impl Into<String>,
        pos_x: S,
        pos_y: S,
        speed: S,
        vehicle_class: VehicleClass,
    ) -> Result<Self, TraceError> {
        let state = Self {
            vehicle_id: vehicle_id.into(),
            pos_x,
            pos_y,
            speed,
            vehicle_class,
            vehicle_type: None,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn with_type(mut self, vehicle_type: impl Into<String>) -> Self {
        self.vehicle_type = Some(vehicle_type.into());
        self
    }

    pub(crate) fn validate(&self) -> Result<(), TraceError> {
        if self.vehicle_id.is_empty() {
            return Err(TraceError::InvalidState("empty vehicle id".into()));
        }
        if !(self.speed >= S::zero()) {
            return Err(TraceError::InvalidState(format!(
                "vehicle {:?} has negative or NaN speed {}",
                self.vehicle_id, self.speed
            )));
        }
        if !self.pos_x.is_finite() || !self.pos_y.is_finite() {
            return Err(TraceError::InvalidState(format!(
                "vehicle {:?} has a non-finite position",
                self.vehicle_id
            )));
        }
        Ok(())
    }
}

/// All vehicle states at a single trace instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<S> {
    pub time: S,
    states: Vec<VehicleState<S>>,
}

impl<S: Scalar> Snapshot<S> {
    /// Fails when a vehicle id occurs more than once.
    pub fn new(time: S, states: Vec<VehicleState<S>>) -> Result<Self, TraceError> {
        let mut seen = HashSet::with_capacity(states.len());
        for state in &states {
            state.validate()?;
            if !seen.insert(state.vehicle_id.as_str()) {
                return Err(TraceError::DuplicateVehicle {
                    id: state.vehicle_id.clone(),
                    time: time.to_string(),
                });
            }
        }
        Ok(Self { time, states })
    }

    pub fn states(&self) -> &[VehicleState<S>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, vehicle_id: &str) -> Option<&VehicleState<S>> {
        self.states.iter().find(|s| s.vehicle_id == vehicle_id)
    }
}

/// Time-ordered sequence of snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct Timeline<S> {
    snapshots: Vec<Snapshot<S>>,
    step: S,
}

impl<S: Scalar> Timeline<S> {
    /// Builds a timeline, rejecting snapshot times that do not strictly
    /// increase.
    ///
    /// The nominal step is the median gap between consecutive snapshots, or
    /// one second when there are fewer than two snapshots.
    pub fn new(snapshots: Vec<Snapshot<S>>) -> Result<Self, TraceError> {
        for pair in snapshots.windows(2) {
            if !(pair[1].time > pair[0].time) {
                return Err(TraceError::Structure(format!(
                    "snapshot times must strictly increase, got {} after {}",
                    pair[1].time, pair[0].time
                )));
            }
        }
        let step = median_gap(&snapshots).unwrap_or_else(S::one);
        Ok(Self { snapshots, step })
    }

    pub fn snapshots(&self) -> &[Snapshot<S>] {
        &self.snapshots
    }

    pub fn step(&self) -> S {
        self.step
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// The snapshot whose time is closest to `time`; ties go to the earlier one.
    pub fn snapshot_near(&self, time: S) -> Option<&Snapshot<S>> {
        self.snapshots.iter().min_by(|a, b| {
            let da = (a.time - time).abs();
            let db = (b.time - time).abs();
            da.partial_cmp(&db).expect("finite snapshot times")
        })
    }

    /// `(time, speed)` samples of one vehicle, in trace order.
    pub fn speed_series(&self, vehicle_id: &str) -> Vec<(S, S)> {
        self.snapshots
            .iter()
            .filter_map(|snap| snap.get(vehicle_id).map(|s| (snap.time, s.speed)))
            .collect()
    }

    /// Number of distinct vehicles per class over the whole timeline.
    pub fn class_counts(&self) -> BTreeMap<VehicleClass, usize> {
        let mut seen: BTreeMap<&str, VehicleClass> = BTreeMap::new();
        for snap in &self.snapshots {
            for state in &snap.states {
                seen.insert(&state.vehicle_id, state.vehicle_class);
            }
        }
        let mut counts = BTreeMap::new();
        for class in seen.values() {
            *counts.entry(*class).or_insert(0) += 1;
        }
        counts
    }
}

fn median_gap<S: Scalar>(snapshots: &[Snapshot<S>]) -> Option<S> {
    let mut gaps: Vec<S> = snapshots.windows(2).map(|w| w[1].time - w[0].time).collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
    let mid = gaps.len() / 2;
    Some(if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        (gaps[mid - 1] + gaps[mid]) / S::lit(2.0)
    })
}

/// Keeps only vehicles whose class is in `classes`. Snapshot times, including
/// those of snapshots left empty, are unchanged.
pub fn filter_class<S: Scalar>(timeline: &Timeline<S>, classes: &[VehicleClass]) -> Timeline<S> {
    let snapshots = timeline
        .snapshots
        .iter()
        .map(|snap| Snapshot {
            time: snap.time,
            states: snap
                .states
                .iter()
                .filter(|s| classes.contains(&s.vehicle_class))
                .cloned()
                .collect(),
        })
        .collect();
    Timeline {
        snapshots,
        step: timeline.step,
    }
}
