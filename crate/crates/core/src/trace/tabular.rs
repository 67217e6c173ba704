//! Tabular trace input: CSV with header `time,id,x,y,speed,type`.
//!
//! Rows sharing a time value form one snapshot. Times must not decrease from
//! row to row; the `type` column may be left empty.

use std::io::Read;

use serde::Deserialize;

use super::{ClassMap, Snapshot, Timeline, TraceError, VehicleState};
use crate::Scalar;

#[derive(Deserialize)]
struct Row {
    time: String,
    id: String,
    x: String,
    y: String,
    speed: String,
    #[serde(rename = "type", default)]
    vehicle_type: Option<String>,
}

pub fn parse_trace_csv<S: Scalar, R: Read>(input: R, classes: &ClassMap) -> Result<Timeline<S>, TraceError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut snapshots: Vec<Snapshot<S>> = Vec::new();
    let mut pending: Option<(S, Vec<VehicleState<S>>)> = None;

    let headers = reader.headers()?.clone();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        let row: Row = record.deserialize(Some(&headers))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let num = |field: &str, raw: &str| -> Result<S, TraceError> {
            match raw.parse::<S>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(TraceError::InvalidValue {
                    line,
                    element: "row".into(),
                    attribute: field.into(),
                    value: raw.into(),
                }),
            }
        };
        let time = num("time", &row.time)?;
        let vehicle_type = row.vehicle_type.filter(|t| !t.is_empty());
        let state = VehicleState {
            vehicle_class: classes.classify(vehicle_type.as_deref()),
            vehicle_id: row.id,
            pos_x: num("x", &row.x)?,
            pos_y: num("y", &row.y)?,
            speed: num("speed", &row.speed)?,
            vehicle_type,
        };
        state.validate()?;

        match pending.as_mut() {
            Some((t, states)) if *t == time => states.push(state),
            Some((t, _)) if time < *t => {
                return Err(TraceError::Structure(format!(
                    "line {line}: time {time} decreases after {t}"
                )));
            }
            _ => {
                if let Some((t, states)) = pending.take() {
                    snapshots.push(Snapshot::new(t, states)?);
                }
                pending = Some((time, vec![state]));
            }
        }
    }
    if let Some((t, states)) = pending {
        snapshots.push(Snapshot::new(t, states)?);
    }
    Timeline::new(snapshots)
}
