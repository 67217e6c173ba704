//! Machine-readable exports: GeoJSON snapshots of vehicles and links, CSV
//! tables of topology metrics and fuel traces.
//!
//! Floats are written in their shortest round-trip form, so reparsing an
//! export recovers every value bit for bit.

use std::collections::HashMap;
use std::io::Write;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::dynamics::FuelTrace;
use crate::metrics::TopologyMetrics;
use crate::topology::SpanningForest;
use crate::trace::Snapshot;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("forest and snapshot disagree: {0}")]
    Consistency(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes an RFC 7946 FeatureCollection with one Point per vehicle and one
/// LineString per forest link. Coordinates are the planar trace coordinates;
/// `crs_note` names their projection when known.
pub fn export_geojson<S: Scalar, W: Write>(
    snapshot: &Snapshot<S>,
    forest: &SpanningForest<S>,
    crs_note: Option<&str>,
    mut sink: W,
) -> Result<(), ExportError> {
    let by_id: HashMap<&str, _> = snapshot.states().iter().map(|s| (s.vehicle_id.as_str(), s)).collect();
    if let Some(missing) = forest.vertices().iter().find(|v| !by_id.contains_key(v.as_str())) {
        return Err(ExportError::Consistency(format!(
            "forest vertex {missing:?} is not in the snapshot at t={}",
            snapshot.time
        )));
    }

    let mut states: Vec<_> = snapshot.states().iter().collect();
    states.sort_by(|a, b| a.vehicle_id.cmp(&b.vehicle_id));
    let mut features: Vec<Value> = states
        .iter()
        .map(|s| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [s.pos_x.as_f64(), s.pos_y.as_f64()]},
                "properties": {
                    "id": s.vehicle_id,
                    "class": s.vehicle_class.as_str(),
                    "speed": s.speed.as_f64(),
                },
            })
        })
        .collect();
    for e in forest.edges() {
        let (u, v) = (by_id[e.u.as_str()], by_id[e.v.as_str()]);
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[u.pos_x.as_f64(), u.pos_y.as_f64()], [v.pos_x.as_f64(), v.pos_y.as_f64()]],
            },
            "properties": {"u": e.u, "v": e.v, "length_m": e.length.as_f64(), "kind": e.kind},
        }));
    }

    let mut collection = Map::new();
    collection.insert("type".into(), json!("FeatureCollection"));
    collection.insert("time".into(), json!(snapshot.time.as_f64()));
    if let Some(note) = crs_note {
        collection.insert("crs_note".into(), json!(note));
    }
    collection.insert("features".into(), Value::Array(features));
    serde_json::to_writer_pretty(&mut sink, &Value::Object(collection))?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn metrics_header(bins: usize) -> Vec<String> {
    let mut header: Vec<String> = [
        "time_s",
        "vehicles",
        "edges",
        "components",
        "long_links",
        "reachability",
        "total_length_m",
        "max_degree",
    ]
    .map(String::from)
    .to_vec();
    header.extend((0..bins).map(|i| format!("bin_{i}")));
    header
}

/// One row per snapshot.
pub fn write_metrics_csv<S: Scalar, W: Write>(metrics: &TopologyMetrics<S>, sink: W) -> Result<(), ExportError> {
    let bins = metrics.snapshots.first().map_or(0, |s| s.histogram.len());
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(metrics_header(bins))?;
    for s in &metrics.snapshots {
        let mut row = vec![
            s.time.to_string(),
            s.vehicles.to_string(),
            s.edges.to_string(),
            s.components.to_string(),
            s.long_links.to_string(),
            s.reachability.to_string(),
            s.total_length.to_string(),
            s.max_degree.to_string(),
        ];
        row.extend(s.histogram.iter().map(usize::to_string));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub const FUEL_HEADER: [&str; 13] = [
    "time_s",
    "speed_mps",
    "accel_mps2",
    "traction_n",
    "brake_n",
    "aero_n",
    "rolling_n",
    "grade_n",
    "torque_nm",
    "omega_rads",
    "gear_ratio",
    "rate_gps",
    "clamped",
];

/// One row per sample of the fuel pipeline.
pub fn write_fuel_csv<S: Scalar, W: Write>(trace: &FuelTrace<S>, sink: W) -> Result<(), ExportError> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(FUEL_HEADER)?;
    for s in &trace.steps {
        out.write_record([
            s.time.to_string(),
            s.speed.to_string(),
            s.accel.to_string(),
            s.forces.traction.to_string(),
            s.forces.brake.to_string(),
            s.forces.aero.to_string(),
            s.forces.rolling.to_string(),
            s.forces.grade.to_string(),
            s.engine.torque.to_string(),
            s.engine.omega.to_string(),
            s.engine.gear_ratio.to_string(),
            s.rate.to_string(),
            s.clamped.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
