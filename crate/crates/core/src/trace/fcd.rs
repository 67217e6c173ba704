//! SUMO floating-car-data (FCD) XML.
//!
//! ```xml
//! <fcd-export>
//!   <timestep time="0.00">
//!     <vehicle id="bus_1" x="12.5" y="40.1" speed="8.3" type="bus"/>
//!   </timestep>
//! </fcd-export>
//! ```
//!
//! Elements other than `timestep` and `vehicle` (persons, containers, ...)
//! are skipped. Any other attributes SUMO emits (`angle`, `lane`, `pos`, ...)
//! are ignored.

use std::io::{Read, Write};

use quick_xml::events::{BytesDecl, BytesStart, Event};
use quick_xml::{Reader, Writer};

use super::{ClassMap, Snapshot, Timeline, TraceError, VehicleState};
use crate::Scalar;

const ROOT: &[u8] = b"fcd-export";
const TIMESTEP: &[u8] = b"timestep";
const VEHICLE: &[u8] = b"vehicle";

/// Byte offset to 1-based line number.
struct LineIndex(Vec<usize>);

impl LineIndex {
    fn new(src: &str) -> Self {
        Self(src.match_indices('\n').map(|(i, _)| i).collect())
    }

    fn line(&self, offset: u64) -> usize {
        let offset = offset as usize;
        self.0.partition_point(|&nl| nl < offset) + 1
    }
}

struct PendingStep<S> {
    time: S,
    states: Vec<VehicleState<S>>,
}

/// Parses an FCD document into a [`Timeline`], one snapshot per `timestep`
/// element in document order.
pub fn parse_fcd<S: Scalar, R: Read>(mut input: R, classes: &ClassMap) -> Result<Timeline<S>, TraceError> {
    let mut src = String::new();
    input.read_to_string(&mut src)?;
    let lines = LineIndex::new(&src);

    let mut reader = Reader::from_str(&src);
    reader.config_mut().trim_text(true);

    let mut seen_root = false;
    let mut in_root = false;
    let mut current: Option<PendingStep<S>> = None;
    // depth of skipped unknown elements
    let mut skip_depth = 0usize;
    let mut snapshots: Vec<Snapshot<S>> = Vec::new();

    loop {
        let event = reader.read_event().map_err(|e| TraceError::Xml {
            line: lines.line(reader.error_position()),
            message: e.to_string(),
        })?;
        let line = lines.line(reader.buffer_position());
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name();
                let name = name.as_ref();
                if skip_depth > 0 {
                    if !is_empty {
                        skip_depth += 1;
                    }
                    continue;
                }
                if !in_root {
                    if name != ROOT {
                        return Err(TraceError::Structure(format!(
                            "line {line}: expected root <fcd-export>, found <{}>",
                            String::from_utf8_lossy(name)
                        )));
                    }
                    if seen_root {
                        return Err(TraceError::Structure(format!("line {line}: second <fcd-export> root")));
                    }
                    seen_root = true;
                    in_root = !is_empty;
                    continue;
                }
                match (name, current.is_some()) {
                    (TIMESTEP, false) => {
                        let time: S = required(e, "time", line)?;
                        if let Some(last) = snapshots.last() {
                            if !(time > last.time) {
                                return Err(TraceError::Structure(format!(
                                    "line {line}: timestep time {time} does not increase past {}",
                                    last.time
                                )));
                            }
                        }
                        let pending = PendingStep {
                            time,
                            states: Vec::new(),
                        };
                        if is_empty {
                            snapshots.push(Snapshot::new(pending.time, pending.states)?);
                        } else {
                            current = Some(pending);
                        }
                    }
                    (TIMESTEP, true) => {
                        return Err(TraceError::Structure(format!("line {line}: nested <timestep>")));
                    }
                    (VEHICLE, true) => {
                        let state = vehicle(e, line, classes)?;
                        current.as_mut().expect("inside timestep").states.push(state);
                        if !is_empty {
                            skip_depth = 1;
                        }
                    }
                    (VEHICLE, false) => {
                        return Err(TraceError::Structure(format!(
                            "line {line}: <vehicle> outside of a <timestep>"
                        )));
                    }
                    _ => {
                        if !is_empty {
                            skip_depth = 1;
                        }
                    }
                }
            }
            Event::End(ref e) => {
                if skip_depth > 0 {
                    skip_depth -= 1;
                    continue;
                }
                match e.name().as_ref() {
                    TIMESTEP => {
                        let step = current.take().expect("balanced timestep");
                        snapshots.push(Snapshot::new(step.time, step.states)?);
                    }
                    ROOT => in_root = false,
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if !seen_root {
        return Err(TraceError::Structure("missing <fcd-export> root element".into()));
    }
    Timeline::new(snapshots)
}

fn vehicle<S: Scalar>(e: &BytesStart<'_>, line: usize, classes: &ClassMap) -> Result<VehicleState<S>, TraceError> {
    let id: String = attribute(e, "id", line)?.ok_or_else(|| missing("vehicle", "id", line))?;
    if id.is_empty() {
        return Err(TraceError::InvalidValue {
            line,
            element: "vehicle".into(),
            attribute: "id".into(),
            value: id,
        });
    }
    let pos_x = required(e, "x", line)?;
    let pos_y = required(e, "y", line)?;
    let speed: S = required(e, "speed", line)?;
    if !(speed >= S::zero()) {
        return Err(TraceError::InvalidValue {
            line,
            element: "vehicle".into(),
            attribute: "speed".into(),
            value: speed.to_string(),
        });
    }
    let vehicle_type = attribute(e, "type", line)?;
    let state = VehicleState {
        vehicle_class: classes.classify(vehicle_type.as_deref()),
        vehicle_id: id,
        pos_x,
        pos_y,
        speed,
        vehicle_type,
    };
    state.validate()?;
    Ok(state)
}

fn element_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.name().as_ref()).into_owned()
}

fn missing(element: &str, attribute: &str, line: usize) -> TraceError {
    TraceError::MissingAttribute {
        line,
        element: element.into(),
        attribute: attribute.into(),
    }
}

fn attribute(e: &BytesStart<'_>, key: &str, line: usize) -> Result<Option<String>, TraceError> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| TraceError::Xml {
            line,
            message: err.to_string(),
        })?;
        if attr.key.as_ref() == key.as_bytes() {
            let value = attr.unescape_value().map_err(|err| TraceError::Xml {
                line,
                message: err.to_string(),
            })?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn required<S: Scalar>(e: &BytesStart<'_>, key: &str, line: usize) -> Result<S, TraceError> {
    let raw = attribute(e, key, line)?.ok_or_else(|| missing(&element_name(e), key, line))?;
    match raw.trim().parse::<S>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(TraceError::InvalidValue {
            line,
            element: element_name(e),
            attribute: key.into(),
            value: raw,
        }),
    }
}

/// Writes a timeline as FCD XML. Numbers use the shortest representation that
/// parses back to the same value.
pub fn write_fcd<S: Scalar, W: Write>(timeline: &Timeline<S>, out: W) -> Result<(), TraceError> {
    let mut writer = Writer::new_with_indent(out, b' ', 2);
    writer.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))?;
    writer.write_event(Event::Start(BytesStart::new("fcd-export")))?;
    for snap in timeline.snapshots() {
        let time = snap.time.to_string();
        let step = BytesStart::new("timestep").with_attributes([("time", time.as_str())]);
        if snap.is_empty() {
            writer.write_event(Event::Empty(step))?;
            continue;
        }
        writer.write_event(Event::Start(step.borrow()))?;
        for s in snap.states() {
            let (x, y, speed) = (s.pos_x.to_string(), s.pos_y.to_string(), s.speed.to_string());
            let ty = match &s.vehicle_type {
                Some(t) => t.as_str(),
                None => default_type(s.vehicle_class),
            };
            let el = BytesStart::new("vehicle").with_attributes([
                ("id", s.vehicle_id.as_str()),
                ("x", x.as_str()),
                ("y", y.as_str()),
                ("speed", speed.as_str()),
                ("type", ty),
            ]);
            writer.write_event(Event::Empty(el))?;
        }
        writer.write_event(Event::End(step.to_end()))?;
    }
    writer.write_event(Event::End(BytesStart::new("fcd-export").to_end()))?;
    writer.get_mut().write_all(b"\n")?;
    Ok(())
}

fn default_type(class: super::VehicleClass) -> &'static str {
    match class {
        super::VehicleClass::Bus => "bus",
        super::VehicleClass::Private => "passenger",
        super::VehicleClass::Other => "other",
    }
}
