//! JSON-lines forest dump: one object per snapshot,
//! `{"time":..,"edges":[{"u":..,"v":..,"length_m":..,"kind":..}],"components":[[..]]}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CandidateEdge, EdgeKind, SpanningForest, TopologyError};
use crate::Scalar;

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    u: String,
    v: String,
    length_m: f64,
    kind: EdgeKind,
}

#[derive(Serialize, Deserialize)]
struct ForestRecord {
    time: f64,
    edges: Vec<EdgeRecord>,
    components: Vec<Vec<String>>,
}

pub fn write_forests_jsonl<S: Scalar, W: Write>(
    forests: &[(S, SpanningForest<S>)],
    mut out: W,
) -> Result<(), TopologyError> {
    for (time, forest) in forests {
        let record = ForestRecord {
            time: time.as_f64(),
            edges: forest
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u.clone(),
                    v: e.v.clone(),
                    length_m: e.length.as_f64(),
                    kind: e.kind,
                })
                .collect(),
            components: forest.components().to_vec(),
        };
        serde_json::to_writer(&mut out, &record).map_err(|source| TopologyError::Json { line: 0, source })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_forests_jsonl<S: Scalar, R: BufRead>(input: R) -> Result<Vec<(S, SpanningForest<S>)>, TopologyError> {
    let mut forests = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ForestRecord =
            serde_json::from_str(&line).map_err(|source| TopologyError::Json { line: i + 1, source })?;
        let edges = record
            .edges
            .into_iter()
            .map(|e| CandidateEdge {
                u: e.u,
                v: e.v,
                length: S::lit(e.length_m),
                kind: e.kind,
            })
            .collect();
        forests.push((
            S::lit(record.time),
            SpanningForest::from_parts(edges, record.components)?,
        ));
    }
    Ok(forests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{evolve, TopologyConfig};
    use crate::trace::{synth_trace, SynthConfig};

    #[test]
    fn round_trip() {
        let cfg = SynthConfig::random_waypoint(8, 20.0, 1.0, [0.0, 0.0, 1500.0, 1500.0], 15.0);
        let tl = synth_trace(&cfg, 11).unwrap();
        let forests = evolve(&tl, &TopologyConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_forests_jsonl(&forests, &mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 20);
        let back: Vec<(f64, SpanningForest<f64>)> = read_forests_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, forests);
    }

    #[test]
    fn record_shape() {
        let f = SpanningForest::from_parts(
            vec![CandidateEdge {
                u: "a".into(),
                v: "b".into(),
                length: 5.0,
                kind: EdgeKind::Short,
            }],
            vec![vec!["a".into(), "b".into()], vec!["c".into()]],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_forests_jsonl(&[(2.5, f)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"time\":2.5,\"edges\":[{\"u\":\"a\",\"v\":\"b\",\"length_m\":5.0,\"kind\":\"short\"}],\"components\":[[\"a\",\"b\"],[\"c\"]]}\n"
        );
    }

    #[test]
    fn bad_line_reports_number() {
        let err = read_forests_jsonl::<f64, _>("\n{\"time\":1}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TopologyError::Json { line: 2, .. }));
    }
}
