//! Desk-scale V2V topology and vehicle fuel simulator.
//!
//! The crate ingests vehicular mobility traces, builds a degree-capped
//! spanning forest of short-range V2V links at every trace instant, answers
//! routing queries over those forests and evaluates fuel consumption from a
//! longitudinal dynamics model. All numeric code is generic over [`Scalar`];
//! the aliases below fix it to `f64`, which is what the CLI uses.

// `!(x > 0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod export;
pub mod metrics;
pub mod routing;
pub mod scalar;
pub mod topology;
pub mod trace;

pub use scalar::Scalar;

pub use routing::{reachability_ratio, route, RouteError, RouteResult, RouteStatus};
pub use topology::{candidate_links, distance_matrix, evolve, spanning_forest, EdgeKind};
pub use trace::{filter_class, parse_fcd, parse_trace_csv, synth_trace, write_fcd, VehicleClass};

pub type VehicleState = trace::VehicleState<f64>;
pub type Snapshot = trace::Snapshot<f64>;
pub type Timeline = trace::Timeline<f64>;
pub type SynthConfig = trace::SynthConfig<f64>;

pub type DistanceMatrix = topology::DistanceMatrix<f64>;
pub type CandidateEdge = topology::CandidateEdge<f64>;
pub type TopologyConfig = topology::TopologyConfig<f64>;
pub type SpanningForest = topology::SpanningForest<f64>;

pub type VehicleParams = dynamics::VehicleParams<f64>;
pub type RoadProfile = dynamics::RoadProfile<f64>;
pub type ForceBreakdown = dynamics::ForceBreakdown<f64>;
pub type EngineOperatingPoint = dynamics::EngineOperatingPoint<f64>;
pub type FuelMap = dynamics::FuelMap<f64>;
pub type FuelTrace = dynamics::FuelTrace<f64>;

pub type TopologyMetrics = metrics::TopologyMetrics<f64>;
