//! Longitudinal vehicle dynamics and fuel consumption.
//!
//! The force balance along the road is
//!
//! ```text
//! F_t = (m_v + m_r) dv/dt + F_r + F_a + F_g + F_hydr
//! ```
//!
//! Integrating it with traction and brake forces as input gives a speed
//! trajectory (forward approach). Differentiating a given speed trajectory
//! gives the force demand (backward approach), which is mapped through the
//! drivetrain onto an engine operating point and a fuel consumption map.

mod engine;
mod fuel;
mod motion;
mod params;

use thiserror::Error;

pub use engine::{engine_point, fuel_rate, EngineOperatingPoint, FuelMap, FuelRate};
pub use fuel::{read_speed_csv, total_fuel, FuelStep, FuelTrace, SpeedTrace};
pub use motion::{backward_forces, forward_simulate, DriveInput, ForceBreakdown, KinematicSample};
pub use params::{Gear, RoadProfile, VehicleParams};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid vehicle parameters: {0}")]
    Params(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid fuel map: {0}")]
    FuelMap(String),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
