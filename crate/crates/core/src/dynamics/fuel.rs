use std::io::Read;

use serde::{Deserialize, Serialize};

use super::motion::{demand, validate_speeds};
use super::{
    engine_point, fuel_rate, DynamicsError, EngineOperatingPoint, ForceBreakdown, FuelMap, RoadProfile, VehicleParams,
};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FuelStep<S> {
    pub time: S,
    pub speed: S,
    pub accel: S,
    pub forces: ForceBreakdown<S>,
    pub engine: EngineOperatingPoint<S>,
    /// g/s.
    pub rate: S,
    pub clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuelTrace<S> {
    pub steps: Vec<FuelStep<S>>,
    /// Trapezoidal integral of the rate trace, grams.
    pub total_grams: S,
}

impl<S> FuelTrace<S> {
    pub fn clamped_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.clamped).count()
    }
}

/// Backward approach end to end: force demand, engine operating point and
/// map lookup per sample, then trapezoidal integration of the rate.
pub fn total_fuel<S: Scalar>(
    params: &VehicleParams<S>,
    profile: &RoadProfile<S>,
    map: &FuelMap<S>,
    speeds: &[S],
    dt: S,
) -> Result<FuelTrace<S>, DynamicsError> {
    params.validate()?;
    validate_speeds(speeds, dt)?;
    let steps: Vec<FuelStep<S>> = demand(params, profile, speeds, dt)
        .into_iter()
        .zip(speeds)
        .enumerate()
        .map(|(k, ((forces, accel), &speed))| {
            let engine = engine_point(forces.traction, speed, params);
            let rate = fuel_rate(map, &engine);
            FuelStep {
                time: S::from_usize(k).unwrap() * dt,
                speed,
                accel,
                forces,
                engine,
                rate: rate.grams_per_second,
                clamped: rate.clamped,
            }
        })
        .collect();
    let half = S::lit(0.5);
    let total_grams = steps
        .windows(2)
        .fold(S::zero(), |acc, w| acc + (w[0].rate + w[1].rate) * half * dt);
    Ok(FuelTrace { steps, total_grams })
}

/// A uniformly sampled speed trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedTrace<S> {
    pub dt: S,
    pub speeds: Vec<S>,
}

#[derive(Deserialize)]
struct SpeedRow<S> {
    time: S,
    speed: S,
}

impl<S: Scalar> SpeedTrace<S> {
    /// Builds a trace from `(time, speed)` samples, which must be evenly
    /// spaced to within 1e-6 relative.
    pub fn from_samples(samples: &[(S, S)]) -> Result<Self, DynamicsError> {
        if samples.len() < 2 {
            return Err(DynamicsError::Input(format!(
                "need at least 2 speed samples, got {}",
                samples.len()
            )));
        }
        let n = S::from_usize(samples.len() - 1).unwrap();
        let dt = (samples[samples.len() - 1].0 - samples[0].0) / n;
        if !(dt > S::zero()) {
            return Err(DynamicsError::Input("speed sample times must increase".into()));
        }
        let tol = S::lit(1e-6) * dt;
        for w in samples.windows(2) {
            if ((w[1].0 - w[0].0) - dt).abs() > tol {
                return Err(DynamicsError::Input(format!(
                    "speed samples are not evenly spaced: gap {} at t={} vs nominal {dt}",
                    w[1].0 - w[0].0,
                    w[0].0
                )));
            }
        }
        Ok(Self {
            dt,
            speeds: samples.iter().map(|s| s.1).collect(),
        })
    }

    /// Linearly interpolates `(time, speed)` samples onto a uniform grid of
    /// spacing `dt` starting at the first sample. The grid stops at the last
    /// grid point not beyond the final sample.
    pub fn resampled(samples: &[(S, S)], dt: S) -> Result<Self, DynamicsError> {
        if !(dt > S::zero()) || !dt.is_finite() {
            return Err(DynamicsError::Config(format!("time step must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(DynamicsError::Input(format!(
                "need at least 2 speed samples, got {}",
                samples.len()
            )));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(DynamicsError::Input("speed sample times must strictly increase".into()));
        }
        let (t0, t_end) = (samples[0].0, samples[samples.len() - 1].0);
        // tolerate rounding so an end time that is a whole number of steps is kept
        let steps = ((t_end - t0) / dt + S::lit(1e-9)).floor().to_usize().unwrap_or(0);
        let mut speeds = Vec::with_capacity(steps + 1);
        let mut seg = 0;
        for k in 0..=steps {
            let t = (t0 + S::from_usize(k).unwrap() * dt).min(t_end);
            while seg + 2 < samples.len() && samples[seg + 1].0 < t {
                seg += 1;
            }
            let (ta, va) = samples[seg];
            let (tb, vb) = samples[seg + 1];
            let f = ((t - ta) / (tb - ta)).max(S::zero()).min(S::one());
            speeds.push(va + (vb - va) * f);
        }
        if speeds.len() < 2 {
            return Err(DynamicsError::Input(format!(
                "speed trace spans less than one step of {dt} s"
            )));
        }
        Ok(Self { dt, speeds })
    }
}

/// Reads CSV with header `time,speed`.
pub fn read_speed_csv<S, R>(input: R) -> Result<SpeedTrace<S>, DynamicsError>
where
    S: Scalar + for<'de> Deserialize<'de>,
    R: Read,
{
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let samples = reader
        .deserialize::<SpeedRow<S>>()
        .map(|r| r.map(|r| (r.time, r.speed)))
        .collect::<Result<Vec<_>, _>>()?;
    SpeedTrace::from_samples(&samples)
}
