use serde::Serialize;

use super::{DynamicsError, RoadProfile, VehicleParams};
use crate::Scalar;

/// Traction and hydraulic brake force applied over one integration step, N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveInput<S> {
    pub traction: S,
    pub brake: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KinematicSample<S> {
    pub time: S,
    pub speed: S,
    pub position: S,
}

/// Per-step decomposition of the force balance, all in N.
///
/// `traction` and `brake` are never both positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForceBreakdown<S> {
    pub traction: S,
    pub brake: S,
    pub aero: S,
    pub rolling: S,
    pub grade: S,
}

fn check_dt<S: Scalar>(dt: S) -> Result<(), DynamicsError> {
    if dt > S::zero() && dt.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::Config(format!("time step must be positive, got {dt}")))
    }
}

/// Explicit Euler integration of the force balance.
///
/// Returns `inputs.len() + 1` samples starting at `v0`. Speed is clamped at
/// zero and the road angle is looked up at the current position.
pub fn forward_simulate<S: Scalar>(
    params: &VehicleParams<S>,
    profile: &RoadProfile<S>,
    inputs: &[DriveInput<S>],
    v0: S,
    dt: S,
) -> Result<Vec<KinematicSample<S>>, DynamicsError> {
    params.validate()?;
    check_dt(dt)?;
    if !(v0 >= S::zero()) || !v0.is_finite() {
        return Err(DynamicsError::Input(format!(
            "initial speed must be non-negative, got {v0}"
        )));
    }
    if let Some(k) = inputs
        .iter()
        .position(|i| !i.traction.is_finite() || !i.brake.is_finite())
    {
        return Err(DynamicsError::Input(format!("non-finite force at step {k}")));
    }

    let mass = params.total_mass();
    let mut out = Vec::with_capacity(inputs.len() + 1);
    let (mut speed, mut position) = (v0, S::zero());
    out.push(KinematicSample {
        time: S::zero(),
        speed,
        position,
    });
    for (k, input) in inputs.iter().enumerate() {
        let alpha = profile.alpha_at(position);
        let resist = params.rolling_force(speed, alpha) + params.aero_force(speed) + params.grade_force(alpha);
        let accel = (input.traction - input.brake - resist) / mass;
        position = position + speed * dt;
        speed = (speed + accel * dt).max(S::zero());
        out.push(KinematicSample {
            time: S::from_usize(k + 1).unwrap() * dt,
            speed,
            position,
        });
    }
    Ok(out)
}

/// Acceleration by central differences, one-sided at both ends.
pub(crate) fn accelerations<S: Scalar>(speeds: &[S], dt: S) -> Vec<S> {
    let n = speeds.len();
    let two = S::lit(2.0);
    (0..n)
        .map(|k| match k {
            0 => (speeds[1] - speeds[0]) / dt,
            k if k == n - 1 => (speeds[n - 1] - speeds[n - 2]) / dt,
            k => (speeds[k + 1] - speeds[k - 1]) / (two * dt),
        })
        .collect()
}

/// Distance traveled at each sample, trapezoidal in speed.
pub(crate) fn positions<S: Scalar>(speeds: &[S], dt: S) -> Vec<S> {
    let half = S::lit(0.5);
    let mut pos = Vec::with_capacity(speeds.len());
    let mut x = S::zero();
    pos.push(x);
    for w in speeds.windows(2) {
        x = x + (w[0] + w[1]) * half * dt;
        pos.push(x);
    }
    pos
}

pub(crate) fn validate_speeds<S: Scalar>(speeds: &[S], dt: S) -> Result<(), DynamicsError> {
    check_dt(dt)?;
    if speeds.len() < 2 {
        return Err(DynamicsError::Input(format!(
            "need at least 2 speed samples, got {}",
            speeds.len()
        )));
    }
    if let Some(k) = speeds.iter().position(|v| !(*v >= S::zero()) || !v.is_finite()) {
        return Err(DynamicsError::Input(format!(
            "speed sample {k} is negative or not finite: {}",
            speeds[k]
        )));
    }
    Ok(())
}

/// Force demand along a sampled speed trace.
///
/// Positive demand is delivered by traction, negative demand is absorbed by
/// the hydraulic brake; there is no engine braking.
pub fn backward_forces<S: Scalar>(
    params: &VehicleParams<S>,
    profile: &RoadProfile<S>,
    speeds: &[S],
    dt: S,
) -> Result<Vec<ForceBreakdown<S>>, DynamicsError> {
    params.validate()?;
    validate_speeds(speeds, dt)?;
    Ok(demand(params, profile, speeds, dt)
        .into_iter()
        .map(|(f, _)| f)
        .collect())
}

/// Force breakdown together with the acceleration it was derived from.
pub(crate) fn demand<S: Scalar>(
    params: &VehicleParams<S>,
    profile: &RoadProfile<S>,
    speeds: &[S],
    dt: S,
) -> Vec<(ForceBreakdown<S>, S)> {
    let mass = params.total_mass();
    let acc = accelerations(speeds, dt);
    let pos = positions(speeds, dt);
    speeds
        .iter()
        .zip(acc)
        .zip(pos)
        .map(|((&v, a), x)| {
            let alpha = profile.alpha_at(x);
            let aero = params.aero_force(v);
            let rolling = params.rolling_force(v, alpha);
            let grade = params.grade_force(alpha);
            let total = mass * a + rolling + aero + grade;
            let (traction, brake) = if total >= S::zero() {
                (total, S::zero())
            } else {
                (S::zero(), -total)
            };
            let breakdown = ForceBreakdown {
                traction,
                brake,
                aero,
                rolling,
                grade,
            };
            (breakdown, a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(traction: f64, n: usize) -> Vec<DriveInput<f64>> {
        vec![DriveInput { traction, brake: 0.0 }; n]
    }

    #[test]
    fn rest_equilibrium() {
        let p = VehicleParams::new(1500.0, 60.0, 0.4, 120.0, 0.3);
        let out = forward_simulate(&p, &RoadProfile::flat(), &constant(0.0, 50), 0.0, 0.1).unwrap();
        assert_eq!(out.len(), 51);
        assert!(out.iter().all(|s| s.speed == 0.0 && s.position == 0.0));
    }

    #[test]
    fn newton_ramp() {
        let p = VehicleParams::new(900.0, 100.0, 0.0, 0.0, 0.3);
        let dt = 0.1;
        let out = forward_simulate(&p, &RoadProfile::flat(), &constant(1000.0, 100), 0.0, dt).unwrap();
        for s in &out {
            assert!((s.speed - s.time).abs() <= 1e-9 * s.time.max(1.0), "{s:?}");
        }
    }

    #[test]
    fn cruise_force_balance() {
        let p = VehicleParams::new(1000.0, 0.0, 0.4, 100.0, 0.3);
        let out = forward_simulate(&p, &RoadProfile::flat(), &constant(260.0, 200), 20.0, 0.1).unwrap();
        assert!(out.iter().all(|s| s.speed == 20.0));
        assert!((out.last().unwrap().position - 400.0).abs() < 1e-9);
    }

    #[test]
    fn braking_never_reverses() {
        let p = VehicleParams::new(1000.0, 0.0, 0.0, 0.0, 0.3);
        let inputs = vec![
            DriveInput {
                traction: 0.0,
                brake: 5000.0
            };
            20
        ];
        let out = forward_simulate(&p, &RoadProfile::flat(), &inputs, 3.0, 0.1).unwrap();
        assert!(out.iter().all(|s| s.speed >= 0.0));
        assert_eq!(out.last().unwrap().speed, 0.0);
    }

    #[test]
    fn uphill_slows_down() {
        let p = VehicleParams::new(1000.0, 0.0, 0.0, 0.0, 0.3);
        let hill = RoadProfile::constant(0.05).unwrap();
        let out = forward_simulate(&p, &hill, &constant(0.0, 10), 10.0, 0.1).unwrap();
        let expected = 10.0 - 9.81 * 0.05f64.sin() * 1.0;
        assert!((out[10].speed - expected).abs() < 1e-9);
    }

    #[test]
    fn forward_errors() {
        let p = VehicleParams::new(1000.0, 0.0, 0.0, 0.0, 0.3);
        let flat = RoadProfile::flat();
        assert!(matches!(
            forward_simulate(&p, &flat, &constant(1.0, 2), 0.0, 0.0),
            Err(DynamicsError::Config(_))
        ));
        assert!(matches!(
            forward_simulate(&p, &flat, &constant(f64::NAN, 2), 0.0, 0.1),
            Err(DynamicsError::Input(_))
        ));
        assert!(matches!(
            forward_simulate(&p, &flat, &constant(1.0, 2), -1.0, 0.1),
            Err(DynamicsError::Input(_))
        ));
    }

    #[test]
    fn constant_speed_demand() {
        let p = VehicleParams::new(1000.0, 40.0, 0.4, 100.0, 0.3);
        let f = backward_forces(&p, &RoadProfile::flat(), &[15.0; 10], 0.1).unwrap();
        for b in &f {
            assert_eq!(b.traction, 0.4 * 225.0 + 100.0);
            assert_eq!(b.brake, 0.0);
        }
    }

    #[test]
    fn hard_deceleration_brakes() {
        let p = VehicleParams::new(1000.0, 40.0, 0.4, 100.0, 0.3);
        let speeds: Vec<f64> = (0..10).map(|k| 20.0 - 2.0 * k as f64).collect();
        let f = backward_forces(&p, &RoadProfile::flat(), &speeds, 0.5).unwrap();
        for b in &f {
            assert_eq!(b.traction, 0.0);
            assert!(b.brake > 0.0);
        }
    }

    #[test]
    fn backward_errors() {
        let p = VehicleParams::new(1000.0, 0.0, 0.0, 0.0, 0.3);
        let flat = RoadProfile::flat();
        assert!(matches!(
            backward_forces(&p, &flat, &[1.0, -0.5], 0.1),
            Err(DynamicsError::Input(_))
        ));
        assert!(matches!(
            backward_forces(&p, &flat, &[1.0], 0.1),
            Err(DynamicsError::Input(_))
        ));
        assert!(matches!(
            backward_forces(&p, &flat, &[1.0, 1.0], 0.0),
            Err(DynamicsError::Config(_))
        ));
    }

    #[test]
    fn difference_scheme() {
        let a = accelerations(&[0.0, 1.0, 4.0, 9.0], 1.0);
        assert_eq!(a, [1.0, 2.0, 4.0, 5.0]);
        assert_eq!(positions(&[0.0, 2.0, 2.0], 0.5), [0.0, 0.5, 1.5]);
    }
}
