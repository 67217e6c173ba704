use std::io::Read;

use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::Scalar;

/// One row of the gear table: `ratio` is engaged from `min_speed` upwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gear<S> {
    #[serde(rename = "min_speed_mps")]
    pub min_speed: S,
    pub ratio: S,
}

/// Physical constants of the longitudinal model.
///
/// Resistances are `F_a = aero_coeff * v²`, `F_r = rolling_coeff * cos α`
/// (zero at standstill) and `F_g = mass * gravity * sin α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct VehicleParams<S> {
    /// Vehicle mass, kg.
    #[serde(rename = "m_v_kg")]
    pub mass: S,
    /// Rotating inertias lumped into an equivalent translational mass, kg.
    #[serde(rename = "m_r_kg")]
    pub rotational_mass: S,
    /// kg/m.
    #[serde(rename = "c1")]
    pub aero_coeff: S,
    /// N.
    #[serde(rename = "c2")]
    pub rolling_coeff: S,
    #[serde(rename = "g", default = "default_gravity")]
    pub gravity: S,
    #[serde(rename = "r_w_m")]
    pub wheel_radius: S,
    #[serde(rename = "eta")]
    pub gearbox_efficiency: S,
    #[serde(rename = "gears")]
    pub gear_table: Vec<Gear<S>>,
}

fn default_gravity<S: Scalar>() -> S {
    S::lit(9.81)
}

impl<S: Scalar> VehicleParams<S> {
    /// Single-gear vehicle with no resistances other than those given.
    pub fn new(mass: S, rotational_mass: S, aero_coeff: S, rolling_coeff: S, wheel_radius: S) -> Self {
        Self {
            mass,
            rotational_mass,
            aero_coeff,
            rolling_coeff,
            gravity: default_gravity(),
            wheel_radius,
            gearbox_efficiency: S::one(),
            gear_table: vec![Gear {
                min_speed: S::zero(),
                ratio: S::one(),
            }],
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fail = |msg: String| Err(DynamicsError::Params(msg));
        let finite = [
            self.mass,
            self.rotational_mass,
            self.aero_coeff,
            self.rolling_coeff,
            self.gravity,
            self.wheel_radius,
            self.gearbox_efficiency,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("parameters must be finite".into());
        }
        if !(self.mass > S::zero()) {
            return fail(format!("m_v must be positive, got {}", self.mass));
        }
        if self.rotational_mass < S::zero() || self.aero_coeff < S::zero() || self.rolling_coeff < S::zero() {
            return fail("m_r, c1 and c2 must be non-negative".into());
        }
        if !(self.wheel_radius > S::zero()) {
            return fail(format!("wheel radius must be positive, got {}", self.wheel_radius));
        }
        if !(self.gearbox_efficiency > S::zero() && self.gearbox_efficiency <= S::one()) {
            return fail(format!("eta must lie in (0, 1], got {}", self.gearbox_efficiency));
        }
        if self.gear_table.is_empty() {
            return fail("gear table is empty".into());
        }
        if self
            .gear_table
            .iter()
            .any(|g| !(g.ratio > S::zero()) || !g.min_speed.is_finite())
        {
            return fail("gear ratios must be positive".into());
        }
        if self.gear_table.windows(2).any(|w| !(w[1].min_speed > w[0].min_speed)) {
            return fail("gear thresholds must strictly increase".into());
        }
        Ok(())
    }

    pub fn total_mass(&self) -> S {
        self.mass + self.rotational_mass
    }

    /// Highest gear whose threshold is at or below `speed`; the first gear
    /// below all thresholds.
    pub fn gear_ratio(&self, speed: S) -> S {
        let idx = self.gear_table.partition_point(|g| g.min_speed <= speed);
        self.gear_table[idx.saturating_sub(1)].ratio
    }

    pub fn aero_force(&self, speed: S) -> S {
        self.aero_coeff * speed * speed
    }

    pub fn rolling_force(&self, speed: S, alpha: S) -> S {
        if speed == S::zero() {
            S::zero()
        } else {
            self.rolling_coeff * alpha.cos()
        }
    }

    pub fn grade_force(&self, alpha: S) -> S {
        self.mass * self.gravity * alpha.sin()
    }
}

/// Road angle along the route, piecewise linear in traveled distance and held
/// constant beyond the first and last samples.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RoadProfile<S> {
    samples: Vec<(S, S)>,
}

#[derive(Deserialize)]
struct ProfileRow<S> {
    distance_m: S,
    alpha_rad: S,
}

impl<S: Scalar> RoadProfile<S> {
    pub fn flat() -> Self {
        Self { samples: Vec::new() }
    }

    /// Constant road angle everywhere.
    pub fn constant(alpha: S) -> Result<Self, DynamicsError> {
        Self::new(vec![(S::zero(), alpha)])
    }

    /// `(distance m, alpha rad)` samples with strictly increasing distance and
    /// `|alpha| < π/2`.
    pub fn new(samples: Vec<(S, S)>) -> Result<Self, DynamicsError> {
        let half_pi = S::lit(std::f64::consts::FRAC_PI_2);
        if samples.iter().any(|(d, a)| !d.is_finite() || !(a.abs() < half_pi)) {
            return Err(DynamicsError::Params("road angles must satisfy |alpha| < pi/2".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(DynamicsError::Params(
                "road profile distances must strictly increase".into(),
            ));
        }
        Ok(Self { samples })
    }

    /// Reads CSV with header `distance_m,alpha_rad`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, DynamicsError>
    where
        S: for<'de> Deserialize<'de>,
    {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let samples = reader
            .deserialize::<ProfileRow<S>>()
            .map(|row| row.map(|r| (r.distance_m, r.alpha_rad)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(S, S)] {
        &self.samples
    }

    pub fn alpha_at(&self, distance: S) -> S {
        let s = &self.samples;
        match s.len() {
            0 => S::zero(),
            1 => s[0].1,
            _ => {
                let i = s.partition_point(|&(d, _)| d <= distance);
                if i == 0 {
                    return s[0].1;
                }
                if i == s.len() {
                    return s[s.len() - 1].1;
                }
                let (d0, a0) = s[i - 1];
                let (d1, a1) = s[i];
                a0 + (a1 - a0) * (distance - d0) / (d1 - d0)
            }
        }
    }

    /// Same profile with every angle shifted by `delta`.
    pub fn shifted(&self, delta: S) -> Result<Self, DynamicsError> {
        if self.samples.is_empty() {
            return Self::constant(delta);
        }
        Self::new(self.samples.iter().map(|&(d, a)| (d, a + delta)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> VehicleParams<f64> {
        VehicleParams::new(1200.0, 50.0, 0.4, 100.0, 0.3)
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        let mut p = params();
        p.mass = 0.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.gearbox_efficiency = 1.2;
        assert!(p.validate().is_err());
        let mut p = params();
        p.gear_table.clear();
        assert!(p.validate().is_err());
        let mut p = params();
        p.gear_table = vec![
            Gear {
                min_speed: 5.0,
                ratio: 3.0,
            },
            Gear {
                min_speed: 5.0,
                ratio: 2.0,
            },
        ];
        assert!(p.validate().is_err());
        let mut p = params();
        p.rolling_coeff = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn gear_selection() {
        let mut p = params();
        p.gear_table = vec![
            Gear {
                min_speed: 2.0,
                ratio: 12.0,
            },
            Gear {
                min_speed: 8.0,
                ratio: 7.0,
            },
            Gear {
                min_speed: 15.0,
                ratio: 4.0,
            },
        ];
        assert_eq!(p.gear_ratio(0.0), 12.0);
        assert_eq!(p.gear_ratio(2.0), 12.0);
        assert_eq!(p.gear_ratio(8.0), 7.0);
        assert_eq!(p.gear_ratio(14.9), 7.0);
        assert_eq!(p.gear_ratio(40.0), 4.0);
    }

    #[test]
    fn rolling_resistance_vanishes_at_rest() {
        let p = params();
        assert_eq!(p.rolling_force(0.0, 0.1), 0.0);
        assert_eq!(p.rolling_force(1.0, 0.0), 100.0);
    }

    #[test]
    fn profile_interpolation() {
        let prof = RoadProfile::<f64>::new(vec![(0.0, 0.0), (100.0, 0.02), (200.0, -0.02)]).unwrap();
        assert_eq!(prof.alpha_at(-5.0), 0.0);
        assert_eq!(prof.alpha_at(50.0), 0.01);
        assert_eq!(prof.alpha_at(100.0), 0.02);
        assert!((prof.alpha_at(150.0) - 0.0).abs() < 1e-15);
        assert_eq!(prof.alpha_at(1e6), -0.02);
        assert_eq!(RoadProfile::<f64>::flat().alpha_at(10.0), 0.0);
    }

    #[test]
    fn profile_validation_and_csv() {
        assert!(RoadProfile::new(vec![(0.0, 0.0), (0.0, 0.1)]).is_err());
        assert!(RoadProfile::new(vec![(0.0, 1.6)]).is_err());
        let prof = RoadProfile::<f64>::from_csv("distance_m,alpha_rad\n0,0\n500,0.03\n".as_bytes()).unwrap();
        assert_eq!(prof.samples(), [(0.0, 0.0), (500.0, 0.03)]);
        assert!(RoadProfile::<f64>::from_csv("distance_m,alpha_rad\n0,x\n".as_bytes()).is_err());
    }
}
