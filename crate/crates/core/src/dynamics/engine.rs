use std::io::Read;

use serde::Serialize;

use super::{DynamicsError, VehicleParams};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EngineOperatingPoint<S> {
    /// N·m.
    pub torque: S,
    /// rad/s.
    pub omega: S,
    pub gear_ratio: S,
}

/// Engine torque `F_t R_w / (η γ)` and speed `v γ / R_w`, with `γ` taken from
/// the gear table at speed `v`.
pub fn engine_point<S: Scalar>(traction: S, speed: S, params: &VehicleParams<S>) -> EngineOperatingPoint<S> {
    let gamma = params.gear_ratio(speed);
    EngineOperatingPoint {
        torque: traction * params.wheel_radius / (params.gearbox_efficiency * gamma),
        omega: speed * gamma / params.wheel_radius,
        gear_ratio: gamma,
    }
}

/// Instantaneous fuel rate in g/s tabulated over engine torque (rows) and
/// engine speed (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct FuelMap<S> {
    torque_axis: Vec<S>,
    omega_axis: Vec<S>,
    rates: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FuelRate<S> {
    pub grams_per_second: S,
    /// The query fell outside the map and was moved onto its boundary.
    pub clamped: bool,
}

impl<S: Scalar> FuelMap<S> {
    /// `rates[i][j]` is the rate at `torque_axis[i]`, `omega_axis[j]`.
    pub fn new(torque_axis: Vec<S>, omega_axis: Vec<S>, rates: Vec<Vec<S>>) -> Result<Self, DynamicsError> {
        let fail = |msg: String| Err(DynamicsError::FuelMap(msg));
        for (name, axis) in [("torque", &torque_axis), ("omega", &omega_axis)] {
            if axis.len() < 2 {
                return fail(format!("{name} axis needs at least 2 points"));
            }
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return fail(format!("{name} axis must be finite and strictly increasing"));
            }
        }
        if rates.len() != torque_axis.len() || rates.iter().any(|r| r.len() != omega_axis.len()) {
            return fail(format!("rate table must be {}x{}", torque_axis.len(), omega_axis.len()));
        }
        let rates: Vec<S> = rates.into_iter().flatten().collect();
        if rates.iter().any(|r| !(*r >= S::zero()) || !r.is_finite()) {
            return fail("rates must be finite and non-negative".into());
        }
        Ok(Self {
            torque_axis,
            omega_axis,
            rates,
        })
    }

    /// Builds a map by evaluating `f(torque, omega)` at every grid node.
    pub fn from_fn(torque_axis: Vec<S>, omega_axis: Vec<S>, f: impl Fn(S, S) -> S) -> Result<Self, DynamicsError> {
        let rates = torque_axis
            .iter()
            .map(|&t| omega_axis.iter().map(|&w| f(t, w)).collect())
            .collect();
        Self::new(torque_axis, omega_axis, rates)
    }

    /// Reads CSV whose first row holds the omega axis (after one leading
    /// corner cell) and whose first column holds the torque axis.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, DynamicsError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut rows = reader.records();
        let parse = |cell: &str, line: u64| -> Result<S, DynamicsError> {
            cell.parse::<S>()
                .map_err(|_| DynamicsError::FuelMap(format!("line {line}: not a number: {cell:?}")))
        };
        let header = rows
            .next()
            .ok_or_else(|| DynamicsError::FuelMap("empty fuel map".into()))??;
        let omega_axis = header
            .iter()
            .skip(1)
            .map(|c| parse(c, 1))
            .collect::<Result<Vec<_>, _>>()?;
        let mut torque_axis = Vec::new();
        let mut rates = Vec::new();
        for row in rows {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let mut cells = row.iter();
            let torque = parse(cells.next().unwrap_or(""), line)?;
            torque_axis.push(torque);
            rates.push(cells.map(|c| parse(c, line)).collect::<Result<Vec<_>, _>>()?);
        }
        Self::new(torque_axis, omega_axis, rates)
    }

    pub fn torque_axis(&self) -> &[S] {
        &self.torque_axis
    }

    pub fn omega_axis(&self) -> &[S] {
        &self.omega_axis
    }

    pub fn rate(&self, i: usize, j: usize) -> S {
        self.rates[i * self.omega_axis.len() + j]
    }
}

/// Clamps `x` onto `axis` and returns the lower cell index and the fraction
/// within that cell.
fn locate<S: Scalar>(axis: &[S], x: S) -> (usize, S, bool) {
    let (lo, hi) = (axis[0], axis[axis.len() - 1]);
    let clamped = !(x >= lo && x <= hi);
    let x = if x.is_nan() { lo } else { x.max(lo).min(hi) };
    let i = axis.partition_point(|&a| a <= x).clamp(1, axis.len() - 1) - 1;
    let frac = (x - axis[i]) / (axis[i + 1] - axis[i]);
    (i, frac, clamped)
}

/// Bilinear interpolation of the fuel map. Queries outside the grid use the
/// nearest boundary value and are flagged.
pub fn fuel_rate<S: Scalar>(map: &FuelMap<S>, point: &EngineOperatingPoint<S>) -> FuelRate<S> {
    let (i, ft, ct) = locate(&map.torque_axis, point.torque);
    let (j, fw, cw) = locate(&map.omega_axis, point.omega);
    let one = S::one();
    let r00 = map.rate(i, j);
    let r01 = map.rate(i, j + 1);
    let r10 = map.rate(i + 1, j);
    let r11 = map.rate(i + 1, j + 1);
    let rate = r00 * (one - ft) * (one - fw) + r01 * (one - ft) * fw + r10 * ft * (one - fw) + r11 * ft * fw;
    FuelRate {
        grams_per_second: rate.max(S::zero()),
        clamped: ct || cw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(torque: f64, omega: f64) -> EngineOperatingPoint<f64> {
        EngineOperatingPoint {
            torque,
            omega,
            gear_ratio: 1.0,
        }
    }

    fn map() -> FuelMap<f64> {
        FuelMap::new(
            vec![0.0, 100.0, 300.0],
            vec![0.0, 200.0, 400.0],
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 5.0], vec![2.0, 6.0, 9.0]],
        )
        .unwrap()
    }

    #[test]
    fn engine_formulas() {
        let mut p = VehicleParams::<f64>::new(1000.0, 0.0, 0.0, 0.0, 0.3);
        let e = engine_point(100.0, 5.0, &p);
        assert!((e.torque - 30.0).abs() < 1e-12);
        p.gear_table[0].ratio = 3.0;
        let e = engine_point(0.0, 10.0, &p);
        assert!((e.omega - 100.0).abs() < 1e-12);
        assert_eq!(e.torque, 0.0);
        p.gearbox_efficiency = 0.5;
        let e = engine_point(90.0, 0.0, &p);
        assert!((e.torque - 90.0 * 0.3 / 1.5).abs() < 1e-12);
        assert_eq!(e.omega, 0.0);
    }

    #[test]
    fn grid_nodes_are_exact() {
        let m = map();
        for (i, &t) in m.torque_axis().iter().enumerate() {
            for (j, &w) in m.omega_axis().iter().enumerate() {
                let r = fuel_rate(&m, &pt(t, w));
                assert_eq!(r.grams_per_second, m.rate(i, j));
                assert!(!r.clamped);
            }
        }
    }

    #[test]
    fn cell_center() {
        let m = FuelMap::new(vec![0.0, 10.0], vec![0.0, 10.0], vec![vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap();
        assert_eq!(fuel_rate(&m, &pt(5.0, 5.0)).grams_per_second, 2.0);
    }

    #[test]
    fn clamping_is_flagged() {
        let m = map();
        let r = fuel_rate(&m, &pt(1000.0, 200.0));
        assert!(r.clamped);
        assert_eq!(r.grams_per_second, 6.0);
        let r = fuel_rate(&m, &pt(50.0, -10.0));
        assert!(r.clamped);
        assert_eq!(r.grams_per_second, 0.5);
    }

    #[test]
    fn validation() {
        assert!(FuelMap::new(vec![0.0], vec![0.0, 1.0], vec![vec![0.0, 0.0]]).is_err());
        assert!(FuelMap::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![vec![0.0; 2]; 2]).is_err());
        assert!(FuelMap::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0; 3]; 2]).is_err());
        assert!(FuelMap::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0, -1.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn csv_layout() {
        let src = "torque\\omega,0,200,400\n0,0,1,2\n100,1,3,5\n300,2,6,9\n";
        assert_eq!(FuelMap::<f64>::from_csv(src.as_bytes()).unwrap(), map());
        assert!(FuelMap::<f64>::from_csv("x,0,1\n0,a,1\n1,1,1\n".as_bytes()).is_err());
        assert!(FuelMap::<f64>::from_csv("".as_bytes()).is_err());
    }
}
