//! Deterministic synthetic traces.
//!
//! Two mobility models share one generator. Buses either follow closed
//! polyline routes (`routes > 0`) or, without routes, move by random
//! waypoint; background private vehicles always move by random waypoint.
//! Vehicles travel in straight lines at constant per-leg speed, so the
//! distance covered in one step never exceeds `speed_max * step`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Snapshot, Timeline, TraceError, VehicleClass, VehicleState};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig<S> {
    /// Number of buses.
    pub vehicles: usize,
    /// Additional background private vehicles.
    #[serde(default)]
    pub private_vehicles: usize,
    /// Number of bus routes; 0 puts buses on random waypoint too.
    #[serde(default)]
    pub routes: usize,
    /// Corner points per route loop.
    #[serde(default = "default_route_waypoints")]
    pub route_waypoints: usize,
    /// Seconds. Snapshots are taken at `k * step` for `k * step < duration`.
    pub duration: S,
    pub step: S,
    /// `[min_x, min_y, max_x, max_y]` in meters.
    pub bbox: [S; 4],
    pub speed_min: S,
    pub speed_max: S,
}

fn default_route_waypoints() -> usize {
    6
}

impl<S: Scalar> SynthConfig<S> {
    pub fn random_waypoint(vehicles: usize, duration: S, step: S, bbox: [S; 4], speed_max: S) -> Self {
        Self {
            vehicles,
            private_vehicles: 0,
            routes: 0,
            route_waypoints: default_route_waypoints(),
            duration,
            step,
            bbox,
            speed_min: S::zero(),
            speed_max,
        }
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let bad = |msg: &str| Err(TraceError::Config(msg.to_owned()));
        if self.vehicles == 0 {
            return bad("vehicle count must be positive");
        }
        if !(self.duration > S::zero()) || !self.duration.is_finite() {
            return bad("duration must be positive");
        }
        if !(self.step > S::zero()) || !self.step.is_finite() {
            return bad("step must be positive");
        }
        let [x0, y0, x1, y1] = self.bbox;
        if !(x1 > x0 && y1 > y0) || self.bbox.iter().any(|v| !v.is_finite()) {
            return bad("bounding box must have max > min on both axes");
        }
        if !(self.speed_min >= S::zero() && self.speed_max >= self.speed_min) || !self.speed_max.is_finite() {
            return bad("speed range must satisfy 0 <= speed_min <= speed_max");
        }
        if self.routes > 0 && self.route_waypoints < 2 {
            return bad("routes need at least 2 waypoints");
        }
        Ok(())
    }

    pub fn snapshot_count(&self) -> usize {
        (self.duration / self.step).ceil().to_usize().unwrap_or(0)
    }
}

type Point<S> = (S, S);

fn dist<S: Scalar>(a: Point<S>, b: Point<S>) -> S {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn lerp<S: Scalar>(a: Point<S>, b: Point<S>, f: S) -> Point<S> {
    (a.0 + (b.0 - a.0) * f, a.1 + (b.1 - a.1) * f)
}

struct Sampler<'a, S> {
    rng: ChaCha8Rng,
    cfg: &'a SynthConfig<S>,
}

impl<S: Scalar> Sampler<'_, S> {
    fn point(&mut self) -> Point<S> {
        let [x0, y0, x1, y1] = self.cfg.bbox.map(Scalar::as_f64);
        (S::lit(self.rng.gen_range(x0..=x1)), S::lit(self.rng.gen_range(y0..=y1)))
    }

    fn speed(&mut self) -> S {
        let (lo, hi) = (self.cfg.speed_min.as_f64(), self.cfg.speed_max.as_f64());
        S::lit(self.rng.gen_range(lo..=hi)).min(self.cfg.speed_max)
    }

    fn fraction(&mut self) -> S {
        S::lit(self.rng.gen_range(0.0..1.0))
    }
}

enum Motion<S> {
    Waypoint { pos: Point<S>, target: Point<S>, speed: S },
    Route { route: usize, arc: S, speed: S },
}

struct Route<S> {
    corners: Vec<Point<S>>,
    /// cumulative arc length at each corner, closing segment included
    cumulative: Vec<S>,
}

impl<S: Scalar> Route<S> {
    fn new(corners: Vec<Point<S>>) -> Self {
        let mut cumulative = vec![S::zero()];
        for i in 0..corners.len() {
            let next = corners[(i + 1) % corners.len()];
            let last = *cumulative.last().unwrap();
            cumulative.push(last + dist(corners[i], next));
        }
        Self { corners, cumulative }
    }

    fn length(&self) -> S {
        *self.cumulative.last().unwrap()
    }

    fn at(&self, arc: S) -> Point<S> {
        let n = self.corners.len();
        let seg = self.cumulative[1..].partition_point(|&c| c <= arc).min(n - 1);
        let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
        if seg_len <= S::zero() {
            return self.corners[seg];
        }
        let f = ((arc - self.cumulative[seg]) / seg_len).max(S::zero()).min(S::one());
        lerp(self.corners[seg], self.corners[(seg + 1) % n], f)
    }
}

/// Generates a synthetic timeline. Identical `(config, seed)` pairs give
/// identical timelines.
pub fn synth_trace<S: Scalar>(config: &SynthConfig<S>, seed: u64) -> Result<Timeline<S>, TraceError> {
    config.validate()?;
    let mut sampler = Sampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg: config,
    };

    let routes: Vec<Route<S>> = (0..config.routes)
        .map(|_| Route::new((0..config.route_waypoints).map(|_| sampler.point()).collect()))
        .collect();

    let mut vehicles: Vec<(String, String, VehicleClass, Motion<S>)> = Vec::new();
    let width = (config.vehicles + config.private_vehicles).to_string().len().max(3);
    for k in 0..config.vehicles {
        let id = format!("bus_{k:0width$}");
        if routes.is_empty() {
            let motion = Motion::Waypoint {
                pos: sampler.point(),
                target: sampler.point(),
                speed: sampler.speed(),
            };
            vehicles.push((id, "bus".into(), VehicleClass::Bus, motion));
        } else {
            let route = k % routes.len();
            let arc = sampler.fraction() * routes[route].length();
            let motion = Motion::Route {
                route,
                arc,
                speed: sampler.speed(),
            };
            vehicles.push((id, format!("bus_line_{route}"), VehicleClass::Bus, motion));
        }
    }
    for k in 0..config.private_vehicles {
        let motion = Motion::Waypoint {
            pos: sampler.point(),
            target: sampler.point(),
            speed: sampler.speed(),
        };
        vehicles.push((
            format!("veh_{k:0width$}"),
            "passenger".into(),
            VehicleClass::Private,
            motion,
        ));
    }

    let [x0, y0, x1, y1] = config.bbox;
    let clamp = |p: Point<S>| (p.0.max(x0).min(x1), p.1.max(y0).min(y1));
    let count = config.snapshot_count();
    let mut snapshots = Vec::with_capacity(count);
    for i in 0..count {
        let time = S::from_usize(i).expect("snapshot index fits scalar") * config.step;
        let mut states = Vec::with_capacity(vehicles.len());
        for (id, ty, class, motion) in &vehicles {
            let (pos, speed) = match motion {
                Motion::Waypoint { pos, speed, .. } => (*pos, *speed),
                Motion::Route { route, arc, speed } => (routes[*route].at(*arc), *speed),
            };
            let pos = clamp(pos);
            states.push(VehicleState {
                vehicle_id: id.clone(),
                pos_x: pos.0,
                pos_y: pos.1,
                speed,
                vehicle_class: *class,
                vehicle_type: Some(ty.clone()),
            });
        }
        snapshots.push(Snapshot::new(time, states)?);

        for (_, _, _, motion) in vehicles.iter_mut() {
            advance(motion, config.step, &routes, &mut sampler);
        }
    }
    Timeline::new(snapshots)
}

fn advance<S: Scalar>(motion: &mut Motion<S>, step: S, routes: &[Route<S>], sampler: &mut Sampler<'_, S>) {
    match motion {
        Motion::Route { route, arc, speed } => {
            let len = routes[*route].length();
            if len > S::zero() {
                *arc = (*arc + *speed * step) % len;
            }
        }
        Motion::Waypoint { pos, target, speed } => {
            let mut remaining = step;
            // bounded so a zero-length leg cannot spin forever
            for _ in 0..64 {
                if !(*speed > S::zero()) {
                    return;
                }
                let d = dist(*pos, *target);
                let needed = d / *speed;
                if needed > remaining {
                    *pos = lerp(*pos, *target, remaining * *speed / d);
                    return;
                }
                *pos = *target;
                remaining = remaining - needed;
                *target = sampler.point();
                *speed = sampler.speed();
            }
        }
    }
}
