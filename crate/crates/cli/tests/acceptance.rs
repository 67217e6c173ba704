//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};
use std::{fs, io};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2vsim_core::dynamics::{
    backward_forces, forward_simulate, total_fuel, DriveInput, FuelMap, RoadProfile, VehicleParams,
};
use v2vsim_core::reachability_ratio;
use v2vsim_core::topology::{candidate_links, distance_matrix, evolve, spanning_forest, TopologyConfig};
use v2vsim_core::trace::{
    parse_fcd, synth_trace, write_fcd, ClassMap, Snapshot, SynthConfig, Timeline, VehicleClass, VehicleState,
};
use v2vsim_oracles::{
    brute_force_msf, exhaustive_best_forest, forest_edges, geometric_edges, verify_forest, ForestRank,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn snapshot(points: &[(f64, f64)]) -> Snapshot<f64> {
    let states = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| VehicleState::new(format!("v{i}"), x, y, 0.0, VehicleClass::Bus).unwrap())
        .collect();
    Snapshot::new(0.0, states).unwrap()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
        .collect()
}

fn topology_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 120;
    for trial in 0..trials {
        let n = rng.gen_range(1..=7);
        let pts = random_points(&mut rng, n, 2000.0);
        let cap = (n.max(2) - 1) + rng.gen_range(0..=2);
        let cfg = TopologyConfig::new(300.0, 1000.0, cap).unwrap();
        let m = distance_matrix(&snapshot(&pts));
        let forest = spanning_forest(&candidate_links(&m, &cfg), m.ids(), &cfg).unwrap();
        let greedy = ForestRank::of(n, &forest_edges(&forest, m.ids())).total_length;
        let (_, best) = brute_force_msf(n, &geometric_edges(&pts, 300.0, 1000.0));
        check(greedy == best, || {
            format!("instance {trial}: greedy {greedy} vs brute force {best}")
        })?;
    }
    let capped = 100;
    for trial in 0..capped {
        let n = rng.gen_range(5..=7);
        let pts = random_points(&mut rng, n, 700.0);
        let cfg = TopologyConfig::new(200.0, 1000.0, 4).unwrap();
        let m = distance_matrix(&snapshot(&pts));
        let cands = candidate_links(&m, &cfg);
        let forest = spanning_forest(&cands, m.ids(), &cfg).unwrap();
        verify_forest(&forest, &cands, 4).map_err(|e| format!("capped instance {trial}: {e}"))?;
        let greedy = ForestRank::of(n, &forest_edges(&forest, m.ids()));
        let best = exhaustive_best_forest(n, &geometric_edges(&pts, 200.0, 1000.0), 4);
        check(greedy.components == best.components, || {
            format!(
                "capped instance {trial}: {} components vs optimum {}",
                greedy.components, best.components
            )
        })?;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "{trials} uncapped instances equal brute-force MST, {capped} cap-4 instances pass invariants ({:.2} s)",
        start.elapsed().as_secs_f64()
    ))
}

fn degree_cap_never_exceeded() -> Outcome {
    let start = Instant::now();
    let cfg = SynthConfig {
        vehicles: 50,
        routes: 10,
        speed_min: 4.0,
        ..SynthConfig::random_waypoint(50, 86_400.0, 10.0, [0.0, 0.0, 5000.0, 5000.0], 15.0)
    };
    let tl = synth_trace(&cfg, 56).unwrap();
    let topo = TopologyConfig::default();
    let forests = evolve(&tl, &topo).map_err(|e| e.to_string())?;
    let mut violations = 0;
    for (_, forest) in &forests {
        violations += forest
            .vertices()
            .iter()
            .filter(|v| forest.degree(v) > topo.degree_cap)
            .count();
    }
    check(violations == 0, || format!("{violations} degree violations"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "{} snapshots, 50 buses on 10 routes, 0 violations ({:.2} s)",
        forests.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn unreachability() -> Outcome {
    let west = [(0.0, 0.0), (150.0, 40.0), (90.0, 210.0), (260.0, 180.0)];
    let east = [(3000.0, 0.0), (3120.0, 90.0), (3050.0, 250.0)];
    let pts: Vec<(f64, f64)> = west.iter().chain(&east).copied().collect();
    let cfg = TopologyConfig::default();
    let m = distance_matrix(&snapshot(&pts));
    let forest = spanning_forest(&candidate_links(&m, &cfg), m.ids(), &cfg).unwrap();
    check(forest.component_count() == 2, || {
        format!("{} components", forest.component_count())
    })?;
    let n = pts.len() as f64;
    let expected = (4.0 * 3.0 + 3.0 * 2.0) / (n * (n - 1.0));
    let ratio = reachability_ratio(&forest);
    check(ratio == expected, || format!("ratio {ratio} vs {expected}"))?;
    Ok(format!("2 components, reachability {ratio} = 18/42"))
}

fn bus() -> VehicleParams<f64> {
    let mut p = VehicleParams::new(12_000.0, 800.0, 3.2, 700.0, 0.48);
    p.gearbox_efficiency = 0.9;
    p
}

fn round_trip_error(dt: f64) -> f64 {
    let p = bus();
    let flat = RoadProfile::flat();
    let steps = (60.0 / dt).round() as usize;
    let inputs: Vec<DriveInput<f64>> = (0..steps)
        .map(|k| DriveInput {
            traction: 9_000.0 + 4_000.0 * (std::f64::consts::TAU * k as f64 * dt / 25.0).sin(),
            brake: 0.0,
        })
        .collect();
    let traj = forward_simulate(&p, &flat, &inputs, 5.0, dt).unwrap();
    let speeds: Vec<f64> = traj.iter().map(|s| s.speed).collect();
    let forces = backward_forces(&p, &flat, &speeds, dt).unwrap();
    let peak = inputs.iter().map(|i| i.traction).fold(0.0, f64::max);
    (1..steps)
        .map(|k| (forces[k].traction - inputs[k].traction).abs())
        .fold(0.0, f64::max)
        / peak
}

fn forward_backward_round_trip() -> Outcome {
    let dts = [0.01, 0.005, 0.0025, 0.00125];
    let errs: Vec<f64> = dts.iter().map(|&dt| round_trip_error(dt)).collect();
    check(errs[0] <= 0.01, || format!("error {:.3e} of peak at dt 0.01", errs[0]))?;
    check(errs.windows(2).all(|w| w[1] < w[0]), || {
        format!("not monotone: {errs:?}")
    })?;
    Ok(format!(
        "max interior error / peak: {}",
        errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" > ")
    ))
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn analytic_dynamics() -> Outcome {
    let flat = RoadProfile::flat();
    let dt = 0.01;
    let tol = 1e-9;
    let mut worst: f64 = 0.0;

    let p = VehicleParams::new(1000.0, 0.0, 0.4, 100.0, 0.3);
    let rest = forward_simulate(
        &p,
        &flat,
        &vec![
            DriveInput {
                traction: 0.0,
                brake: 0.0
            };
            1000
        ],
        0.0,
        dt,
    )
    .unwrap();
    for s in &rest {
        worst = worst.max(rel_err(s.speed, 0.0)).max(rel_err(s.position, 0.0));
    }
    check(worst <= tol, || format!("rest equilibrium drifted by {worst:e}"))?;

    let p = VehicleParams::new(800.0, 200.0, 0.0, 0.0, 0.3);
    let ramp = forward_simulate(
        &p,
        &flat,
        &vec![
            DriveInput {
                traction: 1000.0,
                brake: 0.0
            };
            1000
        ],
        0.0,
        dt,
    )
    .unwrap();
    for (k, s) in ramp.iter().enumerate() {
        let e = rel_err(s.speed, k as f64 * dt);
        check(e <= tol, || {
            format!("ramp step {k}: v={} vs {}", s.speed, k as f64 * dt)
        })?;
        worst = worst.max(e);
    }

    let p = VehicleParams::new(1000.0, 0.0, 0.4, 100.0, 0.3);
    let cruise = forward_simulate(
        &p,
        &flat,
        &vec![
            DriveInput {
                traction: 260.0,
                brake: 0.0
            };
            1000
        ],
        20.0,
        dt,
    )
    .unwrap();
    for (k, s) in cruise.iter().enumerate() {
        let e = rel_err(s.speed, 20.0);
        check(e <= tol, || format!("cruise step {k}: v={}", s.speed))?;
        worst = worst.max(e);
    }
    let back = backward_forces(&p, &flat, &vec![20.0; 100], dt).unwrap();
    for f in &back[1..99] {
        let e = rel_err(f.traction, 260.0);
        check(e <= tol && f.brake == 0.0, || {
            format!("backward cruise traction {}", f.traction)
        })?;
        worst = worst.max(e);
    }
    Ok(format!("rest, ramp and cruise, worst relative error {worst:.1e}"))
}

fn willans_fuel() -> Outcome {
    let (a, b) = (0.4, 8e-5);
    let map = FuelMap::from_fn(vec![0.0, 500.0, 2500.0], vec![0.0, 150.0, 400.0], |t, w| a + b * t * w).unwrap();
    let mut p = VehicleParams::new(12_000.0, 600.0, 3.5, 800.0, 0.5);
    p.gearbox_efficiency = 0.92;
    p.gear_table[0].ratio = 3.5;
    let (v, dt, duration): (f64, f64, f64) = (15.0, 0.1, 120.0);
    let n = (duration / dt).round() as usize + 1;
    let trace = total_fuel(&p, &RoadProfile::flat(), &map, &vec![v; n], dt).unwrap();
    check(trace.clamped_steps() == 0, || "operating point left the map".into())?;
    // hand-derived: traction c1 v² + c2, engine power F v / η, rate a + b P
    let power = (3.5 * v * v + 800.0) * v / 0.92;
    let expected = (a + b * power) * duration;
    let e = rel_err(trace.total_grams, expected);
    check(e <= 1e-3, || format!("{} g vs {expected} g", trace.total_grams))?;
    Ok(format!(
        "{:.6} g vs closed form {expected:.6} g (rel {e:.1e})",
        trace.total_grams
    ))
}

fn kinetic_energy_work() -> Outcome {
    let p = VehicleParams::new(1_400.0, 60.0, 0.0, 0.0, 0.3);
    let dt = 0.01;
    let inputs: Vec<DriveInput<f64>> = (0..6000)
        .map(|k| DriveInput {
            traction: 1_500.0 + 500.0 * (k as f64 * dt / 10.0).cos(),
            brake: 0.0,
        })
        .collect();
    let traj = forward_simulate(&p, &RoadProfile::flat(), &inputs, 2.0, dt).unwrap();
    let work: f64 = inputs.iter().zip(&traj).map(|(i, s)| i.traction * s.speed * dt).sum();
    let (v0, vn) = (traj[0].speed, traj[traj.len() - 1].speed);
    let dke = 0.5 * p.total_mass() * (vn * vn - v0 * v0);
    let e = rel_err(work, dke);
    check(e <= 5e-3, || format!("work {work} J vs dKE {dke} J"))?;
    Ok(format!("work {work:.1} J vs dKE {dke:.1} J (rel {e:.1e})"))
}

fn scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/demo/run.toml")
}

fn cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_v2vsim"))
        .arg("--config")
        .arg(scenario())
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(status.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr))
    })
}

/// Relative paths of every file below `root`, sorted.
fn files_under(root: &Path) -> io::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                found.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    found.sort();
    Ok(found)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [tmp.path().join("a"), tmp.path().join("b")];
    for out in &runs {
        cli(&["synth"], out)?;
        cli(&["topology"], out)?;
        cli(&["fuel", "--vehicle", "bus_003"], out)?;
        cli(&["export"], out)?;
    }
    let a = files_under(&runs[0]).map_err(|e| e.to_string())?;
    let b = files_under(&runs[1]).map_err(|e| e.to_string())?;
    check(a == b, || "output trees list different files".into())?;
    for f in &a {
        let same = fs::read(runs[0].join(f)).unwrap() == fs::read(runs[1].join(f)).unwrap();
        check(same, || format!("{} differs", f.display()))?;
    }
    Ok(format!("{} output files byte-identical across two runs", a.len()))
}

fn fcd_round_trip() -> Outcome {
    let src = include_str!("../../../fixtures/absent_vehicles.fcd.xml");
    let tl: Timeline<f64> = parse_fcd(src.as_bytes(), &ClassMap::default()).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = tl.snapshots().iter().map(|s| s.len()).collect();
    check(sizes.contains(&0), || "fixture has no empty timestep".into())?;
    let mut buf = Vec::new();
    write_fcd(&tl, &mut buf).map_err(|e| e.to_string())?;
    let again: Timeline<f64> = parse_fcd(buf.as_slice(), &ClassMap::default()).map_err(|e| e.to_string())?;
    check(again == tl, || "re-parsed timeline differs".into())?;
    Ok(format!("snapshot sizes {sizes:?} survive parse, write, parse"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("topology oracle equivalence", topology_oracle_equivalence),
        ("degree cap never exceeded", degree_cap_never_exceeded),
        ("unreachability", unreachability),
        ("forward/backward round trip", forward_backward_round_trip),
        ("analytic dynamics", analytic_dynamics),
        ("fuel closed form", willans_fuel),
        ("kinetic energy work", kinetic_energy_work),
        ("CLI determinism", determinism),
        ("FCD round trip", fcd_round_trip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("acceptance {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
