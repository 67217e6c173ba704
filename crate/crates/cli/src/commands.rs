use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use serde::Serialize;
use serde_json::{json, Value};
use v2vsim_core::dynamics::{total_fuel, SpeedTrace};
use v2vsim_core::export::{export_geojson, write_fuel_csv, write_metrics_csv};
use v2vsim_core::metrics::summarize;
use v2vsim_core::topology::{snapshot_forest, write_forests_jsonl};
use v2vsim_core::trace::ClassMap;
use v2vsim_core::{
    evolve, filter_class, parse_fcd, parse_trace_csv, route, synth_trace, write_fcd, FuelMap, RoadProfile, Timeline,
    VehicleParams,
};

use crate::config::{load_synth, FuelSection, RunConfig, TraceKind};

/// A loaded config with command-line overrides applied.
pub struct Run {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Run {
    pub fn new(config: RunConfig, seed: Option<u64>, out: Option<PathBuf>) -> Self {
        Self {
            seed: seed.unwrap_or(config.seed),
            out: out.unwrap_or_else(|| config.out.clone()),
            config,
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating output directory {}", self.out.display()))?;
        Ok(&self.out)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out_dir()?.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    /// The full timeline, all classes.
    fn timeline(&self) -> Result<Timeline> {
        let (kind, path) = self.config.trace_source()?;
        let classes = ClassMap::default();
        let open = || File::open(path).with_context(|| format!("opening trace {}", path.display()));
        let timeline = match kind {
            TraceKind::Fcd => parse_fcd(std::io::BufReader::new(open()?), &classes)
                .with_context(|| format!("in {}", path.display()))?,
            TraceKind::Csv => parse_trace_csv(open()?, &classes).with_context(|| format!("in {}", path.display()))?,
            TraceKind::Synth => {
                let synth = load_synth(path)?;
                synth_trace(&synth, self.seed).with_context(|| format!("in {}", path.display()))?
            }
        };
        info!("trace: {} snapshots, step {} s", timeline.len(), timeline.step());
        Ok(timeline)
    }

    /// Only the vehicles of the configured classes.
    fn network_timeline(&self) -> Result<Timeline> {
        Ok(filter_class(&self.timeline()?, &self.config.classes))
    }

    fn manifest(&self, command: &str, extra: Value) -> Value {
        let cfg = &self.config;
        let mut m = json!({
            "command": command,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "trace": cfg.trace_source().map(|(k, _)| k).ok(),
            "classes": cfg.classes,
            "topology": cfg.topology,
            "crs_note": cfg.crs_note,
        });
        if let Some(fuel) = &cfg.fuel {
            m["fuel"] = json!({"dt": fuel.dt, "road_profile": fuel.road_profile.is_some()});
        }
        if let (Value::Object(m), Value::Object(extra)) = (&mut m, extra) {
            m.extend(extra);
        }
        m
    }

    fn write_manifest(&self, command: &str, extra: Value) -> Result<()> {
        let mut out = self.create(&format!("manifest_{command}.json"))?;
        serde_json::to_writer_pretty(&mut out, &self.manifest(command, extra))?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

pub fn synth(run: &Run) -> Result<()> {
    if run.config.trace_source()?.0 != TraceKind::Synth {
        bail!("`synth` needs a [trace] synth entry in the config");
    }
    let timeline = run.timeline()?;
    let mut out = run.create("trace.fcd.xml")?;
    write_fcd(&timeline, &mut out)?;
    out.flush()?;
    let counts = timeline.class_counts();
    println!(
        "wrote {} snapshots to {}",
        timeline.len(),
        run.out.join("trace.fcd.xml").display()
    );
    run.write_manifest(
        "synth",
        json!({"snapshots": timeline.len(), "vehicles": counts, "outputs": ["trace.fcd.xml"]}),
    )
}

pub fn topology(run: &Run) -> Result<()> {
    let timeline = run.network_timeline()?;
    let cfg = &run.config.topology;
    let forests = evolve(&timeline, cfg)?;
    let metrics = summarize(&forests, cfg);

    let mut out = run.create("forests.jsonl")?;
    write_forests_jsonl(&forests, &mut out)?;
    out.flush()?;
    let mut out = run.create("metrics.csv")?;
    write_metrics_csv(&metrics, &mut out)?;
    out.flush()?;

    println!("snapshots: {}", forests.len());
    if let Some(a) = &metrics.aggregates {
        println!("mean vehicles: {:.3}", a.mean_vehicles);
        println!("mean links: {:.3}", a.mean_edges);
        println!("mean components: {:.3} (max {})", a.mean_components, a.max_components);
        println!("mean long links: {:.3} (max {})", a.mean_long_links, a.max_long_links);
        println!(
            "reachability: mean {:.4}, min {:.4}",
            a.mean_reachability, a.min_reachability
        );
        println!("max degree: {}", a.max_degree);
    }
    run.write_manifest(
        "topology",
        json!({"snapshots": forests.len(), "outputs": ["forests.jsonl", "metrics.csv"]}),
    )
}

#[derive(Serialize)]
struct RouteReport<'a> {
    time: f64,
    src: &'a str,
    dst: &'a str,
    #[serde(flatten)]
    result: v2vsim_core::RouteResult<f64>,
}

pub fn route_query(run: &Run, time: f64, src: &str, dst: &str) -> Result<()> {
    let timeline = run.network_timeline()?;
    let snap = timeline
        .snapshot_near(time)
        .ok_or_else(|| anyhow!("trace has no snapshots"))?;
    if snap.time != time {
        info!("using snapshot at t={} nearest to {time}", snap.time);
    }
    let forest = snapshot_forest(snap, &run.config.topology)?;
    let result = route(&forest, src, dst).with_context(|| format!("at t={}", snap.time))?;
    let report = RouteReport {
        time: snap.time,
        src,
        dst,
        result,
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

pub fn export(run: &Run, time: Option<f64>) -> Result<()> {
    let timeline = run.network_timeline()?;
    let snapshots = timeline.snapshots();
    let indices: Vec<usize> = match time {
        Some(t) => {
            let near = timeline
                .snapshot_near(t)
                .ok_or_else(|| anyhow!("trace has no snapshots"))?;
            vec![snapshots.iter().position(|s| std::ptr::eq(s, near)).unwrap()]
        }
        None => (0..snapshots.len()).collect(),
    };
    let dir = run.out_dir()?.join("geojson");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for &i in &indices {
        let snap = &snapshots[i];
        let forest = snapshot_forest(snap, &run.config.topology)?;
        let path = dir.join(format!("snapshot_{i:05}.geojson"));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        export_geojson(snap, &forest, run.config.crs_note.as_deref(), &mut out)?;
        out.flush()?;
    }
    println!("wrote {} GeoJSON files to {}", indices.len(), dir.display());
    run.write_manifest("export", json!({"time": time, "snapshots": indices}))
}

fn read_file(path: &Path, what: &str) -> Result<File> {
    File::open(path).with_context(|| format!("opening {what} {}", path.display()))
}

pub fn fuel(run: &Run, vehicle: Option<&str>) -> Result<()> {
    let section: &FuelSection = run
        .config
        .fuel
        .as_ref()
        .ok_or_else(|| anyhow!("`fuel` needs a [fuel] section in the config"))?;

    let text = fs::read_to_string(&section.vehicle)
        .with_context(|| format!("reading vehicle parameters {}", section.vehicle.display()))?;
    let params: VehicleParams =
        toml::from_str(&text).with_context(|| format!("parsing vehicle parameters {}", section.vehicle.display()))?;
    let map = FuelMap::from_csv(read_file(&section.fuel_map, "fuel map")?)
        .with_context(|| format!("in {}", section.fuel_map.display()))?;
    let profile = match &section.road_profile {
        Some(p) => {
            RoadProfile::from_csv(read_file(p, "road profile")?).with_context(|| format!("in {}", p.display()))?
        }
        None => RoadProfile::flat(),
    };

    let (label, samples) = match vehicle {
        Some(id) => {
            let samples = run.timeline()?.speed_series(id);
            if samples.is_empty() {
                bail!("vehicle {id:?} does not appear in the trace");
            }
            (id.to_owned(), samples)
        }
        None => {
            let path = section
                .speeds
                .as_ref()
                .ok_or_else(|| anyhow!("`fuel` needs --vehicle or a fuel.speeds file"))?;
            let trace = v2vsim_core::dynamics::read_speed_csv::<f64, _>(read_file(path, "speed trace")?)
                .with_context(|| format!("in {}", path.display()))?;
            let samples = trace
                .speeds
                .iter()
                .enumerate()
                .map(|(k, &v)| (k as f64 * trace.dt, v))
                .collect();
            let stem = path
                .file_stem()
                .map_or("speeds".into(), |s| s.to_string_lossy().into_owned());
            (stem, samples)
        }
    };
    let speeds = SpeedTrace::resampled(&samples, section.dt)?;
    let trace = total_fuel(&params, &profile, &map, &speeds.speeds, speeds.dt)?;
    if trace.clamped_steps() > 0 {
        warn!(
            "{} of {} samples fell outside the fuel map and were clamped",
            trace.clamped_steps(),
            trace.steps.len()
        );
    }

    let name = format!("fuel_{label}.csv");
    let mut out = run.create(&name)?;
    write_fuel_csv(&trace, &mut out)?;
    out.flush()?;
    println!("total fuel: {} g", trace.total_grams);
    run.write_manifest(
        "fuel",
        json!({
            "vehicle": label,
            "samples": trace.steps.len(),
            "clamped": trace.clamped_steps(),
            "total_g": trace.total_grams,
            "outputs": [name],
        }),
    )
}
