//! Run configuration file (TOML).
//!
//! ```toml
//! seed = 42
//! out = "out"
//! classes = ["bus"]
//! crs_note = "EPSG:32632"
//!
//! [trace]
//! synth = "synth.toml"     # or: fcd = "trace.xml" / csv = "trace.csv"
//!
//! [topology]
//! r_p_m = 300.0
//! r_max_m = 1000.0
//! degree_cap = 4
//!
//! [fuel]
//! vehicle = "bus.toml"
//! fuel_map = "fuel_map.csv"
//! road_profile = "road.csv"
//! speeds = "speed.csv"
//! dt = 0.1
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use v2vsim_core::{SynthConfig, TopologyConfig, VehicleClass};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_classes")]
    pub classes: Vec<VehicleClass>,
    pub crs_note: Option<String>,
    pub trace: TraceSource,
    #[serde(default)]
    pub topology: TopologyConfig,
    pub fuel: Option<FuelSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSource {
    pub fcd: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub synth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Fcd,
    Csv,
    Synth,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuelSection {
    pub vehicle: PathBuf,
    pub fuel_map: PathBuf,
    pub road_profile: Option<PathBuf>,
    /// Standalone `time,speed` CSV, used when no `--vehicle` is given.
    pub speeds: Option<PathBuf>,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_classes() -> Vec<VehicleClass> {
    vec![VehicleClass::Bus]
}

fn default_dt() -> f64 {
    0.1
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.out);
        for p in [&mut self.trace.fcd, &mut self.trace.csv, &mut self.trace.synth]
            .into_iter()
            .flatten()
        {
            join(p);
        }
        if let Some(fuel) = &mut self.fuel {
            join(&mut fuel.vehicle);
            join(&mut fuel.fuel_map);
            for p in [&mut fuel.road_profile, &mut fuel.speeds].into_iter().flatten() {
                join(p);
            }
        }
    }

    fn validate(&self) -> Result<()> {
        self.trace_source()?;
        self.topology.validate()?;
        if let Some(fuel) = &self.fuel {
            if !(fuel.dt > 0.0 && fuel.dt.is_finite()) {
                bail!("fuel.dt must be positive, got {}", fuel.dt);
            }
        }
        Ok(())
    }

    pub fn trace_source(&self) -> Result<(TraceKind, &Path)> {
        let t = &self.trace;
        match (&t.fcd, &t.csv, &t.synth) {
            (Some(p), None, None) => Ok((TraceKind::Fcd, p)),
            (None, Some(p), None) => Ok((TraceKind::Csv, p)),
            (None, None, Some(p)) => Ok((TraceKind::Synth, p)),
            _ => bail!("[trace] needs exactly one of `fcd`, `csv` or `synth`"),
        }
    }
}

pub fn load_synth(path: &Path) -> Result<SynthConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading synthetic trace config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing synthetic trace config {}", path.display()))
}
