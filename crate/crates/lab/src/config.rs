//! Run configuration: a flat JSON document with dotted keys, overridden by
//! command-line flags.
//!
//! ```json
//! {
//!   "radio.pa_efficiency": 0.4,
//!   "cluster.n": 1500,
//!   "sweep.preset": "fig7",
//!   "sim.seed": 42,
//!   "compat_flags": ["paper_db_compat"]
//! }
//! ```
//!
//! Sections: `radio.*` (radio parameters), `cluster.*` (scenario),
//! `sweep.*` (`preset`, `axes`, `outputs`, `k_range`), `sim.*` (`seed`,
//! `max_rounds`, `e_start`, `bs_x`, `bs_y`, `stop_at_first_death`,
//! `trace`). Top-level keys: `command`, `output_path`, `compat_flags`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use eehc_core::sweep::{Axis, FigurePreset, SweepSpec};
use eehc_core::{ClusterConfig, RadioParams, SnrMode};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::LabError;

pub const PAPER_DB_COMPAT: &str = "paper_db_compat";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Sweep,
    Simulate,
    OptimalK,
}

impl FromStr for Command {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        match s {
            "analyze" => Ok(Command::Analyze),
            "sweep" => Ok(Command::Sweep),
            "simulate" => Ok(Command::Simulate),
            "optimal-k" => Ok(Command::OptimalK),
            other => Err(LabError::Usage(format!(
                "command: unknown command `{other}` (expected analyze, sweep, simulate or optimal-k)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSource {
    Preset(String),
    Custom(SweepSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub seed: u64,
    pub max_rounds: u64,
    /// Initial battery per node (J).
    pub e_start: f64,
    /// Base station; defaults to `d_bs` above the field centre.
    pub bs_x: Option<f64>,
    pub bs_y: Option<f64>,
    pub stop_at_first_death: bool,
    /// Write the per-event ledger next to the output.
    pub trace: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            seed: 42,
            max_rounds: 10,
            e_start: 100.0,
            bs_x: None,
            bs_y: None,
            stop_at_first_death: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub radio: RadioParams,
    pub cluster: ClusterConfig,
    /// Dotted `radio.*` / `cluster.*` keys set by the document or flags.
    /// Applied on top of a preset's own base scenario.
    pub explicit_keys: Vec<String>,
    pub sweep: Option<SweepSource>,
    /// Search range for the numeric optimum; `None` keeps the sweep's own.
    pub k_range: Option<(u32, u32)>,
    pub sim: SimSettings,
    pub output_path: Option<PathBuf>,
    pub compat_flags: BTreeSet<String>,
}

impl RunConfig {
    pub fn snr_mode(&self) -> SnrMode {
        if self.compat_flags.contains(PAPER_DB_COMPAT) {
            SnrMode::PaperDbCompat
        } else {
            SnrMode::Physical
        }
    }

    pub fn base_station(&self) -> (f64, f64) {
        let half = self.cluster.field_side / 2.0;
        (
            self.sim.bs_x.unwrap_or(half),
            self.sim.bs_y.unwrap_or(half + self.cluster.d_bs),
        )
    }

    /// Resolves the sweep: presets get explicitly set keys layered onto
    /// their own base scenario; `--paper-db-compat` forces the dB mode.
    pub fn sweep_spec(&self) -> Result<SweepSpec, LabError> {
        let mut spec = match &self.sweep {
            None => return Err(LabError::Usage("sweep: a preset (--preset) or sweep.axes is required".into())),
            Some(SweepSource::Custom(spec)) => spec.clone(),
            Some(SweepSource::Preset(name)) => {
                let mut spec = preset(name)?.spec();
                let resolved_radio = to_map(&self.radio);
                let resolved_cluster = to_map(&self.cluster);
                let mut radio = to_map(&spec.base_radio);
                let mut cluster = to_map(&spec.base_cluster);
                for key in &self.explicit_keys {
                    if let Some(field) = key.strip_prefix("radio.") {
                        radio.insert(field.into(), resolved_radio[field].clone());
                    } else if let Some(field) = key.strip_prefix("cluster.") {
                        cluster.insert(field.into(), resolved_cluster[field].clone());
                    }
                }
                spec.base_radio = from_map(radio, "radio")?;
                spec.base_cluster = from_map(cluster, "cluster")?;
                if let Some(range) = self.k_range {
                    spec.k_range = range;
                }
                spec
            }
        };
        if self.snr_mode() == SnrMode::PaperDbCompat {
            spec.snr_mode = SnrMode::PaperDbCompat;
        }
        Ok(spec)
    }
}

fn preset(name: &str) -> Result<FigurePreset, LabError> {
    name.parse().map_err(|_| {
        let valid: Vec<&str> = FigurePreset::ALL.iter().map(|p| p.name()).collect();
        LabError::Usage(format!("preset: unknown preset `{name}`; valid presets: {}", valid.join(", ")))
    })
}

/// Per-parameter command-line overrides. `None` leaves the document value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paper_db_compat: bool,
    pub rounds: Option<u64>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub eta: Option<f64>,
    pub snr_db: Option<f64>,
    pub d_bs: Option<f64>,
    pub d_intra: Option<f64>,
    pub nf: Option<u64>,
    pub field_side: Option<f64>,
    pub e_start: Option<f64>,
    pub trace: bool,
}

fn to_map<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("plain data serializes") {
        Value::Object(m) => m,
        _ => unreachable!("structs serialize to objects"),
    }
}

fn from_map<T: DeserializeOwned>(m: Map<String, Value>, section: &str) -> Result<T, LabError> {
    serde_json::from_value(Value::Object(m)).map_err(|e| LabError::Validation(format!("{section}: {e}")))
}

/// Sets `section.field` on a defaults map, type-checking that one key.
fn set_field<T: Serialize + DeserializeOwned>(
    map: &mut Map<String, Value>,
    key: &str,
    field: &str,
    value: Value,
) -> Result<(), LabError> {
    if !map.contains_key(field) {
        return Err(LabError::Validation(format!("{key}: unknown key")));
    }
    map.insert(field.to_owned(), value);
    serde_json::from_value::<T>(Value::Object(map.clone()))
        .map(|_| ())
        .map_err(|e| LabError::Validation(format!("{key}: {e}")))
}

fn core_error(section: &str, e: eehc_core::Error) -> LabError {
    match e {
        eehc_core::Error::Invalid { field, rule, value } => {
            LabError::Validation(format!("{section}.{field}: rule `{rule}` violated (got {value})"))
        }
        eehc_core::Error::NonFinite { field } => LabError::Validation(format!("{section}.{field}: value must be finite")),
        other => LabError::Validation(format!("{section}: {other}")),
    }
}

/// Builds a validated [`RunConfig`] from an optional JSON document and flag
/// overrides. Omitted radio fields take the reference-table defaults.
pub fn parse_config(document: Option<&str>, flags: &Overrides) -> Result<RunConfig, LabError> {
    let doc: Map<String, Value> = match document {
        None => Map::new(),
        Some(text) if text.trim().is_empty() => Map::new(),
        Some(text) => match serde_json::from_str(text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => return Err(LabError::Validation("config: document must be a JSON object".into())),
            Err(e) => return Err(LabError::Validation(format!("config: {e}"))),
        },
    };

    let mut radio = to_map(&RadioParams::default());
    let mut cluster = to_map(&ClusterConfig::default());
    let mut sim = to_map(&SimSettings::default());
    let mut explicit = BTreeSet::new();
    let mut command = None;
    let mut output_path = None;
    let mut compat_flags = BTreeSet::new();
    let mut preset_name = None;
    let mut axes: Option<Vec<Axis>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut k_range: Option<(u32, u32)> = None;

    for (key, value) in doc {
        match key.split_once('.') {
            Some(("radio", field)) => {
                set_field::<RadioParams>(&mut radio, &key, field, value)?;
                explicit.insert(key.clone());
            }
            Some(("cluster", field)) => {
                set_field::<ClusterConfig>(&mut cluster, &key, field, value)?;
                explicit.insert(key.clone());
            }
            Some(("sim", field)) => set_field::<SimSettings>(&mut sim, &key, field, value)?,
            Some(("sweep", "preset")) => preset_name = Some(typed::<String>(&key, value)?),
            Some(("sweep", "axes")) => axes = Some(typed(&key, value)?),
            Some(("sweep", "outputs")) => outputs = Some(typed(&key, value)?),
            Some(("sweep", "k_range")) => k_range = Some(typed(&key, value)?),
            None if key == "command" => command = Some(typed::<String>(&key, value)?.parse()?),
            None if key == "output_path" => output_path = Some(typed::<PathBuf>(&key, value)?),
            None if key == "compat_flags" => {
                for flag in typed::<Vec<String>>(&key, value)? {
                    if flag != PAPER_DB_COMPAT {
                        return Err(LabError::Validation(format!("compat_flags: unknown flag `{flag}`")));
                    }
                    compat_flags.insert(flag);
                }
            }
            _ => return Err(LabError::Validation(format!("{key}: unknown key"))),
        }
    }

    let mut set = |section: &mut Map<String, Value>, key: &str, v: Value| {
        section.insert(key.rsplit('.').next().unwrap().to_owned(), v);
        explicit.insert(key.to_owned());
    };
    if let Some(v) = flags.n { set(&mut cluster, "cluster.n", v.into()); }
    if let Some(v) = flags.k { set(&mut cluster, "cluster.k", v.into()); }
    if let Some(v) = flags.m { set(&mut cluster, "cluster.m", v.into()); }
    if let Some(v) = flags.nf { set(&mut cluster, "cluster.n_frames", v.into()); }
    if let Some(v) = flags.d_bs { set(&mut cluster, "cluster.d_bs", v.into()); }
    if let Some(v) = flags.d_intra { set(&mut cluster, "cluster.d_intra", v.into()); }
    if let Some(v) = flags.field_side { set(&mut cluster, "cluster.field_side", v.into()); }
    if let Some(v) = flags.eta { set(&mut radio, "radio.pa_efficiency", v.into()); }
    if let Some(v) = flags.snr_db { set(&mut radio, "radio.snr_min_db", v.into()); }
    if let Some(v) = flags.seed { sim.insert("seed".into(), v.into()); }
    if let Some(v) = flags.rounds { sim.insert("max_rounds".into(), v.into()); }
    if let Some(v) = flags.e_start { sim.insert("e_start".into(), v.into()); }
    if flags.trace { sim.insert("trace".into(), true.into()); }
    if flags.paper_db_compat {
        compat_flags.insert(PAPER_DB_COMPAT.to_owned());
    }
    if flags.command.is_some() {
        command = flags.command;
    }
    if flags.out.is_some() {
        output_path = flags.out.clone();
    }
    if flags.preset.is_some() {
        preset_name = flags.preset.clone();
    }

    let radio: RadioParams = from_map(radio, "radio")?;
    let cluster: ClusterConfig = from_map(cluster, "cluster")?;
    let sim: SimSettings = from_map(sim, "sim")?;
    radio.validate().map_err(|e| core_error("radio", e))?;
    cluster.validate().map_err(|e| core_error("cluster", e))?;
    if !(sim.e_start.is_finite() && sim.e_start > 0.0) {
        return Err(LabError::Validation(format!("sim.e_start: rule `e_start > 0` violated (got {})", sim.e_start)));
    }
    if matches!(k_range, Some((lo, hi)) if lo > hi) {
        return Err(LabError::Validation("sweep.k_range: rule `k_min <= k_max` violated".into()));
    }

    let command = command.ok_or_else(|| LabError::Usage("command: no command given".into()))?;
    let sweep = match (preset_name, axes) {
        (Some(_), Some(_)) => {
            return Err(LabError::Validation("sweep: give either sweep.preset or sweep.axes, not both".into()))
        }
        (Some(name), None) => {
            preset(&name)?;
            Some(SweepSource::Preset(name))
        }
        (None, Some(axes)) => {
            let mut spec = SweepSpec {
                base_radio: radio,
                base_cluster: cluster,
                axes,
                k_range: k_range.unwrap_or(SweepSpec::default().k_range),
                ..SweepSpec::default()
            };
            if let Some(outputs) = outputs {
                spec.outputs = outputs;
            }
            eehc_core::sweep::SweepPlan::new(spec.clone()).map_err(|e| core_error("sweep", e))?;
            Some(SweepSource::Custom(spec))
        }
        (None, None) => None,
    };
    if command == Command::Sweep && sweep.is_none() {
        return Err(LabError::Usage("sweep: a preset (--preset) or sweep.axes is required".into()));
    }

    Ok(RunConfig {
        command,
        radio,
        cluster,
        explicit_keys: explicit.into_iter().collect(),
        sweep,
        k_range,
        sim,
        output_path,
        compat_flags,
    })
}

fn typed<T: DeserializeOwned>(key: &str, value: Value) -> Result<T, LabError> {
    serde_json::from_value(value).map_err(|e| LabError::Validation(format!("{key}: {e}")))
}
