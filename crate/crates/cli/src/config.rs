//! Run configuration: one JSON object with a block per module.
//!
//! Every block has complete defaults, so a config file only needs the fields
//! it changes. Command-line flags are applied on top of the file.

use std::path::{Path, PathBuf};

use rydlat::budget::{Dimension, Preset, Scheme};
use rydlat::cluster::Geometry;
use rydlat::ramps::{DEFAULT_SAMPLES, MERGE_SPLIT_US};
use rydlat::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub format: Format,
    /// `None` writes to `$RYDLAT_OUT_DIR/<command>.<ext>` or stdout.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeBlock {
    pub v0: f64,
    pub v1: f64,
    pub phi: f64,
    pub k: f64,
    pub recoil_khz: f64,
    pub n_max: usize,
    pub q_points: usize,
    pub n_bands: usize,
    /// Double-well cell used by `wannier`.
    pub cell: i64,
}

impl Default for LatticeBlock {
    fn default() -> Self {
        Self {
            v0: 100.0,
            v1: 100.0,
            phi: 0.0,
            k: 1.0,
            recoil_khz: 3.5,
            n_max: rydlat::lattice::DEFAULT_N_MAX,
            q_points: rydlat::lattice::DEFAULT_Q_POINTS,
            n_bands: 4,
            cell: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampBlock {
    /// Durations (μs) of the V0 ramp down, the φ ramp and the V0 ramp up.
    pub split_us: [f64; 3],
    pub v_high: f64,
    pub v1: f64,
    pub recoil_khz: f64,
    pub n_tracked: usize,
    pub samples: usize,
    /// Duration scale factors; non-empty runs an adiabaticity scan.
    pub scan: Vec<f64>,
}

impl Default for RampBlock {
    fn default() -> Self {
        Self {
            split_us: MERGE_SPLIT_US,
            v_high: 100.0,
            v1: 100.0,
            recoil_khz: 3.5,
            n_tracked: 4,
            samples: DEFAULT_SAMPLES,
            scan: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StretchBlock {
    /// Ramp duration (1/E_R).
    pub duration: f64,
    pub k_start: f64,
    pub k_end: f64,
    pub v1: f64,
    pub recoil_khz: f64,
    pub n_tracked: usize,
    pub samples: usize,
}

impl Default for StretchBlock {
    fn default() -> Self {
        Self {
            duration: 16.0,
            k_start: 2.0,
            k_end: 0.4,
            v1: 100.0,
            recoil_khz: 3.5,
            n_tracked: 4,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseBlock {
    /// Two-photon light shift Ω²/Δ (MHz).
    pub light_shift_mhz: f64,
    pub delta_mhz: f64,
    pub hf_mhz: f64,
    pub photon_order: u32,
    pub rabi_offset: f64,
    /// Effective drive (Ω̃/Ω)^order for inactive atoms; 1 for active ones.
    pub effective_drive: f64,
}

impl Default for PulseBlock {
    fn default() -> Self {
        Self {
            light_shift_mhz: 30.0,
            delta_mhz: 4.0e4,
            hf_mhz: 6834.7,
            photon_order: 2,
            rabi_offset: 0.0,
            effective_drive: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionBlock {
    pub v_mhz: f64,
    pub power: u32,
    /// Rydberg decay rate (1/s).
    pub gamma: f64,
}

impl Default for InteractionBlock {
    fn default() -> Self {
        Self {
            v_mhz: 3.0,
            power: 6,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockadeBlock {
    /// Relative left-right qubit shift Δ_vec (MHz).
    pub delta_vec_mhz: f64,
}

impl Default for BlockadeBlock {
    fn default() -> Self {
        Self { delta_vec_mhz: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetBlock {
    pub preset: String,
}

impl Default for BudgetBlock {
    fn default() -> Self {
        Self {
            preset: Preset::RbNoblockade2ph.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingBlock {
    pub scheme: Scheme,
    pub dimension: Dimension,
}

impl Default for TimingBlock {
    fn default() -> Self {
        Self {
            scheme: Scheme::NoBlockade,
            dimension: Dimension::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterGate {
    /// Textbook CZ.
    #[default]
    Ideal,
    /// diag(1,−1,−1,−1) with Z-frame tracking.
    Realized,
    /// Simulated gate without blockade (pulse and interaction blocks).
    Noblockade,
    /// Simulated blockade gate (pulse, interaction and blockade blocks).
    Blockade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterBlock {
    /// `1d:N` or `2d:RxC`.
    pub geometry: String,
    pub gate: ClusterGate,
}

impl Default for ClusterBlock {
    fn default() -> Self {
        Self {
            geometry: "1d:6".to_string(),
            gate: ClusterGate::Ideal,
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch: Option<StretchBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blockade: Option<BlockadeBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterBlock>,
    pub verify: bool,
    pub output: OutputBlock,
}

pub const COMMANDS: [&str; 9] = [
    "bands",
    "wannier",
    "ramp",
    "stretch",
    "gate-noblockade",
    "gate-blockade",
    "error-budget",
    "timing",
    "cluster",
];

impl RunConfig {
    /// Defaults for `command`, with exactly the blocks it reads.
    pub fn defaults(command: &str) -> Result<Self> {
        let mut c = RunConfig {
            command: command.to_string(),
            ..Default::default()
        };
        let blockade_pulse = || PulseBlock {
            light_shift_mhz: 0.025,
            ..Default::default()
        };
        let blockade_interaction = || InteractionBlock {
            v_mhz: 1.0e3,
            power: 3,
            gamma: 0.0,
        };
        match command {
            "bands" | "wannier" => c.lattice = Some(LatticeBlock::default()),
            "ramp" => c.ramp = Some(RampBlock::default()),
            "stretch" => c.stretch = Some(StretchBlock::default()),
            "gate-noblockade" => {
                c.pulse = Some(PulseBlock::default());
                c.interaction = Some(InteractionBlock::default());
            }
            "gate-blockade" => {
                c.pulse = Some(blockade_pulse());
                c.interaction = Some(blockade_interaction());
                c.blockade = Some(BlockadeBlock::default());
            }
            "error-budget" => c.budget = Some(BudgetBlock::default()),
            "timing" => c.timing = Some(TimingBlock::default()),
            "cluster" => {
                c.cluster = Some(ClusterBlock::default());
                c.pulse = Some(PulseBlock::default());
                c.interaction = Some(InteractionBlock::default());
                c.blockade = Some(BlockadeBlock::default());
            }
            _ => {
                return Err(Error::Parameter(format!(
                    "unknown command '{command}' (expected one of {})",
                    COMMANDS.join(", ")
                )))
            }
        }
        Ok(c)
    }

    /// Command defaults overlaid with the file at `path`, if any.
    pub fn resolve(command: &str, path: Option<&Path>) -> Result<Self> {
        let base = Self::defaults(command)?;
        let Some(path) = path else {
            return Ok(base);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parameter(format!("cannot read config {}: {e}", path.display())))?;
        let file: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parameter(format!("invalid config {}: {e}", path.display())))?;
        match file.get("command").and_then(|c| c.as_str()) {
            Some(c) if c != command => {
                return Err(Error::Parameter(format!(
                    "config {} is for '{c}', not '{command}'",
                    path.display()
                )))
            }
            _ => {}
        }
        let mut merged =
            serde_json::to_value(&base).map_err(|e| Error::Parameter(e.to_string()))?;
        merge(&mut merged, file);
        serde_json::from_value(merged)
            .map_err(|e| Error::Parameter(format!("invalid config {}: {e}", path.display())))
    }

    /// Finite numbers everywhere and resolvable names.
    pub fn validate(&self) -> Result<()> {
        let value = serde_json::to_value(self).map_err(|e| Error::Parameter(e.to_string()))?;
        // Non-finite floats serialize to null; no field of a resolved config is nullable
        // except the output path.
        if let Some(path) = find_null(&value, "") {
            if path != "output.path" {
                return Err(Error::Parameter(format!(
                    "field {path} must be a finite number"
                )));
            }
        }
        if let Some(b) = &self.budget {
            b.preset.parse::<Preset>()?;
        }
        if let Some(c) = &self.cluster {
            c.geometry.parse::<Geometry>()?;
        }
        Ok(())
    }
}

/// Deep merge of objects; other values in `over` replace those in `base`.
fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn find_null(v: &serde_json::Value, at: &str) -> Option<String> {
    let join = |k: &str| {
        if at.is_empty() {
            k.to_string()
        } else {
            format!("{at}.{k}")
        }
    };
    match v {
        serde_json::Value::Null => Some(at.to_string()),
        serde_json::Value::Object(m) => m.iter().find_map(|(k, x)| find_null(x, &join(k))),
        serde_json::Value::Array(a) => a
            .iter()
            .enumerate()
            .find_map(|(i, x)| find_null(x, &join(&i.to_string()))),
        _ => None,
    }
}
