//! JSON run configuration.
//!
//! ```json
//! {
//!   "generator": { "preset": "micro" },
//!   "excitation": { "acceleration": 0.647, "frequency": "resonance" },
//!   "vm": { "stages": 4, "stage_capacitance": 1e-4 },
//!   "sweep": { "min": 1000, "max": 500000, "points": 241 },
//!   "sim": { "input_voltage": 0.58, "frequency": 50, "load": 1e8 },
//!   "output": { "waveform_csv": "wave.csv", "decimation": 10 }
//! }
//! ```
//!
//! The generator section is either `{"preset": name}` or the full inline
//! parameter set, never a mix. All quantities are SI. Unknown keys are errors.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::genmodel::{resonant_frequency, Excitation, GeneratorParams};
use crate::optimize::LoadGrid;
use crate::presets::{Preset, PresetName};
use crate::vmcalc::VmDesign;
use crate::vmsim::SimConfig;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Preset(PresetName),
    Inline(GeneratorParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencySpec {
    Hertz(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceleration: Option<f64>,
    /// Hz, or `"resonance"` (the default).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub steps_per_cycle: usize,
    pub max_cycles: usize,
    pub convergence_tol: f64,
    /// Peak AC input, V.
    pub input_voltage: f64,
    /// Hz
    pub frequency: f64,
    /// Ω
    pub load: f64,
    /// Loads used to fit the empirical internal resistance, Ω.
    pub rm_loads: Vec<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        let solver = SimConfig::default();
        Self {
            steps_per_cycle: solver.steps_per_cycle,
            max_cycles: solver.max_cycles,
            convergence_tol: solver.convergence_tol,
            input_voltage: 0.58,
            frequency: 50.0,
            load: 1e8,
            rm_loads: vec![5e3, 10e3, 20e3, 50e3],
        }
    }
}

impl SimSection {
    pub fn solver(&self) -> SimConfig {
        SimConfig {
            steps_per_cycle: self.steps_per_cycle,
            max_cycles: self.max_cycles,
            convergence_tol: self.convergence_tol,
            waveform: None,
        }
    }

    fn validate(&self) -> crate::Result<()> {
        self.solver().validate()?;
        crate::error::require_non_negative("input_voltage", self.input_voltage)?;
        crate::error::require_positive("frequency", self.frequency)?;
        crate::error::require_positive("load", self.load)?;
        if self.rm_loads.len() < 2 {
            return Err(crate::Error::InvalidParameter {
                name: "rm_loads",
                reason: format!("need at least 2 loads, got {}", self.rm_loads.len()),
            });
        }
        for &r in &self.rm_loads {
            crate::error::require_positive("rm_loads", r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waveform_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_json: Option<PathBuf>,
    pub decimation: usize,
    /// Number of final cycles kept in the waveform dump.
    pub waveform_cycles: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv: None,
            waveform_csv: None,
            summary_json: None,
            decimation: 10,
            waveform_cycles: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub generator: Option<GeneratorSpec>,
    pub excitation: ExcitationSection,
    pub vm: Option<VmDesign>,
    pub sweep: Option<LoadGrid>,
    pub sim: SimSection,
    pub output: OutputSection,
}

const SECTIONS: [&str; 6] = ["generator", "excitation", "vm", "sweep", "sim", "output"];

const GENERATOR_FIELDS: [&str; 6] = [
    "mass",
    "spring_constant",
    "parasitic_damping",
    "transduction_factor",
    "coil_resistance",
    "coil_inductance",
];

fn section<T: DeserializeOwned>(name: &str, value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::config(format!("{name}: {e}")))
}

fn parse_generator(value: Value) -> Result<GeneratorSpec, CliError> {
    let Value::Object(map) = value else {
        return Err(CliError::config("generator: expected an object"));
    };
    if let Some(preset) = map.get("preset") {
        if let Some(extra) = map.keys().find(|k| *k != "preset") {
            return Err(CliError::config(format!(
                "generator.{extra}: a preset section takes no other keys"
            )));
        }
        let name = preset
            .as_str()
            .ok_or_else(|| CliError::config("generator.preset: expected a string"))?;
        return name
            .parse()
            .map(GeneratorSpec::Preset)
            .map_err(|e| CliError::config(format!("generator.preset: {e}")));
    }
    if let Some(unknown) = map.keys().find(|k| !GENERATOR_FIELDS.contains(&k.as_str())) {
        return Err(CliError::config(format!("generator.{unknown}: unknown field")));
    }
    for field in &GENERATOR_FIELDS[..5] {
        if !map.contains_key(*field) {
            return Err(CliError::config(format!("generator.{field}: missing field")));
        }
    }
    let params: GeneratorParams = section("generator", Value::Object(map))?;
    params
        .validate()
        .map_err(|e| CliError::config(format!("generator: {e}")))?;
    Ok(GeneratorSpec::Inline(params))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        let Value::Object(root) = root else {
            return Err(CliError::config("config: top level must be an object"));
        };
        Self::from_map(root)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn from_map(mut root: Map<String, Value>) -> Result<Self, CliError> {
        if let Some(unknown) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(CliError::config(format!("{unknown}: unknown section")));
        }
        let mut cfg = RunConfig::default();
        if let Some(v) = root.remove("generator") {
            cfg.generator = Some(parse_generator(v)?);
        }
        if let Some(v) = root.remove("excitation") {
            cfg.excitation = section("excitation", v)?;
        }
        if let Some(v) = root.remove("vm") {
            let design: VmDesign = section("vm", v)?;
            design.validate().map_err(|e| CliError::config(format!("vm: {e}")))?;
            cfg.vm = Some(design);
        }
        if let Some(v) = root.remove("sweep") {
            let grid: LoadGrid = section("sweep", v)?;
            grid.validate().map_err(|e| CliError::config(format!("sweep: {e}")))?;
            cfg.sweep = Some(grid);
        }
        if let Some(v) = root.remove("sim") {
            let sim: SimSection = section("sim", v)?;
            sim.validate()
                .map_err(|e| CliError::config(format!("sim: {e}")))?;
            cfg.sim = sim;
        }
        if let Some(v) = root.remove("output") {
            cfg.output = section("output", v)?;
        }
        Ok(cfg)
    }

    /// Resolves generator and excitation. Presets supply their own test
    /// acceleration; inline generators must state one.
    pub fn resolve_generator(&self) -> Result<ResolvedGenerator, CliError> {
        let spec = self
            .generator
            .as_ref()
            .ok_or_else(|| CliError::config("generator: missing section (or pass --preset)"))?;
        let (params, preset) = match spec {
            GeneratorSpec::Preset(name) => (Preset::get(*name).params, Some(*name)),
            GeneratorSpec::Inline(p) => (*p, None),
        };
        let acceleration = match (self.excitation.acceleration, preset) {
            (Some(a), _) => a,
            (None, Some(name)) => Preset::get(name).excitation.acceleration,
            (None, None) => {
                return Err(CliError::config(
                    "excitation.acceleration: missing field (required with an inline generator)",
                ))
            }
        };
        let frequency = match &self.excitation.frequency {
            None => resonant_frequency(&params),
            Some(FrequencySpec::Hertz(f)) => *f,
            Some(FrequencySpec::Keyword(k)) if k == "resonance" => resonant_frequency(&params),
            Some(FrequencySpec::Keyword(k)) => {
                return Err(CliError::config(format!(
                    "excitation.frequency: expected a number or \"resonance\", got \"{k}\""
                )))
            }
        };
        let excitation = Excitation::new(acceleration, frequency)
            .map_err(|e| CliError::config(format!("excitation: {e}")))?;
        Ok(ResolvedGenerator {
            params,
            excitation,
            preset,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGenerator {
    pub params: GeneratorParams,
    pub excitation: Excitation,
    pub preset: Option<PresetName>,
}

/// The configuration document that reproduces a preset run.
#[derive(Debug, Serialize)]
pub struct PresetDump {
    pub generator: PresetGenerator,
    pub excitation: ExcitationSection,
    pub vm: VmDesign,
}

#[derive(Debug, Serialize)]
pub struct PresetGenerator {
    pub preset: PresetName,
}

pub fn preset_dump(name: PresetName) -> PresetDump {
    let preset = Preset::get(name);
    PresetDump {
        generator: PresetGenerator { preset: name },
        excitation: ExcitationSection {
            acceleration: Some(preset.excitation.acceleration),
            frequency: Some(FrequencySpec::Keyword("resonance".into())),
        },
        vm: VmDesign::default(),
    }
}
