//! Built-in generator presets for the macro and micro prototypes.
//!
//! Parasitic damping and transduction factor are not measured directly; they
//! are recovered from each prototype's measured maximum power and optimum
//! resistive load with [`GeneratorParams::from_matched_measurement`]. Coil
//! geometry is carried as metadata only.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::genmodel::{Excitation, GeneratorParams};
use crate::vmcalc::VmDesign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Macro,
    Micro,
}

impl PresetName {
    pub const ALL: [PresetName; 2] = [PresetName::Macro, PresetName::Micro];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Macro => "macro",
            PresetName::Micro => "micro",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "macro" => Ok(PresetName::Macro),
            "micro" => Ok(PresetName::Micro),
            other => Err(format!("unknown preset `{other}` (expected `macro` or `micro`)")),
        }
    }
}

/// Construction data of a prototype. Not used by any model equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorGeometry {
    /// mm, width × depth × height
    pub magnet_size_mm: [f64; 3],
    pub coil_outer_diameter_mm: f64,
    pub coil_inner_diameter_mm: f64,
    pub coil_thickness_mm: f64,
    pub magnet_coil_gap_mm: f64,
    pub coil_turns: u32,
}

/// Measured operating point the preset is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredReference {
    pub max_power: f64,
    pub optimum_load: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: PresetName,
    pub params: GeneratorParams,
    /// Nominal drive: the prototype's test acceleration at its resonance.
    pub excitation: Excitation,
    pub geometry: GeneratorGeometry,
    pub reference: MeasuredReference,
    /// The micro prototype has a stiffening spring; its model is a linearization.
    pub linearized: bool,
}

struct Row {
    mass: f64,
    resonant_frequency: f64,
    acceleration: f64,
    coil_resistance: f64,
    max_power: f64,
    optimum_load: f64,
    geometry: GeneratorGeometry,
}

fn row(name: PresetName) -> Row {
    match name {
        PresetName::Macro => Row {
            mass: 0.05,
            resonant_frequency: 14.1,
            acceleration: 0.405,
            coil_resistance: 46.0,
            max_power: 260e-6,
            optimum_load: 100.0,
            geometry: GeneratorGeometry {
                magnet_size_mm: [15.0, 15.0, 5.0],
                coil_outer_diameter_mm: 19.0,
                coil_inner_diameter_mm: 1.0,
                coil_thickness_mm: 6.5,
                magnet_coil_gap_mm: 13.0,
                coil_turns: 1100,
            },
        },
        PresetName::Micro => Row {
            mass: 0.0066,
            resonant_frequency: 53.0,
            acceleration: 0.647,
            coil_resistance: 1613.0,
            max_power: 17.5e-6,
            optimum_load: 3000.0,
            geometry: GeneratorGeometry {
                magnet_size_mm: [2.5, 2.0, 1.5],
                coil_outer_diameter_mm: 2.4,
                coil_inner_diameter_mm: 0.6,
                coil_thickness_mm: 0.5,
                magnet_coil_gap_mm: 0.25,
                coil_turns: 2300,
            },
        },
    }
}

impl Preset {
    pub fn get(name: PresetName) -> Preset {
        let r = row(name);
        let params = GeneratorParams::from_matched_measurement(
            r.mass,
            r.resonant_frequency,
            r.acceleration,
            r.max_power,
            r.optimum_load,
            r.coil_resistance,
        )
        .expect("preset table rows are valid");
        Preset {
            name,
            params,
            excitation: Excitation {
                acceleration: r.acceleration,
                frequency: r.resonant_frequency,
            },
            geometry: r.geometry,
            reference: MeasuredReference {
                max_power: r.max_power,
                optimum_load: r.optimum_load,
            },
            linearized: name == PresetName::Micro,
        }
    }

    pub fn macro_generator() -> Preset {
        Self::get(PresetName::Macro)
    }

    pub fn micro_generator() -> Preset {
        Self::get(PresetName::Micro)
    }
}

/// The four-stage, 100 µF active-switch multiplier used with both generators.
pub fn prototype_multiplier() -> VmDesign {
    VmDesign::default()
}
