//! Linear model of a resonant electromagnetic vibration generator.
//!
//! The generator is a base-excited mass–spring–damper whose coil current adds
//! an electrical damping term `De` on top of the parasitic damping `Dp`:
//!
//! ```text
//! m·ẍ + (Dp + De)·ẋ + k·x = F·sin(ωt),    F = m·a
//! De = K² / |Rc + jωL + Rl|
//! ```
//!
//! `K` is the transduction factor (turns × flux gradient, V·s/m). Every
//! function here is a closed-form steady-state evaluation.
//!
//! Power accounting follows the matched-damping convention: the power removed
//! from the resonator by electrical damping, `½·De·v²`, is what a load is
//! credited with ([`ResistivePoint::load_power`]). It peaks at `De = Dp` with
//! `(m·a)²/(8·Dp)`, reached at [`optimal_load`]. The share actually dissipated
//! in the load resistor (excluding coil copper loss) is reported separately as
//! [`ResistivePoint::resistor_power`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Mechanical and electromagnetic constants of one harvester.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Moving mass, kg.
    pub mass: f64,
    /// Spring constant, N/m.
    pub spring_constant: f64,
    /// Parasitic (mechanical) damping, N·s/m.
    pub parasitic_damping: f64,
    /// Transduction factor, V·s/m (equivalently N/A).
    pub transduction_factor: f64,
    /// Coil resistance, Ω.
    pub coil_resistance: f64,
    /// Coil inductance, H.
    #[serde(default)]
    pub coil_inductance: f64,
}

impl GeneratorParams {
    pub fn new(
        mass: f64,
        spring_constant: f64,
        parasitic_damping: f64,
        transduction_factor: f64,
        coil_resistance: f64,
        coil_inductance: f64,
    ) -> Result<Self> {
        let params = Self {
            mass,
            spring_constant,
            parasitic_damping,
            transduction_factor,
            coil_resistance,
            coil_inductance,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from a measured matched-load operating point.
    ///
    /// Inverts `Pmax = (m·a)²/(8·Dp)` for `Dp`, then `Rl_opt = K²/Dp − Rc`
    /// for `K`. The spring constant comes from the resonant frequency.
    pub fn from_matched_measurement(
        mass: f64,
        resonant_frequency: f64,
        acceleration: f64,
        max_power: f64,
        optimum_load: f64,
        coil_resistance: f64,
    ) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("resonant_frequency", resonant_frequency)?;
        require_positive("acceleration", acceleration)?;
        require_positive("max_power", max_power)?;
        require_positive("optimum_load", optimum_load)?;
        require_positive("coil_resistance", coil_resistance)?;

        let force = mass * acceleration;
        let parasitic_damping = force * force / (8.0 * max_power);
        let transduction_factor = (parasitic_damping * (optimum_load + coil_resistance)).sqrt();
        let omega_n = 2.0 * PI * resonant_frequency;
        Self::new(
            mass,
            mass * omega_n * omega_n,
            parasitic_damping,
            transduction_factor,
            coil_resistance,
            0.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass)?;
        require_positive("spring_constant", self.spring_constant)?;
        require_positive("parasitic_damping", self.parasitic_damping)?;
        require_positive("transduction_factor", self.transduction_factor)?;
        require_positive("coil_resistance", self.coil_resistance)?;
        require_non_negative("coil_inductance", self.coil_inductance)?;
        let omega_n = self.resonant_omega();
        if !(omega_n.is_finite() && omega_n > 0.0) {
            return Err(Error::InvalidParameter {
                name: "spring_constant",
                reason: format!("resonant frequency sqrt(k/m) is not finite ({omega_n})"),
            });
        }
        Ok(())
    }

    /// Natural angular frequency `sqrt(k/m)`, rad/s.
    pub fn resonant_omega(&self) -> f64 {
        (self.spring_constant / self.mass).sqrt()
    }

    /// `K²`, the numerator of the electrical damping.
    pub fn k_squared(&self) -> f64 {
        self.transduction_factor * self.transduction_factor
    }

    /// `|Rc + jωL + r|` for a finite load `r`.
    pub fn circuit_impedance(&self, load: f64, omega: f64) -> f64 {
        (self.coil_resistance + load).hypot(omega * self.coil_inductance)
    }
}

/// Sinusoidal base acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Excitation {
    /// Peak acceleration, m/s².
    pub acceleration: f64,
    /// Drive frequency, Hz.
    pub frequency: f64,
}

impl Excitation {
    pub fn new(acceleration: f64, frequency: f64) -> Result<Self> {
        let exc = Self {
            acceleration,
            frequency,
        };
        exc.validate()?;
        Ok(exc)
    }

    /// Drive at the generator's own resonance.
    pub fn at_resonance(params: &GeneratorParams, acceleration: f64) -> Result<Self> {
        Self::new(acceleration, resonant_frequency(params))
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("acceleration", self.acceleration)?;
        require_positive("frequency", self.frequency)
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    /// Driving force amplitude `m·a`.
    pub fn force(&self, params: &GeneratorParams) -> f64 {
        params.mass * self.acceleration
    }
}

/// Electrical termination of the coil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Resistive(f64),
    OpenCircuit,
}

/// Resonant frequency in Hz.
pub fn resonant_frequency(params: &GeneratorParams) -> f64 {
    params.resonant_omega() / (2.0 * PI)
}

/// Electrical damping `K²/|Rc + jωL + Rl|`; zero for an open circuit.
pub fn em_damping(params: &GeneratorParams, load: Load, omega: f64) -> f64 {
    match load {
        Load::OpenCircuit => 0.0,
        Load::Resistive(r) => params.k_squared() / params.circuit_impedance(r, omega),
    }
}

/// Displacement amplitude at resonance, `F / ((Dp + De)·ωn)`.
pub fn displacement_at_resonance(
    params: &GeneratorParams,
    excitation: &Excitation,
    em_damping: f64,
) -> f64 {
    excitation.force(params) / ((params.parasitic_damping + em_damping) * params.resonant_omega())
}

/// Steady-state displacement amplitude of the forced oscillator at `omega`.
pub fn displacement_amplitude(
    params: &GeneratorParams,
    force: f64,
    omega: f64,
    em_damping: f64,
) -> f64 {
    let stiffness = params.spring_constant - params.mass * omega * omega;
    let damping = (params.parasitic_damping + em_damping) * omega;
    force / stiffness.hypot(damping)
}

/// Steady-state amplitudes at one drive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyResponse {
    pub frequency: f64,
    /// m
    pub displacement: f64,
    /// Peak EMF `K·ω·X`, V.
    pub emf: f64,
    /// Peak voltage across the load (the EMF itself when open).
    pub load_voltage: f64,
}

pub fn frequency_response(
    params: &GeneratorParams,
    acceleration: f64,
    frequency: f64,
    load: Load,
) -> FrequencyResponse {
    let omega = 2.0 * PI * frequency;
    let de = em_damping(params, load, omega);
    let displacement = displacement_amplitude(params, params.mass * acceleration, omega, de);
    let emf = params.transduction_factor * omega * displacement;
    let load_voltage = match load {
        Load::OpenCircuit => emf,
        Load::Resistive(r) => emf * r / params.circuit_impedance(r, omega),
    };
    FrequencyResponse {
        frequency,
        displacement,
        emf,
        load_voltage,
    }
}

/// Matched-damping maximum electrical power `(m·a)²/(8·Dp)`.
pub fn max_power(params: &GeneratorParams, excitation: &Excitation) -> f64 {
    let force = excitation.force(params);
    force * force / (8.0 * params.parasitic_damping)
}

/// Load resistance at which `De = Dp`, i.e. `K²/Dp − Rc`.
pub fn optimal_load(params: &GeneratorParams) -> Result<f64> {
    let matched = params.k_squared() / params.parasitic_damping;
    if matched <= params.coil_resistance {
        return Err(Error::NonPhysicalOptimum {
            matched_resistance: matched,
            coil_resistance: params.coil_resistance,
        });
    }
    Ok(matched - params.coil_resistance)
}

/// Operating point of the generator driving a plain resistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistivePoint {
    pub load: f64,
    pub em_damping: f64,
    /// Velocity amplitude, m/s.
    pub velocity: f64,
    pub displacement: f64,
    pub emf: f64,
    /// Peak load voltage.
    pub load_voltage: f64,
    /// `½·De·v²`: power removed from the resonator by electrical damping.
    pub electrical_power: f64,
    /// Power credited to the load under the matched-damping convention;
    /// equal to `electrical_power`.
    pub load_power: f64,
    /// Power dissipated in the load resistor alone, `½·I²·Rl`.
    pub resistor_power: f64,
}

pub fn load_power_resistive(
    params: &GeneratorParams,
    excitation: &Excitation,
    load: f64,
) -> ResistivePoint {
    let omega = excitation.omega();
    let de = em_damping(params, Load::Resistive(load), omega);
    let displacement = displacement_amplitude(params, excitation.force(params), omega, de);
    let velocity = omega * displacement;
    let emf = params.transduction_factor * velocity;
    let z = params.circuit_impedance(load, omega);
    let current = emf / z;
    let electrical_power = 0.5 * de * velocity * velocity;
    ResistivePoint {
        load,
        em_damping: de,
        velocity,
        displacement,
        emf,
        load_voltage: current * load,
        electrical_power,
        load_power: electrical_power,
        resistor_power: 0.5 * current * current * load,
    }
}
