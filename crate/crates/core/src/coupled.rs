//! Quasi-static coupling of a generator to a voltage multiplier.
//!
//! The multiplier is replaced by its input resistance `R_in = (Rl + Rm)/n²`
//! and the generator is solved in steady state against it. Nothing iterates:
//! `R_in` depends only on `Rl`, so one pass gives damping, motion, the
//! multiplier's peak input voltage and its loaded output.
//!
//! Power is credited the same way as for a plain resistor (see
//! [`crate::genmodel`]): the load receives the power extracted by electrical
//! damping, `½·De·v²`, scaled by the converter efficiency `η = Rl/(Rl + Rm)`.
//! The converter's own DC-side bookkeeping (`Vo`, `I`, `I²·Rm`) is kept in
//! [`OperatingPoint::converter`], and the ratio between the two accountings is
//! exposed as [`OperatingPoint::energy_audit_ratio`].

use rayon::prelude::*;

use crate::error::{require_positive, Result};
use crate::genmodel::{displacement_amplitude, em_damping, Excitation, GeneratorParams, Load};
use crate::optimize::{argmax, maximize_log, LoadGrid, COARSE_POINTS};
use crate::vmcalc::{input_resistance, VmDesign, VmOperatingPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Ω
    pub load_resistance: f64,
    /// Resistance presented to the coil, Ω.
    pub input_resistance: f64,
    /// Multiplier internal resistance (0 without a multiplier), Ω.
    pub internal_resistance: f64,
    pub em_damping: f64,
    /// m/s
    pub velocity: f64,
    /// m
    pub displacement: f64,
    /// Peak EMF, V.
    pub emf: f64,
    /// Peak voltage at the coil terminals, V.
    pub input_voltage: f64,
    /// V (DC with a multiplier; peak without).
    pub output_voltage: f64,
    pub load_current: f64,
    pub lambda: f64,
    pub eta: f64,
    /// W
    pub load_power: f64,
    /// `½·De·v²`, W.
    pub electrical_power: f64,
    pub overhead_power: f64,
    pub eta_overall: f64,
    /// Load-side power booked from `Vi` divided by `electrical_power`.
    pub energy_audit_ratio: f64,
    pub converter: Option<VmOperatingPoint>,
}

/// Solves the coupled steady state at one load.
pub fn operating_point(
    generator: &GeneratorParams,
    excitation: &Excitation,
    vm: Option<&VmDesign>,
    load: f64,
) -> Result<OperatingPoint> {
    generator.validate()?;
    excitation.validate()?;
    require_positive("load", load)?;
    if let Some(design) = vm {
        design.validate()?;
    }
    Ok(solve(generator, excitation, vm, load))
}

fn solve(
    generator: &GeneratorParams,
    excitation: &Excitation,
    vm: Option<&VmDesign>,
    load: f64,
) -> OperatingPoint {
    let omega = excitation.omega();
    let rm = vm.map_or(0.0, |d| d.internal_resistance(excitation.frequency));
    let r_in = match vm {
        Some(d) => input_resistance(d.stages, rm, load),
        None => load,
    };
    let de = em_damping(generator, Load::Resistive(r_in), omega);
    let displacement = displacement_amplitude(generator, excitation.force(generator), omega, de);
    let velocity = omega * displacement;
    let emf = generator.transduction_factor * velocity;
    let vi = emf * r_in / generator.circuit_impedance(r_in, omega);
    let electrical_power = 0.5 * de * velocity * velocity;
    let ratio = |booked: f64| {
        if electrical_power > 0.0 {
            booked / electrical_power
        } else {
            0.0
        }
    };

    match vm {
        None => OperatingPoint {
            load_resistance: load,
            input_resistance: load,
            internal_resistance: 0.0,
            em_damping: de,
            velocity,
            displacement,
            emf,
            input_voltage: vi,
            output_voltage: vi,
            load_current: vi / load,
            lambda: 1.0,
            eta: 1.0,
            load_power: electrical_power,
            electrical_power,
            overhead_power: 0.0,
            eta_overall: 1.0,
            energy_audit_ratio: ratio(0.5 * vi * vi / load),
            converter: None,
        },
        Some(design) => {
            let conv = design.evaluate(vi, excitation.frequency, load);
            let load_power = electrical_power * conv.eta;
            let supplied = electrical_power + conv.overhead_power;
            OperatingPoint {
                load_resistance: load,
                input_resistance: r_in,
                internal_resistance: rm,
                em_damping: de,
                velocity,
                displacement,
                emf,
                input_voltage: vi,
                output_voltage: conv.output_voltage,
                load_current: conv.load_current,
                lambda: conv.lambda,
                eta: conv.eta,
                load_power,
                electrical_power,
                overhead_power: conv.overhead_power,
                eta_overall: if supplied > 0.0 { load_power / supplied } else { 0.0 },
                energy_audit_ratio: ratio(conv.input_power),
                converter: Some(conv),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub index: usize,
    pub load: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: LoadGrid,
    pub with_vm: bool,
    /// In grid order, strictly increasing load.
    pub points: Vec<OperatingPoint>,
    /// Grid argmax of load power; the smallest load wins ties.
    pub optimum: GridOptimum,
}

impl SweepResult {
    pub fn loads(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.load_resistance)
    }
}

/// Evaluates every grid load (in parallel) and locates the grid optimum.
pub fn sweep_load(
    generator: &GeneratorParams,
    excitation: &Excitation,
    vm: Option<&VmDesign>,
    grid: LoadGrid,
) -> Result<SweepResult> {
    grid.validate()?;
    generator.validate()?;
    excitation.validate()?;
    if let Some(design) = vm {
        design.validate()?;
    }
    let points: Vec<OperatingPoint> = grid
        .values()
        .into_par_iter()
        .map(|r| solve(generator, excitation, vm, r))
        .collect();
    let powers: Vec<f64> = points.iter().map(|p| p.load_power).collect();
    let index = argmax(&powers).expect("validated grid has points");
    Ok(SweepResult {
        grid,
        with_vm: vm.is_some(),
        optimum: GridOptimum {
            index,
            load: points[index].load_resistance,
            power: powers[index],
        },
        points,
    })
}

/// Relative bracket width at which the golden-section refinement stops.
pub const OPTIMUM_REL_WIDTH: f64 = 1e-4;

/// Refines the load-power maximum inside `[lower, upper]` Ω.
///
/// Returns `(Rl*, P*)`, or [`crate::Error::NoInteriorOptimum`] when the load
/// power is monotone over the bracket.
pub fn find_optimum(
    generator: &GeneratorParams,
    excitation: &Excitation,
    vm: Option<&VmDesign>,
    lower: f64,
    upper: f64,
) -> Result<(f64, f64)> {
    generator.validate()?;
    excitation.validate()?;
    if let Some(design) = vm {
        design.validate()?;
    }
    maximize_log(
        |r| solve(generator, excitation, vm, r).load_power,
        lower,
        upper,
        COARSE_POINTS,
        OPTIMUM_REL_WIDTH,
    )
}
