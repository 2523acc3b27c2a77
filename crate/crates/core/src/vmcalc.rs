//! Equivalent-circuit model of an n-stage voltage multiplier.
//!
//! Seen from its output, the multiplier is an ideal source `n·Vi` behind an
//! internal resistance `Rm` that depends on stage parity:
//!
//! ```text
//! odd n:   Rm = n(n² − 1) / (12·C·f)
//! even n:  Rm = n(n² + 2) / (12·C·f)
//! Vo = n·Vi − I·Rm,   λ = Vo/Vi,   η = Vo/(n·Vi)
//! ```
//!
//! With a resistive load the loop closes as `Vo = n·Vi·Rl/(Rl + Rm)`, so
//! `η = Rl/(Rl + Rm)` and the generator sees `(Rl + Rm)/n²`.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Switch dissipation at one supply voltage: `constant + per_ohm·Rl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchLoss {
    pub supply_voltage: f64,
    /// W
    pub constant: f64,
    /// W/Ω
    #[serde(default)]
    pub per_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VmDesign {
    pub stages: u32,
    /// F
    pub stage_capacitance: f64,
    /// Ω, time-domain simulation only.
    pub switch_on_resistance: f64,
    /// Ω, time-domain simulation only.
    pub switch_off_resistance: f64,
    /// Total comparator draw, W.
    pub comparator_power: f64,
    /// Switch-loss table keyed by supply voltage, strictly increasing.
    pub switch_overhead: Vec<SwitchLoss>,
    /// V
    pub supply_voltage: f64,
    /// Replaces the parity formula for `Rm` (synthetic multipliers, e.g. `Some(0.0)`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalent_resistance_override: Option<f64>,
}

impl Default for VmDesign {
    fn default() -> Self {
        Self {
            stages: 4,
            stage_capacitance: 100e-6,
            switch_on_resistance: 0.5,
            switch_off_resistance: 1e7,
            comparator_power: 0.5e-6,
            switch_overhead: Vec::new(),
            supply_voltage: 2.0,
            equivalent_resistance_override: None,
        }
    }
}

impl VmDesign {
    pub fn with_stages(stages: u32, stage_capacitance: f64) -> Result<Self> {
        let design = Self {
            stages,
            stage_capacitance,
            ..Self::default()
        };
        design.validate()?;
        Ok(design)
    }

    /// A multiplier with no internal resistance and no overhead.
    pub fn lossless(stages: u32) -> Self {
        Self {
            stages,
            comparator_power: 0.0,
            equivalent_resistance_override: Some(0.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return Err(Error::InvalidParameter {
                name: "stages",
                reason: "a multiplier needs at least one stage".into(),
            });
        }
        require_positive("stage_capacitance", self.stage_capacitance)?;
        require_non_negative("switch_on_resistance", self.switch_on_resistance)?;
        require_non_negative("switch_off_resistance", self.switch_off_resistance)?;
        if self.switch_off_resistance <= self.switch_on_resistance {
            return Err(Error::InvalidParameter {
                name: "switch_off_resistance",
                reason: format!(
                    "must exceed switch_on_resistance ({} Ω)",
                    self.switch_on_resistance
                ),
            });
        }
        require_non_negative("comparator_power", self.comparator_power)?;
        require_positive("supply_voltage", self.supply_voltage)?;
        if let Some(rm) = self.equivalent_resistance_override {
            require_non_negative("equivalent_resistance_override", rm)?;
        }
        for w in self.switch_overhead.windows(2) {
            if w[1].supply_voltage <= w[0].supply_voltage {
                return Err(Error::InvalidParameter {
                    name: "switch_overhead",
                    reason: "entries must be sorted by strictly increasing supply_voltage".into(),
                });
            }
        }
        for entry in &self.switch_overhead {
            require_positive("switch_overhead.supply_voltage", entry.supply_voltage)?;
            require_non_negative("switch_overhead.constant", entry.constant)?;
            if !entry.per_ohm.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "switch_overhead.per_ohm",
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }

    /// `Rm` at supply frequency `f`.
    pub fn internal_resistance(&self, frequency: f64) -> f64 {
        self.equivalent_resistance_override.unwrap_or_else(|| {
            equivalent_resistance(self.stages, self.stage_capacitance, frequency)
        })
    }

    /// Loaded output including switch and comparator overhead.
    pub fn evaluate(&self, input_voltage: f64, frequency: f64, load: f64) -> VmOperatingPoint {
        let rm = self.internal_resistance(frequency);
        let mut point = loaded_output(self.stages, input_voltage, rm, load);
        point.apply_overhead(overhead_power(self, load));
        point
    }

    /// Switch-loss coefficients at the design's supply voltage, interpolated
    /// linearly between table entries and clamped at the ends.
    fn switch_loss_at_supply(&self) -> (f64, f64) {
        let table = &self.switch_overhead;
        let v = self.supply_voltage;
        match table.len() {
            0 => (0.0, 0.0),
            _ if v <= table[0].supply_voltage => (table[0].constant, table[0].per_ohm),
            _ if v >= table[table.len() - 1].supply_voltage => {
                let last = table[table.len() - 1];
                (last.constant, last.per_ohm)
            }
            _ => {
                let i = table.partition_point(|e| e.supply_voltage <= v);
                let (lo, hi) = (table[i - 1], table[i]);
                let t = (v - lo.supply_voltage) / (hi.supply_voltage - lo.supply_voltage);
                (
                    lo.constant + t * (hi.constant - lo.constant),
                    lo.per_ohm + t * (hi.per_ohm - lo.per_ohm),
                )
            }
        }
    }
}

/// Internal resistance of an `n`-stage multiplier with stage capacitance `C`
/// driven at `f`.
pub fn equivalent_resistance(stages: u32, capacitance: f64, frequency: f64) -> f64 {
    let n = f64::from(stages);
    let numerator = if stages % 2 == 1 {
        n * (n * n - 1.0)
    } else {
        n * (n * n + 2.0)
    };
    numerator / (12.0 * capacitance * frequency)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputVoltage {
    pub volts: f64,
    /// The droop reached `n·Vi`; the analytic model no longer applies and
    /// the value is clamped at zero.
    pub saturated: bool,
}

/// `Vo = n·Vi − I·Rm` for a given load current.
pub fn output_voltage(stages: u32, input_voltage: f64, current: f64, rm: f64) -> OutputVoltage {
    let vo = f64::from(stages) * input_voltage - current * rm;
    if vo < 0.0 || (vo == 0.0 && current > 0.0) {
        OutputVoltage {
            volts: 0.0,
            saturated: true,
        }
    } else {
        OutputVoltage {
            volts: vo,
            saturated: false,
        }
    }
}

/// `(Rl + Rm)/n²`: the resistance the source sees.
pub fn input_resistance(stages: u32, rm: f64, load: f64) -> f64 {
    let n = f64::from(stages);
    (load + rm) / (n * n)
}

/// Comparator draw plus interpolated switch loss at `load`, never negative.
pub fn overhead_power(design: &VmDesign, load: f64) -> f64 {
    let (constant, per_ohm) = design.switch_loss_at_supply();
    let switch = if per_ohm == 0.0 {
        constant
    } else {
        constant + per_ohm * load
    };
    (design.comparator_power + switch).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VmOperatingPoint {
    pub load_resistance: f64,
    pub internal_resistance: f64,
    /// Peak AC input, V.
    pub input_voltage_peak: f64,
    /// DC output, V.
    pub output_voltage: f64,
    pub load_current: f64,
    pub lambda: f64,
    pub eta: f64,
    pub load_power: f64,
    /// `n²·Vi²/(Rl + Rm)`, the load power plus `I²·Rm`.
    pub input_power: f64,
    pub overhead_power: f64,
    pub eta_overall: f64,
}

impl VmOperatingPoint {
    pub(crate) fn apply_overhead(&mut self, overhead: f64) {
        self.overhead_power = overhead;
        let total = self.input_power + overhead;
        self.eta_overall = if total > 0.0 {
            self.load_power / total
        } else {
            0.0
        };
    }

    /// `I²·Rm`.
    pub fn conduction_loss(&self) -> f64 {
        self.load_current * self.load_current * self.internal_resistance
    }
}

/// Closed-form operating point with a resistive load and no overhead.
///
/// A zero input yields an all-zero point (λ = η = 0).
pub fn loaded_output(stages: u32, input_voltage: f64, rm: f64, load: f64) -> VmOperatingPoint {
    let n = f64::from(stages);
    let open = load.is_infinite();
    let eta = if open { 1.0 } else { load / (load + rm) };
    let ideal = n * input_voltage;
    let vo = ideal * eta;
    let (current, load_power, input_power) = if open {
        (0.0, 0.0, 0.0)
    } else {
        (vo / load, vo * vo / load, ideal * ideal / (load + rm))
    };
    let (lambda, eta) = if input_voltage > 0.0 {
        (n * eta, eta)
    } else {
        (0.0, 0.0)
    };
    VmOperatingPoint {
        load_resistance: load,
        internal_resistance: rm,
        input_voltage_peak: input_voltage,
        output_voltage: vo,
        load_current: current,
        lambda,
        eta,
        load_power,
        input_power,
        overhead_power: 0.0,
        eta_overall: if input_power > 0.0 { load_power / input_power } else { 0.0 },
    }
}

/// Solves the switch-loss constant at the design's supply voltage so that the
/// operating point `(Vi, f, Rl)` reaches `target_eta_overall`. Any existing
/// load slope at that supply voltage is kept.
pub fn calibrate_switch_overhead(
    design: &VmDesign,
    input_voltage: f64,
    frequency: f64,
    load: f64,
    target_eta_overall: f64,
) -> Result<VmDesign> {
    design.validate()?;
    require_positive("input_voltage", input_voltage)?;
    require_positive("load", load)?;
    if !(target_eta_overall > 0.0 && target_eta_overall <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "target_eta_overall",
            reason: format!("must lie in (0, 1], got {target_eta_overall}"),
        });
    }
    let point = loaded_output(
        design.stages,
        input_voltage,
        design.internal_resistance(frequency),
        load,
    );
    let required_overhead = point.load_power / target_eta_overall - point.input_power;
    let per_ohm = design
        .switch_overhead
        .iter()
        .find(|e| e.supply_voltage == design.supply_voltage)
        .map_or(0.0, |e| e.per_ohm);
    let constant = required_overhead - design.comparator_power - per_ohm * load;
    if constant < 0.0 {
        return Err(Error::InvalidParameter {
            name: "target_eta_overall",
            reason: format!(
                "unreachable: the converter alone already gives eta_overall = {}",
                point.load_power / (point.input_power + design.comparator_power + per_ohm * load)
            ),
        });
    }

    let mut calibrated = design.clone();
    let entry = SwitchLoss {
        supply_voltage: design.supply_voltage,
        constant,
        per_ohm,
    };
    match calibrated
        .switch_overhead
        .iter_mut()
        .find(|e| e.supply_voltage == design.supply_voltage)
    {
        Some(existing) => *existing = entry,
        None => {
            let at = calibrated
                .switch_overhead
                .partition_point(|e| e.supply_voltage < design.supply_voltage);
            calibrated.switch_overhead.insert(at, entry);
        }
    }
    Ok(calibrated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn equivalent_resistance_examples() {
        assert_relative_eq!(equivalent_resistance(4, 100e-6, 14.0), 4285.714285714, max_relative = 1e-10);
        assert_relative_eq!(equivalent_resistance(4, 100e-6, 53.0), 1132.075471698, max_relative = 1e-10);
        assert_eq!(equivalent_resistance(1, 100e-6, 50.0), 0.0);
        // odd: 3·8/12 = 2
        assert_relative_eq!(equivalent_resistance(3, 1.0, 1.0), 2.0, max_relative = 1e-15);
        // even: 2·6/12 = 1
        assert_relative_eq!(equivalent_resistance(2, 1.0, 1.0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn output_voltage_examples() {
        let v = output_voltage(4, 0.58, 0.0, 1200.0);
        assert!(!v.saturated);
        assert_relative_eq!(v.volts, 2.32, max_relative = 1e-12);

        let v = output_voltage(4, 1.0, 4e-3, 1000.0);
        assert_eq!(v.volts, 0.0);
        assert!(v.saturated);
        assert!(!output_voltage(4, 0.0, 0.0, 1000.0).saturated);

        let v = output_voltage(4, 1.0, 5e-3, 1000.0);
        assert!(v.saturated);
        assert_eq!(v.volts, 0.0);
    }

    #[test]
    fn loaded_output_examples() {
        let p = loaded_output(4, 0.3, 1132.0, 50_000.0);
        assert_relative_eq!(p.lambda, 4.0 * 50_000.0 / 51_132.0, max_relative = 1e-12);
        assert_relative_eq!(p.lambda, 3.911, epsilon = 5e-4);

        let p = loaded_output(4, 0.3, 4286.0, 1600.0);
        assert_relative_eq!(p.lambda, 1.088, epsilon = 1e-3);

        let p = loaded_output(4, 0.3, 4286.0, f64::INFINITY);
        assert_eq!(p.lambda, 4.0);
        assert_eq!(p.eta, 1.0);
        assert_eq!(p.load_current, 0.0);

        let p = loaded_output(4, 0.0, 4286.0, 1000.0);
        assert_eq!((p.output_voltage, p.lambda, p.eta, p.load_power, p.input_power), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn ideal_multiplier_has_unit_efficiency() {
        let p = loaded_output(4, 0.5, 0.0, 123.0);
        assert_eq!(p.output_voltage, 2.0);
        assert_eq!(p.eta, 1.0);
    }

    #[test]
    fn input_resistance_examples() {
        assert_eq!(input_resistance(4, 0.0, 16.0), 1.0);
        assert_relative_eq!(input_resistance(4, 1132.0, 50_000.0), 3195.75, max_relative = 1e-12);
        assert!(input_resistance(4, 1132.0, f64::INFINITY).is_infinite());
    }

    #[test]
    fn overhead_defaults() {
        let design = VmDesign::default();
        assert_relative_eq!(overhead_power(&design, 1e3), 0.5e-6);
        assert_relative_eq!(overhead_power(&design, 1e6), 0.5e-6);
        let zeroed = VmDesign {
            comparator_power: 0.0,
            ..VmDesign::default()
        };
        assert_eq!(overhead_power(&zeroed, 1e4), 0.0);
    }

    #[test]
    fn switch_loss_interpolates_between_supplies() {
        let design = VmDesign {
            comparator_power: 0.0,
            supply_voltage: 2.2,
            switch_overhead: vec![
                SwitchLoss { supply_voltage: 2.0, constant: 10e-6, per_ohm: 0.0 },
                SwitchLoss { supply_voltage: 2.4, constant: 30e-6, per_ohm: 1e-10 },
            ],
            ..VmDesign::default()
        };
        assert_relative_eq!(overhead_power(&design, 1e4), 20e-6 + 0.5e-10 * 1e4, max_relative = 1e-12);
        let low = VmDesign { supply_voltage: 1.64, ..design.clone() };
        assert_relative_eq!(overhead_power(&low, 1e4), 10e-6, max_relative = 1e-12);
        let negative = VmDesign {
            switch_overhead: vec![SwitchLoss { supply_voltage: 2.2, constant: 0.0, per_ohm: -1.0 }],
            ..design
        };
        assert_eq!(overhead_power(&negative, 1e4), 0.0);
    }

    #[test]
    fn calibration_round_trips() {
        let design = VmDesign::default();
        let rl = 19.0 * design.internal_resistance(50.0);
        let calibrated = calibrate_switch_overhead(&design, 0.58, 50.0, rl, 0.88).unwrap();
        assert!((calibrated.evaluate(0.58, 50.0, rl).eta_overall - 0.88).abs() < 1e-12);
        // Unreachable: at Rl = Rm the converter alone is at 50 %.
        let rm = design.internal_resistance(50.0);
        assert!(calibrate_switch_overhead(&design, 0.58, 50.0, rm, 0.88).is_err());
    }

    #[test]
    fn design_validation() {
        assert!(VmDesign::with_stages(0, 1e-6).is_err());
        assert!(VmDesign::with_stages(2, 0.0).is_err());
        let bad = VmDesign { switch_off_resistance: 0.1, ..VmDesign::default() };
        assert!(bad.validate().is_err());
        let unsorted = VmDesign {
            switch_overhead: vec![
                SwitchLoss { supply_voltage: 2.4, constant: 0.0, per_ohm: 0.0 },
                SwitchLoss { supply_voltage: 2.0, constant: 0.0, per_ohm: 0.0 },
            ],
            ..VmDesign::default()
        };
        assert!(unsorted.validate().is_err());
        assert!(VmDesign::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn closed_form_identities(
            stages in 1u32..=8,
            capacitance in 1e-7f64..1e-2,
            frequency in 1.0f64..1e3,
            load in 1.0f64..1e7,
            vi in 1e-3f64..10.0,
        ) {
            let rm = equivalent_resistance(stages, capacitance, frequency);
            let p = loaded_output(stages, vi, rm, load);
            let n = f64::from(stages);
            prop_assert!((p.lambda - n * p.eta).abs() <= 4.0 * f64::EPSILON * n);
            prop_assert!((p.eta - load / (load + rm)).abs() <= 2.0 * f64::EPSILON);
            let loss = p.input_power - p.load_power;
            prop_assert!((loss - p.conduction_loss()).abs() <= 1e-12 * p.input_power);
            prop_assert!(p.load_power <= p.input_power);
            prop_assert!(p.lambda >= 0.0 && p.lambda <= n);
            let raw = output_voltage(stages, vi, p.load_current, rm);
            prop_assert!((raw.volts - p.output_voltage).abs() <= 1e-9 * n * vi);
        }

        #[test]
        fn rm_grows_with_stages_and_scales_inversely(
            stages in 1u32..16,
            capacitance in 1e-7f64..1e-2,
            frequency in 1.0f64..1e3,
        ) {
            let a = equivalent_resistance(stages, capacitance, frequency);
            let b = equivalent_resistance(stages + 1, capacitance, frequency);
            prop_assert!(b > a);
            let scaled = equivalent_resistance(stages, 2.0 * capacitance, frequency);
            prop_assert!((scaled - a / 2.0).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
