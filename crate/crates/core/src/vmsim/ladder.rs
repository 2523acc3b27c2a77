use std::f64::consts::PI;

use crate::error::{require_non_negative, require_positive, Result};
use crate::vmcalc::VmDesign;

/// Sinusoidal drive `amplitude·sin(2πft)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcSource {
    /// Peak volts.
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
}

impl AcSource {
    pub fn voltage(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t).sin()
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }
}

/// A circuit terminal: one of the two rails or an unknown node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Terminal {
    Ground,
    Source,
    Node(usize),
}

/// One switch–capacitor cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub capacitance: f64,
    /// Voltage across the capacitor, upper terminal minus lower.
    pub voltage: f64,
    /// Switch conduction state.
    pub conducting: bool,
}

/// Half-wave multiplier ladder.
///
/// Ladder nodes are numbered `1..=n`; node `k` carries cell `k`. Capacitor `k`
/// joins node `k` to node `k − 2` and switch `k` conducts from node `k − 1`
/// to node `k`. The two rail positions `−1` and `0` are the source and
/// ground, assigned so that node `n` always sits on the ground-referenced
/// (smoothing) column: source at `−1` for even `n`, at `0` for odd `n`. With
/// one cell this is a peak rectifier, with two a Greinacher doubler. The
/// load connects node `n` to ground.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderCircuit {
    pub cells: Vec<Cell>,
    pub source: AcSource,
    pub load: f64,
    pub switch_on_resistance: f64,
    pub switch_off_resistance: f64,
}

impl LadderCircuit {
    pub fn stages(&self) -> usize {
        self.cells.len()
    }

    /// Terminal at ladder position `position` (`−1 ..= n`).
    pub(crate) fn terminal(&self, position: isize) -> Terminal {
        let even = self.stages().is_multiple_of(2);
        match (position, even) {
            (-1, true) | (0, false) => Terminal::Source,
            (-1, false) | (0, true) => Terminal::Ground,
            (k, _) => Terminal::Node(k as usize - 1),
        }
    }

    /// (upper, lower) terminals of capacitor `k` (0-based).
    pub(crate) fn capacitor_terminals(&self, k: usize) -> (Terminal, Terminal) {
        let pos = k as isize + 1;
        (self.terminal(pos), self.terminal(pos - 2))
    }

    /// (anode, cathode) terminals of switch `k` (0-based).
    pub(crate) fn switch_terminals(&self, k: usize) -> (Terminal, Terminal) {
        let pos = k as isize + 1;
        (self.terminal(pos - 1), self.terminal(pos))
    }

    pub(crate) fn output(&self) -> Terminal {
        Terminal::Node(self.stages() - 1)
    }

    pub fn capacitor_voltages(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.voltage).collect()
    }

    /// Stored energy `Σ ½·C·v²`.
    pub fn stored_energy(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| 0.5 * c.capacitance * c.voltage * c.voltage)
            .sum()
    }
}

/// Builds an `n`-stage ladder at rest (all capacitors discharged, switches off).
pub fn build_ladder(design: &VmDesign, source: AcSource, load: f64) -> Result<LadderCircuit> {
    design.validate()?;
    require_non_negative("source.amplitude", source.amplitude)?;
    require_positive("source.frequency", source.frequency)?;
    require_positive("load", load)?;
    let cells = (0..design.stages)
        .map(|_| Cell {
            capacitance: design.stage_capacitance,
            voltage: 0.0,
            conducting: false,
        })
        .collect();
    Ok(LadderCircuit {
        cells,
        source,
        load,
        switch_on_resistance: design.switch_on_resistance,
        switch_off_resistance: design.switch_off_resistance,
    })
}
