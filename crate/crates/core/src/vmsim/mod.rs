//! Time-domain simulation of the switched-capacitor multiplier ladder.
//!
//! Each switch is a two-state resistor driven by an ideal comparator: it
//! conducts exactly when forward-biased. The resulting piecewise-linear RC
//! network is integrated at a fixed step until the per-cycle mean output
//! stops moving, and the final cycle is audited for energy balance.

mod fit;
mod ladder;
mod solver;
mod waveform;

pub use fit::{empirical_equivalent_resistance, extract_equivalent_resistance, EmpiricalRm, RmFit};
pub use ladder::{build_ladder, AcSource, Cell, LadderCircuit};
pub use solver::{simulate, SimConfig, TimeDomainResult, WaveformConfig, WaveformSample, SETTLED_CYCLES};
pub use waveform::write_waveform_csv;
