use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vmcalc::VmDesign;

use super::ladder::{build_ladder, AcSource};
use super::solver::{simulate, SimConfig, TimeDomainResult};

/// Straight-line fit of `Vo = V0 − Rm·I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmFit {
    pub resistance: f64,
    /// Zero-current output `V0`.
    pub intercept: f64,
    /// `V0 / (n·Vi)`; 1 for an ideal multiplier.
    pub ideality: f64,
}

/// Least-squares internal resistance from `(I, Vo)` pairs taken at one input
/// amplitude `vi`.
pub fn extract_equivalent_resistance(points: &[(f64, f64)], stages: u32, vi: f64) -> Result<RmFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let m = points.len() as f64;
    let mean_i = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_v = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_i).powi(2)).sum();
    if sxx <= f64::EPSILON * mean_i.abs().max(f64::MIN_POSITIVE).powi(2) * m {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_i) * (p.1 - mean_v)).sum();
    let slope = sxy / sxx;
    let intercept = mean_v - slope * mean_i;
    Ok(RmFit {
        resistance: -slope,
        intercept,
        ideality: intercept / (f64::from(stages) * vi),
    })
}

/// Internal resistance recovered from a set of simulated loads.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRm {
    /// Fit of the per-cycle crest (maximum) output. This is the droop the
    /// parity formulas describe: for one and two stages they are exact.
    pub crest: RmFit,
    /// Fit of the per-cycle mean output.
    pub mean: RmFit,
    pub runs: Vec<TimeDomainResult>,
}

/// Simulates the ladder at each load (in parallel) and fits `Rm` against the
/// mean load current.
pub fn empirical_equivalent_resistance(
    design: &VmDesign,
    source: AcSource,
    loads: &[f64],
    config: &SimConfig,
) -> Result<EmpiricalRm> {
    let config = SimConfig {
        waveform: None,
        ..*config
    };
    let runs = loads
        .par_iter()
        .map(|&rl| simulate(&build_ladder(design, source, rl)?, &config))
        .collect::<Result<Vec<_>>>()?;
    let fit = |vo: fn(&TimeDomainResult) -> f64| {
        let points: Vec<(f64, f64)> = runs.iter().map(|r| (r.mean_load_current, vo(r))).collect();
        extract_equivalent_resistance(&points, design.stages, source.amplitude)
    };
    Ok(EmpiricalRm {
        crest: fit(|r| r.max_output_voltage)?,
        mean: fit(|r| r.mean_output_voltage)?,
        runs,
    })
}
