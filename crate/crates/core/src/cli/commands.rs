use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::coupled::{find_optimum, sweep_load};
use crate::genmodel::{
    frequency_response, max_power, optimal_load, resonant_frequency, GeneratorParams, Load,
};
use crate::optimize::LoadGrid;
use crate::presets::{prototype_multiplier, Preset};
use crate::vmsim::{
    build_ladder, empirical_equivalent_resistance, simulate, write_waveform_csv, AcSource,
    WaveformConfig,
};

use super::config::{preset_dump, GeneratorSpec, ResolvedGenerator, RunConfig};
use super::{CliError, Command, GridArgs, PresetAction, Source};

pub const FREQ_SWEEP_HEADER: &str = "f_hz,x_m,v_noload_pk";
pub const LOAD_SWEEP_HEADER: &str =
    "r_load_ohm,r_in_ohm,de_nspm,vi_pk_v,vo_v,lambda,eta,p_load_w,eta_overall";
pub const VM_ANALYTIC_HEADER: &str = "r_load_ohm,vo_v,lambda,eta,p_load_w,p_in_w";
pub const VM_SIM_SUMMARY_KEYS: [&str; 7] = [
    "vo_mean",
    "ripple_pp",
    "cycles",
    "lambda",
    "eta",
    "energy_audit_ratio",
    "empirical_rm",
];

const DEFAULT_GRID_POINTS: usize = 241;

pub(super) fn dispatch(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::GenInfo { source, json } => gen_info(source, *json, out),
        Command::FreqSweep {
            source,
            fmin,
            fmax,
            points,
            out: path,
        } => freq_sweep(source, *fmin, *fmax, *points, path.as_deref(), out),
        Command::LoadSweep {
            source,
            vm,
            grid,
            out: path,
        } => load_sweep(source, *vm, grid, path.as_deref(), out),
        Command::VmAnalytic {
            config,
            stages,
            capacitance,
            frequency,
            vi,
            grid,
            out: path,
        } => {
            let cfg = load_config(config.as_deref())?;
            let mut design = cfg.vm.clone().unwrap_or_else(prototype_multiplier);
            if let Some(n) = stages {
                design.stages = *n;
            }
            if let Some(c) = capacitance {
                design.stage_capacitance = *c;
            }
            design.validate()?;
            let grid = resolve_grid(grid, cfg.sweep, Some(LoadGrid { min: 100.0, max: 1e6, points: 201 }))?;
            vm_analytic(&design, *frequency, *vi, grid, path.as_deref().or(cfg.output.csv.as_deref()), out)
        }
        Command::VmSim { config, waveform } => {
            let cfg = load_config(config.as_deref())?;
            vm_sim(&cfg, waveform.as_deref(), out)
        }
        Command::Preset {
            action: PresetAction::Dump { name },
        } => {
            let text = serde_json::to_string_pretty(&preset_dump(*name)).expect("dump serializes");
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::from_path(p),
        None => Ok(RunConfig::default()),
    }
}

fn resolve_source(source: &Source) -> Result<(RunConfig, ResolvedGenerator), CliError> {
    let mut cfg = load_config(source.config.as_deref())?;
    if let Some(name) = source.preset {
        cfg.generator = Some(GeneratorSpec::Preset(name));
    }
    let generator = cfg.resolve_generator()?;
    Ok((cfg, generator))
}

fn resolve_grid(
    args: &GridArgs,
    from_config: Option<LoadGrid>,
    fallback: Option<LoadGrid>,
) -> Result<LoadGrid, CliError> {
    let base = from_config.or(fallback);
    let grid = match (base, args.min, args.max) {
        (Some(b), min, max) => LoadGrid {
            min: min.unwrap_or(b.min),
            max: max.unwrap_or(b.max),
            points: args.points.unwrap_or(b.points),
        },
        (None, Some(min), Some(max)) => LoadGrid {
            min,
            max,
            points: args.points.unwrap_or(DEFAULT_GRID_POINTS),
        },
        (None, _, _) => {
            return Err(CliError::config(
                "sweep: missing section (or pass --min and --max)",
            ))
        }
    };
    grid.validate()?;
    Ok(grid)
}

/// Sends `text` to `path` when given, otherwise to `out`.
fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_row(buf: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            buf.push(',');
        }
        write!(buf, "{v}").unwrap();
    }
    buf.push('\n');
}

#[derive(Debug, Serialize)]
struct GenInfo {
    generator: String,
    linearized: bool,
    resonant_frequency_hz: f64,
    acceleration_mps2: f64,
    max_power_w: f64,
    optimal_load_ohm: f64,
    emf_open_circuit_pk_v: f64,
    params: GeneratorParams,
}

fn gen_info(source: &Source, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, g) = resolve_source(source)?;
    let f0 = resonant_frequency(&g.params);
    let acceleration = g.excitation.acceleration;
    let info = GenInfo {
        generator: g.preset.map_or_else(|| "inline".to_string(), |p| p.to_string()),
        linearized: g.preset.is_some_and(|p| Preset::get(p).linearized),
        resonant_frequency_hz: f0,
        acceleration_mps2: acceleration,
        max_power_w: max_power(&g.params, &g.excitation),
        optimal_load_ohm: optimal_load(&g.params)?,
        emf_open_circuit_pk_v: frequency_response(&g.params, acceleration, f0, Load::OpenCircuit).emf,
        params: g.params,
    };
    if json {
        let text = serde_json::to_string_pretty(&info).expect("report serializes");
        writeln!(out, "{text}")?;
    } else {
        writeln!(out, "generator: {}", info.generator)?;
        writeln!(out, "linearized: {}", info.linearized)?;
        writeln!(out, "resonant_frequency_hz: {}", info.resonant_frequency_hz)?;
        writeln!(out, "acceleration_mps2: {}", info.acceleration_mps2)?;
        writeln!(out, "max_power_w: {}", info.max_power_w)?;
        writeln!(out, "optimal_load_ohm: {}", info.optimal_load_ohm)?;
        writeln!(out, "emf_open_circuit_pk_v: {}", info.emf_open_circuit_pk_v)?;
    }
    Ok(())
}

fn freq_sweep(
    source: &Source,
    fmin: f64,
    fmax: f64,
    points: usize,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if !(fmin.is_finite() && fmax.is_finite() && fmin > 0.0 && fmin < fmax) {
        return Err(CliError::config(format!(
            "frequency range: need 0 < fmin < fmax, got [{fmin}, {fmax}]"
        )));
    }
    if points < 2 {
        return Err(CliError::config(format!("points: need at least 2, got {points}")));
    }
    let (cfg, g) = resolve_source(source)?;
    let last = points - 1;
    let mut csv = String::new();
    csv.push_str(FREQ_SWEEP_HEADER);
    csv.push('\n');
    for i in 0..points {
        let f = if i == last {
            fmax
        } else {
            fmin + (fmax - fmin) * i as f64 / last as f64
        };
        let r = frequency_response(&g.params, g.excitation.acceleration, f, Load::OpenCircuit);
        csv_row(&mut csv, &[f, r.displacement, r.emf]);
    }
    emit(&csv, path.or(cfg.output.csv.as_deref()), out)
}

fn load_sweep(
    source: &Source,
    with_vm: bool,
    grid_args: &GridArgs,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (cfg, g) = resolve_source(source)?;
    let grid = resolve_grid(grid_args, cfg.sweep, None)?;
    let design = with_vm.then(|| cfg.vm.clone().unwrap_or_else(prototype_multiplier));
    let sweep = sweep_load(&g.params, &g.excitation, design.as_ref(), grid)?;
    let (best_load, best_power) =
        find_optimum(&g.params, &g.excitation, design.as_ref(), grid.min, grid.max)?;

    let mut csv = String::new();
    csv.push_str(LOAD_SWEEP_HEADER);
    csv.push('\n');
    for p in &sweep.points {
        csv_row(
            &mut csv,
            &[
                p.load_resistance,
                p.input_resistance,
                p.em_damping,
                p.input_voltage,
                p.output_voltage,
                p.lambda,
                p.eta,
                p.load_power,
                p.eta_overall,
            ],
        );
    }
    emit(&csv, path.or(cfg.output.csv.as_deref()), out)?;
    writeln!(
        out,
        "# optimum r_load_ohm={best_load} p_load_w={best_power} grid_r_load_ohm={} grid_p_load_w={}",
        sweep.optimum.load, sweep.optimum.power
    )?;
    Ok(())
}

fn vm_analytic(
    design: &crate::vmcalc::VmDesign,
    frequency: f64,
    vi: f64,
    grid: LoadGrid,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    crate::error::require_positive("frequency", frequency)?;
    crate::error::require_non_negative("vi", vi)?;
    let mut csv = String::new();
    csv.push_str(VM_ANALYTIC_HEADER);
    csv.push('\n');
    for rl in grid.values() {
        let p = design.evaluate(vi, frequency, rl);
        csv_row(
            &mut csv,
            &[rl, p.output_voltage, p.lambda, p.eta, p.load_power, p.input_power],
        );
    }
    emit(&csv, path, out)?;
    writeln!(out, "# rm_ohm={}", design.internal_resistance(frequency))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct VmSimSummary {
    vo_mean: f64,
    ripple_pp: f64,
    cycles: usize,
    lambda: f64,
    eta: f64,
    energy_audit_ratio: f64,
    /// Crest-output fit; `null` when the input is zero.
    empirical_rm: Option<f64>,
}

fn vm_sim(cfg: &RunConfig, waveform: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let design = cfg.vm.clone().unwrap_or_else(prototype_multiplier);
    let sim = &cfg.sim;
    let source = AcSource {
        amplitude: sim.input_voltage,
        frequency: sim.frequency,
    };
    let waveform_path: Option<PathBuf> = waveform
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.waveform_csv.clone());
    let mut solver = sim.solver();
    if waveform_path.is_some() {
        solver.waveform = Some(WaveformConfig {
            decimation: cfg.output.decimation,
            cycles: cfg.output.waveform_cycles,
        });
    }
    solver.validate()?;

    let run = simulate(&build_ladder(&design, source, sim.load)?, &solver)?;
    let empirical_rm = if sim.input_voltage > 0.0 {
        Some(empirical_equivalent_resistance(&design, source, &sim.rm_loads, &solver)?.crest.resistance)
    } else {
        None
    };

    if let (Some(p), Some(samples)) = (&waveform_path, &run.waveform) {
        let mut buf = Vec::new();
        write_waveform_csv(&mut buf, run.stages, samples)?;
        std::fs::write(p, buf).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    }

    let summary = VmSimSummary {
        vo_mean: run.mean_output_voltage,
        ripple_pp: run.ripple_pp,
        cycles: run.cycles,
        lambda: run.lambda,
        eta: run.eta,
        energy_audit_ratio: run.energy_audit_ratio,
        empirical_rm,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    if let Some(p) = &cfg.output.summary_json {
        std::fs::write(p, &text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}
