use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ladder::{LadderCircuit, Terminal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub steps_per_cycle: usize,
    pub max_cycles: usize,
    /// Relative change of the per-cycle mean output below which a cycle
    /// counts as settled.
    pub convergence_tol: f64,
    #[serde(skip)]
    pub waveform: Option<WaveformConfig>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps_per_cycle: 2000,
            max_cycles: 5000,
            convergence_tol: 1e-5,
            waveform: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_cycle < 8 {
            return Err(Error::InvalidParameter {
                name: "steps_per_cycle",
                reason: format!("need at least 8, got {}", self.steps_per_cycle),
            });
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidParameter {
                name: "max_cycles",
                reason: "must be positive".into(),
            });
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "convergence_tol",
                reason: format!("must be finite and > 0, got {}", self.convergence_tol),
            });
        }
        if let Some(w) = self.waveform {
            if w.decimation == 0 || w.cycles == 0 {
                return Err(Error::InvalidParameter {
                    name: "waveform",
                    reason: "decimation and cycles must be positive".into(),
                });
            }
        }
        Ok(())
    }
}

/// Number of consecutive settled cycles required to stop.
pub const SETTLED_CYCLES: usize = 3;

/// Waveform capture: every `decimation`-th step of the final `cycles` cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveformConfig {
    pub decimation: usize,
    pub cycles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSample {
    pub t: f64,
    pub v_source: f64,
    pub v_out: f64,
    pub i_load: f64,
    pub v_caps: Vec<f64>,
}

/// Steady-state metrics of the final simulated cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainResult {
    pub stages: usize,
    pub input_amplitude: f64,
    pub load: f64,
    /// Mean output over the final cycle, V.
    pub mean_output_voltage: f64,
    pub ripple_pp: f64,
    pub min_output_voltage: f64,
    pub max_output_voltage: f64,
    pub mean_load_current: f64,
    pub cycles: usize,
    /// Energies over the final cycle, J.
    pub input_energy: f64,
    pub load_energy: f64,
    pub switch_energy: f64,
    pub capacitor_energy_delta: f64,
    /// `(load + switch + Δcaps) / input`; exactly 1 for a perfect integrator.
    pub energy_audit_ratio: f64,
    pub lambda: f64,
    pub eta: f64,
    /// Largest capacitor voltage seen over the whole run.
    pub max_capacitor_voltage: f64,
    pub final_capacitor_voltages: Vec<f64>,
    pub waveform: Option<Vec<WaveformSample>>,
}

struct StepOutput {
    v_source: f64,
    v_out: f64,
    /// Power delivered by the source.
    p_source: f64,
    p_switch: f64,
    p_load: f64,
}

/// Fixed-step integrator: backward Euler for the first step, second-order
/// backward difference (BDF2) afterwards. Switches are two-valued resistors
/// whose state follows the ideal-diode rule, resolved at every step.
struct Integrator {
    circuit: LadderCircuit,
    dt: f64,
    older: Option<Vec<f64>>,
    conducting: Vec<bool>,
    g_on: f64,
    g_off: f64,
}

impl Integrator {
    fn new(circuit: LadderCircuit, dt: f64) -> Self {
        let conducting = circuit.cells.iter().map(|c| c.conducting).collect();
        let g_on = if circuit.switch_on_resistance > 0.0 {
            1.0 / circuit.switch_on_resistance
        } else {
            1e12
        };
        let g_off = 1.0 / circuit.switch_off_resistance;
        Self {
            circuit,
            dt,
            older: None,
            conducting,
            g_on,
            g_off,
        }
    }

    /// Companion model of capacitor `k`: current from upper to lower terminal
    /// is `g·v_new + offset`.
    fn companion(&self, k: usize) -> (f64, f64) {
        let c = self.circuit.cells[k].capacitance / self.dt;
        let old = self.circuit.cells[k].voltage;
        match &self.older {
            None => (c, -c * old),
            Some(older) => (1.5 * c, -c * (2.0 * old - 0.5 * older[k])),
        }
    }

    fn switch_conductance(&self, on: bool) -> f64 {
        if on {
            self.g_on
        } else {
            self.g_off
        }
    }

    fn solve(&self, v_source: f64, states: &[bool]) -> DVector<f64> {
        let n = self.circuit.stages();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        let known = |t: Terminal| match t {
            Terminal::Ground => 0.0,
            Terminal::Source => v_source,
            Terminal::Node(_) => unreachable!(),
        };
        // Element current p → q is g·(vp − vq) + offset.
        let mut stamp = |p: Terminal, q: Terminal, g: f64, offset: f64| {
            if let Terminal::Node(i) = p {
                a[(i, i)] += g;
                match q {
                    Terminal::Node(j) => a[(i, j)] -= g,
                    other => b[i] += g * known(other),
                }
                b[i] -= offset;
            }
            if let Terminal::Node(j) = q {
                a[(j, j)] += g;
                match p {
                    Terminal::Node(i) => a[(j, i)] -= g,
                    other => b[j] += g * known(other),
                }
                b[j] += offset;
            }
        };
        for (k, &on) in states.iter().enumerate().take(n) {
            let (upper, lower) = self.circuit.capacitor_terminals(k);
            let (g, offset) = self.companion(k);
            stamp(upper, lower, g, offset);
            let (anode, cathode) = self.circuit.switch_terminals(k);
            stamp(anode, cathode, self.switch_conductance(on), 0.0);
        }
        stamp(self.circuit.output(), Terminal::Ground, 1.0 / self.circuit.load, 0.0);
        a.lu().solve(&b).expect("ladder conductance matrix is non-singular")
    }

    fn voltage(nodes: &DVector<f64>, v_source: f64, t: Terminal) -> f64 {
        match t {
            Terminal::Ground => 0.0,
            Terminal::Source => v_source,
            Terminal::Node(i) => nodes[i],
        }
    }

    fn forward_voltages(&self, nodes: &DVector<f64>, v_source: f64) -> Vec<f64> {
        (0..self.circuit.stages())
            .map(|k| {
                let (anode, cathode) = self.circuit.switch_terminals(k);
                Self::voltage(nodes, v_source, anode) - Self::voltage(nodes, v_source, cathode)
            })
            .collect()
    }

    /// Advances to time `t`.
    fn step(&mut self, t: f64) -> StepOutput {
        let n = self.circuit.stages();
        let v_source = self.circuit.source.voltage(t);
        let mut states = self.conducting.clone();
        let mut nodes = self.solve(v_source, &states);
        // Ideal-diode consistency: conduct iff forward-biased. Flip the worst
        // offender and re-solve, at most 2n times.
        for _ in 0..2 * n {
            let forward = self.forward_voltages(&nodes, v_source);
            let worst = forward
                .iter()
                .zip(&states)
                .enumerate()
                .filter(|(_, (&vf, &on))| (vf > 0.0) != on)
                .max_by(|(_, (a, _)), (_, (b, _))| a.abs().total_cmp(&b.abs()))
                .map(|(k, _)| k);
            match worst {
                Some(k) => {
                    states[k] = !states[k];
                    nodes = self.solve(v_source, &states);
                }
                None => break,
            }
        }

        let mut p_source_current = 0.0;
        let mut p_switch = 0.0;
        let mut new_voltages = Vec::with_capacity(n);
        for (k, &on) in states.iter().enumerate().take(n) {
            let (upper, lower) = self.circuit.capacitor_terminals(k);
            let v_cap =
                Self::voltage(&nodes, v_source, upper) - Self::voltage(&nodes, v_source, lower);
            let (g, offset) = self.companion(k);
            let i_cap = g * v_cap + offset;
            if upper == Terminal::Source {
                p_source_current += i_cap;
            }
            if lower == Terminal::Source {
                p_source_current -= i_cap;
            }
            new_voltages.push(v_cap);

            let (anode, cathode) = self.circuit.switch_terminals(k);
            let vf = Self::voltage(&nodes, v_source, anode) - Self::voltage(&nodes, v_source, cathode);
            let g = self.switch_conductance(on);
            p_switch += g * vf * vf;
            if anode == Terminal::Source {
                p_source_current += g * vf;
            }
            if cathode == Terminal::Source {
                p_source_current -= g * vf;
            }
        }
        let v_out = Self::voltage(&nodes, v_source, self.circuit.output());

        self.older = Some(self.circuit.capacitor_voltages());
        for (cell, (&v, &on)) in self.circuit.cells.iter_mut().zip(new_voltages.iter().zip(&states)) {
            cell.voltage = v;
            cell.conducting = on;
        }
        self.conducting = states;

        StepOutput {
            v_source,
            v_out,
            p_source: v_source * p_source_current,
            p_switch,
            p_load: v_out * v_out / self.circuit.load,
        }
    }
}

#[derive(Default)]
struct CycleTotals {
    input: f64,
    load: f64,
    switch: f64,
    sum_out: f64,
    min_out: f64,
    max_out: f64,
}

/// Integrates the ladder from its current state until the per-cycle mean
/// output settles, then reports the final cycle.
pub fn simulate(circuit: &LadderCircuit, config: &SimConfig) -> Result<TimeDomainResult> {
    config.validate()?;
    let steps = config.steps_per_cycle;
    let dt = circuit.source.period() / steps as f64;
    let mut integ = Integrator::new(circuit.clone(), dt);

    let mut previous_mean: Option<f64> = None;
    let mut settled = 0usize;
    let mut last_change = f64::INFINITY;
    let mut prev_power = (0.0, 0.0, 0.0);
    let mut max_cap = integ
        .circuit
        .cells
        .iter()
        .fold(0.0f64, |m, c| m.max(c.voltage.abs()));
    let mut captured: std::collections::VecDeque<Vec<WaveformSample>> = Default::default();

    for cycle in 1..=config.max_cycles {
        let start_energy = integ.circuit.stored_energy();
        let mut totals = CycleTotals {
            min_out: f64::INFINITY,
            max_out: f64::NEG_INFINITY,
            ..Default::default()
        };
        let mut samples = Vec::new();
        for s in 1..=steps {
            let t = ((cycle - 1) * steps + s) as f64 * dt;
            let out = integ.step(t);
            // trapezoidal quadrature of the branch powers
            totals.input += 0.5 * (prev_power.0 + out.p_source) * dt;
            totals.switch += 0.5 * (prev_power.1 + out.p_switch) * dt;
            totals.load += 0.5 * (prev_power.2 + out.p_load) * dt;
            prev_power = (out.p_source, out.p_switch, out.p_load);
            totals.sum_out += out.v_out;
            totals.min_out = totals.min_out.min(out.v_out);
            totals.max_out = totals.max_out.max(out.v_out);
            for c in &integ.circuit.cells {
                max_cap = max_cap.max(c.voltage.abs());
            }
            if let Some(w) = config.waveform {
                if s % w.decimation == 0 {
                    samples.push(WaveformSample {
                        t,
                        v_source: out.v_source,
                        v_out: out.v_out,
                        i_load: out.v_out / integ.circuit.load,
                        v_caps: integ.circuit.capacitor_voltages(),
                    });
                }
            }
        }
        if let Some(w) = config.waveform {
            captured.push_back(samples);
            while captured.len() > w.cycles {
                captured.pop_front();
            }
        }

        let mean = totals.sum_out / steps as f64;
        let change = match previous_mean {
            None => f64::INFINITY,
            Some(prev) if prev == mean => 0.0,
            Some(prev) => (mean - prev).abs() / mean.abs().max(prev.abs()),
        };
        previous_mean = Some(mean);
        last_change = change;
        settled = if change < config.convergence_tol { settled + 1 } else { 0 };

        if settled >= SETTLED_CYCLES {
            let delta = integ.circuit.stored_energy() - start_energy;
            let accounted = totals.load + totals.switch + delta;
            let audit = if totals.input != 0.0 {
                accounted / totals.input
            } else if accounted == 0.0 {
                1.0
            } else {
                f64::INFINITY
            };
            let n = integ.circuit.stages() as f64;
            let amplitude = integ.circuit.source.amplitude;
            let lambda = if amplitude > 0.0 { mean / amplitude } else { 0.0 };
            return Ok(TimeDomainResult {
                stages: integ.circuit.stages(),
                input_amplitude: amplitude,
                load: integ.circuit.load,
                mean_output_voltage: mean,
                ripple_pp: totals.max_out - totals.min_out,
                min_output_voltage: totals.min_out,
                max_output_voltage: totals.max_out,
                mean_load_current: mean / integ.circuit.load,
                cycles: cycle,
                input_energy: totals.input,
                load_energy: totals.load,
                switch_energy: totals.switch,
                capacitor_energy_delta: delta,
                energy_audit_ratio: audit,
                lambda,
                eta: lambda / n,
                max_capacitor_voltage: max_cap,
                final_capacitor_voltages: integ.circuit.capacitor_voltages(),
                waveform: config
                    .waveform
                    .map(|_| captured.into_iter().flatten().collect()),
            });
        }
    }
    Err(Error::NoConvergence {
        cycles: config.max_cycles,
        last_change,
    })
}
