//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::process::Command;

use emharvest::coupled::{find_optimum, operating_point, sweep_load};
use emharvest::genmodel::{em_damping, max_power, optimal_load, Load};
use emharvest::optimize::LoadGrid;
use emharvest::presets::{prototype_multiplier, Preset};
use emharvest::vmcalc::{calibrate_switch_overhead, equivalent_resistance, loaded_output, VmDesign};
use emharvest::vmsim::{build_ladder, empirical_equivalent_resistance, simulate, AcSource, SimConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_internal_resistance() -> Outcome {
    let r14 = equivalent_resistance(4, 100e-6, 14.0);
    let r53 = equivalent_resistance(4, 100e-6, 53.0);
    let closed14 = 4.0 * (16.0 + 2.0) / (12.0 * 100e-6 * 14.0);
    let closed53 = 4.0 * (16.0 + 2.0) / (12.0 * 100e-6 * 53.0);
    check(
        rel(r14, closed14) < 1e-4
            && rel(r14, 4285.7) < 1e-4
            && rel(r14, 4300.0) < 5e-3
            && rel(r53, closed53) < 1e-4
            && rel(r53, 1132.1) < 1e-4
            && rel(r53, 1200.0) < 0.06,
        format!(
            "Rm(14 Hz) = {r14:.1} Ω ({:.2} % from 4.3 k), Rm(53 Hz) = {r53:.1} Ω ({:.2} % from 1.2 k)",
            100.0 * rel(r14, 4300.0),
            100.0 * rel(r53, 1200.0)
        ),
    )
}

fn c2_macro_resistive_optimum() -> Outcome {
    let p = Preset::macro_generator();
    let rl = optimal_load(&p.params).map_err(|e| e.to_string())?;
    let pmax = max_power(&p.params, &p.excitation);
    check(
        rel(rl, 100.0) < 1e-3 && rel(pmax, 260e-6) < 1e-3,
        format!("optimal load {rl:.4} Ω, max power {:.4} µW", pmax * 1e6),
    )
}

fn c3_matching_condition() -> Outcome {
    let p = Preset::macro_generator();
    let rl = optimal_load(&p.params).map_err(|e| e.to_string())?;
    let de = em_damping(&p.params, Load::Resistive(rl), p.excitation.omega());
    let err = rel(de, p.params.parasitic_damping);
    check(err < 1e-9, format!("|De − Dp|/Dp = {err:.2e}"))
}

fn c4_micro_coupled_optimum() -> Outcome {
    let p = Preset::micro_generator();
    let vm = prototype_multiplier();
    let grid = LoadGrid::new(1e3, 500e3, 241).map_err(|e| e.to_string())?;
    let with = sweep_load(&p.params, &p.excitation, Some(&vm), grid).map_err(|e| e.to_string())?;
    let without = sweep_load(&p.params, &p.excitation, None, grid).map_err(|e| e.to_string())?;
    let ratio = with.optimum.load / without.optimum.load;
    check(
        (40e3..=60e3).contains(&with.optimum.load) && (13.0..=20.0).contains(&ratio),
        format!(
            "optimum with VM {:.0} Ω, without {:.0} Ω, ratio {ratio:.2}",
            with.optimum.load, without.optimum.load
        ),
    )
}

fn c5_macro_coupled_optimum() -> Outcome {
    let p = Preset::macro_generator();
    let vm = prototype_multiplier();
    let grid = LoadGrid::new(100.0, 1e6, 241).map_err(|e| e.to_string())?;
    let sweep = sweep_load(&p.params, &p.excitation, Some(&vm), grid).map_err(|e| e.to_string())?;
    let optimum = sweep.optimum.load;
    let in_band = (4e3..=10e3).contains(&optimum);

    let band = LoadGrid::new(4e3, 10e3, 61).map_err(|e| e.to_string())?;
    let powers: Vec<(f64, f64)> = band
        .values()
        .into_iter()
        .map(|rl| {
            operating_point(&p.params, &p.excitation, Some(&vm), rl).map(|op| (rl, op.load_power))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let band_max = powers.iter().map(|&(_, w)| w).fold(f64::MIN, f64::max);
    let (worst_load, worst) = powers
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("band is non-empty");
    let flat = worst >= 0.95 * band_max;
    let at_5k5 = operating_point(&p.params, &p.excitation, Some(&vm), 5.5e3)
        .map_err(|e| e.to_string())?
        .load_power
        / band_max;
    check(
        in_band && flat,
        format!(
            "optimum {optimum:.0} Ω (in band: {in_band}); band minimum {:.3} of band maximum at {worst_load:.0} Ω \
             (needs ≥ 0.95); P(5.5 kΩ) = {at_5k5:.3} of band maximum",
            worst / band_max
        ),
    )
}

fn c6_analytic_identities() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (1u32..=8, 1e-7f64..1e-2, 1.0f64..1e4, 1.0f64..1e7, 0.01f64..10.0);
    let result = runner.run(&strategy, |(n, c, f, rl, vi)| {
        let rm = equivalent_resistance(n, c, f);
        let p = loaded_output(n, vi, rm, rl);
        let nf = f64::from(n);
        let eps = 4.0 * f64::EPSILON;
        prop_assert!((p.lambda - nf * p.eta).abs() <= eps * p.lambda);
        prop_assert!((p.eta - rl / (rl + rm)).abs() <= eps);
        let loss = p.load_current * p.load_current * rm;
        prop_assert!((p.input_power - p.load_power - loss).abs() <= 16.0 * f64::EPSILON * p.input_power);
        Ok(())
    });
    check(result.is_ok(), match result {
        Ok(()) => "1000 random (n, C, f, Rl, Vi) samples".into(),
        Err(e) => e.to_string(),
    })
}

fn c7_time_domain() -> Outcome {
    let vm = prototype_multiplier();
    let config = SimConfig::default();
    let no_load = simulate(
        &build_ladder(&vm, AcSource { amplitude: 0.58, frequency: 50.0 }, 1e8).map_err(|e| e.to_string())?,
        &config,
    )
    .map_err(|e| e.to_string())?;
    let source = AcSource { amplitude: 1.0, frequency: 53.0 };
    let fit = empirical_equivalent_resistance(&vm, source, &[5e3, 10e3, 20e3, 50e3], &config)
        .map_err(|e| e.to_string())?;
    let analytic = equivalent_resistance(4, 100e-6, 53.0);
    let fit_err = rel(fit.crest.resistance, analytic);
    let worst_audit = std::iter::once(&no_load)
        .chain(&fit.runs)
        .map(|r| (r.energy_audit_ratio - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        (3.92..=4.0).contains(&no_load.lambda) && fit_err < 0.15 && worst_audit < 0.01,
        format!(
            "no-load λ = {:.4} after {} cycles; fitted Rm = {:.0} Ω ({:.1} % from closed form); \
             worst audit error {worst_audit:.1e}",
            no_load.lambda,
            no_load.cycles,
            fit.crest.resistance,
            100.0 * fit_err
        ),
    )
}

fn c8_lossless_transformation() -> Outcome {
    let p = Preset::macro_generator();
    let (direct, _) = find_optimum(&p.params, &p.excitation, None, 10.0, 1e4).map_err(|e| e.to_string())?;
    let mut detail = format!("direct {direct:.3} Ω");
    let mut ok = true;
    for n in [2u32, 4] {
        let vm = VmDesign::lossless(n);
        let (with, _) =
            find_optimum(&p.params, &p.excitation, Some(&vm), 10.0, 1e5).map_err(|e| e.to_string())?;
        let err = rel(with, f64::from(n * n) * direct);
        ok &= err < 5e-3;
        detail.push_str(&format!("; n = {n}: {with:.2} Ω ({:.3} % from n²)", 100.0 * err));
    }
    check(ok, detail)
}

fn c9_overhead_calibration() -> Outcome {
    let design = VmDesign {
        comparator_power: 0.5e-6,
        supply_voltage: 2.0,
        ..prototype_multiplier()
    };
    let rl = 19.0 * design.internal_resistance(50.0);
    let calibrated =
        calibrate_switch_overhead(&design, 0.58, 50.0, rl, 0.88).map_err(|e| e.to_string())?;
    let eta = calibrated.evaluate(0.58, 50.0, rl).eta_overall;
    check(
        (eta - 0.88).abs() < 1e-6,
        format!(
            "switch constant {:.3} µW, re-evaluated eta_overall = {eta}",
            calibrated.switch_overhead[0].constant * 1e6
        ),
    )
}

fn c10_efficiency() -> Outcome {
    let p = Preset::micro_generator();
    let vm = prototype_multiplier();
    let (rl, power) =
        find_optimum(&p.params, &p.excitation, Some(&vm), 1e3, 5e5).map_err(|e| e.to_string())?;
    let op = operating_point(&p.params, &p.excitation, Some(&vm), rl).map_err(|e| e.to_string())?;
    check(
        op.eta >= 0.85,
        format!("η = {:.4} at {rl:.0} Ω, {:.2} µW", op.eta, power * 1e6),
    )
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("sim.json");
    std::fs::write(&cfg, r#"{"sim": {"input_voltage": 0.58, "frequency": 50}}"#).map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap().to_string();
    let runs: [Vec<&str>; 5] = [
        vec!["gen-info", "--preset", "micro", "--json"],
        vec!["freq-sweep", "--preset", "macro", "--fmin", "10", "--fmax", "18"],
        vec!["load-sweep", "--preset", "micro", "--vm", "--min", "1e3", "--max", "5e5", "--points", "201"],
        vec!["vm-analytic", "--frequency", "53", "--min", "100", "--max", "1e6"],
        vec!["vm-sim", &cfg],
    ];
    for args in &runs {
        let outputs: Vec<_> = (0..2)
            .map(|_| Command::new(env!("CARGO_BIN_EXE_emharvest")).args(args).output())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if !outputs[0].status.success() || outputs[0].stdout != outputs[1].stdout {
            return Err(format!("`{}` differs between runs or failed", args.join(" ")));
        }
    }
    Ok(format!("{} commands, two runs each, byte-identical", runs.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("multiplier internal resistance", c1_internal_resistance),
        ("macro resistive optimum", c2_macro_resistive_optimum),
        ("matched damping at the optimum", c3_matching_condition),
        ("micro coupled optimum", c4_micro_coupled_optimum),
        ("macro coupled optimum and flat top", c5_macro_coupled_optimum),
        ("analytic multiplier identities", c6_analytic_identities),
        ("time domain against closed form", c7_time_domain),
        ("lossless n² load transformation", c8_lossless_transformation),
        ("overhead calibration round trip", c9_overhead_calibration),
        ("efficiency at the micro optimum", c10_efficiency),
        ("deterministic CLI output", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let (tag, detail) = match criterion() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail}", i + 1);
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
