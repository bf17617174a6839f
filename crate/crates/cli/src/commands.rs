//! The five subcommands. Every command computes its results first and
//! only then creates the output directory and writes files, so a failed
//! run leaves no partial outputs; every run ends with a manifest that
//! reproduces it.

use std::fmt::Write as _;
use std::path::Path;

use infusim_core::frac::{build_fopid, ora_approximate, FopidClass, FopidParams};
use infusim_core::patient::{apply_dc_perturbation, Organ, PatientDoc, PerturbationSpec};
use infusim_core::sim::{compute_metrics, simulate_closed_loop, Metrics};
use infusim_core::tuning::{
    compare_classes, robustness_sweep, tune_controller, RobustnessReport, TuningOutcome,
    TuningProblem, TuningReport,
};

use crate::config::{RunConfig, RunRecord};
use crate::plot::{line_plot, Series};
use crate::CliError;

/// Parses `"Kp,Ki,Kd"` or `"Kp,Ki,Kd,lambda,mu"`.
pub fn parse_params(text: &str) -> Result<FopidParams, CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let parts = parts.map_err(|e| CliError::Config(format!("cannot parse --params: {e}")))?;
    let params = match parts.len() {
        3 => FopidParams::pid(parts[0], parts[1], parts[2]),
        5 => FopidParams::new(parts[0], parts[1], parts[2], parts[3], parts[4]),
        n => {
            return Err(CliError::Config(format!(
                "--params needs 3 or 5 comma-separated values, got {n}"
            )))
        }
    };
    Ok(params?)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_manifest(cfg: &RunConfig, run: &RunRecord, dir: &Path) -> Result<(), CliError> {
    let mut value = toml::Value::try_from(cfg)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    let run_value = toml::Value::try_from(run)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    value
        .as_table_mut()
        .expect("config serializes to a table")
        .insert("run".to_string(), run_value);
    let text = toml::to_string_pretty(&value)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    write_file(dir, "manifest.toml", &text)
}

fn record(cfg: &RunConfig, command: &str) -> RunRecord {
    RunRecord {
        command: Some(command.to_string()),
        version: Some(env!("CARGO_PKG_VERSION").to_string()),
        ..cfg.run.clone()
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".to_string())
}

fn metrics_text(m: &Metrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "j = {}", m.j);
    let _ = writeln!(out, "itse = {}", m.itse);
    let _ = writeln!(out, "isdco = {}", m.isdco);
    let _ = writeln!(out, "rise_time_10_90 = {}", format_opt(m.rise_time_10_90));
    let _ = writeln!(out, "settling_time_2pct = {}", format_opt(m.settling_time_2pct));
    let _ = writeln!(out, "overshoot_pct = {}", format_opt(m.overshoot_pct));
    let _ = writeln!(out, "peak_u = {}", m.peak_u);
    let _ = writeln!(out, "total_drug = {}", m.total_drug);
    let _ = writeln!(out, "steady_state_u = {}", m.steady_state_u);
    out
}

fn convergence_csv(outcome: &TuningOutcome) -> String {
    let mut out = String::from("iteration,gbest_value\n");
    for (i, v) in outcome.history.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

/// Closed-loop run: trace CSV, metrics, and tracking/effort plots.
pub fn cmd_simulate(
    cfg: &RunConfig,
    params: &FopidParams,
    out_dir: &Path,
) -> Result<(), CliError> {
    let patient = cfg.patient();
    let controller = build_fopid(params, &cfg.ora, cfg.sim.deriv_filter_nf)?;
    let trace = simulate_closed_loop(&controller, &patient, &cfg.sim)?;
    let metrics = compute_metrics(&trace, cfg.sim.w1, cfg.sim.w2)?;

    let tracking = line_plot(
        "Tracking performance",
        "t (min)",
        "effect",
        &[
            Series {
                label: "setpoint r",
                x: &trace.t,
                y: &trace.r,
            },
            Series {
                label: "effect y",
                x: &trace.t,
                y: &trace.y,
            },
        ],
    );
    let effort = line_plot(
        "Control effort",
        "t (min)",
        "u (model units)",
        &[Series {
            label: "infusion command u",
            x: &trace.t,
            y: &trace.u,
        }],
    );

    std::fs::create_dir_all(out_dir)?;
    write_file(out_dir, "trace.csv", &trace.to_csv())?;
    write_file(out_dir, "metrics.txt", &metrics_text(&metrics))?;
    write_file(out_dir, "tracking.svg", &tracking)?;
    write_file(out_dir, "effort.svg", &effort)?;
    write_manifest(cfg, &record(cfg, "simulate"), out_dir)?;
    Ok(())
}

fn problem_from_config(cfg: &RunConfig, class: FopidClass) -> TuningProblem {
    let mut problem = TuningProblem::new(class, cfg.patient(), cfg.swarm.seed);
    problem.gain_bounds = (cfg.tuning.gain_lo, cfg.tuning.gain_hi);
    problem.order_margin = cfg.tuning.order_margin;
    problem.sim = cfg.sim;
    problem.ora = cfg.ora;
    problem.swarm = cfg.swarm.to_swarm_config(Vec::new());
    problem.max_simulations = cfg.tuning.max_simulations;
    problem
}

/// Single-class tuning: report plus convergence history.
pub fn cmd_tune(cfg: &RunConfig, class: FopidClass, out_dir: &Path) -> Result<(), CliError> {
    let outcome = tune_controller(&problem_from_config(cfg, class))?;
    let report = TuningReport {
        rows: vec![outcome],
    };

    std::fs::create_dir_all(out_dir)?;
    write_file(out_dir, "report.csv", &report.to_csv())?;
    write_file(out_dir, "report.txt", &report.to_text_table())?;
    write_file(out_dir, "convergence.csv", &convergence_csv(&report.rows[0]))?;
    write_manifest(cfg, &record(cfg, "tune"), out_dir)?;
    Ok(())
}

/// Five-class comparison: one report, one convergence file per class.
pub fn cmd_compare(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let base = problem_from_config(cfg, FopidClass::Pid);
    let report = compare_classes(&base)?;

    std::fs::create_dir_all(out_dir)?;
    write_file(out_dir, "report.csv", &report.to_csv())?;
    write_file(out_dir, "report.txt", &report.to_text_table())?;
    for row in &report.rows {
        write_file(
            out_dir,
            &format!("convergence_{}.csv", row.class.name().to_lowercase()),
            &convergence_csv(row),
        )?;
    }
    write_manifest(cfg, &record(cfg, "compare"), out_dir)?;
    Ok(())
}

/// Brain dc-gain robustness sweep of a fixed controller; each perturbed
/// patient is saved alongside the report for replay.
pub fn cmd_sweep(cfg: &RunConfig, params: &FopidParams, out_dir: &Path) -> Result<(), CliError> {
    let patient = cfg.patient();
    let rows = robustness_sweep(params, &cfg.ora, &patient, &cfg.sweep.factors, &cfg.sim)?;
    let mut report = RobustnessReport::default();
    report.add("controller", rows);

    let mut patients = Vec::new();
    for &factor in &cfg.sweep.factors {
        let perturbed = apply_dc_perturbation(
            &patient,
            &PerturbationSpec {
                organ: Organ::Brain,
                dc_scale: factor,
            },
        )?;
        let doc = PatientDoc::from(&perturbed);
        let text = toml::to_string_pretty(&doc)
            .map_err(|e| CliError::Config(format!("patient serialization: {e}")))?;
        patients.push((format!("patient_{factor}.toml"), text));
    }

    std::fs::create_dir_all(out_dir)?;
    write_file(out_dir, "sweep.csv", &report.to_csv())?;
    write_file(out_dir, "sweep.txt", &report.to_text_table())?;
    for (name, text) in &patients {
        write_file(out_dir, name, text)?;
    }
    write_manifest(cfg, &record(cfg, "sweep"), out_dir)?;
    Ok(())
}

/// Frequency response of the rationalized fractional operator `s^gamma`
/// over the configured grid, as CSV plus a magnitude/phase plot.
pub fn cmd_bode(cfg: &RunConfig, gamma: f64, out_dir: &Path) -> Result<(), CliError> {
    let tf = ora_approximate(gamma, &cfg.ora)?;
    let ppd = cfg.bode.points_per_decade as f64;
    let k_min = (cfg.bode.omega_min.log10() * ppd).round() as i64;
    let k_max = (cfg.bode.omega_max.log10() * ppd).round() as i64;
    let mut csv = String::from("omega,magnitude,phase_deg\n");
    let mut log_omega = Vec::new();
    let mut mag_db = Vec::new();
    let mut phase = Vec::new();
    for k in k_min..=k_max {
        let omega = 10f64.powf(k as f64 / ppd);
        let p = tf.frequency_response(omega)?;
        let _ = writeln!(csv, "{},{},{}", p.omega, p.magnitude, p.phase_deg);
        log_omega.push(omega.log10());
        mag_db.push(20.0 * p.magnitude.log10());
        phase.push(p.phase_deg);
    }

    let mag_plot = line_plot(
        &format!("Rationalized s^{gamma}: magnitude"),
        "log10(omega [rad/min])",
        "magnitude (dB)",
        &[Series {
            label: "approximation",
            x: &log_omega,
            y: &mag_db,
        }],
    );
    let phase_plot = line_plot(
        &format!("Rationalized s^{gamma}: phase"),
        "log10(omega [rad/min])",
        "phase (deg)",
        &[Series {
            label: "approximation",
            x: &log_omega,
            y: &phase,
        }],
    );

    std::fs::create_dir_all(out_dir)?;
    write_file(out_dir, "bode.csv", &csv)?;
    write_file(out_dir, "bode_magnitude.svg", &mag_plot)?;
    write_file(out_dir, "bode_phase.svg", &phase_plot)?;
    let mut run = record(cfg, "bode");
    run.gamma = Some(gamma);
    write_manifest(cfg, &run, out_dir)?;
    Ok(())
}
