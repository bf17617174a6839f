//! Cross-class ordering study: tunes PID and FOPID1 at the full default
//! budget for one or more seeds, then sweeps both the tuned pair and the
//! published best-found gain sets across brain dc-gain factors.
//!
//! Usage: `cargo run --release --example ordering_study -- [seed ...]`

use infusim_core::frac::{FopidClass, OraConfig};
use infusim_core::patient::nominal_patient;
use infusim_core::sim::SimConfig;
use infusim_core::tuning::{
    baselines, robustness_sweep, tune_controller, FactorRow, SweepOutcome, TuningProblem,
};

fn print_pairing(label: &str, pid: &[FactorRow], fopid: &[FactorRow]) {
    println!("-- {label} --");
    for (p, f) in pid.iter().zip(fopid) {
        match (&p.outcome, &f.outcome) {
            (SweepOutcome::Stable(mp), SweepOutcome::Stable(mf)) => {
                println!(
                    "factor {:>4}: peak_u {:8.4} vs {:8.4} ({}), total_drug {:8.2} vs {:8.2} ({})",
                    p.factor,
                    mp.peak_u,
                    mf.peak_u,
                    if mf.peak_u < mp.peak_u { "fopid lower" } else { "pid lower" },
                    mp.total_drug,
                    mf.total_drug,
                    if mf.total_drug < mp.total_drug { "fopid lower" } else { "pid lower" },
                );
            }
            other => println!("factor {:>4}: unstable {other:?}", p.factor),
        }
    }
}

fn main() {
    let seeds: Vec<u64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("seed"))
        .collect();
    let seeds = if seeds.is_empty() { vec![42] } else { seeds };

    let patient = nominal_patient();
    let ora = OraConfig::default();
    let sim = SimConfig::default();
    let factors = [0.5, 1.0, 1.5];

    let pub_pid = robustness_sweep(&baselines::pid(), &ora, &patient, &factors, &sim).unwrap();
    let pub_fopid =
        robustness_sweep(&baselines::fopid1(), &ora, &patient, &factors, &sim).unwrap();
    print_pairing("published best-found rows", &pub_pid, &pub_fopid);

    for seed in seeds {
        let start = std::time::Instant::now();
        let pid_problem = TuningProblem::new(FopidClass::Pid, patient.clone(), seed);
        let fopid_problem = TuningProblem::new(FopidClass::Fopid1, patient.clone(), seed);
        let pid = tune_controller(&pid_problem).expect("pid tuning");
        let fopid = tune_controller(&fopid_problem).expect("fopid tuning");

        println!(
            "==== seed {seed} ({:.1} s) ====",
            start.elapsed().as_secs_f64()
        );
        println!(
            "PID    J = {:.4}  (Kp {:.4}, Ki {:.4}, Kd {:.4})",
            pid.j_min, pid.params.kp, pid.params.ki, pid.params.kd
        );
        println!(
            "FOPID1 J = {:.4}  (Kp {:.4}, Ki {:.4}, Kd {:.4}, lambda {:.4}, mu {:.4})",
            fopid.j_min,
            fopid.params.kp,
            fopid.params.ki,
            fopid.params.kd,
            fopid.params.lambda,
            fopid.params.mu
        );
        println!("J ordering: FOPID1 <= PID ? {}", fopid.j_min <= pid.j_min);

        let tuned_pid = robustness_sweep(&pid.params, &ora, &patient, &factors, &sim).unwrap();
        let tuned_fopid =
            robustness_sweep(&fopid.params, &ora, &patient, &factors, &sim).unwrap();
        print_pairing("tuned pair", &tuned_pid, &tuned_fopid);

        for w in pid.warnings.iter().chain(&fopid.warnings) {
            println!("warning: {w}");
        }
    }
}
