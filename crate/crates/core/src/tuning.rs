//! Wires the simulator, cost, and swarm optimizer into controller-tuning
//! problems: per-class tunings, the five-class comparison, and the
//! brain-gain robustness sweep.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frac::{build_fopid, validate_class, FopidClass, FopidParams, FracError, OraConfig};
use crate::patient::{
    apply_dc_perturbation, Organ, PatientModel, PatientError, PerturbationSpec,
};
use crate::pso::{pso_minimize, PsoError, SwarmConfig};
use crate::sim::{
    compute_metrics, evaluate_cost, simulate_closed_loop, simulate_with_options, Metrics,
    SimConfig, SimError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuneError {
    #[error("invalid tuning problem: {0}")]
    InvalidProblem(String),
    #[error("simulation budget exceeded: {needed} runs requested, cap {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },
    #[error("no feasible particle found: every evaluated loop diverged")]
    NoFeasibleParticle,
    #[error("sweep factors must include 1.0")]
    MissingNominalFactor,
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Patient(#[from] PatientError),
}

/// Penalty assigned to a divergent loop, shaped so later divergence is
/// cheaper and the swarm can retreat toward feasibility.
pub const PENALTY_BASE: f64 = 1e9;
/// Reward per minute of survival before divergence.
pub const PENALTY_TIME_SHAPING: f64 = 1e3;

/// Smallest penalty a divergent loop can receive under a given horizon;
/// feasible costs are expected to stay below this and a runtime monitor
/// records any excursion.
pub fn penalty_floor(t_end: f64) -> f64 {
    PENALTY_BASE - PENALTY_TIME_SHAPING * t_end
}

fn divergence_penalty(t_div: f64, t_end: f64) -> f64 {
    PENALTY_BASE - PENALTY_TIME_SHAPING * t_div.min(t_end)
}

/// One controller-class tuning task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningProblem {
    pub class: FopidClass,
    /// Box for each of Kp, Ki, Kd.
    pub gain_bounds: (f64, f64),
    /// Distance kept between fractional-order bounds and the integer
    /// boundary at 1, so the rationalization never receives a degenerate
    /// remainder.
    pub order_margin: f64,
    pub sim: SimConfig,
    pub ora: OraConfig,
    /// Swarm settings; the per-dimension bounds are derived from the
    /// class and gain bounds, overriding whatever this carries.
    pub swarm: SwarmConfig,
    pub patient: PatientModel,
    /// Optional cap on the total number of simulations.
    pub max_simulations: Option<u64>,
}

impl TuningProblem {
    pub fn new(class: FopidClass, patient: PatientModel, seed: u64) -> Self {
        TuningProblem {
            class,
            gain_bounds: (0.001, 10.0),
            order_margin: 1e-3,
            sim: SimConfig::default(),
            ora: OraConfig::default(),
            swarm: SwarmConfig::new(Vec::new(), seed),
            patient,
            max_simulations: None,
        }
    }

    /// Search dimension: 3 for PID (orders pinned at 1), 5 otherwise.
    pub fn dim(&self) -> usize {
        if self.class == FopidClass::Pid {
            3
        } else {
            5
        }
    }

    /// Per-class search box: three gain dimensions plus, for fractional
    /// classes, the order intervals with the margin at the boundary 1.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let g = self.gain_bounds;
        let mut bounds = vec![g, g, g];
        let m = self.order_margin;
        let below = (0.0, 1.0 - m);
        let above = (1.0 + m, 2.0);
        match self.class {
            FopidClass::Pid => {}
            FopidClass::Fopid1 => bounds.extend([below, below]),
            FopidClass::Fopid2 => bounds.extend([below, above]),
            FopidClass::Fopid3 => bounds.extend([above, below]),
            FopidClass::Fopid4 => bounds.extend([above, above]),
        }
        bounds
    }

    pub fn decode(&self, x: &[f64]) -> Result<FopidParams, FracError> {
        if self.class == FopidClass::Pid {
            FopidParams::pid(x[0], x[1], x[2])
        } else {
            FopidParams::new(x[0], x[1], x[2], x[3], x[4])
        }
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        let (lo, hi) = self.gain_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
            return Err(TuneError::InvalidProblem(format!(
                "gain bounds [{lo}, {hi}] must satisfy 0 <= lo < hi"
            )));
        }
        if !(self.order_margin > 0.0 && self.order_margin < 0.5) {
            return Err(TuneError::InvalidProblem(format!(
                "order margin {} out of range",
                self.order_margin
            )));
        }
        self.sim.validate()?;
        self.ora.validate()?;
        self.patient.validate()?;
        if let Some(cap) = self.max_simulations {
            let needed =
                self.swarm.n_particles as u64 * (self.swarm.n_iterations as u64 + 1);
            if needed > cap {
                return Err(TuneError::BudgetExceeded { needed, cap });
            }
        }
        Ok(())
    }
}

/// Result of one class tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningOutcome {
    pub class: FopidClass,
    pub params: FopidParams,
    pub j_min: f64,
    /// Running best cost after initialization and each iteration.
    pub history: Vec<f64>,
    /// Metrics of the best loop, re-simulated with observers.
    pub metrics: Metrics,
    /// Largest cost seen on a non-divergent loop (runtime monitor for
    /// penalty dominance).
    pub max_feasible_j: f64,
    pub warnings: Vec<String>,
}

fn atomic_max(cell: &AtomicU64, value: f64) {
    let mut current = cell.load(Ordering::Relaxed);
    loop {
        if f64::from_bits(current) >= value {
            return;
        }
        match cell.compare_exchange_weak(
            current,
            value.to_bits(),
            Ordering::Relaxed,
            Ordering::Relaxed,
        ) {
            Ok(_) => return,
            Err(seen) => current = seen,
        }
    }
}

/// Tunes one controller class: decodes swarm positions into gains and
/// orders, simulates the closed loop, and minimizes the weighted cost.
/// Divergent loops receive the shaped penalty instead of failing the run.
pub fn tune_controller(problem: &TuningProblem) -> Result<TuningOutcome, TuneError> {
    problem.validate()?;
    let mut swarm = problem.swarm.clone();
    swarm.bounds = problem.bounds();
    swarm.v_max = None;

    let t_end = problem.sim.t_end;
    let max_feasible = AtomicU64::new(0f64.to_bits());
    let objective = |x: &[f64]| -> f64 {
        let params = match problem.decode(x) {
            Ok(p) => p,
            Err(_) => return PENALTY_BASE,
        };
        let controller =
            match build_fopid(&params, &problem.ora, problem.sim.deriv_filter_nf) {
                Ok(c) => c,
                Err(_) => return PENALTY_BASE,
            };
        match simulate_with_options(&controller, &problem.patient, &problem.sim, false) {
            Ok(trace) => match evaluate_cost(&trace, problem.sim.w1, problem.sim.w2) {
                Ok(cost) => {
                    atomic_max(&max_feasible, cost.j);
                    cost.j
                }
                Err(_) => PENALTY_BASE,
            },
            Err(SimError::Divergence { t }) => divergence_penalty(t, t_end),
            Err(_) => PENALTY_BASE,
        }
    };

    let result = pso_minimize(objective, &swarm)?;
    let floor = penalty_floor(t_end);
    if result.best_value >= floor {
        return Err(TuneError::NoFeasibleParticle);
    }

    let params = problem.decode(&result.best_x)?;
    let controller = build_fopid(&params, &problem.ora, problem.sim.deriv_filter_nf)?;
    let trace = simulate_closed_loop(&controller, &problem.patient, &problem.sim)?;
    let metrics = compute_metrics(&trace, problem.sim.w1, problem.sim.w2)?;

    let mut warnings = Vec::new();
    let max_feasible_j = f64::from_bits(max_feasible.load(Ordering::Relaxed));
    if max_feasible_j >= floor {
        let msg = format!(
            "penalty dominance violated: a feasible loop reached J = {max_feasible_j:e}, \
             above the divergence penalty floor {floor:e}"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    if (metrics.j - result.best_value).abs() > 1e-9 * result.best_value.abs() {
        warnings.push(format!(
            "re-simulated cost {} deviates from tuned cost {}",
            metrics.j, result.best_value
        ));
    }
    if !validate_class(&params, problem.class) {
        warnings.push(format!(
            "tuned orders (lambda={}, mu={}) violate the {} class constraints",
            params.lambda, params.mu, problem.class
        ));
    }

    Ok(TuningOutcome {
        class: problem.class,
        params,
        j_min: result.best_value,
        history: result.history,
        metrics,
        max_feasible_j,
        warnings,
    })
}

/// Five-row comparison across PID and the four fractional classes, in
/// fixed order. Each class runs with a seed offset by its row index so
/// the swarms draw independent streams while staying reproducible.
pub fn compare_classes(base: &TuningProblem) -> Result<TuningReport, TuneError> {
    let mut rows = Vec::with_capacity(FopidClass::ALL.len());
    for (idx, class) in FopidClass::ALL.into_iter().enumerate() {
        let mut problem = base.clone();
        problem.class = class;
        problem.swarm.seed = base.swarm.seed.wrapping_add(idx as u64);
        rows.push(tune_controller(&problem)?);
    }
    Ok(TuningReport { rows })
}

/// Comparison table across controller classes.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningReport {
    pub rows: Vec<TuningOutcome>,
}

impl TuningReport {
    pub fn best(&self) -> &TuningOutcome {
        self.rows
            .iter()
            .min_by(|a, b| a.j_min.partial_cmp(&b.j_min).expect("finite costs"))
            .expect("non-empty report")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,j_min,kp,ki,kd,lambda,mu\n");
        for row in &self.rows {
            let p = row.params;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.class, row.j_min, p.kp, p.ki, p.kd, p.lambda, p.mu
            ));
        }
        out
    }

    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<8} {:>14} {:>10} {:>10} {:>10} {:>8} {:>8}\n",
            "class", "J_min", "Kp", "Ki", "Kd", "lambda", "mu"
        ));
        for row in &self.rows {
            let p = row.params;
            out.push_str(&format!(
                "{:<8} {:>14.6} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>8.4}\n",
                row.class.name(),
                row.j_min,
                p.kp,
                p.ki,
                p.kd,
                p.lambda,
                p.mu
            ));
        }
        for row in &self.rows {
            for w in &row.warnings {
                out.push_str(&format!("warning [{}]: {}\n", row.class, w));
            }
        }
        out
    }
}

/// Parses the `to_csv` report format back into rows of
/// (class, params, j_min); used to replay reports.
pub fn parse_report_csv(text: &str) -> Result<Vec<(FopidClass, FopidParams, f64)>, TuneError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(TuneError::InvalidProblem(format!(
                "report line {} has {} fields",
                i + 1,
                fields.len()
            )));
        }
        let class = FopidClass::parse(fields[0]).ok_or_else(|| {
            TuneError::InvalidProblem(format!("unknown class {}", fields[0]))
        })?;
        let nums: Result<Vec<f64>, _> = fields[1..].iter().map(|f| f.parse::<f64>()).collect();
        let nums = nums
            .map_err(|e| TuneError::InvalidProblem(format!("report line {}: {e}", i + 1)))?;
        let params = FopidParams::new(nums[1], nums[2], nums[3], nums[4], nums[5])?;
        rows.push((class, params, nums[0]));
    }
    Ok(rows)
}

/// Outcome of one perturbed run in a robustness sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Stable(Metrics),
    Unstable { diverged_at: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorRow {
    pub factor: f64,
    pub outcome: SweepOutcome,
}

/// Re-simulates a fixed controller against brain dc-gain perturbations.
/// `factors` must include the nominal 1.0; a divergent perturbed loop is
/// recorded as an unstable row rather than failing the sweep.
pub fn robustness_sweep(
    params: &FopidParams,
    ora: &OraConfig,
    patient: &PatientModel,
    factors: &[f64],
    sim: &SimConfig,
) -> Result<Vec<FactorRow>, TuneError> {
    if !factors.contains(&1.0) {
        return Err(TuneError::MissingNominalFactor);
    }
    let controller = build_fopid(params, ora, sim.deriv_filter_nf)?;
    let mut rows = Vec::with_capacity(factors.len());
    for &factor in factors {
        let perturbed = apply_dc_perturbation(
            patient,
            &PerturbationSpec {
                organ: Organ::Brain,
                dc_scale: factor,
            },
        )?;
        let outcome = match simulate_closed_loop(&controller, &perturbed, sim) {
            Ok(trace) => SweepOutcome::Stable(compute_metrics(&trace, sim.w1, sim.w2)?),
            Err(SimError::Divergence { t }) => SweepOutcome::Unstable { diverged_at: t },
            Err(e) => return Err(e.into()),
        };
        rows.push(FactorRow { factor, outcome });
    }
    Ok(rows)
}

/// Robustness results for one or more controllers side by side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RobustnessReport {
    pub controllers: Vec<(String, Vec<FactorRow>)>,
}

impl RobustnessReport {
    pub fn add(&mut self, label: impl Into<String>, rows: Vec<FactorRow>) {
        self.controllers.push((label.into(), rows));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "controller,factor,status,j,itse,isdco,rise_time_10_90,settling_time_2pct,\
             overshoot_pct,peak_u,total_drug,steady_state_u\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (label, rows) in &self.controllers {
            for row in rows {
                match &row.outcome {
                    SweepOutcome::Stable(m) => out.push_str(&format!(
                        "{},{},stable,{},{},{},{},{},{},{},{},{}\n",
                        label,
                        row.factor,
                        m.j,
                        m.itse,
                        m.isdco,
                        opt(m.rise_time_10_90),
                        opt(m.settling_time_2pct),
                        opt(m.overshoot_pct),
                        m.peak_u,
                        m.total_drug,
                        m.steady_state_u
                    )),
                    SweepOutcome::Unstable { diverged_at } => out.push_str(&format!(
                        "{},{},unstable@{},,,,,,,,,\n",
                        label, row.factor, diverged_at
                    )),
                }
            }
        }
        out
    }

    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>6} {:>10} {:>10} {:>10} {:>10} {:>12}\n",
            "controller", "factor", "peak_u", "total_drug", "ss_u", "rise", "settle"
        ));
        let opt = |v: Option<f64>| {
            v.map(|x| format!("{x:.4}"))
                .unwrap_or_else(|| "-".to_string())
        };
        for (label, rows) in &self.controllers {
            for row in rows {
                match &row.outcome {
                    SweepOutcome::Stable(m) => out.push_str(&format!(
                        "{:<12} {:>6.2} {:>10.4} {:>10.4} {:>10.4} {:>10} {:>12}\n",
                        label,
                        row.factor,
                        m.peak_u,
                        m.total_drug,
                        m.steady_state_u,
                        opt(m.rise_time_10_90),
                        opt(m.settling_time_2pct)
                    )),
                    SweepOutcome::Unstable { diverged_at } => out.push_str(&format!(
                        "{:<12} {:>6.2} unstable (diverged at t = {diverged_at} min)\n",
                        label, row.factor
                    )),
                }
            }
        }
        out
    }
}

/// Reference gain sets exercised by the regression and robustness suites.
pub mod baselines {
    use crate::frac::FopidParams;

    pub fn pid() -> FopidParams {
        FopidParams::pid(3.8243, 8.6647, 0.001).expect("valid gains")
    }

    pub fn fopid1() -> FopidParams {
        FopidParams::new(0.0212, 2.3014, 0.0783, 0.8301, 0.1013).expect("valid gains")
    }

    /// Labelled as a lambda<1, mu>1 design in its source, yet its mu is
    /// below 1; kept verbatim so the class-consistency warning path stays
    /// exercised.
    pub fn fopid2() -> FopidParams {
        FopidParams::new(5.5757, 3.3381, 0.001, 0.798, 0.1488).expect("valid gains")
    }

    pub fn fopid3() -> FopidParams {
        FopidParams::new(0.2106, 1.5393, 0.001, 0.001, 0.021).expect("valid gains")
    }

    pub fn fopid4() -> FopidParams {
        FopidParams::new(0.4213, 1.6329, 0.001, 0.5237, 0.1033).expect("valid gains")
    }
}
