use crate::lti::TransferFunction;
use crate::patient::{assemble_plant, hill_effect_unchecked, hill_slope, PatientModel, Topology};

use super::{DeltaUMode, SimConfig, SimError, SimulationTrace, DIVERGENCE_LIMIT};

/// Controllable-canonical SISO block specialized for the integration hot
/// loop: the companion structure makes one derivative evaluation O(n).
struct Block {
    /// Monic denominator coefficients a_0..a_{n-1} (ascending).
    a_rest: Vec<f64>,
    /// Output row c_0..c_{n-1} (ascending).
    c: Vec<f64>,
    /// Direct feedthrough.
    d: f64,
}

impl Block {
    fn from_tf(tf: &TransferFunction) -> Result<Self, SimError> {
        let (a_rest, c, d) = tf
            .canonical_parts()
            .map_err(|_| SimError::ImproperController)?;
        Ok(Block { a_rest, c, d })
    }

    #[inline]
    fn order(&self) -> usize {
        self.a_rest.len()
    }

    /// State-only output contribution `c . x`.
    #[inline]
    fn output_states(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (ci, xi) in self.c.iter().zip(x) {
            acc += ci * xi;
        }
        acc
    }

    /// Companion-form derivative: shift states, close the last row.
    #[inline]
    fn derivatives(&self, x: &[f64], input: f64, dx: &mut [f64]) {
        let n = self.order();
        if n == 0 {
            return;
        }
        dx[..n - 1].copy_from_slice(&x[1..n]);
        let mut last = input;
        for (ai, xi) in self.a_rest.iter().zip(x) {
            last -= ai * xi;
        }
        dx[n - 1] = last;
    }
}

/// Instantaneous loop signals at one evaluation point.
#[derive(Clone, Copy, Default)]
struct Signals {
    r: f64,
    e: f64,
    u: f64,
    u_dot: f64,
    c_b: f64,
    y: f64,
}

struct LoopModel {
    ctrl: Block,
    lungs: Block,
    brain: Block,
    observers: Vec<(String, Block)>,
    recirculating: bool,
    scale: f64,
    hill: crate::patient::HillParams,
    clamp: bool,
    // state slicing offsets
    off_ctrl: usize,
    off_lungs: usize,
    off_brain: usize,
    off_obs: Vec<usize>,
    n_total: usize,
}

impl LoopModel {
    fn build(
        controller: &TransferFunction,
        patient: &PatientModel,
        cfg: &SimConfig,
        with_observers: bool,
    ) -> Result<Self, SimError> {
        if !controller.is_proper() {
            return Err(SimError::ImproperController);
        }
        let plant = assemble_plant(patient)?;
        if !plant.control_path.is_strictly_proper() {
            return Err(SimError::PlantNotStrictlyProper);
        }
        let recirculating = plant.topology == Topology::Recirculating;
        // observers participate in the dynamics when the venous return is
        // closed, so they cannot be skipped in that topology
        let keep_observers = with_observers || recirculating;

        let ctrl = Block::from_tf(controller)?;
        let lungs = Block::from_tf(&plant.lungs)?;
        let brain = Block::from_tf(&plant.brain)?;
        let mut observers = Vec::new();
        if keep_observers {
            for (name, tf) in &plant.observers {
                observers.push((name.clone(), Block::from_tf(tf)?));
            }
        }

        let off_ctrl = 0usize;
        let off_lungs = off_ctrl + ctrl.order();
        let off_brain = off_lungs + lungs.order();
        let mut next = off_brain + brain.order();
        let mut off_obs = Vec::with_capacity(observers.len());
        for (_, b) in &observers {
            off_obs.push(next);
            next += b.order();
        }

        Ok(LoopModel {
            ctrl,
            lungs,
            brain,
            observers,
            recirculating,
            scale: patient.concentration_scale,
            hill: patient.hill,
            clamp: cfg.clamp_nonnegative_u,
            off_ctrl,
            off_lungs,
            off_brain,
            off_obs,
            n_total: next,
        })
    }

    /// One derivative evaluation. The plant path is strictly proper, so
    /// every output needed to close the loop is available from states
    /// alone and there is no algebraic cycle even for a biproper
    /// controller.
    fn eval(&self, r: f64, x: &[f64], dx: &mut [f64]) -> Signals {
        let lungs_out = self.lungs.output_states(&x[self.off_lungs..self.off_brain]);
        let c_b_model = self
            .brain
            .output_states(&x[self.off_brain..self.off_brain + self.brain.order()]);
        let c_b = (c_b_model * self.scale).max(0.0);
        let y = hill_effect_unchecked(c_b, &self.hill);
        let e = r - y;
        let u_raw = self
            .ctrl
            .output_states(&x[self.off_ctrl..self.off_lungs])
            + self.ctrl.d * e;
        let clamped = self.clamp && u_raw < 0.0;
        let u = if clamped { 0.0 } else { u_raw };

        // controller driven by the tracking error
        self.ctrl
            .derivatives(&x[self.off_ctrl..self.off_lungs], e, &mut dx[self.off_ctrl..self.off_lungs]);

        // arterial pool input: infusion plus (optionally) the venous return
        let mut lungs_in = u;
        if self.recirculating {
            let mut venous = c_b_model;
            for ((_, b), &off) in self.observers.iter().zip(&self.off_obs) {
                venous += b.output_states(&x[off..off + b.order()]) + b.d * lungs_out;
            }
            lungs_in += venous;
        }
        self.lungs.derivatives(
            &x[self.off_lungs..self.off_brain],
            lungs_in,
            &mut dx[self.off_lungs..self.off_brain],
        );
        self.brain.derivatives(
            &x[self.off_brain..self.off_brain + self.brain.order()],
            lungs_out,
            &mut dx[self.off_brain..self.off_brain + self.brain.order()],
        );
        for ((_, b), &off) in self.observers.iter().zip(&self.off_obs) {
            b.derivatives(&x[off..off + b.order()], lungs_out, &mut dx[off..off + b.order()]);
        }

        // pointwise pump-rate derivative; the reference derivative is zero
        // almost everywhere and is excluded at the step instant
        let y_dot = hill_slope(c_b, &self.hill)
            * self.scale
            * self
                .brain
                .output_states(&dx[self.off_brain..self.off_brain + self.brain.order()]);
        let u_dot_raw =
            self.ctrl.output_states(&dx[self.off_ctrl..self.off_lungs]) + self.ctrl.d * (-y_dot);
        let u_dot = if clamped { 0.0 } else { u_dot_raw };

        Signals {
            r,
            e,
            u,
            u_dot,
            c_b,
            y,
        }
    }

    fn observer_outputs(&self, x: &[f64], out: &mut [f64]) {
        let lungs_out = self.lungs.output_states(&x[self.off_lungs..self.off_brain]);
        for (((_, b), &off), slot) in self.observers.iter().zip(&self.off_obs).zip(out) {
            *slot = (b.output_states(&x[off..off + b.order()]) + b.d * lungs_out) * self.scale;
        }
    }
}

/// Simulates the interconnected loop and captures the full trace,
/// including every observer channel.
pub fn simulate_closed_loop(
    controller: &TransferFunction,
    patient: &PatientModel,
    cfg: &SimConfig,
) -> Result<SimulationTrace, SimError> {
    simulate_with_options(controller, patient, cfg, true)
}

/// Simulation entry with observer capture optional. Skipping observers is
/// only an optimization for the feedforward topology, where they never
/// feed back; the control-loop signals are bit-identical either way.
pub(crate) fn simulate_with_options(
    controller: &TransferFunction,
    patient: &PatientModel,
    cfg: &SimConfig,
    with_observers: bool,
) -> Result<SimulationTrace, SimError> {
    cfg.validate()?;
    let model = LoopModel::build(controller, patient, cfg, with_observers)?;
    let n_steps = (cfg.t_end / cfg.step_h).round() as usize;
    if n_steps == 0 {
        return Err(SimError::InvalidConfig(
            "horizon shorter than one step".to_string(),
        ));
    }
    let n_samples = n_steps + 1;
    let h = cfg.step_h;

    let n = model.n_total;
    let mut x = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut xs = vec![0.0; n];

    let n_obs = model.observers.len();
    let mut obs_buf = vec![0.0; n_obs];

    let mut trace = SimulationTrace::with_capacity(h, n_samples);
    for (name, _) in &model.observers {
        trace.observers.push((name.clone(), Vec::with_capacity(n_samples)));
    }

    let mut prev_u = 0.0;
    for k in 0..n_samples {
        let t = k as f64 * h;

        // stage 1 doubles as the sample-point evaluation
        let sig = model.eval(cfg.reference(t), &x, &mut k1);
        let delta_u = match cfg.delta_u_mode {
            DeltaUMode::Rate => sig.u_dot,
            DeltaUMode::Raw => {
                if k == 0 {
                    0.0
                } else {
                    sig.u - prev_u
                }
            }
        };
        prev_u = sig.u;
        trace.push_sample(t, sig.r, sig.e, sig.u, delta_u, sig.c_b, sig.y);
        if n_obs > 0 {
            model.observer_outputs(&x, &mut obs_buf);
            for (col, &v) in trace.observers.iter_mut().zip(&obs_buf) {
                col.1.push(v);
            }
        }

        if k == n_steps {
            break;
        }

        let half = 0.5 * h;
        for i in 0..n {
            xs[i] = x[i] + half * k1[i];
        }
        model.eval(cfg.reference(t + half), &xs, &mut k2);
        for i in 0..n {
            xs[i] = x[i] + half * k2[i];
        }
        model.eval(cfg.reference(t + half), &xs, &mut k3);
        for i in 0..n {
            xs[i] = x[i] + h * k3[i];
        }
        model.eval(cfg.reference(t + h), &xs, &mut k4);
        let sixth = h / 6.0;
        for i in 0..n {
            x[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        for &xi in x.iter() {
            if !xi.is_finite() || xi.abs() > DIVERGENCE_LIMIT {
                return Err(SimError::Divergence {
                    t: (k + 1) as f64 * h,
                });
            }
        }
    }

    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::{build_fopid, FopidParams, OraConfig};
    use crate::lti::TransferFunction;
    use crate::patient::nominal_patient;

    fn table_pid() -> TransferFunction {
        let params = FopidParams::pid(3.8243, 8.6647, 0.001).unwrap();
        build_fopid(&params, &OraConfig::default(), 100.0).unwrap()
    }

    #[test]
    fn zero_controller_leaves_loop_open() {
        let zero = TransferFunction::from_coeffs(&[0.0], &[1.0]).unwrap();
        let cfg = SimConfig {
            t_end: 5.0,
            ..SimConfig::default()
        };
        let trace = simulate_closed_loop(&zero, &nominal_patient(), &cfg).unwrap();
        assert!(trace.u.iter().all(|&u| u == 0.0));
        assert!(trace.y.iter().all(|&y| y == 0.0));
        for (e, r) in trace.e.iter().zip(&trace.r) {
            assert_eq!(e, r);
        }
    }

    #[test]
    fn zero_reference_is_equilibrium() {
        let cfg = SimConfig {
            t_end: 5.0,
            setpoint_amplitude: 0.0,
            ..SimConfig::default()
        };
        let trace = simulate_closed_loop(&table_pid(), &nominal_patient(), &cfg).unwrap();
        for col in [&trace.r, &trace.e, &trace.u, &trace.c_b, &trace.y] {
            assert!(col.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn baseline_pid_tracks_setpoint() {
        // at the default 50 min horizon the loop still rings slightly;
        // band frozen from the baseline run (e(50) = +0.0462)
        let cfg = SimConfig::default();
        let trace = simulate_closed_loop(&table_pid(), &nominal_patient(), &cfg).unwrap();
        let e_end = trace.e.last().unwrap().abs();
        assert!(e_end < 0.05, "final error too large: {e_end}");
        // effect stays inside the sigmoid codomain
        assert!(trace.y.iter().all(|&y| (0.0..1.0).contains(&y)));
        // clamped actuation never goes negative
        assert!(trace.u.iter().all(|&u| u >= 0.0));

        // the ringing decays: by 100 min the error sits within 2% of the
        // setpoint and the pump rests near its hill-inverse equilibrium
        let long = SimConfig {
            t_end: 100.0,
            ..SimConfig::default()
        };
        let trace = simulate_closed_loop(&table_pid(), &nominal_patient(), &long).unwrap();
        let e_end = trace.e.last().unwrap().abs();
        assert!(e_end < 0.02 * long.setpoint_amplitude, "e(100) = {e_end}");
        let u_end = *trace.u.last().unwrap();
        assert!((u_end - 7.97).abs() < 0.2, "u(100) = {u_end}");
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let cfg = SimConfig {
            t_end: 10.0,
            ..SimConfig::default()
        };
        let a = simulate_closed_loop(&table_pid(), &nominal_patient(), &cfg).unwrap();
        let b = simulate_closed_loop(&table_pid(), &nominal_patient(), &cfg).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.y, b.y);
        assert_eq!(a.c_b, b.c_b);
    }

    #[test]
    fn lean_run_matches_full_run_on_loop_signals() {
        let cfg = SimConfig {
            t_end: 10.0,
            ..SimConfig::default()
        };
        let full = simulate_with_options(&table_pid(), &nominal_patient(), &cfg, true).unwrap();
        let lean = simulate_with_options(&table_pid(), &nominal_patient(), &cfg, false).unwrap();
        assert_eq!(full.u, lean.u);
        assert_eq!(full.y, lean.y);
        assert_eq!(full.delta_u, lean.delta_u);
        assert!(lean.observers.is_empty());
        assert_eq!(full.observers.len(), 8);
    }

    #[test]
    fn divergence_is_reported_with_time() {
        // positive feedback through an aggressive unstable controller:
        // huge gain destabilizes the loop
        let wild = TransferFunction::from_coeffs(&[1e9, 0.0], &[1.0, -50.0]).unwrap();
        let cfg = SimConfig {
            t_end: 50.0,
            clamp_nonnegative_u: false,
            ..SimConfig::default()
        };
        match simulate_closed_loop(&wild, &nominal_patient(), &cfg) {
            Err(SimError::Divergence { t }) => assert!(t > 0.0 && t <= 50.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn improper_controller_rejected() {
        let improper = TransferFunction::from_coeffs(&[1.0, 0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            simulate_closed_loop(&improper, &nominal_patient(), &SimConfig::default()),
            Err(SimError::ImproperController)
        ));
    }

    #[test]
    fn degenerate_horizon_rejected() {
        let cfg = SimConfig {
            t_end: 0.5,
            setpoint_time: 1.0,
            ..SimConfig::default()
        };
        assert!(matches!(
            simulate_closed_loop(&table_pid(), &nominal_patient(), &cfg),
            Err(SimError::InvalidConfig(_))
        ));
    }
}
