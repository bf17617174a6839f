//! Fixed-step closed-loop simulation of a rational controller driving the
//! multi-organ patient through the sigmoid effect map, plus the weighted
//! tracking/actuation cost and step-response metrics.
//!
//! Time is in minutes. The integrator is classical fourth-order
//! Runge-Kutta on the block-wise state equations; identical inputs give
//! bit-identical traces.

mod cost;
mod engine;
mod metrics;
mod trace;

pub use cost::{evaluate_cost, CostBreakdown};
pub use engine::simulate_closed_loop;
pub(crate) use engine::simulate_with_options;
pub use metrics::{compute_metrics, Metrics};
pub use trace::SimulationTrace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lti::LtiError;
use crate::patient::PatientError;

/// State magnitude beyond which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("simulation diverged at t = {t} min (state magnitude exceeded 1e12)")]
    Divergence { t: f64 },
    #[error("controller must be proper for realization")]
    ImproperController,
    #[error("plant control path must be strictly proper")]
    PlantNotStrictlyProper,
    #[error("trace columns have mismatched lengths")]
    LengthMismatch,
    #[error("trace is empty or malformed: {0}")]
    MalformedTrace(String),
    #[error(transparent)]
    Patient(#[from] PatientError),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// How the `delta_u` trace column is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaUMode {
    /// Instantaneous pump-rate derivative du/dt evaluated pointwise from
    /// the loop state (zero while the nonnegativity clamp is active).
    /// The reference step is excluded, so the cost integral converges
    /// under step refinement.
    #[default]
    Rate,
    /// Raw sample-to-sample difference `u_k - u_{k-1}` (first sample 0).
    Raw,
}

/// Closed-loop run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Horizon, minutes.
    pub t_end: f64,
    /// Fixed integration step, minutes.
    pub step_h: f64,
    /// Target effect level in [0, 1); zero means no step is applied.
    pub setpoint_amplitude: f64,
    /// Step onset, minutes.
    pub setpoint_time: f64,
    /// Tracking-error weight in the cost.
    pub w1: f64,
    /// Actuation-rate weight in the cost.
    pub w2: f64,
    /// Derivative filter corner for integer derivative factors, rad/min.
    pub deriv_filter_nf: f64,
    /// Clamp the pump command at zero from below.
    pub clamp_nonnegative_u: bool,
    pub delta_u_mode: DeltaUMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_end: 50.0,
            step_h: 0.005,
            setpoint_amplitude: 0.5,
            setpoint_time: 1.0,
            w1: 1.0,
            w2: 1.0,
            deriv_filter_nf: 100.0,
            clamp_nonnegative_u: true,
            delta_u_mode: DeltaUMode::Rate,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::InvalidConfig(msg));
        if !self.step_h.is_finite() || self.step_h <= 0.0 {
            return fail(format!("step_h must be positive, got {}", self.step_h));
        }
        if !self.setpoint_time.is_finite() || self.setpoint_time < 0.0 {
            return fail(format!(
                "setpoint_time must be nonnegative, got {}",
                self.setpoint_time
            ));
        }
        if !self.t_end.is_finite() || self.t_end <= self.setpoint_time {
            return fail(format!(
                "t_end ({}) must exceed setpoint_time ({})",
                self.t_end, self.setpoint_time
            ));
        }
        if !(0.0..1.0).contains(&self.setpoint_amplitude) {
            return fail(format!(
                "setpoint_amplitude must lie in [0, 1), got {}",
                self.setpoint_amplitude
            ));
        }
        if !(self.w1.is_finite() && self.w1 >= 0.0 && self.w2.is_finite() && self.w2 >= 0.0) {
            return fail(format!("weights must be nonnegative, got ({}, {})", self.w1, self.w2));
        }
        if !self.deriv_filter_nf.is_finite() || self.deriv_filter_nf <= 0.0 {
            return fail(format!(
                "deriv_filter_nf must be positive, got {}",
                self.deriv_filter_nf
            ));
        }
        Ok(())
    }

    /// Reference signal at time `t`: a step of the configured amplitude
    /// applied at `setpoint_time` (1 ns of slop absorbs grid rounding).
    pub fn reference(&self, t: f64) -> f64 {
        if self.setpoint_amplitude > 0.0 && t >= self.setpoint_time - 1e-9 {
            self.setpoint_amplitude
        } else {
            0.0
        }
    }
}
