//! Closed-loop anaesthetic infusion simulation and controller autotuning.
//!
//! The crate is organised around a small continuous-time LTI toolbox
//! ([`lti`]), Oustaloup rationalization of fractional operators and
//! PID/FOPID controller synthesis ([`frac`]), the multi-organ drug
//! interaction model ([`patient`]), a fixed-step closed-loop simulator
//! with cost and response metrics ([`sim`]), a particle swarm optimizer
//! ([`pso`]), and the tuning/robustness orchestration layer ([`tuning`]).
//!
//! All dynamics use minutes as the time unit; frequencies are rad/min.

pub mod frac;
pub mod lti;
pub mod patient;
pub mod pso;
pub mod sim;
pub mod tuning;

/// Time unit assumed by every model, trace, and frequency in this crate.
pub const TIME_UNIT: &str = "minutes";
