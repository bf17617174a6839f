use super::{SimError, SimulationTrace};

/// Weighted cost and its two components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// `w1 * itse + w2 * isdco`.
    pub j: f64,
    /// Time-weighted squared tracking error integral.
    pub itse: f64,
    /// Squared actuation-variation integral.
    pub isdco: f64,
}

/// Trapezoidal evaluation of the tracking/actuation cost over a trace:
/// the integrand `w1*t*e^2 + w2*delta_u^2` uses whatever `delta_u`
/// convention the trace was produced with.
pub fn evaluate_cost(trace: &SimulationTrace, w1: f64, w2: f64) -> Result<CostBreakdown, SimError> {
    trace.validate()?;
    let n = trace.len();
    let h = trace.step_h;
    let mut itse = 0.0;
    let mut isdco = 0.0;
    for k in 0..n {
        let weight = if k == 0 || k == n - 1 { 0.5 * h } else { h };
        itse += weight * trace.t[k] * trace.e[k] * trace.e[k];
        isdco += weight * trace.delta_u[k] * trace.delta_u[k];
    }
    Ok(CostBreakdown {
        j: w1 * itse + w2 * isdco,
        itse,
        isdco,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Builds a synthetic trace from closures, with `delta_u` filled by
    /// the backward-difference rate just like the cost formula states.
    fn synthetic(
        t_end: f64,
        h: f64,
        e_of: impl Fn(f64) -> f64,
        u_of: impl Fn(f64) -> f64,
    ) -> SimulationTrace {
        let n = (t_end / h).round() as usize + 1;
        let mut tr = SimulationTrace::with_capacity(h, n);
        let mut prev_u = 0.0;
        for k in 0..n {
            let t = k as f64 * h;
            let u = u_of(t);
            let du = if k == 0 { 0.0 } else { (u - prev_u) / h };
            prev_u = u;
            tr.push_sample(t, 0.0, e_of(t), u, du, 0.0, 0.0);
        }
        tr
    }

    #[test]
    fn zero_trace_has_zero_cost() {
        let tr = synthetic(5.0, 0.01, |_| 0.0, |_| 1.0);
        let c = evaluate_cost(&tr, 1.0, 1.0).unwrap();
        assert_eq!(c.j, 0.0);
        assert_eq!(c.itse, 0.0);
        assert_eq!(c.isdco, 0.0);
    }

    #[test]
    fn decaying_error_matches_analytic_integral() {
        // integral of t * e^{-2t} over [0, 20] is 1/4 up to a 1e-16 tail
        let tr = synthetic(20.0, 0.005, |t| (-t).exp(), |_| 0.0);
        let c = evaluate_cost(&tr, 1.0, 0.0).unwrap();
        assert!(
            (c.j - 0.25).abs() / 0.25 < 1e-3,
            "ITSE integral off: {}",
            c.j
        );
        assert_eq!(c.isdco, 0.0);
    }

    #[test]
    fn unit_rate_actuation_matches_analytic_integral() {
        // u(t) = t gives du/dt = 1, so the squared-rate integral over
        // [0, 10] is 10 (the first-sample convention costs half a step)
        let tr = synthetic(10.0, 0.005, |_| 0.0, |t| t);
        let c = evaluate_cost(&tr, 0.0, 1.0).unwrap();
        assert!((c.j - 10.0).abs() / 10.0 < 1e-3, "ISDCO integral off: {}", c.j);
    }

    #[test]
    fn weights_scale_components() {
        let tr = synthetic(10.0, 0.01, |t| (-t).exp(), |t| t);
        let base = evaluate_cost(&tr, 1.0, 1.0).unwrap();
        let weighted = evaluate_cost(&tr, 2.0, 0.5).unwrap();
        assert!((weighted.j - (2.0 * base.itse + 0.5 * base.isdco)).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let mut tr = synthetic(1.0, 0.1, |_| 0.0, |_| 0.0);
        tr.e.pop();
        assert!(matches!(
            evaluate_cost(&tr, 1.0, 1.0),
            Err(SimError::LengthMismatch)
        ));
    }
}
