use super::{evaluate_cost, SimError, SimulationTrace};

/// Response and actuation metrics of one trace. Threshold-based times are
/// absent rather than fabricated when the trace never crosses them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub j: f64,
    pub itse: f64,
    pub isdco: f64,
    /// Minutes from the 10% to the 90% crossing of the setpoint amplitude.
    pub rise_time_10_90: Option<f64>,
    /// Minutes from setpoint onset until `|e|` stays within 2% of the
    /// amplitude.
    pub settling_time_2pct: Option<f64>,
    /// Peak effect excursion above the setpoint, percent of amplitude.
    pub overshoot_pct: Option<f64>,
    pub peak_u: f64,
    /// Time integral of the pump command (trapezoidal).
    pub total_drug: f64,
    /// Mean pump command over the last 5% of samples.
    pub steady_state_u: f64,
}

/// Computes step-response metrics and the weighted cost of a trace. The
/// setpoint amplitude is read from the final reference sample.
pub fn compute_metrics(trace: &SimulationTrace, w1: f64, w2: f64) -> Result<Metrics, SimError> {
    trace.validate()?;
    let cost = evaluate_cost(trace, w1, w2)?;
    let n = trace.len();
    let h = trace.step_h;

    let amplitude = *trace.r.last().expect("validated non-empty");
    let onset = trace
        .r
        .iter()
        .position(|&r| r > 0.0)
        .map(|k| trace.t[k]);

    let mut rise_time_10_90 = None;
    let mut settling_time_2pct = None;
    let mut overshoot_pct = None;
    if amplitude > 0.0 {
        let t_cross = |level: f64| -> Option<f64> {
            trace
                .y
                .iter()
                .position(|&y| y >= level)
                .map(|k| trace.t[k])
        };
        if let (Some(t10), Some(t90)) = (t_cross(0.1 * amplitude), t_cross(0.9 * amplitude)) {
            rise_time_10_90 = Some(t90 - t10);
        }

        if let Some(onset_t) = onset {
            let tol = 0.02 * amplitude;
            let start = trace.t.iter().position(|&t| t >= onset_t).unwrap_or(0);
            let last_violation = (start..n).rev().find(|&k| trace.e[k].abs() > tol);
            settling_time_2pct = match last_violation {
                None => Some(0.0),
                Some(k) if k + 1 < n => Some(trace.t[k + 1] - onset_t),
                Some(_) => None, // still outside the band at the horizon
            };
        }

        let peak_y = trace.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        overshoot_pct = Some(((peak_y - amplitude) / amplitude * 100.0).max(0.0));
    }

    let peak_u = trace.u.iter().cloned().fold(0.0f64, f64::max);
    let mut total_drug = 0.0;
    for k in 0..n {
        let weight = if k == 0 || k == n - 1 { 0.5 * h } else { h };
        total_drug += weight * trace.u[k];
    }
    let tail = (n / 20).max(1);
    let steady_state_u = trace.u[n - tail..].iter().sum::<f64>() / tail as f64;

    Ok(Metrics {
        j: cost.j,
        itse: cost.itse,
        isdco: cost.isdco,
        rise_time_10_90,
        settling_time_2pct,
        overshoot_pct,
        peak_u,
        total_drug,
        steady_state_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_order_trace(tau: f64, amp: f64, t_end: f64, h: f64) -> SimulationTrace {
        let n = (t_end / h).round() as usize + 1;
        let mut tr = SimulationTrace::with_capacity(h, n);
        for k in 0..n {
            let t = k as f64 * h;
            let y = amp * (1.0 - (-t / tau).exp());
            tr.push_sample(t, amp, amp - y, 1.0, 0.0, 0.0, y);
        }
        tr
    }

    #[test]
    fn first_order_rise_time_matches_analytic() {
        let tau = 2.0;
        let tr = first_order_trace(tau, 0.5, 40.0, 0.001);
        let m = compute_metrics(&tr, 1.0, 1.0).unwrap();
        let rise = m.rise_time_10_90.unwrap();
        let expected = tau * 9f64.ln();
        assert!(
            (rise - expected).abs() < 0.01,
            "rise {rise} vs analytic {expected}"
        );
        // monotone first-order response never overshoots
        assert_eq!(m.overshoot_pct.unwrap(), 0.0);
        let settle = m.settling_time_2pct.unwrap();
        let expected_settle = tau * (1.0f64 / 0.02).ln();
        assert!(
            (settle - expected_settle).abs() < 0.01,
            "settle {settle} vs {expected_settle}"
        );
        assert!(settle >= rise);
    }

    #[test]
    fn flat_zero_trace_has_no_thresholds() {
        let n = 11;
        let mut tr = SimulationTrace::with_capacity(0.1, n);
        for k in 0..n {
            tr.push_sample(k as f64 * 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        }
        let m = compute_metrics(&tr, 1.0, 1.0).unwrap();
        assert_eq!(m.total_drug, 0.0);
        assert_eq!(m.peak_u, 0.0);
        assert!(m.rise_time_10_90.is_none());
        assert!(m.settling_time_2pct.is_none());
        assert!(m.overshoot_pct.is_none());
    }

    #[test]
    fn constant_actuation_integrates_to_rectangle() {
        let n = 10_001;
        let mut tr = SimulationTrace::with_capacity(0.005, n);
        for k in 0..n {
            tr.push_sample(k as f64 * 0.005, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        }
        let m = compute_metrics(&tr, 1.0, 1.0).unwrap();
        assert!((m.total_drug - 50.0).abs() < 1e-9, "got {}", m.total_drug);
        assert_eq!(m.steady_state_u, 1.0);
    }

    #[test]
    fn unsettled_trace_reports_absent_settling() {
        // error stays at half the amplitude throughout
        let n = 101;
        let mut tr = SimulationTrace::with_capacity(0.1, n);
        for k in 0..n {
            let y = 0.25;
            tr.push_sample(k as f64 * 0.1, 0.5, 0.25, 0.0, 0.0, 0.0, y);
        }
        let m = compute_metrics(&tr, 1.0, 1.0).unwrap();
        assert!(m.settling_time_2pct.is_none());
        assert!(m.rise_time_10_90.is_none(), "y never reaches 90%");
    }
}
