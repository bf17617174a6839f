//! Oustaloup recursive approximation of fractional powers of `s` and
//! synthesis of rationalized PID / fractional-order PID controllers.
//!
//! The approximation band and order default to N = 2 over
//! [1e-2, 1e2] rad/min, giving 2N+1 = 5 interlaced pole/zero pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lti::{LtiError, Polynomial, TransferFunction};

/// Default corner frequency (rad/min) of the filtered-derivative factor
/// `s*Nf/(s+Nf)` used for integer derivative orders.
pub const DEFAULT_DERIV_FILTER: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("oustaloup exponent must lie strictly inside (-1, 1), got {0}; decompose first")]
    ExponentOutOfBand(f64),
    #[error("approximation band requires 0 < omega_b < omega_h, got [{0}, {1}]")]
    InvalidBand(f64, f64),
    #[error("approximation order must be >= 1")]
    InvalidOrder,
    #[error("integro-differential order must lie in [0, 2], got {0}")]
    OrderOutOfRange(f64),
    #[error("controller gains must be finite and nonnegative")]
    InvalidGains,
    #[error("derivative filter corner must be positive, got {0}")]
    InvalidFilter(f64),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// Band and order of the recursive approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraConfig {
    /// Half-order N; the rationalization carries 2N+1 pole/zero pairs.
    pub order_n: u32,
    /// Lower band edge, rad/min.
    pub omega_b: f64,
    /// Upper band edge, rad/min.
    pub omega_h: f64,
}

impl Default for OraConfig {
    fn default() -> Self {
        OraConfig {
            order_n: 2,
            omega_b: 1e-2,
            omega_h: 1e2,
        }
    }
}

impl OraConfig {
    pub fn validate(&self) -> Result<(), FracError> {
        if self.order_n < 1 {
            return Err(FracError::InvalidOrder);
        }
        if !(self.omega_b > 0.0 && self.omega_b < self.omega_h && self.omega_h.is_finite()) {
            return Err(FracError::InvalidBand(self.omega_b, self.omega_h));
        }
        Ok(())
    }
}

/// Gains and integro-differential orders of `Kp + Ki/s^lambda + Kd*s^mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FopidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl FopidParams {
    pub fn new(kp: f64, ki: f64, kd: f64, lambda: f64, mu: f64) -> Result<Self, FracError> {
        let p = FopidParams {
            kp,
            ki,
            kd,
            lambda,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    /// Classical PID gains (unit orders).
    pub fn pid(kp: f64, ki: f64, kd: f64) -> Result<Self, FracError> {
        FopidParams::new(kp, ki, kd, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), FracError> {
        for g in [self.kp, self.ki, self.kd] {
            if !g.is_finite() || g < 0.0 {
                return Err(FracError::InvalidGains);
            }
        }
        for o in [self.lambda, self.mu] {
            if !(0.0..=2.0).contains(&o) {
                return Err(FracError::OrderOutOfRange(o));
            }
        }
        Ok(())
    }
}

/// Structural controller classes distinguished by where the orders sit
/// relative to 1. The boundary lambda = 1 or mu = 1 belongs only to PID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FopidClass {
    Pid,
    Fopid1,
    Fopid2,
    Fopid3,
    Fopid4,
}

impl FopidClass {
    pub const ALL: [FopidClass; 5] = [
        FopidClass::Pid,
        FopidClass::Fopid1,
        FopidClass::Fopid2,
        FopidClass::Fopid3,
        FopidClass::Fopid4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FopidClass::Pid => "PID",
            FopidClass::Fopid1 => "FOPID1",
            FopidClass::Fopid2 => "FOPID2",
            FopidClass::Fopid3 => "FOPID3",
            FopidClass::Fopid4 => "FOPID4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PID" => Some(FopidClass::Pid),
            "FOPID1" => Some(FopidClass::Fopid1),
            "FOPID2" => Some(FopidClass::Fopid2),
            "FOPID3" => Some(FopidClass::Fopid3),
            "FOPID4" => Some(FopidClass::Fopid4),
            _ => None,
        }
    }
}

impl std::fmt::Display for FopidClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// True iff the orders satisfy the class's inequality set.
pub fn validate_class(params: &FopidParams, class: FopidClass) -> bool {
    let (l, m) = (params.lambda, params.mu);
    match class {
        FopidClass::Pid => l == 1.0 && m == 1.0,
        FopidClass::Fopid1 => l < 1.0 && m < 1.0,
        FopidClass::Fopid2 => l < 1.0 && m > 1.0,
        FopidClass::Fopid3 => l > 1.0 && m < 1.0,
        FopidClass::Fopid4 => l > 1.0 && m > 1.0,
    }
}

/// Splits an order in [0, 2] into its integer part and a fractional
/// remainder in [0, 1). Exact integers carry no remainder.
pub fn decompose_exponent(theta: f64) -> Result<(u32, f64), FracError> {
    if !(0.0..=2.0).contains(&theta) {
        return Err(FracError::OrderOutOfRange(theta));
    }
    let int_part = theta.floor();
    Ok((int_part as u32, theta - int_part))
}

/// Rationalizes `s^gamma` for `gamma` strictly inside (-1, 1) as
/// `K * prod_k (s + w'_k)/(s + w_k)` over the configured band, with
///
/// ```text
/// w_k  = w_b * (w_h/w_b)^[(k + N + (1+gamma)/2) / (2N+1)]
/// w'_k = w_b * (w_h/w_b)^[(k + N + (1-gamma)/2) / (2N+1)]
/// K    = w_h^gamma
/// ```
///
/// `gamma = 0` short-circuits to the exact unity transfer function.
pub fn ora_approximate(gamma: f64, cfg: &OraConfig) -> Result<TransferFunction, FracError> {
    cfg.validate()?;
    if gamma.abs() >= 1.0 {
        return Err(FracError::ExponentOutOfBand(gamma));
    }
    if gamma == 0.0 {
        return Ok(TransferFunction::unity());
    }
    let (zeros, poles) = ora_grid(gamma, cfg);
    let gain = cfg.omega_h.powf(gamma);
    let mut num = Polynomial::constant(gain);
    let mut den = Polynomial::constant(1.0);
    for (&z, &p) in zeros.iter().zip(poles.iter()) {
        num = num.mul(&Polynomial::new(vec![1.0, z]).expect("finite"));
        den = den.mul(&Polynomial::new(vec![1.0, p]).expect("finite"));
    }
    Ok(TransferFunction::new(num, den)?)
}

/// The raw corner frequencies (zeros `w'_k`, poles `w_k`) for k = -N..=N,
/// ascending in k. Exposed for the symmetry and ordering checks.
pub fn ora_grid(gamma: f64, cfg: &OraConfig) -> (Vec<f64>, Vec<f64>) {
    let n = cfg.order_n as i64;
    let span = cfg.omega_h / cfg.omega_b;
    let denom = (2 * n + 1) as f64;
    let mut zeros = Vec::with_capacity((2 * n + 1) as usize);
    let mut poles = Vec::with_capacity((2 * n + 1) as usize);
    for k in -n..=n {
        let base = (k + n) as f64;
        let e_pole = (base + (1.0 + gamma) / 2.0) / denom;
        let e_zero = (base + (1.0 - gamma) / 2.0) / denom;
        poles.push(cfg.omega_b * span.powf(e_pole));
        zeros.push(cfg.omega_b * span.powf(e_zero));
    }
    (zeros, poles)
}

/// Builds the rationalized controller `Kp + Ki*I(s) + Kd*D(s)`.
///
/// The integral branch keeps exact integrator poles so steady-state
/// tracking error vanishes: `I(s) = ORA(s^(ceil(l)-l)) / s^ceil(l)` for
/// `l > 0` and `I = 1` at `l = 0`. The derivative branch pairs the
/// fractional remainder with filtered integer derivative factors:
/// `D(s) = ORA(s^(m-floor(m))) * [s*Nf/(s+Nf)]^floor(m)` for `m > 0`,
/// `D = 1` at `m = 0`. The result is proper.
pub fn build_fopid(
    params: &FopidParams,
    cfg: &OraConfig,
    deriv_filter_nf: f64,
) -> Result<TransferFunction, FracError> {
    params.validate()?;
    cfg.validate()?;
    if !deriv_filter_nf.is_finite() || deriv_filter_nf <= 0.0 {
        return Err(FracError::InvalidFilter(deriv_filter_nf));
    }

    let integral = integral_branch(params.lambda, cfg)?;
    let derivative = derivative_branch(params.mu, cfg, deriv_filter_nf)?;

    let c = TransferFunction::gain(params.kp)?
        .parallel(&integral.scale(params.ki))
        .parallel(&derivative.scale(params.kd));
    Ok(c)
}

fn integral_branch(lambda: f64, cfg: &OraConfig) -> Result<TransferFunction, FracError> {
    if lambda == 0.0 {
        return Ok(TransferFunction::unity());
    }
    let n_int = lambda.ceil() as usize;
    let remainder = n_int as f64 - lambda; // in [0, 1)
    let frac_part = if remainder == 0.0 {
        TransferFunction::unity()
    } else {
        ora_approximate(remainder, cfg)?
    };
    let den = frac_part.den().mul(&Polynomial::monomial(n_int));
    Ok(TransferFunction::new(frac_part.num().clone(), den)?)
}

fn derivative_branch(
    mu: f64,
    cfg: &OraConfig,
    nf: f64,
) -> Result<TransferFunction, FracError> {
    if mu == 0.0 {
        return Ok(TransferFunction::unity());
    }
    let (n_int, frac) = decompose_exponent(mu)?;
    let mut branch = if frac == 0.0 {
        TransferFunction::unity()
    } else {
        ora_approximate(frac, cfg)?
    };
    let filtered = TransferFunction::from_coeffs(&[nf, 0.0], &[1.0, nf])?;
    for _ in 0..n_int {
        branch = branch.series(&filtered);
    }
    Ok(branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::is_hurwitz;
    use num_complex::Complex64;

    #[test]
    fn decompose_handles_boundaries() {
        assert_eq!(decompose_exponent(0.83).unwrap(), (0, 0.83));
        assert_eq!(decompose_exponent(1.5).unwrap(), (1, 0.5));
        assert_eq!(decompose_exponent(1.0).unwrap(), (1, 0.0));
        assert_eq!(decompose_exponent(0.0).unwrap(), (0, 0.0));
        assert_eq!(decompose_exponent(2.0).unwrap(), (2, 0.0));
        assert!(decompose_exponent(2.1).is_err());
        assert!(decompose_exponent(-0.1).is_err());
    }

    #[test]
    fn zeroth_power_is_exact_unity() {
        let tf = ora_approximate(0.0, &OraConfig::default()).unwrap();
        assert_eq!(tf.num().coeffs(), &[1.0]);
        assert_eq!(tf.den().coeffs(), &[1.0]);
    }

    #[test]
    fn rejects_out_of_band_exponents() {
        let cfg = OraConfig::default();
        assert!(ora_approximate(1.0, &cfg).is_err());
        assert!(ora_approximate(-1.0, &cfg).is_err());
        assert!(ora_approximate(1.3, &cfg).is_err());
    }

    #[test]
    fn half_power_grid_matches_direct_evaluation() {
        let cfg = OraConfig::default();
        let (zeros, poles) = ora_grid(0.5, &cfg);
        // center pair for gamma = 0.5, N = 2, band [1e-2, 1e2]
        assert!((poles[2] - 10f64.powf(0.2)).abs() < 1e-12);
        assert!((zeros[2] - 10f64.powf(-0.2)).abs() < 1e-12);
        let tf = ora_approximate(0.5, &cfg).unwrap();
        // K = omega_h^gamma = 10; leading num coeff is K after expansion
        assert!((tf.num().leading() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn pole_zero_symmetry_and_ordering() {
        let cfg = OraConfig::default();
        for &gamma in &[-0.5, 0.3, 0.5, 0.7, 0.17, -0.83] {
            let (zeros, poles) = ora_grid(gamma, &cfg);
            let m = zeros.len();
            let target = cfg.omega_b * cfg.omega_h;
            for k in 0..m {
                let prod = poles[k] * zeros[m - 1 - k];
                assert!(
                    (prod - target).abs() <= 1e-12 * target,
                    "symmetry broken at k={k} for gamma={gamma}"
                );
            }
            for w in poles.windows(2).chain(zeros.windows(2)) {
                assert!(w[0] < w[1], "corner frequencies must ascend");
            }
            assert!(poles.iter().chain(zeros.iter()).all(|&w| w > 0.0));
        }
    }

    #[test]
    fn half_power_phase_near_45_degrees() {
        let tf = ora_approximate(0.5, &OraConfig::default()).unwrap();
        let p = tf.frequency_response(1.0).unwrap();
        assert!(
            (p.phase_deg - 45.0).abs() < 6.0,
            "phase at band center: {}",
            p.phase_deg
        );
        assert!((p.magnitude - 1.0).abs() < 0.26); // < 2 dB
    }

    #[test]
    fn reciprocal_exponents_nearly_invert() {
        let cfg = OraConfig::default();
        let plus = ora_approximate(0.5, &cfg).unwrap();
        let minus = ora_approximate(-0.5, &cfg).unwrap();
        for k in 0..21 {
            let omega = 10f64.powf(-1.0 + 2.0 * k as f64 / 20.0);
            let s = Complex64::new(0.0, omega);
            let prod = plus.eval(s) * minus.eval(s);
            assert!(
                (prod - Complex64::new(1.0, 0.0)).norm() < 0.05,
                "reciprocal defect at omega {omega}: {prod}"
            );
        }
    }

    #[test]
    fn class_constraints() {
        let f1 = FopidParams::new(0.0212, 2.3014, 0.0783, 0.8301, 0.1013).unwrap();
        assert!(validate_class(&f1, FopidClass::Fopid1));
        assert!(!validate_class(&f1, FopidClass::Fopid2));

        // orders below 1 never satisfy the mu > 1 requirement
        let f2 = FopidParams::new(5.5757, 3.3381, 0.001, 0.798, 0.1488).unwrap();
        assert!(!validate_class(&f2, FopidClass::Fopid2));

        let pid = FopidParams::pid(1.0, 1.0, 1.0).unwrap();
        assert!(validate_class(&pid, FopidClass::Pid));
        // the order-1 boundary belongs only to PID
        assert!(!validate_class(&pid, FopidClass::Fopid1));
        assert!(!validate_class(&pid, FopidClass::Fopid4));
    }

    #[test]
    fn unit_orders_reduce_to_classical_pid() {
        let params = FopidParams::pid(1.0, 1.0, 1.0).unwrap();
        let built = build_fopid(&params, &OraConfig::default(), 100.0).unwrap();
        // Kp + Ki/s + Kd*100s/(s+100) over den s(s+100)
        let hand_num = Polynomial::new(vec![1.0 + 100.0, 1.0 + 100.0, 100.0]).unwrap();
        let hand_den = Polynomial::new(vec![1.0, 100.0, 0.0]).unwrap();
        let lead = built.den().leading();
        for (a, b) in built.den().monic().unwrap().coeffs().iter().zip(
            hand_den.monic().unwrap().coeffs(),
        ) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in built
            .num()
            .scale(1.0 / lead)
            .coeffs()
            .iter()
            .zip(hand_num.coeffs())
        {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn gains_only_controller_is_constant() {
        let params = FopidParams::new(2.5, 0.0, 0.0, 0.0, 0.0).unwrap();
        let tf = build_fopid(&params, &OraConfig::default(), 100.0).unwrap();
        assert!((tf.dc_gain().unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(tf.num().degree(), tf.den().degree());
        let p = tf.frequency_response(7.3).unwrap();
        assert!((p.magnitude - 2.5).abs() < 1e-12);
    }

    #[test]
    fn fractional_controller_structure() {
        // one integrator pole at the origin, remaining poles strictly stable
        let params = FopidParams::new(0.0212, 2.3014, 0.0783, 0.8301, 0.1013).unwrap();
        let tf = build_fopid(&params, &OraConfig::default(), 100.0).unwrap();
        assert!(tf.is_proper());
        let den = tf.den();
        assert_eq!(den.constant_term(), 0.0, "integrator pole expected");
        // deflate the single origin pole and require the rest Hurwitz
        let deflated =
            Polynomial::new(den.coeffs()[..den.coeffs().len() - 1].to_vec()).unwrap();
        assert!(is_hurwitz(&deflated).unwrap());
    }

    #[test]
    fn orders_above_one_gain_extra_integrator_and_filter() {
        let params = FopidParams::new(1.0, 1.0, 1.0, 1.5, 1.5).unwrap();
        let tf = build_fopid(&params, &OraConfig::default(), 100.0).unwrap();
        assert!(tf.is_proper());
        // two exact integrator poles from ceil(1.5) = 2
        let c = tf.den().coeffs();
        assert_eq!(c[c.len() - 1], 0.0);
        assert_eq!(c[c.len() - 2], 0.0);
        assert_ne!(c[c.len() - 3], 0.0);
    }
}
