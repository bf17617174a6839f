use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LtiError, Polynomial, StateSpaceModel};

/// Single evaluation of a frequency response at `omega` rad/min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint {
    pub omega: f64,
    pub magnitude: f64,
    pub phase_deg: f64,
}

/// Rational SISO transfer function in the Laplace variable `s` (rad/min).
///
/// The numerator may be the zero polynomial (the zero system); the
/// denominator may not. Improper ratios are representable (a pure
/// differentiator is a legal frequency-response subject) but cannot be
/// realized in state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, LtiError> {
        if den.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        Ok(TransferFunction { num, den })
    }

    /// Convenience constructor from raw highest-degree-first coefficients.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, LtiError> {
        TransferFunction::new(Polynomial::new(num.to_vec())?, Polynomial::new(den.to_vec())?)
    }

    /// The unity transfer function 1/1.
    pub fn unity() -> Self {
        TransferFunction::from_coeffs(&[1.0], &[1.0]).expect("valid")
    }

    /// Constant gain k/1.
    pub fn gain(k: f64) -> Result<Self, LtiError> {
        TransferFunction::new(Polynomial::new(vec![k])?, Polynomial::constant(1.0))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// deg(num) <= deg(den), i.e. realizable.
    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    /// deg(num) < deg(den): no direct feedthrough.
    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// Steady-state gain num(0)/den(0).
    pub fn dc_gain(&self) -> Result<f64, LtiError> {
        if self.den.constant_term() == 0.0 {
            return Err(LtiError::InfiniteDcGain);
        }
        Ok(self.num.constant_term() / self.den.constant_term())
    }

    /// Scales the numerator by `k`; poles untouched.
    pub fn scale(&self, k: f64) -> Self {
        TransferFunction {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    /// Cascade composition. No common-factor cancellation is performed.
    pub fn series(&self, other: &Self) -> Self {
        TransferFunction {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    /// Additive composition over the common denominator. No cancellation.
    pub fn parallel(&self, other: &Self) -> Self {
        TransferFunction {
            num: self
                .num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    /// Negative-feedback interconnection `self / (1 + self * feedback)`.
    pub fn feedback(&self, feedback: &Self) -> Result<Self, LtiError> {
        let num = self.num.mul(&feedback.den);
        let den = self
            .den
            .mul(&feedback.den)
            .add(&self.num.mul(&feedback.num));
        if den.is_zero() {
            return Err(LtiError::DegenerateLoop);
        }
        Ok(TransferFunction { num, den })
    }

    /// Evaluates the response at `s = j*omega`, `omega` in rad/min.
    pub fn frequency_response(&self, omega: f64) -> Result<FrequencyPoint, LtiError> {
        if omega <= 0.0 {
            return Err(LtiError::NonPositiveFrequency(omega));
        }
        let s = Complex64::new(0.0, omega);
        let d = self.den.eval_complex(s);
        if d.norm() == 0.0 {
            return Err(LtiError::PoleOnImaginaryAxis(omega));
        }
        let h = self.num.eval_complex(s) / d;
        Ok(FrequencyPoint {
            omega,
            magnitude: h.norm(),
            phase_deg: h.arg().to_degrees(),
        })
    }

    /// Controllable-canonical realization. Biproper inputs are split by
    /// polynomial division into a feedthrough `D` plus a strictly proper
    /// remainder; improper inputs are rejected.
    pub fn to_state_space(&self) -> Result<StateSpaceModel, LtiError> {
        StateSpaceModel::from_tf(self)
    }

    /// Monic-denominator strictly-proper split used by realizations:
    /// returns `(den_rest, c, d)` where `den_rest` holds the monic
    /// denominator coefficients below the leading 1 (ascending order,
    /// `a_0..a_{n-1}`) and `c` holds the strictly proper numerator
    /// (ascending, padded to n).
    pub(crate) fn canonical_parts(&self) -> Result<(Vec<f64>, Vec<f64>, f64), LtiError> {
        if !self.is_proper() {
            return Err(LtiError::Improper {
                num: self.num.degree(),
                den: self.den.degree(),
            });
        }
        let (q, rem) = self.num.div_rem(&self.den)?;
        debug_assert!(q.degree() == 0);
        let d = q.constant_term();
        let lead = self.den.leading();
        let n = self.den.degree();
        // ascending a_0..a_{n-1} from monic denominator
        let mut den_rest = vec![0.0; n];
        for (i, &c) in self.den.coeffs().iter().skip(1).enumerate() {
            den_rest[n - 1 - i] = c / lead;
        }
        let mut c_row = vec![0.0; n];
        if !rem.is_zero() {
            for (i, &c) in rem.coeffs().iter().rev().enumerate() {
                c_row[i] = c / lead;
            }
        }
        Ok((den_rest, c_row, d))
    }
}
