use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LtiError;

/// Real polynomial stored highest-degree-first, exactly as printed in
/// transfer-function tables. The zero polynomial is the single
/// coefficient `[0.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from highest-degree-first coefficients.
    /// Leading zeros are trimmed so the leading coefficient is nonzero
    /// (except for the zero polynomial itself).
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Result<Self, LtiError> {
        let coeffs = coeffs.into();
        if coeffs.is_empty() {
            return Err(LtiError::EmptyPolynomial);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LtiError::NonFiniteCoefficient);
        }
        let mut p = Polynomial { coeffs };
        p.trim();
        Ok(p)
    }

    /// Constant polynomial.
    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c]).expect("finite constant")
    }

    /// The monomial s^n.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[0] = 1.0;
        Polynomial { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs[0] == 0.0 {
            self.coeffs.remove(0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of s^0.
    pub fn constant_term(&self) -> f64 {
        *self.coeffs.last().expect("non-empty")
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
            .expect("scaling preserves validity")
    }

    /// Divides every coefficient by the leading coefficient. Stored
    /// coefficients are otherwise kept verbatim, so this is only done on
    /// explicit request.
    pub fn monic(&self) -> Result<Self, LtiError> {
        if self.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        Ok(self.scale(1.0 / self.leading()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[n - self.coeffs.len() + i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[n - other.coeffs.len() + i] += c;
        }
        Polynomial::new(out).expect("sum of finite is finite")
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial::constant(0.0);
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out).expect("product of finite is finite")
    }

    /// Euclidean division: returns (quotient, remainder) with
    /// self = quotient * divisor + remainder and deg(rem) < deg(divisor).
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), LtiError> {
        if divisor.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        if self.degree() < divisor.degree() || self.is_zero() {
            return Ok((Polynomial::constant(0.0), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let dn = divisor.coeffs.len();
        let qn = rem.len() - dn + 1;
        let mut quot = vec![0.0; qn];
        for i in 0..qn {
            let factor = rem[i] / divisor.coeffs[0];
            quot[i] = factor;
            for j in 0..dn {
                rem[i + j] -= factor * divisor.coeffs[j];
            }
        }
        let rem = Polynomial::new(rem[qn..].to_vec()).unwrap_or_else(|_| Polynomial::constant(0.0));
        Ok((Polynomial::new(quot)?, rem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_leading_zeros() {
        let p = Polynomial::new(vec![0.0, 0.0, 2.0, 1.0]).unwrap();
        assert_eq!(p.coeffs(), &[2.0, 1.0]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn zero_polynomial_is_single_zero() {
        let p = Polynomial::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(p.coeffs(), &[0.0]);
        assert!(p.is_zero());
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            Polynomial::new(Vec::<f64>::new()),
            Err(LtiError::EmptyPolynomial)
        ));
        assert!(matches!(
            Polynomial::new(vec![f64::NAN]),
            Err(LtiError::NonFiniteCoefficient)
        ));
    }

    #[test]
    fn horner_evaluation() {
        // s^2 + 2s + 3 at s = 2 -> 11
        let p = Polynomial::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.eval_real(2.0), 11.0);
        let v = p.eval_complex(Complex64::new(0.0, 1.0));
        // (j)^2 + 2j + 3 = 2 + 2j
        assert!((v - Complex64::new(2.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn division_with_remainder() {
        // (s + 2) / (s + 1) = 1 remainder 1
        let num = Polynomial::new(vec![1.0, 2.0]).unwrap();
        let den = Polynomial::new(vec![1.0, 1.0]).unwrap();
        let (q, r) = num.div_rem(&den).unwrap();
        assert_eq!(q.coeffs(), &[1.0]);
        assert_eq!(r.coeffs(), &[1.0]);
    }

    #[test]
    fn division_reconstructs() {
        let a = Polynomial::new(vec![2.0, -3.0, 4.0, 1.0]).unwrap();
        let b = Polynomial::new(vec![1.0, 0.5]).unwrap();
        let (q, r) = a.div_rem(&b).unwrap();
        let back = q.mul(&b).add(&r);
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn addition_aligns_degrees() {
        let a = Polynomial::new(vec![1.0, 0.0]).unwrap(); // s
        let b = Polynomial::new(vec![3.0]).unwrap(); // 3
        assert_eq!(a.add(&b).coeffs(), &[1.0, 3.0]);
    }
}
