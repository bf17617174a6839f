use nalgebra::{Complex, DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use super::{LtiError, TransferFunction};

/// Continuous-time SISO state-space model `x' = Ax + Bu`, `y = Cx + Du`.
///
/// Realizations produced from transfer functions use the controllable
/// canonical form with the companion structure in the last row of `A`.
/// Strictly proper sources have `D = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl StateSpaceModel {
    pub(crate) fn from_tf(tf: &TransferFunction) -> Result<Self, LtiError> {
        let (den_rest, c_row, d) = tf.canonical_parts()?;
        let n = den_rest.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        for (j, &coeff) in den_rest.iter().enumerate() {
            if n > 0 {
                a[(n - 1, j)] = -coeff;
            }
        }
        let mut b = DVector::zeros(n);
        if n > 0 {
            b[n - 1] = 1.0;
        }
        let c = RowDVector::from_row_slice(&c_row);
        Ok(StateSpaceModel { a, b, c, d })
    }

    /// Number of states.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Evaluates `C (jwI - A)^{-1} B + D` at `omega` rad/min.
    pub fn frequency_response(&self, omega: f64) -> Result<Complex64, LtiError> {
        if omega <= 0.0 {
            return Err(LtiError::NonPositiveFrequency(omega));
        }
        let n = self.order();
        if n == 0 {
            return Ok(Complex64::new(self.d, 0.0));
        }
        let jw = Complex::new(0.0, omega);
        let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex::new(-self.a[(i, j)], 0.0);
            }
            m[(i, i)] += jw;
        }
        let b = DVector::from_iterator(n, self.b.iter().map(|&v| Complex::new(v, 0.0)));
        let x = m
            .lu()
            .solve(&b)
            .ok_or(LtiError::PoleOnImaginaryAxis(omega))?;
        let mut acc = Complex::new(self.d, 0.0);
        for i in 0..n {
            acc += Complex::new(self.c[i], 0.0) * x[i];
        }
        Ok(Complex64::new(acc.re, acc.im))
    }
}
