use super::{LtiError, Polynomial};

/// Fraction of the largest tabulated magnitude substituted for a zero
/// first-column pivot.
const EPSILON_FRACTION: f64 = 1e-12;

/// Routh-Hurwitz tabular test: true iff every root of `p` has strictly
/// negative real part.
///
/// A zero first-column pivot with a nonzero remaining row is replaced by
/// `1e-12` times the largest magnitude tabulated so far. An entirely zero
/// row signals roots placed symmetrically about the origin (or on the
/// imaginary axis), which is never strictly Hurwitz.
pub fn is_hurwitz(p: &Polynomial) -> Result<bool, LtiError> {
    if p.is_zero() {
        return Err(LtiError::ZeroDenominator);
    }
    if p.degree() < 1 {
        return Err(LtiError::DegreeTooLow);
    }
    let mut coeffs: Vec<f64> = p.coeffs().to_vec();
    if coeffs[0] < 0.0 {
        for c in &mut coeffs {
            *c = -*c;
        }
    }

    let n = coeffs.len() - 1;
    let width = n / 2 + 1;
    let mut prev: Vec<f64> = (0..width)
        .map(|j| coeffs.get(2 * j).copied().unwrap_or(0.0))
        .collect();
    let mut curr: Vec<f64> = (0..width)
        .map(|j| coeffs.get(2 * j + 1).copied().unwrap_or(0.0))
        .collect();

    let mut first_column = vec![prev[0]];
    let mut max_mag = prev
        .iter()
        .chain(curr.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));

    for _ in 1..=n {
        if curr.iter().all(|&v| v == 0.0) {
            return Ok(false);
        }
        if curr[0] == 0.0 {
            curr[0] = EPSILON_FRACTION * max_mag.max(1.0);
        }
        first_column.push(curr[0]);
        let mut next = vec![0.0; width];
        for (j, slot) in next.iter_mut().enumerate().take(width - 1) {
            let a = prev.get(j + 1).copied().unwrap_or(0.0);
            let b = curr.get(j + 1).copied().unwrap_or(0.0);
            *slot = (curr[0] * a - prev[0] * b) / curr[0];
        }
        for &v in &next {
            max_mag = max_mag.max(v.abs());
        }
        prev = curr;
        curr = next;
    }

    Ok(first_column.iter().all(|&v| v > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec()).unwrap()
    }

    #[test]
    fn first_order_stable() {
        assert!(is_hurwitz(&poly(&[1.0, 1.0])).unwrap());
    }

    #[test]
    fn root_in_right_half_plane() {
        // s^2 - 1 has a root at +1
        assert!(!is_hurwitz(&poly(&[1.0, 0.0, -1.0])).unwrap());
    }

    #[test]
    fn fat_model_denominator_is_stable() {
        // second order, all coefficients positive
        assert!(is_hurwitz(&poly(&[1.0, 0.4126, 0.0003241])).unwrap());
    }

    #[test]
    fn imaginary_axis_roots_are_not_hurwitz() {
        // s^2 + 1: roots at +-j produce an all-zero row
        assert!(!is_hurwitz(&poly(&[1.0, 0.0, 1.0])).unwrap());
    }

    #[test]
    fn root_at_origin_is_not_hurwitz() {
        // s^2 + s = s(s+1)
        assert!(!is_hurwitz(&poly(&[1.0, 1.0, 0.0])).unwrap());
    }

    #[test]
    fn negative_leading_coefficient_is_sign_normalized() {
        // -(s+1)(s+2) = -s^2 - 3s - 2, still Hurwitz
        assert!(is_hurwitz(&poly(&[-1.0, -3.0, -2.0])).unwrap());
    }

    #[test]
    fn zero_pivot_epsilon_rule() {
        // s^4 + s^3 + 3s^2 + 3s + 3 produces a zero pivot in row s^2;
        // roots (numerically) include a RHP pair, so not Hurwitz.
        assert!(!is_hurwitz(&poly(&[1.0, 1.0, 3.0, 3.0, 3.0])).unwrap());
    }

    #[test]
    fn higher_order_stable_product() {
        // (s+1)(s+2)(s+3)(s+4) = s^4 + 10s^3 + 35s^2 + 50s + 24
        assert!(is_hurwitz(&poly(&[1.0, 10.0, 35.0, 50.0, 24.0])).unwrap());
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            is_hurwitz(&poly(&[0.0])),
            Err(LtiError::ZeroDenominator)
        ));
        assert!(matches!(
            is_hurwitz(&poly(&[5.0])),
            Err(LtiError::DegreeTooLow)
        ));
    }
}
