//! Property suites: realization round-trips over the organ bank, the
//! stability test against an eigenvalue oracle, composition identities,
//! rationalization band accuracy, and the sigmoid effect map.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use infusim_core::frac::{ora_approximate, ora_grid, OraConfig};
use infusim_core::lti::{is_hurwitz, Polynomial, TransferFunction};
use infusim_core::patient::{
    apply_dc_perturbation, hill_effect, nominal_patient, HillParams, Organ, PerturbationSpec,
};

#[test]
fn organ_bank_realizations_match_transfer_functions() {
    let patient = nominal_patient();
    for model in patient.organs() {
        let ss = model.tf.to_state_space().unwrap();
        for k in 0..20 {
            let omega = 10f64.powf(-3.0 + 6.0 * k as f64 / 19.0);
            let h_ss = ss.frequency_response(omega).unwrap();
            let h_tf = model.tf.eval(Complex64::new(0.0, omega));
            assert!(
                (h_ss - h_tf).norm() <= 1e-9 * h_tf.norm(),
                "{}: |H_ss - H_tf| too large at omega = {omega}",
                model.organ
            );
        }
    }
}

#[test]
fn ora_band_accuracy_suite() {
    let cfg = OraConfig::default();
    for &gamma in &[-0.5, 0.3, 0.5, 0.7] {
        let tf = ora_approximate(gamma, &cfg).unwrap();
        for k in 0..=40 {
            let omega = 10f64.powf(-1.0 + 2.0 * k as f64 / 40.0);
            let p = tf.frequency_response(omega).unwrap();
            let mag_db = 20.0 * p.magnitude.log10();
            let ideal_db = 20.0 * gamma * omega.log10();
            assert!(
                (mag_db - ideal_db).abs() < 2.0,
                "gamma {gamma}: magnitude off by {} dB at omega {omega}",
                (mag_db - ideal_db).abs()
            );
            let ideal_phase = 90.0 * gamma;
            assert!(
                (p.phase_deg - ideal_phase).abs() < 6.0,
                "gamma {gamma}: phase {} vs {ideal_phase} at omega {omega}",
                p.phase_deg
            );
        }
        // corner-frequency symmetry about the band center, exact algebra
        let (zeros, poles) = ora_grid(gamma, &cfg);
        let target = cfg.omega_b * cfg.omega_h;
        let m = zeros.len();
        for k in 0..m {
            let prod = poles[k] * zeros[m - 1 - k];
            assert!((prod - target).abs() <= 1e-12 * target);
        }
    }
}

/// Roots of a polynomial via the companion-matrix eigenvalues; the
/// independent oracle for the tabular stability test.
fn companion_roots(p: &Polynomial) -> Vec<Complex64> {
    let monic = p.monic().unwrap();
    let c = monic.coeffs();
    let n = monic.degree();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hurwitz_agrees_with_eigenvalue_oracle(
        coeffs in prop::collection::vec(-3.0f64..3.0, 2..=6),
        lead in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
    ) {
        let mut c = coeffs;
        c[0] = lead;
        let p = Polynomial::new(c).unwrap();
        prop_assume!(p.degree() >= 1);
        let roots = companion_roots(&p);
        // skip numerically marginal cases where the oracle itself is moot
        prop_assume!(roots.iter().all(|z| z.re.abs() > 1e-6));
        let expected = roots.iter().all(|z| z.re < 0.0);
        prop_assert_eq!(is_hurwitz(&p).unwrap(), expected);
    }

    #[test]
    fn feedback_matches_pointwise_composition(
        ng in prop::collection::vec(-2.0f64..2.0, 1..=3),
        dg in prop::collection::vec(-2.0f64..2.0, 1..=3),
        nh in prop::collection::vec(-2.0f64..2.0, 1..=3),
        dh in prop::collection::vec(-2.0f64..2.0, 1..=3),
    ) {
        let mk = |n: &[f64], d: &[f64]| -> Option<TransferFunction> {
            let den = Polynomial::new(d.to_vec()).ok()?;
            if den.is_zero() { return None; }
            TransferFunction::new(Polynomial::new(n.to_vec()).ok()?, den).ok()
        };
        let g = mk(&ng, &dg);
        let h = mk(&nh, &dh);
        prop_assume!(g.is_some() && h.is_some());
        let (g, h) = (g.unwrap(), h.unwrap());
        let closed = g.feedback(&h);
        prop_assume!(closed.is_ok());
        let closed = closed.unwrap();

        let points = [
            Complex64::new(0.37, 0.81),
            Complex64::new(-0.52, 1.44),
            Complex64::new(1.23, -0.29),
            Complex64::new(-1.71, -0.63),
            Complex64::new(0.05, 2.37),
        ];
        for s in points {
            let gd = g.den().eval_complex(s);
            let hd = h.den().eval_complex(s);
            prop_assume!(gd.norm() > 1e-6 && hd.norm() > 1e-6);
            let gv = g.num().eval_complex(s) / gd;
            let hv = h.num().eval_complex(s) / hd;
            let denom = Complex64::new(1.0, 0.0) + gv * hv;
            prop_assume!(denom.norm() > 1e-3);
            let direct = gv / denom;
            let composed = closed.eval(s);
            prop_assert!(
                (composed - direct).norm() <= 1e-9 * direct.norm().max(1e-9),
                "mismatch at {s}: {composed} vs {direct}"
            );
        }
    }

    #[test]
    fn series_dc_gain_is_product_of_dc_gains(
        na in -5.0f64..5.0, d0a in 0.1f64..4.0,
        nb in -5.0f64..5.0, d0b in 0.1f64..4.0,
    ) {
        let a = TransferFunction::from_coeffs(&[na], &[1.0, d0a]).unwrap();
        let b = TransferFunction::from_coeffs(&[nb], &[1.0, 1.0, d0b]).unwrap();
        let lhs = a.series(&b).dc_gain().unwrap();
        let rhs = a.dc_gain().unwrap() * b.dc_gain().unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-12));
    }

    #[test]
    fn hill_effect_is_strictly_monotone(
        a in 0.0f64..60.0,
        delta in 0.001f64..40.0,
    ) {
        let h = HillParams::default();
        let lo = hill_effect(a, &h).unwrap();
        let hi = hill_effect(a + delta, &h).unwrap();
        prop_assert!(lo < hi, "effect({a}) = {lo} !< effect({}) = {hi}", a + delta);
    }

    #[test]
    fn perturbations_compose_multiplicatively(
        a in 0.2f64..3.0,
        b in 0.2f64..3.0,
    ) {
        let base = nominal_patient();
        let spec = |s: f64| PerturbationSpec { organ: Organ::Brain, dc_scale: s };
        let chained = apply_dc_perturbation(
            &apply_dc_perturbation(&base, &spec(a)).unwrap(),
            &spec(b),
        ).unwrap();
        let direct = apply_dc_perturbation(&base, &spec(a * b)).unwrap();
        for (x, y) in chained
            .organ(Organ::Brain).tf.num().coeffs().iter()
            .zip(direct.organ(Organ::Brain).tf.num().coeffs())
        {
            prop_assert!((x - y).abs() <= 2.0 * f64::EPSILON * x.abs());
        }
        // poles untouched in either route
        prop_assert_eq!(
            chained.organ(Organ::Brain).tf.den().coeffs(),
            base.organ(Organ::Brain).tf.den().coeffs()
        );
    }
}
