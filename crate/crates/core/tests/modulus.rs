use mather_core::modulus::{
    check_modulus_laws, concavity_defect, default_x_grid, holder, least_concave_majorant, omega_z,
    oscillation_modulus, parse_modulus,
};
use proptest::prelude::*;

fn increasing_samples() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..1.0), 1..40).prop_map(|steps| {
        let mut t = 0.0;
        let mut m = 0.0;
        let mut out = vec![(0.0, 0.0)];
        for (dt, dm) in steps {
            t += dt;
            m += dm * dm * dm;
            out.push((t, m));
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn majorant_dominates_and_is_concave(samples in increasing_samples()) {
        let (beta0, beta) = least_concave_majorant(&samples).unwrap();
        let ts: Vec<f64> = samples.iter().map(|p| p.0).collect();
        for &(t, m) in &samples {
            prop_assert!(beta0.eval(t) >= m);
            prop_assert!((beta.eval(t) - beta0.eval(t) - t).abs() <= 1e-12 * (1.0 + t));
        }
        prop_assert!(concavity_defect(&beta0, &ts[1..]) <= 1e-9);
    }

    #[test]
    fn majorant_is_idempotent(samples in increasing_samples()) {
        let (beta0, _) = least_concave_majorant(&samples).unwrap();
        let again: Vec<(f64, f64)> = samples.iter().map(|&(t, _)| (t, beta0.eval(t))).collect();
        let (twice, _) = least_concave_majorant(&again).unwrap();
        for &(t, _) in &samples {
            prop_assert!((twice.eval(t) - beta0.eval(t)).abs() <= 1e-12 * (1.0 + beta0.eval(t)));
        }
    }

    #[test]
    fn holder_moduli_obey_the_laws(s in 0.05f64..=1.0, c in 0.01f64..100.0) {
        let alpha = holder(s).unwrap();
        let grid = default_x_grid::<f64>();
        prop_assert!(check_modulus_laws(&alpha, c, &grid).pass);
        prop_assert!(concavity_defect(&alpha, &grid) <= 1e-12);
    }

    #[test]
    fn omega_z_moduli_obey_the_laws(sigma in 0.05f64..0.95, tau in -1.0f64..1.0, c in 0.05f64..20.0) {
        // The local exponent is σ + τ/ln ln(1/x), about σ + τ/3.3 near
        // x = 1e-12. Outside (0, 1) there is no concave piece to cut at.
        let local = sigma + tau / 3.3;
        prop_assume!(local > 0.02 && local < 0.98);
        let alpha = omega_z(sigma, tau).unwrap();
        let grid = default_x_grid::<f64>();
        prop_assert!(concavity_defect(&alpha, &grid) <= 1e-12);
        prop_assert!(check_modulus_laws(&alpha, c, &grid).pass);
    }
}

#[test]
fn oscillation_modulus_of_a_line_is_linear() {
    let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let fs: Vec<f64> = xs.iter().map(|x| 3.0 * x).collect();
    for (t, m) in oscillation_modulus(&xs, &fs).unwrap() {
        assert!((m - 3.0 * t).abs() < 1e-12, "t = {t}, m = {m}");
    }
}

#[test]
fn parses_specs_and_rejects_bad_ones() {
    assert_eq!(parse_modulus("holder:0.5").unwrap(), holder(0.5).unwrap());
    assert_eq!(parse_modulus("omegaz:0.5,0.3").unwrap(), omega_z(0.5, 0.3).unwrap());
    assert!(parse_modulus("holder").is_err());
    assert!(parse_modulus("holder:1.5").is_err());
    assert!(omega_z(0.0, -1.0).is_err());
    assert!(omega_z(0.05, -0.75).is_err(), "increasing towards 0 in double range");
    assert!(omega_z(0.93, 0.84).is_err(), "convex throughout double range");
}
