use mather_core::flow::{make_rho, trajectory_chart, verify_chart_conjugation, TimeMap};
use mather_core::Tolerances;
use proptest::prelude::*;

fn points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn time_maps_form_a_one_parameter_group(s in -1.5f64..1.5, t in -1.5f64..1.5, a in 1u32..=2) {
        let tol = Tolerances::default();
        let field = make_rho(a).unwrap();
        let (ts, tt, tst) = (TimeMap::new(field, s, &tol), TimeMap::new(field, t, &tol), TimeMap::new(field, s + t, &tol));
        let edge = field.support().1;
        for x in points(-edge - 0.5, edge + 0.5, 60) {
            let lhs = ts.try_jet(tt.try_jet(x, 0).unwrap().d[0], 0).unwrap().d[0];
            let rhs = tst.try_jet(x, 0).unwrap().d[0];
            prop_assert!((lhs - rhs).abs() <= 1e-8, "x = {x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn first_order_flow_obeys_the_variational_identity(t in -1.5f64..1.5, x in -3.0f64..3.0) {
        // d/dx τ_t(x) = ρ(τ_t(x)) / ρ(x) wherever ρ(x) > 0.
        let tol = Tolerances::default();
        let field = make_rho(1).unwrap();
        let j = TimeMap::new(field, t, &tol).try_jet(x, 1).unwrap();
        let rx = field.value(x);
        prop_assume!(rx > 1e-6);
        let want = field.value(j.d[0]) / rx;
        prop_assert!((j.d[1] - want).abs() <= 1e-7 * (1.0 + want), "{} vs {want}", j.d[1]);
    }
}

#[test]
fn time_map_translates_on_the_plateau_and_fixes_the_outside() {
    let tol = Tolerances::default();
    let field = make_rho(2).unwrap();
    let tau = TimeMap::new(field, 0.75, &tol);
    for x in points(-4.0, 3.0, 28) {
        assert!((tau.try_jet(x, 0).unwrap().d[0] - (x + 0.75)).abs() < 1e-12, "x = {x}");
    }
    for x in [-7.0, -5.0, 5.0, 6.5] {
        assert_eq!(tau.try_jet(x, 2).unwrap().d, vec![x, 1.0, 0.0]);
    }
}

#[test]
fn chart_conjugates_translation_to_the_flow() {
    let tol = Tolerances::default();
    let field = make_rho(1).unwrap();
    for b in [-1.0, 0.4, 1.0] {
        let res = verify_chart_conjugation(&field, b, &points(-2.95, 2.95, 80), &tol).unwrap();
        assert!(res < 1e-8, "b = {b}: {res:e}");
    }
    let chart = trajectory_chart(&field, &tol);
    let mut prev = f64::NEG_INFINITY;
    for x in points(-2.9, 2.9, 40) {
        let y = chart.try_inverse(x).unwrap();
        assert!(y > prev);
        assert!((chart.try_value(y).unwrap() - x).abs() < 1e-9);
        prev = y;
    }
}

#[test]
fn zero_plateau_is_rejected() {
    assert!(make_rho(0).is_err());
}
