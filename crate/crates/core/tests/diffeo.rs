use mather_core::diffeo::{
    compose, from_preset, inverse, sample, sample_with_residual, BumpMap, SampleSpec, WiggleMap,
};
use mather_core::{Diffeo1, Map1, TailClass, Tolerances};
use proptest::prelude::*;
use serde_json::json;

fn sampled_bump(amp: f64, c: f64, r: f64, k: usize) -> (BumpMap, Diffeo1) {
    let map = BumpMap { amp, scale: 1.0, c, r };
    let f = sample(SampleSpec::compact(c - r, c + r, k, 33), &map, &Tolerances::default()).unwrap();
    (map, f)
}

fn probes(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..=97).map(move |i| lo + (hi - lo) * i as f64 / 97.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_map_tracks_its_source(amp in 0.01f64..0.2, c in -1.0f64..1.0, r in 0.4f64..1.5, k in 1usize..=3) {
        let map = BumpMap { amp, scale: 1.0, c, r };
        let spec = SampleSpec::compact(c - r, c + r, k, 33);
        let (f, res) = sample_with_residual(spec, &map, &Tolerances::default()).unwrap();
        // Rounding floors scale with the displacement: measured about
        // 6e-7·amp at k ≤ 2 and 4e-4·amp at k = 3 for the narrowest radius.
        let floor = amp * if k <= 2 { 2e-6 } else { 1e-3 };
        prop_assert!(res <= floor, "residual {res:e} with {} nodes", f.grid.n);
        for x in probes(c - r - 0.5, c + r + 0.5) {
            let exact = map.jet(x, k);
            let got = f.evaluate(x, k);
            for m in 0..=k {
                let err = (exact.d[m] - got.d[m]).abs();
                prop_assert!(err <= 10.0 * res.max(1e-9) * (1.0 + exact.d[m].abs()), "x = {x}, m = {m}, err {err:e}");
            }
        }
    }

    #[test]
    fn inverse_undoes_the_map(amp in 0.01f64..0.2, c in -1.0f64..1.0, r in 0.4f64..1.5) {
        let tol = Tolerances::default();
        let (_, f) = sampled_bump(amp, c, r, 2);
        let g = inverse(&f, &tol).unwrap();
        for x in probes(c - r - 0.5, c + r + 0.5) {
            prop_assert!((g.value(f.value(x)) - x).abs() <= 1e-8);
            prop_assert!((f.value(g.value(x)) - x).abs() <= 1e-8);
        }
    }

    #[test]
    fn composition_matches_pointwise(a1 in 0.01f64..0.2, a2 in 0.01f64..0.2, c in -0.5f64..0.5) {
        let tol = Tolerances::default();
        let (_, f) = sampled_bump(a1, c, 1.0, 2);
        let (_, g) = sampled_bump(a2, -c, 0.8, 2);
        let fg = compose(&f, &g, &tol).unwrap();
        for x in probes(-2.0, 2.0) {
            prop_assert!((fg.value(x) - f.value(g.value(x))).abs() <= 1e-8);
        }
    }

    #[test]
    fn json_round_trip_is_exact(amp in 0.01f64..0.2, c in -1.0f64..1.0, k in 1usize..=4) {
        let (_, f) = sampled_bump(amp, c, 1.0, k);
        let back = Diffeo1::from_json(&f.to_json(), &Tolerances::default()).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn periodic_maps_commute_with_unit_translation() {
    let map = WiggleMap { eps: 0.02, modes: 3, phase: 0.4 };
    let f = sample(SampleSpec::periodic(0.0, 2, 33), &map, &Tolerances::default()).unwrap();
    assert_eq!(f.class, TailClass::Periodic);
    for x in probes(-3.0, 3.0) {
        assert!((f.value(x + 1.0) - f.value(x) - 1.0).abs() < 1e-12);
        assert!((f.value(x) - map.value(x)).abs() < 1e-7, "x = {x}");
    }
}

#[test]
fn presets_build_and_reject_bad_parameters() {
    let tol = Tolerances::default();
    let f = from_preset("scaled_family", &json!({"A": 2.0, "eps": 0.01}), &tol).unwrap();
    assert_eq!(f.support_interval(0.0).map(|(a, b)| (a >= -2.0, b <= 2.0)), Some((true, true)));
    assert!(from_preset("scaled_family", &json!({"A": 0.0, "eps": 0.01}), &tol).is_err());
    assert!(from_preset("no_such_preset", &json!({}), &tol).is_err());
    let text = r#"{"preset": "periodic_wiggle", "params": {"eps": 0.01}}"#;
    assert_eq!(Diffeo1::from_json(text, &tol).unwrap().class, TailClass::Periodic);
}

#[test]
fn non_monotone_input_is_rejected() {
    let text = json!({
        "class": "compact",
        "grid": {"a": 0.0, "b": 1.0, "n": 3},
        "k": 1,
        "jets": [[0.0, 0.0], [0.0, -2.0], [0.0, 0.0]]
    })
    .to_string();
    assert!(Diffeo1::from_json(&text, &Tolerances::default()).is_err());
}
