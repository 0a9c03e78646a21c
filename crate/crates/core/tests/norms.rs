use mather_core::diffeo::{sample, BumpMap, SampleSpec};
use mather_core::modulus::holder;
use mather_core::norms::{holder_norm, metric, sup_norm, MetricKind};
use mather_core::{Diffeo1, Map1, Tolerances};
use proptest::prelude::*;

fn bump(amp: f64, c: f64, r: f64) -> Diffeo1 {
    let map = BumpMap { amp, scale: 1.0, c, r };
    sample(SampleSpec::compact(c - r, c + r, 2, 33), &map, &Tolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sup_norm_matches_a_dense_scan(amp in -0.2f64..0.2, c in -1.0f64..1.0, r in 0.5f64..1.5) {
        let tol = Tolerances::default();
        let f = bump(amp, c, r);
        let map = BumpMap { amp, scale: 1.0, c, r };
        let scan = (0..=20000)
            .map(|i| c - r + 2.0 * r * i as f64 / 20000.0)
            .map(|x| (map.value(x) - x).abs())
            .fold(0.0, f64::max);
        let s = sup_norm(&f, 0, &tol);
        prop_assert!((s - scan).abs() <= 1e-6 * scan + 1e-12, "lattice {s}, scan {scan}");
    }

    #[test]
    fn lipschitz_seminorm_of_u_prime_is_sup_of_u_second(amp in 0.01f64..0.2, c in -1.0f64..1.0, r in 0.5f64..1.5) {
        // With α = Id the seminorm of u′ is its Lipschitz constant, max |u″|.
        let tol = Tolerances::default();
        let f = bump(amp, c, r);
        let lip = holder_norm(&f, 1, &holder(1.0).unwrap(), &tol);
        let second = sup_norm(&f, 2, &tol);
        prop_assert!(lip <= second * (1.0 + 1e-9));
        prop_assert!(lip >= second * (1.0 - 1e-3), "lip {lip}, sup u″ {second}");
    }

    #[test]
    fn metrics_vanish_on_the_diagonal_and_are_symmetric(a1 in 0.01f64..0.1, a2 in 0.01f64..0.1, c in -0.5f64..0.5) {
        let tol = Tolerances::default();
        let alpha = holder(0.5).unwrap();
        let f = bump(a1, c, 1.0);
        let g = bump(a2, -c, 0.8);
        for kind in [MetricKind::C0, MetricKind::Ck, MetricKind::CkAlpha] {
            prop_assert_eq!(metric(&f, &f, kind, Some(&alpha), &tol).unwrap(), 0.0);
            let fg = metric(&f, &g, kind, Some(&alpha), &tol).unwrap();
            let gf = metric(&g, &f, kind, Some(&alpha), &tol).unwrap();
            prop_assert!(fg > 0.0);
            prop_assert!((fg - gf).abs() <= 1e-12 * fg);
        }
    }
}

#[test]
fn c0_metric_dominates_the_plain_sup_distance() {
    let tol = Tolerances::default();
    let f = bump(0.1, 0.0, 1.0);
    let id = Diffeo1::identity(mather_core::TailClass::Compact, -1.0, 1.0, 9, 2);
    let d0 = metric(&f, &id, MetricKind::C0, None, &tol).unwrap();
    assert!(d0 >= sup_norm(&f, 0, &tol));
    assert!(metric(&f, &id, MetricKind::CkAlpha, None, &tol).is_err());
}
