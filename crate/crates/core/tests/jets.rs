use mather_core::jetcalc::{build_table, compose_jets, invert_jet, Jet};
use proptest::prelude::*;

fn jet_strategy() -> impl Strategy<Value = (usize, f64, f64, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|k| {
        (
            Just(k),
            -2.0f64..2.0,
            0.5f64..2.0,
            prop::collection::vec(-1.0f64..1.0, k + 1),
        )
    })
}

fn make(base: f64, value: f64, slope: f64, rest: &[f64], k: usize) -> Jet<f64> {
    let mut d = vec![value, slope];
    d.extend_from_slice(&rest[..k - 1]);
    Jet::new(base, d)
}

fn close(a: &Jet<f64>, b: &Jet<f64>, rel: f64) -> bool {
    a.d.iter().zip(&b.d).all(|(x, y)| (x - y).abs() <= rel * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #[test]
    fn inverse_round_trips((k, x, slope, rest) in jet_strategy()) {
        let f = make(x, rest[k], slope, &rest, k);
        let inv = invert_jet(&f).unwrap();
        prop_assert_eq!(inv.base, f.d[0]);
        let left = compose_jets(&inv, &f).unwrap();
        let right = compose_jets(&f, &inv).unwrap();
        prop_assert!(close(&left, &Jet::identity(x, k), 1e-10), "{:?}", left);
        prop_assert!(close(&right, &Jet::identity(f.d[0], k), 1e-10), "{:?}", right);
    }

    #[test]
    fn composition_is_associative(
        (k, x, s1, r1) in jet_strategy(),
        s2 in 0.5f64..2.0,
        s3 in 0.5f64..2.0,
        r2 in prop::collection::vec(-1.0f64..1.0, 7),
        r3 in prop::collection::vec(-1.0f64..1.0, 7),
    ) {
        let h = make(x, r1[k], s1, &r1, k);
        let g = make(h.d[0], r2[6], s2, &r2, k);
        let f = make(g.d[0], r3[6], s3, &r3, k);
        let a = compose_jets(&compose_jets(&f, &g).unwrap(), &h).unwrap();
        let b = compose_jets(&f, &compose_jets(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&a, &b, 1e-11));
    }

    #[test]
    fn first_order_part_is_the_chain_rule(
        (k, x, s1, r1) in jet_strategy(),
        s2 in 0.5f64..2.0,
        r2 in prop::collection::vec(-1.0f64..1.0, 7),
    ) {
        let g = make(x, r1[k], s1, &r1, k);
        let f = make(g.d[0], r2[6], s2, &r2, k);
        let fg = compose_jets(&f, &g).unwrap();
        prop_assert_eq!(fg.d[0], f.d[0]);
        prop_assert!((fg.d[1] - s1 * s2).abs() <= 1e-14 * (s1 * s2));
    }
}

#[test]
fn mismatched_bases_are_rejected() {
    let f = Jet::new(0.0, vec![1.0, 1.0]);
    let g = Jet::new(0.0, vec![2.0, 1.0]);
    assert!(compose_jets(&f, &g).is_err());
}

#[test]
fn table_coefficients_count_set_partitions() {
    // Order 4 by hand: 1 + 4 + 3 + 6 + 1 = 15 partitions of a 4-set.
    assert_eq!(build_table(4).unwrap().coefficient_sum(), 15);
    let bell = mather_core::suite::bell_numbers(8);
    for k in 1..=8 {
        assert_eq!(build_table(k).unwrap().coefficient_sum(), bell[k], "k = {k}");
    }
}
