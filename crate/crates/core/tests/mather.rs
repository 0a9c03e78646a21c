use mather_core::diffeo::{sample, BumpMap, SampleSpec, WiggleMap};
use mather_core::flow::make_rho;
use mather_core::mather::{
    discrete_isotopy, disjoint_sup_check, gamma_norm_check, gamma_roll, kal_map, lambda_limit, lambda_word,
    omega_spread, psi_reduce, window_centre, MatherConfig,
};
use mather_core::modulus::holder;
use mather_core::{Diffeo1, Map1, Tolerances};
use proptest::prelude::*;

fn bump(amp: f64, c: f64, r: f64, k: usize) -> Diffeo1 {
    let map = BumpMap { amp, scale: 1.0, c, r };
    sample(SampleSpec::compact(c - r, c + r, k, 65), &map, &Tolerances::default()).unwrap()
}

fn wiggle(eps: f64, modes: usize, flip: bool, k: usize) -> Diffeo1 {
    let phase = if flip { std::f64::consts::PI } else { 0.0 };
    let map = WiggleMap { eps, modes, phase };
    sample(SampleSpec::periodic(0.0, k, 33), &map, &Tolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn isotopy_steps_multiply_back_to_the_map(
        eps in 0.001f64..0.01, modes in 1usize..=3, flip: bool, b in 2usize..=5,
    ) {
        let tol = Tolerances::default();
        let h = wiggle(eps, modes, flip, 2);
        let steps: Vec<Diffeo1> = (1..=b).map(|i| discrete_isotopy(&h, b, i, &tol).unwrap()).collect();
        for j in 0..=50 {
            let x = -1.0 + j as f64 / 25.0;
            let y = steps.iter().fold(x, |y, s| s.value(y));
            prop_assert!((y - h.value(x)).abs() <= 1e-8, "x = {x}: {y} vs {}", h.value(x));
        }
    }

    #[test]
    fn spreading_stays_in_its_windows(slope in 1e-4f64..1e-3, modes in 1usize..=2, flip: bool, b in 1usize..=3) {
        // ‖g′ − 1‖ = 2π·modes·eps must stay below ε₀ ≈ 1.15e-3.
        let tol = Tolerances::default();
        let g = wiggle(slope / (std::f64::consts::TAU * modes as f64), modes, flip, 1);
        let spread = omega_spread(&g, b, 0.0099, &tol).unwrap();
        let bound = 2.0 * b as f64;
        if let Some((lo, hi)) = spread.support_interval(0.0) {
            let cell = spread.grid.h();
            prop_assert!(lo >= -bound - cell && hi <= bound + cell, "support [{lo}, {hi}]");
        }
        // The factors sit in disjoint windows centred at −2B − 2 + 4i.
        for i in 1..=b {
            let c = window_centre(b, i);
            prop_assert!(c - 2.0 >= -bound - 1e-12 && c + 2.0 <= bound + 1e-12);
        }
    }

    #[test]
    fn rolling_up_ignores_integer_translation(amp in 0.001f64..0.02, c in -0.5f64..0.5, n in -3i32..=3) {
        let tol = Tolerances::default();
        let g = bump(amp, c, 0.8, 2);
        let shifted = g.translate_conjugate(n as f64);
        let (a, b) = (gamma_roll(&g, &tol).unwrap(), gamma_roll(&shifted, &tol).unwrap());
        for j in 0..=40 {
            let x = j as f64 / 40.0;
            prop_assert!((a.value(x) - b.value(x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn lambda_intertwines_the_two_words(a1 in 0.005f64..0.05, a2 in 0.005f64..0.05, c in -0.8f64..0.8) {
        // Λ∘(T∘u) = (T∘v)∘Λ, T the unit translation.
        let tol = Tolerances::default();
        let field = make_rho(1).unwrap();
        let u = bump(a1, c, 1.0, 2);
        let v = bump(a2, -c, 0.9, 2);
        for j in 0..=60 {
            let x = -5.0 + j as f64 / 6.0;
            let lhs = lambda_word(&u, &v, &field, u.value(x) + 1.0, 0, &tol).unwrap().d[0];
            let rhs = v.value(lambda_word(&u, &v, &field, x, 0, &tol).unwrap().d[0]) + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-9, "x = {x}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn lambda_of_a_pair_with_itself_is_the_identity() {
    let tol = Tolerances::default();
    let field = make_rho(1).unwrap();
    let u = bump(0.03, 0.2, 1.0, 2);
    let lam = lambda_limit(&u, &u, &field, &tol).unwrap();
    assert!(lam.node_sup(0) < 1e-12, "{}", lam.node_sup(0));
}

#[test]
fn lambda_is_the_identity_left_of_the_plateau_and_periodic_right_of_it() {
    let tol = Tolerances::default();
    let field = make_rho(1).unwrap();
    let u = bump(0.02, 0.0, 1.0, 2);
    let v = bump(0.04, 0.3, 1.0, 2);
    let lam = lambda_limit(&u, &v, &field, &tol).unwrap();
    for j in 0..20 {
        let x = -6.0 + j as f64 * 0.2;
        assert!((lam.value(x) - x).abs() < 1e-12);
        let y = 2.6 + j as f64 * 0.05;
        assert!((lam.value(y + 1.0) - lam.value(y) - 1.0).abs() < 1e-9, "y = {y}");
    }
}

#[test]
fn blend_composition_interpolates_between_u_and_the_identity() {
    let tol = Tolerances::default();
    let u = wiggle(0.01, 2, false, 2);
    let at_zero = kal_map(&u, 0.0, &tol).unwrap();
    let at_one = kal_map(&u, 1.0, &tol).unwrap();
    for j in 0..=40 {
        let x = j as f64 / 40.0;
        assert!((at_zero.value(x) - u.value(x)).abs() < 1e-9);
        assert!((at_one.value(x) - x).abs() < 1e-9);
    }
    assert!(kal_map(&u, 1.5, &tol).is_err());
}

#[test]
fn norm_bounds_hold_for_small_maps() {
    let tol = Tolerances::default();
    let alpha = holder(0.5).unwrap();
    for (amp, c) in [(5e-6, 0.0), (3e-6, 0.4), (6e-6, -0.3)] {
        let f = bump(amp, c, 1.0, 2);
        let check = gamma_norm_check(&f, 2, &alpha, 1e-3, &tol).unwrap();
        assert!(check.holds, "{check:?}");
    }
    let factors: Vec<Diffeo1> = [-3.0, 0.0, 3.0]
        .iter()
        .enumerate()
        .map(|(i, &c)| bump(1e-4 * (i + 1) as f64, c, 1.0, 2))
        .collect();
    let check = disjoint_sup_check(&factors, (-4.5, 4.5), 2, &alpha, &tol).unwrap();
    assert!(check.holds, "{check:?}");
}

#[test]
fn psi_refuses_maps_outside_e_or_the_ball() {
    let tol = Tolerances::default();
    let cfg = MatherConfig::new(2, holder(0.5).unwrap(), 1).unwrap();
    let outside = bump(1e-6, 1.5, 1.0, 2);
    assert!(psi_reduce(&outside, &cfg, &tol).unwrap_err().is_refusal());
    let large = bump(0.05, 0.0, 1.0, 2);
    assert!(psi_reduce(&large, &cfg, &tol).unwrap_err().is_refusal());
}
