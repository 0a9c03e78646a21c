use mather_core::diffeo::{sample, BumpMap, SampleSpec};
use mather_core::mather::MatherConfig;
use mather_core::modulus::holder;
use mather_core::perfect::{conjugate_by_q, fixed_point_search, make_q, verify_certificate, CertificateChain};
use mather_core::suite::fixed_point_preset;
use mather_core::{Diffeo1, Map1, Tolerances};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn q_conjugation_is_the_closed_form_rescaling(amp in 0.005f64..0.05, c in -1.0f64..1.0, a in 2u32..=4) {
        // With D = [−2, 2] and E = [−2A, 2A], Q is x ↦ A·x on a neighbourhood
        // of D, so Q h Q⁻¹ (x) = A·h(x/A).
        let tol = Tolerances::default();
        let cfg = MatherConfig::new(2, holder(0.5).unwrap(), a).unwrap();
        let map = BumpMap { amp, scale: 1.0, c, r: 0.9 };
        let h = sample(SampleSpec::compact(c - 0.9, c + 0.9, 2, 65), &map, &tol).unwrap();
        let q = make_q(cfg.d, cfg.e, 2, &tol).unwrap();
        let g = conjugate_by_q(&h, &q, &cfg, &tol).unwrap();
        let s = a as f64;
        for j in 0..=80 {
            let x = cfg.e.0 + (cfg.e.1 - cfg.e.0) * j as f64 / 80.0;
            let want = s * map.value(x / s);
            prop_assert!((g.value(x) - want).abs() <= 1e-8, "x = {x}: {} vs {want}", g.value(x));
        }
    }
}

#[test]
fn q_is_identity_far_out_and_monotone() {
    let tol = Tolerances::default();
    let q = make_q((-2.0, 2.0), (-6.0, 6.0), 2, &tol).unwrap();
    // The blend back to the identity ends at 4·max(|D|, |E|) = 48.
    for x in [-60.0, -48.5, 48.5, 70.0] {
        assert_eq!(q.value(x), x);
    }
    assert!(q.jets.iter().all(|j| 1.0 + j[1] > 0.0));
    assert!(make_q((0.0, 0.0), (-1.0, 1.0), 2, &tol).is_err());
}

fn rebuilt(f: &Diffeo1, edit: impl Fn(&mut Vec<Vec<f64>>)) -> Diffeo1 {
    let mut jets = f.jets.clone();
    edit(&mut jets);
    Diffeo1::from_parts(f.class, f.grid, f.k, jets, &Tolerances::default()).unwrap()
}

#[test]
fn certificate_replays_and_detects_tampering() {
    let tol = Tolerances::default();
    let cfg = MatherConfig::new(2, holder(0.5).unwrap(), 4).unwrap();
    let f = fixed_point_preset(&tol).unwrap();
    let result = fixed_point_search(&f, &cfg, &tol).unwrap();
    assert!(result.converged(), "trace {:?}", result.trace);
    let chain = result.chain.expect("converged searches carry a chain");

    let replayed = CertificateChain::from_json(&chain.to_json()).unwrap();
    assert_eq!(replayed, chain);
    let report = verify_certificate(&replayed, tol.certificate).unwrap();
    assert!(report.pass, "{report:?}");

    // A bump pushed into the middle of λ breaks the conjugacy identity.
    let mut bad = chain.clone();
    let mid = bad.conjugacy.lambda.jets.len() / 2;
    bad.conjugacy.lambda = rebuilt(&bad.conjugacy.lambda, |j| j[mid][0] += 1e-4);
    let report = verify_certificate(&bad, tol.certificate).unwrap();
    let conj = report.checks.iter().find(|c| c.name == "conjugacy").unwrap();
    assert!(!conj.pass && !report.pass, "{conj:?}");

    // Understating a stored residual is caught even when the truth is small.
    let mut bad = chain.clone();
    bad.q_residual = 0.0;
    bad.conjugacy.residual /= 1e3;
    let report = verify_certificate(&bad, tol.certificate).unwrap();
    assert!(!report.pass);

    // A different f no longer satisfies g = Q(f u₀)Q⁻¹.
    let mut bad = chain;
    let mid = bad.f.jets.len() / 2;
    bad.f = rebuilt(&bad.f, |j| j[mid][0] *= 1.5);
    let report = verify_certificate(&bad, tol.certificate).unwrap();
    let q = report.checks.iter().find(|c| c.name == "q_conjugation").unwrap();
    assert!(!q.pass, "{q:?}");
}

#[test]
fn mismatched_chain_is_malformed() {
    let tol = Tolerances::default();
    let cfg = MatherConfig::new(2, holder(0.5).unwrap(), 1).unwrap();
    let f = Diffeo1::identity(mather_core::TailClass::Compact, -2.0, 2.0, 9, 2);
    let mut chain = fixed_point_search(&f, &cfg, &tol).unwrap().chain.unwrap();
    assert!(verify_certificate(&chain, tol.certificate).unwrap().pass);
    chain.field.a = 3;
    assert!(verify_certificate(&chain, tol.certificate).is_err());
}
