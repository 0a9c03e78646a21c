//! Spreading a small periodic map into a compactly supported one: the blend
//! `ζ`, the operators `Ω₁` and `Ω_B`, and the discrete isotopy between the
//! identity and a periodic map.

use std::sync::OnceLock;

use crate::config::Tolerances;
use crate::diffeo::{sample, Diffeo1, SampleSpec, TailClass};
use crate::error::{Error, Result};
use crate::jetcalc::Jet;
use crate::map::{Composite, FnMap, Inverse, Map1};
use crate::modulus::ConcaveModulus;
use crate::norms::{self, Inequality};
use crate::series::Series;
use crate::smooth::smoothstep;

/// Window kept from `h₀` and from `h₁` when cutting them into compact maps.
pub const H0_WINDOW: (f64, f64) = (-1.5, -0.5);
pub const H1_WINDOW: (f64, f64) = (1.0, 2.0);

/// The 1-periodic blend: one on `[−1/10, 1/10] + ℤ`, zero on
/// `[4/10, 6/10] + ℤ`, a smoothstep in between.
pub fn zeta(x: f64, order: usize) -> Series<f64> {
    let y = x - x.round();
    let var = Series::variable(y, order);
    let t = if y >= 0.0 { (-&var).add_const(0.4) } else { var.add_const(0.4) };
    smoothstep(&t.scale(1.0 / 0.3))
}

/// `(‖ζ‖, ‖ζ′‖)` measured on a fine grid over one period.
pub fn zeta_norms() -> (f64, f64) {
    static NORMS: OnceLock<(f64, f64)> = OnceLock::new();
    *NORMS.get_or_init(|| {
        let n = 1 << 14;
        (0..=n).fold((0.0f64, 0.0f64), |(m0, m1), i| {
            let s = zeta(i as f64 / n as f64 - 0.5, 1);
            (m0.max(s.c[0].abs()), m1.max(s.c[1].abs()))
        })
    })
}

/// `min(requested, 1/(100(1 + ‖ζ‖ + ‖ζ′‖)))`.
pub fn effective_eps0(requested: f64) -> f64 {
    let (z0, z1) = zeta_norms();
    requested.min(1.0 / (100.0 * (1.0 + z0 + z1)))
}

/// `g` as a lazy map with displacement shifted so that `0` is fixed:
/// `h = T(−g(0))∘g`.
fn recentred(g: &Diffeo1) -> impl Map1 + '_ {
    let g0 = g.displacement(0.0, 0)[0];
    let bound = 2.0 * g.node_sup(0) + 1e-12;
    FnMap::with_bound(
        move |x: f64, order| {
            let mut d = g.displacement(x, order);
            d[0] += x - g0;
            if order >= 1 {
                d[1] += 1.0;
            }
            Jet::new(x, d)
        },
        bound,
    )
}

fn displacement_jet(map: &dyn Map1, x: f64, order: usize) -> Vec<f64> {
    let mut d = map.jet(x, order).d;
    d[0] -= x;
    if order >= 1 {
        d[1] -= 1.0;
    }
    d
}

fn check_fixed_window(name: &str, map: &dyn Map1, window: (f64, f64), k: usize, tol: &Tolerances) -> Result<()> {
    for x in [window.0, window.1] {
        let d = displacement_jet(map, x, k);
        let worst = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > tol.surgery {
            return Err(Error::precondition(
                "surgery",
                format!("{name} moves the window end {x} (jets up to {worst:.3e})"),
            ));
        }
    }
    Ok(())
}

fn require_periodic(g: &Diffeo1, stage: &str) -> Result<()> {
    if g.class != TailClass::Periodic {
        return Err(Error::InvalidParameter(format!("{stage} takes a periodic map")));
    }
    Ok(())
}

/// `Ω₁g = (h₁↾[1,2]) ∘ (h₀↾[−3/2,−1/2])` with `h = T(−g(0))g`,
/// `h₀ = ζh + (1−ζ)Id` and `h₁ = h∘h₀⁻¹`; supported in `[−2, 2]`.
pub fn omega1_spread(g: &Diffeo1, eps0: f64, tol: &Tolerances) -> Result<Diffeo1> {
    require_periodic(g, "Ω₁")?;
    let eps0 = effective_eps0(eps0);
    let slope = norms::sup_norm(g, 1, tol);
    if slope > eps0 {
        return Err(Error::precondition(
            "omega1",
            format!("‖g′ − 1‖ = {slope:.3e} exceeds ε₀ = {eps0:.3e}"),
        ));
    }
    let k = g.k;
    let h = recentred(g);
    let g0 = g.displacement(0.0, 0)[0];
    let h0 = FnMap::with_bound(
        |x: f64, order| {
            let mut u = g.displacement(x, order);
            u[0] -= g0;
            let s = &zeta(x, order) * &Series::from_jet(&Jet::new(x, u));
            let mut j = s.to_jet(x);
            j.d[0] += x;
            if order >= 1 {
                j.d[1] += 1.0;
            }
            j
        },
        2.0 * g.node_sup(0) + 1e-12,
    );
    let h0_inv = Inverse::new(&h0, tol.root_abscissa);
    let h1 = Composite::new(vec![&h, &h0_inv]);
    check_fixed_window("h₀", &h0, H0_WINDOW, k, tol)?;
    check_fixed_window("h₁", &h1, H1_WINDOW, k, tol)?;
    let spread = FnMap::with_bound(
        |x: f64, order| {
            if x > H0_WINDOW.0 && x < H0_WINDOW.1 {
                h0.jet(x, order)
            } else if x > H1_WINDOW.0 && x < H1_WINDOW.1 {
                h1.jet(x, order)
            } else {
                Jet::identity(x, order)
            }
        },
        2.0 * g.node_sup(0) + 1e-12,
    );
    let n = 4 * g.window_nodes().max(16) + 1;
    sample(SampleSpec::compact(-2.0, 2.0, k, n), &spread, tol)
}

/// `h_i = g_i ∘ g_{i−1}⁻¹` with `g_i = Id + (i/B)(h − Id)`, sampled on one
/// period.
pub fn discrete_isotopy(h: &Diffeo1, b: usize, i: usize, tol: &Tolerances) -> Result<Diffeo1> {
    require_periodic(h, "discrete isotopy")?;
    if b == 0 || i == 0 || i > b {
        return Err(Error::InvalidParameter(format!("need 1 ≤ i ≤ B, got i = {i}, B = {b}")));
    }
    let fixed = h.displacement(0.0, 0)[0];
    if fixed.abs() > 1e-10 {
        return Err(Error::precondition("discrete isotopy", format!("h(0) = {fixed:.3e} ≠ 0")));
    }
    let slope = norms::sup_norm(h, 1, tol);
    if !(slope < 1.0) {
        return Err(Error::precondition("discrete isotopy", format!("‖h′ − 1‖ = {slope} is not below 1")));
    }
    if b == 1 {
        return Ok(h.clone());
    }
    let bound = h.node_sup(0) + 1e-12;
    let step = |m: usize| {
        let t = m as f64 / b as f64;
        FnMap::with_bound(
            move |x: f64, order| {
                let mut d: Vec<f64> = h.displacement(x, order).iter().map(|v| t * v).collect();
                d[0] += x;
                if order >= 1 {
                    d[1] += 1.0;
                }
                Jet::new(x, d)
            },
            bound,
        )
    };
    let gi = step(i);
    let gprev = step(i - 1);
    let gprev_inv = Inverse::new(&gprev, tol.root_abscissa);
    let hi = Composite::new(vec![&gi, &gprev_inv]);
    sample(SampleSpec::periodic(h.grid.a, h.k, h.grid.n), &hi, tol)
}

/// Centre of the `i`-th window of `Ω_B`: `−2B − 2 + 4i`.
pub fn window_centre(b: usize, i: usize) -> f64 {
    -2.0 * b as f64 - 2.0 + 4.0 * i as f64
}

/// `Ω_B g = ∏_{i=B..1} T(c_i) ∘ Ω₁ DI_B^i(T(−g(0))g) ∘ T(−c_i)`, supported in
/// `[−2B, 2B]`. The factors have disjoint supports, so the product is
/// assembled window by window.
pub fn omega_spread(g: &Diffeo1, b: usize, eps0: f64, tol: &Tolerances) -> Result<Diffeo1> {
    require_periodic(g, "Ω_B")?;
    if b == 0 {
        return Err(Error::InvalidParameter("B must be at least 1".into()));
    }
    let g0 = g.displacement(0.0, 0)[0];
    let recentred_jets: Vec<Vec<f64>> = g
        .jets
        .iter()
        .map(|j| {
            let mut j = j.clone();
            j[0] -= g0;
            j
        })
        .collect();
    let h = Diffeo1::from_parts(TailClass::Periodic, g.grid, g.k, recentred_jets, tol)?;
    let factors: Vec<Diffeo1> = (1..=b)
        .map(|i| {
            let hi = discrete_isotopy(&h, b, i, tol)?;
            Ok(omega1_spread(&hi, eps0, tol)?.translate_conjugate(window_centre(b, i)))
        })
        .collect::<Result<_>>()?;
    if b == 1 {
        return Ok(factors.into_iter().next().expect("one factor"));
    }
    disjoint_product(&factors, (-2.0 * b as f64, 2.0 * b as f64), tol)
}

/// Product of compact maps with pairwise disjoint supports, sampled on `span`.
pub fn disjoint_product(factors: &[Diffeo1], span: (f64, f64), tol: &Tolerances) -> Result<Diffeo1> {
    let k = factors.iter().map(|f| f.k).min().unwrap_or(1);
    let cores: Vec<(f64, f64)> = factors.iter().map(|f| (f.grid.a, f.grid.b)).collect();
    let mut sorted = cores.clone();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    if sorted.windows(2).any(|w| w[1].0 < w[0].1 - 1e-12) {
        return Err(Error::InvalidParameter("factor cores overlap".into()));
    }
    let map = FnMap::new(|x: f64, order| {
        match cores.iter().position(|(a, b)| x > *a && x < *b) {
            Some(i) => factors[i].evaluate(x, order),
            None => Jet::identity(x, order),
        }
    });
    let density = factors.iter().map(|f| f.grid.density()).fold(1.0, f64::max);
    let n = ((span.1 - span.0) * density).ceil() as usize + 1;
    sample(SampleSpec::compact(span.0, span.1, k, n), &map, tol)
}

/// `‖g_B ⋯ g_1‖_{k,α} ≤ 2 max_j ‖g_j‖_{k,α}` for maps with disjoint supports.
pub fn disjoint_sup_check(
    factors: &[Diffeo1],
    span: (f64, f64),
    k: usize,
    alpha: &ConcaveModulus<f64>,
    tol: &Tolerances,
) -> Result<Inequality> {
    let product = disjoint_product(factors, span, tol)?;
    let lhs = norms::holder_norm(&product, k, alpha, tol);
    let rhs = 2.0 * factors.iter().map(|f| norms::holder_norm(f, k, alpha, tol)).fold(0.0, f64::max);
    Ok(Inequality::new("disjoint_sup", lhs, rhs, tol.estimator_slack))
}

/// `u ∘ (λu + (1−λ)Id)⁻¹` for a periodic `u` fixing `0`.
pub fn kal_map(u: &Diffeo1, lambda: f64, tol: &Tolerances) -> Result<Diffeo1> {
    require_periodic(u, "blend composition")?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("λ = {lambda} outside [0, 1]")));
    }
    let v = FnMap::with_bound(
        |x: f64, order| {
            let mut d: Vec<f64> = u.displacement(x, order).iter().map(|w| lambda * w).collect();
            d[0] += x;
            if order >= 1 {
                d[1] += 1.0;
            }
            Jet::new(x, d)
        },
        u.node_sup(0) + 1e-12,
    );
    let v_inv = Inverse::new(&v, tol.root_abscissa);
    let map = Composite::new(vec![u, &v_inv]);
    sample(SampleSpec::periodic(u.grid.a, u.k, u.grid.n), &map, tol)
}
