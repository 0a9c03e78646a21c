//! Splitting a compactly supported diffeomorphism into factors supported in
//! the elements of an open cover.

use serde::{Deserialize, Serialize};

use super::{sample, Diffeo1, SampleSpec, TailClass};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::jetcalc::Jet;
use crate::map::{Composite, FnMap, Inverse, Map1};
use crate::series::Series;

/// Open intervals `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub elements: Vec<(f64, f64)>,
}

impl Cover {
    pub fn new(elements: Vec<(f64, f64)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("empty cover".into()));
        }
        if let Some((lo, hi)) = elements.iter().find(|(lo, hi)| !(hi > lo)) {
            return Err(Error::InvalidParameter(format!("empty cover element ({lo}, {hi})")));
        }
        Ok(Cover { elements })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.elements.iter().any(|&(lo, hi)| x > lo && x < hi)
    }

    fn hull(&self) -> (f64, f64) {
        let lo = self.elements.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let hi = self.elements.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Partition of unity `φ_i = b_i / Σ_j b_j` with `b_i` the exponential bump
/// of the `i`-th cover element. The quotient is formed from differences of
/// logarithms so that it stays accurate where the bumps underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub cover: Cover,
}

impl Partition {
    /// Series of `log b_i` at `x`, or `None` outside the element.
    fn log_bump(&self, i: usize, x: f64, order: usize) -> Option<Series<f64>> {
        let (lo, hi) = self.cover.elements[i];
        if !(x > lo && x < hi) {
            return None;
        }
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let t = Series::variable(x, order).add_const(-c).scale(1.0 / r);
        let one_minus = (-&(&t * &t)).add_const(1.0);
        Some((-&one_minus.recip()).add_const(1.0))
    }

    /// Series of every `φ_i` at `x`; all zero outside the union. With `m`
    /// the element whose log-bump is largest at `x`,
    /// `φ_i = exp(l_i − l_m) / Σ_j exp(l_j − l_m)`, so every exponential has a
    /// non-positive constant term and the jets cannot overflow near an edge.
    pub fn series(&self, x: f64, order: usize) -> Vec<Series<f64>> {
        let logs: Vec<Option<Series<f64>>> =
            (0..self.cover.elements.len()).map(|i| self.log_bump(i, x, order)).collect();
        let Some(top) = logs.iter().flatten().max_by(|a, b| a.value().total_cmp(&b.value())).cloned() else {
            return vec![Series::constant(0.0, order); logs.len()];
        };
        let mut denom = Series::constant(0.0, order);
        for lj in logs.iter().flatten() {
            denom = &denom + &(lj - &top).exp();
        }
        let inv = denom.recip();
        logs.iter()
            .map(|li| match li {
                // b_i/b_m below e^{-700}: φ_i and its jets vanish to working precision.
                Some(li) if li.value() - top.value() > -700.0 => &(li - &top).exp() * &inv,
                _ => Series::constant(0.0, order),
            })
            .collect()
    }

    /// `K = 2 + Σ_i sup|φ_i′|`, the sup taken on `samples` points per unit
    /// length across the hull of the cover.
    pub fn lipschitz_constant(&self, samples_per_unit: usize) -> f64 {
        let (lo, hi) = self.cover.hull();
        let n = ((hi - lo) * samples_per_unit as f64).ceil() as usize + 1;
        let mut sups = vec![0.0f64; self.cover.elements.len()];
        for s in 0..n {
            let x = lo + (hi - lo) * s as f64 / (n - 1) as f64;
            for (sup, phi) in sups.iter_mut().zip(self.series(x, 1)) {
                *sup = sup.max(phi.c[1].abs());
            }
        }
        2.0 + sups.iter().sum::<f64>()
    }
}

pub fn partition_of_unity(cover: &Cover) -> Partition {
    Partition { cover: cover.clone() }
}

/// The partial sums `g_j = Id + Σ_{i≤j} φ_i·(g − Id)` as lazy maps.
struct PartialSum<'a> {
    g: &'a Diffeo1,
    partition: &'a Partition,
    upto: usize,
    bound: f64,
}

impl Map1 for PartialSum<'_> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let u = Series::from_jet(&Jet::new(x, self.g.displacement(x, order)));
        let phis = self.partition.series(x, order);
        let mut s = Series::variable(x, order);
        for phi in phis.iter().take(self.upto) {
            s = &s + &(phi * &u);
        }
        s.to_jet(x)
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.bound)
    }
}

/// Outcome of [`fragment`] together with the quantities its precondition
/// was checked against.
#[derive(Debug, Clone)]
pub struct Fragmentation {
    pub fragments: Vec<Diffeo1>,
    pub lipschitz_constant: f64,
    pub epsilon: f64,
    pub reconstruction_error: f64,
}

/// Factors `g = F_1 ∘ F_2 ∘ … ∘ F_m` with `F_j = g_{j−1}⁻¹ ∘ g_j` supported in
/// the `j`-th cover element. Refuses when `max(‖g − Id‖₀, ‖g′ − 1‖₀)` is not
/// below `1/(2K)`, or when the product misses `g` by more than
/// `reconstruction_tol` in `C⁰`.
pub fn fragment(
    g: &Diffeo1,
    cover: &Cover,
    reconstruction_tol: f64,
    tol: &Tolerances,
) -> Result<Fragmentation> {
    if g.class != TailClass::Compact {
        return Err(Error::InvalidParameter("fragmentation needs a compactly supported map".into()));
    }
    if g.k < 1 {
        return Err(Error::InvalidParameter("fragmentation needs k ≥ 1".into()));
    }
    for (i, j) in g.jets.iter().enumerate() {
        if j.iter().any(|v| *v != 0.0) && !cover.contains(g.grid.node(i)) {
            return Err(Error::precondition(
                "fragment",
                format!("cover misses the support point x = {}", g.grid.node(i)),
            ));
        }
    }
    let partition = partition_of_unity(cover);
    let k_const = partition.lipschitz_constant(4096);
    let eps = g.node_sup(0).max(g.node_sup(1));
    if !(eps < 1.0 / (2.0 * k_const)) {
        return Err(Error::precondition(
            "fragment",
            format!("‖g − Id‖ = {eps:.3e} is not below 1/(2K) with measured K = {k_const:.6}"),
        ));
    }
    let bound = g.node_sup(0) * 1.1 + 1e-12;
    let partials: Vec<PartialSum> = (0..=cover.elements.len())
        .map(|upto| PartialSum { g, partition: &partition, upto, bound })
        .collect();
    let (ga, gb) = (g.grid.a, g.grid.b);
    let density = g.grid.density();
    let mut fragments = Vec::with_capacity(cover.elements.len());
    for (j, &(lo, hi)) in cover.elements.iter().enumerate() {
        let a = lo.max(ga);
        let b = hi.min(gb);
        if !(b > a) {
            fragments.push(Diffeo1::identity(TailClass::Compact, lo, hi, 2, g.k));
            continue;
        }
        let prev_inv = Inverse::new(&partials[j], tol.root_abscissa);
        let frag_map = FnMap::with_bound(
            |x: f64, order| Composite::new(vec![&prev_inv, &partials[j + 1]]).jet(x, order),
            2.0 * bound,
        );
        let n = (((b - a) * density).ceil() as usize + 1).max(9);
        fragments.push(sample(SampleSpec::compact(a, b, g.k, n), &frag_map, tol)?);
    }
    let refs: Vec<&dyn Map1> = fragments.iter().map(|f| f as &dyn Map1).collect();
    let product = Composite::new(refs);
    let checks = 8 * g.grid.n;
    let reconstruction_error = (0..=checks)
        .map(|s| {
            let x = ga + (gb - ga) * s as f64 / checks as f64;
            (product.value(x) - g.value(x)).abs()
        })
        .fold(0.0, f64::max);
    if reconstruction_error > reconstruction_tol {
        return Err(Error::Construction(format!(
            "fragment product misses g by {reconstruction_error:.3e}"
        )));
    }
    Ok(Fragmentation { fragments, lipschitz_constant: k_const, epsilon: eps, reconstruction_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::from_preset;
    use serde_json::json;

    #[test]
    fn partition_sums_to_one_on_union() {
        let p = partition_of_unity(&Cover::new(vec![(-1.0, 1.2), (0.8, 3.0)]).unwrap());
        for x in [-0.99, 0.0, 0.9, 1.0, 1.19, 2.5, 2.999] {
            let s: f64 = p.series(x, 0).iter().map(|s| s.value()).sum();
            assert!((s - 1.0).abs() < 1e-14, "{x}: {s}");
        }
        assert!(p.series(3.5, 0).iter().all(|s| s.value() == 0.0));
    }

    #[test]
    fn two_element_cover_reconstructs() {
        let tol = Tolerances::default();
        let g = from_preset("smooth_bump_displacement", &json!({"eps": 0.01, "c": 1.0, "r": 1.0}), &tol).unwrap();
        let cover = Cover::new(vec![(-1.0, 1.2), (0.8, 3.0)]).unwrap();
        let out = fragment(&g, &cover, 1e-8, &tol).unwrap();
        assert_eq!(out.fragments.len(), 2);
        for (f, (lo, hi)) in out.fragments.iter().zip(&cover.elements) {
            let (a, b) = f.support_interval(0.0).unwrap();
            assert!(a >= *lo && b <= *hi);
        }
    }

    #[test]
    fn single_element_gives_g_back() {
        let tol = Tolerances::default();
        let g = from_preset("smooth_bump_displacement", &json!({"eps": 0.01, "c": 1.0, "r": 1.0}), &tol).unwrap();
        let cover = Cover::new(vec![(-1.0, 3.0)]).unwrap();
        let out = fragment(&g, &cover, 1e-8, &tol).unwrap();
        for i in 0..=100 {
            let x = 2.0 * i as f64 / 100.0;
            assert!((out.fragments[0].value(x) - g.value(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn large_displacement_is_refused_with_constant() {
        let tol = Tolerances::default();
        let g = from_preset("smooth_bump_displacement", &json!({"eps": 0.3, "c": 1.0, "r": 1.0}), &tol).unwrap();
        let cover = Cover::new(vec![(-1.0, 1.2), (0.8, 3.0)]).unwrap();
        let err = fragment(&g, &cover, 1e-8, &tol).unwrap_err();
        assert!(err.to_string().contains("K ="), "{err}");
    }
}
