//! The intertwiner `Λ = lim (Tv)^s (Tu)^{−s}` and its compactly supported
//! correction `λ`, which conjugates `τu` to `τv`.

use serde::{Deserialize, Serialize};

use super::gamma::gamma_roll;
use crate::config::Tolerances;
use crate::diffeo::{inverse, sample, Diffeo1, SampleSpec, TailClass};
use crate::error::{Error, Result};
use crate::flow::{time_t_map, trajectory_chart, Chart, PlateauField, TimeMap};
use crate::jetcalc::{compose_unchecked, invert_jet, Jet};
use crate::map::{solve_increasing, FnMap, Inverse, Map1};

/// `(Tv)^s (Tu)^{−s}(x)` with `s` the least word length taking
/// `(Tu)^{−s}(x)` to `−2A` or below.
pub fn lambda_word(
    u: &Diffeo1,
    v: &Diffeo1,
    field: &PlateauField,
    x: f64,
    order: usize,
    tol: &Tolerances,
) -> Result<Jet<f64>> {
    let floor = field.plateau().0;
    let radius = u.node_sup(0) * 1.1 + 1e-12;
    let mut jet = Jet::identity(x, order);
    let mut y = x;
    let mut steps = 0usize;
    while y > floor {
        steps += 1;
        if steps > tol.max_word {
            return Err(Error::precondition("lambda", format!("word length exceeds {}", tol.max_word)));
        }
        let target = y - 1.0;
        let w = solve_increasing(
            |w| {
                let j = u.evaluate(w, 1);
                (j.d[0], j.d[1])
            },
            target,
            target,
            radius,
            tol.root_abscissa,
        )?;
        if order >= 1 {
            let mut inv = invert_jet(&u.evaluate(w, order))?;
            inv.base = target;
            jet = compose_unchecked(&inv, &jet);
        }
        y = w;
    }
    let mut z = y;
    for _ in 0..steps {
        if order >= 1 {
            jet = compose_unchecked(&v.evaluate(z, order), &jet);
        }
        z = v.value(z) + 1.0;
    }
    let mut d = jet.d;
    d[0] = z;
    Ok(Jet::new(x, d))
}

fn require_in_plateau(f: &Diffeo1, field: &PlateauField, tol: &Tolerances) -> Result<()> {
    if f.class != TailClass::Compact {
        return Err(Error::InvalidParameter("conjugacy inputs must be compactly supported".into()));
    }
    let (lo, hi) = field.plateau();
    if let Some((a, b)) = f.support_interval(tol.support_slack) {
        let cell = f.grid.h();
        if a < lo - cell || b > hi + cell {
            return Err(Error::precondition("conjugacy", format!("support [{a}, {b}] leaves [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// `Λ(u, v)`, sampled as an eventually periodic map: the identity left of
/// `−2A`, commuting with `T` right of `2A + 1/2`.
pub fn lambda_limit(u: &Diffeo1, v: &Diffeo1, field: &PlateauField, tol: &Tolerances) -> Result<Diffeo1> {
    require_in_plateau(u, field, tol)?;
    require_in_plateau(v, field, tol)?;
    if u.k != v.k {
        return Err(Error::Incompatible(format!("jet orders {} and {}", u.k, v.k)));
    }
    let (lo, hi) = field.plateau();
    let probe = hi + 1.5;
    lambda_word(u, v, field, probe, 0, tol)?;
    let map = FnMap::new(|x: f64, order| {
        lambda_word(u, v, field, x, order, tol).unwrap_or_else(|e| panic!("Λ evaluation failed: {e}"))
    });
    let m = u.grid.density().max(v.grid.density()).ceil().max(8.0) as usize;
    sample(SampleSpec::eventually_periodic(lo, hi + 0.5, u.k, m), &map, tol)
}

/// A witness of `τ∘v = λ∘τ∘u∘λ⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyCertificate {
    pub tau: Diffeo1,
    pub lambda: Diffeo1,
    pub b: f64,
    pub residual: f64,
}

/// Mean of `x ↦ Γv(Γu)⁻¹(x) − x` over one period and its largest deviation
/// from that mean.
pub fn translation_defect(gu: &Diffeo1, gv: &Diffeo1, samples: usize, tol: &Tolerances) -> Result<(f64, f64)> {
    let gu_inv = inverse(gu, tol)?;
    let diffs: Vec<f64> = (0..samples)
        .map(|i| {
            let x = i as f64 / samples as f64;
            gv.value(gu_inv.value(x)) - x
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / samples as f64;
    let dev = diffs.iter().fold(0.0f64, |m, d| m.max((d - mean).abs()));
    Ok((mean, dev))
}

/// `λ` as a lazy map: `x` left of `−2A`, `φΛφ⁻¹` on `[−2A, 2A + 1/2]`,
/// `τ_b` beyond.
pub struct LambdaMap<'a> {
    pub big_lambda: &'a Diffeo1,
    pub chart: Chart,
    pub tau_b: TimeMap,
}

impl LambdaMap<'_> {
    /// `φΛφ⁻¹(x)` for `|x| < 2A + 1`.
    pub fn conjugated(&self, x: f64, order: usize) -> Result<Jet<f64>> {
        let pinv = self.chart.try_inverse_jet(x, order)?;
        let lam = self.big_lambda.evaluate(pinv.d[0], order);
        if lam.d[0] == pinv.d[0] && lam.d.iter().skip(2).all(|v| *v == 0.0) && (order == 0 || lam.d[1] == 1.0) {
            return Ok(Jet::identity(x, order));
        }
        let phi = self.chart.try_jet(lam.d[0], order)?;
        Ok(compose_unchecked(&phi, &compose_unchecked(&lam, &pinv)))
    }
}

impl Map1 for LambdaMap<'_> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let (lo, hi) = self.chart.field.plateau();
        if x < lo {
            Jet::identity(x, order)
        } else if x > hi + 0.5 {
            self.tau_b.jet(x, order)
        } else {
            self.conjugated(x, order).unwrap_or_else(|e| panic!("λ evaluation failed: {e}"))
        }
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.chart.field.support().1 * 2.0)
    }
}

/// Largest mismatch of `φΛφ⁻¹` against the identity on `(−2A−1, −2A)` and
/// against `τ_b` on `(2A + 1/2, 2A + 0.95]`, at `per_overlap` points each.
pub fn overlap_mismatch(map: &LambdaMap, per_overlap: usize) -> Result<f64> {
    let (lo, hi) = map.chart.field.plateau();
    let mut worst = 0.0f64;
    for i in 1..=per_overlap {
        let t = i as f64 / (per_overlap + 1) as f64;
        let x = lo - 1.0 + t;
        worst = worst.max((map.conjugated(x, 0)?.d[0] - x).abs());
        let y = hi + 0.5 + 0.45 * i as f64 / per_overlap as f64;
        worst = worst.max((map.conjugated(y, 0)?.d[0] - map.tau_b.try_jet(y, 0)?.d[0]).abs());
    }
    Ok(worst)
}

/// Probe count for [`conjugacy_residual`]: at least four points per cell of
/// `λ`, so a defect confined to one cell cannot fall between probes.
pub fn conjugacy_probes(lambda: &Diffeo1, field: &PlateauField) -> usize {
    let (lo, hi) = field.support();
    ((4.0 * (hi - lo + 1.0) * lambda.grid.density()).ceil() as usize).max(1000)
}

/// `max |τ(v(x)) − λ(τ(u(λ⁻¹(x))))|` over `samples` points of
/// `[−2A − 3/2, 2A + 3/2]`.
pub fn conjugacy_residual(
    tau: &dyn Map1,
    lambda: &Diffeo1,
    u: &dyn Map1,
    v: &dyn Map1,
    field: &PlateauField,
    samples: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let inv = Inverse::new(lambda, tol.root_abscissa);
    let (lo, hi) = field.support();
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let x = lo - 0.5 + (hi - lo + 1.0) * i as f64 / samples as f64;
        let pre = inv.try_jet(x, 0)?.d[0];
        let rhs = lambda.value(tau.value(u.value(pre)));
        let lhs = tau.value(v.value(x));
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Builds `λ(u, v)` and certifies `τv = λτuλ⁻¹`. Refuses unless `Γv(Γu)⁻¹`
/// is a translation to within `tol.tol_b`.
pub fn conjugator(
    u: &Diffeo1,
    v: &Diffeo1,
    field: &PlateauField,
    tol: &Tolerances,
) -> Result<ConjugacyCertificate> {
    require_in_plateau(u, field, tol)?;
    require_in_plateau(v, field, tol)?;
    let gu = gamma_roll(u, tol)?;
    let gv = gamma_roll(v, tol)?;
    let (b, dev) = translation_defect(&gu, &gv, 256, tol)?;
    if dev > tol.tol_b {
        return Err(Error::precondition(
            "conjugator",
            format!("Γv(Γu)⁻¹ deviates from a translation by {dev:.3e}"),
        ));
    }
    let big_lambda = lambda_limit(u, v, field, tol)?;
    let chart = trajectory_chart(field, tol);
    let map = LambdaMap { big_lambda: &big_lambda, chart, tau_b: TimeMap::new(*field, b, tol) };
    let mismatch = overlap_mismatch(&map, 100)?;
    if mismatch > tol.overlap {
        return Err(Error::Construction(format!("pieces of λ disagree by {mismatch:.3e} on their overlaps")));
    }
    let (lo, hi) = field.plateau();
    let n = ((hi + 1.0 - lo) * big_lambda.grid.density()).ceil() as usize + 1;
    let lambda = sample(SampleSpec::compact(lo, hi + 1.0, u.k, n), &map, tol)?.with_meta("lambda");
    let tau = time_t_map(field, 1.0, u.k, tol)?;
    let probes = conjugacy_probes(&lambda, field);
    let residual = conjugacy_residual(&TimeMap::new(*field, 1.0, tol), &lambda, u, v, field, probes, tol)?;
    Ok(ConjugacyCertificate { tau, lambda, b, residual })
}
