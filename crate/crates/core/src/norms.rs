//! Sup norms, Hölder seminorms and metrics of sampled maps, and numerical
//! checks of the standard inequalities between them.
//!
//! Seminorms are estimated from below: for each dyadic separation `s·h` the
//! estimator takes the sup of `|φ(x+sh) − φ(x)|/α(sh)` over every lattice
//! pair. Inequalities whose two sides are read off the same pair set hold on
//! the estimates up to rounding; the others are granted
//! [`Tolerances::estimator_slack`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::diffeo::{self, Diffeo1, TailClass};
use crate::error::{Error, Result};
use crate::map::Map1;
use crate::modulus::ConcaveModulus;

/// How a sampled function continues beyond its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extension {
    /// Zero outside.
    Zero,
    /// Period of `period` samples; `values[period]`, if present, repeats `values[0]`.
    Periodic { period: usize },
    /// Zero on the left, `period`-periodic beyond the last sample.
    ZeroThenPeriodic { period: usize },
    /// Not defined outside; only pairs inside the window count.
    Window,
}

/// Values of a function on the lattice `x₀ + j·h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub h: f64,
    pub values: Vec<f64>,
    pub ext: Extension,
}

impl Samples {
    pub fn new(h: f64, values: Vec<f64>, ext: Extension) -> Self {
        Samples { h, values, ext }
    }

    fn at(&self, i: i64) -> f64 {
        let n = self.values.len() as i64;
        match self.ext {
            Extension::Periodic { period } => self.values[i.rem_euclid(period as i64) as usize],
            Extension::Zero | Extension::Window => {
                if i < 0 || i >= n {
                    0.0
                } else {
                    self.values[i as usize]
                }
            }
            Extension::ZeroThenPeriodic { period } => {
                if i < 0 {
                    0.0
                } else if i < n {
                    self.values[i as usize]
                } else {
                    let p = period as i64;
                    self.values[(n - 1 - p + (i - (n - 1)).rem_euclid(p)) as usize]
                }
            }
        }
    }

    /// Separations in lattice steps and the range of left indices paired at
    /// each of them.
    fn pair_sets(&self, scales: usize) -> Vec<(i64, i64, i64)> {
        let n = self.values.len() as i64;
        let span = match self.ext {
            Extension::Periodic { period } => period as i64,
            _ => n - 1,
        };
        if span < 1 {
            return Vec::new();
        }
        let mut seps: Vec<i64> = (0..scales as u32)
            .map(|j| 1i64 << j)
            .take_while(|s| *s <= span)
            .collect();
        if seps.last() != Some(&span) {
            seps.push(span);
        }
        seps.into_iter()
            .map(|s| match self.ext {
                Extension::Periodic { period } => (s, 0, period as i64 - 1),
                Extension::Window => (s, 0, n - 1 - s),
                Extension::Zero | Extension::ZeroThenPeriodic { .. } => (s, -s, n - 1),
            })
            .collect()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Estimate of `[φ]_α` over dyadic separations.
    pub fn holder(&self, alpha: &ConcaveModulus<f64>, scales: usize) -> f64 {
        self.pair_sets(scales)
            .into_par_iter()
            .map(|(s, lo, hi)| {
                let denom = alpha.eval(s as f64 * self.h);
                let mut best = 0.0f64;
                for i in lo..=hi {
                    best = best.max((self.at(i + s) - self.at(i)).abs());
                }
                best / denom
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Pointwise combination of samples on the same lattice.
    pub fn zip_with(&self, other: &Samples, f: impl Fn(f64, f64) -> f64) -> Result<Samples> {
        if self.values.len() != other.values.len() || self.h != other.h || self.ext != other.ext {
            return Err(Error::Incompatible("samples live on different lattices".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Samples { h: self.h, values, ext: self.ext })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Samples {
        Samples { h: self.h, values: self.values.iter().map(|v| f(*v)).collect(), ext: self.ext }
    }
}

/// Samples `φ` on `[lo, hi]` with `n` points, no extension.
pub fn sample_window(phi: impl Fn(f64) -> f64 + Sync, lo: f64, hi: f64, n: usize) -> Samples {
    let n = n.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    let values = (0..n).into_par_iter().map(|j| phi(lo + j as f64 * h)).collect();
    Samples::new(h, values, Extension::Window)
}

fn extension_of(f: &Diffeo1, density: usize) -> Extension {
    match f.class {
        TailClass::Compact => Extension::Zero,
        TailClass::Periodic => Extension::Periodic { period: (f.grid.n - 1) * density },
        TailClass::EventuallyPeriodic => Extension::ZeroThenPeriodic { period: f.window_nodes() * density },
    }
}

/// Displacement derivatives of orders `0..=order` at `density` points per
/// grid cell, one [`Samples`] per order. Positions are taken relative to the
/// grid, so translated copies give identical samples.
pub fn displacement_samples(f: &Diffeo1, order: usize, density: usize) -> Vec<Samples> {
    let order = order.min(f.k);
    let density = density.max(1);
    let cells = f.grid.n - 1;
    let pts: Vec<Vec<f64>> = (0..=cells * density)
        .into_par_iter()
        .map(|j| {
            let (i, s) = if j == cells * density { (cells - 1, density) } else { (j / density, j % density) };
            f.displacement_in_cell(i, s as f64 / density as f64, order)
        })
        .collect();
    let h = f.grid.h() / density as f64;
    let ext = extension_of(f, density);
    (0..=order)
        .map(|m| Samples::new(h, pts.iter().map(|p| p[m]).collect(), ext))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    /// `‖f − Id‖_k < δ`.
    Ck,
    /// `‖f − Id‖_{k,α} < δ`.
    CkAlpha,
}

/// A ball `V^{k[,α]}(δ)`, optionally intersected with `{I_f ⊆ J}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallQuery {
    pub kind: BallKind,
    pub delta: f64,
    #[serde(default)]
    pub within: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub query: BallQuery,
    pub value: f64,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub k: usize,
    /// `‖f − Id‖_i` for `i = 0..=k`.
    pub sup_dev: Vec<f64>,
    /// `[(f − Id)^{(i)}]_α` for `i = 1..=k`, stored at index `i − 1`.
    pub holder_dev: Vec<f64>,
    /// `max_{1≤i≤k} ‖f − Id‖_i`.
    pub m_k: f64,
    /// Estimate of `[(f − Id)^{(k)}]_α` at the full density over the estimate
    /// at half density; near 1 once the estimator has converged.
    pub refinement_ratio: f64,
    pub memberships: Vec<Membership>,
}

impl NormReport {
    /// `‖f − Id‖_{i,α}`.
    pub fn holder(&self, i: usize) -> f64 {
        self.holder_dev[i - 1]
    }
}

pub fn norm_report(
    f: &Diffeo1,
    alpha: &ConcaveModulus<f64>,
    queries: &[BallQuery],
    tol: &Tolerances,
) -> NormReport {
    let k = f.k;
    let samples = displacement_samples(f, k, tol.eval_density);
    let sup_dev: Vec<f64> = samples.iter().map(Samples::sup).collect();
    let holder_dev: Vec<f64> = samples[1..].iter().map(|s| s.holder(alpha, tol.holder_scales)).collect();
    let m_k = sup_dev[1..].iter().cloned().fold(0.0, f64::max);
    let refinement_ratio = if k >= 1 {
        let coarse = displacement_samples(f, k, (tol.eval_density / 2).max(1));
        let c = coarse[k].holder(alpha, tol.holder_scales);
        if c > 0.0 {
            holder_dev[k - 1] / c
        } else {
            1.0
        }
    } else {
        1.0
    };
    let support = f.support_interval(tol.support_slack);
    let memberships = queries
        .iter()
        .map(|q| {
            let value = match q.kind {
                BallKind::Ck => sup_dev[k],
                BallKind::CkAlpha => holder_dev.last().copied().unwrap_or(sup_dev[0]),
            };
            let inside = match (q.within, support, f.class) {
                (None, _, _) => true,
                (Some(_), _, TailClass::Periodic) => true,
                (Some(_), None, _) => true,
                (Some((lo, hi)), Some((a, b)), _) => a >= lo && b <= hi,
            };
            Membership { query: *q, value, member: inside && value < q.delta }
        })
        .collect();
    NormReport { k, sup_dev, holder_dev, m_k, refinement_ratio, memberships }
}

/// `‖f − Id‖_{i,α} = [(f − Id)^{(i)}]_α`.
pub fn holder_norm(f: &Diffeo1, i: usize, alpha: &ConcaveModulus<f64>, tol: &Tolerances) -> f64 {
    displacement_samples(f, i, tol.eval_density)[i.min(f.k)].holder(alpha, tol.holder_scales)
}

/// `‖f − Id‖_i`.
pub fn sup_norm(f: &Diffeo1, i: usize, tol: &Tolerances) -> f64 {
    displacement_samples(f, i, tol.eval_density)[i.min(f.k)].sup()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    C0,
    Ck,
    CkAlpha,
}

/// A lattice `j·h` with `h = 2^{−p}` shared by every map of comparable
/// density, covering where two maps can differ.
struct Lattice {
    h: f64,
    lo: i64,
    hi: i64,
    ext: Extension,
}

fn lattice_for(maps: &[&Diffeo1], density: usize) -> Result<Lattice> {
    let finest = maps.iter().map(|f| f.grid.h()).fold(f64::INFINITY, f64::min) / density as f64;
    let p = (-finest.log2()).ceil().max(0.0) as i32;
    let h = 2f64.powi(-p);
    let per_unit = 1i64 << p;
    let periodic = maps.iter().filter(|f| f.class == TailClass::Periodic).count();
    if periodic == maps.len() {
        return Ok(Lattice { h, lo: 0, hi: per_unit, ext: Extension::Periodic { period: per_unit as usize } });
    }
    if periodic > 0 {
        return Err(Error::Incompatible("periodic maps are compared only with periodic maps".into()));
    }
    let lo = maps.iter().map(|f| f.grid.a).fold(f64::INFINITY, f64::min);
    let eventually = maps.iter().any(|f| f.class == TailClass::EventuallyPeriodic);
    if eventually {
        let s = maps.iter().map(|f| f.core().expect("non-periodic").1).fold(f64::NEG_INFINITY, f64::max);
        let lo = (lo / h).floor() as i64;
        let hi = (s / h).ceil() as i64 + per_unit;
        Ok(Lattice { h, lo, hi, ext: Extension::ZeroThenPeriodic { period: per_unit as usize } })
    } else {
        let hi = maps.iter().map(|f| f.grid.b).fold(f64::NEG_INFINITY, f64::max);
        Ok(Lattice { h, lo: (lo / h).floor() as i64, hi: (hi / h).ceil() as i64, ext: Extension::Zero })
    }
}

fn lattice_samples(f: &Diffeo1, lat: &Lattice, order: usize) -> Vec<Samples> {
    let pts: Vec<Vec<f64>> = (lat.lo..=lat.hi)
        .into_par_iter()
        .map(|j| {
            let mut d = f.displacement(j as f64 * lat.h, order);
            d.resize(order + 1, 0.0);
            d
        })
        .collect();
    (0..=order)
        .map(|m| Samples::new(lat.h, pts.iter().map(|p| p[m]).collect(), lat.ext))
        .collect()
}

/// Differences `(f − g)^{(i)}` for `i = 0..=order` on a shared lattice.
pub fn difference_samples(f: &Diffeo1, g: &Diffeo1, order: usize, tol: &Tolerances) -> Result<Vec<Samples>> {
    let lat = lattice_for(&[f, g], tol.eval_density)?;
    let a = lattice_samples(f, &lat, order);
    let b = lattice_samples(g, &lat, order);
    a.iter().zip(&b).map(|(p, q)| p.zip_with(q, |x, y| x - y)).collect()
}

/// `d₀`, `d_k` or `d_{k,α}` between `f` and `g`.
pub fn metric(
    f: &Diffeo1,
    g: &Diffeo1,
    kind: MetricKind,
    alpha: Option<&ConcaveModulus<f64>>,
    tol: &Tolerances,
) -> Result<f64> {
    if f.k != g.k {
        return Err(Error::Incompatible(format!("jet orders {} and {}", f.k, g.k)));
    }
    match kind {
        MetricKind::C0 => {
            let direct = difference_samples(f, g, 0, tol)?[0].sup();
            let fi = diffeo::inverse(f, tol)?;
            let gi = diffeo::inverse(g, tol)?;
            let inv = difference_samples(&fi, &gi, 0, tol)?[0].sup();
            Ok(direct.max(inv))
        }
        MetricKind::Ck => {
            let d = difference_samples(f, g, f.k, tol)?;
            Ok(d.iter().map(Samples::sup).fold(0.0, f64::max))
        }
        MetricKind::CkAlpha => {
            let alpha = alpha.ok_or_else(|| Error::InvalidParameter("C^{k,α} metric needs α".into()))?;
            let d = difference_samples(f, g, f.k, tol)?;
            let sups = d.iter().map(Samples::sup).fold(0.0, f64::max);
            let holders = d[1..].iter().map(|s| s.holder(alpha, tol.holder_scales)).fold(0.0, f64::max);
            Ok(sups.max(holders))
        }
    }
}

/// One checked inequality `lhs ≤ rhs`, where `slack = rhs − lhs` and
/// `holds` allows the estimator slack where the two sides come from
/// different pair sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn new(name: &str, lhs: f64, rhs: f64, allowance: f64) -> Self {
        let scale = 1.0 + rhs.abs().max(lhs.abs());
        let holds = lhs <= rhs * (1.0 + allowance) + 1e-12 * scale;
        Inequality { name: name.into(), lhs, rhs, slack: rhs - lhs, holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub checks: Vec<Inequality>,
}

impl SlackReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }
}

/// Bounds between consecutive orders of `a = f − g` for maps with `I_f, I_g ⊆ J`,
/// with `ℓ = |J| + 2`:
/// `‖a‖_i ≤ α(1)·ℓ·[a^{(i)}]_α`, `‖a‖_i ≤ ℓ‖a‖_{i+1}` and
/// `[a^{(i)}]_α ≤ (ℓ/α(ℓ))‖a‖_{i+1}`.
pub fn verify_domination(
    f: &Diffeo1,
    g: &Diffeo1,
    i: usize,
    j: (f64, f64),
    alpha: &ConcaveModulus<f64>,
    tol: &Tolerances,
) -> Result<SlackReport> {
    if i + 1 > f.k.min(g.k) {
        return Err(Error::InvalidParameter(format!("order {} exceeds the jets carried", i + 1)));
    }
    for m in [f, g] {
        if m.class == TailClass::Periodic {
            return Err(Error::precondition("domination", "maps must be eventually periodic with I_f ⊆ J"));
        }
        if let Some((a, b)) = m.support_interval(tol.support_slack) {
            let cell = m.grid.h();
            if a < j.0 - cell || b > j.1 + cell {
                return Err(Error::precondition("domination", format!("I_f = [{a}, {b}] is not inside J")));
            }
        }
    }
    if i == 0 {
        for x in [j.0, j.1] {
            let gap = (f.value(x) - g.value(x)).abs();
            if gap > tol.base_match {
                return Err(Error::precondition("domination", format!("f ≠ g at ∂J (gap {gap:.3e} at {x})")));
            }
        }
    }
    let ell = j.1 - j.0 + 2.0;
    let d = difference_samples(f, g, i + 1, tol)?;
    let sup_i = d[i].sup();
    let sup_next = d[i + 1].sup();
    let hol_i = d[i].holder(alpha, tol.holder_scales);
    let slack = tol.estimator_slack;
    Ok(SlackReport {
        checks: vec![
            Inequality::new("sup_by_holder", sup_i, alpha.eval(1.0) * ell * hol_i, slack),
            Inequality::new("sup_by_next_sup", sup_i, ell * sup_next, slack),
            Inequality::new("holder_by_next_sup", hol_i, ell / alpha.eval(ell) * sup_next, slack),
        ],
    })
}

/// Product, `m`-fold product and precomposition rules for Hölder seminorms,
/// estimated on `[lo, hi]` with `n` points. `factors` feeds the `m`-fold rule;
/// the first two factors feed the product rule; `f ∘ g` uses `f = factors[0]`.
pub fn verify_derivation(
    factors: &[&(dyn Fn(f64) -> f64 + Sync)],
    g: &dyn Map1,
    window: (f64, f64),
    n: usize,
    alpha: &ConcaveModulus<f64>,
    tol: &Tolerances,
) -> Result<SlackReport> {
    if factors.len() < 2 {
        return Err(Error::InvalidParameter("need at least two factors".into()));
    }
    let (lo, hi) = window;
    let scales = tol.holder_scales;
    let s: Vec<Samples> = factors.iter().map(|f| sample_window(f, lo, hi, n)).collect();
    let sups: Vec<f64> = s.iter().map(Samples::sup).collect();
    let hols: Vec<f64> = s.iter().map(|x| x.holder(alpha, scales)).collect();
    let prod2 = s[0].zip_with(&s[1], |a, b| a * b)?;
    let mut prod_all = s[0].clone();
    for x in &s[1..] {
        prod_all = prod_all.zip_with(x, |a, b| a * b)?;
    }
    let m = s.len() as i32;
    let max_sup = sups.iter().cloned().fold(0.0, f64::max);
    let composed = sample_window(|x| (factors[0])(g.value(x)), lo, hi, n);
    let g_slope = sample_window(|x| g.jet(x, 1).d[1], lo, hi, n).sup();
    let f0 = factors[0];
    // [f]_α must be read where f is evaluated, on g's image.
    let f_on_image = sample_window(f0, g.value(lo).min(lo), g.value(hi).max(hi), n);
    let slack = tol.estimator_slack;
    Ok(SlackReport {
        checks: vec![
            Inequality::new(
                "product",
                prod2.holder(alpha, scales),
                hols[0] * sups[1] + sups[0] * hols[1],
                0.0,
            ),
            Inequality::new(
                "multi_product",
                prod_all.holder(alpha, scales),
                max_sup.powi(m - 1) * hols.iter().sum::<f64>(),
                0.0,
            ),
            Inequality::new(
                "precomposition",
                composed.holder(alpha, scales),
                f_on_image.holder(alpha, scales).max(hols[0]) * g_slope.max(1.0),
                slack,
            ),
        ],
    })
}

/// `[Σ f_i]_α ≤ Σ [f_i]_α` on a common window.
pub fn verify_subadditivity(terms: &[Samples], alpha: &ConcaveModulus<f64>, tol: &Tolerances) -> Result<Inequality> {
    let first = terms.first().ok_or_else(|| Error::InvalidParameter("no terms".into()))?;
    let mut total = first.clone();
    for t in &terms[1..] {
        total = total.zip_with(t, |a, b| a + b)?;
    }
    let rhs: f64 = terms.iter().map(|t| t.holder(alpha, tol.holder_scales)).sum();
    Ok(Inequality::new("subadditivity", total.holder(alpha, tol.holder_scales), rhs, 0.0))
}

/// `K = |J| + α(|J|) + |J|/α(|J|)`.
pub fn lip_met_constant(len: f64, alpha: &ConcaveModulus<f64>) -> f64 {
    let a = alpha.eval(len);
    len + a + len / a
}

/// For `u = f − Id` supported in `J`: `‖u‖_i ≤ K‖u‖_{i,α}`,
/// `‖u‖_i ≤ K‖u‖_{i+1}` and `‖u‖_{i,α} ≤ K‖u‖_{i+1}`.
pub fn verify_lip_met(
    f: &Diffeo1,
    i: usize,
    j: (f64, f64),
    alpha: &ConcaveModulus<f64>,
    tol: &Tolerances,
) -> Result<SlackReport> {
    if f.class != TailClass::Compact {
        return Err(Error::precondition("lip_met", "map must be compactly supported"));
    }
    if i + 1 > f.k {
        return Err(Error::InvalidParameter(format!("order {} exceeds the jets carried", i + 1)));
    }
    if let Some((a, b)) = f.support_interval(tol.support_slack) {
        if a < j.0 - f.grid.h() || b > j.1 + f.grid.h() {
            return Err(Error::precondition("lip_met", format!("support [{a}, {b}] is not inside J")));
        }
    }
    let k = lip_met_constant(j.1 - j.0, alpha);
    let s = displacement_samples(f, i + 1, tol.eval_density);
    let sup_i = s[i].sup();
    let sup_next = s[i + 1].sup();
    let hol_i = s[i].holder(alpha, tol.holder_scales);
    let slack = tol.estimator_slack;
    Ok(SlackReport {
        checks: vec![
            Inequality::new("sup_by_holder", sup_i, k * hol_i, slack),
            Inequality::new("sup_by_next_sup", sup_i, k * sup_next, slack),
            Inequality::new("holder_by_next_sup", hol_i, k * sup_next, slack),
        ],
    })
}

/// Smallest `C ≥ 0` with `‖f∘g‖ ≤ ‖f‖ + ‖g‖ + C‖f‖‖g‖` over a batch, where
/// `‖·‖ = ‖· − Id‖_{k,α}` and both maps lie in the `eps` ball.
pub fn verify_composition_bound(
    pairs: &[(Diffeo1, Diffeo1)],
    eps: f64,
    alpha: &ConcaveModulus<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    let mut c = 0.0f64;
    for (f, g) in pairs {
        let k = f.k;
        let nf = holder_norm(f, k, alpha, tol);
        let ng = holder_norm(g, k, alpha, tol);
        if nf >= eps || ng >= eps {
            return Err(Error::precondition(
                "composition_bound",
                format!("norms {nf:.3e}, {ng:.3e} not below ε = {eps:.3e}"),
            ));
        }
        let fg = diffeo::compose(f, g, tol)?;
        let nfg = holder_norm(&fg, k, alpha, tol);
        if nf > 0.0 && ng > 0.0 {
            c = c.max((nfg - nf - ng) / (nf * ng));
        }
    }
    Ok(c)
}
