//! The plateau field `ρ`, its time-`t` maps and the trajectory chart `φ`.
//!
//! `ρ(x) = S(2A+1−|x|)/(S(2A+1−|x|) + S(|x|−2A))` with `S(t) = exp(−1/t)`:
//! even, one on `[−2A, 2A]`, zero outside `(−2A−1, 2A+1)`. Flows carry their
//! derivative jets by integrating the state as a truncated series in the
//! initial condition, which is the variational system written compactly.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::diffeo::{sample, Diffeo1, SampleSpec};
use crate::error::{Error, Result};
use crate::jetcalc::Jet;
use crate::map::Map1;
use crate::ode::{integrate, OdeOptions};
use crate::series::Series;
use crate::smooth::smoothstep;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauField {
    /// The integer `A ≥ 1`; the plateau is `J = [−2A, 2A]`.
    pub a: u32,
}

impl PlateauField {
    pub fn plateau(&self) -> (f64, f64) {
        let e = 2.0 * self.a as f64;
        (-e, e)
    }

    pub fn support(&self) -> (f64, f64) {
        let e = 2.0 * self.a as f64 + 1.0;
        (-e, e)
    }

    fn edge(&self) -> f64 {
        2.0 * self.a as f64
    }

    /// Series of `ρ` at `y`, in powers of the offset from `y`.
    pub fn series_at(&self, y: f64, order: usize) -> Series<f64> {
        let e = self.edge();
        if y.abs() <= e {
            return Series::constant(1.0, order);
        }
        if y.abs() >= e + 1.0 {
            return Series::constant(0.0, order);
        }
        let var = Series::variable(y, order);
        // t = 2A + 1 − |y|, with |y| differentiated on the side of y.
        let t = if y > 0.0 { (-&var).add_const(e + 1.0) } else { var.add_const(e + 1.0) };
        smoothstep(&t)
    }

    pub fn value(&self, y: f64) -> f64 {
        self.series_at(y, 0).value()
    }

    /// `ρ ∘ Y` for a series `Y`.
    pub fn compose(&self, y: &Series<f64>) -> Series<f64> {
        y.compose_outer(&self.series_at(y.value(), y.order()))
    }

    /// `1/ρ(y) − 1 = exp(1/(2A+1−y) − 1/(y−2A))` for `2A < y < 2A+1`.
    fn excess(&self, y: f64) -> f64 {
        let e = self.edge();
        if y <= e {
            return 0.0;
        }
        (1.0 / (e + 1.0 - y) - 1.0 / (y - e)).exp()
    }
}

pub fn make_rho(a: u32) -> Result<PlateauField> {
    if a == 0 {
        return Err(Error::InvalidParameter("A must be at least 1".into()));
    }
    Ok(PlateauField { a })
}

fn ode_options(tol: &Tolerances) -> OdeOptions {
    OdeOptions::new(tol.ode_abs, tol.ode_rel)
}

/// Flows the series `x + ε` for time `t`.
fn flow_series(field: &PlateauField, x: f64, t: f64, order: usize, opts: &OdeOptions) -> Result<Series<f64>> {
    let start = Series::variable(x, order);
    let out = integrate(
        |_, c| field.compose(&Series { c: c.to_vec() }).c,
        0.0,
        &start.c,
        t,
        opts,
    )?;
    Ok(Series { c: out })
}

/// The time-`t` map of `ρ` as a lazy map.
#[derive(Debug, Clone, Copy)]
pub struct TimeMap {
    pub field: PlateauField,
    pub t: f64,
    pub opts: OdeOptions,
}

impl TimeMap {
    pub fn new(field: PlateauField, t: f64, tol: &Tolerances) -> Self {
        TimeMap { field, t, opts: ode_options(tol) }
    }

    pub fn try_jet(&self, x: f64, order: usize) -> Result<Jet<f64>> {
        let (lo, hi) = self.field.support();
        if x <= lo || x >= hi || self.t == 0.0 {
            return Ok(Jet::identity(x, order));
        }
        let (p, q) = self.field.plateau();
        if x >= p && x <= q && x + self.t >= p && x + self.t <= q {
            return Ok(Jet::identity(x, order).shifted(self.t));
        }
        Ok(flow_series(&self.field, x, self.t, order, &self.opts)?.to_jet(x))
    }
}

impl Map1 for TimeMap {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        self.try_jet(x, order).unwrap_or_else(|e| panic!("flow integration failed: {e}"))
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.t.abs())
    }
}

type TauKey = (u32, u64, usize, String);

/// `τ_t` sampled as a compactly supported map on `[−2A−1, 2A+1]`.
///
/// Resolving the flat edges of `ρ` takes tens of thousands of nodes, so
/// results are memoized per field, time, order and tolerance set.
pub fn time_t_map(field: &PlateauField, t: f64, k: usize, tol: &Tolerances) -> Result<Diffeo1> {
    static CACHE: OnceLock<Mutex<HashMap<TauKey, Diffeo1>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (field.a, t.to_bits(), k, serde_json::to_string(tol).unwrap_or_default());
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let tau = sample_time_t_map(field, t, k, tol)?;
    cache.lock().expect("cache lock").insert(key, tau.clone());
    Ok(tau)
}

fn sample_time_t_map(field: &PlateauField, t: f64, k: usize, tol: &Tolerances) -> Result<Diffeo1> {
    let (lo, hi) = field.support();
    let map = TimeMap::new(*field, t, tol);
    // Surface integration failures as errors before sampling.
    map.try_jet(0.5 * (field.edge() + hi), k)?;
    let n = 16 * (hi - lo) as usize + 1;
    Ok(sample(SampleSpec::compact(lo, hi, k, n), &map, tol)?.with_meta(format!("tau_{t}")))
}

/// Jet of a trajectory `s ↦ Y(s)` with `Y' = ρ(Y)` and `Y(0) = y`, from the
/// recursion `c_{m+1} = [ρ∘Y]_m/(m+1)`.
fn trajectory_jet(field: &PlateauField, base: f64, y: f64, order: usize) -> Jet<f64> {
    let mut s = Series::constant(y, order);
    for m in 0..order {
        let r = field.compose(&s);
        s.c[m + 1] = r.c[m] / (m + 1) as f64;
    }
    s.to_jet(base)
}

/// `φ(x) = Φ(x, 0)`, the point reached from 0 after time `x`, with inverse
/// `φ⁻¹(y) = ∫_0^y ds/ρ(s)`.
#[derive(Debug, Clone, Copy)]
pub struct Chart {
    pub field: PlateauField,
    pub opts: OdeOptions,
}

pub fn trajectory_chart(field: &PlateauField, tol: &Tolerances) -> Chart {
    Chart { field: *field, opts: ode_options(tol) }
}

impl Chart {
    pub fn try_value(&self, x: f64) -> Result<f64> {
        let e = self.field.edge();
        if x.abs() <= e {
            return Ok(x);
        }
        let y = integrate(|_, y| vec![self.field.value(y[0])], 0.0, &[e], x.abs() - e, &self.opts)?[0];
        Ok(y.copysign(x))
    }

    pub fn try_jet(&self, x: f64, order: usize) -> Result<Jet<f64>> {
        if x.abs() <= self.field.edge() {
            return Ok(Jet::identity(x, order));
        }
        Ok(trajectory_jet(&self.field, x, self.try_value(x)?, order))
    }

    /// `φ⁻¹(y)` for `|y| < 2A+1`.
    pub fn try_inverse(&self, y: f64) -> Result<f64> {
        let e = self.field.edge();
        let a = y.abs();
        if a <= e {
            return Ok(y);
        }
        if a >= e + 1.0 {
            return Err(Error::RootFind { at: y, detail: "outside the range of the chart".into() });
        }
        let extra = gauss_legendre_adaptive(&|s| self.field.excess(s), e, a, 1e-14)?;
        Ok((a + extra).copysign(y))
    }

    pub fn try_inverse_jet(&self, y: f64, order: usize) -> Result<Jet<f64>> {
        let v = self.try_inverse(y)?;
        if y.abs() <= self.field.edge() {
            return Ok(Jet::identity(y, order));
        }
        let recip = self.field.series_at(y, order.saturating_sub(1)).recip();
        let mut d = vec![0.0; order + 1];
        d[0] = v;
        let mut fact = 1.0;
        for m in 1..=order {
            // (φ⁻¹)^{(m)} = (1/ρ)^{(m−1)} = (m−1)!·[1/ρ]_{m−1}
            d[m] = recip.c[m - 1] * fact;
            fact *= m as f64;
        }
        Ok(Jet::new(y, d))
    }

    pub fn inverse(&self) -> ChartInverse {
        ChartInverse { chart: *self }
    }
}

impl Map1 for Chart {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        self.try_jet(x, order).unwrap_or_else(|e| panic!("chart evaluation failed: {e}"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChartInverse {
    pub chart: Chart,
}

impl Map1 for ChartInverse {
    fn jet(&self, y: f64, order: usize) -> Jet<f64> {
        self.chart.try_inverse_jet(y, order).unwrap_or_else(|e| panic!("chart inverse failed: {e}"))
    }
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn gauss_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, w)| w * f(m + r * x)).sum::<f64>()
}

/// Adaptive 8-point Gauss–Legendre: a panel is accepted when it agrees with
/// the sum over its halves to `rel·(1 + |value|)`.
pub fn gauss_legendre_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> Result<f64> {
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, rel: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = gauss_panel(f, a, m);
        let right = gauss_panel(f, m, b);
        let both = left + right;
        if !both.is_finite() {
            return Err(Error::Integration(format!("non-finite quadrature on [{a}, {b}]")));
        }
        if (both - whole).abs() <= rel * (1.0 + both.abs()) || depth >= 60 || m <= a || m >= b {
            return Ok(both);
        }
        Ok(recurse(f, a, m, left, rel, depth + 1)? + recurse(f, m, b, right, rel, depth + 1)?)
    }
    if b <= a {
        return Ok(0.0);
    }
    recurse(f, a, b, gauss_panel(f, a, b), rel, 0)
}

/// `max |φ(φ⁻¹(x) + b) − τ_b(x)|` over the samples inside `(−2A−1, 2A+1)`.
pub fn verify_chart_conjugation(field: &PlateauField, b: f64, samples: &[f64], tol: &Tolerances) -> Result<f64> {
    let chart = trajectory_chart(field, tol);
    let tau = TimeMap::new(*field, b, tol);
    let (lo, hi) = field.support();
    let mut worst = 0.0f64;
    for &x in samples.iter().filter(|x| **x > lo && **x < hi) {
        let lhs = chart.try_value(chart.try_inverse(x)? + b)?;
        let rhs = tau.try_jet(x, 0)?.d[0];
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `max |φ(u(φ⁻¹(x))) − u(x)|` over the samples inside `(−2A−1, 2A+1)`, for
/// `u` supported in the plateau.
pub fn verify_chart_invariance(field: &PlateauField, u: &dyn Map1, samples: &[f64], tol: &Tolerances) -> Result<f64> {
    let chart = trajectory_chart(field, tol);
    let (lo, hi) = field.support();
    let mut worst = 0.0f64;
    for &x in samples.iter().filter(|x| **x > lo && **x < hi) {
        let lhs = chart.try_value(u.value(chart.try_inverse(x)?))?;
        worst = worst.max((lhs - u.value(x)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_plateau_support_and_symmetry() {
        let f = make_rho(1).unwrap();
        assert_eq!(f.value(0.0), 1.0);
        assert_eq!(f.value(2.0), 1.0);
        assert_eq!(f.value(3.0), 0.0);
        assert_eq!(f.value(-3.0), 0.0);
        let mid = f.value(2.5);
        assert!(mid > 0.0 && mid < 1.0);
        for y in [2.1, 2.37, 2.9] {
            assert_eq!(f.value(y), f.value(-y));
        }
    }

    #[test]
    fn unit_speed_on_plateau() {
        let tol = Tolerances::default();
        let tau = TimeMap::new(make_rho(1).unwrap(), 0.5, &tol);
        assert!((tau.value(0.3) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn flow_jets_match_finite_differences() {
        let tol = Tolerances::default();
        let tau = TimeMap::new(make_rho(1).unwrap(), 1.0, &tol);
        let x = 1.7;
        let j = tau.jet(x, 2);
        let h = 1e-5;
        let fd1 = (tau.value(x + h) - tau.value(x - h)) / (2.0 * h);
        let fd2 = (tau.value(x + h) - 2.0 * tau.value(x) + tau.value(x - h)) / (h * h);
        assert!((j.d[1] - fd1).abs() < 1e-7 * (1.0 + fd1.abs()));
        assert!((j.d[2] - fd2).abs() < 1e-3 * (1.0 + fd2.abs()));
    }

    #[test]
    fn chart_is_odd_and_bounded() {
        let tol = Tolerances::default();
        let c = trajectory_chart(&make_rho(1).unwrap(), &tol);
        for x in [2.5, 4.0, 10.0] {
            let v = c.try_value(x).unwrap();
            assert_eq!(v, -c.try_value(-x).unwrap());
            assert!(v < 3.0 && v <= x);
        }
        let y = 2.6;
        let x = c.try_inverse(y).unwrap();
        assert!((c.try_value(x).unwrap() - y).abs() < 1e-10);
    }

    #[test]
    fn chart_inverse_jet_is_reciprocal_field() {
        let tol = Tolerances::default();
        let field = make_rho(1).unwrap();
        let c = trajectory_chart(&field, &tol);
        let j = c.try_inverse_jet(2.4, 1).unwrap();
        assert!((j.d[1] - 1.0 / field.value(2.4)).abs() < 1e-12);
    }
}
