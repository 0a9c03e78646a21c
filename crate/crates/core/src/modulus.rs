//! Concave moduli of continuity: Hölder powers, the complex-exponent family
//! `ω_z`, and sampled moduli produced by least concave majorants. Includes the
//! one-sided tameness test and the elementary modulus laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{eval_polyline, upper_hull};
use crate::scalar::Scalar;

/// An evaluable concave homeomorphism of `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConcaveModulus<T> {
    Holder {
        s: T,
    },
    /// `exp(−σ·log(1/x) − τ·log(1/x)/log log(1/x))` on `(0, δ/2]`,
    /// `ext_a·√x + ext_b` beyond.
    OmegaZ {
        sigma: T,
        tau: T,
        delta: T,
        ext_a: T,
        ext_b: T,
    },
    /// Piecewise linear through `(abscissae[i], values[i])`, starting at the
    /// origin; extrapolated with the final slope.
    Sampled {
        abscissae: Vec<T>,
        values: Vec<T>,
    },
}

/// Outcome of one side of the tameness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Tameness {
    Yes { t0: f64, margin: f64 },
    Inconclusive,
}

impl Tameness {
    pub fn is_yes(&self) -> bool {
        matches!(self, Tameness::Yes { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TamenessVerdict {
    pub sup_tame: Tameness,
    pub sub_tame: Tameness,
}

/// Smallest margin below 1 that counts as a positive tameness verdict.
pub const TAMENESS_MARGIN: f64 = 1e-3;

/// Lower end of the downward scan that locates the concavity cutoff of `ω_z`.
const OMEGA_Z_FLOOR: f64 = 1e-12;
/// Length of the run of concave triples that ends the scan.
const OMEGA_Z_RUN: usize = 64;

/// `ω_s(x) = x^s`.
pub fn holder<T: Scalar>(s: T) -> Result<ConcaveModulus<T>> {
    if !(s > T::zero() && s <= T::one()) {
        return Err(Error::InvalidParameter(format!("Hölder exponent {s} outside (0,1]")));
    }
    Ok(ConcaveModulus::Holder { s })
}

fn omega_z_closed<T: Scalar>(sigma: T, tau: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let big = (T::one() / x).ln();
    let mut expo = -sigma * big;
    if tau != T::zero() {
        expo -= tau * big / big.ln();
    }
    expo.exp()
}

/// The modulus `ω_z`, `z = σ + iτ`, made globally concave by cutting at a
/// scanned abscissa and continuing with a square-root branch.
pub fn omega_z<T: Scalar>(sigma: T, tau: T) -> Result<ConcaveModulus<T>> {
    let zero = T::zero();
    let one = T::one();
    let admissible = (sigma > zero && sigma < one)
        || (sigma == zero && tau > zero)
        || (sigma == one && tau <= zero);
    if !admissible {
        return Err(Error::InvalidParameter(format!(
            "(σ, τ) = ({sigma}, {tau}) is not in the admissible exponent range"
        )));
    }
    if tau == zero {
        return holder(sigma);
    }
    // The closed form needs log log(1/x) > 0, i.e. x < 1/e; start at e^{−e}.
    let q = T::lit(0.85);
    let mut x = (-T::lit(std::f64::consts::E)).exp();
    let f = |x: T| omega_z_closed(sigma, tau, x);
    let mut run = 0usize;
    let mut run_top = x;
    loop {
        let (xl, xm, xr) = (x * q, x, x / q);
        let chord = f(xl) + (f(xr) - f(xl)) * (xm - xl) / (xr - xl);
        if f(xm) > chord {
            if run == 0 {
                run_top = xm;
            }
            run += 1;
            if run >= OMEGA_Z_RUN {
                break;
            }
        } else {
            run = 0;
        }
        x *= q;
        if x < T::lit(OMEGA_Z_FLOOR) {
            return Err(Error::Construction(format!(
                "no concavity cutoff for ω_z with (σ, τ) = ({sigma}, {tau}) above {OMEGA_Z_FLOOR}"
            )));
        }
    }
    let delta = run_top / T::lit(2.0);
    let half = delta / T::lit(2.0);
    let slope = (f(delta) - f(half)) / half;
    let root = half.sqrt();
    let ext_a = T::lit(2.0) * slope * root;
    let ext_b = f(half) - ext_a * root;
    Ok(ConcaveModulus::OmegaZ { sigma, tau, delta, ext_a, ext_b })
}

impl<T: Scalar> ConcaveModulus<T> {
    pub fn eval(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        match self {
            ConcaveModulus::Holder { s } => {
                if *s == T::one() {
                    x
                } else {
                    x.powf(*s)
                }
            }
            ConcaveModulus::OmegaZ { sigma, tau, delta, ext_a, ext_b } => {
                if x <= *delta / T::lit(2.0) {
                    omega_z_closed(*sigma, *tau, x)
                } else {
                    *ext_a * x.sqrt() + *ext_b
                }
            }
            ConcaveModulus::Sampled { abscissae, values } => eval_polyline(abscissae, values, x),
        }
    }

    /// Limits of `t·α(x)/α(tx)` (first) and `α(tx)/α(x)` (second) as `x → 0⁺`
    /// and `x → ∞`, for `t ∈ (0,1)`. The tameness sups include these ends,
    /// which a finite grid never reaches.
    pub fn ratio_limits(&self, t: T) -> [(T, T); 2] {
        match self {
            ConcaveModulus::Holder { s } => {
                let sup = t.powf(T::one() - *s);
                let sub = t.powf(*s);
                [(sup, sub), (sup, sub)]
            }
            ConcaveModulus::OmegaZ { sigma, .. } => {
                let at_zero = (t.powf(T::one() - *sigma), t.powf(*sigma));
                let at_inf = (t.sqrt(), t.sqrt());
                [at_zero, at_inf]
            }
            ConcaveModulus::Sampled { abscissae, values } => {
                let n = values.len();
                let at_zero = (T::one(), t);
                let final_slope = if n >= 2 {
                    (values[n - 1] - values[n - 2]) / (abscissae[n - 1] - abscissae[n - 2])
                } else {
                    T::zero()
                };
                let at_inf = if final_slope > T::zero() { (T::one(), t) } else { (t, T::one()) };
                [at_zero, at_inf]
            }
        }
    }
}

/// `sup_x t·α(x)/α(tx)` over `x_grid` together with the asymptotic ends.
pub fn sup_functional<T: Scalar>(alpha: &ConcaveModulus<T>, t: T, x_grid: &[T]) -> T {
    let limits = alpha.ratio_limits(t);
    let mut best = limits[0].0.max(limits[1].0);
    for &x in x_grid {
        let r = t * alpha.eval(x) / alpha.eval(t * x);
        if r.is_finite() {
            best = best.max(r);
        }
    }
    best
}

/// `sup_x α(tx)/α(x)` over `x_grid` together with the asymptotic ends.
pub fn sub_functional<T: Scalar>(alpha: &ConcaveModulus<T>, t: T, x_grid: &[T]) -> T {
    let limits = alpha.ratio_limits(t);
    let mut best = limits[0].1.max(limits[1].1);
    for &x in x_grid {
        let r = alpha.eval(t * x) / alpha.eval(x);
        if r.is_finite() {
            best = best.max(r);
        }
    }
    best
}

/// `n` geometrically spaced points on `[lo, hi]`.
pub fn geometric_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi / lo).ln() / T::int((n - 1) as u64);
    (0..n).map(|i| lo * (step * T::int(i as u64)).exp()).collect()
}

/// Default abscissae for sampled moduli and tameness scans.
pub fn default_x_grid<T: Scalar>() -> Vec<T> {
    geometric_grid(T::lit(1e-9), T::lit(1e3), 512)
}

/// Default candidate values of `t₀`.
pub fn default_t_grid<T: Scalar>() -> Vec<T> {
    geometric_grid(T::lit(1e-6), T::lit(0.9), 64)
}

fn best_candidate<T: Scalar>(t_grid: &[T], eval: impl Fn(T) -> T) -> Tameness {
    let mut best: Option<(T, T)> = None;
    for &t in t_grid {
        let v = eval(t);
        if best.map_or(true, |(_, b)| v < b) {
            best = Some((t, v));
        }
    }
    match best {
        Some((t0, v)) if T::one() - v >= T::lit(TAMENESS_MARGIN) => Tameness::Yes {
            t0: t0.to_f64_lossy(),
            margin: (T::one() - v).to_f64_lossy(),
        },
        _ => Tameness::Inconclusive,
    }
}

/// One-sided test: a `Yes` names a `t₀` whose functional sits below one by at
/// least the margin; failing that the verdict is `Inconclusive`.
pub fn classify_tameness<T: Scalar>(
    alpha: &ConcaveModulus<T>,
    t_grid: &[T],
    x_grid: &[T],
) -> TamenessVerdict {
    TamenessVerdict {
        sup_tame: best_candidate(t_grid, |t| sup_functional(alpha, t, x_grid)),
        sub_tame: best_candidate(t_grid, |t| sub_functional(alpha, t, x_grid)),
    }
}

/// Worst slacks of `min(C,1)α(x) ≤ α(Cx) ≤ max(C,1)α(x)` and of the
/// monotonicity of `x/α(x)` over a sorted grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub lower_slack: f64,
    pub upper_slack: f64,
    pub ratio_slack: f64,
    pub pass: bool,
}

pub fn check_modulus_laws<T: Scalar>(alpha: &ConcaveModulus<T>, c: T, grid: &[T]) -> LawReport {
    let rel = T::lit(1e-12);
    let (lo_c, hi_c) = (c.min(T::one()), c.max(T::one()));
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut ratio = f64::INFINITY;
    let mut pass = true;
    let mut prev: Option<T> = None;
    for &x in grid {
        let ax = alpha.eval(x);
        let acx = alpha.eval(c * x);
        let s1 = acx - lo_c * ax;
        let s2 = hi_c * ax - acx;
        let scale = acx.abs().max(ax.abs()).max(T::min_positive_value());
        pass &= s1 >= -rel * scale && s2 >= -rel * scale;
        lower = lower.min(s1.to_f64_lossy());
        upper = upper.min(s2.to_f64_lossy());
        if ax > T::zero() {
            let r = x / ax;
            if let Some(p) = prev {
                let s3 = r - p;
                pass &= s3 >= -rel * r.abs();
                ratio = ratio.min(s3.to_f64_lossy());
            }
            prev = Some(r);
        }
    }
    LawReport { lower_slack: lower, upper_slack: upper, ratio_slack: ratio, pass }
}

/// Largest relative amount by which a sampled middle value falls below the
/// chord through its neighbours (non-positive means concave on the grid).
pub fn concavity_defect<T: Scalar>(alpha: &ConcaveModulus<T>, grid: &[T]) -> T {
    let mut worst = T::neg_infinity();
    for w in grid.windows(3) {
        let (x1, x2, x3) = (w[0], w[1], w[2]);
        let (y1, y2, y3) = (alpha.eval(x1), alpha.eval(x2), alpha.eval(x3));
        let chord = y1 + (y3 - y1) * (x2 - x1) / (x3 - x1);
        let scale = y2.abs().max(T::min_positive_value());
        worst = worst.max((chord - y2) / scale);
    }
    worst
}

/// Oscillation modulus `μ(t) = max |f(x) − f(y)|` over sample pairs with
/// `|x − y| ≤ t`, returned at the separations `j·h`, `h` the smallest spacing.
pub fn oscillation_modulus<T: Scalar>(xs: &[T], fs: &[T]) -> Result<Vec<(T, T)>> {
    if xs.len() < 2 || xs.len() != fs.len() {
        return Err(Error::InvalidParameter("oscillation needs ≥ 2 paired samples".into()));
    }
    let n = xs.len();
    let h = xs.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), T::min);
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter("abscissae must increase strictly".into()));
    }
    let span = xs[n - 1] - xs[0];
    let buckets = (span / h - T::lit(1e-9)).ceil().to_usize().unwrap_or(0) + 1;
    let mut mu = vec![T::zero(); buckets];
    for i in 0..n {
        for j in i + 1..n {
            let sep = xs[j] - xs[i];
            let b = ((sep / h) - T::lit(1e-9)).ceil().to_usize().unwrap_or(0).min(buckets - 1);
            let osc = (fs[j] - fs[i]).abs();
            if osc > mu[b] {
                mu[b] = osc;
            }
        }
    }
    for b in 1..buckets {
        if mu[b] < mu[b - 1] {
            mu[b] = mu[b - 1];
        }
    }
    Ok(mu.into_iter().enumerate().map(|(b, m)| (h * T::int(b as u64), m)).collect())
}

/// Least concave majorant `β₀` of the samples and the modulus `β = β₀ + Id`.
pub fn least_concave_majorant<T: Scalar>(
    samples: &[(T, T)],
) -> Result<(ConcaveModulus<T>, ConcaveModulus<T>)> {
    if samples.is_empty() || samples[0].0 != T::zero() || samples[0].1 != T::zero() {
        return Err(Error::InvalidParameter("samples must start at (0, 0)".into()));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::InvalidParameter("sample abscissae must increase strictly".into()));
        }
        if w[1].1 < w[0].1 {
            return Err(Error::InvalidParameter(format!(
                "samples decrease at t = {}",
                w[1].0
            )));
        }
    }
    let idx = upper_hull(samples);
    let hx: Vec<T> = idx.iter().map(|&i| samples[i].0).collect();
    let hy: Vec<T> = idx.iter().map(|&i| samples[i].1).collect();
    let abscissae: Vec<T> = samples.iter().map(|p| p.0).collect();
    // Interpolated hull values can round one ulp below a dropped collinear
    // sample; the true majorant is never below the samples.
    let beta0: Vec<T> = samples.iter().map(|&(t, m)| eval_polyline(&hx, &hy, t).max(m)).collect();
    let beta: Vec<T> = beta0.iter().zip(&abscissae).map(|(b, t)| *b + *t).collect();
    let mut beta_abs = abscissae.clone();
    let mut beta0_vals = beta0;
    let mut beta_vals = beta;
    if samples.len() == 1 {
        // A lone origin sample: extend by one unit so the identity part is
        // evaluable.
        beta_abs.push(T::one());
        beta0_vals.push(T::zero());
        beta_vals.push(T::one());
    }
    Ok((
        ConcaveModulus::Sampled { abscissae: beta_abs.clone(), values: beta0_vals },
        ConcaveModulus::Sampled { abscissae: beta_abs, values: beta_vals },
    ))
}

/// Parses `holder:S`, `omegaz:SIGMA,TAU`.
pub fn parse_modulus(spec: &str) -> Result<ConcaveModulus<f64>> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidParameter(format!("modulus spec `{spec}` lacks a kind")))?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidParameter(format!("modulus spec `{spec}`: {e}")))?;
    match (kind, nums.as_slice()) {
        ("holder", [s]) => holder(*s),
        ("omegaz", [sigma, tau]) => omega_z(*sigma, *tau),
        _ => Err(Error::InvalidParameter(format!("unknown modulus spec `{spec}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holder_evaluations() {
        assert_eq!(holder(0.5).unwrap().eval(4.0), 2.0);
        assert_eq!(holder(1.0).unwrap().eval(7.0), 7.0);
        assert!((holder(0.3f64).unwrap().eval(10.0) - 1.99526).abs() < 1e-5);
        assert!(holder(0.0).is_err());
        assert!(holder(1.5).is_err());
    }

    #[test]
    fn omega_z_with_zero_tau_is_a_power() {
        assert_eq!(omega_z(0.5, 0.0).unwrap().eval(0.25), 0.5);
    }

    #[test]
    fn omega_z_closed_form_value() {
        let e = std::f64::consts::E;
        let w = omega_z(0.0, 1.0).unwrap();
        let x = (-e.powf(e)).exp();
        let want = (-e.powf(e - 1.0)).exp();
        assert!((w.eval(x) - want).abs() < 1e-15);
        assert!((want - 3.7917e-3).abs() < 1e-6);
    }

    #[test]
    fn omega_z_rejects_inadmissible_exponents() {
        assert!(omega_z(0.0, -1.0).is_err());
        assert!(omega_z(1.0, 0.5).is_err());
        assert!(omega_z(1.2, 0.0).is_err());
    }

    #[test]
    fn omega_z_is_concave_and_satisfies_the_laws() {
        let grid = default_x_grid::<f64>();
        for (s, t) in [(0.5, 0.3), (0.0, 1.0), (1.0, -1.0), (0.25, -0.5)] {
            let w = omega_z(s, t).unwrap();
            assert!(concavity_defect(&w, &grid) <= 1e-12, "({s},{t})");
            assert!(check_modulus_laws(&w, 0.5, &grid).pass, "({s},{t})");
            assert!(check_modulus_laws(&w, 3.0, &grid).pass, "({s},{t})");
        }
    }

    #[test]
    fn lipschitz_end_cases() {
        let tg = default_t_grid::<f64>();
        let xg = default_x_grid::<f64>();
        let v = classify_tameness(&holder(1.0).unwrap(), &tg, &xg);
        assert!(v.sub_tame.is_yes());
        assert!(!v.sup_tame.is_yes());
        let v = classify_tameness(&omega_z(1.0, -1.0).unwrap(), &tg, &xg);
        assert!(!v.sup_tame.is_yes());
    }

    #[test]
    fn oscillation_of_identity_and_square() {
        let xs: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let mu = oscillation_modulus(&xs, &xs).unwrap();
        assert!((mu[500].1 - 0.5).abs() < 1e-12);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let mu = oscillation_modulus(&xs, &sq).unwrap();
        assert!((mu[500].0 - 0.5).abs() < 1e-12);
        assert!((mu[500].1 - 0.75).abs() < 1e-12);
        let flat = vec![3.0; xs.len()];
        assert!(oscillation_modulus(&xs, &flat).unwrap().iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn majorant_of_zero_is_zero() {
        let s: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.0)).collect();
        let (b0, b) = least_concave_majorant(&s).unwrap();
        for x in [0.0, 0.5, 3.0, 20.0] {
            assert_eq!(b0.eval(x), 0.0);
            assert!((b.eval(x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn decreasing_samples_are_rejected() {
        let s = vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)];
        assert!(least_concave_majorant(&s).is_err());
    }

    #[test]
    fn parses_specs() {
        assert_eq!(parse_modulus("holder:0.5").unwrap(), holder(0.5).unwrap());
        assert!(matches!(parse_modulus("omegaz:0.5,0.3").unwrap(), ConcaveModulus::OmegaZ { .. }));
        assert!(parse_modulus("nonsense").is_err());
    }
}
