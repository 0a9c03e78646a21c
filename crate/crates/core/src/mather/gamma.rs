//! The rolling-up operator `Γ`, turning a small compactly supported map into
//! a map commuting with unit translation.

use crate::config::Tolerances;
use crate::diffeo::{sample, Diffeo1, SampleSpec, TailClass};
use crate::error::{Error, Result};
use crate::jetcalc::{compose_unchecked, Jet};
use crate::map::Map1;
use crate::modulus::ConcaveModulus;
use crate::norms::{self, Inequality};

/// `(inf I_g, |I_g|, ‖g − Id‖₀)`, or `None` for the identity.
pub fn gamma_params(g: &Diffeo1, tol: &Tolerances) -> Result<Option<(f64, f64, f64)>> {
    if g.class != TailClass::Compact {
        return Err(Error::InvalidParameter("Γ takes a compactly supported map".into()));
    }
    let Some((lo, hi)) = g.support_interval(tol.support_slack) else {
        return Ok(None);
    };
    let a = norms::sup_norm(g, 0, tol).max(g.node_sup(0));
    if !(a < 1.0) {
        return Err(Error::precondition("gamma", format!("‖g − Id‖₀ = {a} is not below 1")));
    }
    Ok(Some((lo, hi - lo, a)))
}

/// Word length `s = ⌈(|I_g| + 1)/(1 − a)⌉`.
pub fn word_length(len: f64, a: f64) -> usize {
    ((len + 1.0) / (1.0 - a)).ceil() as usize
}

/// `T^{r−s}(Tg)^s T^{−r}(x)` with its jet. The value is `x` plus the sum of
/// the displacements met along the word, so the identity maps to itself
/// exactly.
pub fn gamma_eval(g: &Diffeo1, x: f64, r: i64, s: usize, order: usize) -> Jet<f64> {
    let y0 = x - r as f64;
    let mut jet = Jet::identity(y0, order);
    let mut z = 0.0;
    let mut y = y0;
    for i in 0..s {
        let u = g.displacement(y, order);
        if u.iter().any(|v| *v != 0.0) {
            let mut d = u.clone();
            d[0] += y;
            if order >= 1 {
                d[1] += 1.0;
            }
            jet = compose_unchecked(&Jet::new(y, d), &jet);
        }
        z += u[0];
        y = y0 + (i + 1) as f64 + z;
    }
    let mut d = jet.d;
    d[0] = x + z;
    Jet::new(x, d)
}

/// `Γg` as a lazy map.
pub struct GammaMap<'a> {
    pub g: &'a Diffeo1,
    pub lo: f64,
    pub s: usize,
}

impl<'a> GammaMap<'a> {
    pub fn new(g: &'a Diffeo1, tol: &Tolerances) -> Result<Option<Self>> {
        Ok(gamma_params(g, tol)?.map(|(lo, len, a)| GammaMap { g, lo, s: word_length(len, a) }))
    }

    /// The `r` with `inf I_g − 1 < x − r ≤ inf I_g`.
    pub fn shift_for(&self, x: f64) -> i64 {
        (x - self.lo).ceil() as i64
    }
}

impl Map1 for GammaMap<'_> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        gamma_eval(self.g, x, self.shift_for(x), self.s, order)
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.s as f64 * self.g.node_sup(0) * 1.1 + 1e-12)
    }
}

/// `Γg`, sampled as a periodic map on the window `[inf I_g, inf I_g + 1]`.
pub fn gamma_roll(g: &Diffeo1, tol: &Tolerances) -> Result<Diffeo1> {
    match GammaMap::new(g, tol)? {
        None => Ok(Diffeo1::identity(TailClass::Periodic, 0.0, 1.0, 3, g.k)),
        Some(map) => {
            let n = (g.grid.density().ceil() as usize + 1).max(33);
            sample(SampleSpec::periodic(map.lo, g.k, n), &map, tol)
        }
    }
}

/// `‖Γf‖_{k,α} ≤ 4(|I_f| + 1)‖f‖_{k,α}`.
pub fn gamma_norm_check(
    f: &Diffeo1,
    k: usize,
    alpha: &ConcaveModulus<f64>,
    delta0: f64,
    tol: &Tolerances,
) -> Result<Inequality> {
    let nf = norms::holder_norm(f, k, alpha, tol);
    if !(nf < delta0) {
        return Err(Error::precondition("gamma_norm", format!("‖f‖ = {nf:.3e} is not below δ₀ = {delta0:.3e}")));
    }
    let len = f.support_interval(tol.support_slack).map(|(a, b)| b - a).unwrap_or(0.0);
    let gf = gamma_roll(f, tol)?;
    let ng = norms::holder_norm(&gf, k, alpha, tol);
    let rhs = 4.0 * (len + 1.0) * nf;
    Ok(Inequality {
        name: "gamma_norm".into(),
        lhs: ng,
        rhs,
        slack: rhs - ng,
        holds: ng <= rhs * (1.0 + tol.estimator_slack),
    })
}
