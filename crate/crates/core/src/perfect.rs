//! The fixed-point experiment behind perfectness: iterate
//! `Θ(u) = Ψ(Q f u Q⁻¹)` from the identity and, on convergence, emit a
//! certificate chain that can be replayed from the serialized maps alone.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::diffeo::{compose, inverse, sample, Diffeo1, SampleSpec, TailClass};
use crate::error::{Error, Result};
use crate::flow::{gauss_legendre_adaptive, PlateauField};
use crate::jetcalc::Jet;
use crate::map::{Composite, FnMap, Inverse, Map1};
use crate::modulus::ConcaveModulus;
use crate::mather::{
    conjugacy_probes, conjugacy_residual, conjugator, gamma_roll, psi_reduce, require_support_in, translation_defect,
    ConjugacyCertificate, MatherConfig,
};
use crate::norms::{self, MetricKind};
use crate::series::Series;
use crate::smooth::smoothstep;

/// Shape of the scaling map `Q`: slope `ratio` on `[−inner, inner]`, the
/// identity outside `[−outer, outer]`.
#[derive(Debug, Clone, PartialEq)]
struct ScalingProfile {
    ratio: f64,
    inner: f64,
    outer: f64,
    width: f64,
    /// Slope deficit spent in the outer zone to bring `Q` back to the identity.
    c: f64,
    /// `∫_0^{j·PANEL} (Q′ − 1)` for each panel boundary.
    cumulative: Vec<f64>,
}

/// Width of the fixed quadrature panels used for the displacement of `Q`.
const PANEL: f64 = 0.125;

/// Eight-point Gauss–Legendre on `[a, b]`. With fixed nodes the result is a
/// smooth function of the endpoints, which keeps the sampled `Q` smooth.
fn gauss8(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_47, 0.101_228_536_290_376_26];
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * NODES.iter().zip(&WEIGHTS).map(|(x, w)| w * (f(m - r * x) + f(m + r * x))).sum::<f64>()
}

impl ScalingProfile {
    fn new(ratio: f64, inner: f64, outer: f64, width: f64) -> Result<Self> {
        let mut p = ScalingProfile { ratio, inner, outer, width, c: 0.0, cumulative: Vec::new() };
        let gain = gauss_legendre_adaptive(&|x| p.inner_weight(&Series::constant(x, 0)).value(), 0.0, outer, 1e-14)?;
        let spend = gauss_legendre_adaptive(&|x| p.outer_weight(&Series::constant(x, 0)).value(), 0.0, outer, 1e-14)?;
        p.c = (ratio - 1.0) * gain / spend;
        let panels = (outer / PANEL).ceil() as usize;
        let mut acc = 0.0;
        p.cumulative.push(0.0);
        for j in 0..panels {
            acc += gauss8(&|s| p.excess_value(s), j as f64 * PANEL, (j + 1) as f64 * PANEL);
            p.cumulative.push(acc);
        }
        Ok(p)
    }

    /// One on `[0, inner]`, zero beyond `inner + width`.
    fn inner_weight(&self, x: &Series<f64>) -> Series<f64> {
        smoothstep(&(-x).add_const(self.inner + self.width).scale(1.0 / self.width))
    }

    /// One on `[inner + width, outer − width]`, zero near both ends.
    fn outer_weight(&self, x: &Series<f64>) -> Series<f64> {
        let rise = smoothstep(&x.add_const(-self.inner).scale(1.0 / self.width));
        let fall = smoothstep(&(-x).add_const(self.outer).scale(1.0 / self.width));
        &rise * &fall
    }

    /// `Q′ − 1` as a series at `|x|`.
    fn slope_excess(&self, x: &Series<f64>) -> Series<f64> {
        let a = self.inner_weight(x).scale(self.ratio - 1.0);
        let b = self.outer_weight(x).scale(self.c);
        &a - &b
    }

    fn excess_value(&self, s: f64) -> f64 {
        self.slope_excess(&Series::constant(s, 0)).value()
    }

    fn displacement(&self, x: f64) -> f64 {
        let y = x.abs().min(self.outer);
        let j = ((y / PANEL).floor() as usize).min(self.cumulative.len() - 1);
        let v = self.cumulative[j] + gauss8(&|s| self.excess_value(s), j as f64 * PANEL, y);
        v.copysign(x)
    }

    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let mut d = vec![0.0; order + 1];
        d[0] = x + self.displacement(x);
        if order >= 1 {
            // The slope excess is even in x, so its m-th derivative picks up (−1)^m.
            let s = self.slope_excess(&Series::variable(x.abs(), order - 1));
            let mut fact = 1.0;
            for m in 1..=order {
                let sign = if x < 0.0 && (m - 1) % 2 == 1 { -1.0 } else { 1.0 };
                d[m] = sign * s.c[m - 1] * fact;
                fact *= m as f64;
            }
            d[1] += 1.0;
        }
        Jet::new(x, d)
    }
}

/// `Q`: the scaling `x ↦ (|E|/|D|)x` on `[−2|D|, 2|D|]`, blended back to the
/// identity by `±4 max(|D|, |E|)`.
pub fn make_q(d: (f64, f64), e: (f64, f64), k: usize, tol: &Tolerances) -> Result<Diffeo1> {
    let (ld, le) = (d.1 - d.0, e.1 - e.0);
    if !(ld > 0.0 && le > 0.0) {
        return Err(Error::InvalidParameter("D and E must have positive length".into()));
    }
    let ratio = le / ld;
    let inner = 2.0 * ld;
    let outer = 4.0 * ld.max(le);
    if ratio == 1.0 {
        return Ok(Diffeo1::identity(TailClass::Compact, -outer, outer, 9, k).with_meta("Q"));
    }
    let mut width = inner.min((outer - inner) / 3.0);
    for attempt in 0..2 {
        let profile = ScalingProfile::new(ratio, inner, outer, width)?;
        let map = FnMap::with_bound(
            |x: f64, order| profile.jet(x, order),
            (ratio - 1.0).abs() * outer,
        );
        let cells = (8.0 * outer / width).ceil() as usize;
        match sample(SampleSpec::compact(-outer, outer, k, 2 * cells + 1), &map, tol) {
            Ok(q) if k >= 1 && q.jets.iter().all(|j| 1.0 + j[1] > 0.0) => return Ok(q.with_meta("Q")),
            Ok(q) if k == 0 => return Ok(q.with_meta("Q")),
            Ok(_) | Err(Error::Precondition { .. }) if attempt == 0 => width *= 0.5,
            Ok(_) => return Err(Error::precondition("make_q", "blend loses monotonicity")),
            Err(e) => return Err(e),
        }
    }
    Err(Error::precondition("make_q", "blend loses monotonicity"))
}

/// `Q h Q⁻¹` sampled on `E`, for `h` supported in `D`.
pub fn conjugate_by_q(h: &Diffeo1, q: &Diffeo1, cfg: &MatherConfig, tol: &Tolerances) -> Result<Diffeo1> {
    require_support_in(h, cfg.d, "Q-conjugation", tol)?;
    if h.is_identity() {
        return Ok(Diffeo1::identity(TailClass::Compact, cfg.e.0, cfg.e.1, 9, h.k));
    }
    let q_inv = Inverse::new(q, tol.root_abscissa);
    let map = Composite::new(vec![q, h, &q_inv]);
    let scale = (cfg.e.1 - cfg.e.0) / (cfg.d.1 - cfg.d.0);
    let n = ((cfg.e.1 - cfg.e.0) * h.grid.density() / scale).ceil() as usize + 1;
    sample(SampleSpec::compact(cfg.e.0, cfg.e.1, h.k, n.max(33)), &map, tol)
}

/// `f` with its displacement jets multiplied by a constant so that
/// `‖f‖_{k,α}` equals `target`. The grid is kept, so the scaling is exact on
/// the stored jets.
pub fn rescale_to_norm(f: &Diffeo1, target: f64, alpha: &ConcaveModulus<f64>, tol: &Tolerances) -> Result<Diffeo1> {
    let current = norms::holder_norm(f, f.k, alpha, tol);
    if !(current > 0.0) {
        return Err(Error::InvalidParameter("cannot rescale the identity".into()));
    }
    let factor = target / current;
    let jets = f.jets.iter().map(|j| j.iter().map(|v| v * factor).collect()).collect();
    let mut out = Diffeo1::from_parts(f.class, f.grid, f.k, jets, tol)?;
    out.meta = f.meta.clone();
    Ok(out)
}

/// Intermediate maps of one `Θ` step.
#[derive(Debug, Clone)]
pub struct ThetaStep {
    pub fu: Diffeo1,
    pub g: Diffeo1,
    pub psi: Diffeo1,
}

/// `Θ(u) = Ψ(Q f u Q⁻¹)`.
pub fn theta_step(u: &Diffeo1, f: &Diffeo1, q: &Diffeo1, cfg: &MatherConfig, tol: &Tolerances) -> Result<ThetaStep> {
    require_support_in(u, cfg.d, "theta", tol)?;
    require_support_in(f, cfg.d, "theta", tol)?;
    let fu = if u.is_identity() {
        f.clone()
    } else if f.is_identity() {
        u.clone()
    } else {
        compose(f, u, tol)?
    };
    if !fu.is_identity() {
        let nf = norms::holder_norm(&fu, cfg.k, &cfg.alpha, tol);
        if !(nf <= 3.0 * cfg.delta0) {
            return Err(Error::precondition("theta", format!("‖fu‖ = {nf:.3e} exceeds 3δ₀")));
        }
    }
    let g = conjugate_by_q(&fu, q, cfg, tol)?;
    let psi = psi_reduce(&g, cfg, tol)?.psi;
    Ok(ThetaStep { fu, g, psi })
}

/// Every map and number needed to replay the identities
/// `τ∘Ψg = λ∘τ∘g∘λ⁻¹`, `g = Q(fu₀)Q⁻¹` and `Ψg = u₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateChain {
    pub config: MatherConfig,
    pub tolerances: Tolerances,
    pub field: PlateauField,
    pub f: Diffeo1,
    pub u0: Diffeo1,
    pub q: Diffeo1,
    pub g: Diffeo1,
    pub psi_g: Diffeo1,
    pub conjugacy: ConjugacyCertificate,
    pub q_residual: f64,
    pub fixed_point_residual: f64,
}

impl CertificateChain {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("certificate chain: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub u0: Option<Diffeo1>,
    pub iterations: usize,
    /// `d_k(Θu, u)` at the last iterate.
    pub residual: f64,
    pub trace: Vec<f64>,
    pub chain: Option<CertificateChain>,
}

impl FixedPointResult {
    pub fn converged(&self) -> bool {
        self.u0.is_some()
    }
}

/// Probe count for [`q_conjugation_residual`]: four points per cell of `g`
/// and of `h` carried to `E` by the slope of `Q`.
pub fn q_probes(g: &Diffeo1, h: &Diffeo1, q: &Diffeo1, e: (f64, f64)) -> usize {
    let slope = q.evaluate(0.0, 1).d[1];
    let density = g.grid.density().max(h.grid.density() / slope);
    ((4.0 * (e.1 - e.0) * density).ceil() as usize).max(1000)
}

/// `max |g(x) − Q(h(Q⁻¹x))|` over `samples + 1` points of `E`.
pub fn q_conjugation_residual(
    g: &Diffeo1,
    h: &Diffeo1,
    q: &Diffeo1,
    e: (f64, f64),
    samples: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let q_inv = Inverse::new(q, tol.root_abscissa);
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let x = e.0 + (e.1 - e.0) * i as f64 / samples as f64;
        let pre = q_inv.try_jet(x, 0)?.d[0];
        worst = worst.max((g.value(x) - q.value(h.value(pre))).abs());
    }
    Ok(worst)
}

/// `u ↦ Θ(u)` from the identity until `d_k(Θu, u) ≤ tol.fixed_point` or
/// `tol.max_iterations` steps. Not converging is a reported outcome.
pub fn fixed_point_search(f: &Diffeo1, cfg: &MatherConfig, tol: &Tolerances) -> Result<FixedPointResult> {
    cfg.validate()?;
    require_support_in(f, cfg.d, "fixed point", tol)?;
    let q = make_q(cfg.d, cfg.e, cfg.k, tol)?;
    let mut u = Diffeo1::identity(TailClass::Compact, cfg.d.0, cfg.d.1, 9, cfg.k);
    let mut trace = Vec::new();
    for it in 1..=tol.max_iterations {
        let step = theta_step(&u, f, &q, cfg, tol)?;
        require_support_in(&step.psi, cfg.d, "fixed point", tol)?;
        let residual = norms::metric(&step.psi, &u, MetricKind::Ck, None, tol)?;
        trace.push(residual);
        if residual <= tol.fixed_point {
            let chain = build_chain(f, &u, &q, step, cfg, tol)?;
            return Ok(FixedPointResult { u0: Some(u), iterations: it, residual, trace, chain: Some(chain) });
        }
        u = step.psi;
    }
    let residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(FixedPointResult { u0: None, iterations: tol.max_iterations, residual, trace, chain: None })
}

fn build_chain(
    f: &Diffeo1,
    u0: &Diffeo1,
    q: &Diffeo1,
    step: ThetaStep,
    cfg: &MatherConfig,
    tol: &Tolerances,
) -> Result<CertificateChain> {
    let field = cfg.field();
    let ThetaStep { fu, g, psi } = step;
    let conjugacy = if g.is_identity() && psi.is_identity() {
        identity_certificate(&field, cfg.k, tol)?
    } else {
        conjugator(&g, &psi, &field, tol)?
    };
    let q_residual = q_conjugation_residual(&g, &fu, q, cfg.e, q_probes(&g, &fu, q, cfg.e), tol)?;
    let fixed_point_residual = norms::metric(&psi, u0, MetricKind::Ck, None, tol)?;
    Ok(CertificateChain {
        config: cfg.clone(),
        tolerances: tol.clone(),
        field,
        f: f.clone(),
        u0: u0.clone(),
        q: q.clone(),
        g,
        psi_g: psi,
        conjugacy,
        q_residual,
        fixed_point_residual,
    })
}

/// The certificate for `g = Ψg = Id`: `λ = Id`, `b = 0`.
fn identity_certificate(field: &PlateauField, k: usize, tol: &Tolerances) -> Result<ConjugacyCertificate> {
    let (lo, hi) = field.plateau();
    Ok(ConjugacyCertificate {
        tau: crate::flow::time_t_map(field, 1.0, k, tol)?,
        lambda: Diffeo1::identity(TailClass::Compact, lo, hi + 1.0, 9, k),
        b: 0.0,
        residual: 0.0,
    })
}

/// One replayed identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayCheck {
    pub name: String,
    pub stored: f64,
    pub recomputed: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<ReplayCheck>,
    pub pass: bool,
}

fn replay(name: &str, stored: f64, recomputed: f64, threshold: f64) -> ReplayCheck {
    let reproduced = recomputed <= 2.0 * stored.max(1e-12);
    ReplayCheck {
        name: name.into(),
        stored,
        recomputed,
        threshold,
        pass: recomputed <= threshold && reproduced,
    }
}

/// Recomputes every residual of the chain from its stored maps. A check
/// passes when the recomputed value is below `threshold` (the fixed-point
/// identity uses the chain's own fixed-point tolerance) and within twice the
/// stored value.
pub fn verify_certificate(chain: &CertificateChain, threshold: f64) -> Result<VerifyReport> {
    let tol = &chain.tolerances;
    let cfg = &chain.config;
    cfg.validate()?;
    if chain.field.a != cfg.a {
        return Err(Error::Malformed("chain field does not match its configuration".into()));
    }
    let mut checks = Vec::new();

    let lam = &chain.conjugacy.lambda;
    let (lo, hi) = chain.field.plateau();
    let inside = match lam.support_interval(tol.support_slack) {
        None => true,
        Some((a, b)) => a >= lo - lam.grid.h() && b <= hi + 1.0 + lam.grid.h(),
    };
    checks.push(ReplayCheck {
        name: "lambda_support".into(),
        stored: 0.0,
        recomputed: if inside { 0.0 } else { 1.0 },
        threshold: 0.0,
        pass: inside,
    });

    let gg = gamma_roll(&chain.g, tol)?;
    let gp = gamma_roll(&chain.psi_g, tol)?;
    let (b, dev) = translation_defect(&gg, &gp, 256, tol)?;
    checks.push(replay("translation_defect", tol.tol_b / 2.0, dev, tol.tol_b));
    checks.push(replay("translation_amount", chain.conjugacy.b.abs().max(1e-12), (b - chain.conjugacy.b).abs(), tol.tol_b));

    let probes = conjugacy_probes(lam, &chain.field);
    let conj = conjugacy_residual(&chain.conjugacy.tau, lam, &chain.g, &chain.psi_g, &chain.field, probes, tol)?;
    checks.push(replay("conjugacy", chain.conjugacy.residual, conj, threshold));

    let fu = if chain.u0.is_identity() {
        chain.f.clone()
    } else if chain.f.is_identity() {
        chain.u0.clone()
    } else {
        compose(&chain.f, &chain.u0, tol)?
    };
    let qr = q_conjugation_residual(&chain.g, &fu, &chain.q, cfg.e, q_probes(&chain.g, &fu, &chain.q, cfg.e), tol)?;
    checks.push(replay("q_conjugation", chain.q_residual, qr, threshold));

    let fp = norms::metric(&chain.psi_g, &chain.u0, MetricKind::Ck, None, tol)?;
    checks.push(replay("fixed_point", chain.fixed_point_residual, fp, tol.fixed_point));

    let q_inv_ok = inverse(&chain.q, tol).is_ok();
    checks.push(ReplayCheck {
        name: "q_invertible".into(),
        stored: 0.0,
        recomputed: if q_inv_ok { 0.0 } else { 1.0 },
        threshold: 0.0,
        pass: q_inv_ok,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::holder;

    #[test]
    fn q_is_identity_for_equal_intervals() {
        let q = make_q((-2.0, 2.0), (-2.0, 2.0), 2, &Tolerances::default()).unwrap();
        assert!(q.is_identity());
    }

    #[test]
    fn q_scales_the_inner_zone() {
        let t = Tolerances::default();
        let q = make_q((-2.0, 2.0), (-8.0, 8.0), 2, &t).unwrap();
        assert!((q.value(1.0) - 4.0).abs() < 1e-9);
        assert!((q.value(-3.5) + 14.0).abs() < 1e-9);
        let j = q.evaluate(2.0, 2);
        assert!((j.d[1] - 4.0).abs() < 1e-8 && j.d[2].abs() < 1e-6);
        assert!(q.jets.iter().all(|j| 1.0 + j[1] > 0.0));
    }

    #[test]
    fn identity_fixed_point() {
        let t = Tolerances::default();
        let cfg = MatherConfig::new(2, holder(0.5).unwrap(), 1).unwrap();
        let f = Diffeo1::identity(TailClass::Compact, -2.0, 2.0, 9, 2);
        let res = fixed_point_search(&f, &cfg, &t).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.residual, 0.0);
        assert!(res.u0.unwrap().is_identity());
    }
}
