//! Norm reduction on the line: rolling up (`Γ`), spreading (`Ω_B`), their
//! composite `Ψ = Ω_B∘Γ`, and the conjugacies `Λ`, `λ` relating `g` to `Ψg`.

mod conjugacy;
mod gamma;
mod spread;

pub use conjugacy::{
    conjugacy_probes, conjugacy_residual, conjugator, lambda_limit, lambda_word, overlap_mismatch, translation_defect,
    ConjugacyCertificate, LambdaMap,
};
pub use gamma::{gamma_eval, gamma_norm_check, gamma_params, gamma_roll, word_length, GammaMap};
pub use spread::{
    discrete_isotopy, disjoint_product, disjoint_sup_check, effective_eps0, kal_map, omega1_spread,
    omega_spread, window_centre, zeta, zeta_norms, H0_WINDOW, H1_WINDOW,
};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::diffeo::{Diffeo1, TailClass};
use crate::error::{Error, Result};
use crate::flow::PlateauField;
use crate::modulus::ConcaveModulus;
use crate::norms;

/// Parameters of the reduction `Ψ : V_E → V_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatherConfig {
    pub k: usize,
    pub alpha: ConcaveModulus<f64>,
    #[serde(rename = "A")]
    pub a: u32,
    pub eps0: f64,
    pub delta0: f64,
    /// Number of spreading windows.
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "D")]
    pub d: (f64, f64),
    #[serde(rename = "E")]
    pub e: (f64, f64),
}

impl MatherConfig {
    /// The interval rule: for `k ≥ 2`, `D = [−2, 2]`, `E = [−2A, 2A]`,
    /// `B = 1`; for `k = 1` the roles of `D` and `E` swap and `B = A`.
    pub fn new(k: usize, alpha: ConcaveModulus<f64>, a: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("jet order k must be at least 1".into()));
        }
        if a == 0 {
            return Err(Error::InvalidParameter("A must be a positive integer".into()));
        }
        let wide = 2.0 * a as f64;
        let (d, e, b) = if k >= 2 { ((-2.0, 2.0), (-wide, wide), 1) } else { ((-wide, wide), (-2.0, 2.0), a as usize) };
        let delta0 = 1e-3 / 10f64.powi(k.saturating_sub(2) as i32);
        Ok(MatherConfig { k, alpha, a, eps0: effective_eps0(0.0099), delta0, b, d, e })
    }

    pub fn field(&self) -> PlateauField {
        PlateauField { a: self.a }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0 < 0.01) {
            return Err(Error::InvalidParameter(format!("ε₀ = {} must lie in (0, 1/100)", self.eps0)));
        }
        if !(self.delta0 > 0.0) {
            return Err(Error::InvalidParameter("δ₀ must be positive".into()));
        }
        let expected = MatherConfig::new(self.k, self.alpha.clone(), self.a)?;
        if self.b != expected.b || self.d != expected.d || self.e != expected.e {
            return Err(Error::InvalidParameter("B, D, E do not follow the interval rule for this k".into()));
        }
        Ok(())
    }
}

/// `Ψg` with the norms that went in and came out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiOutcome {
    pub psi: Diffeo1,
    pub norm_in: f64,
    pub norm_out: f64,
    /// `norm_out / norm_in`, zero for the identity.
    pub ratio: f64,
}

/// Errors unless `f` is compact with support inside `span`, allowing one grid
/// cell of slack.
pub fn require_support_in(f: &Diffeo1, span: (f64, f64), stage: &str, tol: &Tolerances) -> Result<()> {
    if f.class != TailClass::Compact {
        return Err(Error::InvalidParameter(format!("{stage} takes a compactly supported map")));
    }
    if let Some((a, b)) = f.support_interval(tol.support_slack) {
        let cell = f.grid.h();
        if a < span.0 - cell || b > span.1 + cell {
            return Err(Error::precondition(
                stage,
                format!("support [{a:.6}, {b:.6}] is not inside [{}, {}]", span.0, span.1),
            ));
        }
    }
    Ok(())
}

/// `Ψg = Ω_B(Γg)`, refusing when `g` leaves `E` or the `δ₀`-ball.
pub fn psi_reduce(g: &Diffeo1, cfg: &MatherConfig, tol: &Tolerances) -> Result<PsiOutcome> {
    cfg.validate()?;
    require_support_in(g, cfg.e, "psi", tol)?;
    if g.is_identity() {
        let (lo, hi) = cfg.d;
        return Ok(PsiOutcome {
            psi: Diffeo1::identity(TailClass::Compact, lo, hi, 5, cfg.k),
            norm_in: 0.0,
            norm_out: 0.0,
            ratio: 0.0,
        });
    }
    let norm_in = norms::holder_norm(g, cfg.k, &cfg.alpha, tol);
    if !(norm_in < cfg.delta0) {
        return Err(Error::precondition("psi", format!("‖g‖ = {norm_in:.3e} is not below δ₀ = {:.3e}", cfg.delta0)));
    }
    let rolled = gamma_roll(g, tol)?;
    let psi = omega_spread(&rolled, cfg.b, cfg.eps0, tol)?.with_meta("psi");
    require_support_in(&psi, cfg.d, "psi", tol)?;
    let norm_out = norms::holder_norm(&psi, cfg.k, &cfg.alpha, tol);
    Ok(PsiOutcome { psi, norm_in, norm_out, ratio: norm_out / norm_in })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::{sample, BumpMap, SampleSpec};
    use crate::map::Map1;
    use crate::modulus::holder;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn bump(amp: f64, c: f64, r: f64, k: usize) -> Diffeo1 {
        let map = BumpMap { amp, scale: 1.0, c, r };
        sample(SampleSpec::compact(c - r, c + r, k, 65), &map, &tol()).unwrap()
    }

    #[test]
    fn interval_rule() {
        let cfg = MatherConfig::new(2, holder(0.5).unwrap(), 4).unwrap();
        assert_eq!((cfg.b, cfg.d, cfg.e), (1, (-2.0, 2.0), (-8.0, 8.0)));
        let cfg = MatherConfig::new(1, holder(0.5).unwrap(), 3).unwrap();
        assert_eq!((cfg.b, cfg.d, cfg.e), (3, (-6.0, 6.0), (-2.0, 2.0)));
        assert!(cfg.eps0 < 0.01);
    }

    #[test]
    fn gamma_of_identity_is_identity() {
        let id = Diffeo1::identity(TailClass::Compact, -1.0, 1.0, 9, 2);
        assert!(gamma_roll(&id, &tol()).unwrap().is_identity());
    }

    #[test]
    fn gamma_word_is_shift_independent() {
        let g = bump(0.05, 0.2, 0.7, 2);
        let map = GammaMap::new(&g, &tol()).unwrap().unwrap();
        for i in 0..50 {
            let x = -3.0 + 0.13 * i as f64;
            let r = map.shift_for(x);
            let a = gamma_eval(&g, x, r, map.s, 2);
            let b = gamma_eval(&g, x, r + 1, map.s + 1, 2);
            for (p, q) in a.d.iter().zip(&b.d) {
                assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn omega_round_trip() {
        let t = tol();
        let g = bump(5e-4, 0.0, 1.2, 2);
        let rolled = gamma_roll(&g, &t).unwrap();
        let spread = omega_spread(&rolled, 1, 0.0099, &t).unwrap();
        let back = gamma_roll(&spread, &t).unwrap();
        let g0 = rolled.value(0.0);
        for i in 0..200 {
            let x = -1.0 + i as f64 / 100.0;
            assert!((back.value(x) - (rolled.value(x) - g0)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn psi_of_identity_is_identity() {
        let cfg = MatherConfig::new(2, holder(0.5).unwrap(), 2).unwrap();
        let id = Diffeo1::identity(TailClass::Compact, -1.0, 1.0, 9, 2);
        let out = psi_reduce(&id, &cfg, &tol()).unwrap();
        assert!(out.psi.is_identity());
    }

    #[test]
    fn conjugator_of_equal_pair_is_trivial() {
        let t = tol();
        let field = PlateauField { a: 1 };
        let u = bump(0.01, 0.0, 1.0, 2);
        let cert = conjugator(&u, &u, &field, &t).unwrap();
        assert!(cert.b.abs() < 1e-12);
        assert!(cert.residual < 1e-9, "residual {}", cert.residual);
        assert!(cert.lambda.node_sup(0) < 1e-9);
    }
}
