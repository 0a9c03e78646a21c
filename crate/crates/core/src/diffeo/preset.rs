//! Closed-form diffeomorphisms with known supports and jets.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{sample, Diffeo1, SampleSpec};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::jetcalc::Jet;
use crate::map::Map1;
use crate::series::Series;
use crate::smooth::{affine, bump};

/// Displacement `amp·A·bump((x/A − c)/r)`, supported on `[A(c−r), A(c+r)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpMap {
    pub amp: f64,
    pub scale: f64,
    pub c: f64,
    pub r: f64,
}

impl BumpMap {
    pub fn support(&self) -> (f64, f64) {
        (self.scale * (self.c - self.r), self.scale * (self.c + self.r))
    }

    pub fn displacement(&self, x: f64, order: usize) -> Series<f64> {
        let t = affine(x / self.scale, self.c, self.r, order);
        // d/dx of t(x/A) carries a factor 1/A per order.
        let mut s = bump(&t);
        let mut f = 1.0;
        for c in s.c.iter_mut() {
            *c *= f;
            f /= self.scale;
        }
        s.scale(self.amp * self.scale)
    }
}

impl Map1 for BumpMap {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let s = self.displacement(x, order).add_const(x);
        let mut s = s;
        if order >= 1 {
            s.c[1] += 1.0;
        }
        s.to_jet(x)
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some((self.amp * self.scale).abs())
    }
}

/// Displacement `ε Σ_{j=1..modes} sin(2πjx + phase)/j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiggleMap {
    pub eps: f64,
    pub modes: usize,
    pub phase: f64,
}

impl WiggleMap {
    pub fn displacement(&self, x: f64, order: usize) -> Vec<f64> {
        let tau = std::f64::consts::TAU;
        let mut d = vec![0.0; order + 1];
        for j in 1..=self.modes {
            let w = tau * j as f64;
            let arg = w * x + self.phase;
            let mut pow = 1.0;
            for (m, dm) in d.iter_mut().enumerate() {
                let v = (arg + m as f64 * std::f64::consts::FRAC_PI_2).sin();
                *dm += self.eps * pow * v / j as f64;
                pow *= w;
            }
        }
        d
    }
}

impl Map1 for WiggleMap {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let mut d = self.displacement(x, order);
        d[0] += x;
        if order >= 1 {
            d[1] += 1.0;
        }
        Jet::new(x, d)
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.eps.abs() * (1..=self.modes).map(|j| 1.0 / j as f64).sum::<f64>())
    }
}

fn default_k() -> usize {
    3
}
fn default_n() -> usize {
    65
}
fn default_one() -> f64 {
    1.0
}
fn default_modes() -> usize {
    1
}

/// Parameters of the named constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", content = "params", rename_all = "snake_case")]
pub enum Preset {
    SmoothBumpDisplacement {
        eps: f64,
        #[serde(default)]
        c: f64,
        #[serde(default = "default_one")]
        r: f64,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_n")]
        n: usize,
    },
    ScaledFamily {
        #[serde(rename = "A")]
        a: f64,
        eps: f64,
        #[serde(default)]
        c: f64,
        #[serde(default = "default_one")]
        r: f64,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_n")]
        n: usize,
    },
    PeriodicWiggle {
        eps: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default)]
        phase: f64,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_n")]
        n: usize,
    },
}

impl Preset {
    pub fn build(&self, tol: &Tolerances) -> Result<Diffeo1> {
        let (f, tag) = match *self {
            Preset::SmoothBumpDisplacement { eps, c, r, k, n } => {
                (bump_diffeo(BumpMap { amp: eps, scale: 1.0, c, r }, k, n, tol)?, "smooth_bump_displacement")
            }
            Preset::ScaledFamily { a, eps, c, r, k, n } => {
                if !(a > 0.0) {
                    return Err(Error::InvalidParameter(format!("scale A must be positive, got {a}")));
                }
                (bump_diffeo(BumpMap { amp: eps, scale: a, c, r }, k, n, tol)?, "scaled_family")
            }
            Preset::PeriodicWiggle { eps, modes, phase, k, n } => {
                let map = WiggleMap { eps, modes, phase };
                (sample(SampleSpec::periodic(0.0, k, n), &map, tol)?, "periodic_wiggle")
            }
        };
        Ok(f.with_meta(tag))
    }
}

fn bump_diffeo(map: BumpMap, k: usize, n: usize, tol: &Tolerances) -> Result<Diffeo1> {
    if !(map.r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {}", map.r)));
    }
    if k == 0 || k > crate::jetcalc::MAX_ORDER {
        return Err(Error::InvalidParameter(format!("jet order {k} out of range")));
    }
    let (a, b) = map.support();
    if map.amp == 0.0 {
        return Ok(Diffeo1::identity(super::TailClass::Compact, a, b, n, k));
    }
    sample(SampleSpec::compact(a, b, k, n), &map, tol)
}

/// Builds a preset from its name and a JSON parameter object.
pub fn from_preset(name: &str, params: &Value, tol: &Tolerances) -> Result<Diffeo1> {
    let wrapped = serde_json::json!({ "preset": name, "params": params });
    let preset: Preset = serde_json::from_value(wrapped)
        .map_err(|e| Error::InvalidParameter(format!("preset {name}: {e}")))?;
    preset.build(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn zero_amplitude_is_identity() {
        let f = from_preset("smooth_bump_displacement", &json!({"eps": 0.0}), &Tolerances::default()).unwrap();
        assert!(f.is_identity());
    }

    #[test]
    fn bump_sup_equals_amplitude() {
        let f = from_preset("smooth_bump_displacement", &json!({"eps": 0.2, "c": 1.0}), &Tolerances::default())
            .unwrap();
        assert!((f.displacement(1.0, 0)[0] - 0.2).abs() < 1e-15);
        assert!(f.node_sup(0) <= 0.2 + 1e-15);
    }

    #[test]
    fn scaled_family_is_conjugate_by_scaling() {
        let tol = Tolerances::default();
        let f = from_preset("scaled_family", &json!({"A": 4.0, "eps": 0.1, "c": 0.0, "r": 1.0}), &tol).unwrap();
        let g = from_preset("smooth_bump_displacement", &json!({"eps": 0.1}), &tol).unwrap();
        for x in [-0.7, -0.2, 0.1, 0.55] {
            let lhs = f.displacement(4.0 * x, 1);
            let rhs = g.displacement(x, 1);
            assert!((lhs[0] - 4.0 * rhs[0]).abs() < 1e-9);
            assert!((lhs[1] - rhs[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn wiggle_is_periodic() {
        let f = from_preset("periodic_wiggle", &json!({"eps": 0.02, "modes": 3}), &Tolerances::default()).unwrap();
        for i in 0..1000 {
            let x = -3.0 + 6.0 * i as f64 / 1000.0;
            assert!((f.value(x + 1.0) - f.value(x) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn excessive_amplitude_breaks_orientation() {
        let err = from_preset("smooth_bump_displacement", &json!({"eps": 3.0, "r": 0.5}), &Tolerances::default())
            .unwrap_err();
        assert!(err.is_refusal(), "{err}");
    }
}
