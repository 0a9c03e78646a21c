//! Maps of the line that can report their derivative jets at any point.
//!
//! Sampled diffeomorphisms, closed-form constructions and lazy composites all
//! implement [`Map1`], so a construction can be evaluated exactly (up to the
//! interpolation of its sampled inputs) before it is resampled.

use crate::error::{Error, Result};
use crate::jetcalc::{compose_unchecked, invert_jet, Jet};

pub trait Map1: Sync {
    /// Jet of the map at `x` with orders `0..=order`.
    fn jet(&self, x: f64, order: usize) -> Jet<f64>;

    fn value(&self, x: f64) -> f64 {
        self.jet(x, 0).d[0]
    }

    /// Bound on `|f(x) − x|`, used to bracket inverses. `None` when unknown.
    fn displacement_bound(&self) -> Option<f64> {
        None
    }
}

impl<M: Map1 + ?Sized> Map1 for &M {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        (**self).jet(x, order)
    }
    fn displacement_bound(&self) -> Option<f64> {
        (**self).displacement_bound()
    }
}

impl<M: Map1 + ?Sized> Map1 for Box<M> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        (**self).jet(x, order)
    }
    fn displacement_bound(&self) -> Option<f64> {
        (**self).displacement_bound()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Map1 for Identity {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        Jet::identity(x, order)
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `T(b): x ↦ x + b`.
#[derive(Debug, Clone, Copy)]
pub struct Translation(pub f64);

impl Map1 for Translation {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        Jet::identity(x, order).shifted(self.0)
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.0.abs())
    }
}

/// `x ↦ c·x`.
#[derive(Debug, Clone, Copy)]
pub struct Scaling(pub f64);

impl Map1 for Scaling {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let mut j = Jet::constant(x, self.0 * x, order);
        if order >= 1 {
            j.d[1] = self.0;
        }
        j
    }
}

/// A map given by a closure returning jets.
pub struct FnMap<F> {
    f: F,
    bound: Option<f64>,
}

impl<F: Fn(f64, usize) -> Jet<f64> + Sync> FnMap<F> {
    pub fn new(f: F) -> Self {
        FnMap { f, bound: None }
    }

    pub fn with_bound(f: F, bound: f64) -> Self {
        FnMap { f, bound: Some(bound) }
    }
}

impl<F: Fn(f64, usize) -> Jet<f64> + Sync> Map1 for FnMap<F> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        (self.f)(x, order)
    }
    fn displacement_bound(&self) -> Option<f64> {
        self.bound
    }
}

/// `maps[0] ∘ maps[1] ∘ … ∘ maps[n−1]`; the last map acts first.
pub struct Composite<'a> {
    pub maps: Vec<&'a dyn Map1>,
}

impl<'a> Composite<'a> {
    pub fn new(maps: Vec<&'a dyn Map1>) -> Self {
        Composite { maps }
    }
}

/// Jet of `outer ∘ inner` at `inner.base`.
pub fn push_jet(outer: &dyn Map1, inner: &Jet<f64>) -> Jet<f64> {
    let f = outer.jet(inner.d[0], inner.order());
    compose_unchecked(&f, inner)
}

impl Map1 for Composite<'_> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        let mut j = Jet::identity(x, order);
        for m in self.maps.iter().rev() {
            j = push_jet(*m, &j);
        }
        j
    }
    fn displacement_bound(&self) -> Option<f64> {
        self.maps.iter().map(|m| m.displacement_bound()).sum()
    }
}

/// Solves `f(y) = target` for an increasing `f` given as value and slope,
/// by Newton steps safeguarded with bisection inside an expanding bracket.
pub fn solve_increasing(
    f: impl Fn(f64) -> (f64, f64),
    target: f64,
    guess: f64,
    radius: f64,
    tol: f64,
) -> Result<f64> {
    let (fy0, _) = f(guess);
    if fy0 == target {
        return Ok(guess);
    }
    let mut r = radius.max(1e-12) * 1.25 + 1e-9;
    let (mut lo, mut hi);
    let mut tries = 0;
    loop {
        lo = guess - r;
        hi = guess + r;
        if f(lo).0 <= target && f(hi).0 >= target {
            break;
        }
        r *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::RootFind {
                at: target,
                detail: "no sign change; the map is not increasing".into(),
            });
        }
    }
    let mut y = guess.clamp(lo, hi);
    for _ in 0..200 {
        let (fy, dfy) = f(y);
        let res = fy - target;
        if res == 0.0 {
            return Ok(y);
        }
        if res > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let newton = if dfy > 0.0 { y - res / dfy } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - y).abs();
        y = next;
        if step <= tol * 1e-3 * (1.0 + y.abs()) || hi - lo <= tol * 1e-3 {
            return Ok(y);
        }
    }
    if hi - lo <= tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::RootFind { at: target, detail: "iteration limit reached".into() })
    }
}

/// Lazy inverse of an increasing map.
pub struct Inverse<M> {
    pub map: M,
    pub radius: f64,
    pub tol: f64,
}

impl<M: Map1> Inverse<M> {
    pub fn new(map: M, tol: f64) -> Self {
        let radius = map.displacement_bound().unwrap_or(1.0);
        Inverse { map, radius, tol }
    }

    pub fn try_jet(&self, x: f64, order: usize) -> Result<Jet<f64>> {
        let y = solve_increasing(
            |y| {
                let j = self.map.jet(y, 1);
                (j.d[0], j.d[1])
            },
            x,
            x,
            self.radius,
            self.tol,
        )?;
        if order == 0 {
            return Ok(Jet::constant(x, y, 0));
        }
        let mut inv = invert_jet(&self.map.jet(y, order))?;
        inv.base = x;
        Ok(inv)
    }
}

impl<M: Map1> Map1 for Inverse<M> {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        self.try_jet(x, order)
            .unwrap_or_else(|e| panic!("inverse evaluation failed: {e}"))
    }
    fn displacement_bound(&self) -> Option<f64> {
        Some(self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_cubic_perturbation() {
        let f = FnMap::with_bound(
            |x: f64, order| {
                let mut d = vec![x + 0.1 * x * x * x, 1.0 + 0.3 * x * x, 0.6 * x, 0.6];
                d.truncate(order + 1);
                d.resize(order + 1, 0.0);
                Jet::new(x, d)
            },
            10.0,
        );
        let inv = Inverse::new(&f, 1e-12);
        for x in [-1.5, 0.0, 0.3, 2.0] {
            let y = inv.value(x);
            assert!((f.value(y) - x).abs() < 1e-13);
        }
        let j = inv.jet(0.0, 3);
        assert!((j.d[1] - 1.0).abs() < 1e-14);
        assert!((j.d[3] + 0.6).abs() < 1e-12);
    }

    #[test]
    fn composite_applies_rightmost_first() {
        let t = Translation(1.0);
        let s = Scaling(2.0);
        let c = Composite::new(vec![&t, &s]);
        assert_eq!(c.value(3.0), 7.0);
        assert_eq!(c.jet(3.0, 1).d[1], 2.0);
    }
}
