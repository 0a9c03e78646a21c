//! Truncated Taylor series arithmetic. Closed-form maps (bumps, blends, the
//! plateau field) get their derivative jets by running their formulas on
//! series instead of scalars.

use std::ops::{Add, Mul, Neg, Sub};

use crate::jetcalc::Jet;
use crate::scalar::Scalar;

/// Coefficients `c[i] = f^{(i)}(x₀)/i!` up to a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub c: Vec<T>,
}

fn factorial<T: Scalar>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::int(i as u64))
}

impl<T: Scalar> Series<T> {
    pub fn constant(v: T, order: usize) -> Self {
        let mut c = vec![T::zero(); order + 1];
        c[0] = v;
        Series { c }
    }

    /// The variable `x` expanded at `x0`.
    pub fn variable(x0: T, order: usize) -> Self {
        let mut s = Self::constant(x0, order);
        if order >= 1 {
            s.c[1] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    pub fn from_jet(jet: &Jet<T>) -> Self {
        let c = jet.d.iter().enumerate().map(|(i, &v)| v / factorial::<T>(i)).collect();
        Series { c }
    }

    pub fn to_jet(&self, base: T) -> Jet<T> {
        let d = self.c.iter().enumerate().map(|(i, &v)| v * factorial::<T>(i)).collect();
        Jet::new(base, d)
    }

    pub fn scale(&self, s: T) -> Self {
        Series { c: self.c.iter().map(|&v| v * s).collect() }
    }

    pub fn add_const(&self, v: T) -> Self {
        let mut out = self.clone();
        out.c[0] += v;
        out
    }

    pub fn recip(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![T::zero(); n];
        b[0] = T::one() / a0;
        for k in 1..n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += self.c[j] * b[k - j];
            }
            b[k] = -acc / a0;
        }
        Series { c: b }
    }

    pub fn div(&self, other: &Self) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![T::zero(); n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += T::int(j as u64) * self.c[j] * e[k - j];
            }
            e[k] = acc / T::int(k as u64);
        }
        Series { c: e }
    }

    /// Coefficient-wise product with a scalar function's series evaluated at
    /// this series: returns `f∘self` given the normalised derivatives of `f`
    /// at `self.value()`.
    pub fn compose_outer(&self, outer: &Series<T>) -> Self {
        // Horner in the shifted variable δ = self − self.value().
        let n = self.c.len();
        let mut delta = self.clone();
        delta.c[0] = T::zero();
        let mut acc = Series::constant(outer.c[n - 1], n - 1);
        for i in (0..n - 1).rev() {
            acc = &acc * &delta;
            acc.c[0] += outer.c[i];
        }
        acc
    }
}

impl<'a, T: Scalar> Mul for &'a Series<T> {
    type Output = Series<T>;
    fn mul(self, rhs: Self) -> Series<T> {
        let n = self.c.len().min(rhs.c.len());
        let mut c = vec![T::zero(); n];
        for (i, ci) in c.iter_mut().enumerate() {
            let mut acc = T::zero();
            for j in 0..=i {
                acc += self.c[j] * rhs.c[i - j];
            }
            *ci = acc;
        }
        Series { c }
    }
}

impl<'a, T: Scalar> Add for &'a Series<T> {
    type Output = Series<T>;
    fn add(self, rhs: Self) -> Series<T> {
        Series { c: self.c.iter().zip(&rhs.c).map(|(a, b)| *a + *b).collect() }
    }
}

impl<'a, T: Scalar> Sub for &'a Series<T> {
    type Output = Series<T>;
    fn sub(self, rhs: Self) -> Series<T> {
        Series { c: self.c.iter().zip(&rhs.c).map(|(a, b)| *a - *b).collect() }
    }
}

impl<'a, T: Scalar> Neg for &'a Series<T> {
    type Output = Series<T>;
    fn neg(self) -> Series<T> {
        Series { c: self.c.iter().map(|a| -*a).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable_matches_exponential_jet() {
        let s = Series::variable(0.3f64, 5).exp();
        let jet = s.to_jet(0.3);
        for d in &jet.d {
            assert!((d - 0.3f64.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn reciprocal_round_trip() {
        let s = Series { c: vec![2.0f64, 0.5, -1.0, 0.25] };
        let one = &s * &s.recip();
        assert!((one.c[0] - 1.0).abs() < 1e-15);
        for v in &one.c[1..] {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn outer_composition_of_square() {
        // (1 + x)^2 at x0 = 0 through the outer series of y ↦ y² at y = 1.
        let inner = Series::variable(0.0f64, 3).add_const(1.0);
        let outer = Series { c: vec![1.0, 2.0, 1.0, 0.0] };
        let s = inner.compose_outer(&outer);
        assert_eq!(s.c, vec![1.0, 2.0, 1.0, 0.0]);
    }
}
