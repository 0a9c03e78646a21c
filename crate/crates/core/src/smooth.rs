//! Smooth building blocks evaluated on truncated series: the flat function
//! `S(t) = exp(−1/t)`, the smoothstep built from it, and the normalised
//! exponential bump.

use crate::series::Series;

/// `S(t) = exp(−1/t)` for `t > 0`, zero otherwise.
pub fn flat(t: &Series<f64>) -> Series<f64> {
    if t.value() <= 0.0 {
        return Series::constant(0.0, t.order());
    }
    (-&t.recip()).exp()
}

/// `S(t)/(S(t) + S(1−t))`: zero for `t ≤ 0`, one for `t ≥ 1`, smooth between.
pub fn smoothstep(t: &Series<f64>) -> Series<f64> {
    let v = t.value();
    if v <= 0.0 {
        return Series::constant(0.0, t.order());
    }
    if v >= 1.0 {
        return Series::constant(1.0, t.order());
    }
    let a = flat(t);
    let b = flat(&(-t).add_const(1.0));
    a.div(&(&a + &b))
}

pub fn smoothstep_value(t: f64) -> f64 {
    smoothstep(&Series::constant(t, 0)).value()
}

/// `exp(1 − 1/(1 − t²))` on `|t| < 1`, zero elsewhere; its maximum is 1 at 0.
pub fn bump(t: &Series<f64>) -> Series<f64> {
    let v = t.value();
    if v.abs() >= 1.0 {
        return Series::constant(0.0, t.order());
    }
    let one_minus = (-&(t * t)).add_const(1.0);
    (-&one_minus.recip()).add_const(1.0).exp()
}

pub fn bump_value(t: f64) -> f64 {
    bump(&Series::constant(t, 0)).value()
}

/// Series of `(x − c)/r` at `x`.
pub fn affine(x: f64, c: f64, r: f64, order: usize) -> Series<f64> {
    Series::variable(x, order).add_const(-c).scale(1.0 / r)
}
