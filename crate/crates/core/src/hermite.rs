//! Two-point Hermite interpolation of order `2k+1`: on a cell `[x₀, x₀+h]` the
//! unique polynomial of degree `2k+1` matching derivatives `0..=k` at both ends.

use std::sync::OnceLock;

use crate::jetcalc::MAX_ORDER;
use crate::scalar::Scalar;

fn binom(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Inverse of the block `C(j, i)` for `i ∈ 0..=k`, `j ∈ k+1..=2k+1`, which maps
/// the upper monomial coefficients to normalised derivatives at `t = 1`.
fn upper_inverse(k: usize) -> &'static [Vec<f64>] {
    static CACHE: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| (0..=MAX_ORDER).map(invert_block).collect());
    &all[k]
}

fn invert_block(k: usize) -> Vec<Vec<f64>> {
    let n = k + 1;
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|c| binom(k + 1 + c, i)).collect();
            row.extend((0..n).map(|c| if c == i { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty pivot range");
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Monomial coefficients in the cell variable `t ∈ [0,1]` for derivative data
/// `left`, `right` (orders `0..=k`, with respect to `x`) on a cell of width `h`.
pub fn cell_coefficients<T: Scalar>(left: &[T], right: &[T], h: T) -> Vec<T> {
    let k = left.len() - 1;
    let mut scaled_l = Vec::with_capacity(k + 1);
    let mut scaled_r = Vec::with_capacity(k + 1);
    let mut hp = T::one();
    let mut fact = T::one();
    for i in 0..=k {
        if i > 0 {
            hp *= h;
            fact *= T::int(i as u64);
        }
        scaled_l.push(left[i] * hp / fact);
        scaled_r.push(right[i] * hp / fact);
    }
    let mut coeffs = scaled_l.clone();
    let mut rhs = vec![T::zero(); k + 1];
    for (i, r) in rhs.iter_mut().enumerate() {
        let mut acc = scaled_r[i];
        for (j, l) in scaled_l.iter().enumerate() {
            acc -= T::lit(binom(j, i)) * *l;
        }
        *r = acc;
    }
    let inv = upper_inverse(k);
    for row in inv.iter() {
        let mut acc = T::zero();
        for (m, r) in row.iter().zip(&rhs) {
            acc += T::lit(*m) * *r;
        }
        coeffs.push(acc);
    }
    coeffs
}

/// Derivatives of orders `0..=order` with respect to `x` at cell position `t`.
pub fn eval_coefficients<T: Scalar>(coeffs: &[T], h: T, t: T, order: usize) -> Vec<T> {
    let deg = coeffs.len() - 1;
    let mut out = Vec::with_capacity(order + 1);
    let mut work = coeffs.to_vec();
    let mut hp = T::one();
    for m in 0..=order {
        if m > 0 {
            // Differentiate the polynomial in place.
            for j in 0..work.len() - 1 {
                work[j] = work[j + 1] * T::int((j + 1) as u64);
            }
            work.pop();
            hp *= h;
        }
        let mut acc = T::zero();
        for c in work.iter().rev() {
            acc = acc * t + *c;
        }
        out.push(if m == 0 { acc } else { acc / hp });
        if work.is_empty() || m >= deg {
            out.resize(order + 1, T::zero());
            break;
        }
    }
    out
}

/// Interpolated derivatives at `x = x₀ + t·h`.
pub fn interpolate<T: Scalar>(left: &[T], right: &[T], h: T, t: T, order: usize) -> Vec<T> {
    eval_coefficients(&cell_coefficients(left, right, h), h, t, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64], x: f64, m: usize) -> f64 {
        let mut c = coeffs.to_vec();
        for _ in 0..m {
            c = c.iter().enumerate().skip(1).map(|(j, v)| v * j as f64).collect();
        }
        c.iter().rev().fold(0.0, |acc, v| acc * x + v)
    }

    #[test]
    fn reproduces_polynomials_of_full_degree() {
        for k in 0..=5usize {
            let coeffs: Vec<f64> = (0..=2 * k + 1).map(|j| 0.3 * j as f64 - 0.7).collect();
            let (x0, h) = (0.4, 0.35);
            let left: Vec<f64> = (0..=k).map(|m| poly(&coeffs, x0, m)).collect();
            let right: Vec<f64> = (0..=k).map(|m| poly(&coeffs, x0 + h, m)).collect();
            for &t in &[0.0, 0.25, 0.5, 0.9, 1.0] {
                let got = interpolate(&left, &right, h, t, k);
                for m in 0..=k {
                    let want = poly(&coeffs, x0 + t * h, m);
                    assert!((got[m] - want).abs() < 1e-9 * (1.0 + want.abs()), "k={k} m={m}");
                }
            }
        }
    }
}
