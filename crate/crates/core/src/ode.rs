//! Dormand–Prince 5(4) with embedded error control, for the small systems the
//! flow module integrates.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    /// Steps shorter than this fraction of the time span count as underflow.
    pub min_step: f64,
}

impl OdeOptions {
    pub fn new(atol: f64, rtol: f64) -> Self {
        OdeOptions { atol, rtol, max_steps: 1_000_000, min_step: 1e-14 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) and
/// returns `y(t1)`.
pub fn integrate(
    f: impl Fn(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
) -> Result<Vec<f64>> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0.to_vec());
    }
    let dir = span.signum();
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = dir * span.abs().min(0.1);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    k[0] = f(t, &y);
    let min_step = opts.min_step * span.abs().min(1.0);
    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut stage = vec![0.0; dim];
        for s in 1..7 {
            for (i, v) in stage.iter_mut().enumerate() {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                *v = acc;
            }
            k[s] = f(t + C[s] * h, &stage);
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        let y5 = stage;
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut e = 0.0;
            for s in 0..7 {
                e += h * (B5[s] - B4[s]) * k[s][i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        if err <= 1.0 {
            t = if (t + h - t1) * dir >= 0.0 { t1 } else { t + h };
            y = y5;
            k[0] = k[6].clone();
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < min_step && (t1 - t) * dir > min_step {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Err(Error::Integration("step limit reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let y = integrate(|_, y| vec![y[0]], 0.0, &[1.0], 2.0, &OdeOptions::new(1e-13, 1e-13)).unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-11);
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let y = integrate(|_, y| vec![y[1], -y[0]], 0.0, &[0.0, 1.0], -1.0, &OdeOptions::new(1e-13, 1e-13))
            .unwrap();
        assert!((y[0] + 1f64.sin()).abs() < 1e-11);
        assert!((y[1] - 1f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn constant_field_is_exact() {
        let y = integrate(|_, _| vec![1.0], 0.0, &[0.25], 1.5, &OdeOptions::new(1e-12, 1e-12)).unwrap();
        assert_eq!(y[0], 1.75);
    }
}
