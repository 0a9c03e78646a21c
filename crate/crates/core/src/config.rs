//! The single record holding every numerical tolerance and resolution knob.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed mismatch between a jet's base and the value it is composed at.
    pub base_match: f64,
    /// Midpoint interpolation residual that triggers grid doubling.
    pub sample_residual: f64,
    /// Node cap for adaptive sampling.
    pub max_nodes: usize,
    /// Endpoint jets of a compact map must vanish to this level.
    pub tail_slack: f64,
    /// Jets at or below this magnitude count as zero when locating supports.
    pub support_slack: f64,
    /// Abscissa tolerance of the Newton/bisection inverse.
    pub root_abscissa: f64,
    /// Evaluation points per node interval for norms.
    pub eval_density: usize,
    /// Number of dyadic separation scales in the Hölder estimator.
    pub holder_scales: usize,
    /// Relative allowance granted to estimated inequalities.
    pub estimator_slack: f64,
    /// Absolute and relative local error targets of the flow integrator.
    pub ode_abs: f64,
    pub ode_rel: f64,
    /// Deviation from a pure translation tolerated by the conjugator.
    pub tol_b: f64,
    /// Agreement required where the pieces of λ overlap.
    pub overlap: f64,
    /// Jets at window ends must vanish to this level before cutting.
    pub surgery: f64,
    /// Stopping residual of the fixed-point iteration and its iteration cap.
    pub fixed_point: f64,
    pub max_iterations: usize,
    /// Residual a conjugacy certificate must meet.
    pub certificate: f64,
    /// Longest word `(Tv)^s (Tu)^{−s}` the conjugacy construction may use.
    pub max_word: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            base_match: 1e-9,
            sample_residual: 1e-9,
            max_nodes: 1 << 16,
            tail_slack: 1e-10,
            support_slack: 0.0,
            root_abscissa: 1e-12,
            eval_density: 8,
            holder_scales: 24,
            estimator_slack: 0.01,
            ode_abs: 1e-12,
            ode_rel: 1e-12,
            tol_b: 1e-7,
            overlap: 1e-7,
            surgery: 1e-9,
            fixed_point: 1e-6,
            max_iterations: 200,
            certificate: 1e-5,
            max_word: 100_000,
        }
    }
}

impl Tolerances {
    /// Every tolerance positive, every count nonzero.
    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            self.base_match,
            self.sample_residual,
            self.tail_slack,
            self.root_abscissa,
            self.estimator_slack,
            self.ode_abs,
            self.ode_rel,
            self.tol_b,
            self.overlap,
            self.surgery,
            self.fixed_point,
            self.certificate,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.support_slack < 0.0 {
            return Err(crate::Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.max_nodes < 3 || self.eval_density == 0 || self.holder_scales == 0 {
            return Err(crate::Error::InvalidParameter("resolution knobs must be nonzero".into()));
        }
        Ok(())
    }
}
