//! Orientation-preserving `C^k` diffeomorphisms of the line stored as jets of
//! the displacement `u = f − Id` on a uniform grid, with Hermite interpolation
//! of order `2k+1` between nodes and an exact tail rule beyond the grid.

mod fragment;
mod preset;

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fragment::{fragment, partition_of_unity, Cover, Fragmentation, Partition};
pub use preset::{from_preset, BumpMap, Preset, WiggleMap};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermite::{cell_coefficients, eval_coefficients};
use crate::jetcalc::Jet;
use crate::map::{Composite, Inverse, Map1};

/// Behaviour of the displacement outside the sampled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    /// Identity outside `[a, b]`.
    #[serde(rename = "compact")]
    Compact,
    /// Displacement 1-periodic; the grid is one period `[a, a+1]`.
    #[serde(rename = "periodic")]
    Periodic,
    /// Identity left of `a`, 1-periodic displacement right of `b − 1`; the
    /// last unit of the grid is the periodic window.
    #[serde(rename = "ep")]
    EventuallyPeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        Grid { a, b, n }
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.h()
    }

    /// Nodes per unit length.
    pub fn density(&self) -> f64 {
        (self.n - 1) as f64 / (self.b - self.a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diffeo1 {
    pub class: TailClass,
    pub grid: Grid,
    pub k: usize,
    /// `jets[i][m]` is the `m`-th derivative of the displacement at node `i`.
    pub jets: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<String>,
    #[serde(skip)]
    cells: OnceLock<Vec<Vec<f64>>>,
}

impl PartialEq for Diffeo1 {
    fn eq(&self, other: &Self) -> bool {
        self.class == other.class
            && self.grid == other.grid
            && self.k == other.k
            && self.jets == other.jets
            && self.meta == other.meta
    }
}

/// Where and how a map is resampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub class: TailClass,
    pub a: f64,
    pub b: f64,
    pub k: usize,
    pub n: usize,
}

impl SampleSpec {
    pub fn compact(a: f64, b: f64, k: usize, n: usize) -> Self {
        SampleSpec { class: TailClass::Compact, a, b, k, n: n.max(2) }
    }

    pub fn periodic(a: f64, k: usize, n: usize) -> Self {
        SampleSpec { class: TailClass::Periodic, a, b: a + 1.0, k, n: n.max(3) }
    }

    /// Eventually periodic with identity left of `a` and periodic tail right
    /// of `s`. The left end moves down so that `s` lands on a node with
    /// `cells_per_unit` cells per unit length.
    pub fn eventually_periodic(a: f64, s: f64, k: usize, cells_per_unit: usize) -> Self {
        let m = cells_per_unit.max(2) as f64;
        let b = s + 1.0;
        let cells = ((b - a) * m - 1e-9).ceil().max(m);
        SampleSpec {
            class: TailClass::EventuallyPeriodic,
            a: b - cells / m,
            b,
            k,
            n: cells as usize + 1,
        }
    }
}

fn displacement_of(map: &dyn Map1, x: f64, k: usize) -> Vec<f64> {
    let mut d = map.jet(x, k).d;
    d[0] -= x;
    if k >= 1 {
        d[1] -= 1.0;
    }
    d
}

impl Diffeo1 {
    /// Builds from raw parts and checks every invariant.
    pub fn from_parts(
        class: TailClass,
        grid: Grid,
        k: usize,
        jets: Vec<Vec<f64>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let f = Diffeo1 { class, grid, k, jets, meta: None, cells: OnceLock::new() };
        f.validate(tol)?;
        Ok(f)
    }

    fn raw(class: TailClass, grid: Grid, k: usize, jets: Vec<Vec<f64>>) -> Self {
        Diffeo1 { class, grid, k, jets, meta: None, cells: OnceLock::new() }
    }

    pub fn identity(class: TailClass, a: f64, b: f64, n: usize, k: usize) -> Self {
        let b = if class == TailClass::Periodic { a + 1.0 } else { b };
        let n = n.max(2);
        Self::raw(class, Grid::new(a, b, n), k, vec![vec![0.0; k + 1]; n])
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = Some(meta.into());
        self
    }

    pub fn is_identity(&self) -> bool {
        self.jets.iter().all(|j| j.iter().all(|v| *v == 0.0))
    }

    /// The interval outside of which the tail rule holds by construction.
    pub fn core(&self) -> Option<(f64, f64)> {
        match self.class {
            TailClass::Compact => Some((self.grid.a, self.grid.b)),
            TailClass::Periodic => None,
            TailClass::EventuallyPeriodic => Some((self.grid.a, self.grid.b - 1.0)),
        }
    }

    /// Grid cells in one unit of length (the periodic window of an
    /// eventually periodic map).
    pub fn window_nodes(&self) -> usize {
        ((self.grid.n - 1) as f64 / (self.grid.b - self.grid.a)).round() as usize
    }

    /// The in-grid abscissa carrying the same displacement as `x`, or `None`
    /// where the displacement vanishes.
    fn locate(&self, x: f64) -> Option<f64> {
        let Grid { a, b, .. } = self.grid;
        match self.class {
            TailClass::Compact => (x >= a && x <= b).then_some(x),
            TailClass::Periodic => {
                if x >= a && x <= b {
                    Some(x)
                } else {
                    Some(a + (x - a).rem_euclid(1.0))
                }
            }
            TailClass::EventuallyPeriodic => {
                if x < a {
                    None
                } else if x <= b {
                    Some(x)
                } else {
                    Some(x - (x - b).ceil())
                }
            }
        }
    }

    fn cells(&self) -> &Vec<Vec<f64>> {
        self.cells.get_or_init(|| {
            let h = self.grid.h();
            self.jets
                .windows(2)
                .map(|w| {
                    if w[0].iter().chain(&w[1]).all(|v| *v == 0.0) {
                        Vec::new()
                    } else {
                        cell_coefficients(&w[0], &w[1], h)
                    }
                })
                .collect()
        })
    }

    /// Displacement derivatives of orders `0..=order` at `x`.
    pub fn displacement(&self, x: f64, order: usize) -> Vec<f64> {
        let order = order.min(self.k);
        let Some(y) = self.locate(x) else {
            return vec![0.0; order + 1];
        };
        let h = self.grid.h();
        let n = self.grid.n;
        let pos = (y - self.grid.a) / h;
        let i = (pos.floor().max(0.0) as usize).min(n - 2);
        let t = pos - i as f64;
        let coeffs = &self.cells()[i];
        if coeffs.is_empty() {
            return vec![0.0; order + 1];
        }
        if t == 0.0 {
            return self.jets[i][..=order].to_vec();
        }
        eval_coefficients(coeffs, h, t, order)
    }

    /// Displacement derivatives at fraction `t ∈ [0,1]` of cell `i`. Depends
    /// on the grid only through its step, so translated copies agree bit for bit.
    pub fn displacement_in_cell(&self, i: usize, t: f64, order: usize) -> Vec<f64> {
        let order = order.min(self.k);
        let coeffs = &self.cells()[i];
        if coeffs.is_empty() {
            return vec![0.0; order + 1];
        }
        if t == 0.0 {
            return self.jets[i][..=order].to_vec();
        }
        if t == 1.0 {
            return self.jets[i + 1][..=order].to_vec();
        }
        eval_coefficients(coeffs, self.grid.h(), t, order)
    }

    /// Jet of `f` at `x` (the map, not its displacement).
    pub fn evaluate(&self, x: f64, order: usize) -> Jet<f64> {
        let mut d = self.displacement(x, order);
        d[0] += x;
        if d.len() > 1 {
            d[1] += 1.0;
        }
        Jet::new(x, d)
    }

    /// Largest node displacement, a proxy for `‖f − Id‖₀`.
    pub fn node_sup(&self, order: usize) -> f64 {
        self.jets.iter().map(|j| j[order].abs()).fold(0.0, f64::max)
    }

    /// Checks orientation and the tail law of the class.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let Grid { a, b, n } = self.grid;
        if n < 2 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Malformed(format!("degenerate grid [{a}, {b}] with {n} nodes")));
        }
        if self.jets.len() != n || self.jets.iter().any(|j| j.len() != self.k + 1) {
            return Err(Error::Malformed("jet table does not match grid and order".into()));
        }
        if self.jets.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("non-finite jet entry".into()));
        }
        if self.k >= 1 {
            if let Some((i, _)) = self.jets.iter().enumerate().find(|(_, j)| !(1.0 + j[1] > 0.0)) {
                return Err(Error::precondition(
                    "orientation",
                    format!("1 + u′ ≤ 0 at node x = {}", self.grid.node(i)),
                ));
            }
        }
        let close = |p: &[f64], q: &[f64]| {
            p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol.tail_slack * (1.0 + x.abs()))
        };
        match self.class {
            TailClass::Compact => {
                for end in [&self.jets[0], &self.jets[n - 1]] {
                    if end.iter().any(|v| v.abs() > tol.tail_slack) {
                        return Err(Error::precondition(
                            "tail",
                            "compact displacement does not vanish at the core ends",
                        ));
                    }
                }
            }
            TailClass::Periodic => {
                if ((b - a) - 1.0).abs() > 1e-12 {
                    return Err(Error::Malformed("periodic grid must span one unit".into()));
                }
                if !close(&self.jets[0], &self.jets[n - 1]) {
                    return Err(Error::precondition("tail", "periodic jets disagree across the period"));
                }
            }
            TailClass::EventuallyPeriodic => {
                let m = (n - 1) as f64 / (b - a);
                if (m - m.round()).abs() > 1e-6 || m.round() as usize >= n {
                    return Err(Error::Malformed(
                        "eventually periodic grid must put b − 1 on a node".into(),
                    ));
                }
                if self.jets[0].iter().any(|v| v.abs() > tol.tail_slack) {
                    return Err(Error::precondition("tail", "displacement does not vanish at the left end"));
                }
                let w = self.window_nodes();
                if !close(&self.jets[n - 1 - w], &self.jets[n - 1]) {
                    return Err(Error::precondition("tail", "tail jets disagree across the period"));
                }
            }
        }
        Ok(())
    }

    /// `T_b f T_{−b}`: the grid moves by `b`, jets are unchanged.
    pub fn translate_conjugate(&self, b: f64) -> Diffeo1 {
        let mut g = Self::raw(
            self.class,
            Grid::new(self.grid.a + b, self.grid.b + b, self.grid.n),
            self.k,
            self.jets.clone(),
        );
        g.meta = self.meta.clone();
        g
    }

    /// Smallest closed interval outside of which the tail law holds, up to one
    /// grid cell; `None` for periodic maps and for the identity.
    pub fn support_interval(&self, slack: f64) -> Option<(f64, f64)> {
        if self.class == TailClass::Periodic {
            return None;
        }
        let nonzero = |j: &Vec<f64>| j.iter().any(|v| v.abs() > slack);
        let first = self.jets.iter().position(nonzero)?;
        let lo = self.grid.node(first.saturating_sub(1));
        let hi = match self.class {
            TailClass::EventuallyPeriodic => self.grid.b - 1.0,
            _ => {
                let last = self.jets.iter().rposition(nonzero)?;
                self.grid.node((last + 1).min(self.grid.n - 1))
            }
        };
        Some((lo, hi.max(lo)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diffeomorphism serialises")
    }

    pub fn from_json(text: &str, tol: &Tolerances) -> Result<Self> {
        let source: DiffeoSource =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        source.build(tol)
    }
}

impl Map1 for Diffeo1 {
    fn jet(&self, x: f64, order: usize) -> Jet<f64> {
        self.evaluate(x, order)
    }

    fn displacement_bound(&self) -> Option<f64> {
        Some(self.node_sup(0) * 1.1 + 1e-9)
    }
}

/// A diffeomorphism file: explicit jets or a preset shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiffeoSource {
    Preset { preset: String, #[serde(default)] params: serde_json::Value },
    Explicit(Diffeo1),
}

impl DiffeoSource {
    pub fn build(self, tol: &Tolerances) -> Result<Diffeo1> {
        match self {
            DiffeoSource::Explicit(f) => {
                f.validate(tol)?;
                Ok(f)
            }
            DiffeoSource::Preset { preset, params } => from_preset(&preset, &params, tol),
        }
    }
}

/// Largest midpoint residual of an interpolated table against direct values.
/// Largest relative mismatch between the interpolant and direct evaluations
/// at `points`.
fn probe_residual(f: &Diffeo1, points: &[f64], direct: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(direct)
        .map(|(&x, d)| {
            let interp = f.displacement(x, f.k);
            d.iter().zip(&interp).map(|(d, p)| (d - p).abs() / (1.0 + d.abs())).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn enforce_class(class: TailClass, grid: &Grid, jets: &mut [Vec<f64>], tol: &Tolerances) -> Result<()> {
    let n = jets.len();
    match class {
        TailClass::Compact => {
            for idx in [0, n - 1] {
                if jets[idx].iter().any(|v| v.abs() > tol.tail_slack) {
                    return Err(Error::precondition(
                        "sample",
                        format!("displacement does not vanish at the core end x = {}", grid.node(idx)),
                    ));
                }
                jets[idx].iter_mut().for_each(|v| *v = 0.0);
            }
        }
        TailClass::Periodic => {
            let first = jets[0].clone();
            let agree = first
                .iter()
                .zip(&jets[n - 1])
                .all(|(p, q)| (p - q).abs() <= 1e-8 * (1.0 + p.abs()));
            if !agree {
                return Err(Error::precondition("sample", "map does not commute with unit translation"));
            }
            jets[n - 1] = first;
        }
        TailClass::EventuallyPeriodic => {
            if jets[0].iter().any(|v| v.abs() > tol.tail_slack) {
                return Err(Error::precondition("sample", "displacement does not vanish at the left end"));
            }
            jets[0].iter_mut().for_each(|v| *v = 0.0);
            let w = ((n - 1) as f64 / (grid.b - grid.a)).round() as usize;
            let start = jets[n - 1 - w].clone();
            let agree = start
                .iter()
                .zip(&jets[n - 1])
                .all(|(p, q)| (p - q).abs() <= 1e-8 * (1.0 + p.abs()));
            if !agree {
                return Err(Error::precondition("sample", "tail does not commute with unit translation"));
            }
            jets[n - 1] = start;
        }
    }
    Ok(())
}

/// Residuals above this are treated as pre-asymptotic, where growth under
/// refinement is not a sign of rounding.
const ROUNDOFF_FLOOR_GUARD: f64 = 1e-2;

/// Samples `map` on the grid described by `spec`, doubling the node count
/// until the residual meets `tol.sample_residual`, stops improving, or the
/// node cap is reached, and returns the best grid visited.
///
/// The residual is taken at cell midpoints and quarter points: odd derivatives of the interpolation error vanish at midpoints to
/// leading order, so midpoints alone overstate the accuracy of `u′`, `u‴`.
/// Quarter points are the next grid's midpoints and are reused on refining.
pub fn sample_with_residual(
    spec: SampleSpec,
    map: &dyn Map1,
    tol: &Tolerances,
) -> Result<(Diffeo1, f64)> {
    let k = spec.k;
    let eval = |xs: &[f64]| -> Vec<Vec<f64>> { xs.par_iter().map(|&x| displacement_of(map, x, k)).collect() };
    let mut grid = Grid::new(spec.a, spec.b, spec.n.max(2));
    let mut jets = eval(&(0..grid.n).map(|i| grid.node(i)).collect::<Vec<_>>());
    enforce_class(spec.class, &grid, &mut jets, tol)?;
    let mut mid_x: Vec<f64> = (0..grid.n - 1).map(|i| grid.midpoint(i)).collect();
    let mut mids = eval(&mid_x);
    let mut best: Option<(Diffeo1, f64)> = None;
    let mut last_res = f64::INFINITY;
    let mut decreases = 0usize;
    loop {
        let finer = Grid::new(grid.a, grid.b, 2 * grid.n - 1);
        let quarter_x: Vec<f64> = (0..finer.n - 1).map(|i| finer.midpoint(i)).collect();
        let quarters = eval(&quarter_x);
        let f = Diffeo1::raw(spec.class, grid, k, jets);
        let residual = probe_residual(&f, &mid_x, &mids).max(probe_residual(&f, &quarter_x, &quarters));
        if residual > last_res {
            // Rounding in the top derivatives grows like h^{−k}; once refining
            // turns a steadily falling, already small residual around, the
            // coarser grid is the better sample.
            if decreases >= 2 && last_res < ROUNDOFF_FLOOR_GUARD {
                break;
            }
            decreases = 0;
        } else {
            decreases += 1;
        }
        last_res = residual;
        let done = residual <= tol.sample_residual || finer.n > tol.max_nodes;
        if best.as_ref().map_or(true, |(_, r)| residual <= *r) {
            best = Some((f.clone(), residual));
        }
        if done {
            break;
        }
        let old = f.jets;
        let mut merged = Vec::with_capacity(finer.n);
        for (node, mid) in old.into_iter().zip(mids.into_iter().map(Some).chain(std::iter::once(None))) {
            merged.push(node);
            if let Some(m) = mid {
                merged.push(m);
            }
        }
        grid = finer;
        jets = merged;
        mid_x = quarter_x;
        mids = quarters;
    }
    let (f, residual) = best.expect("at least one grid is sampled");
    check_orientation(&f)?;
    Ok((f, residual))
}

fn check_orientation(f: &Diffeo1) -> Result<()> {
    if f.k >= 1 {
        if let Some(i) = f.jets.iter().position(|j| !(1.0 + j[1] > 0.0)) {
            return Err(Error::precondition(
                "orientation",
                format!("1 + u′ ≤ 0 at node x = {}", f.grid.node(i)),
            ));
        }
    }
    Ok(())
}

pub fn sample(spec: SampleSpec, map: &dyn Map1, tol: &Tolerances) -> Result<Diffeo1> {
    sample_with_residual(spec, map, tol).map(|(f, _)| f)
}

fn cells_per_unit(f: &Diffeo1) -> usize {
    f.grid.density().round().max(2.0) as usize
}

/// `f ∘ g`, resampled.
pub fn compose(f: &Diffeo1, g: &Diffeo1, tol: &Tolerances) -> Result<Diffeo1> {
    if f.k != g.k {
        return Err(Error::Incompatible(format!("jet orders {} and {}", f.k, g.k)));
    }
    let k = f.k;
    let map = Composite::new(vec![f, g]);
    use TailClass::*;
    let spec = match (f.class, g.class) {
        (Compact, Compact) => {
            let a = f.grid.a.min(g.grid.a);
            let b = f.grid.b.max(g.grid.b);
            let h = f.grid.h().min(g.grid.h());
            SampleSpec::compact(a, b, k, ((b - a) / h).ceil() as usize + 1)
        }
        (Periodic, Periodic) => SampleSpec::periodic(g.grid.a, k, f.grid.n.max(g.grid.n)),
        (Periodic, _) | (_, Periodic) => {
            return Err(Error::Incompatible(
                "periodic maps compose only with periodic maps".into(),
            ))
        }
        _ => {
            let (fa, fs) = f.core().expect("non-periodic");
            let (ga, gs) = g.core().expect("non-periodic");
            let reach = g.displacement_bound().unwrap_or(0.0);
            let s = gs.max(fs + reach);
            let m = cells_per_unit(f).max(cells_per_unit(g));
            SampleSpec::eventually_periodic(fa.min(ga), s, k, m)
        }
    };
    sample(spec, &map, tol)
}

/// `f⁻¹`, resampled with a pointwise safeguarded Newton solve.
pub fn inverse(f: &Diffeo1, tol: &Tolerances) -> Result<Diffeo1> {
    let inv = Inverse::new(f, tol.root_abscissa);
    // Surface root-finding failures as errors rather than panics.
    for i in 0..f.grid.n {
        inv.try_jet(f.grid.node(i), 0)?;
    }
    let spec = match f.class {
        TailClass::Compact => SampleSpec::compact(f.grid.a, f.grid.b, f.k, f.grid.n),
        TailClass::Periodic => SampleSpec::periodic(f.grid.a, f.k, f.grid.n),
        TailClass::EventuallyPeriodic => {
            let (a, s) = f.core().expect("eventually periodic core");
            let s_out = f.value(s).max(s);
            SampleSpec::eventually_periodic(a, s_out, f.k, cells_per_unit(f))
        }
    };
    sample(spec, &inv, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn bump(eps: f64, c: f64, r: f64) -> Diffeo1 {
        from_preset(
            "smooth_bump_displacement",
            &json!({"eps": eps, "c": c, "r": r, "k": 2}),
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn identity_evaluates_to_identity() {
        let f = Diffeo1::identity(TailClass::Compact, 0.0, 1.0, 5, 3);
        let j = f.evaluate(0.3, 3);
        assert_eq!(j.d, vec![0.3, 1.0, 0.0, 0.0]);
        assert_eq!(f.evaluate(5.0, 1).d, vec![5.0, 1.0]);
        assert_eq!(f.support_interval(0.0), None);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let tol = Tolerances::default();
        let f = bump(0.05, 0.5, 1.0);
        let finv = inverse(&f, &tol).unwrap();
        let id = compose(&f, &finv, &tol).unwrap();
        for i in 0..=200 {
            let x = -0.6 + 2.2 * i as f64 / 200.0;
            assert!((id.value(x) - x).abs() < 1e-7);
        }
    }

    #[test]
    fn inverse_jets_satisfy_chain_rule() {
        let tol = Tolerances::default();
        let f = bump(0.05, 0.0, 1.0);
        let finv = inverse(&f, &tol).unwrap();
        for i in 0..f.grid.n {
            let x = f.grid.node(i);
            let fx = f.evaluate(x, 1);
            let gx = finv.evaluate(fx.d[0], 1);
            assert!((gx.d[1] * fx.d[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn support_of_bump_and_translation() {
        let f = bump(0.1, 1.0, 1.0);
        let (lo, hi) = f.support_interval(0.0).unwrap();
        let h = f.grid.h();
        assert!((lo - 0.0).abs() <= h && (hi - 2.0).abs() <= h, "{lo} {hi}");
        let g = f.translate_conjugate(3.0);
        let (lo2, hi2) = g.support_interval(0.0).unwrap();
        assert!((lo2 - lo - 3.0).abs() < 1e-12 && (hi2 - hi - 3.0).abs() < 1e-12);
        let back = g.translate_conjugate(-3.0);
        assert_eq!(back.jets, f.jets);
    }

    #[test]
    fn json_round_trip_preserves_values() {
        let f = bump(0.1, 1.0, 1.0);
        let text = f.to_json();
        let g = Diffeo1::from_json(&text, &Tolerances::default()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn periodic_and_compact_do_not_mix() {
        let tol = Tolerances::default();
        let p = Diffeo1::identity(TailClass::Periodic, 0.0, 1.0, 9, 2);
        let c = Diffeo1::identity(TailClass::Compact, 0.0, 1.0, 9, 2);
        assert!(matches!(compose(&p, &c, &tol), Err(Error::Incompatible(_))));
    }

    #[test]
    fn eventually_periodic_tail_rule() {
        let tol = Tolerances::default();
        let spec = SampleSpec::eventually_periodic(0.0, 2.0, 2, 16);
        // Identity left of 0, translation-commuting wiggle right of 2.
        let map = crate::map::FnMap::new(|x: f64, order| {
            let s = crate::smooth::smoothstep(&crate::series::Series::variable(x, order));
            let w = crate::series::Series::variable(x, order);
            let tau = std::f64::consts::TAU;
            let mut sin = w.clone();
            // sin(2πx) series by exponentials is overkill; use known derivatives.
            for (m, c) in sin.c.iter_mut().enumerate() {
                let phase = tau * x + m as f64 * std::f64::consts::FRAC_PI_2;
                let fact: f64 = (1..=m).map(|v| v as f64).product();
                *c = phase.sin() * tau.powi(m as i32) / fact;
            }
            let u = (&s * &sin).scale(0.01);
            let mut j = u.to_jet(x);
            j.d[0] += x;
            if order >= 1 {
                j.d[1] += 1.0;
            }
            j
        });
        let f = sample(spec, &map, &tol).unwrap();
        for x in [2.1, 2.5, 2.9] {
            assert!((f.value(x + 1.0) - f.value(x) - 1.0).abs() < 1e-10);
            assert!((f.value(x + 5.0) - f.value(x) - 5.0).abs() < 1e-10);
        }
        assert_eq!(f.value(-3.0), -3.0);
    }
}
