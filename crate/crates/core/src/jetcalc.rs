//! Finite-order derivative calculus: the Faà di Bruno composition rule and the
//! inverse-function recursion, with integer coefficient tables built by
//! symbolic differentiation.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest derivative order supported by the coefficient tables.
pub const MAX_ORDER: usize = 12;

/// Derivatives of orders `0..=k` of a real map at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet<T> {
    pub base: T,
    pub d: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn new(base: T, d: Vec<T>) -> Self {
        assert!(!d.is_empty(), "a jet carries at least the value");
        Jet { base, d }
    }

    /// Jet of the identity map at `x`.
    pub fn identity(x: T, order: usize) -> Self {
        let mut d = vec![T::zero(); order + 1];
        d[0] = x;
        if order >= 1 {
            d[1] = T::one();
        }
        Jet { base: x, d }
    }

    /// Jet of the constant map with value `c`.
    pub fn constant(x: T, c: T, order: usize) -> Self {
        let mut d = vec![T::zero(); order + 1];
        d[0] = c;
        Jet { base: x, d }
    }

    pub fn order(&self) -> usize {
        self.d.len() - 1
    }

    pub fn value(&self) -> T {
        self.d[0]
    }

    /// The prefix of orders `0..=order`.
    pub fn truncate(&self, order: usize) -> Self {
        Jet { base: self.base, d: self.d[..=order.min(self.order())].to_vec() }
    }

    /// Jet of `x ↦ f(x) + c`.
    pub fn shifted(mut self, c: T) -> Self {
        self.d[0] += c;
        self
    }

    /// Largest coordinate-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Jet<T>) -> T {
        self.d
            .iter()
            .zip(&other.d)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// One Faà di Bruno term `C · (f^{(i)}∘g) · Π_t g^{(j_t)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub blocks: usize,
    pub parts: Vec<usize>,
    pub coeff: u64,
}

impl TableRow {
    /// Interior rows are those with `1 < blocks < k`.
    pub fn is_interior(&self, k: usize) -> bool {
        self.blocks > 1 && self.blocks < k
    }
}

/// The order-`k` composition formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionTable {
    pub order: usize,
    pub rows: Vec<TableRow>,
}

impl CompositionTable {
    pub fn coefficient_sum(&self) -> u64 {
        self.rows.iter().map(|r| r.coeff).sum()
    }

    /// Rows indexed by the interior set (block count strictly between 1 and k).
    pub fn interior(&self) -> impl Iterator<Item = &TableRow> {
        let k = self.order;
        self.rows.iter().filter(move |r| r.is_interior(k))
    }
}

/// Builds the order-`k` table by differentiating the order-`(k−1)` formula:
/// `d/dx [(f^{(i)}∘g) Π g^{(j)}]` yields `(f^{(i+1)}∘g) g′ Π g^{(j)}` plus one
/// term per factor with that factor's order raised by one.
pub fn build_table(k: usize) -> Result<CompositionTable> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "table order {k} outside 1..={MAX_ORDER}"
        )));
    }
    let mut terms: BTreeMap<(usize, Vec<usize>), u64> = BTreeMap::new();
    terms.insert((1, vec![1]), 1);
    for _ in 1..k {
        let mut next: BTreeMap<(usize, Vec<usize>), u64> = BTreeMap::new();
        for ((i, parts), c) in &terms {
            let mut grown = parts.clone();
            grown.push(1);
            grown.sort_unstable();
            *next.entry((i + 1, grown)).or_insert(0) += c;
            for t in 0..parts.len() {
                let mut raised = parts.clone();
                raised[t] += 1;
                raised.sort_unstable();
                *next.entry((*i, raised)).or_insert(0) += c;
            }
        }
        terms = next;
    }
    let rows = terms
        .into_iter()
        .map(|((blocks, parts), coeff)| TableRow { blocks, parts, coeff })
        .collect();
    Ok(CompositionTable { order: k, rows })
}

fn tables() -> &'static [CompositionTable] {
    static TABLES: OnceLock<Vec<CompositionTable>> = OnceLock::new();
    TABLES.get_or_init(|| (1..=MAX_ORDER).map(|k| build_table(k).expect("k in range")).collect())
}

/// Cached table for order `k` (1..=12).
pub fn table(k: usize) -> &'static CompositionTable {
    assert!((1..=MAX_ORDER).contains(&k), "table order {k} outside 1..={MAX_ORDER}");
    &tables()[k - 1]
}

/// Jet of `f∘g` at `g_jet.base`, given the jet of `f` at `g(x)`.
pub fn compose_jets<T: Scalar>(f_jet: &Jet<T>, g_jet: &Jet<T>) -> Result<Jet<T>> {
    if f_jet.order() != g_jet.order() {
        return Err(Error::InvalidParameter(format!(
            "jet orders differ: {} vs {}",
            f_jet.order(),
            g_jet.order()
        )));
    }
    let gx = g_jet.d[0];
    let tol = T::lit(1e-9) * (T::one() + gx.abs());
    if !((f_jet.base - gx).abs() <= tol) {
        return Err(Error::BaseMismatch {
            expected: gx.to_f64_lossy(),
            found: f_jet.base.to_f64_lossy(),
        });
    }
    Ok(compose_unchecked(f_jet, g_jet))
}

/// Composition without the base check, for callers that construct the pair
/// themselves.
pub(crate) fn compose_unchecked<T: Scalar>(f_jet: &Jet<T>, g_jet: &Jet<T>) -> Jet<T> {
    let k = g_jet.order();
    let mut d = Vec::with_capacity(k + 1);
    d.push(f_jet.d[0]);
    for n in 1..=k {
        let mut acc = T::zero();
        for row in &table(n).rows {
            let mut term = T::int(row.coeff) * f_jet.d[row.blocks];
            for &j in &row.parts {
                term *= g_jet.d[j];
            }
            acc += term;
        }
        d.push(acc);
    }
    Jet { base: g_jet.base, d }
}

/// Jet of `f⁻¹` at `f(x)` from the jet of `f` at `x`, computed order by order:
/// `(f⁻¹)^{(r)} = −(f⁻¹)′ · Σ C (f^{(i)}∘f⁻¹) Π (f⁻¹)^{(j)}` over every row of
/// the order-`r` table except the one carrying `(f⁻¹)^{(r)}` itself.
pub fn invert_jet<T: Scalar>(f_jet: &Jet<T>) -> Result<Jet<T>> {
    let k = f_jet.order();
    let mut d = vec![T::zero(); k + 1];
    d[0] = f_jet.base;
    if k == 0 {
        return Ok(Jet { base: f_jet.d[0], d });
    }
    let f1 = f_jet.d[1];
    if !(f1 > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "first derivative {} is not positive",
            f1.to_f64_lossy()
        )));
    }
    d[1] = T::one() / f1;
    for r in 2..=k {
        let mut acc = T::zero();
        for row in &table(r).rows {
            if row.blocks == 1 {
                continue;
            }
            let mut term = T::int(row.coeff) * f_jet.d[row.blocks];
            for &j in &row.parts {
                term *= d[j];
            }
            acc += term;
        }
        d[r] = -d[1] * acc;
    }
    Ok(Jet { base: f_jet.d[0], d })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_two_has_no_interior_rows() {
        let t = build_table(2).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.interior().count(), 0);
        assert_eq!(build_table(1).unwrap().interior().count(), 0);
    }

    #[test]
    fn order_three_interior_row() {
        let t = build_table(3).unwrap();
        let interior: Vec<_> = t.interior().collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].blocks, 2);
        assert_eq!(interior[0].parts, vec![1, 2]);
        assert_eq!(interior[0].coeff, 3);
        assert_eq!(t.coefficient_sum(), 5);
    }

    #[test]
    fn order_range_is_enforced() {
        assert!(build_table(0).is_err());
        assert!(build_table(13).is_err());
    }

    #[test]
    fn inverse_of_doubling() {
        let f = Jet::new(0.0, vec![0.0, 2.0, 0.0, 0.0]);
        let inv = invert_jet(&f).unwrap();
        assert_eq!(inv.d, vec![0.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn nonpositive_slope_is_rejected() {
        assert!(invert_jet(&Jet::new(0.0, vec![0.0, -1.0])).is_err());
    }

    #[test]
    fn base_mismatch_is_rejected() {
        let f = Jet::identity(1.0, 2);
        let g = Jet::identity(0.0, 2);
        assert!(matches!(compose_jets(&f, &g), Err(Error::BaseMismatch { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let f = Jet::new(0.0f32, vec![0.0, 1.0, 2.0]);
        let inv = invert_jet(&f).unwrap();
        assert!((inv.d[2] + 2.0).abs() < 1e-6);
    }
}
