//! Seeded generators of scalar fields and tensors, used by test batteries.
//!
//! Fields are short sums of low-degree monomials, optionally multiplied by
//! a sine or cosine of one coordinate, so they are defined on every chart.

use rand::Rng;

use crate::expr::Expr;
use crate::geometry::{sorted_keys, Chart, InhomTensor, SymTensor, Variance};
use std::sync::Arc;

fn coefficient(rng: &mut impl Rng) -> Expr {
    let magnitude = (rng.gen_range(5..=20) as f64) / 10.0;
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Expr::real(sign * magnitude)
}

fn monomial(chart: &Chart, rng: &mut impl Rng, max_degree: usize) -> Expr {
    let degree = rng.gen_range(0..=max_degree);
    (0..degree)
        .map(|_| Expr::sym(chart.coord(rng.gen_range(0..chart.dim()))))
        .product()
}

/// A polynomial in the coordinates with up to three terms of degree ≤ `max_degree`.
pub fn polynomial(chart: &Chart, rng: &mut impl Rng, max_degree: usize) -> Expr {
    let terms = rng.gen_range(1..=3);
    let sum: Expr = (0..terms)
        .map(|_| coefficient(rng) * monomial(chart, rng, max_degree))
        .sum();
    nonzero(sum.simplify(), chart, rng, max_degree)
}

fn nonzero(e: Expr, chart: &Chart, rng: &mut impl Rng, max_degree: usize) -> Expr {
    if e.is_zero() {
        coefficient(rng) + monomial(chart, rng, max_degree)
    } else {
        e
    }
}

/// Polynomial and trigonometric terms.
pub fn scalar(chart: &Chart, rng: &mut impl Rng) -> Expr {
    let terms = rng.gen_range(1..=3);
    let sum: Expr = (0..terms)
        .map(|_| {
            let base = coefficient(rng) * monomial(chart, rng, 2);
            let x = Expr::sym(chart.coord(rng.gen_range(0..chart.dim())));
            match rng.gen_range(0..3) {
                0 => base,
                1 => base * x.sin(),
                _ => base * x.cos(),
            }
        })
        .sum();
    nonzero(sum.simplify(), chart, rng, 2)
}

/// A symmetric tensor with random components; at least one is nonzero.
pub fn sym_tensor(chart: &Arc<Chart>, variance: Variance, order: usize, rng: &mut impl Rng) -> SymTensor {
    let keys = sorted_keys(chart.dim(), order);
    let forced = rng.gen_range(0..keys.len());
    let mut t = SymTensor::zero(chart.clone(), variance, order);
    for (i, key) in keys.iter().enumerate() {
        if i == forced || rng.gen_bool(0.6) {
            t.set(key, scalar(chart, rng));
        }
    }
    t
}

/// One random part of each order up to `max_order`.
pub fn inhom_tensor(chart: &Arc<Chart>, variance: Variance, max_order: usize, rng: &mut impl Rng) -> InhomTensor {
    let parts = (0..=max_order).map(|r| sym_tensor(chart, variance, r, rng));
    InhomTensor::from_parts(chart.clone(), variance, parts).expect("distinct orders")
}
