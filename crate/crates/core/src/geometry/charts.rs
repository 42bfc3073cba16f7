//! Example geometries used throughout the tests and shipped manifests.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{Chart, Interval, Metric};
use crate::expr::parse;

/// Euclidean metric on ℝⁿ in affine coordinates.
pub fn flat(n: usize) -> Metric {
    let chart = Arc::new(Chart::euclidean(n));
    Metric::diagonal(chart, vec![crate::expr::Expr::one(); n]).expect("flat metric")
}

/// Polar margin kept away from the coordinate singularities of the sphere.
pub const SPHERE_POLE_MARGIN: f64 = 0.2;

/// Round unit sphere `dθ² + sin²θ dφ²` in coordinates (th, ph), with
/// θ ∈ (0.2, π − 0.2).
pub fn sphere() -> Metric {
    let chart = Arc::new(
        Chart::new(
            vec!["th".into(), "ph".into()],
            vec![
                Interval::new(SPHERE_POLE_MARGIN, PI - SPHERE_POLE_MARGIN),
                Interval::unbounded(),
            ],
        )
        .expect("sphere chart"),
    );
    Metric::diagonal(chart, vec![parse("1").unwrap(), parse("sin(th)^2").unwrap()])
        .expect("sphere metric")
}

/// Conformally flat plane `e^{2x}(dx² + dy²)`.
pub fn conformal_plane() -> Metric {
    let chart = Arc::new(Chart::euclidean(2));
    let factor = parse("exp(2*x)").unwrap();
    Metric::diagonal(chart, vec![factor.clone(), factor]).expect("conformal metric")
}
