//! Chart-local Riemannian and affine calculus: metrics, Christoffel symbols,
//! iterated symmetrized covariant differentials, contraction, Laplacian.

mod calculus;
pub mod charts;
mod connection;
mod metric;
mod tensor;
mod transport;

use thiserror::Error;

use crate::expr::{EquivError, SampleBox};

pub use calculus::{
    contract, covariant_differential, covariant_differential_full, iterated_differential,
    laplacian, sym_iterated_differential,
};
pub(crate) use calculus::laplacian_with;
pub use connection::{christoffel, Connection};
pub use metric::Metric;
pub use tensor::{
    all_tuples, factorial, key_of_multi_index, multi_index_of, multiplicity, sorted_keys,
    FullTensor, InhomTensor, SymTensor, Variance,
};
pub use transport::{metric_transport, MetricTransport};

pub(crate) use tensor::{flatten as tensor_flatten, permutations, unflatten as tensor_unflatten};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("metric component ({0},{1}) differs from ({1},{0})")]
    MetricNotSymmetric(usize, usize),
    #[error("metric is singular or ill-conditioned at {point:?} (condition {condition:e})")]
    SingularMetric { point: Vec<f64>, condition: f64 },
    #[error("symbolic inverse metric is only available for dimension <= 4 (got {0})")]
    SymbolicInverseUnavailable(usize),
    #[error("symbol `{0}` is not a coordinate of the chart")]
    ForeignSymbol(String),
    #[error("connection is not symmetric in its lower indices at ({j};{k},{l})")]
    ConnectionNotSymmetric { j: usize, k: usize, l: usize },
    #[error("expected {expected:?} tensor, found {found:?}")]
    VarianceMismatch { expected: Variance, found: Variance },
    #[error("tensor orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error("inhomogeneous tensor already has a part of order {0}")]
    DuplicateOrder(usize),
    #[error("wrong number of components: {0}")]
    Shape(String),
    #[error("evaluation failed while checking: {0}")]
    Sampling(#[from] EquivError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::expr::EvalError),
}

/// Open coordinate interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn unbounded() -> Interval {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Finite range used when drawing sample points.
    pub fn sample_range(&self) -> (f64, f64) {
        const SPAN: f64 = 3.0;
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo + SPAN),
            (false, true) => (self.hi - SPAN, self.hi),
            (false, false) => (-SPAN / 2.0, SPAN / 2.0),
        }
    }
}

/// A single coordinate system with a domain box.
///
/// Fiber coordinates are named after the base coordinates: velocity
/// `d<name>` on the tangent bundle and momentum `p_<name>` on the cotangent
/// bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    domain: Vec<Interval>,
}

impl Chart {
    pub fn new(coords: Vec<String>, domain: Vec<Interval>) -> Result<Chart, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::InvalidChart("dimension must be at least 1".into()));
        }
        if coords.len() != domain.len() {
            return Err(GeometryError::InvalidChart(format!(
                "{} coordinates but {} domain intervals",
                coords.len(),
                domain.len()
            )));
        }
        let reserved = ["pi", "i", "hbar"];
        for (j, name) in coords.iter().enumerate() {
            let valid = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || reserved.contains(&name.as_str()) {
                return Err(GeometryError::InvalidChart(format!("bad coordinate name `{name}`")));
            }
            if crate::expr::Func::from_name(name).is_some() {
                return Err(GeometryError::InvalidChart(format!(
                    "coordinate `{name}` shadows a function"
                )));
            }
            if !(domain[j].lo < domain[j].hi) {
                return Err(GeometryError::InvalidChart(format!("empty domain for `{name}`")));
            }
        }
        let chart = Chart { coords, domain };
        let mut all: Vec<String> = chart.coords.clone();
        all.extend((0..chart.dim()).map(|j| chart.velocity(j)));
        all.extend((0..chart.dim()).map(|j| chart.momentum(j)));
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(GeometryError::InvalidChart(
                "coordinate and fiber names must be distinct".into(),
            ));
        }
        Ok(chart)
    }

    /// Flat ℝⁿ with coordinates x, y, z (or x1..xn beyond three).
    pub fn euclidean(n: usize) -> Chart {
        let coords: Vec<String> = if n <= 3 {
            ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|j| format!("x{j}")).collect()
        };
        Chart::new(coords, vec![Interval::unbounded(); n]).expect("valid euclidean chart")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> &str {
        &self.coords[j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn velocity(&self, j: usize) -> String {
        format!("d{}", self.coords[j])
    }

    pub fn momentum(&self, j: usize) -> String {
        format!("p_{}", self.coords[j])
    }

    pub fn velocities(&self) -> Vec<String> {
        (0..self.dim()).map(|j| self.velocity(j)).collect()
    }

    pub fn momenta(&self) -> Vec<String> {
        (0..self.dim()).map(|j| self.momentum(j)).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && point.iter().zip(&self.domain).all(|(x, d)| d.contains(*x))
    }

    /// Sampling box over the base coordinates (`hbar` fixed to 1).
    pub fn sample_box(&self) -> SampleBox {
        let mut b = SampleBox::new();
        for (name, d) in self.coords.iter().zip(&self.domain) {
            let (lo, hi) = d.sample_range();
            b.set_range(name, lo, hi);
        }
        b
    }

    /// Sampling box over coordinates and momenta in `[-radius, radius]`.
    pub fn cotangent_box(&self, radius: f64) -> SampleBox {
        let mut b = self.sample_box();
        for p in self.momenta() {
            b.set_range(&p, -radius, radius);
        }
        b
    }

    /// Sampling box over coordinates and velocities in `[-radius, radius]`.
    pub fn tangent_box(&self, radius: f64) -> SampleBox {
        let mut b = self.sample_box();
        for v in self.velocities() {
            b.set_range(&v, -radius, radius);
        }
        b
    }

    pub(crate) fn check_symbols(&self, e: &crate::expr::Expr) -> Result<(), GeometryError> {
        for s in e.free_symbols() {
            if self.index_of(&s).is_none() {
                return Err(GeometryError::ForeignSymbol(s));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_validation() {
        let ok = Chart::new(vec!["th".into(), "ph".into()], vec![Interval::new(0.2, 2.9); 2]);
        assert!(ok.is_ok());
        let dup = Chart::new(vec!["x".into(), "x".into()], vec![Interval::unbounded(); 2]);
        assert!(dup.is_err());
        let clash = Chart::new(vec!["x".into(), "dx".into()], vec![Interval::unbounded(); 2]);
        assert!(clash.is_err());
        let empty = Chart::new(vec!["x".into()], vec![Interval::new(1.0, 1.0)]);
        assert!(empty.is_err());
        let reserved = Chart::new(vec!["hbar".into()], vec![Interval::unbounded()]);
        assert!(reserved.is_err());
        let func = Chart::new(vec!["sin".into()], vec![Interval::unbounded()]);
        assert!(func.is_err());
    }

    #[test]
    fn fiber_names() {
        let c = Chart::euclidean(2);
        assert_eq!(c.velocities(), vec!["dx", "dy"]);
        assert_eq!(c.momenta(), vec!["p_x", "p_y"]);
        assert_eq!(Chart::euclidean(4).coord(3), "x4");
    }

    #[test]
    fn sample_ranges_are_finite() {
        assert_eq!(Interval::unbounded().sample_range(), (-1.5, 1.5));
        assert_eq!(Interval::new(0.0, f64::INFINITY).sample_range(), (0.0, 3.0));
        assert!(Interval::new(0.0, 1.0).contains(0.5));
        assert!(!Interval::new(0.0, 1.0).contains(1.0));
    }
}
