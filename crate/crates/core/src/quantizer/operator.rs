use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::QuantizerError;
use crate::expr::{equiv, EquivConfig, Expr, SampleBox, HBAR};
use crate::geometry::Chart;

/// Tolerance below which a coefficient counts as identically zero.
pub const PRUNE_TOL: f64 = 1e-10;

/// A linear differential operator `P f = Σ_α c_α ∂^α f` on a chart, keyed
/// by multi-index `α` (occupation numbers, one per coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator {
    chart: Arc<Chart>,
    coeffs: BTreeMap<Vec<usize>, Expr>,
}

/// Sampling box for coefficients: chart coordinates, `hbar` in [0.5, 2] and
/// any other free symbol in [0.5, 1.5].
pub fn coefficient_box<'a>(chart: &Chart, exprs: impl IntoIterator<Item = &'a Expr>) -> SampleBox {
    let mut bx = chart.sample_box().with_range(HBAR, 0.5, 2.0);
    for e in exprs {
        for s in e.free_symbols() {
            if !bx.binds(&s) {
                bx.set_range(&s, 0.5, 1.5);
            }
        }
    }
    bx
}

fn vanishes(chart: &Chart, e: &Expr) -> bool {
    if e.is_zero() {
        return true;
    }
    let bx = coefficient_box(chart, [e]);
    let cfg = EquivConfig::default().with_tol(PRUNE_TOL);
    // coefficients that cannot be sampled are kept
    equiv(e, &Expr::zero(), &bx, &cfg).unwrap_or(false)
}

impl DiffOperator {
    /// Simplifies every coefficient and drops those that vanish identically.
    pub fn new(
        chart: Arc<Chart>,
        coeffs: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<DiffOperator, QuantizerError> {
        let n = chart.dim();
        let mut merged: BTreeMap<Vec<usize>, Expr> = BTreeMap::new();
        for (alpha, c) in coeffs {
            if alpha.len() != n {
                return Err(QuantizerError::Shape(format!(
                    "multi-index {alpha:?} has length {}, chart has dimension {n}",
                    alpha.len()
                )));
            }
            let slot = merged.entry(alpha).or_insert_with(Expr::zero);
            *slot = slot.clone() + c;
        }
        Ok(DiffOperator::pruned(chart, merged))
    }

    fn pruned(chart: Arc<Chart>, coeffs: BTreeMap<Vec<usize>, Expr>) -> DiffOperator {
        let coeffs = coeffs
            .into_iter()
            .map(|(a, c)| (a, c.simplify()))
            .filter(|(_, c)| !vanishes(&chart, c))
            .collect();
        DiffOperator { chart, coeffs }
    }

    /// Same as [`DiffOperator::new`] but only drops structural zeros.
    pub(crate) fn raw(chart: Arc<Chart>, coeffs: BTreeMap<Vec<usize>, Expr>) -> DiffOperator {
        let coeffs = coeffs
            .into_iter()
            .map(|(a, c)| (a, c.simplify()))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        DiffOperator { chart, coeffs }
    }

    pub fn zero(chart: Arc<Chart>) -> DiffOperator {
        DiffOperator {
            chart,
            coeffs: BTreeMap::new(),
        }
    }

    /// Multiplication by `u`.
    pub fn multiplication(chart: Arc<Chart>, u: Expr) -> DiffOperator {
        let n = chart.dim();
        DiffOperator::raw(chart, BTreeMap::from([(vec![0; n], u)]))
    }

    pub fn identity(chart: Arc<Chart>) -> DiffOperator {
        DiffOperator::multiplication(chart, Expr::one())
    }

    /// `∂/∂x^j`.
    pub fn partial(chart: Arc<Chart>, j: usize) -> DiffOperator {
        let mut alpha = vec![0; chart.dim()];
        alpha[j] = 1;
        DiffOperator::raw(chart, BTreeMap::from([(alpha, Expr::one())]))
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Highest `|α|` with a nonzero coefficient; 0 for the zero operator.
    pub fn order(&self) -> usize {
        self.coeffs.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, alpha: &[usize]) -> Expr {
        self.coeffs.get(alpha).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.coeffs.iter()
    }

    /// `Σ_α c_α ∂^α f`, simplified.
    pub fn apply(&self, f: &Expr) -> Expr {
        let sum: Expr = self
            .coeffs
            .iter()
            .map(|(alpha, c)| c.clone() * self.derivative(f, alpha))
            .sum();
        sum.simplify()
    }

    fn derivative(&self, f: &Expr, alpha: &[usize]) -> Expr {
        let mut out = f.clone();
        for (j, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                out = out.diff(self.chart.coord(j)).simplify();
            }
        }
        out
    }

    pub fn scale(&self, s: &Expr) -> DiffOperator {
        let coeffs = self.coeffs.iter().map(|(a, c)| (a.clone(), s.clone() * c.clone()));
        DiffOperator::pruned(self.chart.clone(), coeffs.collect())
    }

    pub fn add(&self, other: &DiffOperator) -> Result<DiffOperator, QuantizerError> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &DiffOperator) -> Result<DiffOperator, QuantizerError> {
        self.combine(other, true)
    }

    fn combine(&self, other: &DiffOperator, negate: bool) -> Result<DiffOperator, QuantizerError> {
        self.same_chart(other)?;
        let mut coeffs = self.coeffs.clone();
        for (a, c) in &other.coeffs {
            let c = if negate { -c.clone() } else { c.clone() };
            let slot = coeffs.entry(a.clone()).or_insert_with(Expr::zero);
            *slot = slot.clone() + c;
        }
        Ok(DiffOperator::pruned(self.chart.clone(), coeffs))
    }

    /// `P ∘ Q`, expanding `∂^α (d_β ∂^β)` by the Leibniz rule.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator, QuantizerError> {
        self.same_chart(other)?;
        let mut coeffs: BTreeMap<Vec<usize>, Expr> = BTreeMap::new();
        for (alpha, c) in &self.coeffs {
            for gamma in sub_multi_indices(alpha) {
                let binom = multi_binomial(alpha, &gamma);
                let rest: Vec<usize> = alpha.iter().zip(&gamma).map(|(a, g)| a - g).collect();
                for (beta, d) in &other.coeffs {
                    let dd = self.derivative(d, &gamma);
                    if dd.is_zero() {
                        continue;
                    }
                    let key: Vec<usize> = rest.iter().zip(beta).map(|(r, b)| r + b).collect();
                    let term = Expr::real(binom) * c.clone() * dd;
                    let slot = coeffs.entry(key).or_insert_with(Expr::zero);
                    *slot = slot.clone() + term;
                }
            }
        }
        Ok(DiffOperator::pruned(self.chart.clone(), coeffs))
    }

    /// `PQ − QP`.
    pub fn commutator(&self, other: &DiffOperator) -> Result<DiffOperator, QuantizerError> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Coefficientwise comparison by sampling.
    pub fn equiv(&self, other: &DiffOperator, cfg: &EquivConfig) -> Result<bool, QuantizerError> {
        self.same_chart(other)?;
        let keys: std::collections::BTreeSet<&Vec<usize>> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        for k in keys {
            let (a, b) = (self.coefficient(k), other.coefficient(k));
            if a == b {
                continue;
            }
            let bx = coefficient_box(&self.chart, [&a, &b]);
            if !equiv(&a, &b, &bx, cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `∂_k ∘ P`.
    pub(crate) fn differentiate_left(&self, k: usize) -> DiffOperator {
        let mut coeffs: BTreeMap<Vec<usize>, Expr> = BTreeMap::new();
        for (alpha, c) in &self.coeffs {
            let dc = c.diff(self.chart.coord(k));
            if !dc.is_zero() {
                let slot = coeffs.entry(alpha.clone()).or_insert_with(Expr::zero);
                *slot = slot.clone() + dc;
            }
            let mut raised = alpha.clone();
            raised[k] += 1;
            let slot = coeffs.entry(raised).or_insert_with(Expr::zero);
            *slot = slot.clone() + c.clone();
        }
        DiffOperator::raw(self.chart.clone(), coeffs)
    }

    /// Raw linear combination; only structural zeros are dropped.
    pub(crate) fn raw_sum<'a>(
        chart: &Arc<Chart>,
        terms: impl IntoIterator<Item = (Expr, &'a DiffOperator)>,
    ) -> DiffOperator {
        let mut coeffs: BTreeMap<Vec<usize>, Expr> = BTreeMap::new();
        for (w, op) in terms {
            if w.is_zero() {
                continue;
            }
            for (a, c) in &op.coeffs {
                let slot = coeffs.entry(a.clone()).or_insert_with(Expr::zero);
                *slot = slot.clone() + w.clone() * c.clone();
            }
        }
        DiffOperator::raw(chart.clone(), coeffs)
    }

    pub(crate) fn prune(self) -> DiffOperator {
        DiffOperator::pruned(self.chart, self.coeffs)
    }

    fn same_chart(&self, other: &DiffOperator) -> Result<(), QuantizerError> {
        if *self.chart != *other.chart {
            return Err(QuantizerError::ChartMismatch);
        }
        Ok(())
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (j, &k) in alpha.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*d/d{}", self.chart.coord(j))?,
                    _ => write!(f, "*d^{k}/d{}^{k}", self.chart.coord(j))?,
                }
            }
        }
        Ok(())
    }
}

fn sub_multi_indices(alpha: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=a).map(move |g| {
                    let mut v = prefix.clone();
                    v.push(g);
                    v
                })
            })
            .collect();
    }
    out
}

fn multi_binomial(alpha: &[usize], gamma: &[usize]) -> f64 {
    alpha
        .iter()
        .zip(gamma)
        .map(|(&a, &g)| binomial(a, g))
        .product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn line() -> Arc<Chart> {
        Arc::new(Chart::euclidean(1))
    }

    fn momentum(chart: Arc<Chart>) -> DiffOperator {
        DiffOperator::partial(chart, 0).scale(&p("-i*hbar"))
    }

    #[test]
    fn momentum_eigenfunction() {
        let f = p("exp(i*x/hbar)");
        let out = momentum(line()).apply(&f);
        let bx = coefficient_box(&line(), [&out]);
        assert!(equiv(&out, &f, &bx, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn identity_and_laplacian_application() {
        let plane = Arc::new(Chart::euclidean(2));
        let f = p("x^2*y");
        assert_eq!(DiffOperator::identity(plane.clone()).apply(&f), f.simplify());
        let lap = DiffOperator::new(
            plane.clone(),
            [(vec![2, 0], p("-hbar^2")), (vec![0, 2], p("-hbar^2"))],
        )
        .unwrap();
        let out = lap.apply(&f);
        let bx = coefficient_box(&plane, [&out]);
        assert!(equiv(&out, &p("-2*hbar^2*y"), &bx, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn canonical_commutation() {
        let c = line();
        let x = DiffOperator::multiplication(c.clone(), p("x"));
        let comm = momentum(c.clone()).commutator(&x).unwrap();
        assert_eq!(comm.order(), 0);
        let expected = DiffOperator::multiplication(c, p("-i*hbar"));
        assert!(comm.equiv(&expected, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn commutator_with_dilation() {
        // [−iħ∂, −iħx∂] = −ħ²∂
        let c = line();
        let d = momentum(c.clone());
        let xd = DiffOperator::new(c.clone(), [(vec![1], p("-i*hbar*x"))]).unwrap();
        let comm = d.commutator(&xd).unwrap();
        let expected = DiffOperator::new(c, [(vec![1], p("-hbar^2"))]).unwrap();
        assert!(comm.equiv(&expected, &EquivConfig::default()).unwrap());
        assert!(d.commutator(&d).unwrap().is_zero());
    }

    #[test]
    fn composition_acts_as_composition() {
        let plane = Arc::new(Chart::euclidean(2));
        let a = DiffOperator::new(
            plane.clone(),
            [(vec![1, 1], p("sin(x)")), (vec![0, 1], p("x*y")), (vec![0, 0], p("y^2"))],
        )
        .unwrap();
        let b = DiffOperator::new(plane.clone(), [(vec![2, 0], p("exp(y)")), (vec![0, 1], p("x^3"))]).unwrap();
        let f = p("cos(x*y) + x^4*y^2");
        let lhs = a.compose(&b).unwrap().apply(&f);
        let rhs = a.apply(&b.apply(&f));
        let bx = coefficient_box(&plane, [&lhs, &rhs]);
        assert!(equiv(&lhs, &rhs, &bx, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn vanishing_top_coefficients_reduce_order() {
        let plane = Arc::new(Chart::euclidean(2));
        let op = DiffOperator::new(
            plane,
            [(vec![2, 0], p("sin(x)^2 + cos(x)^2 - 1")), (vec![1, 0], p("y"))],
        )
        .unwrap();
        assert_eq!(op.order(), 1);
        assert_eq!(op.coefficients().count(), 1);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(sub_multi_indices(&[1, 2]).len(), 6);
    }
}
