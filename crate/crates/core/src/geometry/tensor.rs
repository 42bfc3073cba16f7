use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Chart, GeometryError};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Covariant,
    Contravariant,
}

impl Variance {
    pub fn name(self) -> &'static str {
        match self {
            Variance::Covariant => "covariant",
            Variance::Contravariant => "contravariant",
        }
    }
}

/// All nondecreasing index tuples of length `order` over `0..n`.
pub fn sorted_keys(n: usize, order: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, order: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == order {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(n, order, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, order, 0, &mut Vec::with_capacity(order), &mut out);
    out
}

/// All `n^order` index tuples in row-major order.
pub fn all_tuples(n: usize, order: usize) -> Vec<Vec<usize>> {
    let total = n.pow(order as u32);
    (0..total).map(|flat| unflatten(flat, n, order)).collect()
}

pub(crate) fn unflatten(mut flat: usize, n: usize, order: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in idx.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
    idx
}

pub(crate) fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &j| acc * n + j)
}

/// Occupation numbers: how many times each of `0..n` occurs in `key`.
pub fn multi_index_of(key: &[usize], n: usize) -> Vec<usize> {
    let mut alpha = vec![0; n];
    for &j in key {
        alpha[j] += 1;
    }
    alpha
}

/// The sorted tuple with occupation numbers `alpha`.
pub fn key_of_multi_index(alpha: &[usize]) -> Vec<usize> {
    alpha
        .iter()
        .enumerate()
        .flat_map(|(j, &k)| std::iter::repeat_n(j, k))
        .collect()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Number of distinct tuples that sort to `key`: r!/Π αⱼ!.
pub fn multiplicity(key: &[usize]) -> f64 {
    let mut counts = BTreeMap::new();
    for &j in key {
        *counts.entry(j).or_insert(0usize) += 1;
    }
    factorial(key.len()) / counts.values().map(|&c| factorial(c)).product::<f64>()
}

/// All `r!` orderings of `key` (with repetition when indices repeat).
pub(crate) fn permutations(key: &[usize]) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut key.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// A homogeneous, totally symmetric tensor field stored by symmetry class:
/// one expression per nondecreasing index tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    chart: Arc<Chart>,
    variance: Variance,
    order: usize,
    components: BTreeMap<Vec<usize>, Expr>,
}

impl SymTensor {
    pub fn zero(chart: Arc<Chart>, variance: Variance, order: usize) -> SymTensor {
        SymTensor {
            chart,
            variance,
            order,
            components: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: Arc<Chart>, variance: Variance, value: Expr) -> SymTensor {
        let mut t = SymTensor::zero(chart, variance, 0);
        t.set(&[], value);
        t
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Sets the component of the symmetry class of `idx` (any ordering).
    pub fn set(&mut self, idx: &[usize], value: Expr) {
        assert_eq!(idx.len(), self.order, "index length must equal tensor order");
        assert!(idx.iter().all(|&j| j < self.chart.dim()), "index out of range");
        let mut key = idx.to_vec();
        key.sort_unstable();
        if value.is_zero() {
            self.components.remove(&key);
        } else {
            self.components.insert(key, value);
        }
    }

    pub fn with(mut self, idx: &[usize], value: Expr) -> SymTensor {
        self.set(idx, value);
        self
    }

    /// Component at `idx` in any ordering; absent classes are zero.
    pub fn get(&self, idx: &[usize]) -> Expr {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.components.get(&key).cloned().unwrap_or_else(Expr::zero)
    }

    /// Stored (nonzero) components, keyed by sorted tuples.
    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.components.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> SymTensor {
        let mut out = SymTensor::zero(self.chart.clone(), self.variance, self.order);
        for (k, v) in &self.components {
            out.set(k, f(v));
        }
        out
    }

    pub fn simplified(&self) -> SymTensor {
        self.map(Expr::simplify)
    }

    /// Full component array, totally symmetric by construction.
    pub fn to_full(&self) -> FullTensor {
        let n = self.chart.dim();
        let data = all_tuples(n, self.order)
            .into_iter()
            .map(|idx| self.get(&idx))
            .collect();
        FullTensor {
            chart: self.chart.clone(),
            variance: self.variance,
            order: self.order,
            data,
        }
    }
}

/// A homogeneous tensor with every component stored, no symmetry assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTensor {
    chart: Arc<Chart>,
    variance: Variance,
    order: usize,
    data: Vec<Expr>,
}

impl FullTensor {
    pub fn from_fn(
        chart: Arc<Chart>,
        variance: Variance,
        order: usize,
        mut f: impl FnMut(&[usize]) -> Expr,
    ) -> FullTensor {
        let n = chart.dim();
        let data = all_tuples(n, order).iter().map(|idx| f(idx)).collect();
        FullTensor {
            chart,
            variance,
            order,
            data,
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.data[flatten(idx, self.chart.dim())]
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
        let (n, r) = (self.chart.dim(), self.order);
        self.data
            .iter()
            .enumerate()
            .map(move |(flat, e)| (unflatten(flat, n, r), e))
    }

    /// Average over all index permutations.
    pub fn symmetrize(&self) -> SymTensor {
        let mut out = SymTensor::zero(self.chart.clone(), self.variance, self.order);
        let norm = factorial(self.order);
        for key in sorted_keys(self.chart.dim(), self.order) {
            let sum: Expr = permutations(&key).iter().map(|p| self.get(p).clone()).sum();
            out.set(&key, (sum / Expr::real(norm)).simplify());
        }
        out
    }
}

/// An inhomogeneous symmetric tensor: at most one homogeneous part per order.
#[derive(Debug, Clone, PartialEq)]
pub struct InhomTensor {
    chart: Arc<Chart>,
    variance: Variance,
    parts: BTreeMap<usize, SymTensor>,
}

impl InhomTensor {
    pub fn new(chart: Arc<Chart>, variance: Variance) -> InhomTensor {
        InhomTensor {
            chart,
            variance,
            parts: BTreeMap::new(),
        }
    }

    pub fn from_parts(
        chart: Arc<Chart>,
        variance: Variance,
        parts: impl IntoIterator<Item = SymTensor>,
    ) -> Result<InhomTensor, GeometryError> {
        let mut t = InhomTensor::new(chart, variance);
        for p in parts {
            t.add_part(p)?;
        }
        Ok(t)
    }

    pub fn add_part(&mut self, part: SymTensor) -> Result<(), GeometryError> {
        if part.variance != self.variance {
            return Err(GeometryError::VarianceMismatch {
                expected: self.variance,
                found: part.variance,
            });
        }
        if *part.chart != *self.chart {
            return Err(GeometryError::ChartMismatch);
        }
        if self.parts.contains_key(&part.order) {
            return Err(GeometryError::DuplicateOrder(part.order));
        }
        self.parts.insert(part.order, part);
        Ok(())
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn part(&self, order: usize) -> Option<&SymTensor> {
        self.parts.get(&order)
    }

    pub fn parts(&self) -> impl Iterator<Item = &SymTensor> {
        self.parts.values()
    }

    pub fn max_order(&self) -> Option<usize> {
        self.parts.keys().next_back().copied()
    }
}

impl From<SymTensor> for InhomTensor {
    fn from(t: SymTensor) -> InhomTensor {
        let mut out = InhomTensor::new(t.chart.clone(), t.variance);
        out.parts.insert(t.order, t);
        out
    }
}
