//! Differential operators on a chart, quantization of contravariant
//! tensors, symbols and dequantization by symbol peeling.

mod operator;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::expr::{equiv, EquivConfig, EquivError, Expr};
use crate::geometry::{
    multi_index_of, multiplicity, permutations, sorted_keys, factorial, Connection, GeometryError,
    InhomTensor, SymTensor, Variance,
};

pub use operator::{coefficient_box, DiffOperator, PRUNE_TOL};

/// Highest tensor order accepted by default.
pub const DEFAULT_ORDER_CAP: usize = 4;

/// The order-`r` symbol of an operator, a contravariant symmetric tensor.
pub type OperatorSymbol = SymTensor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizerError {
    #[error("order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("symbol of order {requested} requested from an operator of order {order}")]
    SymbolOrder { requested: usize, order: usize },
    #[error("dequantization residual did not drop below order {0}")]
    PeelingFailed(usize),
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] EquivError),
}

/// Quantization with respect to a fixed connection.
///
/// The expansion of `∇ʳ_sym f` in plain partials of `f` is computed once per
/// order and shared; a `Quantizer` may be used from several threads.
#[derive(Debug)]
pub struct Quantizer {
    gamma: Connection,
    cap: usize,
    full: Vec<OnceLock<Vec<DiffOperator>>>,
    sym: Vec<OnceLock<BTreeMap<Vec<usize>, DiffOperator>>>,
}

impl Quantizer {
    pub fn new(gamma: Connection) -> Quantizer {
        Quantizer::with_cap(gamma, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(gamma: Connection, cap: usize) -> Quantizer {
        Quantizer {
            gamma,
            cap,
            full: (0..=cap).map(|_| OnceLock::new()).collect(),
            sym: (0..=cap).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn connection(&self) -> &Connection {
        &self.gamma
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check_cap(&self, order: usize) -> Result<(), QuantizerError> {
        if order > self.cap {
            return Err(QuantizerError::OrderCap { order, cap: self.cap });
        }
        Ok(())
    }

    /// `(∇ʳf)_{j₁..j_r}` as operators on `f`, row-major over all tuples.
    fn full_expansion(&self, r: usize) -> &[DiffOperator] {
        self.full[r].get_or_init(|| {
            let chart = self.gamma.chart().clone();
            if r == 0 {
                return vec![DiffOperator::identity(chart)];
            }
            let n = chart.dim();
            let prev = self.full_expansion(r - 1);
            let mut out = Vec::with_capacity(n.pow(r as u32));
            for flat in 0..n.pow(r as u32) {
                let idx = crate::geometry::tensor_unflatten(flat, n, r);
                let (k, rest) = (idx[0], &idx[1..]);
                let base = prev[crate::geometry::tensor_flatten(rest, n)].differentiate_left(k);
                let mut terms = vec![(Expr::one(), base)];
                let mut shifted = rest.to_vec();
                for m in 0..rest.len() {
                    for l in 0..n {
                        let g = self.gamma.gamma(l, k, rest[m]);
                        if g.is_zero() {
                            continue;
                        }
                        shifted[m] = l;
                        terms.push((-g.clone(), prev[crate::geometry::tensor_flatten(&shifted, n)].clone()));
                    }
                    shifted[m] = rest[m];
                }
                out.push(DiffOperator::raw_sum(&chart, terms.iter().map(|(w, op)| (w.clone(), op))));
            }
            out
        })
    }

    /// `(∇ʳ_sym f)_K` as operators on `f`, per sorted key `K`.
    fn sym_expansion(&self, r: usize) -> &BTreeMap<Vec<usize>, DiffOperator> {
        self.sym[r].get_or_init(|| {
            let chart = self.gamma.chart().clone();
            let n = chart.dim();
            let full = self.full_expansion(r);
            let weight = Expr::real(1.0 / factorial(r));
            sorted_keys(n, r)
                .into_iter()
                .map(|key| {
                    let perms = permutations(&key);
                    let terms = perms
                        .iter()
                        .map(|p| (weight.clone(), &full[crate::geometry::tensor_flatten(p, n)]));
                    let op = DiffOperator::raw_sum(&chart, terms).prune();
                    (key, op)
                })
                .collect()
        })
    }

    /// The operator `f ↦ (−iħ)ʳ ⟨Φ, ∇ʳ_sym f⟩` of a homogeneous tensor.
    pub fn quantize_homogeneous(&self, phi: &SymTensor) -> Result<DiffOperator, QuantizerError> {
        self.check_tensor(phi.chart(), phi.variance())?;
        let r = phi.order();
        self.check_cap(r)?;
        let chart = self.gamma.chart().clone();
        let expansion = self.sym_expansion(r);
        let prefactor = minus_i_hbar_pow(r as i32);
        let weights: Vec<(Expr, &DiffOperator)> = phi
            .components()
            .map(|(key, c)| {
                let w = prefactor.clone() * Expr::real(multiplicity(key)) * c.clone();
                (w.simplify(), &expansion[key])
            })
            .collect();
        Ok(DiffOperator::raw_sum(&chart, weights).prune())
    }

    /// Sum of the quantized homogeneous parts.
    pub fn quantize(&self, phi: &InhomTensor) -> Result<DiffOperator, QuantizerError> {
        self.check_tensor(phi.chart(), phi.variance())?;
        let chart = self.gamma.chart().clone();
        let mut total = DiffOperator::zero(chart);
        for part in phi.parts() {
            total = total.add(&self.quantize_homogeneous(part)?)?;
        }
        Ok(total)
    }

    /// The inhomogeneous tensor whose quantization is `p`. Parts that vanish
    /// identically are omitted.
    pub fn dequantize(&self, p: &DiffOperator) -> Result<InhomTensor, QuantizerError> {
        if **p.chart() != **self.gamma.chart() {
            return Err(QuantizerError::ChartMismatch);
        }
        let r = p.order();
        self.check_cap(r)?;
        let mut out = InhomTensor::new(p.chart().clone(), Variance::Contravariant);
        let mut residual = p.clone();
        for k in (0..=r).rev() {
            if residual.is_zero() {
                break;
            }
            if residual.order() < k {
                continue;
            }
            let unscale = minus_i_hbar_pow(-(k as i32));
            let phi_k = symbol_part(&residual, k)
                .map(|c| unscale.clone() * c.clone())
                .simplified();
            residual = residual.sub(&self.quantize_homogeneous(&phi_k)?)?;
            if !residual.is_zero() && residual.order() >= k {
                return Err(QuantizerError::PeelingFailed(k));
            }
            out.add_part(phi_k)?;
        }
        Ok(out)
    }

    /// `PQ − QP`, whose order is at most `order(P) + order(Q) − 1`.
    pub fn commutator(&self, p: &DiffOperator, q: &DiffOperator) -> Result<DiffOperator, QuantizerError> {
        let total = p.order() + q.order();
        if total > self.cap + 1 {
            return Err(QuantizerError::OrderCap {
                order: total,
                cap: self.cap + 1,
            });
        }
        p.commutator(q)
    }

    fn check_tensor(&self, chart: &Arc<crate::geometry::Chart>, variance: Variance) -> Result<(), QuantizerError> {
        if variance != Variance::Contravariant {
            return Err(GeometryError::VarianceMismatch {
                expected: Variance::Contravariant,
                found: variance,
            }
            .into());
        }
        if **chart != **self.gamma.chart() {
            return Err(QuantizerError::ChartMismatch);
        }
        Ok(())
    }
}

/// `(−iħ)^k` for any integer `k`.
pub fn minus_i_hbar_pow(k: i32) -> Expr {
    (-(Expr::i() * Expr::hbar())).powi(k).simplify()
}

/// Quantization with the default order cap.
pub fn quantize(phi: &InhomTensor, gamma: &Connection) -> Result<DiffOperator, QuantizerError> {
    Quantizer::new(gamma.clone()).quantize(phi)
}

/// Dequantization with the default order cap.
pub fn dequantize(p: &DiffOperator, gamma: &Connection) -> Result<InhomTensor, QuantizerError> {
    Quantizer::new(gamma.clone()).dequantize(p)
}

/// Commutator with the default order cap.
pub fn commutator(p: &DiffOperator, q: &DiffOperator) -> Result<DiffOperator, QuantizerError> {
    let total = p.order() + q.order();
    if total > DEFAULT_ORDER_CAP + 1 {
        return Err(QuantizerError::OrderCap {
            order: total,
            cap: DEFAULT_ORDER_CAP + 1,
        });
    }
    p.commutator(q)
}

/// `σʳ(P)`, with components `c_α · α!/r!`; `r` must equal the order of `P`.
pub fn symbol(p: &DiffOperator, r: usize) -> Result<OperatorSymbol, QuantizerError> {
    if r != p.order() {
        return Err(QuantizerError::SymbolOrder {
            requested: r,
            order: p.order(),
        });
    }
    Ok(symbol_part(p, r))
}

/// The degree-`r` part of the coefficients with symbol normalization, for
/// any `r` (zero above the order).
pub fn symbol_part(p: &DiffOperator, r: usize) -> OperatorSymbol {
    let n = p.chart().dim();
    let mut t = SymTensor::zero(p.chart().clone(), Variance::Contravariant, r);
    for key in sorted_keys(n, r) {
        let alpha = multi_index_of(&key, n);
        let c = p.coefficient(&alpha);
        if c.is_zero() {
            continue;
        }
        let norm: f64 = alpha.iter().map(|&a| factorial(a)).product::<f64>() / factorial(r);
        t.set(&key, (Expr::real(norm) * c).simplify());
    }
    t
}

/// Componentwise comparison of two symmetric tensors of equal order.
pub fn sym_tensor_equiv(a: &SymTensor, b: &SymTensor, cfg: &EquivConfig) -> Result<bool, QuantizerError> {
    if a.order() != b.order() {
        return Err(GeometryError::OrderMismatch(a.order(), b.order()).into());
    }
    if a.variance() != b.variance() {
        return Err(GeometryError::VarianceMismatch {
            expected: a.variance(),
            found: b.variance(),
        }
        .into());
    }
    for key in sorted_keys(a.chart().dim(), a.order()) {
        let (x, y) = (a.get(&key), b.get(&key));
        if x == y {
            continue;
        }
        let bx = coefficient_box(a.chart(), [&x, &y]);
        if !equiv(&x, &y, &bx, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Componentwise comparison; a missing part counts as zero.
pub fn inhom_tensor_equiv(a: &InhomTensor, b: &InhomTensor, cfg: &EquivConfig) -> Result<bool, QuantizerError> {
    let top = a.max_order().into_iter().chain(b.max_order()).max().unwrap_or(0);
    for r in 0..=top {
        let za = SymTensor::zero(a.chart().clone(), a.variance(), r);
        let zb = SymTensor::zero(b.chart().clone(), b.variance(), r);
        let pa = a.part(r).unwrap_or(&za);
        let pb = b.part(r).unwrap_or(&zb);
        if !sym_tensor_equiv(pa, pb, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}
