//! Geodesic flow, pullback of functions by the exponential map, and
//! fiberwise differentials of the pullback at the zero section.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Compiled, EvalError, Expr};
use crate::geometry::{
    multi_index_of, sorted_keys, sym_iterated_differential, tensor_unflatten, Connection,
    GeometryError, Metric, SymTensor, Variance,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpmapError {
    #[error("geodesic left the chart domain at parameter {parameter} (point {point:?})")]
    DomainExit { parameter: f64, point: Vec<f64> },
    #[error("integration needs {needed} steps, limit is {limit}")]
    MaxSteps { needed: usize, limit: usize },
    #[error("differential order {order} exceeds the configured maximum {max}")]
    OrderCap { order: usize, max: usize },
    #[error("point has {found} coordinates, chart has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A point of the chart and a tangent vector there.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl GeodesicState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> GeodesicState {
        GeodesicState { x, v }
    }
}

/// Fixed-step classical Runge–Kutta. Leaving the chart domain is an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-3,
            max_steps: 1_000_000,
        }
    }
}

/// Central differences in the fiber with Richardson extrapolation over
/// `levels` step sizes `h0, h0/2, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDConfig {
    pub h0: f64,
    pub levels: usize,
    pub max_order: usize,
}

impl Default for FDConfig {
    fn default() -> Self {
        FDConfig {
            h0: 1e-2,
            levels: 2,
            max_order: 3,
        }
    }
}

/// Largest differential order with a built-in stencil.
pub const STENCIL_MAX_ORDER: usize = 4;

fn check_dim(gamma: &Connection, v: &[f64]) -> Result<(), ExpmapError> {
    if v.len() != gamma.dim() {
        return Err(ExpmapError::Dimension {
            expected: gamma.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

fn acceleration(gamma: &Connection, x: &[f64], v: &[f64], buf: &mut [f64], out: &mut [f64]) -> Result<(), ExpmapError> {
    let n = x.len();
    gamma.gamma_at(x, buf)?;
    for j in 0..n {
        let mut a = 0.0;
        for k in 0..n {
            for l in 0..n {
                a -= buf[(j * n + k) * n + l] * v[k] * v[l];
            }
        }
        out[j] = a;
    }
    Ok(())
}

/// Integrates `ẍ^j = −Γ^j_kl ẋ^k ẋ^l` from parameter 0 to `s`.
pub fn geodesic_flow(
    state: &GeodesicState,
    gamma: &Connection,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<GeodesicState, ExpmapError> {
    check_dim(gamma, &state.x)?;
    check_dim(gamma, &state.v)?;
    if !(cfg.step > 0.0) {
        return Err(ExpmapError::Config("integrator step must be positive"));
    }
    let chart = gamma.chart();
    if !chart.contains(&state.x) {
        return Err(ExpmapError::DomainExit {
            parameter: 0.0,
            point: state.x.clone(),
        });
    }
    let steps = (s.abs() / cfg.step).ceil() as usize;
    if steps > cfg.max_steps {
        return Err(ExpmapError::MaxSteps {
            needed: steps,
            limit: cfg.max_steps,
        });
    }
    let n = state.x.len();
    let (mut x, mut v) = (state.x.clone(), state.v.clone());
    if steps == 0 {
        return Ok(GeodesicState { x, v });
    }
    if gamma.is_flat() {
        // straight line; the domain box is convex so the endpoint decides
        for j in 0..n {
            x[j] += s * v[j];
        }
        if !chart.contains(&x) {
            return Err(ExpmapError::DomainExit {
                parameter: exit_parameter(chart.domain(), &state.x, &v, s),
                point: x,
            });
        }
        return Ok(GeodesicState { x, v });
    }
    let h = s / steps as f64;
    let mut buf = vec![0.0; n * n * n];
    let (mut a1, mut a2, mut a3, mut a4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut xt, mut vt) = (vec![0.0; n], vec![0.0; n]);
    let (mut v2, mut v3, mut v4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for step in 0..steps {
        acceleration(gamma, &x, &v, &mut buf, &mut a1)?;
        for j in 0..n {
            xt[j] = x[j] + 0.5 * h * v[j];
            vt[j] = v[j] + 0.5 * h * a1[j];
        }
        v2.copy_from_slice(&vt);
        acceleration(gamma, &xt, &v2, &mut buf, &mut a2)?;
        for j in 0..n {
            xt[j] = x[j] + 0.5 * h * v2[j];
            vt[j] = v[j] + 0.5 * h * a2[j];
        }
        v3.copy_from_slice(&vt);
        acceleration(gamma, &xt, &v3, &mut buf, &mut a3)?;
        for j in 0..n {
            xt[j] = x[j] + h * v3[j];
            vt[j] = v[j] + h * a3[j];
        }
        v4.copy_from_slice(&vt);
        acceleration(gamma, &xt, &v4, &mut buf, &mut a4)?;
        for j in 0..n {
            x[j] += h / 6.0 * (v[j] + 2.0 * v2[j] + 2.0 * v3[j] + v4[j]);
            v[j] += h / 6.0 * (a1[j] + 2.0 * a2[j] + 2.0 * a3[j] + a4[j]);
        }
        if !chart.contains(&x) || x.iter().chain(&v).any(|c| !c.is_finite()) {
            return Err(ExpmapError::DomainExit {
                parameter: h * (step + 1) as f64,
                point: x,
            });
        }
    }
    Ok(GeodesicState { x, v })
}

/// First parameter in `[0, s]` where the line `x + t v` meets the box boundary.
fn exit_parameter(domain: &[crate::geometry::Interval], x: &[f64], v: &[f64], s: f64) -> f64 {
    let mut t_exit = s.abs();
    for ((d, &x), &v) in domain.iter().zip(x).zip(v) {
        let v = v * s.signum();
        for bound in [d.lo, d.hi] {
            if bound.is_finite() && v != 0.0 {
                let t = (bound - x) / v;
                if t >= 0.0 {
                    t_exit = t_exit.min(t);
                }
            }
        }
    }
    t_exit * s.signum()
}

/// A scalar field compiled over the chart coordinates.
struct Field {
    compiled: Compiled,
}

impl Field {
    fn new(f: &Expr, gamma: &Connection) -> Result<Field, ExpmapError> {
        Ok(Field {
            compiled: Compiled::new(f, gamma.chart().coords())?,
        })
    }

    fn at(&self, x: &[f64]) -> Result<Complex64, ExpmapError> {
        Ok(self.compiled.eval_real(x)?)
    }
}

/// `f(exp(s·ξ))`: `f` at the end of the geodesic from `(x₀, ξ)` run to
/// parameter `s`.
pub fn exp_pullback_scaled(
    f: &Expr,
    x0: &[f64],
    xi: &[f64],
    s: f64,
    gamma: &Connection,
    cfg: &IntegratorConfig,
) -> Result<Complex64, ExpmapError> {
    let field = Field::new(f, gamma)?;
    pullback(&field, x0, xi, s, gamma, cfg)
}

fn pullback(
    field: &Field,
    x0: &[f64],
    xi: &[f64],
    s: f64,
    gamma: &Connection,
    cfg: &IntegratorConfig,
) -> Result<Complex64, ExpmapError> {
    let end = geodesic_flow(&GeodesicState::new(x0.to_vec(), xi.to_vec()), gamma, s, cfg)?;
    field.at(&end.x)
}

/// `f̂(x₀, ξ) = f(exp ξ)`.
pub fn exp_pullback(
    f: &Expr,
    x0: &[f64],
    xi: &[f64],
    gamma: &Connection,
    cfg: &IntegratorConfig,
) -> Result<Complex64, ExpmapError> {
    exp_pullback_scaled(f, x0, xi, 1.0, gamma, cfg)
}

/// A numeric symmetric tensor at one point, keyed by sorted index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct NumTensor {
    pub dim: usize,
    pub order: usize,
    pub components: BTreeMap<Vec<usize>, Complex64>,
}

impl NumTensor {
    /// Component for any index order.
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.components.get(&key).copied().unwrap_or_default()
    }

    /// Evaluates a symbolic tensor at a point.
    pub fn evaluate(t: &SymTensor, x0: &[f64]) -> Result<NumTensor, ExpmapError> {
        let chart = t.chart();
        let mut components = BTreeMap::new();
        for key in sorted_keys(chart.dim(), t.order()) {
            let c = Compiled::new(&t.get(&key), chart.coords())?;
            components.insert(key, c.eval_real(x0)?);
        }
        Ok(NumTensor {
            dim: chart.dim(),
            order: t.order(),
            components,
        })
    }
}

/// One-dimensional central stencils `(offset, weight)`; divide by `h^m`.
fn stencil(m: usize) -> &'static [(i32, f64)] {
    match m {
        0 => &[(0, 1.0)],
        1 => &[(1, 0.5), (-1, -0.5)],
        2 => &[(1, 1.0), (0, -2.0), (-1, 1.0)],
        3 => &[(2, 0.5), (1, -1.0), (-1, 1.0), (-2, -0.5)],
        4 => &[(2, 1.0), (1, -4.0), (0, 6.0), (-1, -4.0), (-2, 1.0)],
        _ => unreachable!("stencil order checked by caller"),
    }
}

/// Tensor-product stencil for the mixed partial `∂^α`.
fn product_stencil(alpha: &[usize]) -> Vec<(Vec<i32>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for &m in alpha {
        out = out
            .into_iter()
            .flat_map(|(offs, w)| {
                stencil(m).iter().map(move |&(o, sw)| {
                    let mut v = offs.clone();
                    v.push(o);
                    (v, w * sw)
                })
            })
            .collect();
    }
    out
}

/// `d₀ʳ f̂_s` at `x₀`, with `f̂_s(ξ) = f(τ_s(x₀, ξ))`: mixed `r`-th
/// derivatives in the fiber at `ξ = 0`, identified with a covariant tensor
/// at `x₀`.
pub fn vertical_differential_scaled(
    f: &Expr,
    x0: &[f64],
    r: usize,
    s: f64,
    gamma: &Connection,
    cfg: &IntegratorConfig,
    fd: &FDConfig,
) -> Result<NumTensor, ExpmapError> {
    check_dim(gamma, x0)?;
    let max = fd.max_order.min(STENCIL_MAX_ORDER);
    if r > max {
        return Err(ExpmapError::OrderCap { order: r, max });
    }
    if !(fd.h0 > 0.0) || fd.levels == 0 {
        return Err(ExpmapError::Config("finite-difference step must be positive with at least one level"));
    }
    let n = gamma.dim();
    let field = Field::new(f, gamma)?;
    let keys = sorted_keys(n, r);
    let stencils: Vec<Vec<(Vec<i32>, f64)>> = keys.iter().map(|k| product_stencil(&multi_index_of(k, n))).collect();

    // every distinct fiber point, evaluated once
    let mut offsets: Vec<Vec<i32>> = stencils.iter().flatten().map(|(o, _)| o.clone()).collect();
    offsets.sort();
    offsets.dedup();
    let points: Vec<(usize, Vec<i32>)> = (0..fd.levels)
        .flat_map(|lvl| offsets.iter().map(move |o| (lvl, o.clone())))
        .collect();
    let values: Vec<Complex64> = points
        .par_iter()
        .map(|(lvl, o)| {
            let h = fd.h0 / f64::powi(2.0, *lvl as i32);
            let xi: Vec<f64> = o.iter().map(|&k| k as f64 * h).collect();
            pullback(&field, x0, &xi, s, gamma, cfg)
        })
        .collect::<Result<_, _>>()?;
    let lookup: BTreeMap<&(usize, Vec<i32>), Complex64> = points.iter().zip(values).collect();

    let mut components = BTreeMap::new();
    for (key, st) in keys.into_iter().zip(&stencils) {
        let estimates: Vec<Complex64> = (0..fd.levels)
            .map(|lvl| {
                let h = fd.h0 / f64::powi(2.0, lvl as i32);
                let sum: Complex64 = st.iter().map(|(o, w)| lookup[&(lvl, o.clone())] * *w).sum();
                sum / h.powi(r as i32)
            })
            .collect();
        components.insert(key, richardson(estimates));
    }
    Ok(NumTensor { dim: n, order: r, components })
}

/// `d₀ʳ f̂` at `x₀`.
pub fn vertical_differential(
    f: &Expr,
    x0: &[f64],
    r: usize,
    gamma: &Connection,
    cfg: &IntegratorConfig,
    fd: &FDConfig,
) -> Result<NumTensor, ExpmapError> {
    vertical_differential_scaled(f, x0, r, 1.0, gamma, cfg, fd)
}

/// Extrapolates estimates with `O(h²)` leading error taken at `h, h/2, …`.
fn richardson(mut table: Vec<Complex64>) -> Complex64 {
    let levels = table.len();
    for k in 1..levels {
        let factor = f64::powi(4.0, k as i32);
        for i in (k..levels).rev() {
            table[i] = (table[i] * factor - table[i - 1]) / (factor - 1.0);
        }
    }
    table[levels - 1]
}

/// Default acceptance tolerance for the order-`r` comparison.
pub fn default_tolerance(r: usize) -> f64 {
    if r <= 2 {
        1e-5
    } else {
        1e-4
    }
}

/// Numeric fiber differential against the symbolic symmetrized covariant
/// differential at one point.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub order: usize,
    pub numeric: NumTensor,
    pub symbolic: NumTensor,
    pub max_abs_error: f64,
    /// `max |a − b| / max(1, |b|)` with `b` the symbolic value.
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_equivalence(
    f: &Expr,
    x0: &[f64],
    r: usize,
    gamma: &Connection,
    cfg: &IntegratorConfig,
    fd: &FDConfig,
    tolerance: f64,
) -> Result<EquivalenceReport, ExpmapError> {
    let numeric = vertical_differential(f, x0, r, gamma, cfg, fd)?;
    let symbolic = NumTensor::evaluate(&sym_iterated_differential(f, gamma, r)?, x0)?;
    let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
    for (key, b) in &symbolic.components {
        let a = numeric.get(key);
        let err = (a - b).norm();
        max_abs = max_abs.max(err);
        max_rel = max_rel.max(err / b.norm().max(1.0));
    }
    Ok(EquivalenceReport {
        order: r,
        numeric,
        symbolic,
        max_abs_error: max_abs,
        max_rel_error: max_rel,
        tolerance,
        pass: max_rel <= tolerance,
    })
}

/// Outcome of comparing `â_s(f)(x₀)` with `sʳ â(f)(x₀)`.
#[derive(Debug, Clone)]
pub struct ScaleReport {
    pub order: usize,
    pub s: f64,
    /// `â(f)(x₀)`.
    pub base: Complex64,
    /// `â_s(f)(x₀)`.
    pub scaled: Complex64,
    /// `|â_s − sʳ â| / (1 + |â|)`.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `⟨Φ_a, d₀ʳ f̂_s⟩ (−iħ)ʳ` where `Φ_a` is `a` with indices raised by `g`,
/// i.e. `a` acting through `dx^j ↦ −iħ g^{jk} ∂/∂ẋ^k`.
#[allow(clippy::too_many_arguments)]
pub fn vertical_quantization(
    a: &SymTensor,
    f: &Expr,
    x0: &[f64],
    s: f64,
    g: &Metric,
    gamma: &Connection,
    hbar: f64,
    cfg: &IntegratorConfig,
    fd: &FDConfig,
) -> Result<Complex64, ExpmapError> {
    if a.variance() != Variance::Covariant {
        return Err(GeometryError::VarianceMismatch {
            expected: Variance::Covariant,
            found: a.variance(),
        }
        .into());
    }
    let r = a.order();
    let n = g.dim();
    let d = vertical_differential_scaled(f, x0, r, s, gamma, cfg, fd)?;
    let a_full = NumTensor::evaluate(a, x0)?;
    let ginv = g.inverse_at(x0)?;
    let mut total = Complex64::default();
    // Σ_{J,K} a_J Π g^{j_m k_m} d_K over all index tuples
    for jf in 0..n.pow(r as u32) {
        let js = tensor_unflatten(jf, n, r);
        let aj = a_full.get(&js);
        if aj == Complex64::default() {
            continue;
        }
        for kf in 0..n.pow(r as u32) {
            let ks = tensor_unflatten(kf, n, r);
            let w: f64 = js.iter().zip(&ks).map(|(&j, &k)| ginv[(j, k)]).product();
            total += aj * w * d.get(&ks);
        }
    }
    Ok(total * Complex64::new(0.0, -hbar).powi(r as i32))
}

#[allow(clippy::too_many_arguments)]
pub fn scaled_quantization_check(
    a: &SymTensor,
    f: &Expr,
    x0: &[f64],
    s: f64,
    g: &Metric,
    gamma: &Connection,
    hbar: f64,
    tolerance: f64,
    cfg: &IntegratorConfig,
    fd: &FDConfig,
) -> Result<ScaleReport, ExpmapError> {
    if s == 0.0 {
        return Err(ExpmapError::Config("scale parameter must be nonzero"));
    }
    let r = a.order();
    let base = vertical_quantization(a, f, x0, 1.0, g, gamma, hbar, cfg, fd)?;
    let scaled = vertical_quantization(a, f, x0, s, g, gamma, hbar, cfg, fd)?;
    let error = (scaled - base * s.powi(r as i32)).norm() / (1.0 + base.norm());
    Ok(ScaleReport {
        order: r,
        s,
        base,
        scaled,
        error,
        tolerance,
        pass: error <= tolerance,
    })
}
