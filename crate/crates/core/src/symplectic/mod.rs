//! Polynomial Hamiltonians on the cotangent bundle, Poisson brackets,
//! Hamiltonian fields and the identities characterizing the Schrödinger
//! operator among quantized Hamiltonians.
//!
//! Phase-space coordinates are the chart coordinates together with the
//! momenta `p_<name>` (cotangent bundle) or velocities `d<name>` (tangent
//! bundle). The symplectic form is `ω₂ = dp_j ∧ dx^j`.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{compare, equiv, EquivConfig, EquivError, Expr, HBAR};
use crate::geometry::{
    christoffel, laplacian, metric_transport, multiplicity, Chart, Connection, GeometryError,
    InhomTensor, Metric, Variance,
};
use crate::quantizer::coefficient_box;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error("`{0}` is not polynomial in the momenta")]
    NotPolynomial(String),
    #[error("expected a field on the {expected} bundle")]
    WrongBundle { expected: &'static str },
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] EquivError),
}

/// A function on T*M polynomial in the momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyHamiltonian {
    chart: Arc<Chart>,
    expr: Expr,
    degree: usize,
}

impl PolyHamiltonian {
    pub fn new(chart: Arc<Chart>, expr: Expr) -> Result<PolyHamiltonian, SymplecticError> {
        let expr = expr.simplify();
        let degree = expr
            .polynomial_degree(&chart.momenta())
            .ok_or_else(|| SymplecticError::NotPolynomial(expr.to_string()))?;
        Ok(PolyHamiltonian { chart, expr, degree })
    }

    /// The coordinate function `x^j`.
    pub fn coordinate(chart: Arc<Chart>, j: usize) -> PolyHamiltonian {
        let e = Expr::sym(chart.coord(j));
        PolyHamiltonian::new(chart, e).expect("coordinate is polynomial")
    }

    /// The momentum `p_j`, the Hamiltonian of `∂/∂x^j`.
    pub fn momentum(chart: Arc<Chart>, j: usize) -> PolyHamiltonian {
        let e = Expr::sym(&chart.momentum(j));
        PolyHamiltonian::new(chart, e).expect("momentum is polynomial")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Degree in the momenta.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn add(&self, other: &PolyHamiltonian) -> Result<PolyHamiltonian, SymplecticError> {
        same_chart(&self.chart, &other.chart)?;
        PolyHamiltonian::new(self.chart.clone(), self.expr.clone() + other.expr.clone())
    }

    pub fn scale(&self, s: &Expr) -> PolyHamiltonian {
        PolyHamiltonian::new(self.chart.clone(), s.clone() * self.expr.clone()).expect("scaling keeps degree")
    }

    pub fn mul(&self, other: &PolyHamiltonian) -> Result<PolyHamiltonian, SymplecticError> {
        same_chart(&self.chart, &other.chart)?;
        PolyHamiltonian::new(self.chart.clone(), self.expr.clone() * other.expr.clone())
    }

    /// Comparison by sampling over coordinates and momenta.
    pub fn equiv(&self, other: &PolyHamiltonian, cfg: &EquivConfig) -> Result<bool, SymplecticError> {
        same_chart(&self.chart, &other.chart)?;
        let bx = phase_box(&self.chart, Bundle::Cotangent, [&self.expr, &other.expr]);
        Ok(equiv(&self.expr, &other.expr, &bx, cfg)?)
    }
}

fn same_chart(a: &Chart, b: &Chart) -> Result<(), SymplecticError> {
    if a != b {
        return Err(SymplecticError::ChartMismatch);
    }
    Ok(())
}

/// Which bundle the fiber coordinates of a field belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    /// Momenta `p_j`.
    Cotangent,
    /// Velocities `ẋ^j`.
    Tangent,
}

impl Bundle {
    fn fiber(self, chart: &Chart, j: usize) -> String {
        match self {
            Bundle::Cotangent => chart.momentum(j),
            Bundle::Tangent => chart.velocity(j),
        }
    }
}

/// Sampling box over base and fiber coordinates (fibers in [-2, 2]).
pub fn phase_box<'a>(chart: &Chart, bundle: Bundle, exprs: impl IntoIterator<Item = &'a Expr>) -> crate::expr::SampleBox {
    let mut bx = match bundle {
        Bundle::Cotangent => chart.cotangent_box(2.0),
        Bundle::Tangent => chart.tangent_box(2.0),
    };
    let rest = coefficient_box(chart, exprs);
    bx.set_range(HBAR, 0.5, 2.0);
    for name in rest.names() {
        if !bx.binds(name) {
            bx.set_range(name, 0.5, 1.5);
        }
    }
    bx
}

/// A vector field on T*M or TM: `a^j ∂/∂x^j + b_j ∂/∂(fiber_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    chart: Arc<Chart>,
    bundle: Bundle,
    base: Vec<Expr>,
    fiber: Vec<Expr>,
}

impl PhaseField {
    pub fn new(chart: Arc<Chart>, bundle: Bundle, base: Vec<Expr>, fiber: Vec<Expr>) -> Result<PhaseField, SymplecticError> {
        let n = chart.dim();
        if base.len() != n || fiber.len() != n {
            return Err(GeometryError::Shape(format!("a phase field needs {n} + {n} components")).into());
        }
        let base = base.into_iter().map(|e| e.simplify()).collect();
        let fiber = fiber.into_iter().map(|e| e.simplify()).collect();
        Ok(PhaseField {
            chart,
            bundle,
            base,
            fiber,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    /// Component along `∂/∂x^j`.
    pub fn base(&self, j: usize) -> &Expr {
        &self.base[j]
    }

    /// Component along the `j`-th fiber coordinate.
    pub fn fiber(&self, j: usize) -> &Expr {
        &self.fiber[j]
    }

    /// Derivative of a phase-space function along the field.
    pub fn apply(&self, f: &Expr) -> Expr {
        let sum: Expr = (0..self.chart.dim())
            .map(|j| {
                self.base[j].clone() * f.diff(self.chart.coord(j))
                    + self.fiber[j].clone() * f.diff(&self.bundle.fiber(&self.chart, j))
            })
            .sum();
        sum.simplify()
    }

    pub fn neg(&self) -> PhaseField {
        PhaseField {
            chart: self.chart.clone(),
            bundle: self.bundle,
            base: self.base.iter().map(|e| (-e.clone()).simplify()).collect(),
            fiber: self.fiber.iter().map(|e| (-e.clone()).simplify()).collect(),
        }
    }

    /// Componentwise comparison by sampling.
    pub fn equiv(&self, other: &PhaseField, cfg: &EquivConfig) -> Result<bool, SymplecticError> {
        Ok(self.mismatches(other, cfg)?.is_empty())
    }

    /// Names of the coordinates whose components differ.
    pub fn mismatches(&self, other: &PhaseField, cfg: &EquivConfig) -> Result<Vec<String>, SymplecticError> {
        same_chart(&self.chart, &other.chart)?;
        if self.bundle != other.bundle {
            return Err(SymplecticError::WrongBundle {
                expected: bundle_name(self.bundle),
            });
        }
        let mut out = Vec::new();
        for j in 0..self.chart.dim() {
            for (label, a, b) in [
                (self.chart.coord(j).to_string(), &self.base[j], &other.base[j]),
                (self.bundle.fiber(&self.chart, j), &self.fiber[j], &other.fiber[j]),
            ] {
                if a == b {
                    continue;
                }
                let bx = phase_box(&self.chart, self.bundle, [a, b]);
                if !equiv(a, b, &bx, cfg)? {
                    out.push(label);
                }
            }
        }
        Ok(out)
    }
}

fn bundle_name(b: Bundle) -> &'static str {
    match b {
        Bundle::Cotangent => "cotangent",
        Bundle::Tangent => "tangent",
    }
}

/// `F = Σ_r Φ^{j₁..j_r} p_{j₁}⋯p_{j_r}`, summed over all index tuples.
pub fn tensor_to_hamiltonian(phi: &InhomTensor) -> Result<PolyHamiltonian, SymplecticError> {
    if phi.variance() != Variance::Contravariant {
        return Err(GeometryError::VarianceMismatch {
            expected: Variance::Contravariant,
            found: phi.variance(),
        }
        .into());
    }
    let chart = phi.chart().clone();
    let sum: Expr = phi
        .parts()
        .flat_map(|part| part.components().map(|(k, c)| (k.clone(), c.clone())).collect::<Vec<_>>())
        .map(|(key, c)| {
            let ps: Expr = key.iter().map(|&j| Expr::sym(&chart.momentum(j))).product();
            Expr::real(multiplicity(&key)) * c * ps
        })
        .sum();
    PolyHamiltonian::new(chart, sum)
}

/// `D_F = −(∂F/∂p_j) ∂/∂x^j + (∂F/∂x^j) ∂/∂p_j`, so that `D_F ⌟ ω₂ = dF`.
pub fn hamiltonian_field(f: &PolyHamiltonian) -> PhaseField {
    let c = &f.chart;
    let n = c.dim();
    let base = (0..n).map(|j| -f.expr.diff(&c.momentum(j))).collect();
    let fiber = (0..n).map(|j| f.expr.diff(c.coord(j))).collect();
    PhaseField::new(c.clone(), Bundle::Cotangent, base, fiber).expect("2n components")
}

/// The field `D` with `D ⌟ ω₂ + dF = 0`, whose integral curves solve
/// Hamilton's canonical equations.
pub fn evolution_field(f: &PolyHamiltonian) -> PhaseField {
    hamiltonian_field(f).neg()
}

/// `{F, G} = D_F G = −F_{p_j} G_{x^j} + F_{x^j} G_{p_j}`.
pub fn poisson(f: &PolyHamiltonian, g: &PolyHamiltonian) -> Result<PolyHamiltonian, SymplecticError> {
    same_chart(&f.chart, &g.chart)?;
    PolyHamiltonian::new(f.chart.clone(), hamiltonian_field(f).apply(&g.expr))
}

/// Kinetic energy `T = ½ g^{jk} p_j p_k`.
pub fn kinetic_energy(g: &Metric) -> Result<PolyHamiltonian, SymplecticError> {
    let phi = InhomTensor::from(g.inverse_tensor()?);
    Ok(tensor_to_hamiltonian(&phi)?.scale(&Expr::real(0.5)))
}

/// Pushes a field on T*M to TM through `p_j = g_jk ẋ^k`.
///
/// The velocity component is `D(ẋ^j) = a^m ∂_m g^{jk} p_k + g^{jk} b_k`,
/// rewritten in velocities.
pub fn transport_to_tangent(d: &PhaseField, g: &Metric) -> Result<PhaseField, SymplecticError> {
    if d.bundle != Bundle::Cotangent {
        return Err(SymplecticError::WrongBundle { expected: "cotangent" });
    }
    same_chart(&d.chart, g.chart())?;
    let c = g.chart().clone();
    let n = c.dim();
    let inv = g.inverse()?;
    let t = metric_transport(g)?;
    let base = d.base.iter().map(|a| t.to_tangent(a)).collect();
    let fiber = (0..n)
        .map(|j| {
            let sum: Expr = (0..n)
                .map(|k| {
                    let pk = Expr::sym(&c.momentum(k));
                    let drift: Expr = (0..n)
                        .map(|m| d.base[m].clone() * inv[j][k].diff(c.coord(m)))
                        .sum();
                    drift * pk + inv[j][k].clone() * d.fiber[k].clone()
                })
                .sum();
            t.to_tangent(&sum)
        })
        .collect();
    PhaseField::new(c, Bundle::Tangent, base, fiber)
}

/// `ẋ^j ∂/∂x^j − Γ^j_kl ẋ^k ẋ^l ∂/∂ẋ^j`.
pub fn geodesic_field(gamma: &Connection) -> PhaseField {
    let c = gamma.chart().clone();
    let n = c.dim();
    let v: Vec<Expr> = (0..n).map(|j| Expr::sym(&c.velocity(j))).collect();
    let fiber = (0..n)
        .map(|j| {
            let s: Expr = (0..n)
                .flat_map(|k| (0..n).map(move |l| (k, l)))
                .map(|(k, l)| gamma.gamma(j, k, l).clone() * v[k].clone() * v[l].clone())
                .sum();
            -s
        })
        .collect();
    PhaseField::new(c, Bundle::Tangent, v, fiber).expect("2n components")
}

/// Outcome of the second-order test for the evolution field of `F`.
#[derive(Debug, Clone)]
pub struct SecondOrderReport {
    pub second_order: bool,
    /// Coordinates `j` with `D(x^j) ≢ ẋ^j`.
    pub failing: Vec<usize>,
    /// `D(x^j) − ẋ^j` on TM, simplified.
    pub defects: Vec<Expr>,
    /// The evolution field transported to TM.
    pub field: PhaseField,
    /// Components of `α = d(F − T)` along `dx^j` and `dp_j`, on TM.
    pub work_form: Vec<Expr>,
    /// Whether `α` has no fiber part, i.e. `F − T` depends on `x` only.
    pub work_form_horizontal: bool,
}

/// Decides whether the evolution field of `F`, carried to TM by the
/// metric, satisfies `D(x^j) = ẋ^j` for every `j`.
pub fn is_second_order(f: &PolyHamiltonian, g: &Metric, cfg: &EquivConfig) -> Result<SecondOrderReport, SymplecticError> {
    same_chart(&f.chart, g.chart())?;
    let c = g.chart().clone();
    let n = c.dim();
    let field = transport_to_tangent(&evolution_field(f), g)?;
    let mut failing = Vec::new();
    let mut defects = Vec::new();
    for j in 0..n {
        let v = Expr::sym(&c.velocity(j));
        let defect = (field.base(j).clone() - v.clone()).simplify();
        let bx = phase_box(&c, Bundle::Tangent, [field.base(j)]);
        if !equiv(field.base(j), &v, &bx, cfg)? {
            failing.push(j);
        }
        defects.push(defect);
    }
    let t = metric_transport(g)?;
    let rest = (f.expr.clone() - kinetic_energy(g)?.expr).simplify();
    let mut work_form: Vec<Expr> = (0..n).map(|j| t.to_tangent(&rest.diff(c.coord(j)))).collect();
    let vertical: Vec<Expr> = (0..n).map(|j| t.to_tangent(&rest.diff(&c.momentum(j)))).collect();
    let mut horizontal = true;
    for v in &vertical {
        let bx = phase_box(&c, Bundle::Tangent, [v]);
        if !equiv(v, &Expr::zero(), &bx, cfg)? {
            horizontal = false;
        }
    }
    work_form.extend(vertical);
    Ok(SecondOrderReport {
        second_order: failing.is_empty(),
        failing,
        defects,
        field,
        work_form,
        work_form_horizontal: horizontal,
    })
}

fn gradient_norm_sq(s: &Expr, g: &Metric) -> Result<Expr, SymplecticError> {
    let c = g.chart();
    let inv = g.inverse()?;
    let n = c.dim();
    let ds: Vec<Expr> = (0..n).map(|j| s.diff(c.coord(j))).collect();
    let sum: Expr = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| inv[j][k].clone() * ds[j].clone() * ds[k].clone())
        .sum();
    Ok(sum)
}

/// `H(grad S) − E = ½ g^{jk} ∂_j S ∂_k S + U − E`.
pub fn hamilton_jacobi_residual(s: &Expr, u: &Expr, e: f64, g: &Metric) -> Result<Expr, SymplecticError> {
    Ok((Expr::real(0.5) * gradient_norm_sq(s, g)? + u.clone() - Expr::real(e)).simplify())
}

/// Both sides of `(−ħ²/2 Δ + U) φ = (ħ/(2i) ΔS + ½|∇S|² + U) φ` with
/// `φ = e^{iS/ħ}`.
pub fn broglie_identity_check(s: &Expr, u: &Expr, g: &Metric) -> Result<(Expr, Expr), SymplecticError> {
    let gamma = christoffel(g)?;
    let phi = phase(s);
    let lhs = Expr::real(-0.5) * Expr::hbar().powi(2) * lap(&phi, g, &gamma)? + u.clone() * phi.clone();
    let h = Expr::real(0.5) * gradient_norm_sq(s, g)? + u.clone();
    let rhs = (Expr::hbar() / (Expr::real(2.0) * Expr::i()) * lap(s, g, &gamma)? + h) * phi;
    Ok((lhs.simplify(), rhs.simplify()))
}

fn phase(s: &Expr) -> Expr {
    (Expr::i() * s.clone() / Expr::hbar()).exp()
}

fn lap(f: &Expr, g: &Metric, gamma: &Connection) -> Result<Expr, SymplecticError> {
    Ok(crate::geometry::laplacian_with(f, g, gamma)?)
}

/// The three conditions relating a phase `S` to a stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Abc {
    /// Hamilton–Jacobi: `H(grad S) = E`.
    pub a: bool,
    /// `ΔS = 0`.
    pub b: bool,
    /// `(−ħ²/2 Δ + U) e^{iS/ħ} = E e^{iS/ħ}`.
    pub c: bool,
}

impl Abc {
    /// Whether any two of the conditions imply the third in this case.
    pub fn consistent(&self) -> bool {
        let count = [self.a, self.b, self.c].iter().filter(|&&x| x).count();
        count != 2
    }
}

pub fn schrodinger_abc(s: &Expr, u: &Expr, e: f64, g: &Metric, cfg: &EquivConfig) -> Result<Abc, SymplecticError> {
    let c = g.chart();
    let zero = Expr::zero();
    let vanishes = |x: &Expr| -> Result<bool, SymplecticError> {
        let bx = coefficient_box(c, [x]);
        Ok(compare(x, &zero, &bx, cfg)?.equal)
    };
    let hj = hamilton_jacobi_residual(s, u, e, g)?;
    let ls = laplacian(s, g)?;
    let phi = phase(s);
    let schrodinger = Expr::real(-0.5) * Expr::hbar().powi(2) * laplacian(&phi, g)?
        + (u.clone() - Expr::real(e)) * phi;
    Ok(Abc {
        a: vanishes(&hj)?,
        b: vanishes(&ls)?,
        c: vanishes(&schrodinger.simplify())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::charts;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn cfg() -> EquivConfig {
        EquivConfig::default()
    }

    fn ham(c: &Arc<Chart>, s: &str) -> PolyHamiltonian {
        PolyHamiltonian::new(c.clone(), p(s)).unwrap()
    }

    #[test]
    fn anchored_fields() {
        let c = Arc::new(Chart::euclidean(2));
        let dx = hamiltonian_field(&PolyHamiltonian::coordinate(c.clone(), 0));
        assert!(dx.base(0).is_zero() && dx.base(1).is_zero());
        assert_eq!(dx.fiber(0), &Expr::one());
        assert!(dx.fiber(1).is_zero());
        let dp = hamiltonian_field(&PolyHamiltonian::momentum(c.clone(), 1));
        assert_eq!(dp.base(1), &Expr::real(-1.0));
        assert!(dp.base(0).is_zero() && dp.fiber(0).is_zero() && dp.fiber(1).is_zero());
    }

    #[test]
    fn bracket_table() {
        let c = Arc::new(Chart::euclidean(2));
        for j in 0..2 {
            for k in 0..2 {
                let pj = PolyHamiltonian::momentum(c.clone(), j);
                let xk = PolyHamiltonian::coordinate(c.clone(), k);
                let expected = if j == k { -1.0 } else { 0.0 };
                assert_eq!(poisson(&pj, &xk).unwrap().expr().as_const().unwrap().re, expected);
                let xj = PolyHamiltonian::coordinate(c.clone(), j);
                assert!(poisson(&xj, &xk).unwrap().expr().is_zero());
            }
        }
    }

    #[test]
    fn bracket_of_kinetic_energy_with_potential() {
        let c = Arc::new(Chart::euclidean(1));
        let two_t = ham(&c, "p_x^2");
        let u = ham(&c, "x^3");
        let b = poisson(&two_t, &u).unwrap();
        assert!(b.equiv(&ham(&c, "-6*p_x*x^2"), &cfg()).unwrap());
    }

    #[test]
    fn tensor_hamiltonians() {
        let g = charts::sphere();
        let t2 = tensor_to_hamiltonian(&InhomTensor::from(g.inverse_tensor().unwrap())).unwrap();
        assert_eq!(t2.degree(), 2);
        let c = g.chart();
        assert!(t2.equiv(&ham(c, "p_th^2 + p_ph^2/sin(th)^2"), &cfg()).unwrap());
        let plane = Arc::new(Chart::euclidean(2));
        let dy = crate::geometry::SymTensor::zero(plane.clone(), Variance::Contravariant, 1).with(&[1], Expr::one());
        assert_eq!(tensor_to_hamiltonian(&dy.into()).unwrap().expr(), &p("p_y"));
        assert!(matches!(
            PolyHamiltonian::new(plane, p("exp(p_x)")),
            Err(SymplecticError::NotPolynomial(_))
        ));
    }

    #[test]
    fn geodesic_field_recovery() {
        for g in [charts::flat(2), charts::sphere(), charts::conformal_plane()] {
            let t = kinetic_energy(&g).unwrap();
            let d = transport_to_tangent(&hamiltonian_field(&t.scale(&Expr::real(-1.0))), &g).unwrap();
            let expected = geodesic_field(&christoffel(&g).unwrap());
            assert!(d.mismatches(&expected, &cfg()).unwrap().is_empty());
        }
    }

    #[test]
    fn second_order_examples() {
        let g = charts::sphere();
        let c = g.chart().clone();
        let t = kinetic_energy(&g).unwrap();
        let f = t.add(&ham(&c, "cos(th)*ph")).unwrap();
        let report = is_second_order(&f, &g, &cfg()).unwrap();
        assert!(report.second_order && report.work_form_horizontal);
        let f = t.add(&ham(&c, "p_th")).unwrap();
        let report = is_second_order(&f, &g, &cfg()).unwrap();
        assert_eq!(report.failing, vec![0]);
        assert!(!report.work_form_horizontal);
        let f = t.scale(&Expr::real(2.0));
        assert_eq!(is_second_order(&f, &g, &cfg()).unwrap().failing, vec![0, 1]);
    }

    #[test]
    fn hamilton_jacobi_examples() {
        let flat = charts::flat(2);
        let s = p("1.5*x - 0.5*y");
        let r = hamilton_jacobi_residual(&s, &Expr::zero(), 1.25, &flat).unwrap();
        assert!(r.as_const().unwrap().norm() < 1e-15);
        let r = hamilton_jacobi_residual(&s, &Expr::zero(), 0.0, &flat).unwrap();
        assert!((r.as_const().unwrap().re - 1.25).abs() < 1e-15);
        let s2 = charts::sphere();
        let r = hamilton_jacobi_residual(&p("2*ph"), &Expr::zero(), 0.5, &s2).unwrap();
        let bx = s2.chart().sample_box();
        assert!(equiv(&r, &p("2/sin(th)^2 - 0.5"), &bx, &cfg()).unwrap());
    }

    #[test]
    fn broglie_examples() {
        let line = charts::flat(1);
        let (lhs, rhs) = broglie_identity_check(&p("1.3*x"), &Expr::zero(), &line).unwrap();
        let bx = phase_box(line.chart(), Bundle::Cotangent, [&lhs, &rhs]);
        assert!(equiv(&lhs, &p("0.845*exp(i*1.3*x/hbar)"), &bx, &cfg()).unwrap());
        assert!(equiv(&lhs, &rhs, &bx, &cfg()).unwrap());
        for (g, s) in [(charts::flat(2), "x^2/2"), (charts::sphere(), "cos(th)")] {
            let (lhs, rhs) = broglie_identity_check(&p(s), &Expr::zero(), &g).unwrap();
            let bx = coefficient_box(g.chart(), [&lhs, &rhs]);
            assert!(equiv(&lhs, &rhs, &bx, &cfg()).unwrap());
        }
    }

    #[test]
    fn abc_examples() {
        let flat = charts::flat(2);
        let plane_wave = schrodinger_abc(&p("x + 2*y"), &Expr::zero(), 2.5, &flat, &cfg()).unwrap();
        assert_eq!(plane_wave, Abc { a: true, b: true, c: true });
        let line = charts::flat(1);
        let quad = schrodinger_abc(&p("x^2"), &Expr::zero(), 0.7, &line, &cfg()).unwrap();
        assert!(!quad.a && !quad.b && !quad.c);
        let constant = schrodinger_abc(&Expr::zero(), &p("3"), 3.0, &flat, &cfg()).unwrap();
        assert_eq!(constant, Abc { a: true, b: true, c: true });
    }
}
