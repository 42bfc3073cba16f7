use super::{christoffel, Connection, FullTensor, GeometryError, Metric, SymTensor, Variance};
use super::tensor::multiplicity;
use crate::expr::Expr;

/// `(∇T)_{k j₁..j_r} = ∂_k T_{j₁..j_r} − Σ_m Γ^l_{k j_m} T_{j₁..l..j_r}`.
///
/// The new index is placed first. The result is generally not symmetric.
pub fn covariant_differential_full(
    t: &FullTensor,
    gamma: &Connection,
) -> Result<FullTensor, GeometryError> {
    if t.variance() != Variance::Covariant {
        return Err(GeometryError::VarianceMismatch {
            expected: Variance::Covariant,
            found: t.variance(),
        });
    }
    if **t.chart() != **gamma.chart() {
        return Err(GeometryError::ChartMismatch);
    }
    let chart = t.chart().clone();
    let n = chart.dim();
    Ok(FullTensor::from_fn(chart.clone(), Variance::Covariant, t.order() + 1, |idx| {
        let (k, rest) = (idx[0], &idx[1..]);
        let mut out = t.get(rest).diff(chart.coord(k));
        let mut shifted = rest.to_vec();
        for m in 0..rest.len() {
            for l in 0..n {
                let g = gamma.gamma(l, k, rest[m]);
                if g.is_zero() {
                    continue;
                }
                shifted[m] = l;
                out = out - g.clone() * t.get(&shifted).clone();
            }
            shifted[m] = rest[m];
        }
        out.simplify()
    }))
}

/// Covariant differential of a symmetric covariant tensor.
pub fn covariant_differential(
    t: &SymTensor,
    gamma: &Connection,
) -> Result<FullTensor, GeometryError> {
    covariant_differential_full(&t.to_full(), gamma)
}

/// The `r`-fold iterated covariant differential `∇ ⋯ ∇ f`, unsymmetrized.
pub fn iterated_differential(
    f: &Expr,
    gamma: &Connection,
    r: usize,
) -> Result<FullTensor, GeometryError> {
    let chart = gamma.chart().clone();
    let mut t = FullTensor::from_fn(chart, Variance::Covariant, 0, |_| f.clone());
    for _ in 0..r {
        t = covariant_differential_full(&t, gamma)?;
    }
    Ok(t)
}

/// Symmetrization (average over index permutations) of the `r`-fold
/// iterated covariant differential of `f`.
pub fn sym_iterated_differential(
    f: &Expr,
    gamma: &Connection,
    r: usize,
) -> Result<SymTensor, GeometryError> {
    Ok(iterated_differential(f, gamma, r)?.symmetrize())
}

/// Full contraction `Σ Φ^{j₁..j_r} a_{j₁..j_r}` over all index tuples.
pub fn contract(phi: &SymTensor, a: &SymTensor) -> Result<Expr, GeometryError> {
    if phi.variance() != Variance::Contravariant {
        return Err(GeometryError::VarianceMismatch {
            expected: Variance::Contravariant,
            found: phi.variance(),
        });
    }
    if a.variance() != Variance::Covariant {
        return Err(GeometryError::VarianceMismatch {
            expected: Variance::Covariant,
            found: a.variance(),
        });
    }
    if phi.order() != a.order() {
        return Err(GeometryError::OrderMismatch(phi.order(), a.order()));
    }
    if **phi.chart() != **a.chart() {
        return Err(GeometryError::ChartMismatch);
    }
    let sum: Expr = phi
        .components()
        .map(|(key, v)| {
            let w = a.get(key);
            Expr::real(multiplicity(key)) * v.clone() * w
        })
        .sum();
    Ok(sum.simplify())
}

/// Laplace–Beltrami operator applied to `f`.
pub fn laplacian(f: &Expr, g: &Metric) -> Result<Expr, GeometryError> {
    laplacian_with(f, g, &christoffel(g)?)
}

pub(crate) fn laplacian_with(f: &Expr, g: &Metric, gamma: &Connection) -> Result<Expr, GeometryError> {
    contract(&g.inverse_tensor()?, &sym_iterated_differential(f, gamma, 2)?)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{all_tuples, charts, permutations, Chart};
    use super::*;
    use crate::expr::{equiv, parse, EquivConfig, SampleBox};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn same(a: &Expr, b: &Expr, bx: &SampleBox) -> bool {
        equiv(a, b, bx, &EquivConfig::default()).unwrap()
    }

    #[test]
    fn first_differential_is_gradient() {
        let g = charts::sphere();
        let gamma = christoffel(&g).unwrap();
        let f = p("sin(th)*ph");
        let d = sym_iterated_differential(&f, &gamma, 1).unwrap();
        let bx = g.chart().sample_box();
        assert!(same(&d.get(&[0]), &p("cos(th)*ph"), &bx));
        assert!(same(&d.get(&[1]), &p("sin(th)"), &bx));
        let x1 = sym_iterated_differential(&p("x"), &Connection::flat(Arc::new(Chart::euclidean(2))), 1)
            .unwrap();
        assert_eq!(x1.get(&[0]), Expr::one());
        assert!(x1.get(&[1]).is_zero());
    }

    #[test]
    fn second_differential_on_sphere() {
        // ∇²θ = −Γ^θ_jk: only the (φ,φ) entry survives, equal to sinθcosθ.
        let g = charts::sphere();
        let gamma = christoffel(&g).unwrap();
        let bx = g.chart().sample_box();
        let d2 = covariant_differential(
            &sym_iterated_differential(&p("th"), &gamma, 1).unwrap(),
            &gamma,
        )
        .unwrap();
        assert!(same(d2.get(&[1, 1]), &p("sin(th)*cos(th)"), &bx));
        for idx in [[0, 0], [0, 1], [1, 0]] {
            assert!(same(d2.get(&idx), &Expr::zero(), &bx));
        }
    }

    #[test]
    fn second_differential_formula() {
        // ∂²f/∂x^k∂x^j − Γ^l_jk ∂f/∂x^l for any connection
        let g = charts::conformal_plane();
        let gamma = christoffel(&g).unwrap();
        let c = g.chart();
        let f = p("x^2*sin(y) + exp(x*y)");
        let d2 = sym_iterated_differential(&f, &gamma, 2).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                let mut expected = f.diff(c.coord(j)).diff(c.coord(k));
                for l in 0..2 {
                    expected = expected - gamma.gamma(l, j, k).clone() * f.diff(c.coord(l));
                }
                assert!(same(&d2.get(&[j, k]), &expected, &c.sample_box()));
            }
        }
    }

    #[test]
    fn flat_hessian_and_third_derivative() {
        let gamma = Connection::flat(Arc::new(Chart::euclidean(2)));
        let d2 = iterated_differential(&p("x^2*y"), &gamma, 2).unwrap();
        assert_eq!(d2.get(&[0, 0]).simplify(), p("2*y"));
        assert_eq!(d2.get(&[0, 1]).simplify(), p("2*x"));
        assert_eq!(d2.get(&[1, 0]).simplify(), p("2*x"));
        assert!(d2.get(&[1, 1]).is_zero());
        let gamma1 = Connection::flat(Arc::new(Chart::euclidean(1)));
        let d3 = sym_iterated_differential(&p("x^4"), &gamma1, 3).unwrap();
        assert_eq!(d3.get(&[0, 0, 0]), p("24*x"));
    }

    #[test]
    fn contraction_examples() {
        let chart = Arc::new(Chart::euclidean(2));
        let phi = SymTensor::scalar(chart.clone(), Variance::Contravariant, p("x"));
        let a = SymTensor::scalar(chart.clone(), Variance::Covariant, p("y"));
        assert_eq!(contract(&phi, &a).unwrap(), p("x*y"));
        let dx = SymTensor::zero(chart.clone(), Variance::Contravariant, 1).with(&[0], Expr::one());
        let gamma = Connection::flat(chart.clone());
        let df = sym_iterated_differential(&p("x^3*y"), &gamma, 1).unwrap();
        assert_eq!(contract(&dx, &df).unwrap(), p("3*x^2*y").simplify());
        assert!(matches!(contract(&a, &phi), Err(GeometryError::VarianceMismatch { .. })));
        assert!(matches!(contract(&dx, &a), Err(GeometryError::OrderMismatch(1, 0))));
    }

    #[test]
    fn laplacian_examples() {
        let flat = charts::flat(2);
        assert_eq!(laplacian(&p("x^2 + y^2"), &flat).unwrap().simplify(), p("4"));
        let line = charts::flat(1);
        let bx = line.chart().sample_box().with_fixed("k", 1.7);
        let lap = laplacian(&p("exp(i*k*x)"), &line).unwrap();
        assert!(same(&lap, &p("-k^2*exp(i*k*x)"), &bx));
        let s2 = charts::sphere();
        let lap = laplacian(&p("cos(th)"), &s2).unwrap();
        assert!(same(&lap, &p("-2*cos(th)"), &s2.chart().sample_box()));
    }

    #[test]
    fn sphere_laplacian_matches_hand_expansion() {
        // Δf = (1/sinθ)∂θ(sinθ ∂θ f) + (1/sin²θ)∂φ² f
        let s2 = charts::sphere();
        let f = p("sin(th)^3*cos(2*ph) + th*ph^2");
        let hand = p("(1/sin(th))*(cos(th)*(3*sin(th)^2*cos(th)*cos(2*ph) + ph^2) \
                      + sin(th)*(6*sin(th)*cos(th)^2*cos(2*ph) - 3*sin(th)^3*cos(2*ph))) \
                      + (1/sin(th)^2)*(-4*sin(th)^3*cos(2*ph) + 2*th)");
        let bx = SampleBox::new().with_range("th", 0.2, 2.9).with_range("ph", -1.5, 1.5);
        assert!(same(&laplacian(&f, &s2).unwrap(), &hand, &bx));
    }

    #[test]
    fn symmetrized_differential_is_permutation_invariant() {
        let g = charts::sphere();
        let gamma = christoffel(&g).unwrap();
        let full = sym_iterated_differential(&p("th^2*ph"), &gamma, 3).unwrap().to_full();
        for idx in all_tuples(2, 3) {
            for perm in permutations(&idx) {
                assert_eq!(full.get(&idx), full.get(&perm));
            }
        }
    }

    #[test]
    fn flat_charts_give_plain_partials() {
        let g = charts::flat(3);
        let gamma = christoffel(&g).unwrap();
        let c = g.chart();
        let f = p("x^2*y*z + sin(x*z) + y^3");
        let bx = c.sample_box();
        for r in 1..=3 {
            let d = sym_iterated_differential(&f, &gamma, r).unwrap();
            for idx in all_tuples(3, r) {
                let names: Vec<&str> = idx.iter().map(|&j| c.coord(j)).collect();
                assert!(same(&d.get(&idx), &f.diff_many(&names), &bx));
            }
        }
    }

    #[test]
    fn contraction_with_vector_power_symmetrizes() {
        // ⟨∇^r f, v^⊗r⟩ = ⟨∇^r_sym f, v^⊗r⟩
        let g = charts::sphere();
        let gamma = christoffel(&g).unwrap();
        let bx = g.chart().sample_box();
        let f = p("sin(th)*cos(ph) + th^2");
        let v = [p("0.7"), p("-1.3")];
        for r in 1..=3 {
            let full = iterated_differential(&f, &gamma, r).unwrap();
            let sym = full.symmetrize().to_full();
            let pair = |t: &FullTensor| -> Expr {
                t.entries()
                    .map(|(idx, e)| idx.iter().map(|&j| v[j].clone()).product::<Expr>() * e.clone())
                    .sum()
            };
            assert!(same(&pair(&full), &pair(&sym), &bx), "r = {r}");
        }
    }
}
