use geoquant::expmap::{
    default_tolerance, exp_pullback, geodesic_flow, verify_equivalence, vertical_differential,
    vertical_differential_scaled, FDConfig, GeodesicState, IntegratorConfig,
};
use geoquant::expr::{parse, Expr};
use geoquant::geometry::{all_tuples, charts, christoffel, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

/// Chart, base point and test functions written in that chart's coordinates.
fn battery() -> Vec<(&'static str, Metric, Vec<f64>, Vec<&'static str>)> {
    vec![
        ("flat1", charts::flat(1), vec![0.3], vec!["x", "x^4", "sin(x)", "exp(x)*x", "cos(2*x)"]),
        (
            "flat2",
            charts::flat(2),
            vec![0.3, -0.2],
            vec!["x", "x^2*y", "sin(x)*cos(y)", "exp(x+y)", "x*y^3"],
        ),
        (
            "flat3",
            charts::flat(3),
            vec![0.3, -0.2, 0.5],
            vec!["x*y*z", "sin(x)*z", "exp(y)*z^2", "x^3", "cos(x+y+z)"],
        ),
        (
            "sphere",
            charts::sphere(),
            vec![1.0, 0.3],
            vec!["th", "ph", "sin(th)*cos(ph)", "th^2*ph", "exp(th)"],
        ),
        (
            "conformal",
            charts::conformal_plane(),
            vec![0.2, 0.4],
            vec!["x", "y", "sin(x)*cos(y)", "x^2*y", "exp(x)"],
        ),
    ]
}

#[test]
fn equivalence_holds_on_every_chart() {
    let (cfg, fd) = (IntegratorConfig::default(), FDConfig::default());
    for (name, g, x0, fs) in battery() {
        let gamma = christoffel(&g).unwrap();
        for f in fs {
            for r in 1..=3 {
                let rep = verify_equivalence(&p(f), &x0, r, &gamma, &cfg, &fd, default_tolerance(r)).unwrap();
                assert!(rep.pass, "{name} f={f} r={r}: {:e}", rep.max_rel_error);
            }
        }
    }
}

#[test]
fn flat_equivalence_is_tight() {
    let (cfg, fd) = (IntegratorConfig::default(), FDConfig::default());
    let g = charts::flat(2);
    let gamma = christoffel(&g).unwrap();
    for f in ["x^2*y", "x^3 + y^3", "x*y"] {
        for r in 1..=3 {
            let rep = verify_equivalence(&p(f), &[0.3, -0.2], r, &gamma, &cfg, &fd, 1e-9).unwrap();
            assert!(rep.pass, "{f} r={r}: {:e}", rep.max_rel_error);
        }
    }
}

#[test]
fn exponential_is_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cfg = IntegratorConfig::default();
    for (name, g, x0, _) in battery() {
        let gamma = christoffel(&g).unwrap();
        for _ in 0..5 {
            let v: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let s: f64 = rng.gen_range(0.0..1.0);
            let a = geodesic_flow(&GeodesicState::new(x0.clone(), v.clone()), &gamma, s, &cfg).unwrap();
            let sv: Vec<f64> = v.iter().map(|c| c * s).collect();
            let b = geodesic_flow(&GeodesicState::new(x0.clone(), sv), &gamma, 1.0, &cfg).unwrap();
            let dist = a.x.iter().zip(&b.x).map(|(u, w)| (u - w).powi(2)).sum::<f64>().sqrt();
            assert!(dist <= 1e-8, "{name}: {dist:e}");
        }
    }
}

/// Great circle through (θ₀, φ₀) with initial velocity `v`, at parameter `t`.
fn great_circle(theta: f64, phi: f64, v: [f64; 2], t: f64) -> [f64; 2] {
    let (st, ct, sp, cp) = (theta.sin(), theta.cos(), phi.sin(), phi.cos());
    let pos = [st * cp, st * sp, ct];
    let e_th = [ct * cp, ct * sp, -st];
    let e_ph = [-sp, cp, 0.0];
    let u: Vec<f64> = (0..3).map(|k| v[0] * e_th[k] + v[1] * st * e_ph[k]).collect();
    let w = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    let q: Vec<f64> = (0..3).map(|k| pos[k] * (w * t).cos() + u[k] / w * (w * t).sin()).collect();
    [q[2].acos(), q[1].atan2(q[0])]
}

#[test]
fn integrator_is_fourth_order() {
    // a tilted great circle; the equator itself is integrated exactly
    let gamma = christoffel(&charts::sphere()).unwrap();
    let (theta, phi, v, t) = (1.2, 0.1, [0.4, 0.9], 1.0);
    let exact = great_circle(theta, phi, v, t);
    let err = |step: f64| {
        let cfg = IntegratorConfig { step, ..Default::default() };
        let end = geodesic_flow(&GeodesicState::new(vec![theta, phi], v.to_vec()), &gamma, t, &cfg).unwrap();
        ((end.x[0] - exact[0]).powi(2) + (end.x[1] - exact[1]).powi(2)).sqrt()
    };
    let ratio = err(0.05) / err(0.025);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn scaled_differential_is_homogeneous() {
    let (cfg, fd) = (IntegratorConfig::default(), FDConfig::default());
    for (name, g, x0, fs) in battery() {
        let gamma = christoffel(&g).unwrap();
        let f = p(fs[2]);
        for r in 1..=2 {
            let base = vertical_differential(&f, &x0, r, &gamma, &cfg, &fd).unwrap();
            for s in [0.5, 2.0] {
                let scaled = vertical_differential_scaled(&f, &x0, r, s, &gamma, &cfg, &fd).unwrap();
                for (key, b) in &base.components {
                    let a = scaled.get(key);
                    let err = (a - b * s.powi(r as i32)).norm();
                    assert!(err <= 1e-5 * (1.0 + b.norm()), "{name} r={r} s={s}: {err:e}");
                }
            }
        }
    }
}

#[test]
fn contraction_with_velocity_is_derivative_along_geodesic() {
    let (cfg, fd) = (IntegratorConfig::default(), FDConfig::default());
    for (name, g, x0, fs) in battery() {
        let gamma = christoffel(&g).unwrap();
        let xi: Vec<f64> = (0..g.dim()).map(|j| 0.6 - 0.5 * j as f64).collect();
        let f = p(fs[2]);
        // r-th derivative of s ↦ f(exp(s ξ)) at s = 0, by central differences in s
        let along = |s: f64| {
            let v: Vec<f64> = xi.iter().map(|c| c * s).collect();
            exp_pullback(&f, &x0, &v, &gamma, &cfg).unwrap().re
        };
        let h = 1e-2;
        let derivs = [
            (along(h) - along(-h)) / (2.0 * h),
            (along(h) - 2.0 * along(0.0) + along(-h)) / (h * h),
            (along(2.0 * h) - 2.0 * along(h) + 2.0 * along(-h) - along(-2.0 * h)) / (2.0 * h.powi(3)),
        ];
        for r in 1..=3 {
            let d = vertical_differential(&f, &x0, r, &gamma, &cfg, &fd).unwrap();
            let contracted: f64 = all_tuples(g.dim(), r)
                .iter()
                .map(|idx| d.get(idx).re * idx.iter().map(|&j| xi[j]).product::<f64>())
                .sum();
            let err = (contracted - derivs[r - 1]).abs();
            assert!(err <= 1e-4 * (1.0 + contracted.abs()), "{name} r={r}: {err:e}");
        }
    }
}
