use geoquant::expr::{equiv, EquivConfig, Expr};
use geoquant::geometry::{charts, christoffel, multi_index_of, factorial, sorted_keys, Metric, Variance};
use geoquant::quantizer::{
    coefficient_box, inhom_tensor_equiv, minus_i_hbar_pow, symbol, sym_tensor_equiv,
    Quantizer,
};
use geoquant::random;
use geoquant::symplectic::{poisson, tensor_to_hamiltonian};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shipped() -> Vec<(&'static str, Metric)> {
    vec![
        ("flat1", charts::flat(1)),
        ("flat2", charts::flat(2)),
        ("flat3", charts::flat(3)),
        ("sphere", charts::sphere()),
        ("conformal", charts::conformal_plane()),
    ]
}

#[test]
fn dequantize_inverts_quantize() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (name, g) in shipped() {
        let q = Quantizer::new(christoffel(&g).unwrap());
        for _ in 0..4 {
            let phi = random::inhom_tensor(g.chart(), Variance::Contravariant, 3, &mut rng);
            let op = q.quantize(&phi).unwrap();
            let back = q.dequantize(&op).unwrap();
            assert!(inhom_tensor_equiv(&back, &phi, &EquivConfig::default()).unwrap(), "{name}");
        }
    }
}

#[test]
fn symbol_recovers_top_part() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (name, g) in shipped() {
        let q = Quantizer::new(christoffel(&g).unwrap());
        for r in 0..=3 {
            let phi = random::sym_tensor(g.chart(), Variance::Contravariant, r, &mut rng);
            let op = q.quantize_homogeneous(&phi).unwrap();
            let expected = phi.map(|c| minus_i_hbar_pow(r as i32) * c.clone());
            assert!(sym_tensor_equiv(&symbol(&op, r).unwrap(), &expected, &EquivConfig::default()).unwrap(), "{name} r={r}");
        }
    }
}

#[test]
fn flat_coefficients_are_multinomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = charts::flat(3);
    let c = g.chart().clone();
    let q = Quantizer::new(christoffel(&g).unwrap());
    let cfg = EquivConfig::default().with_tol(1e-12);
    for r in 0..=3 {
        let phi = random::sym_tensor(&c, Variance::Contravariant, r, &mut rng);
        let op = q.quantize_homogeneous(&phi).unwrap();
        for key in sorted_keys(3, r) {
            let alpha = multi_index_of(&key, 3);
            let multinomial = factorial(r) / alpha.iter().map(|&a| factorial(a)).product::<f64>();
            let expected = minus_i_hbar_pow(r as i32) * Expr::real(multinomial) * phi.get(&key);
            let got = op.coefficient(&alpha);
            let bx = coefficient_box(&c, [&got, &expected]);
            assert!(equiv(&got, &expected, &bx, &cfg).unwrap());
        }
        assert!(op.coefficients().all(|(a, _)| a.iter().sum::<usize>() == r));
    }
}

#[test]
fn commutator_symbol_is_minus_poisson_bracket() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for (name, g) in [("sphere", charts::sphere()), ("conformal", charts::conformal_plane())] {
        let q = Quantizer::new(christoffel(&g).unwrap());
        for _ in 0..3 {
            let phi = random::sym_tensor(g.chart(), Variance::Contravariant, 2, &mut rng);
            let psi = random::sym_tensor(g.chart(), Variance::Contravariant, 2, &mut rng);
            let (a, b) = (q.quantize_homogeneous(&phi).unwrap(), q.quantize_homogeneous(&psi).unwrap());
            let comm = q.commutator(&a, &b).unwrap();
            let lhs = tensor_to_hamiltonian(&geoquant::quantizer::symbol_part(&comm, 3).into()).unwrap();
            let sa = tensor_to_hamiltonian(&symbol(&a, 2).unwrap().into()).unwrap();
            let sb = tensor_to_hamiltonian(&symbol(&b, 2).unwrap().into()).unwrap();
            let rhs = poisson(&sa, &sb).unwrap().scale(&Expr::real(-1.0));
            assert!(lhs.equiv(&rhs, &EquivConfig::default().with_tol(1e-8)).unwrap(), "{name}");
        }
    }
}

#[test]
fn operators_compose_like_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let g = charts::sphere();
    let c = g.chart().clone();
    let q = Quantizer::new(christoffel(&g).unwrap());
    let a = q.quantize(&random::inhom_tensor(&c, Variance::Contravariant, 2, &mut rng)).unwrap();
    let b = q.quantize(&random::inhom_tensor(&c, Variance::Contravariant, 1, &mut rng)).unwrap();
    let f = random::scalar(&c, &mut rng);
    let lhs = a.compose(&b).unwrap().apply(&f);
    let rhs = a.apply(&b.apply(&f));
    let bx = coefficient_box(&c, [&lhs, &rhs]);
    assert!(equiv(&lhs, &rhs, &bx, &EquivConfig::default()).unwrap());
    let zero = a.commutator(&a).unwrap();
    assert!(zero.is_zero());
}
