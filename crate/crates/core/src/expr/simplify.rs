//! Local rewriting: constant folding, 0/1 absorption, flattening of sums and
//! products, and merging of like terms and integer powers of equal bases.
//! The result is semantically equal but not canonical.

use num_complex::Complex64;

use super::eval::apply_func;
use super::{integer_value, BinOp, Expr, Func};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Expr {
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Sym(_) => self.clone(),
            Expr::Unary(f, a) => {
                let a = a.simplify();
                if let Expr::Const(c) = a {
                    if let Some(v) = apply_func(*f, c) {
                        if v.re.is_finite() && v.im.is_finite() {
                            return Expr::Const(v);
                        }
                    }
                }
                if *f == Func::Neg {
                    return build_product(Product::of(&a).scaled(-ONE));
                }
                Expr::unary(*f, a)
            }
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => {
                let mut terms = Vec::new();
                collect_terms(self, ONE, &mut terms);
                build_sum(terms)
            }
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => {
                let mut prod = Product::default();
                prod.absorb(self, 1);
                build_product(prod)
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                let a = a.simplify();
                let b = b.simplify();
                if let Some(k) = b.as_const().and_then(integer_value) {
                    let mut prod = Product::default();
                    prod.absorb(&a, k);
                    return build_product(prod);
                }
                Expr::binary(BinOp::Pow, a, b)
            }
        }
    }
}

/// `coeff * Π base^exp` with integer exponents, plus opaque factors.
#[derive(Debug)]
struct Product {
    coeff: Complex64,
    factors: Vec<(Expr, i32)>,
}

impl Default for Product {
    fn default() -> Self {
        Product {
            coeff: ONE,
            factors: Vec::new(),
        }
    }
}

impl Product {
    fn of(e: &Expr) -> Product {
        let mut p = Product::default();
        p.absorb(e, 1);
        p
    }

    fn scaled(mut self, c: Complex64) -> Product {
        self.coeff *= c;
        self
    }

    /// Multiplies `e^k` (already simplified or not) into the product.
    fn absorb(&mut self, e: &Expr, k: i32) {
        if k == 0 {
            return;
        }
        match e {
            Expr::Const(c) if *c == ZERO && k < 0 => self.push(e.clone(), k),
            Expr::Const(c) => self.coeff *= c.powi(k),
            Expr::Unary(Func::Neg, a) => {
                if k % 2 != 0 {
                    self.coeff = -self.coeff;
                }
                self.absorb(a, k);
            }
            Expr::Binary(BinOp::Mul, a, b) => {
                self.absorb(a, k);
                self.absorb(b, k);
            }
            Expr::Binary(BinOp::Div, a, b) => {
                self.absorb(a, k);
                self.absorb(b, -k);
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                let b = b.simplify();
                match b.as_const().and_then(integer_value) {
                    Some(j) => self.absorb(a, j.saturating_mul(k)),
                    None => self.push(Expr::binary(BinOp::Pow, a.simplify(), b), k),
                }
            }
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => {
                let s = e.simplify();
                match s {
                    Expr::Binary(BinOp::Add | BinOp::Sub, ..) => self.push(s, k),
                    Expr::Unary(Func::Neg, a) => {
                        if k % 2 != 0 {
                            self.coeff = -self.coeff;
                        }
                        self.push((*a).clone(), k)
                    }
                    other => self.absorb(&other, k),
                }
            }
            Expr::Sym(_) => self.push(e.clone(), k),
            Expr::Unary(..) => {
                let s = e.simplify();
                match s {
                    Expr::Unary(..) | Expr::Sym(_) => self.push(s, k),
                    other => self.absorb(&other, k),
                }
            }
        }
    }

    fn push(&mut self, base: Expr, k: i32) {
        if let Some((_, j)) = self.factors.iter_mut().find(|(b, _)| *b == base) {
            *j += k;
        } else {
            self.factors.push((base, k));
        }
    }
}

fn build_product(mut p: Product) -> Expr {
    let coeff = p.coeff;
    if coeff == ZERO {
        return Expr::zero();
    }
    p.factors.retain(|(_, k)| *k != 0);
    p.factors.sort_by(|a, b| a.0.structural_cmp(&b.0));
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    for (base, k) in p.factors {
        let target = if k > 0 { &mut num } else { &mut den };
        target.push(if k.abs() == 1 {
            base
        } else {
            Expr::Binary(BinOp::Pow, base.into(), Expr::real(k.abs() as f64).into())
        });
    }
    let chain = |v: Vec<Expr>| {
        v.into_iter()
            .reduce(|a, b| Expr::Binary(BinOp::Mul, a.into(), b.into()))
    };
    let body = match (chain(num), chain(den)) {
        (None, None) => return Expr::Const(coeff),
        (Some(n), None) => n,
        (None, Some(d)) => Expr::Binary(BinOp::Div, Expr::one().into(), d.into()),
        (Some(n), Some(d)) => Expr::Binary(BinOp::Div, n.into(), d.into()),
    };
    scale(coeff, body)
}

fn scale(c: Complex64, body: Expr) -> Expr {
    if c == ONE {
        body
    } else if c == -ONE {
        Expr::Unary(Func::Neg, body.into())
    } else if c.im == 0.0 && c.re < 0.0 {
        Expr::Unary(
            Func::Neg,
            Expr::Binary(BinOp::Mul, Expr::real(-c.re).into(), body.into()).into(),
        )
    } else {
        Expr::Binary(BinOp::Mul, Expr::Const(c).into(), body.into())
    }
}

/// Splits a simplified term into (coefficient, rest).
fn split_coeff(e: Expr) -> (Complex64, Option<Expr>) {
    match e {
        Expr::Const(c) => (c, None),
        Expr::Unary(Func::Neg, a) => {
            let (c, rest) = split_coeff((*a).clone());
            (-c, rest)
        }
        Expr::Binary(BinOp::Mul, a, b) => match a.as_const() {
            Some(c) => (c, Some((*b).clone())),
            None => (ONE, Some(Expr::Binary(BinOp::Mul, a, b))),
        },
        other => (ONE, Some(other)),
    }
}

fn collect_terms(e: &Expr, sign: Complex64, out: &mut Vec<(Complex64, Option<Expr>)>) {
    match e {
        Expr::Binary(BinOp::Add, a, b) => {
            collect_terms(a, sign, out);
            collect_terms(b, sign, out);
        }
        Expr::Binary(BinOp::Sub, a, b) => {
            collect_terms(a, sign, out);
            collect_terms(b, -sign, out);
        }
        Expr::Unary(Func::Neg, a) => collect_terms(a, -sign, out),
        other => {
            let s = other.simplify();
            match &s {
                Expr::Binary(BinOp::Add | BinOp::Sub, ..) => collect_terms(&s, sign, out),
                Expr::Unary(Func::Neg, a) if matches!(**a, Expr::Binary(BinOp::Add | BinOp::Sub, ..)) => {
                    collect_terms(a, -sign, out)
                }
                _ => {
                    let (c, rest) = split_coeff(s);
                    out.push((sign * c, rest));
                }
            }
        }
    }
}

fn build_sum(terms: Vec<(Complex64, Option<Expr>)>) -> Expr {
    let mut constant = ZERO;
    let mut merged: Vec<(Complex64, Expr)> = Vec::new();
    for (c, rest) in terms {
        match rest {
            None => constant += c,
            Some(r) => {
                if let Some((acc, _)) = merged.iter_mut().find(|(_, e)| *e == r) {
                    *acc += c;
                } else {
                    merged.push((c, r));
                }
            }
        }
    }
    merged.retain(|(c, _)| *c != ZERO);
    merged.sort_by(|a, b| a.1.structural_cmp(&b.1));
    let mut acc: Option<Expr> = None;
    for (c, body) in merged {
        let negative = c.im == 0.0 && c.re < 0.0;
        let term = if negative { scale(-c, body) } else { scale(c, body) };
        acc = Some(match acc {
            None => {
                if negative {
                    Expr::Unary(Func::Neg, term.into())
                } else {
                    term
                }
            }
            Some(prev) => {
                let op = if negative { BinOp::Sub } else { BinOp::Add };
                Expr::Binary(op, prev.into(), term.into())
            }
        });
    }
    match acc {
        None => Expr::Const(constant),
        Some(e) if constant == ZERO => e,
        Some(e) => {
            if constant.im == 0.0 && constant.re < 0.0 {
                Expr::Binary(BinOp::Sub, e.into(), Expr::real(-constant.re).into())
            } else {
                Expr::Binary(BinOp::Add, e.into(), Expr::Const(constant).into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{equiv, parse, EquivConfig, SampleBox};
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn simplify_examples() {
        assert_eq!(p("0*f + g").simplify(), p("g"));
        assert_eq!(p("x*1").simplify(), p("x"));
        assert_eq!(p("(-i*hbar)^2").simplify(), p("-hbar^2"));
    }

    #[test]
    fn merges_like_terms_and_powers() {
        assert_eq!(p("x + 2*x - 3*x").simplify(), Expr::zero());
        assert_eq!(p("x*y/x").simplify(), p("y"));
        assert_eq!(p("hbar^-2*(-hbar^2*g)").simplify(), p("-g"));
        assert_eq!(p("sin(t)*sin(t)").simplify(), p("sin(t)^2"));
        assert_eq!(p("a*b - b*a").simplify(), Expr::zero());
        assert_eq!(p("-(-x)").simplify(), p("x"));
        assert_eq!(p("sin(0) + cos(0)").simplify(), p("1"));
    }

    #[test]
    fn keeps_non_integer_powers_apart() {
        let e = p("sqrt(x)*sqrt(x)").simplify();
        assert_eq!(e, p("sqrt(x)^2"));
        let e = p("x^0.5*x^0.5").simplify();
        assert_eq!(e, p("(x^0.5)^2"));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..6).prop_map(|k| Expr::real(k as f64)),
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Expr::sym),
            Just(Expr::i()),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (
                    prop::sample::select(vec![Func::Neg, Func::Sin, Func::Cos, Func::Exp]),
                    inner.clone()
                )
                    .prop_map(|(f, a)| Expr::Unary(f, a.into())),
                (
                    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(op, a.into(), b.into())),
                (inner, 0u32..4).prop_map(|(a, k)| Expr::Binary(
                    BinOp::Pow,
                    a.into(),
                    Expr::real(k as f64).into()
                )),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn simplify_preserves_value(e in arb_expr()) {
            let bx = SampleBox::new()
                .with_range("x", 0.2, 1.3)
                .with_range("y", 0.2, 1.3)
                .with_range("z", 0.2, 1.3);
            let s = e.simplify();
            // expressions with a division by something identically zero
            // cannot be compared; skip them
            if let Ok(same) = equiv(&e, &s, &bx, &EquivConfig::default()) {
                prop_assert!(same, "{} vs {}", e, s);
            }
        }
    }
}
