//! Scalar expressions over chart coordinates, fiber coordinates, complex
//! constants and the symbol `hbar`.
//!
//! Expressions are immutable trees with shared children, so cloning is cheap
//! and values can be handed to worker threads freely. Equality of formulas is
//! decided numerically by [`equiv`] rather than by canonical forms.

mod compile;
mod equiv;
mod eval;
mod parse;
mod print;
mod simplify;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

pub use compile::Compiled;
pub use equiv::{compare, equiv, Comparison, EquivConfig, EquivError, SampleBox, DEFAULT_SEED};
pub use eval::{EvalEnv, EvalError};
pub use parse::{parse, ParseError, ParseErrorKind};

/// Name of the Planck-constant symbol.
pub const HBAR: &str = "hbar";

/// Elementary unary functions, plus negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Neg => "-",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Sym(Arc<str>),
    Unary(Func, Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn constant(c: Complex64) -> Expr {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Expr {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::real(0.0)
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    /// The imaginary unit.
    pub fn i() -> Expr {
        Expr::Const(Complex64::new(0.0, 1.0))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Arc::from(name))
    }

    pub fn hbar() -> Expr {
        Expr::sym(HBAR)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True only for the literal constant zero; no numeric test is made.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(1.0, 0.0))
    }

    pub fn unary(f: Func, a: Expr) -> Expr {
        if let Expr::Const(c) = a {
            if f == Func::Neg {
                return Expr::Const(-c);
            }
        }
        if f == Func::Neg {
            if let Expr::Unary(Func::Neg, inner) = &a {
                return (**inner).clone();
            }
        }
        Expr::Unary(f, Arc::new(a))
    }

    pub fn sin(self) -> Expr {
        Expr::unary(Func::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::unary(Func::Cos, self)
    }
    pub fn tan(self) -> Expr {
        Expr::unary(Func::Tan, self)
    }
    pub fn exp(self) -> Expr {
        Expr::unary(Func::Exp, self)
    }
    pub fn log(self) -> Expr {
        Expr::unary(Func::Log, self)
    }
    pub fn sinh(self) -> Expr {
        Expr::unary(Func::Sinh, self)
    }
    pub fn cosh(self) -> Expr {
        Expr::unary(Func::Cosh, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::unary(Func::Sqrt, self)
    }

    /// Builds `a op b` with constant folding and 0/1 absorption.
    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinOp::Add => {
                if a.is_zero() {
                    return b;
                }
                if b.is_zero() {
                    return a;
                }
                if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
                    return Expr::Const(x + y);
                }
            }
            BinOp::Sub => {
                if b.is_zero() {
                    return a;
                }
                if a.is_zero() {
                    return Expr::unary(Func::Neg, b);
                }
                if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
                    return Expr::Const(x - y);
                }
            }
            BinOp::Mul => {
                if a.is_zero() || b.is_zero() {
                    return Expr::zero();
                }
                if a.is_one() {
                    return b;
                }
                if b.is_one() {
                    return a;
                }
                if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
                    return Expr::Const(x * y);
                }
            }
            BinOp::Div => {
                if b.is_one() {
                    return a;
                }
                if a.is_zero() && !b.is_zero() {
                    return Expr::zero();
                }
                if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
                    if y != Complex64::new(0.0, 0.0) {
                        return Expr::Const(x / y);
                    }
                }
            }
            BinOp::Pow => {
                if let Some(e) = b.as_const() {
                    if e == Complex64::new(0.0, 0.0) {
                        return Expr::one();
                    }
                    if e == Complex64::new(1.0, 0.0) {
                        return a;
                    }
                    if let Some(base) = a.as_const() {
                        if let Some(k) = integer_value(e) {
                            if base != Complex64::new(0.0, 0.0) || k > 0 {
                                return Expr::Const(base.powi(k));
                            }
                        }
                    }
                }
            }
        }
        Expr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::binary(BinOp::Pow, self, exponent)
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::binary(BinOp::Pow, self, Expr::real(k as f64))
    }

    /// Exact symbolic partial derivative with respect to `sym`.
    pub fn diff(&self, sym: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Sym(name) => {
                if &**name == sym {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Unary(f, a) => {
                let da = a.diff(sym);
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Neg => return -da,
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Tan => return da / a.cos().powi(2),
                    Func::Exp => a.exp(),
                    Func::Log => return da / a,
                    Func::Sinh => a.cosh(),
                    Func::Cosh => a.sinh(),
                    Func::Sqrt => return da / (Expr::real(2.0) * a.sqrt()),
                };
                outer * da
            }
            Expr::Binary(op, a, b) => {
                let da = a.diff(sym);
                let db = b.diff(sym);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => da + db,
                    BinOp::Sub => da - db,
                    BinOp::Mul => da * b.clone() + a * db,
                    BinOp::Div => {
                        if db.is_zero() {
                            da / b
                        } else {
                            (da * b.clone() - a * db) / b.powi(2)
                        }
                    }
                    BinOp::Pow => {
                        if db.is_zero() {
                            if da.is_zero() {
                                return Expr::zero();
                            }
                            let lowered = match b.as_const() {
                                Some(c) => Expr::Const(c - 1.0),
                                None => b.clone() - Expr::one(),
                            };
                            b * a.pow(lowered) * da
                        } else if da.is_zero() {
                            self.clone() * a.log() * db
                        } else {
                            self.clone() * (db * a.clone().log() + b * da / a)
                        }
                    }
                }
            }
        }
    }

    /// Iterated partial derivative, one symbol per entry of `syms`.
    pub fn diff_many<S: AsRef<str>>(&self, syms: &[S]) -> Expr {
        let mut e = self.clone();
        for s in syms {
            e = e.diff(s.as_ref()).simplify();
            if e.is_zero() {
                break;
            }
        }
        e
    }

    /// Replaces every occurrence of the mapped symbols. Replacement is
    /// simultaneous: substituted expressions are not rewritten again.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Sym(name) => map.get(&**name).cloned().unwrap_or_else(|| self.clone()),
            Expr::Unary(f, a) => Expr::unary(*f, a.substitute(map)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(map), b.substitute(map)),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(name) => {
                out.insert(name.to_string());
            }
            Expr::Unary(_, a) => a.collect_symbols(out),
            Expr::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn contains_symbol(&self, sym: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Sym(name) => &**name == sym,
            Expr::Unary(_, a) => a.contains_symbol(sym),
            Expr::Binary(_, a, b) => a.contains_symbol(sym) || b.contains_symbol(sym),
        }
    }

    /// Upper bound on the polynomial degree in the given symbols, or `None`
    /// when the expression is not visibly polynomial in them.
    pub fn polynomial_degree(&self, syms: &[String]) -> Option<usize> {
        match self {
            Expr::Const(_) => Some(0),
            Expr::Sym(name) => Some(usize::from(syms.iter().any(|s| **s == **name))),
            Expr::Unary(Func::Neg, a) => a.polynomial_degree(syms),
            Expr::Unary(_, a) => match a.polynomial_degree(syms)? {
                0 => Some(0),
                _ => None,
            },
            Expr::Binary(op, a, b) => {
                let da = a.polynomial_degree(syms);
                let db = b.polynomial_degree(syms);
                match op {
                    BinOp::Add | BinOp::Sub => Some(da?.max(db?)),
                    BinOp::Mul => Some(da? + db?),
                    BinOp::Div => match db? {
                        0 => da,
                        _ => None,
                    },
                    BinOp::Pow => {
                        let da = da?;
                        if da == 0 {
                            return match db? {
                                0 => Some(0),
                                _ => None,
                            };
                        }
                        let k = b.as_const().and_then(integer_value)?;
                        if k < 0 {
                            None
                        } else {
                            Some(da * k as usize)
                        }
                    }
                }
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Sym(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Structural total order, used to sort operands during simplification.
    pub fn structural_cmp(&self, other: &Expr) -> Ordering {
        fn rank(e: &Expr) -> u8 {
            match e {
                Expr::Const(_) => 0,
                Expr::Sym(_) => 1,
                Expr::Unary(..) => 2,
                Expr::Binary(..) => 3,
            }
        }
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)),
            (Expr::Sym(a), Expr::Sym(b)) => a.cmp(b),
            (Expr::Unary(f, a), Expr::Unary(g, b)) => f.cmp(g).then_with(|| a.structural_cmp(b)),
            (Expr::Binary(o, a1, a2), Expr::Binary(p, b1, b2)) => o
                .cmp(p)
                .then_with(|| a1.structural_cmp(b1))
                .then_with(|| a2.structural_cmp(b2)),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

/// `Some(k)` when the constant is a real integer of moderate size.
pub(crate) fn integer_value(c: Complex64) -> Option<i32> {
    if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= 1.0e6 {
        Some(c.re as i32)
    } else {
        None
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Expr {
        Expr::real(x)
    }
}

impl From<Complex64> for Expr {
    fn from(c: Complex64) -> Expr {
        Expr::Const(c)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(Func::Neg, self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| acc + e)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::one(), |acc, e| acc * e)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn unit_box(names: &[&str]) -> SampleBox {
        let mut b = SampleBox::new();
        for n in names {
            b = b.with_range(n, 0.1, 1.0);
        }
        b
    }

    fn same(a: &Expr, b: &Expr, names: &[&str]) -> bool {
        equiv(a, b, &unit_box(names), &EquivConfig::default()).unwrap()
    }

    #[test]
    fn diff_examples() {
        let d = p("sin(th)^2").diff("th");
        assert!(same(&d, &p("2*sin(th)*cos(th)"), &["th"]));
        assert_eq!(p("x*p").diff("p").simplify(), p("x"));
        let e = p("exp(i*S/hbar)");
        assert!(same(&e.diff("S"), &p("(i/hbar)*exp(i*S/hbar)"), &["S"]));
    }

    #[test]
    fn diff_of_absent_symbol_is_zero() {
        assert!(p("sin(x)*y^3").diff("z").is_zero());
    }

    #[test]
    fn diff_general_power() {
        let d = p("x^x").diff("x");
        assert!(same(&d, &p("x^x*(log(x)+1)"), &["x"]));
        let d = p("2^x").diff("x");
        assert!(same(&d, &p("2^x*log(2)"), &["x"]));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut map = HashMap::new();
        map.insert("x".to_string(), p("y"));
        map.insert("y".to_string(), p("x"));
        assert_eq!(p("x - y").substitute(&map), p("y - x"));
    }

    #[test]
    fn polynomial_degree_tracks_momenta() {
        let ps = vec!["p_x".to_string(), "p_y".to_string()];
        assert_eq!(p("sin(x)*p_x^2 + p_y + 3").polynomial_degree(&ps), Some(2));
        assert_eq!(p("p_x*p_y/cos(x)").polynomial_degree(&ps), Some(2));
        assert_eq!(p("exp(p_x)").polynomial_degree(&ps), None);
        assert_eq!(p("1/p_x").polynomial_degree(&ps), None);
    }
}
