use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use super::{integer_value, BinOp, Expr, Func, HBAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain violation in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
}

/// Symbol bindings for evaluation. `hbar` is bound to 1 unless overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalEnv {
    bindings: HashMap<String, Complex64>,
}

impl Default for EvalEnv {
    fn default() -> Self {
        EvalEnv::new()
    }
}

impl EvalEnv {
    pub fn new() -> Self {
        let mut bindings = HashMap::new();
        bindings.insert(HBAR.to_string(), Complex64::new(1.0, 0.0));
        EvalEnv { bindings }
    }

    pub fn with(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.bind(name, value);
        self
    }

    pub fn bind(&mut self, name: &str, value: impl Into<Complex64>) {
        self.bindings.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.bindings.get(name).copied()
    }
}

pub(super) fn apply_func(f: Func, a: Complex64) -> Option<Complex64> {
    let v = match f {
        Func::Neg => -a,
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => {
            if a.im == 0.0 {
                Complex64::new(a.re.tan(), 0.0)
            } else {
                a.tan()
            }
        }
        Func::Exp => a.exp(),
        Func::Log => {
            if a == Complex64::new(0.0, 0.0) {
                return None;
            }
            a.ln()
        }
        Func::Sinh => a.sinh(),
        Func::Cosh => a.cosh(),
        Func::Sqrt => a.sqrt(),
    };
    Some(v)
}

pub(super) fn apply_binary(op: BinOp, a: Complex64, b: Complex64) -> Result<Complex64, &'static str> {
    let zero = Complex64::new(0.0, 0.0);
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == zero {
                return Err("division by zero");
            }
            a / b
        }
        BinOp::Pow => {
            if let Some(k) = integer_value(b) {
                if a == zero && k < 0 {
                    return Err("zero raised to a negative power");
                }
                a.powi(k)
            } else if a == zero {
                if b.re > 0.0 {
                    zero
                } else {
                    return Err("zero raised to a non-positive power");
                }
            } else if a.im == 0.0 && a.re > 0.0 && b.im == 0.0 {
                Complex64::new(a.re.powf(b.re), 0.0)
            } else {
                a.powc(b)
            }
        }
    })
}

fn finite(v: Complex64) -> bool {
    v.re.is_finite() && v.im.is_finite()
}

impl Expr {
    /// Evaluates in double-precision complex arithmetic.
    pub fn eval(&self, env: &EvalEnv) -> Result<Complex64, EvalError> {
        let domain = |e: &Expr, reason| EvalError::Domain {
            node: e.to_string(),
            reason,
        };
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Sym(name) => env
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.to_string()))?,
            Expr::Unary(f, a) => {
                let x = a.eval(env)?;
                apply_func(*f, x).ok_or_else(|| domain(self, "logarithm of zero"))?
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                apply_binary(*op, x, y).map_err(|r| domain(self, r))?
            }
        };
        if finite(v) {
            Ok(v)
        } else {
            Err(domain(self, "non-finite result"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_examples() {
        let v = parse("sin(th)^2").unwrap().eval(&EvalEnv::new().with("th", PI / 2.0)).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        let v = parse("hbar*p").unwrap().eval(&EvalEnv::new().with("p", 2.0)).unwrap();
        assert_eq!(v, Complex64::new(2.0, 0.0));
        let err = parse("1/x").unwrap().eval(&EvalEnv::new().with("x", 0.0)).unwrap_err();
        assert!(matches!(err, EvalError::Domain { ref node, .. } if node == "1/x"));
    }

    #[test]
    fn unbound_symbol_is_an_error() {
        let err = parse("x + y").unwrap().eval(&EvalEnv::new().with("x", 1.0)).unwrap_err();
        assert_eq!(err, EvalError::Unbound("y".into()));
    }

    #[test]
    fn log_of_zero_and_negative_powers() {
        let env = EvalEnv::new().with("x", 0.0);
        assert!(parse("log(x)").unwrap().eval(&env).is_err());
        assert!(parse("x^-2").unwrap().eval(&env).is_err());
        assert_eq!(parse("x^2").unwrap().eval(&env).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn integer_powers_of_negative_reals_stay_real() {
        let v = parse("x^3").unwrap().eval(&EvalEnv::new().with("x", -2.0)).unwrap();
        assert_eq!(v, Complex64::new(-8.0, 0.0));
    }

    #[test]
    fn complex_arithmetic() {
        let v = parse("exp(i*pi)").unwrap().eval(&EvalEnv::new()).unwrap();
        assert!((v + 1.0).norm() < 1e-15);
        let v = parse("(-i*hbar)^2").unwrap().eval(&EvalEnv::new().with("hbar", 0.5)).unwrap();
        assert!((v + 0.25).norm() < 1e-15);
    }
}
