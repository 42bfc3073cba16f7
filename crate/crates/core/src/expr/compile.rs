use num_complex::Complex64;

use super::eval::{apply_binary, apply_func};
use super::{BinOp, EvalError, Expr, Func};

#[derive(Debug, Clone)]
enum Node {
    Const(Complex64),
    Slot(usize),
    Unary(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

/// An expression with symbols resolved to positions in a fixed name list,
/// for repeated evaluation in inner loops (geodesic integration, sampling).
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
    source: Expr,
}

impl Compiled {
    /// Resolves every symbol of `e` against `names`; unknown names are an error.
    pub fn new<S: AsRef<str>>(e: &Expr, names: &[S]) -> Result<Compiled, EvalError> {
        fn go<S: AsRef<str>>(e: &Expr, names: &[S]) -> Result<Node, EvalError> {
            Ok(match e {
                Expr::Const(c) => Node::Const(*c),
                Expr::Sym(name) => Node::Slot(
                    names
                        .iter()
                        .position(|n| n.as_ref() == &**name)
                        .ok_or_else(|| EvalError::Unbound(name.to_string()))?,
                ),
                Expr::Unary(f, a) => Node::Unary(*f, Box::new(go(a, names)?)),
                Expr::Binary(op, a, b) => {
                    Node::Binary(*op, Box::new(go(a, names)?), Box::new(go(b, names)?))
                }
            })
        }
        Ok(Compiled {
            root: go(e, names)?,
            source: e.clone(),
        })
    }

    pub fn eval(&self, values: &[Complex64]) -> Result<Complex64, EvalError> {
        match eval_node(&self.root, values) {
            Ok(v) => Ok(v),
            // re-run the tree walker to name the offending node
            Err(()) => Err(self.describe_failure(values)),
        }
    }

    /// Real-argument convenience; the imaginary part of the result is kept.
    pub fn eval_real(&self, values: &[f64]) -> Result<Complex64, EvalError> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&v)
    }

    fn describe_failure(&self, values: &[Complex64]) -> EvalError {
        fn find(e: &Expr, n: &Node, values: &[Complex64]) -> Option<EvalError> {
            match (e, n) {
                (Expr::Unary(_, a), Node::Unary(_, na)) => {
                    if let Some(err) = find(a, na, values) {
                        return Some(err);
                    }
                }
                (Expr::Binary(_, a, b), Node::Binary(_, na, nb)) => {
                    if let Some(err) = find(a, na, values).or_else(|| find(b, nb, values)) {
                        return Some(err);
                    }
                }
                _ => {}
            }
            eval_node(n, values).err().map(|()| EvalError::Domain {
                node: e.to_string(),
                reason: "undefined value",
            })
        }
        find(&self.source, &self.root, values).unwrap_or(EvalError::Domain {
            node: self.source.to_string(),
            reason: "undefined value",
        })
    }
}

fn eval_node(n: &Node, values: &[Complex64]) -> Result<Complex64, ()> {
    let v = match n {
        Node::Const(c) => *c,
        Node::Slot(k) => values[*k],
        Node::Unary(f, a) => apply_func(*f, eval_node(a, values)?).ok_or(())?,
        Node::Binary(op, a, b) => {
            apply_binary(*op, eval_node(a, values)?, eval_node(b, values)?).map_err(|_| ())?
        }
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, EvalEnv};
    use super::*;

    #[test]
    fn agrees_with_tree_walker() {
        let e = parse("sin(x)*exp(y)/(1 + x^2) - hbar*y").unwrap();
        let c = Compiled::new(&e, &["x", "y", "hbar"]).unwrap();
        let direct = e.eval(&EvalEnv::new().with("x", 0.3).with("y", -1.2)).unwrap();
        assert_eq!(c.eval_real(&[0.3, -1.2, 1.0]).unwrap(), direct);
    }

    #[test]
    fn reports_unbound_and_domain() {
        let e = parse("x/y").unwrap();
        assert_eq!(
            Compiled::new(&e, &["x"]).unwrap_err(),
            EvalError::Unbound("y".into())
        );
        let c = Compiled::new(&parse("1 + x/y").unwrap(), &["x", "y"]).unwrap();
        match c.eval_real(&[1.0, 0.0]).unwrap_err() {
            EvalError::Domain { node, .. } => assert_eq!(node, "x/y"),
            other => panic!("{other:?}"),
        }
    }
}
