use std::f64::consts::PI;
use std::fmt::{self, Write};

use num_complex::Complex64;

use super::{BinOp, Expr, Func};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) => {
            if c.im == 0.0 && c.re.is_sign_negative() && c.re != 0.0 {
                PREC_NEG
            } else if c.re != 0.0 && c.im != 0.0 {
                PREC_ATOM // printed parenthesized
            } else if c.im < 0.0 {
                PREC_NEG
            } else if c.im != 0.0 && c.im != 1.0 {
                PREC_MUL
            } else {
                PREC_ATOM
            }
        }
        Expr::Sym(_) => PREC_ATOM,
        Expr::Unary(Func::Neg, _) => PREC_NEG,
        Expr::Unary(..) => PREC_ATOM,
        Expr::Binary(op, ..) => match op {
            BinOp::Add | BinOp::Sub => PREC_ADD,
            BinOp::Mul | BinOp::Div => PREC_MUL,
            BinOp::Pow => PREC_POW,
        },
    }
}

pub(super) fn write_real(x: f64, f: &mut dyn Write) -> fmt::Result {
    if x == PI {
        return f.write_str("pi");
    }
    if x.fract() == 0.0 && x.abs() < 1.0e15 {
        write!(f, "{}", x as i64)
    } else {
        write!(f, "{x:?}")
    }
}

fn write_const(c: Complex64, f: &mut dyn Write) -> fmt::Result {
    if c.im == 0.0 {
        if c.re < 0.0 {
            f.write_char('-')?;
            return write_real(-c.re, f);
        }
        return write_real(c.re, f);
    }
    if c.re == 0.0 {
        return write_imag(c.im, f);
    }
    f.write_char('(')?;
    write_real(c.re, f)?;
    if c.im < 0.0 {
        f.write_str(" - ")?;
        write_imag(-c.im, f)?;
    } else {
        f.write_str(" + ")?;
        write_imag(c.im, f)?;
    }
    f.write_char(')')
}

fn write_imag(im: f64, f: &mut dyn Write) -> fmt::Result {
    if im < 0.0 {
        f.write_char('-')?;
        return write_imag(-im, f);
    }
    if im == 1.0 {
        f.write_char('i')
    } else {
        write_real(im, f)?;
        f.write_str("*i")
    }
}

fn child(e: &Expr, parens: bool, f: &mut dyn Write) -> fmt::Result {
    if parens {
        f.write_char('(')?;
        write_any(e, f)?;
        f.write_char(')')
    } else {
        write_any(e, f)
    }
}

fn write_any(e: &Expr, f: &mut dyn Write) -> fmt::Result {
    match e {
        Expr::Const(c) => write_const(*c, f),
        Expr::Sym(name) => f.write_str(name),
        Expr::Unary(Func::Neg, a) => {
            f.write_char('-')?;
            child(a, precedence(a) < PREC_NEG, f)
        }
        Expr::Unary(func, a) => {
            f.write_str(func.name())?;
            f.write_char('(')?;
            write_any(a, f)?;
            f.write_char(')')
        }
        Expr::Binary(op, a, b) => {
            let (pa, pb) = (precedence(a), precedence(b));
            match op {
                BinOp::Add | BinOp::Sub => {
                    child(a, pa < PREC_ADD, f)?;
                    f.write_str(if *op == BinOp::Add { " + " } else { " - " })?;
                    child(b, pb <= PREC_ADD, f)
                }
                BinOp::Mul | BinOp::Div => {
                    child(a, pa < PREC_MUL, f)?;
                    f.write_char(if *op == BinOp::Mul { '*' } else { '/' })?;
                    child(b, pb <= PREC_MUL, f)
                }
                BinOp::Pow => {
                    child(a, pa <= PREC_POW, f)?;
                    f.write_char('^')?;
                    child(b, pb < PREC_NEG, f)
                }
            }
        }
    }
}

pub(super) fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write_any(e, f)
}
