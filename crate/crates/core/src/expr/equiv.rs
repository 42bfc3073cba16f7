use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Compiled, EvalError, Expr, HBAR};

/// Seed used when none is configured. Reported alongside every verdict.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Sampling ranges for the free symbols of compared expressions.
///
/// Symbols with a range are drawn uniformly; fixed symbols keep one value.
/// `hbar` is fixed to 1 unless given a range or another value.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    ranges: Vec<(String, f64, f64)>,
    fixed: Vec<(String, Complex64)>,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::new()
    }
}

impl SampleBox {
    pub fn new() -> Self {
        SampleBox {
            ranges: Vec::new(),
            fixed: vec![(HBAR.to_string(), Complex64::new(1.0, 0.0))],
        }
    }

    pub fn with_range(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.set_range(name, lo, hi);
        self
    }

    pub fn with_fixed(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.set_fixed(name, value);
        self
    }

    pub fn set_range(&mut self, name: &str, lo: f64, hi: f64) {
        assert!(lo <= hi, "empty sampling range for {name}");
        self.fixed.retain(|(n, _)| n != name);
        self.ranges.retain(|(n, ..)| n != name);
        self.ranges.push((name.to_string(), lo, hi));
    }

    pub fn set_fixed(&mut self, name: &str, value: impl Into<Complex64>) {
        self.fixed.retain(|(n, _)| n != name);
        self.ranges.retain(|(n, ..)| n != name);
        self.fixed.push((name.to_string(), value.into()));
    }

    pub fn names(&self) -> Vec<&str> {
        self.ranges
            .iter()
            .map(|(n, ..)| n.as_str())
            .chain(self.fixed.iter().map(|(n, _)| n.as_str()))
            .collect()
    }

    pub fn binds(&self, name: &str) -> bool {
        self.names().contains(&name)
    }

    /// Draws one point, ordered as [`SampleBox::names`].
    pub fn draw(&self, rng: &mut impl Rng) -> Vec<Complex64> {
        self.ranges
            .iter()
            .map(|(_, lo, hi)| {
                let x = if lo == hi { *lo } else { rng.gen_range(*lo..*hi) };
                Complex64::new(x, 0.0)
            })
            .chain(self.fixed.iter().map(|(_, v)| *v))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Total number of redraws allowed after evaluation failures.
    pub retries: usize,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            samples: 20,
            tol: 1e-9,
            seed: DEFAULT_SEED,
            retries: 200,
        }
    }
}

impl EquivConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("symbol `{0}` has no sampling range")]
    Unbound(String),
    #[error("evaluation kept failing after {retries} redraws; last error: {last}")]
    TooManyFailures { retries: usize, last: EvalError },
    #[error("at least one sample point is required")]
    NoSamples,
}

/// Outcome of a sampled comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub equal: bool,
    /// Largest `|a-b| / (1 + max(|a|,|b|))` seen.
    pub max_scaled_error: f64,
    /// Point (ordered as the box names) where that error occurred.
    pub worst_point: Vec<Complex64>,
    pub evaluated: usize,
    pub redraws: usize,
}

/// Decides `a == b` by sampling: true iff `|a-b| <= tol*(1+max(|a|,|b|))`
/// at every one of `cfg.samples` points drawn from `bx` with `cfg.seed`.
pub fn equiv(a: &Expr, b: &Expr, bx: &SampleBox, cfg: &EquivConfig) -> Result<bool, EquivError> {
    compare(a, b, bx, cfg).map(|c| c.equal)
}

pub fn compare(
    a: &Expr,
    b: &Expr,
    bx: &SampleBox,
    cfg: &EquivConfig,
) -> Result<Comparison, EquivError> {
    if cfg.samples == 0 {
        return Err(EquivError::NoSamples);
    }
    let names = bx.names();
    let compile = |e: &Expr| {
        Compiled::new(e, &names).map_err(|err| match err {
            EvalError::Unbound(n) => EquivError::Unbound(n),
            other => EquivError::TooManyFailures {
                retries: 0,
                last: other,
            },
        })
    };
    let ca = compile(a)?;
    let cb = compile(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Comparison {
        equal: true,
        max_scaled_error: 0.0,
        worst_point: Vec::new(),
        evaluated: 0,
        redraws: 0,
    };
    while out.evaluated < cfg.samples {
        let point = bx.draw(&mut rng);
        let (va, vb) = match ca.eval(&point).and_then(|va| Ok((va, cb.eval(&point)?))) {
            Ok(v) => v,
            Err(last) => {
                out.redraws += 1;
                if out.redraws > cfg.retries {
                    return Err(EquivError::TooManyFailures {
                        retries: cfg.retries,
                        last,
                    });
                }
                continue;
            }
        };
        out.evaluated += 1;
        let scaled = (va - vb).norm() / (1.0 + va.norm().max(vb.norm()));
        if scaled > out.max_scaled_error || out.worst_point.is_empty() {
            out.max_scaled_error = out.max_scaled_error.max(scaled);
            out.worst_point = point;
        }
        if scaled > cfg.tol {
            out.equal = false;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn equiv_examples() {
        let t = SampleBox::new().with_range("t", 0.0, 1.0);
        assert!(equiv(&p("sin(2*t)"), &p("2*sin(t)*cos(t)"), &t, &EquivConfig::default()).unwrap());
        let x = SampleBox::new().with_range("x", 0.0, 1.0);
        assert!(!equiv(&p("x^2"), &p("x^2 + 1e-3"), &x, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn unbound_symbol_is_reported() {
        let x = SampleBox::new().with_range("x", 0.0, 1.0);
        let err = equiv(&p("x"), &p("y"), &x, &EquivConfig::default()).unwrap_err();
        assert_eq!(err, EquivError::Unbound("y".into()));
    }

    #[test]
    fn redraws_around_isolated_singularities() {
        // 1/(x - 0.5) is undefined only at one point; redraw is never needed
        // in practice, but a box pinned on the singularity must fail.
        let bad = SampleBox::new().with_range("x", 0.5, 0.5);
        let err = equiv(&p("1/(x - 0.5)"), &p("1"), &bad, &EquivConfig::default()).unwrap_err();
        assert!(matches!(err, EquivError::TooManyFailures { .. }));
    }

    #[test]
    fn same_seed_same_points() {
        let b = SampleBox::new().with_range("x", -1.0, 1.0);
        let cfg = EquivConfig::default().with_tol(0.0);
        let c1 = compare(&p("x^3"), &p("x*x*x + 1e-12*x"), &b, &cfg).unwrap();
        let c2 = compare(&p("x^3"), &p("x*x*x + 1e-12*x"), &b, &cfg).unwrap();
        assert_eq!(c1, c2);
    }
}
