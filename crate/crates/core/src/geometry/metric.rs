use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Chart, GeometryError, SymTensor, Variance};
use crate::expr::{Compiled, Expr, DEFAULT_SEED};

/// Condition-number bound above which a metric counts as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

const CHECK_POINTS: usize = 20;

/// Metric components `g_jk` on a chart (any signature), with the inverse
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct Metric {
    chart: Arc<Chart>,
    g: Vec<Vec<Expr>>,
    inverse: Option<Vec<Vec<Expr>>>,
    compiled: Vec<Compiled>,
}

impl Metric {
    /// Full symmetric component matrix. Symmetry is checked structurally and
    /// invertibility at sample points of the chart box.
    pub fn new(chart: Arc<Chart>, g: Vec<Vec<Expr>>) -> Result<Metric, GeometryError> {
        let n = chart.dim();
        if g.len() != n || g.iter().any(|row| row.len() != n) {
            return Err(GeometryError::Shape(format!("metric must be {n}x{n}")));
        }
        for j in 0..n {
            for k in 0..j {
                if g[j][k] != g[k][j] {
                    return Err(GeometryError::MetricNotSymmetric(j, k));
                }
            }
        }
        let g: Vec<Vec<Expr>> = g
            .into_iter()
            .map(|row| row.into_iter().map(|e| e.simplify()).collect())
            .collect();
        for row in &g {
            for e in row {
                chart.check_symbols(e)?;
            }
        }
        let compiled = g
            .iter()
            .flatten()
            .map(|e| Compiled::new(e, chart.coords()))
            .collect::<Result<Vec<_>, _>>()?;
        let inverse = if n <= 4 { Some(symbolic_inverse(&g)) } else { None };
        let metric = Metric {
            chart,
            g,
            inverse,
            compiled,
        };
        metric.check_invertible()?;
        Ok(metric)
    }

    /// Row `j` holds the components `g_jk` for `k >= j`.
    pub fn from_upper_triangle(chart: Arc<Chart>, rows: Vec<Vec<Expr>>) -> Result<Metric, GeometryError> {
        let n = chart.dim();
        if rows.len() != n {
            return Err(GeometryError::Shape(format!("expected {n} rows, got {}", rows.len())));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n - j {
                return Err(GeometryError::Shape(format!(
                    "row {j} of the upper triangle needs {} entries, got {}",
                    n - j,
                    row.len()
                )));
            }
        }
        let g = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let (a, b) = if j <= k { (j, k) } else { (k, j) };
                        rows[a][b - a].clone()
                    })
                    .collect()
            })
            .collect();
        Metric::new(chart, g)
    }

    /// Diagonal metric.
    pub fn diagonal(chart: Arc<Chart>, diag: Vec<Expr>) -> Result<Metric, GeometryError> {
        let n = chart.dim();
        if diag.len() != n {
            return Err(GeometryError::Shape(format!("expected {n} diagonal entries")));
        }
        let g = (0..n)
            .map(|j| (0..n).map(|k| if j == k { diag[j].clone() } else { Expr::zero() }).collect())
            .collect();
        Metric::new(chart, g)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, j: usize, k: usize) -> &Expr {
        &self.g[j][k]
    }

    pub fn components(&self) -> &[Vec<Expr>] {
        &self.g
    }

    /// Symbolic inverse `g^jk`; errors above dimension 4.
    pub fn inverse(&self) -> Result<&[Vec<Expr>], GeometryError> {
        self.inverse
            .as_deref()
            .ok_or(GeometryError::SymbolicInverseUnavailable(self.dim()))
    }

    /// The contravariant metric tensor `g^jk ∂_j ∂_k`.
    pub fn inverse_tensor(&self) -> Result<SymTensor, GeometryError> {
        let inv = self.inverse()?;
        let mut t = SymTensor::zero(self.chart.clone(), Variance::Contravariant, 2);
        for j in 0..self.dim() {
            for k in j..self.dim() {
                t.set(&[j, k], inv[j][k].clone());
            }
        }
        Ok(t)
    }

    /// The covariant metric tensor `g_jk dx^j dx^k`.
    pub fn tensor(&self) -> SymTensor {
        let mut t = SymTensor::zero(self.chart.clone(), Variance::Covariant, 2);
        for j in 0..self.dim() {
            for k in j..self.dim() {
                t.set(&[j, k], self.g[j][k].clone());
            }
        }
        t
    }

    /// Numeric components at a point.
    pub fn at(&self, point: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (flat, c) in self.compiled.iter().enumerate() {
            m[(flat / n, flat % n)] = c.eval_real(point)?.re;
        }
        Ok(m)
    }

    /// Numeric inverse at a point, guarded by the condition-number limit.
    pub fn inverse_at(&self, point: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        let m = self.at(point)?;
        let sv = m.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= CONDITION_LIMIT) {
            return Err(GeometryError::SingularMetric {
                point: point.to_vec(),
                condition,
            });
        }
        m.try_inverse().ok_or(GeometryError::SingularMetric {
            point: point.to_vec(),
            condition,
        })
    }

    fn check_invertible(&self) -> Result<(), GeometryError> {
        let bx = self.chart.sample_box();
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < CHECK_POINTS {
            attempts += 1;
            let point: Vec<f64> = bx.draw(&mut rng).iter().take(self.dim()).map(|z| z.re).collect();
            match self.inverse_at(&point) {
                Ok(_) => checked += 1,
                // components undefined here (e.g. 1/x at x=0): draw again
                Err(GeometryError::Eval(_)) if attempts < 10 * CHECK_POINTS => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

fn is_diagonal(g: &[Vec<Expr>]) -> bool {
    g.iter()
        .enumerate()
        .all(|(j, row)| row.iter().enumerate().all(|(k, e)| j == k || e.is_zero()))
}

fn minor(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(j, _)| *j != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(k, _)| *k != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

fn determinant(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => (0..m.len())
            .map(|k| {
                let term = m[0][k].clone() * determinant(&minor(m, 0, k));
                if k % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .sum::<Expr>()
            .simplify(),
    }
}

/// Cofactor inverse; diagonal metrics get `1/g_jj` directly.
fn symbolic_inverse(g: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = g.len();
    if is_diagonal(g) {
        return (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        if j == k {
                            (Expr::one() / g[j][j].clone()).simplify()
                        } else {
                            Expr::zero()
                        }
                    })
                    .collect()
            })
            .collect();
    }
    let det = determinant(g);
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let cof = determinant(&minor(g, k, j));
                    let signed = if (j + k) % 2 == 0 { cof } else { -cof };
                    (signed / det.clone()).simplify()
                })
                .collect()
        })
        .collect()
}
