use std::sync::Arc;

use super::{Chart, GeometryError, Metric};
use crate::expr::{equiv, Compiled, EquivConfig, Expr};

/// A torsionless linear connection given by its Christoffel symbols
/// `Γ^j_kl`, stored in full and symmetric in `(k, l)`.
#[derive(Debug, Clone)]
pub struct Connection {
    chart: Arc<Chart>,
    gamma: Vec<Expr>,
    compiled: Vec<Compiled>,
}

impl Connection {
    /// `gamma(j, k, l)` gives `Γ^j_kl`. Symmetry in the lower pair is checked
    /// by sampling.
    pub fn new(
        chart: Arc<Chart>,
        mut gamma: impl FnMut(usize, usize, usize) -> Expr,
    ) -> Result<Connection, GeometryError> {
        let n = chart.dim();
        let mut data = Vec::with_capacity(n * n * n);
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let e = gamma(j, k, l).simplify();
                    chart.check_symbols(&e)?;
                    data.push(e);
                }
            }
        }
        let bx = chart.sample_box();
        for j in 0..n {
            for k in 0..n {
                for l in (k + 1)..n {
                    let a = &data[(j * n + k) * n + l];
                    let b = &data[(j * n + l) * n + k];
                    if a != b && !equiv(a, b, &bx, &EquivConfig::default())? {
                        return Err(GeometryError::ConnectionNotSymmetric { j, k, l });
                    }
                }
            }
        }
        Connection::from_data(chart, data)
    }

    /// The connection whose symbols all vanish in this chart.
    pub fn flat(chart: Arc<Chart>) -> Connection {
        let n = chart.dim();
        Connection::from_data(chart, vec![Expr::zero(); n * n * n]).expect("constant symbols")
    }

    fn from_data(chart: Arc<Chart>, gamma: Vec<Expr>) -> Result<Connection, GeometryError> {
        let compiled = gamma
            .iter()
            .map(|e| Compiled::new(e, chart.coords()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Connection {
            chart,
            gamma,
            compiled,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `Γ^j_kl`.
    pub fn gamma(&self, j: usize, k: usize, l: usize) -> &Expr {
        let n = self.dim();
        &self.gamma[(j * n + k) * n + l]
    }

    pub fn is_flat(&self) -> bool {
        self.gamma.iter().all(Expr::is_zero)
    }

    /// Numeric symbols at a point, flattened as `(j*n + k)*n + l`.
    pub fn gamma_at(&self, point: &[f64], out: &mut [f64]) -> Result<(), GeometryError> {
        for (slot, c) in out.iter_mut().zip(&self.compiled) {
            *slot = c.eval_real(point)?.re;
        }
        Ok(())
    }
}

/// Levi-Civita connection: `Γ^j_kl = ½ g^jm (∂_k g_ml + ∂_l g_mk − ∂_m g_kl)`.
pub fn christoffel(g: &Metric) -> Result<Connection, GeometryError> {
    let chart = g.chart().clone();
    let n = chart.dim();
    let inv = g.inverse()?;
    // d[m][a][b] = ∂_m g_ab
    let d: Vec<Vec<Vec<Expr>>> = (0..n)
        .map(|m| {
            (0..n)
                .map(|a| (0..n).map(|b| g.component(a, b).diff(chart.coord(m)).simplify()).collect())
                .collect()
        })
        .collect();
    Connection::new(chart.clone(), |j, k, l| {
        let s: Expr = (0..n)
            .map(|m| {
                let bracket = d[k][m][l].clone() + d[l][m][k].clone() - d[m][k][l].clone();
                inv[j][m].clone() * bracket
            })
            .sum();
        Expr::real(0.5) * s
    })
}
