use std::collections::HashMap;
use std::sync::Arc;

use super::{Chart, GeometryError, Metric};
use crate::expr::Expr;

/// The fiberwise isomorphism between tangent and cotangent bundles induced
/// by a metric: `p_j = g_jk ẋ^k`, `ẋ^j = g^jk p_k`.
#[derive(Debug, Clone)]
pub struct MetricTransport {
    chart: Arc<Chart>,
    to_tangent: HashMap<String, Expr>,
    to_cotangent: HashMap<String, Expr>,
}

pub fn metric_transport(g: &Metric) -> Result<MetricTransport, GeometryError> {
    let chart = g.chart().clone();
    let n = chart.dim();
    let inv = g.inverse()?;
    let mut to_tangent = HashMap::new();
    let mut to_cotangent = HashMap::new();
    for j in 0..n {
        let p: Expr = (0..n)
            .map(|k| g.component(j, k).clone() * Expr::sym(&chart.velocity(k)))
            .sum();
        to_tangent.insert(chart.momentum(j), p.simplify());
        let v: Expr = (0..n)
            .map(|k| inv[j][k].clone() * Expr::sym(&chart.momentum(k)))
            .sum();
        to_cotangent.insert(chart.velocity(j), v.simplify());
    }
    Ok(MetricTransport {
        chart,
        to_tangent,
        to_cotangent,
    })
}

impl MetricTransport {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Rewrites a function of `(x, p)` as a function of `(x, ẋ)`.
    pub fn to_tangent(&self, e: &Expr) -> Expr {
        e.substitute(&self.to_tangent).simplify()
    }

    /// Rewrites a function of `(x, ẋ)` as a function of `(x, p)`.
    pub fn to_cotangent(&self, e: &Expr) -> Expr {
        e.substitute(&self.to_cotangent).simplify()
    }

    /// `p_j` in terms of velocities.
    pub fn momentum(&self, j: usize) -> &Expr {
        &self.to_tangent[&self.chart.momentum(j)]
    }

    /// `ẋ^j` in terms of momenta.
    pub fn velocity(&self, j: usize) -> &Expr {
        &self.to_cotangent[&self.chart.velocity(j)]
    }
}

#[cfg(test)]
mod tests {
    use super::super::charts;
    use super::*;
    use crate::expr::{equiv, parse, EquivConfig};

    #[test]
    fn sphere_momentum() {
        let g = charts::sphere();
        let t = metric_transport(&g).unwrap();
        let bx = g.chart().tangent_box(2.0);
        let cfg = EquivConfig::default();
        assert!(equiv(&t.to_tangent(&parse("p_ph").unwrap()), &parse("sin(th)^2*dph").unwrap(), &bx, &cfg).unwrap());
        assert!(equiv(&t.to_tangent(&parse("p_th").unwrap()), &parse("dth").unwrap(), &bx, &cfg).unwrap());
    }

    #[test]
    fn kinetic_energy_round_trip() {
        let g = charts::sphere();
        let t = metric_transport(&g).unwrap();
        let h = parse("0.5*(p_th^2 + p_ph^2/sin(th)^2)").unwrap();
        let l = parse("0.5*(dth^2 + sin(th)^2*dph^2)").unwrap();
        let cfg = EquivConfig::default();
        assert!(equiv(&t.to_tangent(&h), &l, &g.chart().tangent_box(2.0), &cfg).unwrap());
        assert!(equiv(&t.to_cotangent(&l), &h, &g.chart().cotangent_box(2.0), &cfg).unwrap());
    }
}
