//! Task execution and report assembly.

use std::time::Instant;

use serde_json::{json, Map, Value};
use thiserror::Error;

use geoquant::expmap::{scaled_quantization_check, verify_equivalence, ExpmapError};
use geoquant::expr::{equiv, EquivConfig, EquivError, Expr};
use geoquant::geometry::{GeometryError, Variance};
use geoquant::quantizer::{coefficient_box, inhom_tensor_equiv, symbol, DiffOperator, Quantizer, QuantizerError};
use geoquant::symplectic::{
    broglie_identity_check, hamilton_jacobi_residual, is_second_order, poisson, schrodinger_abc, tensor_to_hamiltonian,
    PolyHamiltonian, SymplecticError,
};

use crate::manifest::{HamiltonianSource, Manifest, SodeSource, SymbolSource, TaskKind, SCHEMA_VERSION};
use crate::report;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error(transparent)]
    Expmap(#[from] ExpmapError),
    #[error(transparent)]
    Sampling(#[from] EquivError),
}

/// Overall status, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    VerdictFailure,
    RuntimeError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::VerdictFailure => 1,
            Status::RuntimeError => 3,
        }
    }
}

pub struct RunOutput {
    pub report: Value,
    pub status: Status,
}

struct Outcome {
    outputs: Value,
    verdict: Option<bool>,
}

struct Runner<'a> {
    m: &'a Manifest,
    quantizer: Quantizer,
    cfg: EquivConfig,
}

/// Runs every task in order; the first runtime error stops the run.
pub fn run(m: &Manifest) -> RunOutput {
    let runner = Runner {
        m,
        quantizer: Quantizer::new(m.connection.clone()),
        cfg: EquivConfig::default()
            .with_seed(m.config.seed)
            .with_tol(m.config.tolerances.equiv),
    };
    let mut tasks = Vec::new();
    let mut error = Value::Null;
    let (mut passed, mut failed, mut unchecked) = (0usize, 0usize, 0usize);
    for (index, task) in m.tasks.iter().enumerate() {
        let start = Instant::now();
        let result = runner.run_task(&task.kind);
        let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        let inputs = Value::Object(task.args.clone().into_iter().collect());
        match result {
            Ok(o) => {
                match o.verdict {
                    Some(true) => passed += 1,
                    Some(false) => failed += 1,
                    None => unchecked += 1,
                }
                tasks.push(json!({
                    "index": index,
                    "kind": task.kind_name,
                    "inputs": inputs,
                    "outputs": o.outputs,
                    "verdict": o.verdict,
                    "elapsed_ms": elapsed_ms,
                }));
            }
            Err(e) => {
                tasks.push(json!({
                    "index": index,
                    "kind": task.kind_name,
                    "inputs": inputs,
                    "outputs": Value::Null,
                    "verdict": Value::Null,
                    "elapsed_ms": elapsed_ms,
                }));
                error = json!({ "task": index, "kind": task.kind_name, "message": e.to_string() });
                break;
            }
        }
    }
    let status = if !error.is_null() {
        Status::RuntimeError
    } else if failed > 0 {
        Status::VerdictFailure
    } else {
        Status::Pass
    };
    let c = &m.config;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "seed": c.seed,
        "hbar": c.hbar,
        "chart": { "coordinates": m.chart.coords() },
        "config": {
            "tolerances": c.tolerances,
            "integrator": { "step": c.integrator.step, "max_steps": c.integrator.max_steps },
            "fd": { "h0": c.fd.h0, "levels": c.fd.levels, "max_order": c.fd.max_order },
        },
        "tasks": tasks,
        "error": error,
        "summary": {
            "tasks": m.tasks.len(),
            "passed": passed,
            "failed": failed,
            "unchecked": unchecked,
            "exit_code": status.exit_code(),
        },
    });
    RunOutput { report, status }
}

/// Removes every `elapsed_ms` field, leaving the deterministic part.
pub fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

impl Runner<'_> {
    fn hamiltonian(&self, h: &HamiltonianSource) -> Result<PolyHamiltonian, TaskError> {
        Ok(match h {
            HamiltonianSource::Scalar(e) => PolyHamiltonian::new(self.m.chart.clone(), e.clone())?,
            HamiltonianSource::Tensor(t) => tensor_to_hamiltonian(t)?,
        })
    }

    fn same(&self, a: &Expr, b: &Expr) -> Result<bool, TaskError> {
        let bx = coefficient_box(&self.m.chart, [a, b]);
        Ok(equiv(a, b, &bx, &self.cfg)?)
    }

    fn run_task(&self, kind: &TaskKind) -> Result<Outcome, TaskError> {
        let m = self.m;
        let chart = &m.chart;
        match kind {
            TaskKind::Christoffel => {
                let n = chart.dim();
                let mut symbols = Map::new();
                for j in 0..n {
                    let mut lower = Map::new();
                    for k in 0..n {
                        for l in k..n {
                            let e = m.connection.gamma(j, k, l);
                            if !self.same(e, &Expr::zero())? {
                                lower.insert(report::key(chart, &[k, l]), report::expr(e));
                            }
                        }
                    }
                    if !lower.is_empty() {
                        symbols.insert(chart.coord(j).to_string(), Value::Object(lower));
                    }
                }
                Ok(Outcome {
                    outputs: json!({
                        "source": if m.explicit_connection { "manifest" } else { "levi-civita" },
                        "flat": symbols.is_empty(),
                        "symbols": symbols,
                    }),
                    verdict: None,
                })
            }
            TaskKind::Quantize { tensor, expect } => {
                let op = self.quantizer.quantize(tensor)?;
                let verdict = match expect {
                    Some(e) => Some(op.equiv(e, &self.cfg)?),
                    None => None,
                };
                Ok(Outcome {
                    outputs: json!({ "operator": report::operator(&op) }),
                    verdict,
                })
            }
            TaskKind::Dequantize { operator, expect } => {
                let t = self.quantizer.dequantize(operator)?;
                let round_trip = self.quantizer.quantize(&t)?.equiv(operator, &self.cfg)?;
                let matches = match expect {
                    Some(e) => Some(inhom_tensor_equiv(&t, e, &self.cfg)?),
                    None => None,
                };
                Ok(Outcome {
                    outputs: json!({
                        "tensor": report::inhom_tensor(&t),
                        "round_trip": round_trip,
                        "matches_expected": matches,
                    }),
                    verdict: Some(round_trip && matches.unwrap_or(true)),
                })
            }
            TaskKind::Symbol { operator, order } => {
                let op = match operator {
                    SymbolSource::Operator(op) => op.clone(),
                    SymbolSource::Tensor(t) => self.quantizer.quantize(t)?,
                };
                let r = order.unwrap_or(op.order());
                let s = symbol(&op, r)?;
                Ok(Outcome {
                    outputs: json!({ "order": r, "symbol": report::sym_tensor(&s) }),
                    verdict: None,
                })
            }
            TaskKind::Poisson { f, g, expect } => {
                let b = poisson(&self.hamiltonian(f)?, &self.hamiltonian(g)?)?;
                let bracket = b.expr().simplify();
                let verdict = match expect {
                    Some(e) => {
                        let want = PolyHamiltonian::new(chart.clone(), e.clone())?;
                        Some(b.equiv(&want, &self.cfg)?)
                    }
                    None => None,
                };
                Ok(Outcome {
                    outputs: json!({ "bracket": report::expr(&bracket) }),
                    verdict,
                })
            }
            TaskKind::SodeTest { hamiltonian, expect } => {
                let h = match hamiltonian {
                    SodeSource::Hamiltonian(h) => self.hamiltonian(h)?,
                    SodeSource::SchrodingerPotential(u) => {
                        let op = self
                            .quantizer
                            .quantize_homogeneous(&m.metric.inverse_tensor()?)?
                            .scale(&Expr::real(0.5))
                            .add(&DiffOperator::multiplication(chart.clone(), u.clone()))?;
                        tensor_to_hamiltonian(&self.quantizer.dequantize(&op)?)?
                    }
                };
                let rep = is_second_order(&h, &m.metric, &self.cfg)?;
                let failing: Vec<&str> = rep.failing.iter().map(|&j| chart.coord(j)).collect();
                Ok(Outcome {
                    outputs: json!({
                        "hamiltonian": report::expr(&h.expr().simplify()),
                        "second_order": rep.second_order,
                        "failing": failing,
                        "defects": rep.defects.iter().map(report::expr).collect::<Vec<_>>(),
                        "work_form": rep.work_form.iter().map(report::expr).collect::<Vec<_>>(),
                        "work_form_horizontal": rep.work_form_horizontal,
                    }),
                    verdict: expect.map(|e| e == rep.second_order),
                })
            }
            TaskKind::Hj { phase, potential, energy, expect } => {
                let residual = hamilton_jacobi_residual(phase, potential, *energy, &m.metric)?;
                let abc = schrodinger_abc(phase, potential, *energy, &m.metric, &self.cfg)?;
                let got = [abc.a, abc.b, abc.c];
                let verdict = abc.consistent() && expect.is_none_or(|e| e == got);
                Ok(Outcome {
                    outputs: json!({
                        "residual": report::expr(&residual),
                        "abc": got,
                        "consistent": abc.consistent(),
                    }),
                    verdict: Some(verdict),
                })
            }
            TaskKind::Broglie { phase, potential } => {
                let (lhs, rhs) = broglie_identity_check(phase, potential, &m.metric)?;
                let equal = self.same(&lhs, &rhs)?;
                Ok(Outcome {
                    outputs: json!({
                        "lhs": report::expr(&lhs),
                        "rhs": report::expr(&rhs),
                        "equal": equal,
                    }),
                    verdict: Some(equal),
                })
            }
            TaskKind::ExpmapVerify { f, point, orders } => {
                let c = &m.config;
                let mut rows = Vec::new();
                let mut all = true;
                for &r in orders {
                    let tol = c.tolerances.differential(r);
                    let rep = verify_equivalence(f, point, r, &m.connection, &c.integrator, &c.fd, tol)?;
                    all &= rep.pass;
                    let mut numeric = Map::new();
                    let mut symbolic = Map::new();
                    for (idx, z) in &rep.symbolic.components {
                        symbolic.insert(report::key(chart, idx), report::complex(*z));
                        numeric.insert(report::key(chart, idx), report::complex(rep.numeric.get(idx)));
                    }
                    rows.push(json!({
                        "order": r,
                        "numeric": numeric,
                        "symbolic": symbolic,
                        "max_abs_error": rep.max_abs_error,
                        "max_rel_error": rep.max_rel_error,
                        "tolerance": rep.tolerance,
                        "pass": rep.pass,
                    }));
                }
                Ok(Outcome {
                    outputs: json!({ "orders": rows }),
                    verdict: Some(all),
                })
            }
            TaskKind::ScaleCheck { tensor, f, point, s } => {
                debug_assert_eq!(tensor.variance(), Variance::Covariant);
                let c = &m.config;
                let mut rows = Vec::new();
                let mut all = true;
                for &si in s {
                    let rep = scaled_quantization_check(
                        tensor,
                        f,
                        point,
                        si,
                        &m.metric,
                        &m.connection,
                        c.hbar,
                        c.tolerances.scale,
                        &c.integrator,
                        &c.fd,
                    )?;
                    all &= rep.pass;
                    rows.push(json!({
                        "s": rep.s,
                        "order": rep.order,
                        "base": report::complex(rep.base),
                        "scaled": report::complex(rep.scaled),
                        "error": rep.error,
                        "tolerance": rep.tolerance,
                        "pass": rep.pass,
                    }));
                }
                Ok(Outcome {
                    outputs: json!({ "checks": rows }),
                    verdict: Some(all),
                })
            }
        }
    }
}
