//! Manifest schema, parsing and validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use geoquant::expmap::{FDConfig, IntegratorConfig};
use geoquant::expr::{parse, Expr, DEFAULT_SEED, HBAR};
use geoquant::geometry::{christoffel, Chart, Connection, InhomTensor, Interval, Metric, SymTensor, Variance};
use geoquant::quantizer::DiffOperator;
use serde::Deserialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// A problem found in a manifest, located by a path such as
/// `tasks[2].args.f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    schema_version: u32,
    chart: RawChart,
    metric: Vec<Vec<String>>,
    #[serde(default)]
    connection: Option<BTreeMap<String, BTreeMap<String, String>>>,
    #[serde(default)]
    scalars: BTreeMap<String, String>,
    #[serde(default)]
    tensors: BTreeMap<String, RawTensor>,
    #[serde(default)]
    operators: BTreeMap<String, RawOperator>,
    #[serde(default)]
    tasks: Vec<RawTask>,
    #[serde(default)]
    config: RawConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    #[serde(default)]
    dim: Option<usize>,
    coordinates: Vec<String>,
    #[serde(default)]
    domain: Option<Vec<[Option<f64>; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTensor {
    variance: String,
    #[serde(default)]
    order: Option<usize>,
    components: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    coefficients: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    kind: String,
    #[serde(default)]
    args: BTreeMap<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    hbar: f64,
    seed: u64,
    tolerances: Tolerances,
    integrator: RawIntegrator,
    fd: RawFd,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            hbar: 1.0,
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            integrator: RawIntegrator::default(),
            fd: RawFd::default(),
        }
    }
}

/// Verdict tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Scaled tolerance for symbolic identities decided by sampling.
    pub equiv: f64,
    /// Relative tolerance of the fiber differential for orders 1 and 2.
    pub differential_low: f64,
    /// Relative tolerance of the fiber differential for order 3 and above.
    pub differential_high: f64,
    /// Tolerance of the scaling law of the vertical quantization.
    pub scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equiv: 1e-9,
            differential_low: 1e-5,
            differential_high: 1e-4,
            scale: 1e-5,
        }
    }
}

impl Tolerances {
    pub fn differential(&self, r: usize) -> f64 {
        if r <= 2 {
            self.differential_low
        } else {
            self.differential_high
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawIntegrator {
    step: f64,
    max_steps: usize,
}

impl Default for RawIntegrator {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        RawIntegrator {
            step: d.step,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawFd {
    h0: f64,
    levels: usize,
    max_order: usize,
}

impl Default for RawFd {
    fn default() -> Self {
        let d = FDConfig::default();
        RawFd {
            h0: d.h0,
            levels: d.levels,
            max_order: d.max_order,
        }
    }
}

/// Run-wide numeric settings.
#[derive(Debug, Clone)]
pub struct Config {
    pub hbar: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub integrator: IntegratorConfig,
    pub fd: FDConfig,
}

/// A phase-space function given either as a scalar or by a contravariant
/// tensor (momenta substituted for `∂/∂x^j`).
#[derive(Debug, Clone)]
pub enum HamiltonianSource {
    Scalar(Expr),
    Tensor(InhomTensor),
}

#[derive(Debug, Clone)]
pub enum TaskKind {
    Christoffel,
    Quantize {
        tensor: InhomTensor,
        expect: Option<DiffOperator>,
    },
    Dequantize {
        operator: DiffOperator,
        expect: Option<InhomTensor>,
    },
    Symbol {
        operator: SymbolSource,
        order: Option<usize>,
    },
    Poisson {
        f: HamiltonianSource,
        g: HamiltonianSource,
        expect: Option<Expr>,
    },
    SodeTest {
        hamiltonian: SodeSource,
        expect: Option<bool>,
    },
    Hj {
        phase: Expr,
        potential: Expr,
        energy: f64,
        expect: Option<[bool; 3]>,
    },
    Broglie {
        phase: Expr,
        potential: Expr,
    },
    ExpmapVerify {
        f: Expr,
        point: Vec<f64>,
        orders: Vec<usize>,
    },
    ScaleCheck {
        tensor: SymTensor,
        f: Expr,
        point: Vec<f64>,
        s: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub enum SymbolSource {
    Operator(DiffOperator),
    Tensor(InhomTensor),
}

#[derive(Debug, Clone)]
pub enum SodeSource {
    Hamiltonian(HamiltonianSource),
    /// `−ħ²/2 Δ + U`, dequantized.
    SchrodingerPotential(Expr),
}

#[derive(Debug, Clone)]
pub struct Task {
    pub kind_name: String,
    pub args: BTreeMap<String, Value>,
    pub kind: TaskKind,
}

/// A validated manifest with every name resolved.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub chart: Arc<Chart>,
    pub metric: Metric,
    pub connection: Connection,
    pub explicit_connection: bool,
    pub tasks: Vec<Task>,
    pub config: Config,
}

pub const TASK_KINDS: [&str; 10] = [
    "christoffel",
    "quantize",
    "dequantize",
    "symbol",
    "poisson",
    "sode-test",
    "hj",
    "broglie",
    "expmap-verify",
    "scale-check",
];

/// Parses and validates; on failure returns every diagnostic found.
pub fn load(text: &str) -> Result<Manifest, Vec<Diagnostic>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawManifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        vec![Diagnostic::new(path, e.inner().to_string())]
    })?;
    Resolver::default().resolve(raw)
}

/// All diagnostics for a manifest; empty when it is valid.
pub fn validate(text: &str) -> Vec<Diagnostic> {
    match load(text) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

#[derive(Default)]
struct Resolver {
    diags: Vec<Diagnostic>,
}

struct Context {
    chart: Arc<Chart>,
    scalars: BTreeMap<String, Expr>,
    tensors: BTreeMap<String, InhomTensor>,
    operators: BTreeMap<String, DiffOperator>,
}

impl Resolver {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(path, message));
    }

    fn resolve(mut self, raw: RawManifest) -> Result<Manifest, Vec<Diagnostic>> {
        if raw.schema_version != SCHEMA_VERSION {
            self.err(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema_version),
            );
        }
        let Some(chart) = self.chart(&raw.chart) else {
            return Err(self.diags);
        };
        let chart = Arc::new(chart);
        let metric = self.metric(&chart, &raw.metric);
        let connection = match (&raw.connection, &metric) {
            (Some(c), _) => self.connection(&chart, c),
            (None, Some(g)) => match christoffel(g) {
                Ok(c) => Some(c),
                Err(e) => {
                    self.err("metric", format!("cannot build the Levi-Civita connection: {e}"));
                    None
                }
            },
            (None, None) => None,
        };
        let config = self.config(&raw.config);
        let mut cx = Context {
            chart: chart.clone(),
            scalars: BTreeMap::new(),
            tensors: BTreeMap::new(),
            operators: BTreeMap::new(),
        };
        for (name, src) in &raw.scalars {
            let path = format!("scalars.{name}");
            if let Some(e) = self.expr(&path, src, &phase_symbols(&chart)) {
                cx.scalars.insert(name.clone(), e);
            }
        }
        for (name, t) in &raw.tensors {
            if let Some(t) = self.tensor(&chart, &format!("tensors.{name}"), t) {
                cx.tensors.insert(name.clone(), t);
            }
        }
        for (name, op) in &raw.operators {
            if let Some(op) = self.operator(&chart, &format!("operators.{name}"), op) {
                cx.operators.insert(name.clone(), op);
            }
        }
        let mut tasks = Vec::new();
        for (k, t) in raw.tasks.iter().enumerate() {
            if let Some(kind) = self.task(&cx, k, t) {
                tasks.push(Task {
                    kind_name: t.kind.clone(),
                    args: t.args.clone(),
                    kind,
                });
            }
        }
        if !self.diags.is_empty() {
            return Err(self.diags);
        }
        Ok(Manifest {
            chart,
            metric: metric.expect("checked"),
            connection: connection.expect("checked"),
            explicit_connection: raw.connection.is_some(),
            tasks,
            config: config.expect("checked"),
        })
    }

    fn chart(&mut self, raw: &RawChart) -> Option<Chart> {
        let n = raw.coordinates.len();
        if let Some(d) = raw.dim {
            if d != n {
                self.err("chart.dim", format!("dim is {d} but {n} coordinates are named"));
            }
        }
        let domain: Vec<Interval> = match &raw.domain {
            None => vec![Interval::unbounded(); n],
            Some(d) if d.len() != n => {
                self.err("chart.domain", format!("{} intervals for {n} coordinates", d.len()));
                return None;
            }
            Some(d) => d
                .iter()
                .map(|[lo, hi]| Interval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
                .collect(),
        };
        match Chart::new(raw.coordinates.clone(), domain) {
            Ok(c) => Some(c),
            Err(e) => {
                self.err("chart", e.to_string());
                None
            }
        }
    }

    fn expr(&mut self, path: &str, src: &str, allowed: &BTreeSet<String>) -> Option<Expr> {
        let e = match parse(src) {
            Ok(e) => e,
            Err(e) => {
                self.err(path, format!("cannot parse `{src}`: {e}"));
                return None;
            }
        };
        let unknown: Vec<String> = e.free_symbols().into_iter().filter(|s| !allowed.contains(s)).collect();
        if !unknown.is_empty() {
            self.err(path, format!("unknown symbol(s): {}", unknown.join(", ")));
            return None;
        }
        Some(e)
    }

    fn metric(&mut self, chart: &Arc<Chart>, rows: &[Vec<String>]) -> Option<Metric> {
        let n = chart.dim();
        if rows.len() != n {
            self.err("metric", format!("expected {n} upper-triangle rows, got {}", rows.len()));
            return None;
        }
        let allowed = base_symbols(chart);
        let mut parsed = Vec::with_capacity(n);
        let mut ok = true;
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n - j {
                self.err(format!("metric[{j}]"), format!("row {j} needs {} entries, got {}", n - j, row.len()));
                ok = false;
                continue;
            }
            let mut out = Vec::new();
            for (k, src) in row.iter().enumerate() {
                match self.expr(&format!("metric[{j}][{k}]"), src, &allowed) {
                    Some(e) => out.push(e),
                    None => ok = false,
                }
            }
            parsed.push(out);
        }
        if !ok {
            return None;
        }
        match Metric::from_upper_triangle(chart.clone(), parsed) {
            Ok(g) => Some(g),
            Err(e) => {
                self.err("metric", e.to_string());
                None
            }
        }
    }

    fn connection(&mut self, chart: &Arc<Chart>, raw: &BTreeMap<String, BTreeMap<String, String>>) -> Option<Connection> {
        let n = chart.dim();
        let allowed = base_symbols(chart);
        let mut gamma = vec![Expr::zero(); n * n * n];
        let mut ok = true;
        for (upper, lower) in raw {
            let path = format!("connection.{upper}");
            let Some(j) = chart.index_of(upper) else {
                self.err(path, format!("`{upper}` is not a coordinate"));
                ok = false;
                continue;
            };
            for (key, src) in lower {
                let path = format!("{path}.{key}");
                let Some(idx) = self.key(chart, &path, key) else {
                    ok = false;
                    continue;
                };
                if idx.len() != 2 {
                    self.err(&path, "connection components need two lower indices");
                    ok = false;
                    continue;
                }
                if let Some(e) = self.expr(&path, src, &allowed) {
                    gamma[(j * n + idx[0]) * n + idx[1]] = e.clone();
                    gamma[(j * n + idx[1]) * n + idx[0]] = e;
                } else {
                    ok = false;
                }
            }
        }
        if !ok {
            return None;
        }
        match Connection::new(chart.clone(), |j, k, l| gamma[(j * n + k) * n + l].clone()) {
            Ok(c) => Some(c),
            Err(e) => {
                self.err("connection", e.to_string());
                None
            }
        }
    }

    /// Sorted coordinate indices of a key such as `"th,ph"`; `""` is order 0.
    fn key(&mut self, chart: &Chart, path: &str, key: &str) -> Option<Vec<usize>> {
        if key.trim().is_empty() {
            return Some(Vec::new());
        }
        let mut idx = Vec::new();
        for name in key.split(',') {
            match chart.index_of(name.trim()) {
                Some(j) => idx.push(j),
                None => {
                    self.err(path, format!("`{}` is not a coordinate", name.trim()));
                    return None;
                }
            }
        }
        idx.sort_unstable();
        Some(idx)
    }

    fn tensor(&mut self, chart: &Arc<Chart>, path: &str, raw: &RawTensor) -> Option<InhomTensor> {
        let variance = match raw.variance.as_str() {
            "covariant" => Variance::Covariant,
            "contravariant" => Variance::Contravariant,
            other => {
                self.err(format!("{path}.variance"), format!("`{other}` is neither covariant nor contravariant"));
                return None;
            }
        };
        let allowed = base_symbols(chart);
        let mut parts: BTreeMap<usize, SymTensor> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        let mut ok = true;
        for (key, src) in &raw.components {
            let cpath = format!("{path}.components.{key}");
            let Some(idx) = self.key(chart, &cpath, key) else {
                ok = false;
                continue;
            };
            if let Some(r) = raw.order {
                if idx.len() != r {
                    self.err(&cpath, format!("component of order {} in a tensor of order {r}", idx.len()));
                    ok = false;
                    continue;
                }
            }
            if !seen.insert(idx.clone()) {
                self.err(&cpath, "duplicate component (index order does not matter)");
                ok = false;
                continue;
            }
            let Some(e) = self.expr(&cpath, src, &allowed) else {
                ok = false;
                continue;
            };
            parts
                .entry(idx.len())
                .or_insert_with(|| SymTensor::zero(chart.clone(), variance, idx.len()))
                .set(&idx, e);
        }
        if !ok {
            return None;
        }
        if parts.is_empty() {
            let r = raw.order.unwrap_or(0);
            parts.insert(r, SymTensor::zero(chart.clone(), variance, r));
        }
        Some(InhomTensor::from_parts(chart.clone(), variance, parts.into_values()).expect("distinct orders"))
    }

    fn operator(&mut self, chart: &Arc<Chart>, path: &str, raw: &RawOperator) -> Option<DiffOperator> {
        let n = chart.dim();
        let mut allowed = base_symbols(chart);
        allowed.insert(HBAR.to_string());
        let mut coeffs = Vec::new();
        let mut seen = BTreeSet::new();
        let mut ok = true;
        for (key, src) in &raw.coefficients {
            let cpath = format!("{path}.coefficients.{key}");
            let Some(idx) = self.key(chart, &cpath, key) else {
                ok = false;
                continue;
            };
            if !seen.insert(idx.clone()) {
                self.err(&cpath, "duplicate coefficient (index order does not matter)");
                ok = false;
                continue;
            }
            let Some(e) = self.expr(&cpath, src, &allowed) else {
                ok = false;
                continue;
            };
            coeffs.push((geoquant::geometry::multi_index_of(&idx, n), e));
        }
        if !ok {
            return None;
        }
        match DiffOperator::new(chart.clone(), coeffs) {
            Ok(op) => Some(op),
            Err(e) => {
                self.err(path, e.to_string());
                None
            }
        }
    }

    fn config(&mut self, raw: &RawConfig) -> Option<Config> {
        let before = self.diags.len();
        if !(raw.hbar.is_finite() && raw.hbar > 0.0) {
            self.err("config.hbar", "must be positive");
        }
        let t = &raw.tolerances;
        for (name, v) in [
            ("equiv", t.equiv),
            ("differential_low", t.differential_low),
            ("differential_high", t.differential_high),
            ("scale", t.scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                self.err(format!("config.tolerances.{name}"), "must be positive");
            }
        }
        if !(raw.integrator.step.is_finite() && raw.integrator.step > 0.0) {
            self.err("config.integrator.step", "must be positive");
        }
        if !(raw.fd.h0.is_finite() && raw.fd.h0 > 0.0) {
            self.err("config.fd.h0", "must be positive");
        }
        if raw.fd.levels == 0 {
            self.err("config.fd.levels", "must be at least 1");
        }
        if raw.fd.max_order > geoquant::expmap::STENCIL_MAX_ORDER {
            self.err(
                "config.fd.max_order",
                format!("stencils exist up to order {}", geoquant::expmap::STENCIL_MAX_ORDER),
            );
        }
        if self.diags.len() > before {
            return None;
        }
        Some(Config {
            hbar: raw.hbar,
            seed: raw.seed,
            tolerances: raw.tolerances,
            integrator: IntegratorConfig {
                step: raw.integrator.step,
                max_steps: raw.integrator.max_steps,
            },
            fd: FDConfig {
                h0: raw.fd.h0,
                levels: raw.fd.levels,
                max_order: raw.fd.max_order,
            },
        })
    }

    fn task(&mut self, cx: &Context, k: usize, raw: &RawTask) -> Option<TaskKind> {
        let base = format!("tasks[{k}]");
        let mut args = Args {
            path: format!("{base}.args"),
            raw: &raw.args,
            used: BTreeSet::new(),
            ok: true,
        };
        let kind = match raw.kind.as_str() {
            "christoffel" => Some(TaskKind::Christoffel),
            "quantize" => {
                let tensor = args.tensor(self, cx, "tensor", Some(Variance::Contravariant), true);
                let expect = args.operator(self, cx, "expect", false);
                tensor.map(|tensor| TaskKind::Quantize { tensor, expect })
            }
            "dequantize" => {
                let operator = args.operator(self, cx, "operator", true);
                let expect = args.tensor(self, cx, "expect", Some(Variance::Contravariant), false);
                operator.map(|operator| TaskKind::Dequantize { operator, expect })
            }
            "symbol" => {
                let source = match (raw.args.contains_key("operator"), raw.args.contains_key("tensor")) {
                    (true, false) => args.operator(self, cx, "operator", true).map(SymbolSource::Operator),
                    (false, true) => args
                        .tensor(self, cx, "tensor", Some(Variance::Contravariant), true)
                        .map(SymbolSource::Tensor),
                    _ => {
                        self.err(&args.path, "give exactly one of `operator` or `tensor`");
                        args.ok = false;
                        None
                    }
                };
                let order = args.usize(self, "order", false);
                source.map(|operator| TaskKind::Symbol { operator, order })
            }
            "poisson" => {
                let f = args.hamiltonian(self, cx, "f", true);
                let g = args.hamiltonian(self, cx, "g", true);
                let expect = args.expression(self, cx, "expect", false);
                match (f, g) {
                    (Some(f), Some(g)) => Some(TaskKind::Poisson { f, g, expect }),
                    _ => None,
                }
            }
            "sode-test" => {
                let source = match (raw.args.contains_key("hamiltonian"), raw.args.contains_key("potential")) {
                    (true, false) => args.hamiltonian(self, cx, "hamiltonian", true).map(SodeSource::Hamiltonian),
                    (false, true) => args.base_scalar(self, cx, "potential", true).map(SodeSource::SchrodingerPotential),
                    _ => {
                        self.err(&args.path, "give exactly one of `hamiltonian` or `potential`");
                        args.ok = false;
                        None
                    }
                };
                let expect = args.bool(self, "expect", false);
                source.map(|hamiltonian| TaskKind::SodeTest { hamiltonian, expect })
            }
            "hj" => {
                let phase = args.base_scalar(self, cx, "phase", true);
                let potential = args.base_scalar(self, cx, "potential", false).or(Some(Expr::zero()));
                let energy = args.number(self, "energy", true);
                let expect = args.bool_triple(self, "expect");
                match (phase, potential, energy) {
                    (Some(phase), Some(potential), Some(energy)) => Some(TaskKind::Hj {
                        phase,
                        potential,
                        energy,
                        expect,
                    }),
                    _ => None,
                }
            }
            "broglie" => {
                let phase = args.base_scalar(self, cx, "phase", true);
                let potential = args.base_scalar(self, cx, "potential", false).or(Some(Expr::zero()));
                match (phase, potential) {
                    (Some(phase), Some(potential)) => Some(TaskKind::Broglie { phase, potential }),
                    _ => None,
                }
            }
            "expmap-verify" => {
                let f = args.base_scalar(self, cx, "f", true);
                let point = args.point(self, cx, "point");
                let orders = args.orders(self, "orders").unwrap_or_else(|| vec![1, 2, 3]);
                match (f, point) {
                    (Some(f), Some(point)) => Some(TaskKind::ExpmapVerify { f, point, orders }),
                    _ => None,
                }
            }
            "scale-check" => {
                let tensor = args
                    .tensor(self, cx, "tensor", Some(Variance::Covariant), true)
                    .and_then(|t| args.homogeneous(self, "tensor", t));
                let f = args.base_scalar(self, cx, "f", true);
                let point = args.point(self, cx, "point");
                let s = args.numbers(self, "s", true);
                match (tensor, f, point, s) {
                    (Some(tensor), Some(f), Some(point), Some(s)) => {
                        if s.contains(&0.0) {
                            self.err(format!("{}.s", args.path), "scale parameters must be nonzero");
                            None
                        } else {
                            Some(TaskKind::ScaleCheck { tensor, f, point, s })
                        }
                    }
                    _ => None,
                }
            }
            other => {
                self.err(
                    format!("{base}.kind"),
                    format!("unknown task kind `{other}` (expected one of {})", TASK_KINDS.join(", ")),
                );
                return None;
            }
        };
        for key in raw.args.keys() {
            if !args.used.contains(key.as_str()) {
                self.err(format!("{}.{key}", args.path), format!("unknown argument for `{}`", raw.kind));
                args.ok = false;
            }
        }
        if args.ok {
            kind
        } else {
            None
        }
    }
}

fn base_symbols(chart: &Chart) -> BTreeSet<String> {
    chart.coords().iter().cloned().collect()
}

fn phase_symbols(chart: &Chart) -> BTreeSet<String> {
    let mut s = base_symbols(chart);
    s.extend(chart.momenta());
    s.insert(HBAR.to_string());
    s
}

struct Args<'a> {
    path: String,
    raw: &'a BTreeMap<String, Value>,
    used: BTreeSet<&'static str>,
    ok: bool,
}

impl Args<'_> {
    fn fail(&mut self, r: &mut Resolver, key: &str, message: impl Into<String>) {
        r.err(format!("{}.{key}", self.path), message);
        self.ok = false;
    }

    fn get(&mut self, r: &mut Resolver, key: &'static str, required: bool) -> Option<&Value> {
        self.used.insert(key);
        let v = self.raw.get(key);
        if v.is_none() && required {
            r.err(format!("{}.{key}", self.path), "missing required argument");
            self.ok = false;
        }
        v
    }

    fn name(&mut self, r: &mut Resolver, key: &'static str, required: bool) -> Option<String> {
        let v = self.get(r, key, required)?.clone();
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.fail(r, key, "expected a name (string)");
                None
            }
        }
    }

    fn tensor(
        &mut self,
        r: &mut Resolver,
        cx: &Context,
        key: &'static str,
        variance: Option<Variance>,
        required: bool,
    ) -> Option<InhomTensor> {
        let name = self.name(r, key, required)?;
        let Some(t) = cx.tensors.get(&name) else {
            self.fail(r, key, format!("no tensor named `{name}`"));
            return None;
        };
        if let Some(v) = variance {
            if t.variance() != v {
                self.fail(r, key, format!("tensor `{name}` must be {}", v.name()));
                return None;
            }
        }
        Some(t.clone())
    }

    fn homogeneous(&mut self, r: &mut Resolver, key: &'static str, t: InhomTensor) -> Option<SymTensor> {
        let parts: Vec<&SymTensor> = t.parts().collect();
        if parts.len() != 1 {
            self.fail(r, key, "tensor must be homogeneous (one order)");
            return None;
        }
        Some(parts[0].clone())
    }

    fn operator(&mut self, r: &mut Resolver, cx: &Context, key: &'static str, required: bool) -> Option<DiffOperator> {
        let name = self.name(r, key, required)?;
        match cx.operators.get(&name) {
            Some(op) => Some(op.clone()),
            None => {
                self.fail(r, key, format!("no operator named `{name}`"));
                None
            }
        }
    }

    fn hamiltonian(&mut self, r: &mut Resolver, cx: &Context, key: &'static str, required: bool) -> Option<HamiltonianSource> {
        let name = self.name(r, key, required)?;
        if let Some(e) = cx.scalars.get(&name) {
            return Some(HamiltonianSource::Scalar(e.clone()));
        }
        match cx.tensors.get(&name) {
            Some(t) if t.variance() == Variance::Contravariant => Some(HamiltonianSource::Tensor(t.clone())),
            Some(_) => {
                self.fail(r, key, format!("tensor `{name}` must be contravariant"));
                None
            }
            None => {
                self.fail(r, key, format!("no scalar or tensor named `{name}`"));
                None
            }
        }
    }

    /// A scalar depending on the base coordinates only.
    fn base_scalar(&mut self, r: &mut Resolver, cx: &Context, key: &'static str, required: bool) -> Option<Expr> {
        let name = self.name(r, key, required)?;
        let Some(e) = cx.scalars.get(&name) else {
            self.fail(r, key, format!("no scalar named `{name}`"));
            return None;
        };
        let foreign: Vec<String> = e.free_symbols().into_iter().filter(|s| cx.chart.index_of(s).is_none()).collect();
        if !foreign.is_empty() {
            self.fail(r, key, format!("scalar `{name}` must depend on coordinates only (found {})", foreign.join(", ")));
            return None;
        }
        Some(e.clone())
    }

    fn expression(&mut self, r: &mut Resolver, cx: &Context, key: &'static str, required: bool) -> Option<Expr> {
        let src = self.name(r, key, required)?;
        let path = format!("{}.{key}", self.path);
        let e = r.expr(&path, &src, &phase_symbols(&cx.chart));
        if e.is_none() {
            self.ok = false;
        }
        e
    }

    fn number(&mut self, r: &mut Resolver, key: &'static str, required: bool) -> Option<f64> {
        let v = self.get(r, key, required)?.clone();
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(r, key, "expected a finite number");
                None
            }
        }
    }

    fn numbers(&mut self, r: &mut Resolver, key: &'static str, required: bool) -> Option<Vec<f64>> {
        let v = self.get(r, key, required)?.clone();
        let out: Option<Vec<f64>> = match &v {
            Value::Number(n) => n.as_f64().map(|x| vec![x]),
            Value::Array(a) => a.iter().map(Value::as_f64).collect(),
            _ => None,
        };
        match out {
            Some(xs) if !xs.is_empty() && xs.iter().all(|x| x.is_finite()) => Some(xs),
            _ => {
                self.fail(r, key, "expected a number or a nonempty list of numbers");
                None
            }
        }
    }

    fn usize(&mut self, r: &mut Resolver, key: &'static str, required: bool) -> Option<usize> {
        let v = self.get(r, key, required)?.clone();
        match v.as_u64() {
            Some(k) => Some(k as usize),
            None => {
                self.fail(r, key, "expected a nonnegative integer");
                None
            }
        }
    }

    fn orders(&mut self, r: &mut Resolver, key: &'static str) -> Option<Vec<usize>> {
        let v = self.get(r, key, false)?.clone();
        let out: Option<Vec<usize>> = v
            .as_array()
            .and_then(|a| a.iter().map(|x| x.as_u64().map(|k| k as usize)).collect());
        match out {
            Some(xs) if !xs.is_empty() && xs.iter().all(|&k| k >= 1) => Some(xs),
            _ => {
                self.fail(r, key, "expected a nonempty list of positive integers");
                None
            }
        }
    }

    fn bool(&mut self, r: &mut Resolver, key: &'static str, required: bool) -> Option<bool> {
        let v = self.get(r, key, required)?.clone();
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.fail(r, key, "expected true or false");
                None
            }
        }
    }

    fn bool_triple(&mut self, r: &mut Resolver, key: &'static str) -> Option<[bool; 3]> {
        let v = self.get(r, key, false)?.clone();
        let out: Option<Vec<bool>> = v.as_array().and_then(|a| a.iter().map(Value::as_bool).collect());
        match out {
            Some(b) if b.len() == 3 => Some([b[0], b[1], b[2]]),
            _ => {
                self.fail(r, key, "expected three booleans [A, B, C]");
                None
            }
        }
    }

    fn point(&mut self, r: &mut Resolver, cx: &Context, key: &'static str) -> Option<Vec<f64>> {
        let xs = self.numbers(r, key, true)?;
        if xs.len() != cx.chart.dim() {
            self.fail(r, key, format!("point has {} coordinates, chart has {}", xs.len(), cx.chart.dim()));
            return None;
        }
        if !cx.chart.contains(&xs) {
            self.fail(r, key, "point lies outside the chart domain");
            return None;
        }
        Some(xs)
    }
}
