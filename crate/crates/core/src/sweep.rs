//! Parameter sweeps, curve export and tabular output.
//!
//! A sweep evaluates every `(state, N, strength)` combination of a
//! [`SweepConfig`] and returns one [`SweepRow`] per combination. Rows that hit a
//! numerical failure carry the message instead of values; the sweep itself only
//! fails on an invalid configuration or I/O.
//!
//! Output is deterministic: CSV floats use 17 significant digits, JSON floats use
//! the shortest representation that round-trips, and rows are sorted.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bounds::{generalized_fidelity, zzb_pair};
use crate::error::{QzzbError, Result};
use crate::fidelity::{fidelity_curve, MaximizedFidelity};
use crate::states::{ChannelKind, NoiseChannel, PriorWindow, ProbeState, StateKind};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MIN_BETA_SAMPLES: usize = 64;
pub const DEFAULT_BETA_SAMPLES: usize = 1024;

/// Which bound columns a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundSelection {
    #[serde(rename = "tight")]
    Tight,
    #[default]
    #[serde(rename = "sine-relaxed")]
    SineRelaxed,
    #[serde(rename = "both")]
    Both,
}

impl BoundSelection {
    pub fn label(self) -> &'static str {
        match self {
            BoundSelection::Tight => "tight",
            BoundSelection::SineRelaxed => "sine-relaxed",
            BoundSelection::Both => "both",
        }
    }

    fn tight(self) -> bool {
        self != BoundSelection::SineRelaxed
    }

    fn relaxed(self) -> bool {
        self != BoundSelection::Tight
    }
}

impl FromStr for BoundSelection {
    type Err = QzzbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tight" => Ok(BoundSelection::Tight),
            "sine-relaxed" | "relaxed" | "sine" => Ok(BoundSelection::SineRelaxed),
            "both" => Ok(BoundSelection::Both),
            other => Err(QzzbError::Config(format!("unknown bound form '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "json")]
    Json,
}

impl OutputFormat {
    pub fn label(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = QzzbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(QzzbError::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub states: Vec<StateKind>,
    pub channel: ChannelKind,
    pub strength_grid: Vec<f64>,
    pub n_grid: Vec<f64>,
    pub window: PriorWindow<f64>,
    pub beta_samples: usize,
    pub bound_form: BoundSelection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for SweepConfig {
    /// Three states under loss, `eta` in `0.05..=1` (20 points), `N = 5`.
    fn default() -> Self {
        SweepConfig {
            states: StateKind::ALL.to_vec(),
            channel: ChannelKind::PhotonLoss,
            strength_grid: linspace(0.05, 1.0, 20),
            n_grid: vec![5.0],
            window: PriorWindow::default(),
            beta_samples: DEFAULT_BETA_SAMPLES,
            bound_form: BoundSelection::default(),
            output_path: None,
            format: OutputFormat::default(),
        }
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(QzzbError::Config(format!("{name} is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(QzzbError::Config(format!("{name} has non-finite entries")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QzzbError::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(QzzbError::Config("no states selected".into()));
        }
        let mut seen = self.states.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.states.len() {
            return Err(QzzbError::Config("states are listed more than once".into()));
        }
        check_grid("strength grid", &self.strength_grid)?;
        check_grid("N grid", &self.n_grid)?;
        for &s in &self.strength_grid {
            NoiseChannel::new(self.channel, s).map_err(|e| QzzbError::Config(e.to_string()))?;
        }
        if self.n_grid.iter().any(|&n| n < 0.0) {
            return Err(QzzbError::Config("mean photon numbers must be >= 0".into()));
        }
        PriorWindow::new(self.window.width(), self.window.mean()).map_err(|e| QzzbError::Config(e.to_string()))?;
        if self.beta_samples < MIN_BETA_SAMPLES {
            return Err(QzzbError::Config(format!(
                "beta_samples must be >= {MIN_BETA_SAMPLES}, got {}",
                self.beta_samples
            )));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| QzzbError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| QzzbError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| QzzbError::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// `count` evenly spaced points from `start` to `stop`, both included.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Parses `a,b,c` or `start:stop:count`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| QzzbError::Config(format!("bad number '{}' in grid '{spec}'", s.trim())))
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(QzzbError::Config(format!("range grid must be start:stop:count, got '{spec}'")));
        }
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| QzzbError::Config(format!("bad count in grid '{spec}'")))?;
        if count == 0 {
            return Err(QzzbError::Config(format!("grid '{spec}' has no points")));
        }
        return Ok(linspace(num(parts[0])?, num(parts[1])?, count));
    }
    spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

/// One `(state, N, strength)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub state: StateKind,
    pub n: f64,
    pub channel: ChannelKind,
    pub strength: f64,
    pub tight: Option<f64>,
    pub sine_relaxed: Option<f64>,
    /// Optimal variational parameter over the positive beta samples.
    pub lambda_min: Option<f64>,
    pub lambda_median: Option<f64>,
    pub lambda_max: Option<f64>,
    pub quadrature_error: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Uniform beta samples over the whole window.
pub fn beta_grid(window: &PriorWindow<f64>, samples: usize) -> Vec<f64> {
    linspace(0.0, window.width(), samples)
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

fn evaluate_row(cfg: &SweepConfig, state: StateKind, n: f64, strength: f64) -> Result<SweepRow> {
    let probe = ProbeState::new(state, n)?;
    let channel = NoiseChannel::new(cfg.channel, strength)?;
    let profile = MaximizedFidelity::new(probe, channel);
    let pair = zzb_pair(&profile, &cfg.window)?;
    let ceiling = cfg.window.ceiling() + 1e-12;
    for b in [&pair.tight, &pair.sine_relaxed] {
        if !(b.value >= 0.0 && b.value <= ceiling) {
            return Err(QzzbError::Numerical(format!(
                "bound {} outside [0, W^2/12 = {}]",
                b.value,
                cfg.window.ceiling()
            )));
        }
    }
    let betas = beta_grid(&cfg.window, cfg.beta_samples);
    let curve = fidelity_curve(&probe, &channel, &betas)?;
    let mut lambdas: Vec<f64> = curve
        .betas
        .iter()
        .zip(&curve.lambda_opt)
        .filter(|(b, _)| **b > 0.0)
        .map(|(_, l)| *l)
        .collect();
    lambdas.sort_by(f64::total_cmp);
    let sel = cfg.bound_form;
    let mut quad = 0.0_f64;
    if sel.tight() {
        quad = quad.max(pair.tight.quadrature_error_estimate);
    }
    if sel.relaxed() {
        quad = quad.max(pair.sine_relaxed.quadrature_error_estimate);
    }
    Ok(SweepRow {
        state,
        n,
        channel: cfg.channel,
        strength,
        tight: sel.tight().then_some(pair.tight.value),
        sine_relaxed: sel.relaxed().then_some(pair.sine_relaxed.value),
        lambda_min: lambdas.first().copied(),
        lambda_median: (!lambdas.is_empty()).then(|| median(&lambdas)),
        lambda_max: lambdas.last().copied(),
        quadrature_error: Some(quad),
        error: None,
    })
}

/// Evaluates every grid combination in parallel; rows sorted by `(state, N, strength)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &state in &cfg.states {
        for &n in &cfg.n_grid {
            for &s in &cfg.strength_grid {
                jobs.push((state, n, s));
            }
        }
    }
    let mut rows: Vec<SweepRow> = jobs
        .into_par_iter()
        .map(|(state, n, strength)| {
            evaluate_row(cfg, state, n, strength).unwrap_or_else(|e| SweepRow {
                state,
                n,
                channel: cfg.channel,
                strength,
                tight: None,
                sine_relaxed: None,
                lambda_min: None,
                lambda_median: None,
                lambda_max: None,
                quadrature_error: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.state
            .cmp(&b.state)
            .then(a.n.total_cmp(&b.n))
            .then(a.strength.total_cmp(&b.strength))
    });
    Ok(rows)
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}


/// Ordered `key=value` metadata shared by the writers.
pub type Meta = Vec<(String, Value)>;

fn meta_value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_u64() && !n.is_i64() => fmt_f64(x),
            _ => n.to_string(),
        },
        Value::Array(items) => items.iter().map(meta_value_text).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

pub fn sweep_meta(cfg: &SweepConfig) -> Meta {
    vec![
        ("tool".into(), json!("qzzb")),
        ("version".into(), json!(TOOL_VERSION)),
        ("command".into(), json!("sweep")),
        ("states".into(), json!(cfg.states.iter().map(|s| s.label()).collect::<Vec<_>>())),
        ("channel".into(), json!(cfg.channel.label())),
        ("strength_grid".into(), json!(cfg.strength_grid)),
        ("n_grid".into(), json!(cfg.n_grid)),
        ("window_width".into(), json!(cfg.window.width())),
        ("window_mean".into(), json!(cfg.window.mean())),
        ("beta_samples".into(), json!(cfg.beta_samples)),
        ("bound_form".into(), json!(cfg.bound_form.label())),
    ]
}

/// A table of named columns, each cell either a number, text, or empty.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

fn opt_cell(x: Option<f64>) -> Cell {
    x.map(Cell::Num).unwrap_or(Cell::Empty)
}

pub struct Table {
    pub meta: Meta,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let text = meta_value_text(v).replace(['\n', '\r'], " ");
            let _ = writeln!(out, "# {k}={text}");
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let fail = |e: csv::Error| QzzbError::Numerical(format!("csv encoding failed: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| QzzbError::Numerical(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    fn render_json(&self) -> Result<String> {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.clone());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (c, cell) in self.columns.iter().zip(r) {
                    obj.insert((*c).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "meta": Value::Object(meta), "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| QzzbError::Numerical(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let text = self.render(format)?;
        let mut f = fs::File::create(path).map_err(|e| QzzbError::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| QzzbError::io(path, e))
    }
}

pub fn sweep_table(cfg: &SweepConfig, rows: &[SweepRow]) -> Table {
    let sel = cfg.bound_form;
    let mut columns = vec!["state", "n", "channel", "strength"];
    if sel.tight() {
        columns.push("tight");
    }
    if sel.relaxed() {
        columns.push("sine_relaxed");
    }
    columns.extend(["lambda_min", "lambda_median", "lambda_max", "quadrature_error", "status"]);
    let body = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                Cell::Text(r.state.label().into()),
                Cell::Num(r.n),
                Cell::Text(r.channel.label().into()),
                Cell::Num(r.strength),
            ];
            if sel.tight() {
                cells.push(opt_cell(r.tight));
            }
            if sel.relaxed() {
                cells.push(opt_cell(r.sine_relaxed));
            }
            cells.extend([
                opt_cell(r.lambda_min),
                opt_cell(r.lambda_median),
                opt_cell(r.lambda_max),
                opt_cell(r.quadrature_error),
                Cell::Text(r.error.clone().unwrap_or_else(|| "ok".into())),
            ]);
            cells
        })
        .collect();
    Table {
        meta: sweep_meta(cfg),
        columns,
        rows: body,
    }
}

/// Parameters of a generalized-fidelity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    pub state: StateKind,
    pub n: f64,
    pub channel: ChannelKind,
    pub strength: f64,
    pub window: PriorWindow<f64>,
    pub beta_samples: usize,
}

/// Sampled `(beta, F~(beta))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub spec: CurveSpec,
    pub betas: Vec<f64>,
    pub generalized: Vec<f64>,
}

pub fn compute_curve(spec: &CurveSpec) -> Result<CurveData> {
    if spec.beta_samples < 2 {
        return Err(QzzbError::Config("a curve needs at least 2 samples".into()));
    }
    let probe = ProbeState::new(spec.state, spec.n)?;
    let channel = NoiseChannel::new(spec.channel, spec.strength)?;
    let betas = beta_grid(&spec.window, spec.beta_samples);
    let curve = fidelity_curve(&probe, &channel, &betas)?;
    let g = generalized_fidelity(&curve, &spec.window)?;
    Ok(CurveData {
        spec: *spec,
        betas: g.betas,
        generalized: g.values,
    })
}

pub fn curve_table(data: &CurveData) -> Table {
    let s = &data.spec;
    let meta = vec![
        ("tool".into(), json!("qzzb")),
        ("version".into(), json!(TOOL_VERSION)),
        ("command".into(), json!("curve")),
        ("state".into(), json!(s.state.label())),
        ("n".into(), json!(s.n)),
        ("channel".into(), json!(s.channel.label())),
        ("strength".into(), json!(s.strength)),
        ("window_width".into(), json!(s.window.width())),
        ("window_mean".into(), json!(s.window.mean())),
        ("beta_samples".into(), json!(s.beta_samples)),
    ];
    let rows = data
        .betas
        .iter()
        .zip(&data.generalized)
        .map(|(&b, &g)| vec![Cell::Num(b), Cell::Num(g)])
        .collect();
    Table {
        meta,
        columns: vec!["beta", "generalized_fidelity"],
        rows,
    }
}

/// Computes a curve and writes it.
pub fn emit_curve(spec: &CurveSpec, path: &Path, format: OutputFormat) -> Result<CurveData> {
    let data = compute_curve(spec)?;
    curve_table(&data).write(path, format)?;
    Ok(data)
}

/// Trapezoid rule over a sampled curve.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
