//! Deterministic parameter sweeps over one or two axes, with CSV and JSON
//! serialization.
//!
//! Rows are ordered lexicographically in the axis indices (first axis
//! outermost) no matter how many threads evaluate the nodes. Solver failures
//! at a node are stored in that row's `error` column.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{DickeError, Result};
use crate::exact::{converge_cutoff_with, CutoffOptions, DEFAULT_DIMENSION_BUDGET};
use crate::meanfield::ground_state;
use crate::model::{linspace, ModelParams, ParamAxis};
use crate::phases::{classify, default_dv, susceptibility_v, CLASSIFY_TOL};

pub const SCHEMA: &str = "cavity-dicke/sweep/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisNodes {
    Range { min: f64, max: f64, count: usize },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: ParamAxis,
    #[serde(flatten)]
    pub nodes: AxisNodes,
}

impl AxisSpec {
    pub fn range(name: ParamAxis, min: f64, max: f64, count: usize) -> Self {
        Self {
            name,
            nodes: AxisNodes::Range { min, max, count },
        }
    }

    pub fn values(name: ParamAxis, values: Vec<f64>) -> Self {
        Self {
            name,
            nodes: AxisNodes::Values { values },
        }
    }

    pub fn points(&self) -> Vec<f64> {
        match &self.nodes {
            AxisNodes::Range { min, max, count } => linspace(*min, *max, *count),
            AxisNodes::Values { values } => values.clone(),
        }
    }
}

fn default_eps() -> f64 {
    1e-10
}

fn default_n_max_start() -> usize {
    4
}

fn default_budget() -> usize {
    DEFAULT_DIMENSION_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Atom numbers to diagonalize at every node.
    pub n_atoms: Vec<u64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_n_max_start")]
    pub n_max_start: usize,
    #[serde(default = "default_budget")]
    pub dimension_budget: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSelection {
    /// Mean-field columns to keep; all when absent. Axis and `error`
    /// columns are always written.
    #[serde(default)]
    pub columns: Option<Vec<String>>,
    /// Adds `susceptibility_v` and `susceptibility_flag`.
    #[serde(default)]
    pub susceptibility: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: ModelParams,
    pub axes: Vec<AxisSpec>,
    #[serde(default)]
    pub exact: Option<ExactOptions>,
    #[serde(default)]
    pub outputs: OutputSelection,
}

/// Mean-field columns in output order.
pub const MEANFIELD_COLUMNS: [&str; 13] = [
    "u",
    "eta",
    "alpha",
    "s_x",
    "s_z",
    "m_over_n",
    "photon_density",
    "energy_per_atom",
    "phase_label",
    "residual",
    "degenerate",
    "local_minima",
    "flat",
];

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(DickeError::Config(format!("expected 1 or 2 axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(DickeError::Config(format!("axis `{}` given twice", self.axes[0].name)));
        }
        for axis in &self.axes {
            match &axis.nodes {
                AxisNodes::Range { min, max, count } => {
                    if *count < 2 {
                        return Err(DickeError::Config(format!("axis `{}` needs count >= 2", axis.name)));
                    }
                    if !min.is_finite() || !max.is_finite() {
                        return Err(DickeError::Config(format!("axis `{}` has a non-finite bound", axis.name)));
                    }
                }
                AxisNodes::Values { values } => {
                    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                        return Err(DickeError::Config(format!("axis `{}` needs finite values", axis.name)));
                    }
                }
            }
        }
        if let Some(cols) = &self.outputs.columns {
            for c in cols {
                if !MEANFIELD_COLUMNS.contains(&c.as_str()) {
                    return Err(DickeError::Config(format!("unknown output column `{c}`")));
                }
            }
        }
        if let Some(ex) = &self.exact {
            if ex.n_atoms.is_empty() || ex.n_atoms.contains(&0) {
                return Err(DickeError::Config("exact solver needs positive atom numbers".into()));
            }
            if !(ex.eps > 0.0) {
                return Err(DickeError::Config("exact eps must be positive".into()));
            }
        }
        Ok(())
    }

    fn meanfield_columns(&self) -> Vec<&'static str> {
        match &self.outputs.columns {
            None => MEANFIELD_COLUMNS.to_vec(),
            Some(cols) => MEANFIELD_COLUMNS
                .iter()
                .copied()
                .filter(|c| cols.iter().any(|k| k == c))
                .collect(),
        }
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes.iter().map(|a| a.name.name().to_string()).collect();
        cols.extend(self.meanfield_columns().iter().map(|c| c.to_string()));
        if self.outputs.susceptibility {
            cols.push("susceptibility_v".into());
            cols.push("susceptibility_flag".into());
        }
        if let Some(ex) = &self.exact {
            for n in &ex.n_atoms {
                for field in EXACT_FIELDS {
                    cols.push(format!("exact_n{n}_{field}"));
                }
            }
        }
        cols.push("error".into());
        cols
    }
}

const EXACT_FIELDS: [&str; 5] = ["energy_per_atom", "photon_density", "m_over_n", "n_max", "converged"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

/// Storage type of a column, inferred from its name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Float,
    Int,
    Bool,
    Text,
}

impl ColumnKind {
    pub fn of(column: &str) -> Self {
        if matches!(column, "phase_label" | "error" | "line_id" | "order" | "observable" | "quantity") {
            ColumnKind::Text
        } else if matches!(column, "degenerate" | "flat" | "susceptibility_flag") || column.ends_with("_converged") {
            ColumnKind::Bool
        } else if column == "local_minima" || column.ends_with("_n_max") {
            ColumnKind::Int
        } else {
            ColumnKind::Float
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnKind::Float => "float",
            ColumnKind::Int => "int",
            ColumnKind::Bool => "bool",
            ColumnKind::Text => "text",
        }
    }
}

/// Seventeen significant digits; `f64::from_str` reads it back bit for bit.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(kind: ColumnKind, field: &str) -> Result<Cell> {
        let bad = || DickeError::Config(format!("cannot parse `{field}` as {}", kind.name()));
        Ok(match kind {
            ColumnKind::Float => Cell::Float(field.parse().map_err(|_| bad())?),
            ColumnKind::Int => Cell::Int(field.parse().map_err(|_| bad())?),
            ColumnKind::Bool => Cell::Bool(field.parse().map_err(|_| bad())?),
            ColumnKind::Text => Cell::Text(field.to_string()),
        })
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(format_float(*x)),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }

    fn from_json(kind: ColumnKind, v: &Value) -> Result<Cell> {
        let bad = || DickeError::Config(format!("unexpected JSON value {v} for a {} column", kind.name()));
        Ok(match (kind, v) {
            (ColumnKind::Float, Value::Number(n)) => Cell::Float(n.as_f64().ok_or_else(bad)?),
            (ColumnKind::Float, Value::String(s)) => Cell::parse(kind, s)?,
            (ColumnKind::Int, Value::Number(n)) => Cell::Int(n.as_i64().ok_or_else(bad)?),
            (ColumnKind::Bool, Value::Bool(b)) => Cell::Bool(*b),
            (ColumnKind::Text, Value::String(s)) => Cell::Text(s.clone()),
            _ => return Err(bad()),
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: Option<SweepConfig>,
}

impl Provenance {
    pub fn current(config: Option<SweepConfig>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Provenance,
}

/// How nodes are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl SweepDataset {
    pub fn empty(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            provenance: Provenance::current(None),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of a numeric column; non-numeric cells become NaN.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    /// Parses CSV written by [`SweepDataset::write_csv`]; provenance is not
    /// part of the CSV and comes back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let kinds: Vec<ColumnKind> = columns.iter().map(|c| ColumnKind::of(c)).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            rows.push(
                record
                    .iter()
                    .zip(&kinds)
                    .map(|(field, &kind)| Cell::parse(kind, field))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            columns,
            rows,
            provenance: Provenance {
                tool: String::new(),
                version: String::new(),
                config: None,
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let value = json!({
            "schema": {
                "id": SCHEMA,
                "columns": self.columns,
                "types": self.columns.iter().map(|c| ColumnKind::of(c).name()).collect::<Vec<_>>(),
            },
            "provenance": self.provenance,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let columns: Vec<String> = serde_json::from_value(value["schema"]["columns"].clone())?;
        let provenance: Provenance = serde_json::from_value(value["provenance"].clone())?;
        let kinds: Vec<ColumnKind> = columns.iter().map(|c| ColumnKind::of(c)).collect();
        let rows = value["rows"]
            .as_array()
            .ok_or_else(|| DickeError::Config("`rows` must be an array".into()))?
            .iter()
            .map(|row| {
                let cells = row.as_array().ok_or_else(|| DickeError::Config("row must be an array".into()))?;
                if cells.len() != kinds.len() {
                    return Err(DickeError::Config("row length does not match the schema".into()));
                }
                cells.iter().zip(&kinds).map(|(v, &k)| Cell::from_json(k, v)).collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            columns,
            rows,
            provenance,
        })
    }

    /// Rows joined into one dataset; all parts must share a header.
    pub fn concat(parts: Vec<SweepDataset>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut first = iter.next().ok_or_else(|| DickeError::Config("nothing to concatenate".into()))?;
        for part in iter {
            if part.columns != first.columns {
                return Err(DickeError::Config("datasets have different columns".into()));
            }
            first.rows.extend(part.rows);
        }
        Ok(first)
    }

    /// A leading text column, for stacking several sweeps in one file.
    pub fn with_label_column(mut self, name: &str, value: &str) -> Self {
        self.columns.insert(0, name.to_string());
        for row in &mut self.rows {
            row.insert(0, Cell::Text(value.to_string()));
        }
        self
    }
}

fn nan_row(n: usize) -> Vec<Cell> {
    vec![Cell::Float(f64::NAN); n]
}

fn meanfield_cells(config: &SweepConfig, params: &ModelParams, errors: &mut Vec<String>) -> Vec<Cell> {
    let cols = config.meanfield_columns();
    let mut cells = Vec::with_capacity(cols.len() + 2);
    match ground_state(params) {
        Ok(sol) => {
            let label = classify(params, &sol, CLASSIFY_TOL);
            for c in &cols {
                cells.push(match *c {
                    "u" => Cell::Float(params.u()),
                    "eta" => Cell::Float(sol.eta),
                    "alpha" => Cell::Float(sol.alpha),
                    "s_x" => Cell::Float(sol.point.s_x),
                    "s_z" => Cell::Float(sol.point.s_z),
                    "m_over_n" => Cell::Float(sol.m_over_n),
                    "photon_density" => Cell::Float(sol.photon_density),
                    "energy_per_atom" => Cell::Float(sol.energy_per_atom),
                    "phase_label" => Cell::Text(label.name().into()),
                    "residual" => Cell::Float(sol.residual),
                    "degenerate" => Cell::Bool(sol.degenerate),
                    "local_minima" => Cell::Int(sol.local_minima as i64),
                    "flat" => Cell::Bool(sol.flat),
                    other => unreachable!("unhandled column {other}"),
                });
            }
        }
        Err(e) => {
            errors.push(format!("meanfield: {e}"));
            for c in &cols {
                cells.push(match ColumnKind::of(c) {
                    ColumnKind::Float => Cell::Float(f64::NAN),
                    ColumnKind::Int => Cell::Int(0),
                    ColumnKind::Bool => Cell::Bool(false),
                    ColumnKind::Text => Cell::Text(String::new()),
                });
            }
        }
    }
    if config.outputs.susceptibility {
        match susceptibility_v(params, default_dv(params.v)) {
            Ok(s) => {
                cells.push(Cell::Float(s.value));
                cells.push(Cell::Bool(s.non_differentiable));
            }
            Err(e) => {
                errors.push(format!("susceptibility: {e}"));
                cells.push(Cell::Float(f64::NAN));
                cells.push(Cell::Bool(false));
            }
        }
    }
    cells
}

fn exact_cells(opts: &ExactOptions, params: &ModelParams, errors: &mut Vec<String>) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &n in &opts.n_atoms {
        let p = ModelParams { n_atoms: n, ..*params };
        let cutoff = CutoffOptions {
            eps: opts.eps,
            n_max_start: opts.n_max_start,
            dimension_budget: opts.dimension_budget,
        };
        match converge_cutoff_with(&p, &cutoff) {
            Ok(sol) => {
                cells.push(Cell::Float(sol.energy_per_atom));
                cells.push(Cell::Float(sol.photon_density()));
                cells.push(Cell::Float(sol.m_over_n()));
                cells.push(Cell::Int(sol.n_max_used as i64));
                cells.push(Cell::Bool(sol.converged));
                if !sol.converged {
                    errors.push(format!("exact N={n}: cutoff not converged at n_max={}", sol.n_max_used));
                }
            }
            Err(e) => {
                errors.push(format!("exact N={n}: {e}"));
                cells.extend(nan_row(3));
                cells.push(Cell::Int(0));
                cells.push(Cell::Bool(false));
            }
        }
    }
    cells
}

fn evaluate_node(config: &SweepConfig, axis_values: &[f64]) -> Vec<Cell> {
    let mut params = config.base;
    for (axis, &value) in config.axes.iter().zip(axis_values) {
        params = params.with(axis.name, value);
    }
    let mut errors = Vec::new();
    let mut row: Vec<Cell> = axis_values.iter().map(|&v| Cell::Float(v)).collect();
    row.extend(meanfield_cells(config, &params, &mut errors));
    if let Some(ex) = &config.exact {
        row.extend(exact_cells(ex, &params, &mut errors));
    }
    row.push(Cell::Text(errors.join("; ")));
    row
}

/// All node coordinates in row order.
pub fn grid_nodes(config: &SweepConfig) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = config.axes.iter().map(AxisSpec::points).collect();
    let mut nodes: Vec<Vec<f64>> = vec![Vec::new()];
    for points in &axes {
        nodes = nodes
            .into_iter()
            .flat_map(|prefix| {
                points.iter().map(move |&x| {
                    let mut n = prefix.clone();
                    n.push(x);
                    n
                })
            })
            .collect();
    }
    nodes
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepDataset> {
    run_sweep_with(config, Execution::Parallel)
}

pub fn run_sweep_with(config: &SweepConfig, execution: Execution) -> Result<SweepDataset> {
    config.validate()?;
    let nodes = grid_nodes(config);
    let rows: Vec<Vec<Cell>> = match execution {
        Execution::Serial => nodes.iter().map(|n| evaluate_node(config, n)).collect(),
        Execution::Parallel => nodes.par_iter().map(|n| evaluate_node(config, n)).collect(),
    };
    Ok(SweepDataset {
        columns: config.columns(),
        rows,
        provenance: Provenance::current(Some(config.clone())),
    })
}

/// `# key: value` lines for companion files that carry provenance.
pub fn provenance_comment(p: &Provenance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# tool: {} {}", p.tool, p.version);
    if let Some(cfg) = &p.config {
        let _ = writeln!(s, "# config: {}", serde_json::to_string(cfg).unwrap_or_default());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_axis(count: usize) -> SweepConfig {
        SweepConfig {
            base: ModelParams::dimensionless(1.0, 0.0, 0.0, 0.0),
            axes: vec![AxisSpec::range(ParamAxis::Delta, -2.0, 2.0, count)],
            exact: None,
            outputs: OutputSelection::default(),
        }
    }

    #[test]
    fn config_validation() {
        assert!(one_axis(1).validate().is_err());
        let mut c = one_axis(5);
        c.axes.push(AxisSpec::range(ParamAxis::Delta, 0.0, 1.0, 3));
        assert!(c.validate().is_err());
        let mut c = one_axis(5);
        c.outputs.columns = Some(vec!["nope".into()]);
        assert!(c.validate().is_err());
        assert!(one_axis(5).validate().is_ok());
    }

    #[test]
    fn config_json_round_trip() {
        let mut c = one_axis(5);
        c.axes.push(AxisSpec::values(ParamAxis::OmegaRabi, vec![0.0, 0.5]));
        c.exact = Some(ExactOptions {
            n_atoms: vec![2, 4],
            eps: 1e-9,
            n_max_start: 2,
            dimension_budget: 1000,
        });
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SweepConfig>(&text).unwrap(), c);
        let minimal = r#"{"base":{"omega":1,"lambda":1,"delta":0,"omega_rabi":0,"v":0,"n_atoms":1},
                          "axes":[{"name":"delta","min":-1,"max":1,"count":3}]}"#;
        let parsed: SweepConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(parsed.axes[0].points(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn rows_follow_axis_order() {
        let mut c = one_axis(3);
        c.axes.push(AxisSpec::values(ParamAxis::V, vec![0.0, -0.5]));
        let d = run_sweep(&c).unwrap();
        let deltas = d.column_f64("delta").unwrap();
        let vs = d.column_f64("v").unwrap();
        assert_eq!(deltas, vec![-2.0, -2.0, 0.0, 0.0, 2.0, 2.0]);
        assert_eq!(vs, vec![0.0, -0.5, 0.0, -0.5, 0.0, -0.5]);
    }

    #[test]
    fn degenerate_axis_reproduces_ground_state() {
        let mut c = one_axis(2);
        c.axes = vec![AxisSpec::range(ParamAxis::Delta, 0.6, 0.6, 2)];
        let d = run_sweep(&c).unwrap();
        let sol = ground_state(&c.base.with(ParamAxis::Delta, 0.6)).unwrap();
        for row in &d.rows {
            assert_eq!(row[d.column_index("m_over_n").unwrap()], Cell::Float(sol.m_over_n));
            assert_eq!(row[d.column_index("energy_per_atom").unwrap()], Cell::Float(sol.energy_per_atom));
            assert_eq!(row[d.column_index("eta").unwrap()], Cell::Float(sol.eta));
            assert_eq!(row[d.column_index("phase_label").unwrap()], Cell::Text("Superradiant".into()));
        }
    }

    #[test]
    fn empty_dataset_is_header_only() {
        let d = SweepDataset::empty(vec!["delta".into(), "m_over_n".into(), "error".into()]);
        assert_eq!(d.to_csv().unwrap(), "delta,m_over_n,error\n");
    }

    #[test]
    fn csv_and_json_round_trip() {
        let mut c = one_axis(7);
        c.outputs.susceptibility = true;
        c.exact = Some(ExactOptions {
            n_atoms: vec![2],
            eps: 1e-8,
            n_max_start: 4,
            dimension_budget: 10,
        });
        let d = run_sweep(&c).unwrap();
        assert!(d.rows.iter().all(|r| !r.last().unwrap().as_str().unwrap().is_empty()));
        let back = SweepDataset::from_csv(&d.to_csv().unwrap()).unwrap();
        assert_eq!(back.columns, d.columns);
        // NaN != NaN, so compare serialized forms
        assert_eq!(back.to_csv().unwrap(), d.to_csv().unwrap());
        let j = SweepDataset::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(j.to_json().unwrap(), d.to_json().unwrap());
        assert_eq!(j.provenance, d.provenance);
    }

    #[test]
    fn single_row_round_trip_is_identity() {
        let mut c = one_axis(2);
        c.axes = vec![AxisSpec::values(ParamAxis::Delta, vec![0.3])];
        let d = run_sweep(&c).unwrap();
        assert_eq!(d.rows.len(), 1);
        let back = SweepDataset::from_csv(&d.to_csv().unwrap()).unwrap();
        assert_eq!(back.rows, d.rows);
        assert_eq!(SweepDataset::from_json(&d.to_json().unwrap()).unwrap(), d);
    }

    #[test]
    fn floats_round_trip_bitwise() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 5e-324] {
            assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert!(format_float(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(format_float(f64::NEG_INFINITY).parse::<f64>().unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn node_errors_are_recorded_in_row() {
        let mut c = one_axis(3);
        c.axes = vec![AxisSpec::values(ParamAxis::Omega, vec![1.0, -1.0])];
        let d = run_sweep(&c).unwrap();
        let err = d.column_index("error").unwrap();
        assert_eq!(d.rows[0][err], Cell::Text(String::new()));
        assert!(d.rows[1][err].as_str().unwrap().contains("nonpositive cavity frequency"));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut c = one_axis(41);
        c.base.omega_rabi = 0.3;
        c.axes.push(AxisSpec::range(ParamAxis::V, -3.0, 1.0, 9));
        let a = run_sweep_with(&c, Execution::Serial).unwrap().to_csv().unwrap();
        let b = run_sweep_with(&c, Execution::Parallel).unwrap().to_csv().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_labels_come_from_the_enumeration() {
        let c = SweepConfig {
            base: ModelParams::dimensionless(1.0, 0.0, 0.5, 0.0),
            axes: vec![
                AxisSpec::range(ParamAxis::V, -3.0, 1.0, 21),
                AxisSpec::range(ParamAxis::Delta, -3.0, 3.0, 21),
            ],
            exact: None,
            outputs: OutputSelection::default(),
        };
        let d = run_sweep(&c).unwrap();
        let i = d.column_index("phase_label").unwrap();
        let names: Vec<&str> = crate::phases::PhaseLabel::ALL.iter().map(|l| l.name()).collect();
        assert!(d.rows.iter().all(|r| names.contains(&r[i].as_str().unwrap())));
    }
}
