//! The `cavity-dicke` command-line frontend.
//!
//! [`run`] parses arguments, writes reports to the given stream (or to
//! `--out`) and returns the process exit code: 0 on success, 2 for invalid
//! configuration or parameters, 3 when the mean-field energy is flat on the
//! whole Bloch circle, 4 for I/O failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::exact::{converge_cutoff_with, CutoffOptions, DEFAULT_DIMENSION_BUDGET};
use crate::meanfield::ground_state;
use crate::model::{estimate_from_trap, linspace, omega_critical, ModelParams, ParamAxis, TrapEstimate, TrapSpec};
use crate::phases::{
    axis_path, classify, delta_critical, detect_transition, detect_transitions, mott_boundary_delta, overlays, v_critical,
    DetectorConfig, Observable, PhaseLabel, TransitionOrder, CLASSIFY_TOL,
};
use crate::sweep::{
    format_float, provenance_comment, run_sweep_with, AxisSpec, Cell, Execution, OutputSelection, Provenance, SweepConfig,
    SweepDataset,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cavity-dicke", version, about = "Extended Dicke model: ground states, critical lines and phase diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hamiltonian couplings from a trap and cavity description (JSON via --config)
    #[command(allow_negative_numbers = true)]
    Estimate(EstimateArgs),
    /// Mean-field ground state and phase label at one parameter point
    #[command(allow_negative_numbers = true)]
    Solve(PointArgs),
    /// Exact diagonalization against mean field for several atom numbers
    #[command(allow_negative_numbers = true)]
    ExactCheck(ExactCheckArgs),
    /// Analytic critical lines
    #[command(allow_negative_numbers = true)]
    Boundaries(BoundaryArgs),
    /// Locate transitions of an observable along one parameter axis
    #[command(allow_negative_numbers = true)]
    Scan(ScanArgs),
    /// Run a sweep described by a JSON config
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Energy and population imbalance versus detuning for several drives
    #[command(allow_negative_numbers = true)]
    Fig2(FigureArgs),
    /// Phase diagram in the (detuning, interaction) plane with analytic overlays
    #[command(allow_negative_numbers = true)]
    Fig3(FigureArgs),
    /// Population imbalance across the first-order line, with a jump table
    #[command(allow_negative_numbers = true)]
    Fig4(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Energies in units where the default coupling u is 1
    #[default]
    Dimensionless,
    /// Angular MHz, with u taken from the reference trap estimate
    Mhz,
}

impl Units {
    fn label(self) -> &'static str {
        match self {
            Units::Dimensionless => "",
            Units::Mhz => " MHz",
        }
    }
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (directory for figure subcommands); standard output if absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable output format; human-readable text if absent
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Model parameters given as flags or in a JSON config; all optional.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    /// Cavity frequency ω
    #[arg(long)]
    #[serde(default)]
    pub omega: Option<f64>,
    /// Collective coupling λ
    #[arg(long)]
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Coupling u = λ²/ω, an alternative to --lambda
    #[arg(long)]
    #[serde(default)]
    pub u: Option<f64>,
    /// Detuning Δ
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub delta: Option<f64>,
    /// Rabi frequency Ω
    #[arg(long = "rabi")]
    #[serde(default)]
    pub omega_rabi: Option<f64>,
    /// Interaction strength v
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub v: Option<f64>,
    /// Atom number N
    #[arg(long)]
    #[serde(default)]
    pub n_atoms: Option<u64>,
}

impl ParamOverrides {
    /// `self` with every value set in `flags` replacing it; a flag for one
    /// of λ and u drops the other from the config.
    pub fn merged(&self, flags: &ParamOverrides) -> ParamOverrides {
        let mut out = self.clone();
        if flags.lambda.is_some() || flags.u.is_some() {
            out.lambda = flags.lambda;
            out.u = flags.u;
        }
        out.omega = flags.omega.or(out.omega);
        out.delta = flags.delta.or(out.delta);
        out.omega_rabi = flags.omega_rabi.or(out.omega_rabi);
        out.v = flags.v.or(out.v);
        out.n_atoms = flags.n_atoms.or(out.n_atoms);
        out
    }

    /// Defaults: ω = 1, λ = 1, Δ = Ω = v = 0, N = 1.
    pub fn resolve(&self) -> Result<ModelParams> {
        let omega = self.omega.unwrap_or(1.0);
        let lambda = match (self.lambda, self.u) {
            (Some(_), Some(_)) => return Err(DickeError::Config("give either lambda or u, not both".into())),
            (Some(l), None) => l,
            (None, Some(u)) => {
                if u < 0.0 {
                    return Err(DickeError::NegativeCoupling);
                }
                (u * omega).sqrt()
            }
            (None, None) => 1.0,
        };
        ModelParams::new(
            omega,
            lambda,
            self.delta.unwrap_or(0.0),
            self.omega_rabi.unwrap_or(0.0),
            self.v.unwrap_or(0.0),
            self.n_atoms.unwrap_or(1),
        )
        .validate()
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Override the atom number of the trap config
    #[arg(long)]
    n_atoms: Option<u64>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    params: ParamOverrides,
    #[arg(long, value_enum, default_value = "dimensionless")]
    units: Units,
}

#[derive(Debug, Args)]
struct ExactCheckArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Comma-separated atom numbers
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    n_list: Vec<u64>,
    /// Relative energy change accepted between cutoff doublings
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 4)]
    n_max_start: usize,
    /// Largest Hilbert-space dimension to diagonalize
    #[arg(long, default_value_t = DEFAULT_DIMENSION_BUDGET)]
    budget: usize,
}

#[derive(Debug, Args)]
struct BoundaryArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long = "rabi", default_value_t = 0.0)]
    omega_rabi: f64,
    /// Also report the lobe edges and critical drive at this v
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,
    /// Rows per table
    #[arg(long, default_value_t = 9)]
    points: usize,
    #[arg(long, value_enum, default_value = "dimensionless")]
    units: Units,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value = "delta")]
    axis: ParamAxis,
    /// Path start; defaults to −2 × energy scale
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Path end; defaults to 2 × energy scale
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long, default_value = "m_over_n")]
    observable: Observable,
    /// Coarse samples before refinement
    #[arg(long, default_value_t = 201)]
    points: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Evaluate nodes on one thread
    #[arg(long)]
    serial: bool,
}

/// Optional overrides for the figure subcommands, from flags or JSON.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureOptions {
    #[arg(long, value_enum)]
    #[serde(default)]
    pub units: Option<Units>,
    #[arg(long)]
    #[serde(default)]
    pub u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(default)]
    pub v: Option<f64>,
    /// Comma-separated Rabi frequencies (fig3 uses the first)
    #[arg(long = "rabi", value_delimiter = ',')]
    #[serde(default)]
    pub rabi: Option<Vec<f64>>,
    /// Nodes along the detuning axis
    #[arg(long)]
    #[serde(default)]
    pub points: Option<usize>,
    /// Nodes along the interaction axis (fig3)
    #[arg(long)]
    #[serde(default)]
    pub v_points: Option<usize>,
}

impl FigureOptions {
    fn merged(&self, flags: &FigureOptions) -> FigureOptions {
        FigureOptions {
            units: flags.units.or(self.units),
            u: flags.u.or(self.u),
            v: flags.v.or(self.v),
            rabi: flags.rabi.clone().or_else(|| self.rabi.clone()),
            points: flags.points.or(self.points),
            v_points: flags.v_points.or(self.v_points),
        }
    }
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    options: FigureOptions,
    /// Evaluate nodes on one thread
    #[arg(long)]
    serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &DickeError) -> i32 {
    match e {
        DickeError::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first) and executes the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Estimate(a) => estimate(a, out),
        Command::Solve(a) => solve(a, out, err),
        Command::ExactCheck(a) => exact_check(a, out),
        Command::Boundaries(a) => boundaries(a, out),
        Command::Scan(a) => scan(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Fig2(a) => figure(Figure::Fig2, a, out),
        Command::Fig3(a) => figure(Figure::Fig3, a, out),
        Command::Fig4(a) => figure(Figure::Fig4, a, out),
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| DickeError::Config(format!("{}: {e}", path.display())))
}

fn emit(output: &OutputArgs, out: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn point_params(args: &PointArgs) -> Result<ModelParams> {
    let from_file: ParamOverrides = match &args.output.config {
        Some(path) => read_config(path)?,
        None => ParamOverrides::default(),
    };
    from_file.merged(&args.params).resolve()
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// A small table rendered as aligned text, CSV or JSON.
fn render_table(columns: &[&str], rows: Vec<Vec<Cell>>, format: Option<Format>) -> Result<Vec<u8>> {
    let dataset = SweepDataset {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        provenance: Provenance::current(None),
    };
    match format {
        Some(Format::Csv) => Ok(dataset.to_csv()?.into_bytes()),
        Some(Format::Json) => Ok(dataset.to_json()?.into_bytes()),
        None => Ok(text_table(&dataset).into_bytes()),
    }
}

/// Shortest round-trip form, in scientific notation for very small or
/// large magnitudes.
fn human(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e10).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn text_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) => human(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) if s.is_empty() => "-".into(),
        Cell::Text(s) => s.clone(),
    }
}

fn text_table(d: &SweepDataset) -> String {
    let cells: Vec<Vec<String>> = d.rows.iter().map(|r| r.iter().map(text_cell).collect()).collect();
    let widths: Vec<usize> = (0..d.columns.len())
        .map(|j| cells.iter().map(|r| r[j].len()).chain([d.columns[j].len()]).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    let line = |s: &mut String, items: &[String]| {
        let parts: Vec<String> = items.iter().zip(&widths).map(|(x, w)| format!("{x:>w$}")).collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(&mut s, &d.columns);
    for r in &cells {
        line(&mut s, r);
    }
    s
}

#[derive(Serialize)]
struct EstimateReport {
    trap: TrapSpec,
    estimate: TrapEstimate,
}

fn estimate(args: EstimateArgs, out: &mut dyn Write) -> Result<i32> {
    let mut spec = match &args.output.config {
        Some(path) => read_config(path)?,
        None => TrapSpec::rb87_example(),
    };
    if let Some(n) = args.n_atoms {
        spec.n_atoms = n;
    }
    let est = estimate_from_trap(&spec)?;
    let bytes = match args.output.format {
        Some(Format::Json) => to_json_bytes(&EstimateReport { trap: spec, estimate: est })?,
        Some(Format::Csv) => {
            let rows = [
                ("v", est.v),
                ("v_printed", est.v_printed),
                ("v_cyclic", est.v_cyclic),
                ("v_printed_cyclic", est.v_printed_cyclic),
                ("lambda", est.lambda),
                ("u", est.u),
                ("omega_critical", est.omega_critical),
                ("n_crit", est.n_crit),
            ]
            .into_iter()
            .map(|(k, x)| vec![Cell::Text(k.into()), Cell::Float(x)])
            .collect();
            render_table(&["quantity", "value"], rows, Some(Format::Csv))?
        }
        None => {
            let mut s = String::new();
            let _ = writeln!(s, "atoms                      N = {}", spec.n_atoms);
            let _ = writeln!(
                s,
                "oscillator lengths       d_i = {:.4e}, {:.4e}, {:.4e} m",
                est.oscillator_lengths[0], est.oscillator_lengths[1], est.oscillator_lengths[2]
            );
            let _ = writeln!(s, "interaction (integrals)    v = {:.6} MHz  ({:.6} MHz cyclic)", est.v, est.v_cyclic);
            let _ = writeln!(s, "interaction (closed form)  v = {:.6} MHz  ({:.6} MHz cyclic)", est.v_printed, est.v_printed_cyclic);
            let _ = writeln!(s, "collective coupling   lambda = {:.6e} MHz", est.lambda);
            let _ = writeln!(s, "photon-mediated coupling   u = {:.6} MHz", est.u);
            let _ = writeln!(s, "critical drive   |u + v|     = {:.6} MHz", est.omega_critical);
            let _ = writeln!(s, "critical photon number n_crit = {:.6}", est.n_crit);
            s.into_bytes()
        }
    };
    emit(&args.output, out, &bytes)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SolveReport {
    params: ModelParams,
    u: f64,
    phase: PhaseLabel,
    energy_per_atom: f64,
    m_over_n: f64,
    photon_density: f64,
    eta: f64,
    alpha: f64,
    s_x: f64,
    s_z: f64,
    residual: f64,
    degenerate: bool,
    flat: bool,
    local_minima: usize,
}

fn solve(args: PointArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let params = point_params(&args)?;
    let sol = ground_state(&params)?;
    let phase = classify(&params, &sol, CLASSIFY_TOL);
    let report = SolveReport {
        params,
        u: params.u(),
        phase,
        energy_per_atom: sol.energy_per_atom,
        m_over_n: sol.m_over_n,
        photon_density: sol.photon_density,
        eta: sol.eta,
        alpha: sol.alpha,
        s_x: sol.point.s_x,
        s_z: sol.point.s_z,
        residual: sol.residual,
        degenerate: sol.degenerate,
        flat: sol.flat,
        local_minima: sol.local_minima,
    };
    let unit = args.units.label();
    let bytes = match args.output.format {
        Some(Format::Json) => to_json_bytes(&report)?,
        Some(Format::Csv) => {
            let columns = [
                "omega", "lambda", "delta", "omega_rabi", "v", "u", "phase_label", "energy_per_atom", "m_over_n",
                "photon_density", "eta", "alpha", "s_x", "s_z", "residual", "degenerate", "flat", "local_minima",
            ];
            let f = Cell::Float;
            let row = vec![
                f(params.omega),
                f(params.lambda),
                f(params.delta),
                f(params.omega_rabi),
                f(params.v),
                f(report.u),
                Cell::Text(phase.name().into()),
                f(sol.energy_per_atom),
                f(sol.m_over_n),
                f(sol.photon_density),
                f(sol.eta),
                f(sol.alpha),
                f(sol.point.s_x),
                f(sol.point.s_z),
                f(sol.residual),
                Cell::Bool(sol.degenerate),
                Cell::Bool(sol.flat),
                Cell::Int(sol.local_minima as i64),
            ];
            render_table(&columns, vec![row], Some(Format::Csv))?
        }
        None => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "omega = {}, lambda = {}, delta = {}, rabi = {}, v = {}, u = {}{unit}",
                params.omega, params.lambda, params.delta, params.omega_rabi, params.v, report.u
            );
            let _ = writeln!(s, "phase            {phase}");
            let _ = writeln!(s, "energy per atom  {}{unit}", human(sol.energy_per_atom));
            let _ = writeln!(s, "m/N              {}", human(sol.m_over_n));
            let _ = writeln!(s, "photon density   {}", human(sol.photon_density));
            let _ = writeln!(s, "eta              {}", human(sol.eta));
            let _ = writeln!(s, "alpha            {}", human(sol.alpha));
            let _ = writeln!(s, "(s_x, s_z)       ({}, {})", human(sol.point.s_x), human(sol.point.s_z));
            let _ = writeln!(s, "residual         {:e}", sol.residual);
            let _ = writeln!(s, "local minima     {}{}", sol.local_minima, if sol.degenerate { " (tied)" } else { "" });
            s.into_bytes()
        }
    };
    emit(&args.output, out, &bytes)?;
    if sol.flat {
        let _ = writeln!(
            err,
            "note: the energy is the same everywhere on the Bloch circle; the reported point is a convention"
        );
        return Ok(EXIT_DEGENERATE);
    }
    Ok(EXIT_OK)
}

/// One row of the exact-versus-mean-field comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCheckRow {
    pub n_atoms: u64,
    pub exact_energy_per_atom: f64,
    pub meanfield_energy_per_atom: f64,
    /// Mean field minus exact.
    pub difference: f64,
    pub photon_density: f64,
    pub m_over_n: f64,
    pub parity: f64,
    pub n_max: usize,
    pub converged: bool,
    pub bound_holds: bool,
    pub error: String,
}

/// Exact ground states for each atom number next to the mean-field energy.
pub fn exact_check_rows(params: &ModelParams, n_list: &[u64], cutoff: &CutoffOptions) -> Result<Vec<ExactCheckRow>> {
    let mf = ground_state(params)?;
    let slack = 1e-9 * params.energy_scale();
    Ok(n_list
        .iter()
        .map(|&n| {
            let p = ModelParams { n_atoms: n, ..*params };
            match converge_cutoff_with(&p, cutoff) {
                Ok(ex) => ExactCheckRow {
                    n_atoms: n,
                    exact_energy_per_atom: ex.energy_per_atom,
                    meanfield_energy_per_atom: mf.energy_per_atom,
                    difference: mf.energy_per_atom - ex.energy_per_atom,
                    photon_density: ex.photon_density(),
                    m_over_n: ex.m_over_n(),
                    parity: ex.parity,
                    n_max: ex.n_max_used,
                    converged: ex.converged,
                    bound_holds: mf.energy_per_atom >= ex.energy_per_atom - slack,
                    error: if ex.converged { String::new() } else { "cutoff not converged".into() },
                },
                Err(e) => ExactCheckRow {
                    n_atoms: n,
                    exact_energy_per_atom: f64::NAN,
                    meanfield_energy_per_atom: mf.energy_per_atom,
                    difference: f64::NAN,
                    photon_density: f64::NAN,
                    m_over_n: f64::NAN,
                    parity: f64::NAN,
                    n_max: 0,
                    converged: false,
                    bound_holds: false,
                    error: e.to_string(),
                },
            }
        })
        .collect())
}

#[derive(Serialize)]
struct ExactCheckReport<'a> {
    params: ModelParams,
    rows: &'a [ExactCheckRow],
    bound_holds: bool,
    difference_decreasing: bool,
}

fn exact_check(args: ExactCheckArgs, out: &mut dyn Write) -> Result<i32> {
    let params = point_params(&args.point)?;
    if args.n_list.is_empty() || args.n_list.contains(&0) {
        return Err(DickeError::Config("--n-list needs positive atom numbers".into()));
    }
    let cutoff = CutoffOptions {
        eps: args.eps,
        n_max_start: args.n_max_start,
        dimension_budget: args.budget,
    };
    let rows = exact_check_rows(&params, &args.n_list, &cutoff)?;
    let bound_holds = rows.iter().all(|r| r.bound_holds);
    let decreasing = rows.windows(2).all(|w| w[1].difference.abs() < w[0].difference.abs());
    let columns = [
        "n_atoms",
        "exact_energy_per_atom",
        "meanfield_energy_per_atom",
        "difference",
        "photon_density",
        "m_over_n",
        "parity",
        "n_max",
        "converged",
        "bound_holds",
        "error",
    ];
    let table_rows = || {
        rows.iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n_atoms as i64),
                    Cell::Float(r.exact_energy_per_atom),
                    Cell::Float(r.meanfield_energy_per_atom),
                    Cell::Float(r.difference),
                    Cell::Float(r.photon_density),
                    Cell::Float(r.m_over_n),
                    Cell::Float(r.parity),
                    Cell::Int(r.n_max as i64),
                    Cell::Bool(r.converged),
                    Cell::Bool(r.bound_holds),
                    Cell::Text(r.error.clone()),
                ]
            })
            .collect()
    };
    let bytes = match args.point.output.format {
        Some(Format::Json) => to_json_bytes(&ExactCheckReport {
            params,
            rows: &rows,
            bound_holds,
            difference_decreasing: decreasing,
        })?,
        Some(Format::Csv) => render_table(&columns, table_rows(), Some(Format::Csv))?,
        None => {
            let mut bytes = render_table(&columns, table_rows(), None)?;
            let mut s = String::new();
            let drift: Vec<String> = rows
                .windows(2)
                .map(|w| format!("N={}→{}: {:.3}", w[0].n_atoms, w[1].n_atoms, w[1].difference / w[0].difference))
                .collect();
            if !drift.is_empty() {
                let _ = writeln!(s, "finite-size drift (ratio of successive differences): {}", drift.join(", "));
            }
            let _ = writeln!(s, "variational bound: {}", if bound_holds { "holds" } else { "VIOLATED" });
            let _ = writeln!(s, "|difference| strictly decreasing: {decreasing}");
            bytes.extend(s.into_bytes());
            bytes
        }
    };
    emit(&args.point.output, out, &bytes)?;
    Ok(EXIT_OK)
}

/// Reference-trap coupling used when `--units mhz` picks the defaults.
pub fn mhz_reference() -> Result<(f64, f64)> {
    let spec = TrapSpec::rb87_example();
    let est = estimate_from_trap(&spec)?;
    Ok((spec.cavity_freq, est.u))
}

fn default_u(units: Units, u: Option<f64>) -> Result<f64> {
    match (u, units) {
        (Some(u), _) => Ok(u),
        (None, Units::Dimensionless) => Ok(1.0),
        (None, Units::Mhz) => Ok(mhz_reference()?.1),
    }
}

#[derive(Serialize)]
struct LobeRow {
    v: f64,
    delta_minus: f64,
    delta_plus: f64,
    omega_critical: f64,
}

#[derive(Serialize)]
struct BlueRow {
    delta: f64,
    v_critical: f64,
}

#[derive(Serialize)]
struct AtV {
    v: f64,
    delta_critical: Option<(f64, f64)>,
    omega_critical: f64,
    mott_half_width: Option<f64>,
}

#[derive(Serialize)]
struct BoundaryReport {
    u: f64,
    omega_rabi: f64,
    red_line_v: f64,
    v_critical_at_zero_detuning: f64,
    at_v: Option<AtV>,
    lobe: Vec<LobeRow>,
    blue: Vec<BlueRow>,
}

fn boundaries(args: BoundaryArgs, out: &mut dyn Write) -> Result<i32> {
    let u = default_u(args.units, args.u)?;
    let rabi = args.omega_rabi;
    if !(u >= 0.0) || !(rabi >= 0.0) {
        return Err(DickeError::Config("u and the Rabi frequency must be nonnegative".into()));
    }
    if args.points < 2 {
        return Err(DickeError::Config("--points must be at least 2".into()));
    }
    let at_v = args.v.map(|v| AtV {
        v,
        delta_critical: delta_critical(u, v).ok(),
        omega_critical: omega_critical(u, v),
        mott_half_width: mott_boundary_delta(u, v, rabi),
    });
    let lobe = linspace(-u, u, args.points)
        .into_iter()
        .map(|v| LobeRow {
            v,
            delta_minus: -(u + v),
            delta_plus: u + v,
            omega_critical: omega_critical(u, v),
        })
        .collect();
    let blue = linspace(-2.0 * u, 2.0 * u, args.points)
        .into_iter()
        .map(|delta| BlueRow {
            delta,
            v_critical: v_critical(u, delta, rabi),
        })
        .collect();
    let report = BoundaryReport {
        u,
        omega_rabi: rabi,
        red_line_v: -u,
        v_critical_at_zero_detuning: v_critical(u, 0.0, rabi),
        at_v,
        lobe,
        blue,
    };
    let unit = args.units.label();
    let bytes = match args.output.format {
        Some(Format::Json) => to_json_bytes(&report)?,
        Some(Format::Csv) => {
            let span = 2.0 * u.max(rabi).max(f64::MIN_POSITIVE);
            overlay_csv(&overlays(u, rabi, (-span, span), (-3.0 * span, span)))?
        }
        None => {
            let mut s = String::new();
            let _ = writeln!(s, "u = {u}{unit}, rabi = {rabi}{unit}");
            let _ = writeln!(s, "red line:            v = -u = {}{unit}", report.red_line_v);
            let _ = writeln!(s, "lobe edges:          delta_c = ±(u + v) for v ≥ -u");
            let _ = writeln!(s, "blue line:           v_c(delta) = -u - [rabi^(2/3) + |delta|^(2/3)]^(3/2)");
            let _ = writeln!(s, "v_c(delta = 0)     = {}{unit}", report.v_critical_at_zero_detuning);
            if let Some(a) = &report.at_v {
                match a.delta_critical {
                    Some((lo, hi)) => {
                        let _ = writeln!(s, "at v = {}: delta_c = {lo}, {hi}{unit}", a.v);
                    }
                    None => {
                        let _ = writeln!(s, "at v = {}: no superradiant lobe (u + v < 0)", a.v);
                    }
                }
                let _ = writeln!(s, "at v = {}: critical drive |u + v| = {}{unit}", a.v, a.omega_critical);
                if let Some(w) = a.mott_half_width {
                    let _ = writeln!(s, "at v = {}: two-minimum region |delta| < {w}{unit}", a.v);
                }
            }
            s.push('\n');
            let lobe_rows = report
                .lobe
                .iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.v),
                        Cell::Float(r.delta_minus),
                        Cell::Float(r.delta_plus),
                        Cell::Float(r.omega_critical),
                    ]
                })
                .collect();
            s.push_str(&String::from_utf8(render_table(
                &["v", "delta_c_minus", "delta_c_plus", "omega_c"],
                lobe_rows,
                None,
            )?)
            .expect("UTF-8"));
            s.push('\n');
            let blue_rows = report
                .blue
                .iter()
                .map(|r| vec![Cell::Float(r.delta), Cell::Float(r.v_critical)])
                .collect();
            s.push_str(&String::from_utf8(render_table(&["delta", "v_c"], blue_rows, None)?).expect("UTF-8"));
            s.into_bytes()
        }
    };
    emit(&args.output, out, &bytes)?;
    Ok(EXIT_OK)
}

fn scan(args: ScanArgs, out: &mut dyn Write) -> Result<i32> {
    let params = point_params(&args.point)?;
    if args.points < 9 {
        return Err(DickeError::Config("--points must be at least 9".into()));
    }
    let scale = params.energy_scale();
    let range = (args.from.unwrap_or(-2.0 * scale), args.to.unwrap_or(2.0 * scale));
    if !(range.0 < range.1) {
        return Err(DickeError::Config("scan range must satisfy from < to".into()));
    }
    let cfg = DetectorConfig {
        coarse_points: args.points,
        ..DetectorConfig::default()
    };
    let records = detect_transitions(&axis_path(params, args.axis), range, args.observable, &cfg)?;
    let rows = records
        .iter()
        .map(|r| {
            vec![
                Cell::Float(r.location),
                Cell::Text(r.order.name().into()),
                Cell::Text(r.observable.name().into()),
                Cell::Float(r.jump),
                Cell::Float(r.kink),
            ]
        })
        .collect();
    let columns = ["location", "order", "observable", "jump", "kink"];
    let bytes = match args.point.output.format {
        Some(Format::Json) => to_json_bytes(&records)?,
        other => {
            let mut b = render_table(&columns, rows, other)?;
            if other.is_none() && records.is_empty() {
                b.extend_from_slice(format!("no transition of {} along {} in [{}, {}]\n", args.observable, args.axis, range.0, range.1).as_bytes());
            }
            b
        }
    };
    emit(&args.point.output, out, &bytes)?;
    Ok(EXIT_OK)
}

fn execution(serial: bool) -> Execution {
    if serial {
        Execution::Serial
    } else {
        Execution::Parallel
    }
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let path = args
        .output
        .config
        .as_ref()
        .ok_or_else(|| DickeError::Config("sweep needs --config <path>".into()))?;
    let config: SweepConfig = read_config(path)?;
    let dataset = run_sweep_with(&config, execution(args.serial))?;
    let bytes = match args.output.format {
        Some(Format::Json) => dataset.to_json()?,
        _ => dataset.to_csv()?,
    };
    emit(&args.output, out, bytes.as_bytes())?;
    Ok(EXIT_OK)
}

fn figure(fig: Figure, args: FigureArgs, out: &mut dyn Write) -> Result<i32> {
    let from_file: FigureOptions = match &args.output.config {
        Some(path) => read_config(path)?,
        None => FigureOptions::default(),
    };
    let options = from_file.merged(&args.options);
    let format = args.output.format.unwrap_or(Format::Csv);
    let files = figure_files(fig, &options, format, execution(args.serial))?;
    let dir = args.output.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}

struct Resolved {
    units: Units,
    u: f64,
    base: ModelParams,
}

fn resolve_base(options: &FigureOptions) -> Result<Resolved> {
    let units = options.units.unwrap_or_default();
    let u = default_u(units, options.u)?;
    if !(u > 0.0) {
        return Err(DickeError::Config("figures need u > 0".into()));
    }
    let omega = match units {
        Units::Dimensionless => 1.0,
        Units::Mhz => mhz_reference()?.0,
    };
    let base = ModelParams::new(omega, (u * omega).sqrt(), 0.0, 0.0, 0.0, 1).validate()?;
    Ok(Resolved { units, u, base })
}

fn count(n: Option<usize>, default: usize) -> Result<usize> {
    let n = n.unwrap_or(default);
    if n < 2 {
        return Err(DickeError::Config("figure resolution must be at least 2".into()));
    }
    Ok(n)
}

fn dataset_bytes(d: &SweepDataset, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => d.to_csv()?.into_bytes(),
        Format::Json => d.to_json()?.into_bytes(),
    })
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn overlay_csv(lines: &[crate::phases::Overlay]) -> Result<Vec<u8>> {
    let rows = lines
        .iter()
        .flat_map(|o| {
            o.points
                .iter()
                .map(|&(d, v)| vec![Cell::Text(o.line_id.clone()), Cell::Float(d), Cell::Float(v)])
        })
        .collect();
    render_table(&["line_id", "delta", "v"], rows, Some(Format::Csv))
}

fn gnuplot_list(values: &[f64]) -> String {
    values.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(" ")
}

fn gnuplot_header(fig: Figure, config: &SweepConfig) -> String {
    let mut s = format!("# {} plot script for cavity-dicke output\n", fig.name());
    s.push_str(&provenance_comment(&Provenance::current(Some(config.clone()))));
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    s
}

/// Dataset files for one figure as (file name, contents), in write order.
///
/// Contents depend only on the options and format, never on `execution`.
pub fn figure_files(fig: Figure, options: &FigureOptions, format: Format, execution: Execution) -> Result<Vec<(String, Vec<u8>)>> {
    let r = resolve_base(options)?;
    let u = r.u;
    let unit = r.units.label();
    let mut files = Vec::new();
    match fig {
        Figure::Fig2 => {
            let v = options.v.unwrap_or(0.0);
            let rabi = options.rabi.clone().unwrap_or_else(|| vec![0.0, 0.02 * u, 0.05 * u]);
            let span = 2.0 * u.max((u + v).abs());
            let config = SweepConfig {
                base: ModelParams { v, ..r.base },
                axes: vec![
                    AxisSpec::values(ParamAxis::OmegaRabi, rabi.clone()),
                    AxisSpec::range(ParamAxis::Delta, -span, span, count(options.points, 401)?),
                ],
                exact: None,
                outputs: OutputSelection::default(),
            };
            let data = run_sweep_with(&config, execution)?;
            files.push((format!("fig2.{}", ext(format)), dataset_bytes(&data, format)?));
            if format == Format::Csv {
                let mut gp = gnuplot_header(fig, &config);
                let _ = write!(
                    gp,
                    "set multiplot layout 1,2\nset xlabel 'Delta{unit}'\nset ylabel 'E_0/N{unit}'\n\
                     plot for [r in \"{list}\"] 'fig2.csv' using \"delta\":(column(\"omega_rabi\") == r+0 ? column(\"energy_per_atom\") : NaN) with lines title sprintf(\"Omega = %s\", r)\n\
                     set ylabel 'm/N'\n\
                     plot for [r in \"{list}\"] 'fig2.csv' using \"delta\":(column(\"omega_rabi\") == r+0 ? column(\"m_over_n\") : NaN) with lines title sprintf(\"Omega = %s\", r)\n\
                     unset multiplot\n",
                    list = gnuplot_list(&rabi)
                );
                files.push(("fig2.gp".into(), gp.into_bytes()));
            }
        }
        Figure::Fig3 => {
            let rabi = options.rabi.as_ref().and_then(|l| l.first().copied()).unwrap_or(0.5 * u);
            let delta_range = (-3.0 * u, 3.0 * u);
            let v_range = (-3.0 * u, u);
            let config = SweepConfig {
                base: ModelParams { omega_rabi: rabi, ..r.base },
                axes: vec![
                    AxisSpec::range(ParamAxis::V, v_range.0, v_range.1, count(options.v_points, 201)?),
                    AxisSpec::range(ParamAxis::Delta, delta_range.0, delta_range.1, count(options.points, 201)?),
                ],
                exact: None,
                outputs: OutputSelection {
                    columns: Some(
                        ["m_over_n", "photon_density", "phase_label", "local_minima"].map(String::from).to_vec(),
                    ),
                    susceptibility: true,
                },
            };
            let data = run_sweep_with(&config, execution)?;
            files.push((format!("fig3.{}", ext(format)), dataset_bytes(&data, format)?));
            let lines = overlays(u, rabi, delta_range, v_range);
            match format {
                Format::Csv => files.push(("fig3_overlays.csv".into(), overlay_csv(&lines)?)),
                Format::Json => files.push(("fig3_overlays.json".into(), to_json_bytes(&lines)?)),
            }
            if format == Format::Csv {
                let mut gp = gnuplot_header(fig, &config);
                let ids: Vec<&str> = lines.iter().map(|o| o.line_id.as_str()).collect();
                let _ = write!(
                    gp,
                    "code(s) = s eq \"Normal\" ? 0 : s eq \"Superradiant\" ? 1 : s eq \"Mott\" ? 2 : s eq \"Superfluid\" ? 3 : 4\n\
                     set xlabel 'Delta{unit}'\nset ylabel 'v{unit}'\nset cbrange [0:4]\n\
                     set cbtics ('Normal' 0, 'Superradiant' 1, 'Mott' 2, 'Superfluid' 3, 'Degenerate' 4)\n\
                     plot 'fig3.csv' using \"delta\":\"v\":(code(strcol(\"phase_label\"))) with image notitle, \\\n\
                     \x20    for [id in \"{}\"] 'fig3_overlays.csv' using \"delta\":(strcol(\"line_id\") eq id ? column(\"v\") : NaN) with lines lw 2 title id\n",
                    ids.join(" ")
                );
                files.push(("fig3.gp".into(), gp.into_bytes()));
            }
        }
        Figure::Fig4 => {
            let v = options.v.unwrap_or(-2.0 * u);
            let rabi = options
                .rabi
                .clone()
                .unwrap_or_else(|| [0.25, 0.5, 0.75, 1.0, 1.5].iter().map(|x| x * u).collect());
            let span = u.max((u + v).abs().min(3.0 * u));
            let config = SweepConfig {
                base: ModelParams { v, ..r.base },
                axes: vec![
                    AxisSpec::values(ParamAxis::OmegaRabi, rabi.clone()),
                    AxisSpec::range(ParamAxis::Delta, -span, span, count(options.points, 401)?),
                ],
                exact: None,
                outputs: OutputSelection::default(),
            };
            let data = run_sweep_with(&config, execution)?;
            files.push((format!("fig4.{}", ext(format)), dataset_bytes(&data, format)?));
            let jumps = jump_table(&ModelParams { v, ..r.base }, &rabi, (-span, span))?;
            files.push((format!("fig4_jumps.{}", ext(format)), dataset_bytes(&jumps, format)?));
            if format == Format::Csv {
                let mut gp = gnuplot_header(fig, &config);
                let _ = write!(
                    gp,
                    "set xlabel 'Delta{unit}'\nset ylabel 'm/N'\n\
                     plot for [r in \"{list}\"] 'fig4.csv' using \"delta\":(column(\"omega_rabi\") == r+0 ? column(\"m_over_n\") : NaN) with lines title sprintf(\"Omega = %s\", r)\n",
                    list = gnuplot_list(&rabi)
                );
                files.push(("fig4.gp".into(), gp.into_bytes()));
            }
        }
    }
    Ok(files)
}

/// 2√(1 − Ω²/(u+v)²) below the critical drive, zero above it.
pub fn predicted_jump(u: f64, v: f64, omega_rabi: f64) -> f64 {
    let uv = (u + v).abs();
    if u + v >= 0.0 || omega_rabi >= uv {
        0.0
    } else {
        2.0 * (1.0 - (omega_rabi / uv).powi(2)).sqrt()
    }
}

/// Measured and predicted m/N jumps along Δ for each drive.
pub fn jump_table(base: &ModelParams, rabi: &[f64], range: (f64, f64)) -> Result<SweepDataset> {
    let u = base.u();
    let mut rows = Vec::with_capacity(rabi.len());
    for &om in rabi {
        let p = ModelParams { omega_rabi: om, ..*base };
        let rec = detect_transition(&axis_path(p, ParamAxis::Delta), range, Observable::MOverN, &DetectorConfig::default())?;
        let (location, jump) = if rec.order == TransitionOrder::None {
            (f64::NAN, 0.0)
        } else {
            (rec.location, rec.jump)
        };
        rows.push(vec![
            Cell::Float(om),
            Cell::Float(predicted_jump(u, base.v, om)),
            Cell::Float(jump),
            Cell::Float(location),
            Cell::Text(rec.order.name().into()),
            Cell::Float(rec.kink),
        ]);
    }
    Ok(SweepDataset {
        columns: ["omega_rabi", "predicted_jump", "measured_jump", "location", "order", "kink"]
            .map(String::from)
            .to_vec(),
        rows,
        provenance: Provenance::current(None),
    })
}
