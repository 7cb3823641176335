//! Batch front end: run documents, result files and the verbs behind the
//! `loqc-opt` binary.
//!
//! Exit codes: 0 on success, 1 when a sweep finds no perfect-fidelity
//! solution, 2 on any input error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::gates::{builtin, load_gate, GateDocument, TargetGate, BUILTIN_GATES};
use crate::optimize::{manifold_dimension_at, sweep, verify, OptimizeConfig, Sweep, VerifyReport};
use crate::param::Chart;
use crate::permanent::CMatrix;
use crate::transfer::ModeConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = "loqc-opt";
pub const RESULTS_CSV: &str = "sweep.csv";
pub const BEST_MATRIX: &str = "best.json";

/// Composite Toffoli from two optimal CS gates and a 1/2 step.
pub const TOFFOLI_BASELINE: f64 = (2.0 / 27.0) * (2.0 / 27.0) / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    NoSolution = 1,
    InputError = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A built-in gate name or an inline definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Name(String),
    Inline(GateDocument),
}

impl GateSpec {
    pub fn resolve(&self) -> Result<TargetGate> {
        match self {
            GateSpec::Name(n) => {
                builtin(n).ok_or_else(|| Error::Gate(format!("unknown gate '{n}' (see gates-list)")))
            }
            GateSpec::Inline(doc) => load_gate(doc),
        }
    }
}

fn default_chart() -> Chart {
    Chart::Unitary
}
fn default_restarts() -> usize {
    1
}
fn default_tol_f() -> f64 {
    1e-9
}
fn default_tol_g() -> f64 {
    1e-8
}

/// Everything one sweep needs. Mode indices in `mask` are 1-based.
///
/// `ancillas` counts ancilla modes; without `ancilla_pattern` each one
/// carries a single photon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub gate: GateSpec,
    #[serde(default)]
    pub ancillas: Option<usize>,
    #[serde(default)]
    pub ancilla_pattern: Option<Vec<u8>>,
    #[serde(default)]
    pub vacuum: usize,
    #[serde(default)]
    pub measure_pattern: Option<Vec<u8>>,
    #[serde(default = "default_chart")]
    pub chart: Chart,
    #[serde(default)]
    pub mask: Vec<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol_f")]
    pub tol_f: f64,
    #[serde(default = "default_tol_g")]
    pub tol_g: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunDocument {
    pub fn for_gate(name: &str) -> Self {
        RunDocument {
            gate: GateSpec::Name(name.to_string()),
            ancillas: None,
            ancilla_pattern: None,
            vacuum: 0,
            measure_pattern: None,
            chart: Chart::Unitary,
            mask: vec![],
            restarts: 1,
            seed: 0,
            tol_f: default_tol_f(),
            tol_g: default_tol_g(),
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn mode_config(&self, gate: &TargetGate) -> Result<ModeConfig> {
        let pattern = match (&self.ancilla_pattern, self.ancillas) {
            (Some(p), Some(n)) if p.len() != n => {
                return Err(Error::Config(format!(
                    "ancilla pattern has {} entries but ancillas = {n}",
                    p.len()
                )))
            }
            (Some(p), _) => p.clone(),
            (None, n) => vec![1; n.unwrap_or(0)],
        };
        ModeConfig::new(
            gate.n_comp(),
            FockState::new(pattern),
            self.vacuum,
            self.measure_pattern.clone().map(FockState::new),
        )
    }

    pub fn mask_modes(&self) -> Result<std::collections::BTreeSet<usize>> {
        self.mask
            .iter()
            .map(|&m| {
                m.checked_sub(1).ok_or_else(|| Error::Config("mask modes are numbered from 1".into()))
            })
            .collect()
    }

    /// Validate and build the optimizer configuration.
    pub fn resolve(&self) -> Result<OptimizeConfig> {
        let gate = self.gate.resolve()?;
        let cfg = self.mode_config(&gate)?;
        let mut oc = OptimizeConfig::new(gate, cfg, self.chart)
            .with_mask(self.mask_modes()?)
            .with_restarts(self.restarts)
            .with_seed(self.seed);
        oc.tol_fidelity = self.tol_f;
        oc.tol_gradient = self.tol_g;
        oc.validate()?;
        Ok(oc)
    }
}

fn matrix_to_rows(u: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..u.nrows()).map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect()).collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("matrix must be square and non-empty".into()));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix file holds a non-finite entry".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Interferometer matrix with the run that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub tool: String,
    pub version: String,
    pub gate: GateDocument,
    pub config: ModeConfig,
    pub chart: Chart,
    /// 1-based frozen modes.
    #[serde(default)]
    pub mask: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub restart_id: usize,
    pub fidelity: f64,
    pub success: f64,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixDocument {
    pub fn new(oc: &OptimizeConfig, u: &CMatrix, restart_id: usize, fidelity: f64, success: f64) -> Self {
        MatrixDocument {
            tool: TOOL.into(),
            version: VERSION.into(),
            gate: oc.gate.to_document(),
            config: oc.cfg.clone(),
            chart: oc.chart,
            mask: oc.mask.iter().map(|m| m + 1).collect(),
            seed: oc.seed,
            restart_id,
            fidelity,
            success,
            matrix: matrix_to_rows(u),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn matrix(&self) -> Result<CMatrix> {
        rows_to_matrix(&self.matrix)
    }

    /// Optimizer configuration recorded alongside the matrix.
    pub fn optimize_config(&self) -> Result<OptimizeConfig> {
        let gate = load_gate(&self.gate)?;
        self.config.validate()?;
        let mut mask = std::collections::BTreeSet::new();
        for &m in &self.mask {
            mask.insert(m.checked_sub(1).ok_or_else(|| Error::Config("mask modes are numbered from 1".into()))?);
        }
        let oc = OptimizeConfig::new(gate, self.config.clone(), self.chart).with_mask(mask).with_seed(self.seed);
        oc.validate()?;
        Ok(oc)
    }
}

/// Results table, one row per restart in the sweep's ascending order.
pub fn results_csv(sw: &Sweep) -> String {
    let mut s = String::from("restart_id,fidelity,success,on_manifold,iterations\n");
    for r in &sw.runs {
        writeln!(s, "{},{},{},{},{}", r.restart_id, r.fidelity, r.success, r.on_manifold, r.iterations).unwrap();
    }
    s
}

pub struct OptimizeOutcome {
    pub status: ExitStatus,
    pub sweep: Sweep,
    pub csv: PathBuf,
    pub best: Option<PathBuf>,
}

/// Run the sweep described by `doc` and write the results table and, if a
/// solution was found, the best matrix.
pub fn cmd_optimize(doc: &RunDocument) -> Result<OptimizeOutcome> {
    let oc = doc.resolve()?;
    let dir = doc.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let sw = sweep(&oc)?;
    let csv = dir.join(RESULTS_CSV);
    fs::write(&csv, results_csv(&sw))?;
    let best = match sw.best() {
        Some(r) => {
            let path = dir.join(BEST_MATRIX);
            let md = MatrixDocument::new(&oc, &r.final_u, r.restart_id, r.fidelity, r.success);
            fs::write(&path, serde_json::to_string_pretty(&md)?)?;
            Some(path)
        }
        None => None,
    };
    let status = if best.is_some() { ExitStatus::Success } else { ExitStatus::NoSolution };
    Ok(OptimizeOutcome { status, sweep: sw, csv, best })
}

pub fn format_optimize(o: &OptimizeOutcome) -> String {
    let mut s = String::new();
    let sw = &o.sweep;
    writeln!(s, "restarts: {}, on manifold: {}", sw.runs.len(), sw.on_manifold_count()).unwrap();
    for p in sw.plateaus.iter().rev() {
        writeln!(s, "  plateau S={:.7} (x{})", p.success, p.count).unwrap();
    }
    match sw.best() {
        Some(r) => writeln!(s, "best: restart {} F={:.12} S={:.7}", r.restart_id, r.fidelity, r.success).unwrap(),
        None => writeln!(s, "no run reached perfect fidelity").unwrap(),
    }
    writeln!(s, "wrote {}", o.csv.display()).unwrap();
    if let Some(b) = &o.best {
        writeln!(s, "wrote {}", b.display()).unwrap();
    }
    s
}

pub struct VerifyOutcome {
    pub report: VerifyReport,
    pub manifold: Option<crate::optimize::ManifoldProbe>,
}

/// Check a stored matrix. `oc` overrides the configuration recorded in the
/// file.
pub fn cmd_verify(md: &MatrixDocument, oc: Option<OptimizeConfig>, tol_f: f64, manifold: bool) -> Result<VerifyOutcome> {
    let oc = match oc {
        Some(oc) => oc,
        None => md.optimize_config()?,
    };
    let u = md.matrix()?;
    let report = verify(&u, &oc.gate, &oc.cfg, tol_f)?;
    let manifold = if manifold && report.pass {
        let scaled = match oc.chart {
            Chart::General => {
                let s = crate::param::spectral_norm(&u);
                if s > 0.0 { u.map(|z| z / s) } else { u.clone() }
            }
            Chart::Unitary => u.clone(),
        };
        Some(manifold_dimension_at(&scaled, &oc)?)
    } else {
        None
    };
    Ok(VerifyOutcome { report, manifold })
}

pub fn format_verify(v: &VerifyOutcome) -> String {
    let r = &v.report;
    let mut s = String::new();
    writeln!(s, "F={:.9}, S={:.6}, {}", r.fidelity, r.success, if r.pass { "PASS" } else { "FAIL" }).unwrap();
    writeln!(s, "scaled S={:.6}", r.scaled_success).unwrap();
    writeln!(s, "success bounds [{:.6}, {:.6}]", r.bounds.0, r.bounds.1).unwrap();
    writeln!(s, "input-state variance {:.3e}", r.input_variance).unwrap();
    if let Some(m) = &v.manifold {
        writeln!(s, "manifold dimension {} (positive eigenvalues: {})", m.dimension, m.positive).unwrap();
    }
    s
}

pub fn baseline_ratio(success: f64) -> f64 {
    success / TOFFOLI_BASELINE
}

pub fn format_baseline(success: Option<f64>) -> String {
    let mut s = format!("baseline S = (2/27)^2 / 2 = {:.6}\n", TOFFOLI_BASELINE);
    if let Some(v) = success {
        writeln!(s, "S = {v:.6}, ratio {:.3}", baseline_ratio(v)).unwrap();
    }
    s
}

pub fn format_gates() -> String {
    BUILTIN_GATES.iter().map(|(n, d)| format!("{n:8} {d}\n")).collect()
}

#[derive(Debug, Parser)]
#[command(name = "loqc-opt", version, about = "Optimise measurement-assisted linear-optical gates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-restart two-stage optimisation.
    Optimize(RunArgs),
    /// Fidelity and success of a stored matrix.
    Verify {
        matrix: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Also report the perfect-fidelity manifold dimension.
        #[arg(long)]
        manifold: bool,
    },
    /// Composite Toffoli baseline and the ratio of a given success to it.
    BaselineToffoli {
        #[arg(long)]
        success: Option<f64>,
        /// Take the success from a stored matrix.
        #[arg(long, conflicts_with = "success")]
        matrix: Option<PathBuf>,
    },
    /// Built-in target gates.
    GatesList,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Run document (JSON); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in gate name or a gate document path.
    #[arg(long)]
    pub gate: Option<String>,
    #[arg(long)]
    pub ancillas: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ancilla_pattern: Option<Vec<u8>>,
    #[arg(long)]
    pub vacuum: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub measure_pattern: Option<Vec<u8>>,
    #[arg(long)]
    pub chart: Option<Chart>,
    /// Frozen modes, 1-based, e.g. 2,4,6.
    #[arg(long, value_delimiter = ',')]
    pub mask: Option<Vec<usize>>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol_f: Option<f64>,
    #[arg(long)]
    pub tol_g: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn touches_device(&self) -> bool {
        self.config.is_some()
            || self.gate.is_some()
            || self.ancillas.is_some()
            || self.ancilla_pattern.is_some()
            || self.vacuum.is_some()
            || self.measure_pattern.is_some()
            || self.chart.is_some()
            || self.mask.is_some()
    }

    /// Merge flags over the `--config` document, if any.
    pub fn document(&self) -> Result<RunDocument> {
        let mut doc = match (&self.config, &self.gate) {
            (Some(p), _) => RunDocument::load(p)?,
            (None, Some(g)) => RunDocument::for_gate(g),
            (None, None) => return Err(Error::Config("either --gate or --config is required".into())),
        };
        if let Some(g) = &self.gate {
            doc.gate = gate_spec(g)?;
        }
        if let Some(v) = self.ancillas {
            doc.ancillas = Some(v);
        }
        if let Some(v) = &self.ancilla_pattern {
            doc.ancilla_pattern = Some(v.clone());
        }
        if let Some(v) = self.vacuum {
            doc.vacuum = v;
        }
        if let Some(v) = &self.measure_pattern {
            doc.measure_pattern = Some(v.clone());
        }
        if let Some(v) = self.chart {
            doc.chart = v;
        }
        if let Some(v) = &self.mask {
            doc.mask = v.clone();
        }
        if let Some(v) = self.restarts {
            doc.restarts = v;
        }
        if let Some(v) = self.seed {
            doc.seed = v;
        }
        if let Some(v) = self.tol_f {
            doc.tol_f = v;
        }
        if let Some(v) = self.tol_g {
            doc.tol_g = v;
        }
        if let Some(v) = &self.out_dir {
            doc.out_dir = Some(v.clone());
        }
        Ok(doc)
    }
}

fn gate_spec(g: &str) -> Result<GateSpec> {
    if builtin(g).is_some() {
        return Ok(GateSpec::Name(g.to_string()));
    }
    let p = Path::new(g);
    if p.exists() {
        let doc: GateDocument = serde_json::from_str(&fs::read_to_string(p)?)?;
        return Ok(GateSpec::Inline(doc));
    }
    Err(Error::Gate(format!("'{g}' is neither a built-in gate nor a readable file")))
}

fn run(cli: &Cli, out: &mut String) -> Result<ExitStatus> {
    match &cli.command {
        Command::Optimize(args) => {
            let o = cmd_optimize(&args.document()?)?;
            out.push_str(&format_optimize(&o));
            Ok(o.status)
        }
        Command::Verify { matrix, run, manifold } => {
            let md = MatrixDocument::load(matrix)?;
            let oc = if run.touches_device() { Some(run.document()?.resolve()?) } else { None };
            let v = cmd_verify(&md, oc, run.tol_f.unwrap_or(default_tol_f()), *manifold)?;
            out.push_str(&format_verify(&v));
            Ok(ExitStatus::Success)
        }
        Command::BaselineToffoli { success, matrix } => {
            let s = match matrix {
                Some(p) => Some(MatrixDocument::load(p)?.success),
                None => *success,
            };
            out.push_str(&format_baseline(s));
            Ok(ExitStatus::Success)
        }
        Command::GatesList => {
            out.push_str(&format_gates());
            Ok(ExitStatus::Success)
        }
    }
}

/// Parse `args`, run the verb, and return the exit code with the text for
/// standard output and standard error.
pub fn main_with_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::InputError.code() } else { 0 };
            return (code, String::new(), e.render().to_string());
        }
    };
    let mut out = String::new();
    match run(&cli, &mut out) {
        Ok(status) => (status.code(), out, String::new()),
        Err(e) => (ExitStatus::InputError.code(), out, format!("error: {e}\n")),
    }
}
