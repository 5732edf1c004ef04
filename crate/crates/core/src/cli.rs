//! `ohc-ura` command-line front end.
//!
//! Every option can come from a TOML config file (`--config`); flags given
//! on the command line override file values. Results are written as CSV or
//! JSON with a fixed column set, see [`COLUMNS`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize, Serializer};

use crate::analytics::{self, AnalyticalPoint, MinEbn0, SolverConfig, SystemInputs};
use crate::channel::FrontEnd;
use crate::error::Error;
use crate::receiver::{IdleUses, RffiModel};
use crate::simkit::{self, EstimateReport, SweepAxis, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    #[default]
    Analyze,
    Simulate,
    Solve,
    Sweep,
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Impairment {
    #[default]
    Ideal,
    Pa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum IdleMode {
    #[default]
    Sparse,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[serde(rename = "dl")]
    #[value(name = "dl")]
    DL,
    #[serde(rename = "di")]
    #[value(name = "di")]
    DI,
    #[serde(rename = "ebn0-db")]
    #[value(name = "ebn0-db")]
    Ebn0Db,
    #[serde(rename = "pfa")]
    #[value(name = "pfa")]
    PFa,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::DL => SweepAxis::DL,
            Axis::DI => SweepAxis::DI,
            Axis::Ebn0Db => SweepAxis::Ebn0Db,
            Axis::PFa => SweepAxis::PFa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub bits: u32,
    pub dl: u32,
    pub di: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtot: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebn0_db: Option<f64>,
    pub pmd: f64,
    pub pfa: f64,
    pub rounds: u64,
    pub seed: u64,
    pub impairment: Impairment,
    pub idle: IdleMode,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            bits: 12,
            dl: 1,
            di: 0,
            dtot: None,
            ebn0_db: None,
            pmd: 0.0,
            pfa: 0.0,
            rounds: 10_000,
            seed: 0,
            impairment: Impairment::Ideal,
            idle: IdleMode::Sparse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_pupe: Option<f64>,
    pub search_lo_db: f64,
    pub search_hi_db: f64,
    pub grid_step_db: f64,
    pub tol_db: f64,
    /// Upper end of the D_L sweep for `transition`.
    pub max_dl: u32,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            target_pupe: None,
            search_lo_db: d.search_lo_db,
            search_hi_db: d.search_hi_db,
            grid_step_db: d.grid_step_db,
            tol_db: d.tol_db,
            max_dl: analytics::DEFAULT_MAX_DL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A fully resolved experiment: what to run, on which system, where to write.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: CommandKind,
    pub system: SystemSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Internal(format!("serializing config: {e}")))
    }

    fn system_config(&self) -> Result<SystemConfig, Error> {
        let s = &self.system;
        Ok(SystemConfig {
            num_bits: s.bits,
            d_l: s.dl,
            d_i: s.di,
            d_tot: s.dtot,
            ebn0_db: s.ebn0_db.unwrap_or(0.0),
            rffi: RffiModel::new(s.pmd, s.pfa)?,
            impairment: match s.impairment {
                Impairment::Ideal => FrontEnd::Ideal,
                Impairment::Pa => FrontEnd::PaNonlinear,
            },
            idle: match s.idle {
                IdleMode::Sparse => IdleUses::Sampled,
                IdleMode::Dense => IdleUses::Observed,
            },
            rounds: s.rounds,
            seed: s.seed,
            ..SystemConfig::default()
        })
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            target_pupe: self.solver.target_pupe.unwrap_or(f64::NAN),
            search_lo_db: self.solver.search_lo_db,
            search_hi_db: self.solver.search_hi_db,
            grid_step_db: self.solver.grid_step_db,
            tol_db: self.solver.tol_db,
        }
    }

    /// Checks every field the selected command uses.
    pub fn validate(&self) -> Result<(), Error> {
        let config = self.system_config()?;
        config.validate()?;
        if let Some(t) = self.solver.target_pupe {
            SolverConfig { target_pupe: t, ..self.solver_config() }.validate()?;
        }
        let needs_target = |what: &str| {
            Error::invalid("target_pupe", format!("{what} needs --target-pupe"))
        };
        match self.command {
            CommandKind::Analyze | CommandKind::Simulate => {
                if self.system.ebn0_db.is_none() && self.solver.target_pupe.is_none() {
                    return Err(Error::invalid("ebn0_db", "give --ebn0-db or --target-pupe to fix the operating point"));
                }
                if self.command == CommandKind::Simulate && self.system.dl == 0 {
                    return Err(Error::invalid("dl", "simulation needs at least one legitimate device"));
                }
            }
            CommandKind::Solve => {
                if self.solver.target_pupe.is_none() {
                    return Err(needs_target("solve"));
                }
                if self.system.dl == 0 {
                    return Err(Error::invalid("dl", "PUPE is undefined without legitimate devices"));
                }
            }
            CommandKind::Transition => {
                if self.solver.target_pupe.is_none() {
                    return Err(needs_target("transition"));
                }
                if self.solver.max_dl == 0 {
                    return Err(Error::invalid("max_dl", "must be positive"));
                }
            }
            CommandKind::Sweep => {
                let axis = self
                    .sweep
                    .axis
                    .ok_or_else(|| Error::invalid("axis", "sweep needs --axis"))?;
                if self.sweep.values.is_empty() {
                    return Err(Error::invalid("values", "sweep needs at least one value"));
                }
                if axis != Axis::Ebn0Db && self.system.ebn0_db.is_none() && self.solver.target_pupe.is_none() {
                    return Err(Error::invalid("ebn0_db", "give --ebn0-db or --target-pupe to fix the operating point"));
                }
                let configs = simkit::sweep_configs(&config, axis.into(), &self.sweep.values)?;
                if configs.iter().any(|c| c.d_l == 0) {
                    return Err(Error::invalid("dl", "sweep values must keep at least one legitimate device"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid configuration: {0}")]
    Invalid(#[source] Error),
    #[error("{0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput { .. } => CliError::Invalid(e),
            Error::Io(io) => CliError::Io(io),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 2,
            CliError::Internal(_) | CliError::Io(_) => 1,
        }
    }
}

/// Column order of every emitted CSV file and JSON object.
pub const COLUMNS: &[&str] = &[
    "command",
    "bits",
    "n",
    "dl",
    "di",
    "dtot",
    "ebn0_db",
    "pmd",
    "pfa",
    "impairment",
    "idle",
    "rounds",
    "seed",
    "target_pupe",
    "p_sym_err",
    "p_a",
    "p_b",
    "p_c",
    "p_total",
    "pupe_analytical",
    "spoof_analytical",
    "pupe_hat",
    "stderr_pupe",
    "spoof_hat",
    "stderr_spoof",
    "min_ebn0_db",
];

/// Solver result cell: a number, or the literal `infeasible`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveCell(pub MinEbn0);

impl Serialize for SolveCell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            MinEbn0::Feasible(db) => s.serialize_f64(db),
            MinEbn0::Infeasible => s.serialize_str("infeasible"),
        }
    }
}

/// One output row. `None` renders as an empty CSV field or JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub command: CommandKind,
    pub bits: u32,
    pub n: u64,
    pub dl: Option<u32>,
    pub di: u32,
    pub dtot: Option<u32>,
    pub ebn0_db: Option<f64>,
    pub pmd: f64,
    pub pfa: f64,
    pub impairment: Impairment,
    pub idle: IdleMode,
    pub rounds: Option<u64>,
    pub seed: Option<u64>,
    pub target_pupe: Option<f64>,
    pub p_sym_err: Option<f64>,
    pub p_a: Option<f64>,
    pub p_b: Option<f64>,
    pub p_c: Option<f64>,
    pub p_total: Option<f64>,
    pub pupe_analytical: Option<f64>,
    pub spoof_analytical: Option<f64>,
    pub pupe_hat: Option<f64>,
    pub stderr_pupe: Option<f64>,
    pub spoof_hat: Option<f64>,
    pub stderr_spoof: Option<f64>,
    pub min_ebn0_db: Option<SolveCell>,
}

impl Row {
    fn new(spec: &ExperimentSpec, config: &SystemConfig, ebn0_db: Option<f64>) -> Self {
        let monte_carlo = matches!(spec.command, CommandKind::Simulate | CommandKind::Sweep);
        Row {
            command: spec.command,
            bits: config.num_bits,
            n: config.n_uses(),
            dl: Some(config.d_l),
            di: config.d_i,
            dtot: config.d_tot,
            ebn0_db,
            pmd: config.rffi.p_md,
            pfa: config.rffi.p_fa,
            impairment: spec.system.impairment,
            idle: spec.system.idle,
            rounds: monte_carlo.then_some(config.rounds),
            seed: monte_carlo.then_some(config.seed),
            target_pupe: spec.solver.target_pupe,
            p_sym_err: None,
            p_a: None,
            p_b: None,
            p_c: None,
            p_total: None,
            pupe_analytical: None,
            spoof_analytical: None,
            pupe_hat: None,
            stderr_pupe: None,
            spoof_hat: None,
            stderr_spoof: None,
            min_ebn0_db: None,
        }
    }

    fn with_analytical(mut self, a: &AnalyticalPoint) -> Self {
        self.p_sym_err = Some(a.p_sym_err);
        self.p_a = Some(a.p_a);
        self.p_b = Some(a.p_b);
        self.p_c = Some(a.p_c);
        self.p_total = Some(a.p_total);
        self.pupe_analytical = a.pupe;
        self.spoof_analytical = a.spoof;
        self
    }

    fn with_estimate(mut self, r: &EstimateReport) -> Self {
        self.pupe_hat = Some(r.pupe_hat);
        self.stderr_pupe = Some(r.stderr_pupe);
        if r.config.d_i > 0 {
            self.spoof_hat = Some(r.spoof_hat);
            self.stderr_spoof = Some(r.stderr_spoof);
        }
        self.with_analytical(&r.analytical)
    }
}

/// Rows plus a human-readable summary for standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub summary: String,
}

/// Operating Eb/N0 for `config`: an explicit value wins, otherwise the
/// solved minimum for the target PUPE.
fn operating_point(spec: &ExperimentSpec, config: &SystemConfig, explicit: Option<f64>) -> Result<(Option<f64>, Option<MinEbn0>), Error> {
    let solved = match spec.solver.target_pupe {
        Some(t) if config.d_l > 0 => Some(analytics::min_ebn0_for_pupe(
            &SolverConfig { target_pupe: t, ..spec.solver_config() },
            &config.system_inputs(),
        )?),
        _ => None,
    };
    let ebn0 = explicit.or_else(|| solved.and_then(MinEbn0::db));
    Ok((ebn0, solved))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

/// Executes a validated spec.
pub fn run(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    spec.validate()?;
    let base = spec.system_config()?;
    let mut summary = String::new();
    let rows = match spec.command {
        CommandKind::Analyze => {
            let (ebn0, solved) = operating_point(spec, &base, spec.system.ebn0_db)?;
            let mut row = Row::new(spec, &base, ebn0);
            row.min_ebn0_db = solved.map(SolveCell);
            if let Some(db) = ebn0 {
                let a = base.system_inputs().at(db);
                summary.push_str(&format!(
                    "Eb/N0 {db:.4} dB: P_L = {}, P_I = {}, P*N = {:.4}\n",
                    fmt_opt(a.pupe),
                    fmt_opt(a.spoof),
                    a.expected_recovered()
                ));
                row = row.with_analytical(&a);
            } else {
                summary.push_str("target PUPE infeasible in the search range\n");
            }
            vec![row]
        }
        CommandKind::Simulate => {
            let (ebn0, solved) = operating_point(spec, &base, spec.system.ebn0_db)?;
            let mut row = Row::new(spec, &base, ebn0);
            row.min_ebn0_db = solved.map(SolveCell);
            if let Some(db) = ebn0 {
                let report = simkit::estimate(&SystemConfig { ebn0_db: db, ..base })?;
                summary.push_str(&format!(
                    "Eb/N0 {db:.4} dB, {} rounds: pupe_hat = {:.6} (+/- {:.2e}), spoof_hat = {:.6}; analytical P_L = {}\n",
                    report.rounds_run,
                    report.pupe_hat,
                    report.stderr_pupe,
                    report.spoof_hat,
                    fmt_opt(report.analytical.pupe)
                ));
                row = row.with_estimate(&report);
            } else {
                summary.push_str("target PUPE infeasible in the search range; nothing simulated\n");
            }
            vec![row]
        }
        CommandKind::Solve => {
            let (_, solved) = operating_point(spec, &base, None)?;
            let solved = solved.expect("validated: solve has a target");
            let mut row = Row::new(spec, &base, spec.system.ebn0_db);
            row.min_ebn0_db = Some(SolveCell(solved));
            match solved {
                MinEbn0::Feasible(db) => {
                    summary.push_str(&format!("minimum Eb/N0 = {db:.4} dB\n"));
                    row = row.with_analytical(&base.system_inputs().at(db));
                }
                MinEbn0::Infeasible => summary.push_str("infeasible\n"),
            }
            vec![row]
        }
        CommandKind::Sweep => {
            let axis = spec.sweep.axis.expect("validated: sweep has an axis");
            let configs = simkit::sweep_configs(&base, axis.into(), &spec.sweep.values)?;
            let mut rows = Vec::with_capacity(configs.len());
            for config in &configs {
                let explicit = if axis == Axis::Ebn0Db { Some(config.ebn0_db) } else { spec.system.ebn0_db };
                let (ebn0, solved) = operating_point(spec, config, explicit)?;
                let mut row = Row::new(spec, config, ebn0);
                row.min_ebn0_db = solved.map(SolveCell);
                if let Some(db) = ebn0 {
                    let report = simkit::estimate(&SystemConfig { ebn0_db: db, ..*config })?;
                    summary.push_str(&format!(
                        "{axis:?}: D_L={} D_I={} pfa={} Eb/N0={db:.4} dB  P_L={} pupe_hat={:.6}  P_I={} spoof_hat={:.6}  P*N={:.3}\n",
                        config.d_l,
                        config.d_i,
                        config.rffi.p_fa,
                        fmt_opt(report.analytical.pupe),
                        report.pupe_hat,
                        fmt_opt(report.analytical.spoof),
                        report.spoof_hat,
                        report.analytical.expected_recovered(),
                    ));
                    row = row.with_estimate(&report);
                } else {
                    summary.push_str(&format!("{axis:?}: D_L={} D_I={} infeasible\n", config.d_l, config.d_i));
                }
                rows.push(row);
            }
            rows
        }
        CommandKind::Transition => {
            let solver = SolverConfig {
                target_pupe: spec.solver.target_pupe.expect("validated: transition has a target"),
                ..spec.solver_config()
            };
            let inputs: SystemInputs = base.system_inputs();
            let found = analytics::regime_transition_dl(&solver, &inputs, spec.solver.max_dl)?;
            match found {
                Some(t) => {
                    summary.push_str(&format!(
                        "P*N = D_L transition at D_L = {} (Eb/N0 {:.4} dB, P*N = {:.4})\n",
                        t.d_l, t.ebn0_db, t.expected_recovered
                    ));
                    let at = SystemConfig { d_l: t.d_l, ..base };
                    let mut row = Row::new(spec, &at, Some(t.ebn0_db));
                    row.min_ebn0_db = Some(SolveCell(MinEbn0::Feasible(t.ebn0_db)));
                    vec![row.with_analytical(&at.system_inputs().at(t.ebn0_db))]
                }
                None => {
                    summary.push_str(&format!("no transition found for D_L <= {}\n", spec.solver.max_dl));
                    let mut row = Row::new(spec, &base, None);
                    row.dl = None;
                    vec![row]
                }
            }
        }
    };
    Ok(Outcome { rows, summary })
}

pub fn render(rows: &[Row], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(COLUMNS).map_err(|e| CliError::Internal(e.to_string()))?;
            for row in rows {
                w.serialize(row).map_err(|e| CliError::Internal(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| CliError::Internal(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "ohc-ura", version, about = "One-hot-coded URA with OOK and RFFI authentication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form probabilities at one operating point
    Analyze(Flags),
    /// Monte Carlo estimate of PUPE and spoofing probability
    Simulate(Flags),
    /// Minimum Eb/N0 meeting the target PUPE
    Solve(Flags),
    /// Analytical and Monte Carlo values along one parameter axis
    Sweep(Flags),
    /// D_L at which the expected list size stops being capped
    Transition(Flags),
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// TOML config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Message length B
    #[arg(long)]
    pub bits: Option<u32>,
    /// Active legitimate devices
    #[arg(long)]
    pub dl: Option<u32>,
    /// Active illegitimate devices
    #[arg(long)]
    pub di: Option<u32>,
    /// Registered devices (reported only)
    #[arg(long)]
    pub dtot: Option<u32>,
    /// Eb/N0 in dB
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0_db: Option<f64>,
    /// RFFI miss-detection probability
    #[arg(long)]
    pub pmd: Option<f64>,
    /// RFFI false-alarm probability
    #[arg(long)]
    pub pfa: Option<f64>,
    /// Monte Carlo rounds
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub impairment: Option<Impairment>,
    /// Idle channel uses: sampled statistically (sparse) or simulated one by one (dense)
    #[arg(long, value_enum)]
    pub idle: Option<IdleMode>,
    #[arg(long)]
    pub target_pupe: Option<f64>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Comma-separated sweep values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub search_lo_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub search_hi_db: Option<f64>,
    #[arg(long)]
    pub grid_step_db: Option<f64>,
    #[arg(long)]
    pub tol_db: Option<f64>,
    #[arg(long)]
    pub max_dl: Option<u32>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Flags {
    fn apply(self, spec: &mut ExperimentSpec) {
        macro_rules! set {
            ($($flag:ident => $($dst:ident).+;)*) => {
                $(if let Some(v) = self.$flag { spec.$($dst).+ = v; })*
            };
        }
        set! {
            bits => system.bits;
            dl => system.dl;
            di => system.di;
            pmd => system.pmd;
            pfa => system.pfa;
            rounds => system.rounds;
            seed => system.seed;
            impairment => system.impairment;
            idle => system.idle;
            values => sweep.values;
            search_lo_db => solver.search_lo_db;
            search_hi_db => solver.search_hi_db;
            grid_step_db => solver.grid_step_db;
            tol_db => solver.tol_db;
            max_dl => solver.max_dl;
            format => output.format;
        }
        if self.dtot.is_some() {
            spec.system.dtot = self.dtot;
        }
        if self.ebn0_db.is_some() {
            spec.system.ebn0_db = self.ebn0_db;
        }
        if self.target_pupe.is_some() {
            spec.solver.target_pupe = self.target_pupe;
        }
        if self.axis.is_some() {
            spec.sweep.axis = self.axis;
        }
        if self.output.is_some() {
            spec.output.path = self.output;
        }
    }
}

/// Builds the experiment from config file and flags.
pub fn resolve(command: Command) -> Result<ExperimentSpec, CliError> {
    let (kind, flags) = match command {
        Command::Analyze(f) => (CommandKind::Analyze, f),
        Command::Simulate(f) => (CommandKind::Simulate, f),
        Command::Solve(f) => (CommandKind::Solve, f),
        Command::Sweep(f) => (CommandKind::Sweep, f),
        Command::Transition(f) => (CommandKind::Transition, f),
    };
    let mut spec = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            ExperimentSpec::from_toml(&text)?
        }
        None => ExperimentSpec::default(),
    };
    spec.command = kind;
    flags.apply(&mut spec);
    Ok(spec)
}

/// Runs the spec, writes the artifact and returns the rendered bytes.
pub fn execute(spec: &ExperimentSpec, stdout: &mut dyn Write) -> Result<Vec<u8>, CliError> {
    for w in spec.system_config().map(|c| c.warnings()).unwrap_or_default() {
        eprintln!("warning: {w}");
    }
    let outcome = run(spec)?;
    let bytes = render(&outcome.rows, spec.output.format)?;
    match &spec.output.path {
        Some(path) => {
            write_atomically(path, &bytes)?;
            stdout.write_all(outcome.summary.as_bytes())?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        None => {
            stdout.write_all(outcome.summary.as_bytes())?;
            stdout.write_all(&bytes)?;
        }
    }
    Ok(bytes)
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = resolve(cli.command).and_then(|spec| execute(&spec, &mut std::io::stdout().lock()));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Invalid(Error::InvalidInput { field, .. }) = &e {
                eprintln!("offending field: {field}");
            }
            e.exit_code()
        }
    }
}
