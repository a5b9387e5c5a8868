//! Batch front-end: `list`, `localize`, `sweep` and `verify`.
//!
//! Settings come from an optional JSON config file; command-line flags
//! override it. Exit codes: 0 pass, 1 invariant failure, 2 precondition
//! failure, 3 IO or configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::catalog::{self, CatalogEntry, CatalogParams, Evaluator, Instance};
use crate::error::{Error, Result};
use crate::localization::{
    atiyah_bott_bv, berline_vergne_sum, cohft_localize, dh_poisson, rank_at_fixed_points, weight_containment_check,
    CohftMode, LocalizationReport, REPORT_SCHEMA,
};
use crate::quadrature::{decimal, t_grid, z_gamma_sweep, SweepResult, Verdict};
use crate::verify::{self, Fault, Module, VerifyOptions};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BVLOC_THREADS";

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_SWEEP_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_T_MAX: f64 = 5.0;
pub const DEFAULT_T_STEPS: usize = 20;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    InvariantFailure = 1,
    PreconditionFailure = 2,
    IoOrConfig = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn of_error(e: &Error) -> Status {
        match e {
            Error::Io(_) | Error::Json(_) | Error::Config(_) | Error::UnknownEntry(_) => Status::IoOrConfig,
            _ => Status::PreconditionFailure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "bvloc", version, about = "Equivariant BV calculus and localization checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the geometry catalog.
    List(Flags),
    /// Compare a localization formula with the direct integral.
    Localize(Flags),
    /// Sweep `Z(t)` over a `t` grid and judge its `t`-independence.
    Sweep(Flags),
    /// Run the invariant suites.
    Verify(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    entry: Option<String>,
    /// Evaluator for `localize`, or a filter for `list`.
    #[arg(long)]
    evaluator: Option<String>,
    /// Equivariant parameter(s), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    phi: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    /// Gauss–Legendre order per axis.
    #[arg(long)]
    order: Option<usize>,
    /// Action speed multiplier.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Restrict `verify` to the named module(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    module: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Add a deliberately broken fixture to `verify` (`metric-perturbation`).
    #[arg(long)]
    inject_fault: Option<String>,
    /// Expected sweep verdict (`closed` or `non_closed`); defaults to the
    /// catalog entry's expectation.
    #[arg(long)]
    expect: Option<String>,
}

/// Resolved run settings: config file fields overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub entry: Option<String>,
    pub evaluator: Option<String>,
    pub phi: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    pub quadrature_order: Option<usize>,
    pub k: Option<i32>,
    pub tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub modules: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub inject_fault: Option<String>,
    pub expect: Option<Verdict>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Fields set in `other` replace those of `self`.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            entry: other.entry.or(self.entry),
            evaluator: other.evaluator.or(self.evaluator),
            phi: other.phi.or(self.phi),
            t_max: other.t_max.or(self.t_max),
            t_steps: other.t_steps.or(self.t_steps),
            quadrature_order: other.quadrature_order.or(self.quadrature_order),
            k: other.k.or(self.k),
            tol: other.tol.or(self.tol),
            out_dir: other.out_dir.or(self.out_dir),
            format: other.format.or(self.format),
            modules: other.modules.or(self.modules),
            seed: other.seed.or(self.seed),
            samples: other.samples.or(self.samples),
            inject_fault: other.inject_fault.or(self.inject_fault),
            expect: other.expect.or(self.expect),
        }
    }

    /// Check the invariants: positive tolerance and order, finite `φ`, a
    /// sorted (nonnegative) `t` grid.
    pub fn validate(&self) -> Result<()> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
            }
        }
        if let Some(phi) = &self.phi {
            if phi.is_empty() || phi.iter().any(|p| !p.is_finite()) {
                return Err(Error::Config("phi must be a nonempty list of finite numbers".into()));
            }
        }
        if let Some(t) = self.t_max {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("t-max must be finite and nonnegative, got {t}")));
            }
        }
        if self.quadrature_order == Some(0) {
            return Err(Error::Config("quadrature order must be positive".into()));
        }
        if self.samples == Some(0) {
            return Err(Error::Config("samples must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> CatalogParams {
        let d = CatalogParams::default();
        CatalogParams {
            k: self.k.unwrap_or(d.k),
            quadrature_order: self.quadrature_order.unwrap_or(d.quadrature_order),
        }
    }

    pub fn tolerance(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Table)
    }

    fn entry_id(&self) -> Result<&str> {
        self.entry
            .as_deref()
            .ok_or_else(|| Error::Config("--entry is required".into()))
    }

    pub fn t_values(&self) -> Vec<f64> {
        t_grid(self.t_max.unwrap_or(DEFAULT_T_MAX), self.t_steps.unwrap_or(DEFAULT_T_STEPS))
    }

    pub fn verify_options(&self) -> Result<VerifyOptions> {
        let d = VerifyOptions::default();
        let modules = match &self.modules {
            None => Vec::new(),
            Some(names) => names
                .iter()
                .map(|n| Module::parse(n).ok_or_else(|| Error::Config(format!("unknown module `{n}`"))))
                .collect::<Result<_>>()?,
        };
        let fault = match &self.inject_fault {
            None => None,
            Some(f) => Some(Fault::parse(f).ok_or_else(|| Error::Config(format!("unknown fault `{f}`")))?),
        };
        Ok(VerifyOptions {
            seed: self.seed.unwrap_or(d.seed),
            samples: self.samples.unwrap_or(d.samples),
            modules,
            fault,
            quadrature_order: self.quadrature_order.unwrap_or(d.quadrature_order),
        })
    }
}

impl Flags {
    fn into_config(self) -> Result<(Option<PathBuf>, RunConfig)> {
        let expect = match self.expect.as_deref() {
            None => None,
            Some("closed") => Some(Verdict::Closed),
            Some("non_closed") | Some("non-closed") => Some(Verdict::NonClosed),
            Some(other) => return Err(Error::Config(format!("unknown verdict `{other}`"))),
        };
        Ok((
            self.config,
            RunConfig {
                entry: self.entry,
                evaluator: self.evaluator,
                phi: self.phi,
                t_max: self.t_max,
                t_steps: self.t_steps,
                quadrature_order: self.order,
                k: self.k,
                tol: self.tol,
                out_dir: self.out_dir,
                format: self.format,
                modules: self.module,
                seed: self.seed,
                samples: self.samples,
                inject_fault: self.inject_fault,
                expect,
            },
        ))
    }
}

/// Output of one command: the text for stdout, files to write, and status.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

/// Parse arguments, run the command inside a worker pool capped by
/// `BVLOC_THREADS`, write outputs and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return Status::IoOrConfig.code();
            }
            let _ = write!(out, "{e}");
            return Status::Pass.code();
        }
    };
    match execute(cli) {
        Ok((config, outcome)) => match emit(&config, &outcome, out) {
            Ok(()) => outcome.status.code(),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                Status::IoOrConfig.code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Status::of_error(&e).code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn execute(cli: Cli) -> Result<(RunConfig, Outcome)> {
    let (name, flags) = match cli.command {
        Command::List(f) => ("list", f),
        Command::Localize(f) => ("localize", f),
        Command::Sweep(f) => ("sweep", f),
        Command::Verify(f) => ("verify", f),
    };
    let (config_path, overrides) = flags.into_config()?;
    let base = match config_path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    let config = base.overridden_by(overrides);
    config.validate()?;
    let pool = thread_pool()?;
    let outcome = pool.install(|| match name {
        "list" => cmd_list(&config),
        "localize" => cmd_localize(&config),
        "sweep" => cmd_sweep(&config),
        _ => cmd_verify(&config),
    })?;
    Ok((config, outcome))
}

fn emit(config: &RunConfig, outcome: &Outcome, out: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        for (name, body) in &outcome.files {
            fs::write(dir.join(name), body)?;
        }
    }
    out.write_all(outcome.stdout.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// list

#[derive(Serialize)]
struct Listing<'a> {
    schema: u32,
    entries: &'a [CatalogEntry],
}

pub fn cmd_list(config: &RunConfig) -> Result<Outcome> {
    let entries = match config.evaluator.as_deref() {
        None => catalog::registry(),
        Some(name) => catalog::filter(parse_evaluator(name)?),
    };
    let stdout = match config.format() {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Listing {
                schema: REPORT_SCHEMA,
                entries: &entries,
            })?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("id,evaluators,expected,closed\n");
            for e in &entries {
                let evs: Vec<&str> = e.evaluators.iter().map(Evaluator::name).collect();
                let expected = e.expected.map(decimal).unwrap_or_default();
                let _ = writeln!(s, "{},{},{expected},{}", e.id, evs.join(";"), e.closed);
            }
            s
        }
        Format::Table => {
            let mut s = format!("{:<14} {:<20} {:<62} {}\n", "id", "expected", "evaluators", "closed");
            for e in &entries {
                let evs: Vec<&str> = e.evaluators.iter().map(Evaluator::name).collect();
                let expected = e.expected.map(|v| format!("{v:.12}")).unwrap_or_default();
                let _ = writeln!(s, "{:<14} {:<20} {:<62} {}", e.id, expected, evs.join(","), e.closed);
            }
            s
        }
    };
    Ok(Outcome {
        status: Status::Pass,
        stdout,
        files: Vec::new(),
    })
}

fn parse_evaluator(name: &str) -> Result<Evaluator> {
    Evaluator::parse(name).ok_or_else(|| {
        let known: Vec<&str> = Evaluator::ALL.iter().map(Evaluator::name).collect();
        Error::Config(format!("unknown evaluator `{name}` (known: {})", known.join(", ")))
    })
}

// ---------------------------------------------------------------------------
// localize

const LOCALIZATION_EVALUATORS: [Evaluator; 5] = [
    Evaluator::BerlineVergne,
    Evaluator::AtiyahBott,
    Evaluator::CohftDiscrete,
    Evaluator::CohftBott,
    Evaluator::DhPoisson,
];

/// Run one localization evaluator on a built entry.
pub fn localize(inst: &Instance, evaluator: Evaluator, phi: f64) -> Result<LocalizationReport> {
    let g = &inst.geometry;
    let map = || {
        inst.map
            .as_ref()
            .ok_or_else(|| Error::WrongEvaluator(format!("{} declares no equivariant map", inst.entry.id)))
    };
    let field = |f: &Option<crate::field::JetField>, what: &str| {
        f.clone()
            .ok_or_else(|| Error::WrongEvaluator(format!("{} declares no {what}", inst.entry.id)))
    };
    match evaluator {
        Evaluator::BerlineVergne => berline_vergne_sum(&inst.p, g, phi),
        Evaluator::AtiyahBott => atiyah_bott_bv(&inst.p, g, phi),
        Evaluator::CohftDiscrete => cohft_localize(&inst.p, map()?, g, phi, CohftMode::Discrete),
        Evaluator::CohftBott => cohft_localize(&inst.p, map()?, g, phi, CohftMode::Bott),
        Evaluator::DhPoisson => dh_poisson(&field(&inst.h, "Hamiltonian")?, &field(&inst.pi, "Poisson bivector")?, g),
        other => Err(Error::Config(format!("`{other}` is not a localization evaluator"))),
    }
}

pub fn cmd_localize(config: &RunConfig) -> Result<Outcome> {
    let id = config.entry_id()?;
    let inst = catalog::build(id, &config.params())?;
    let evaluator = match config.evaluator.as_deref() {
        Some(name) => parse_evaluator(name)?,
        None => inst
            .entry
            .evaluators
            .iter()
            .copied()
            .find(|e| LOCALIZATION_EVALUATORS.contains(e))
            .unwrap_or(Evaluator::BerlineVergne),
    };
    match evaluator {
        Evaluator::RankTable => return rank_outcome(config, &inst),
        Evaluator::WeightContainment => return containment_outcome(config, &inst),
        _ => {}
    }
    let tol = config.tolerance(DEFAULT_TOLERANCE);
    let phis = config.phi.clone().unwrap_or_else(|| vec![1.0]);
    let mut reports = Vec::new();
    for &phi in &phis {
        reports.push(localize(&inst, evaluator, phi)?);
        if evaluator == Evaluator::DhPoisson {
            // the Poisson formula carries no φ
            break;
        }
    }
    let pass = reports.iter().all(|r| r.rel_residual <= tol);
    let stem = format!("{id}_{evaluator}");
    let multi = reports.len() > 1;
    let mut files = Vec::new();
    for r in &reports {
        let suffix = if multi { format!("_phi{}", r.phi) } else { String::new() };
        files.push((format!("{stem}{suffix}.json"), r.to_json()? + "\n"));
        files.push((format!("{stem}{suffix}.txt"), r.to_table()));
    }
    let stdout = match config.format() {
        Format::Json => {
            let mut s = if multi {
                serde_json::to_string_pretty(&reports)?
            } else {
                reports[0].to_json()?
            };
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("entry,evaluator,phi,direct,localized,abs_residual,rel_residual,closed\n");
            for r in &reports {
                let _ = writeln!(
                    s,
                    "{id},{},{},{},{},{},{},{}",
                    r.evaluator,
                    decimal(r.phi),
                    decimal(r.direct_value),
                    decimal(r.localized_value),
                    decimal(r.abs_residual),
                    decimal(r.rel_residual),
                    r.diagnostics.closed
                );
            }
            s
        }
        Format::Table => reports.iter().map(|r| r.to_table()).collect::<Vec<_>>().join("\n"),
    };
    Ok(Outcome {
        status: if pass { Status::Pass } else { Status::InvariantFailure },
        stdout,
        files,
    })
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    schema: u32,
    entry: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn rank_outcome(config: &RunConfig, inst: &Instance) -> Result<Outcome> {
    let pi = inst
        .pi
        .as_ref()
        .ok_or_else(|| Error::WrongEvaluator(format!("{} declares no Poisson bivector", inst.entry.id)))?;
    let table = rank_at_fixed_points(pi, &inst.geometry);
    let json = serde_json::to_string_pretty(&Wrapped {
        schema: REPORT_SCHEMA,
        entry: inst.entry.id,
        body: &table,
    })? + "\n";
    let stdout = match config.format() {
        Format::Json => json.clone(),
        Format::Csv => {
            let mut s = String::from("locus,rank\n");
            for r in &table.rows {
                let _ = writeln!(s, "{},{}", r.locus, r.rank);
            }
            s
        }
        Format::Table => table.to_table(),
    };
    let id = inst.entry.id;
    Ok(Outcome {
        status: if table.full_rank_somewhere { Status::Pass } else { Status::InvariantFailure },
        stdout,
        files: vec![(format!("{id}_rank_table.json"), json), (format!("{id}_rank_table.txt"), table.to_table())],
    })
}

fn containment_outcome(config: &RunConfig, inst: &Instance) -> Result<Outcome> {
    let map = inst
        .map
        .as_ref()
        .ok_or_else(|| Error::WrongEvaluator(format!("{} declares no equivariant map", inst.entry.id)))?;
    let w = weight_containment_check(map, &inst.geometry)?;
    let json = serde_json::to_string_pretty(&Wrapped {
        schema: REPORT_SCHEMA,
        entry: inst.entry.id,
        body: &w,
    })? + "\n";
    let text = format!(
        "action weights {:?}\nmap weights    {:?}\ncontained      {}\n",
        w.action_weights, w.map_weights, w.contained
    );
    let stdout = match config.format() {
        Format::Json => json.clone(),
        Format::Csv => format!("action_weights,map_weights,contained\n{:?},{:?},{}\n", w.action_weights, w.map_weights, w.contained)
            .replace(", ", ";"),
        Format::Table => text.clone(),
    };
    let id = inst.entry.id;
    Ok(Outcome {
        status: if w.contained { Status::Pass } else { Status::InvariantFailure },
        stdout,
        files: vec![
            (format!("{id}_weight_containment.json"), json),
            (format!("{id}_weight_containment.txt"), text),
        ],
    })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Serialize)]
struct SweepReport<'a> {
    schema: u32,
    entry: &'a str,
    phi: f64,
    expected: Verdict,
    #[serde(flatten)]
    result: &'a SweepResult,
}

pub fn cmd_sweep(config: &RunConfig) -> Result<Outcome> {
    let id = config.entry_id()?;
    let inst = catalog::build(id, &config.params())?;
    let phi = config.phi.as_ref().map(|p| p[0]).unwrap_or(1.0);
    let tol = config.tolerance(DEFAULT_SWEEP_TOLERANCE);
    let result = z_gamma_sweep(&inst.p, &inst.gamma, &inst.geometry, phi, &config.t_values(), tol)?;
    let expected = config.expect.unwrap_or(if inst.entry.closed {
        Verdict::Closed
    } else {
        Verdict::NonClosed
    });
    let report = SweepReport {
        schema: REPORT_SCHEMA,
        entry: id,
        phi,
        expected,
        result: &result,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    let csv = result.to_csv();
    let summary = format!(
        "entry          {id}\nphi            {phi}\nt points       {}\nmax deviation  {:.3e}\nverdict        {:?}\nexpected       {:?}\nclosedness     {:.3e}\n{}",
        result.t_values.len(),
        result.max_deviation,
        result.verdict,
        expected,
        result.closedness_residual,
        result.warnings.iter().map(|w| format!("warning: {w}\n")).collect::<String>()
    );
    let stdout = match config.format() {
        Format::Json => json.clone(),
        Format::Csv => csv.clone(),
        Format::Table => summary,
    };
    Ok(Outcome {
        status: if result.verdict == expected { Status::Pass } else { Status::InvariantFailure },
        stdout,
        files: vec![
            (format!("{id}_sweep.csv"), csv),
            (format!("{id}_sweep.svg"), result.to_svg(&format!("Z(t) for {id}"))),
            (format!("{id}_sweep.json"), json),
        ],
    })
}

// ---------------------------------------------------------------------------
// verify

pub fn cmd_verify(config: &RunConfig) -> Result<Outcome> {
    let report = verify::run(&config.verify_options()?)?;
    let json = report.to_json()? + "\n";
    let table = report.to_table();
    let stdout = match config.format() {
        Format::Json => json.clone(),
        Format::Csv => report.to_csv(),
        Format::Table => table.clone(),
    };
    Ok(Outcome {
        status: if report.passed { Status::Pass } else { Status::InvariantFailure },
        stdout,
        files: vec![("verify.json".into(), json), ("verify.txt".into(), table)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let base = RunConfig::from_json(r#"{"entry": "sphere_dh", "tol": 1e-3, "k": 2}"#).unwrap();
        let flags = RunConfig {
            tol: Some(1e-9),
            ..RunConfig::default()
        };
        let c = base.overridden_by(flags);
        assert_eq!(c.tol, Some(1e-9));
        assert_eq!(c.k, Some(2));
        assert_eq!(c.entry.as_deref(), Some("sphere_dh"));
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for json in [r#"{"tol": 0}"#, r#"{"tol": -1}"#, r#"{"t_max": -2}"#, r#"{"phi": []}"#] {
            assert!(RunConfig::from_json(json).unwrap().validate().is_err(), "{json}");
        }
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(Status::of_error(&Error::Config("x".into())), Status::IoOrConfig);
        assert_eq!(Status::of_error(&Error::WrongEvaluator("x".into())), Status::PreconditionFailure);
        assert_eq!(Status::of_error(&Error::UnknownEntry("x".into())), Status::IoOrConfig);
    }
}
