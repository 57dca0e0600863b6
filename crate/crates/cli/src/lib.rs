//! Batch front end for the `ppswap` engine: reads a TOML run configuration,
//! runs one command and renders the result as JSON or CSV.

pub mod config;
pub mod report;

use std::fmt;

use ppswap::analysis::{failure_reference, sweep, SweepGrid, ThresholdSet};
use ppswap::montecarlo::simulate;
use ppswap::solver::search::NumericThresholds;
use ppswap::{solve, Error};
use serde::Serialize;

use config::RunConfig;
use report::{
    ClosedFormDoc, NumericDoc, SimulateDoc, SolveDoc, SummaryDoc, SweepDoc, SweepRowDoc,
    ThresholdsDoc, VerifyDoc, VerifyMode, SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: unreadable or malformed config, or a spec that fails
    /// validation. Exit code 1.
    Invalid(String),
    /// A check inside the engine failed. Exit code 2.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidMarket(_)
            | Error::InvalidSpec(_)
            | Error::InvalidGrid(_)
            | Error::InvalidSimConfig(_)
            | Error::UnsupportedClosedForm(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// One JSON document.
    Structured,
    /// CSV rows with a header.
    Delimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Thresholds,
    Verify,
    Simulate,
    Sweep,
}

impl Command {
    /// `sweep` defaults to CSV since its output is one row per grid point.
    pub fn default_format(self) -> Format {
        match self {
            Command::Sweep => Format::Delimited,
            _ => Format::Structured,
        }
    }
}

/// A rendered command result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub body: String,
    /// Human-readable lines for the error stream.
    pub notes: Vec<String>,
    /// `false` when `verify` found disagreements.
    pub passed: bool,
}

impl Output {
    fn ok(body: String) -> Self {
        Self {
            body,
            notes: Vec::new(),
            passed: true,
        }
    }
}

pub fn run(
    command: Command,
    config: &RunConfig,
    format: Format,
    workers: usize,
) -> Result<Output, CliError> {
    match command {
        Command::Solve => cmd_solve(config, format),
        Command::Thresholds => cmd_thresholds(config, format),
        Command::Verify => cmd_verify(config, format),
        Command::Simulate => cmd_simulate(config, format, workers),
        Command::Sweep => cmd_sweep(config, format),
    }
}

fn cmd_solve(config: &RunConfig, format: Format) -> Result<Output, CliError> {
    let spec = config.spec()?;
    let doc = SolveDoc::new(&spec, &solve(&spec)?);
    Ok(Output::ok(match format {
        Format::Structured => to_json(&doc)?,
        Format::Delimited => to_csv(&doc.nodes)?,
    }))
}

fn cmd_thresholds(config: &RunConfig, format: Format) -> Result<Output, CliError> {
    let spec = config.spec()?;
    let closed_form = match ThresholdSet::for_spec(&spec) {
        Ok(t) => Some(ClosedFormDoc::new(&t)),
        Err(Error::UnsupportedClosedForm(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let doc = ThresholdsDoc {
        schema_version: SCHEMA_VERSION,
        command: "thresholds".into(),
        spec: report::SpecDoc::new(&spec),
        closed_form,
        numeric: NumericDoc::new(&NumericThresholds::locate(&spec)?),
    };
    Ok(Output::ok(match format {
        Format::Structured => to_json(&doc)?,
        Format::Delimited => to_csv(&doc.rows())?,
    }))
}

fn cmd_verify(config: &RunConfig, format: Format) -> Result<Output, CliError> {
    let grid = config.grid(|| SweepGrid::default_verification().axes)?;
    if !grid.closed_form_supported() {
        let spec = config.spec()?;
        let thresholds = ThresholdsDoc {
            schema_version: SCHEMA_VERSION,
            command: "verify".into(),
            spec: report::SpecDoc::new(&spec),
            closed_form: None,
            numeric: NumericDoc::new(&NumericThresholds::locate(&spec)?),
        };
        let body = match format {
            Format::Structured => to_json(&VerifyDoc {
                schema_version: SCHEMA_VERSION,
                command: "verify".into(),
                mode: VerifyMode::Numeric,
                passed: true,
                summary: None,
                diagnostics: Vec::new(),
                disagreements: Vec::new(),
                numeric: Some(thresholds.numeric.clone()),
            })?,
            Format::Delimited => to_csv(&thresholds.rows())?,
        };
        return Ok(Output {
            body,
            notes: vec![
                "closed-form comparison needs n_packets = 2 at every grid point; \
                 reporting numeric thresholds at the base point instead"
                    .into(),
            ],
            passed: true,
        });
    }

    let outcome = sweep(&grid)?;
    let summary = SummaryDoc::from(&outcome.summary);
    let passed = summary.disagreements == 0;
    let mut notes = vec![format!(
        "{} disagreements, {} boundary, {} unsatisfiable, {} of {} points evaluated",
        summary.disagreements,
        summary.boundary,
        summary.unsatisfiable,
        summary.evaluated,
        summary.points
    )];
    notes.extend(outcome.diagnostics.iter().cloned());
    let body = match format {
        Format::Structured => to_json(&VerifyDoc {
            schema_version: SCHEMA_VERSION,
            command: "verify".into(),
            mode: VerifyMode::ClosedForm,
            passed,
            summary: Some(summary),
            diagnostics: outcome.diagnostics.clone(),
            disagreements: outcome
                .rows
                .iter()
                .filter(|r| r.is_disagreement())
                .map(SweepRowDoc::new)
                .collect(),
            numeric: None,
        })?,
        Format::Delimited => to_csv(
            &outcome
                .rows
                .iter()
                .map(SweepRowDoc::new)
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Output {
        body,
        notes,
        passed,
    })
}

fn cmd_simulate(config: &RunConfig, format: Format, workers: usize) -> Result<Output, CliError> {
    let sim_config = config.sim_config(workers)?;
    let report = solve(&sim_config.spec)?;
    let sim = simulate(&sim_config, &report.strategy)?;
    let reference = failure_reference(&sim_config.spec, &report);
    let doc = SimulateDoc::new(&sim_config.spec, &sim, &reference);
    if let Some(row) = doc.exits.iter().find(|r| !r.within_bound) {
        return Err(CliError::Internal(format!(
            "exposure loss {} at step {} exceeds the bound {}",
            row.max_exposure_loss, row.step, row.exposure_bound
        )));
    }
    Ok(Output::ok(match format {
        Format::Structured => to_json(&doc)?,
        Format::Delimited => to_csv(&doc.exits)?,
    }))
}

fn cmd_sweep(config: &RunConfig, format: Format) -> Result<Output, CliError> {
    let grid = config.grid(Vec::new)?;
    let outcome = sweep(&grid)?;
    let doc = SweepDoc::new(&outcome);
    let body = match format {
        Format::Structured => to_json(&doc)?,
        Format::Delimited => to_csv(&doc.rows)?,
    };
    Ok(Output {
        body,
        notes: outcome.diagnostics,
        passed: true,
    })
}

fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}
