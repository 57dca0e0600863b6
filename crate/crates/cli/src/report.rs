//! Output documents. Structured output is one JSON document per run;
//! delimited output is CSV with a header row. Every document and every CSV
//! row carries `schema_version`. Floating-point values are rounded to 12
//! significant digits before they are written.

use ppswap::analysis::{FailureReference, SweepOutcome, SweepRow, SweepSummary, ThresholdSet};
use ppswap::montecarlo::{exit_profile, ExitRow, SimResult};
use ppswap::solver::search::{Flip, NumericThresholds};
use ppswap::{AgentId, AgentType, Choice, GameSpecF64, SolveReportF64};
use serde::{Deserialize, Serialize};

use crate::config::Disposition;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDoc {
    pub p0: f64,
    pub delta: f64,
    pub n_packets: usize,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub collateral_a: f64,
    pub collateral_b: f64,
    pub collateral_disposition: Disposition,
}

impl SpecDoc {
    pub fn new(spec: &GameSpecF64) -> Self {
        Self {
            p0: round12(*spec.p0()),
            delta: round12(*spec.delta()),
            n_packets: spec.n_packets,
            alpha_a: round12(spec.preferences.alpha_alice_honest),
            alpha_b: round12(spec.preferences.alpha_bob_honest),
            mu_a: round12(spec.population.mu_alice),
            mu_b: round12(spec.population.mu_bob),
            collateral_a: round12(spec.collateral.alice),
            collateral_b: round12(spec.collateral.bob),
            collateral_disposition: spec.collateral.disposition.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionDoc {
    Continue,
    Stop,
}

impl From<Choice> for ActionDoc {
    fn from(c: Choice) -> Self {
        match c {
            Choice::Continue => ActionDoc::Continue,
            Choice::Stop => ActionDoc::Stop,
        }
    }
}

/// One (agent, type) decision at a lattice node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub schema_version: u32,
    pub agent: String,
    pub agent_type: String,
    pub step: usize,
    pub up_moves: usize,
    pub price: f64,
    pub action: ActionDoc,
    pub continue_value: f64,
    pub stop_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingDoc {
    pub agent: String,
    pub step: usize,
    pub up_moves: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExAnteDoc {
    pub agent: String,
    pub agent_type: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDoc {
    pub schema_version: u32,
    pub command: String,
    pub spec: SpecDoc,
    pub strictly_positive_prices: bool,
    pub willing_alice: bool,
    pub willing_bob: bool,
    /// Steps at which the malicious mover stops at every price node.
    pub malicious_stop_steps: Vec<usize>,
    pub malicious_continue_everywhere: bool,
    pub binding: Vec<BindingDoc>,
    pub ex_ante: Vec<ExAnteDoc>,
    pub nodes: Vec<NodeRow>,
}

impl SolveDoc {
    pub fn new(spec: &GameSpecF64, report: &SolveReportF64) -> Self {
        let n = spec.n_packets;
        let stops = report.malicious_stops(0);
        let malicious_stop_steps = (0..=n)
            .filter(|&k| stops.iter().filter(|s| s.step == k).count() == k + 1)
            .collect();
        let nodes = report
            .strategy
            .entries()
            .map(|(agent, agent_type, node, choice)| {
                let v = &report.node_values[&(agent, agent_type, node)];
                NodeRow {
                    schema_version: SCHEMA_VERSION,
                    agent: agent.name().into(),
                    agent_type: agent_type.name().into(),
                    step: node.step,
                    up_moves: node.up_moves,
                    price: round12(spec.price(node)),
                    action: choice.into(),
                    continue_value: round12(v.continue_value),
                    stop_value: round12(v.stop_value),
                }
            })
            .collect();
        let ex_ante = AgentId::ALL
            .iter()
            .flat_map(|&agent| {
                AgentType::ALL.map(|t| ExAnteDoc {
                    agent: agent.name().into(),
                    agent_type: t.name().into(),
                    value: round12(*report.ex_ante(agent, t)),
                })
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            command: "solve".into(),
            spec: SpecDoc::new(spec),
            strictly_positive_prices: report.strictly_positive_prices,
            willing_alice: report.honesty.willing_alice,
            willing_bob: report.honesty.willing_bob,
            malicious_stop_steps,
            malicious_continue_everywhere: report.malicious_continues_everywhere(),
            binding: report
                .honesty
                .binding
                .iter()
                .map(|b| BindingDoc {
                    agent: b.agent.name().into(),
                    step: b.node.step,
                    up_moves: b.node.up_moves,
                    margin: round12(b.margin),
                })
                .collect(),
            ex_ante,
            nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormDoc {
    pub bob_mu_min: f64,
    pub alice_alpha_min: f64,
    pub alice_mu_min: f64,
    pub collateral_bob_min: f64,
    pub collateral_alice_min: f64,
    pub bob_mu_unsatisfiable: bool,
    pub alice_mu_unsatisfiable: bool,
}

impl ClosedFormDoc {
    pub fn new(t: &ThresholdSet<f64>) -> Self {
        Self {
            bob_mu_min: round12(t.bob_mu_min),
            alice_alpha_min: round12(t.alice_alpha_min),
            alice_mu_min: round12(t.alice_mu_min),
            collateral_bob_min: round12(t.collateral_bob_min),
            collateral_alice_min: round12(t.collateral_alice_min),
            bob_mu_unsatisfiable: t.bob_mu_unsatisfiable(),
            alice_mu_unsatisfiable: t.alice_mu_unsatisfiable(),
        }
    }

    fn values(&self) -> [(&'static str, f64); 5] {
        [
            ("bob_mu_min", self.bob_mu_min),
            ("alice_alpha_min", self.alice_alpha_min),
            ("alice_mu_min", self.alice_mu_min),
            ("collateral_bob_min", self.collateral_bob_min),
            ("collateral_alice_min", self.collateral_alice_min),
        ]
    }
}

/// Where a verdict flips along a scanned parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    At(f64),
    /// Holds over the whole scanned range.
    Always,
    /// Fails over the whole scanned range.
    Never,
}

impl From<Flip> for Crossing {
    fn from(f: Flip) -> Self {
        match f {
            Flip::At(x) => Crossing::At(round12(x)),
            Flip::Always => Crossing::Always,
            Flip::Never => Crossing::Never,
        }
    }
}

impl Crossing {
    fn parts(self) -> (&'static str, Option<f64>) {
        match self {
            Crossing::At(x) => ("at", Some(x)),
            Crossing::Always => ("always", None),
            Crossing::Never => ("never", None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericDoc {
    pub bob_mu_min: Crossing,
    pub alice_alpha_min: Crossing,
    pub alice_mu_min: Crossing,
    pub collateral_bob_min: Crossing,
    pub collateral_alice_min: Crossing,
}

impl NumericDoc {
    pub fn new(t: &NumericThresholds) -> Self {
        Self {
            bob_mu_min: t.bob_mu_min.into(),
            alice_alpha_min: t.alice_alpha_min.into(),
            alice_mu_min: t.alice_mu_min.into(),
            collateral_bob_min: t.collateral_bob_min.into(),
            collateral_alice_min: t.collateral_alice_min.into(),
        }
    }

    fn values(&self) -> [(&'static str, Crossing); 5] {
        [
            ("bob_mu_min", self.bob_mu_min),
            ("alice_alpha_min", self.alice_alpha_min),
            ("alice_mu_min", self.alice_mu_min),
            ("collateral_bob_min", self.collateral_bob_min),
            ("collateral_alice_min", self.collateral_alice_min),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsDoc {
    pub schema_version: u32,
    pub command: String,
    pub spec: SpecDoc,
    /// Present only for two-packet specs.
    pub closed_form: Option<ClosedFormDoc>,
    pub numeric: NumericDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub schema_version: u32,
    pub threshold: String,
    pub method: String,
    pub crossing: String,
    pub value: Option<f64>,
}

impl ThresholdsDoc {
    pub fn rows(&self) -> Vec<ThresholdRow> {
        let closed = self
            .closed_form
            .iter()
            .flat_map(|c| c.values())
            .map(|(name, v)| ThresholdRow {
                schema_version: SCHEMA_VERSION,
                threshold: name.into(),
                method: "closed_form".into(),
                crossing: "at".into(),
                value: Some(v),
            });
        let numeric = self.numeric.values().into_iter().map(|(name, c)| {
            let (crossing, value) = c.parts();
            ThresholdRow {
                schema_version: SCHEMA_VERSION,
                threshold: name.into(),
                method: "numeric".into(),
                crossing: crossing.into(),
                value,
            }
        });
        closed.chain(numeric).collect()
    }
}

/// One grid point of a sweep. Closed-form columns are empty when the point
/// has no closed form or the comparison does not apply there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRowDoc {
    pub schema_version: u32,
    pub index: usize,
    pub p0: f64,
    pub delta: f64,
    pub n_packets: usize,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub collateral_a: f64,
    pub collateral_b: f64,
    pub collateral_disposition: Disposition,
    pub willing_alice: bool,
    pub willing_bob: bool,
    pub malicious_continue_all: bool,
    pub malicious_stop_after_open: bool,
    pub failure_probability: f64,
    pub bob_mu_min: Option<f64>,
    pub alice_alpha_min: Option<f64>,
    pub alice_mu_min: Option<f64>,
    pub collateral_bob_min: Option<f64>,
    pub collateral_alice_min: Option<f64>,
    pub expected_willing_alice: Option<bool>,
    pub expected_willing_bob: Option<bool>,
    pub expected_malicious_continue_all: Option<bool>,
    pub expected_malicious_stop_after_open: Option<bool>,
    pub boundary: bool,
    pub unsatisfiable: bool,
    pub agree: Option<bool>,
}

impl SweepRowDoc {
    pub fn new(row: &SweepRow) -> Self {
        let p = &row.point;
        let cf = row.closed_form.as_ref();
        let t = cf.map(|c| &c.thresholds);
        Self {
            schema_version: SCHEMA_VERSION,
            index: row.index,
            p0: round12(p.p0),
            delta: round12(p.delta),
            n_packets: p.n_packets,
            alpha_a: round12(p.alpha_a),
            alpha_b: round12(p.alpha_b),
            mu_a: round12(p.mu_a),
            mu_b: round12(p.mu_b),
            collateral_a: round12(p.collateral_a),
            collateral_b: round12(p.collateral_b),
            collateral_disposition: p.disposition.into(),
            willing_alice: row.willing_alice,
            willing_bob: row.willing_bob,
            malicious_continue_all: row.malicious_continue_all,
            malicious_stop_after_open: row.malicious_stop_after_open,
            failure_probability: round12(row.failure_probability),
            bob_mu_min: t.map(|t| round12(t.bob_mu_min)),
            alice_alpha_min: t.map(|t| round12(t.alice_alpha_min)),
            alice_mu_min: t.map(|t| round12(t.alice_mu_min)),
            collateral_bob_min: t.map(|t| round12(t.collateral_bob_min)),
            collateral_alice_min: t.map(|t| round12(t.collateral_alice_min)),
            expected_willing_alice: cf.and_then(|c| c.willing_alice),
            expected_willing_bob: cf.and_then(|c| c.willing_bob),
            expected_malicious_continue_all: cf.map(|c| c.malicious_continue_all),
            expected_malicious_stop_after_open: cf.and_then(|c| c.malicious_stop_after_open),
            boundary: row.boundary,
            unsatisfiable: row.unsatisfiable,
            agree: row.agree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub points: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub disagreements: usize,
    pub boundary: usize,
    pub unsatisfiable: usize,
}

impl From<&SweepSummary> for SummaryDoc {
    fn from(s: &SweepSummary) -> Self {
        Self {
            points: s.points,
            evaluated: s.evaluated,
            skipped: s.skipped,
            disagreements: s.disagreements,
            boundary: s.boundary,
            unsatisfiable: s.unsatisfiable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDoc {
    pub schema_version: u32,
    pub command: String,
    pub summary: SummaryDoc,
    pub diagnostics: Vec<String>,
    pub rows: Vec<SweepRowDoc>,
}

impl SweepDoc {
    pub fn new(outcome: &SweepOutcome) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "sweep".into(),
            summary: (&outcome.summary).into(),
            diagnostics: outcome.diagnostics.clone(),
            rows: outcome.rows.iter().map(SweepRowDoc::new).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Solver verdicts compared with the two-packet closed forms.
    ClosedForm,
    /// The grid has other packet counts; thresholds located numerically.
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub schema_version: u32,
    pub command: String,
    pub mode: VerifyMode,
    pub passed: bool,
    pub summary: Option<SummaryDoc>,
    pub diagnostics: Vec<String>,
    /// Interior rows where solver and closed form disagree.
    pub disagreements: Vec<SweepRowDoc>,
    /// Numeric thresholds at the base point, in numeric mode.
    pub numeric: Option<NumericDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDoc {
    /// `1 - mu_a mu_b`.
    pub rate: f64,
    /// Whether the solved strategies meet the conditions under which the
    /// reference rate is exact.
    pub applies: bool,
    pub malicious_alice_defects: bool,
    pub malicious_bob_defects: bool,
    pub willing_alice: bool,
    pub willing_bob: bool,
    pub within_three_std_errors: bool,
}

impl ReferenceDoc {
    pub fn new(reference: &FailureReference<f64>, sim: &SimResult) -> Self {
        Self {
            rate: round12(reference.rate),
            applies: reference.applies(),
            malicious_alice_defects: reference.malicious_alice_defects,
            malicious_bob_defects: reference.malicious_bob_defects,
            willing_alice: reference.willing_alice,
            willing_bob: reference.willing_bob,
            within_three_std_errors: (sim.failure_rate - reference.rate).abs()
                <= 3.0 * sim.std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitRowDoc {
    pub schema_version: u32,
    /// Number of transfers completed before the exit; `n_packets + 1` is a
    /// completed swap.
    pub step: usize,
    pub count: u64,
    pub frequency: f64,
    pub max_exposure_loss: f64,
    pub mean_exposure_loss: Option<f64>,
    pub max_financial_loss: f64,
    pub exposure_bound: f64,
    pub within_bound: bool,
}

impl From<&ExitRow> for ExitRowDoc {
    fn from(r: &ExitRow) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            step: r.step,
            count: r.count,
            frequency: round12(r.frequency),
            max_exposure_loss: round12(r.max_exposure_loss),
            mean_exposure_loss: r.mean_exposure_loss.map(round12),
            max_financial_loss: round12(r.max_financial_loss),
            exposure_bound: round12(r.exposure_bound),
            within_bound: r.within_bound(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityDoc {
    pub agent: String,
    pub agent_type: String,
    pub count: u64,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateDoc {
    pub schema_version: u32,
    pub command: String,
    pub spec: SpecDoc,
    pub seed: u64,
    pub samples: u64,
    pub failures: u64,
    pub completions: u64,
    pub failure_rate: f64,
    pub std_error: f64,
    pub reference: ReferenceDoc,
    pub exit_histogram: Vec<u64>,
    pub exits: Vec<ExitRowDoc>,
    pub mean_utility: Vec<UtilityDoc>,
}

impl SimulateDoc {
    pub fn new(spec: &GameSpecF64, sim: &SimResult, reference: &FailureReference<f64>) -> Self {
        let mean_utility = AgentId::ALL
            .iter()
            .flat_map(|&agent| {
                AgentType::ALL.map(|t| UtilityDoc {
                    agent: agent.name().into(),
                    agent_type: t.name().into(),
                    count: sim.type_count(agent, t),
                    mean: sim.mean_utility(agent, t).map(round12),
                })
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            command: "simulate".into(),
            spec: SpecDoc::new(spec),
            seed: sim.seed,
            samples: sim.samples,
            failures: sim.failures,
            completions: sim.completions,
            failure_rate: round12(sim.failure_rate),
            std_error: round12(sim.std_error),
            reference: ReferenceDoc::new(reference, sim),
            exit_histogram: sim.exit_histogram.clone(),
            exits: exit_profile(sim).iter().map(ExitRowDoc::from).collect(),
            mean_utility,
        }
    }
}
