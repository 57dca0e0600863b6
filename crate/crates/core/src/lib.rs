//! Game analysis and simulation of cross-ledger swaps executed as
//! packetized payments.
//!
//! The swap is modelled as a finite extensive-form game between Alice (who
//! sells asset 1) and Bob (who pays in asset 2), each honest or malicious with
//! a known prior, over a symmetric binomial price lattice. The crate solves it
//! by backward induction, checks the solution against a brute-force oracle,
//! evaluates the closed-form honesty and collateral thresholds of the
//! two-packet game, and estimates failure rates by seeded simulation.
//!
//! All numerics are generic over [`Scalar`]; use [`Exact`] when threshold
//! boundaries must be decided exactly and `f64` for sweeps and sampling.

pub mod analysis;
pub mod error;
pub mod game;
pub mod market;
pub mod montecarlo;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use game::{
    payoff_y, terminal_outcome, transfer_schedule, utility, Action, AgentId, AgentType, Choice,
    Collateral, CollateralDisposition, DecisionNode, Exit, GameSpec, History, HistoryState, Move,
    Outcome, Population, Preferences, Settlement,
};
pub use market::{Lattice, MarketModel, PriceNode};
pub use scalar::{ratio, Scalar};
pub use solver::{audit_honesty, oracle_value, solve, HonestyAudit, SolveReport, StrategyProfile};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type GameSpecF64 = GameSpec<f64>;
pub type ExactGameSpec = GameSpec<Exact>;
pub type SolveReportF64 = SolveReport<f64>;
pub type ExactSolveReport = SolveReport<Exact>;
pub type MarketModelF64 = MarketModel<f64>;
pub type ExactMarketModel = MarketModel<Exact>;
