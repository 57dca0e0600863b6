//! Run configuration read from a TOML document.
//!
//! Every key is optional; missing keys take the baseline values
//! `p0 = 100, delta = 10, n_packets = 2`, zero preferences and collateral,
//! all-honest populations, `seed = 42` and `samples = 100000`.

use std::path::Path;

use ppswap::analysis::{SweepAxis, SweepGrid, SweepParam, SweepPoint};
use ppswap::montecarlo::SimConfig;
use ppswap::{CollateralDisposition, GameSpecF64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    #[default]
    Burned,
    Transferred,
}

impl From<Disposition> for CollateralDisposition {
    fn from(d: Disposition) -> Self {
        match d {
            Disposition::Burned => CollateralDisposition::Burned,
            Disposition::Transferred => CollateralDisposition::TransferredToCounterparty,
        }
    }
}

impl From<CollateralDisposition> for Disposition {
    fn from(d: CollateralDisposition) -> Self {
        match d {
            CollateralDisposition::Burned => Disposition::Burned,
            CollateralDisposition::TransferredToCounterparty => Disposition::Transferred,
        }
    }
}

/// One `[[sweep]]` block: `steps` evenly spaced values of `param` from
/// `from` to `to` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
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
    pub seed: u64,
    pub samples: u64,
    pub sweep: Vec<SweepBlock>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = SweepPoint::default();
        Self {
            p0: base.p0,
            delta: base.delta,
            n_packets: base.n_packets,
            alpha_a: base.alpha_a,
            alpha_b: base.alpha_b,
            mu_a: base.mu_a,
            mu_b: base.mu_b,
            collateral_a: base.collateral_a,
            collateral_b: base.collateral_b,
            collateral_disposition: base.disposition.into(),
            seed: 42,
            samples: 100_000,
            sweep: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Invalid(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn point(&self) -> SweepPoint {
        SweepPoint {
            p0: self.p0,
            delta: self.delta,
            n_packets: self.n_packets,
            alpha_a: self.alpha_a,
            alpha_b: self.alpha_b,
            mu_a: self.mu_a,
            mu_b: self.mu_b,
            collateral_a: self.collateral_a,
            collateral_b: self.collateral_b,
            disposition: self.collateral_disposition.into(),
        }
    }

    pub fn spec(&self) -> Result<GameSpecF64, CliError> {
        Ok(self.point().to_spec()?)
    }

    pub fn sim_config(&self, workers: usize) -> Result<SimConfig<f64>, CliError> {
        Ok(SimConfig::new(self.spec()?, self.samples, self.seed).with_workers(workers))
    }

    pub fn axes(&self) -> Result<Vec<SweepAxis>, CliError> {
        self.sweep
            .iter()
            .map(|b| {
                let param: SweepParam = b.param.parse().map_err(|_| {
                    let known: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
                    CliError::Invalid(format!(
                        "sweep param `{}` is not one of {}",
                        b.param,
                        known.join(", ")
                    ))
                })?;
                Ok(SweepAxis::new(param, b.from, b.to, b.steps))
            })
            .collect()
    }

    /// The configured grid, or `fallback` axes around the configured point
    /// when no `[[sweep]]` block is present.
    pub fn grid(&self, fallback: impl FnOnce() -> Vec<SweepAxis>) -> Result<SweepGrid, CliError> {
        let axes = if self.sweep.is_empty() {
            fallback()
        } else {
            self.axes()?
        };
        let grid = SweepGrid::new(self.point(), axes);
        grid.validate()?;
        Ok(grid)
    }
}
