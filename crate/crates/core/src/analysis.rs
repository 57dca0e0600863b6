//! Closed-form thresholds of the two-packet game, the failure-rate formula,
//! and grid sweeps that cross-check both against the solver.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{AgentId, CollateralDisposition, GameSpec, Population};
use crate::scalar::Scalar;
use crate::solver::{solve, SolveReport};

/// Closed-form thresholds of the two-packet game.
///
/// Honest Bob is willing iff `mu_a > bob_mu_min`; honest Alice iff
/// `alpha_a > alice_alpha_min` and `mu_b > alice_mu_min`; malicious agents
/// continue everywhere iff collateral exceeds both collateral minima. The
/// honesty conditions assume no collateral is posted.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet<T> {
    /// `2 p0 / (4 alpha_b + p0 - delta)`
    pub bob_mu_min: T,
    /// `(p0 + 2 delta) / 4`
    pub alice_alpha_min: T,
    /// `p0 / (4 alpha_a + p0)`
    pub alice_mu_min: T,
    /// `(p0 + delta) / 2`
    pub collateral_bob_min: T,
    /// `(p0 + 2 delta) / 2`
    pub collateral_alice_min: T,
}

pub fn thresholds<T: Scalar>(
    p0: T,
    delta: T,
    alpha_a: T,
    alpha_b: T,
    n_packets: usize,
) -> Result<ThresholdSet<T>> {
    if n_packets != 2 {
        return Err(Error::UnsupportedClosedForm(n_packets));
    }
    if p0 <= T::zero() {
        return Err(Error::InvalidSpec(format!("p0 must be positive, got {p0}")));
    }
    if delta < T::zero() || delta.clone() * T::two() > p0 {
        return Err(Error::InvalidSpec(format!(
            "need 0 <= delta <= p0 / 2, got delta = {delta}"
        )));
    }
    if alpha_a < T::zero() || alpha_b < T::zero() {
        return Err(Error::InvalidSpec("alphas must be non-negative".into()));
    }
    let four = T::two() * T::two();
    Ok(ThresholdSet {
        bob_mu_min: T::two() * p0.clone() / (four.clone() * alpha_b + p0.clone() - delta.clone()),
        alice_alpha_min: (p0.clone() + T::two() * delta.clone()) / four.clone(),
        alice_mu_min: p0.clone() / (four * alpha_a + p0.clone()),
        collateral_bob_min: (p0.clone() + delta.clone()) / T::two(),
        collateral_alice_min: (p0 + T::two() * delta) / T::two(),
    })
}

impl<T: Scalar> ThresholdSet<T> {
    pub fn for_spec(spec: &GameSpec<T>) -> Result<Self> {
        thresholds(
            spec.p0().clone(),
            spec.delta().clone(),
            spec.preferences.alpha_alice_honest.clone(),
            spec.preferences.alpha_bob_honest.clone(),
            spec.n_packets,
        )
    }

    /// No prior in `[0, 1]` makes honest Bob willing.
    pub fn bob_mu_unsatisfiable(&self) -> bool {
        self.bob_mu_min >= T::one()
    }

    pub fn alice_mu_unsatisfiable(&self) -> bool {
        self.alice_mu_min >= T::one()
    }

    pub fn bob_willing(&self, mu_a: &T) -> bool {
        *mu_a > self.bob_mu_min
    }

    pub fn alice_willing(&self, alpha_a: &T, mu_b: &T) -> bool {
        *alpha_a > self.alice_alpha_min && *mu_b > self.alice_mu_min
    }

    pub fn malicious_continue(&self, collateral_a: &T, collateral_b: &T) -> bool {
        *collateral_b > self.collateral_bob_min && *collateral_a > self.collateral_alice_min
    }
}

/// Share of swaps that fail when only honest pairs complete: `1 - mu_a mu_b`.
pub fn failure_probability<T: Scalar>(population: &Population<T>) -> T {
    T::one() - population.mu_alice.clone() * population.mu_bob.clone()
}

/// The failure-rate formula together with the conditions under which it is
/// the true failure rate of a solved game.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReference<T> {
    pub rate: T,
    pub malicious_alice_defects: bool,
    pub malicious_bob_defects: bool,
    pub willing_alice: bool,
    pub willing_bob: bool,
}

impl<T> FailureReference<T> {
    /// Every pairing with a malicious agent fails, so the formula is exact.
    /// Willingness is reported separately: honest agents continue either way.
    pub fn applies(&self) -> bool {
        self.malicious_alice_defects && self.malicious_bob_defects
    }
}

pub fn failure_reference<T: Scalar>(
    spec: &GameSpec<T>,
    report: &SolveReport<T>,
) -> FailureReference<T> {
    FailureReference {
        rate: failure_probability(&spec.population),
        malicious_alice_defects: report.malicious_always_defects(AgentId::Alice),
        malicious_bob_defects: report.malicious_always_defects(AgentId::Bob),
        willing_alice: report.honesty.willing_alice,
        willing_bob: report.honesty.willing_bob,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    P0,
    Delta,
    AlphaA,
    AlphaB,
    MuA,
    MuB,
    CollateralA,
    CollateralB,
    NPackets,
}

impl SweepParam {
    pub const ALL: [SweepParam; 9] = [
        SweepParam::P0,
        SweepParam::Delta,
        SweepParam::AlphaA,
        SweepParam::AlphaB,
        SweepParam::MuA,
        SweepParam::MuB,
        SweepParam::CollateralA,
        SweepParam::CollateralB,
        SweepParam::NPackets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::P0 => "p0",
            SweepParam::Delta => "delta",
            SweepParam::AlphaA => "alpha_a",
            SweepParam::AlphaB => "alpha_b",
            SweepParam::MuA => "mu_a",
            SweepParam::MuB => "mu_b",
            SweepParam::CollateralA => "collateral_a",
            SweepParam::CollateralB => "collateral_b",
            SweepParam::NPackets => "n_packets",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidGrid(format!("unknown sweep parameter `{s}`")))
    }
}

/// One evenly spaced axis, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn new(param: SweepParam, from: f64, to: f64, steps: usize) -> Self {
        Self {
            param,
            from,
            to,
            steps,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let width = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.to
                } else {
                    self.from + width * i as f64
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidGrid(format!(
                "axis `{}` has zero steps",
                self.param
            )));
        }
        if !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "axis `{}` has a non-finite bound",
                self.param
            )));
        }
        if self.param == SweepParam::NPackets
            && self.values().iter().any(|v| v.fract() != 0.0 || *v < 1.0)
        {
            return Err(Error::InvalidGrid(
                "n_packets axis must take positive integer values".into(),
            ));
        }
        Ok(())
    }
}

/// All parameters of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p0: f64,
    pub delta: f64,
    pub n_packets: usize,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub collateral_a: f64,
    pub collateral_b: f64,
    pub disposition: CollateralDisposition,
}

impl Default for SweepPoint {
    fn default() -> Self {
        Self {
            p0: 100.0,
            delta: 10.0,
            n_packets: 2,
            alpha_a: 0.0,
            alpha_b: 0.0,
            mu_a: 1.0,
            mu_b: 1.0,
            collateral_a: 0.0,
            collateral_b: 0.0,
            disposition: CollateralDisposition::Burned,
        }
    }
}

impl SweepPoint {
    pub fn get(&self, param: SweepParam) -> f64 {
        match param {
            SweepParam::P0 => self.p0,
            SweepParam::Delta => self.delta,
            SweepParam::AlphaA => self.alpha_a,
            SweepParam::AlphaB => self.alpha_b,
            SweepParam::MuA => self.mu_a,
            SweepParam::MuB => self.mu_b,
            SweepParam::CollateralA => self.collateral_a,
            SweepParam::CollateralB => self.collateral_b,
            SweepParam::NPackets => self.n_packets as f64,
        }
    }

    pub fn set(&mut self, param: SweepParam, value: f64) {
        match param {
            SweepParam::P0 => self.p0 = value,
            SweepParam::Delta => self.delta = value,
            SweepParam::AlphaA => self.alpha_a = value,
            SweepParam::AlphaB => self.alpha_b = value,
            SweepParam::MuA => self.mu_a = value,
            SweepParam::MuB => self.mu_b = value,
            SweepParam::CollateralA => self.collateral_a = value,
            SweepParam::CollateralB => self.collateral_b = value,
            SweepParam::NPackets => self.n_packets = value as usize,
        }
    }

    pub fn to_spec(&self) -> Result<GameSpec<f64>> {
        let spec = GameSpec::new(self.p0, self.delta, self.n_packets)?
            .with_preferences(self.alpha_a, self.alpha_b)
            .with_population(self.mu_a, self.mu_b)
            .with_collateral(self.collateral_a, self.collateral_b)
            .with_disposition(self.disposition);
        spec.validate()?;
        Ok(spec)
    }
}

/// Cartesian grid over a base point. Points are ordered with the last axis
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub base: SweepPoint,
    pub axes: Vec<SweepAxis>,
}

impl SweepGrid {
    pub fn new(base: SweepPoint, axes: Vec<SweepAxis>) -> Self {
        Self { base, axes }
    }

    /// Grid used by `verify` when none is configured: the two honesty priors,
    /// both completion preferences and both collateral amounts around the
    /// `p0 = 100, delta = 10` baseline.
    pub fn default_verification() -> Self {
        Self::new(
            SweepPoint::default(),
            vec![
                SweepAxis::new(SweepParam::MuA, 0.0, 1.0, 11),
                SweepAxis::new(SweepParam::AlphaB, 0.0, 100.0, 11),
                SweepAxis::new(SweepParam::AlphaA, 0.0, 80.0, 5),
                SweepAxis::new(SweepParam::MuB, 0.0, 1.0, 5),
                SweepAxis::new(SweepParam::CollateralA, 0.0, 70.0, 3),
                SweepAxis::new(SweepParam::CollateralB, 0.0, 70.0, 3),
            ],
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (i, axis) in self.axes.iter().enumerate() {
            axis.validate()?;
            if self.axes[..i].iter().any(|a| a.param == axis.param) {
                return Err(Error::InvalidGrid(format!(
                    "axis `{}` given twice",
                    axis.param
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(SweepAxis::values).collect();
        let mut points = vec![self.base.clone()];
        for (axis, vals) in self.axes.iter().zip(&values) {
            points = points
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.set(axis.param, v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// Whether every point is a two-packet game.
    pub fn closed_form_supported(&self) -> bool {
        self.points().iter().all(|p| p.n_packets == 2)
    }
}

/// What the closed forms predict at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormVerdicts {
    pub thresholds: ThresholdSet<f64>,
    /// `None` when collateral is posted; the honesty formulas assume none.
    pub willing_alice: Option<bool>,
    pub willing_bob: Option<bool>,
    pub malicious_continue_all: bool,
    /// `None` when collateral is posted.
    pub malicious_stop_after_open: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub point: SweepPoint,
    pub willing_alice: bool,
    pub willing_bob: bool,
    pub malicious_continue_all: bool,
    /// Malicious movers stop at every node after the opening decision.
    pub malicious_stop_after_open: bool,
    pub failure_probability: f64,
    pub closed_form: Option<ClosedFormVerdicts>,
    /// Within [`BOUNDARY_REL_TOL`] of a closed-form threshold.
    pub boundary: bool,
    pub unsatisfiable: bool,
    /// `None` without closed forms.
    pub agree: Option<bool>,
}

impl SweepRow {
    pub fn is_disagreement(&self) -> bool {
        self.agree == Some(false) && !self.boundary
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub points: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub disagreements: usize,
    pub boundary: usize,
    pub unsatisfiable: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub diagnostics: Vec<String>,
    pub summary: SweepSummary,
}

/// Points this close to a threshold, relatively, are boundary points.
pub const BOUNDARY_REL_TOL: f64 = 1e-9;

fn near(x: f64, threshold: f64) -> bool {
    (x - threshold).abs() <= BOUNDARY_REL_TOL * threshold.abs().max(f64::MIN_POSITIVE)
}

pub fn evaluate_point(index: usize, point: &SweepPoint) -> Result<SweepRow> {
    let spec = point.to_spec()?;
    let report = solve(&spec)?;
    let willing_alice = report.honesty.willing_alice;
    let willing_bob = report.honesty.willing_bob;
    let malicious_continue_all = report.malicious_continues_everywhere();
    let malicious_stop_after_open = report.malicious_stops_everywhere_from(1);

    let (closed_form, boundary, unsatisfiable, agree) = match ThresholdSet::for_spec(&spec) {
        Ok(t) => {
            let no_collateral = spec.collateral.is_zero();
            let verdicts = ClosedFormVerdicts {
                willing_alice: no_collateral.then(|| t.alice_willing(&point.alpha_a, &point.mu_b)),
                willing_bob: no_collateral.then(|| t.bob_willing(&point.mu_a)),
                malicious_continue_all: t
                    .malicious_continue(&point.collateral_a, &point.collateral_b),
                malicious_stop_after_open: no_collateral.then_some(true),
                thresholds: t,
            };
            let t = &verdicts.thresholds;
            let boundary = near(point.mu_a, t.bob_mu_min)
                || near(point.alpha_a, t.alice_alpha_min)
                || near(point.mu_b, t.alice_mu_min)
                || near(point.collateral_b, t.collateral_bob_min)
                || near(point.collateral_a, t.collateral_alice_min);
            let unsatisfiable = t.bob_mu_unsatisfiable() || t.alice_mu_unsatisfiable();
            let agree = verdicts.willing_alice.is_none_or(|v| v == willing_alice)
                && verdicts.willing_bob.is_none_or(|v| v == willing_bob)
                && verdicts.malicious_continue_all == malicious_continue_all
                && verdicts
                    .malicious_stop_after_open
                    .is_none_or(|v| v == malicious_stop_after_open);
            (Some(verdicts), boundary, unsatisfiable, Some(agree))
        }
        Err(Error::UnsupportedClosedForm(_)) => (None, false, false, None),
        Err(e) => return Err(e),
    };

    Ok(SweepRow {
        index,
        point: point.clone(),
        willing_alice,
        willing_bob,
        malicious_continue_all,
        malicious_stop_after_open,
        failure_probability: failure_probability(&spec.population),
        closed_form,
        boundary,
        unsatisfiable,
        agree,
    })
}

/// Solves every grid point, in parallel, and compares solver verdicts with
/// the closed forms. Row order is grid order. Points that fail validation are
/// skipped and reported in `diagnostics`.
pub fn sweep(grid: &SweepGrid) -> Result<SweepOutcome> {
    grid.validate()?;
    let points = grid.points();
    let results: Vec<Result<SweepRow>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate_point(i, p))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut diagnostics = Vec::new();
    let mut summary = SweepSummary {
        points: points.len(),
        ..SweepSummary::default()
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => {
                summary.evaluated += 1;
                summary.disagreements += usize::from(row.is_disagreement());
                summary.boundary += usize::from(row.boundary);
                summary.unsatisfiable += usize::from(row.unsatisfiable);
                rows.push(row);
            }
            Err(e) => {
                summary.skipped += 1;
                diagnostics.push(format!("point {i}: {e}"));
            }
        }
    }
    Ok(SweepOutcome {
        rows,
        diagnostics,
        summary,
    })
}
