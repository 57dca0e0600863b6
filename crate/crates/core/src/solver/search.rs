//! Numerical threshold location by bisection over solver verdicts.
//!
//! Works for any packet count. Each search assumes the verdict flips once
//! along the searched parameter, which holds for the priors, preference
//! weights and collateral amounts of this game.

use crate::error::Result;
use crate::game::{AgentId, GameSpec};

use super::solve;

/// Relative accuracy promised for every located flip point.
pub const FLIP_REL_TOL: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;
const MAX_DOUBLINGS: usize = 64;

/// Where a monotone verdict turns from `false` to `true` on `[lo, hi]`.
///
/// Requires `pred(lo) == false` and `pred(hi) == true`. Bisects to machine
/// resolution, well inside [`FLIP_REL_TOL`].
pub fn bisect(mut lo: f64, mut hi: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of a one-dimensional flip search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flip {
    /// Verdict holds for every value above this point.
    At(f64),
    /// Verdict holds across the whole searched range.
    Always,
    /// Verdict never holds in the searched range.
    Never,
}

impl Flip {
    pub fn value(self) -> Option<f64> {
        match self {
            Flip::At(x) => Some(x),
            _ => None,
        }
    }
}

fn search_unit(mut pred: impl FnMut(f64) -> Result<bool>) -> Result<Flip> {
    if pred(0.0)? {
        return Ok(Flip::Always);
    }
    if !pred(1.0)? {
        return Ok(Flip::Never);
    }
    bisect(0.0, 1.0, pred).map(Flip::At)
}

fn search_half_line(scale: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<Flip> {
    if pred(0.0)? {
        return Ok(Flip::Always);
    }
    let mut hi = scale.max(1.0);
    for _ in 0..MAX_DOUBLINGS {
        if pred(hi)? {
            return bisect(0.0, hi, pred).map(Flip::At);
        }
        hi *= 2.0;
    }
    Ok(Flip::Never)
}

/// Smallest honest-Alice share above which honest Bob is willing.
pub fn bob_mu_flip(spec: &GameSpec<f64>) -> Result<Flip> {
    search_unit(|mu| {
        let s = spec.clone().with_population(mu, spec.population.mu_bob);
        Ok(solve(&s)?.honesty.willing_bob)
    })
}

/// Smallest honest-Bob share above which honest Alice is willing.
pub fn alice_mu_flip(spec: &GameSpec<f64>) -> Result<Flip> {
    search_unit(|mu| {
        let s = spec.clone().with_population(spec.population.mu_alice, mu);
        Ok(solve(&s)?.honesty.willing_alice)
    })
}

/// Smallest honest-Alice completion preference above which Alice is willing,
/// holding every other parameter of `spec`.
pub fn alice_alpha_flip(spec: &GameSpec<f64>) -> Result<Flip> {
    search_half_line(*spec.p0(), |alpha| {
        let s = spec
            .clone()
            .with_preferences(alpha, spec.preferences.alpha_bob_honest);
        Ok(solve(&s)?.honesty.willing_alice)
    })
}

/// Smallest honest-Bob completion preference above which Bob is willing.
pub fn bob_alpha_flip(spec: &GameSpec<f64>) -> Result<Flip> {
    search_half_line(*spec.p0(), |alpha| {
        let s = spec
            .clone()
            .with_preferences(spec.preferences.alpha_alice_honest, alpha);
        Ok(solve(&s)?.honesty.willing_bob)
    })
}

/// Smallest collateral of `agent` above which every malicious choice is
/// `c`, holding the other agent's collateral as given in `spec`.
pub fn collateral_flip(spec: &GameSpec<f64>, agent: AgentId) -> Result<Flip> {
    search_half_line(*spec.p0(), |c| {
        let s = match agent {
            AgentId::Alice => spec.clone().with_collateral(c, spec.collateral.bob),
            AgentId::Bob => spec.clone().with_collateral(spec.collateral.alice, c),
        };
        Ok(solve(&s)?.malicious_continues_everywhere())
    })
}

/// Thresholds located numerically for any packet count.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericThresholds {
    /// Over `mu_a`, at the spec's other parameters.
    pub bob_mu_min: Flip,
    /// Over `alpha_a`, with `mu_b = 1`.
    pub alice_alpha_min: Flip,
    /// Over `mu_b`, at the spec's other parameters.
    pub alice_mu_min: Flip,
    /// Over Bob's collateral, with Alice's collateral far above any stake.
    pub collateral_bob_min: Flip,
    /// Over Alice's collateral, with Bob's collateral far above any stake.
    pub collateral_alice_min: Flip,
}

impl NumericThresholds {
    pub fn locate(spec: &GameSpec<f64>) -> Result<Self> {
        spec.validate()?;
        let ample = 4.0 * spec.market.max_price() + 1.0;
        let all_honest_bob = spec.clone().with_population(spec.population.mu_alice, 1.0);
        Ok(Self {
            bob_mu_min: bob_mu_flip(spec)?,
            alice_alpha_min: alice_alpha_flip(&all_honest_bob)?,
            alice_mu_min: alice_mu_flip(spec)?,
            collateral_bob_min: collateral_flip(
                &spec.clone().with_collateral(ample, spec.collateral.bob),
                AgentId::Bob,
            )?,
            collateral_alice_min: collateral_flip(
                &spec.clone().with_collateral(spec.collateral.alice, ample),
                AgentId::Alice,
            )?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bisect_finds_root() {
        let x = bisect(0.0, 10.0, |x| Ok(x * x > 2.0)).unwrap();
        assert!(rel(x, 2f64.sqrt()) < 1e-14);
    }

    #[test]
    fn bob_reference_flip() {
        let spec = GameSpec::new(100.0, 10.0, 2)
            .unwrap()
            .with_preferences(0.0, 50.0);
        let x = bob_mu_flip(&spec).unwrap().value().unwrap();
        assert!(rel(x, 200.0 / 290.0) < FLIP_REL_TOL);
    }

    #[test]
    fn small_alpha_never_willing() {
        let spec = GameSpec::new(100.0, 10.0, 2)
            .unwrap()
            .with_preferences(0.0, 10.0);
        assert_eq!(bob_mu_flip(&spec).unwrap(), Flip::Never);
    }

    #[test]
    fn locate_collateral_minima() {
        let spec = GameSpec::new(100.0, 10.0, 2).unwrap();
        let t = NumericThresholds::locate(&spec).unwrap();
        assert!(rel(t.collateral_bob_min.value().unwrap(), 55.0) < FLIP_REL_TOL);
        assert!(rel(t.collateral_alice_min.value().unwrap(), 60.0) < FLIP_REL_TOL);
        assert!(rel(t.alice_alpha_min.value().unwrap(), 30.0) < FLIP_REL_TOL);
    }

    #[test]
    fn works_beyond_two_packets() {
        let spec = GameSpec::new(100.0, 5.0, 5)
            .unwrap()
            .with_preferences(80.0, 80.0)
            .with_population(0.9, 0.9);
        let t = NumericThresholds::locate(&spec).unwrap();
        assert!(matches!(t.collateral_bob_min, Flip::At(_)));
        assert!(matches!(t.collateral_alice_min, Flip::At(_)));
    }
}
