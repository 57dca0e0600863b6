//! Symmetric binomial price lattice for asset 1 quoted in asset 2.
//!
//! Each period the price moves up or down by a fixed `delta` with
//! probability 1/2, so the price process is a martingale. Paths recombine:
//! a node is identified by its time and the number of up-moves taken.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel<T> {
    p0: T,
    delta: T,
    horizon: usize,
}

/// A recombining lattice node. `price = p0 + (2 * up_moves - time) * delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceNode<T> {
    pub time: usize,
    pub up_moves: usize,
    pub price: T,
}

impl<T: Scalar> MarketModel<T> {
    pub fn new(p0: T, delta: T, horizon: usize) -> Result<Self> {
        if p0 <= T::zero() {
            return Err(Error::InvalidMarket(format!(
                "p0 must be positive, got {p0}"
            )));
        }
        if delta < T::zero() {
            return Err(Error::InvalidMarket(format!(
                "delta must be non-negative, got {delta}"
            )));
        }
        let floor = p0.clone() - delta.clone() * T::from_count(horizon);
        if floor < T::zero() {
            return Err(Error::InvalidMarket(format!(
                "delta <= p0 / horizon is required so prices stay non-negative \
                 (p0 = {p0}, delta = {delta}, horizon = {horizon})"
            )));
        }
        Ok(Self { p0, delta, horizon })
    }

    pub fn p0(&self) -> &T {
        &self.p0
    }

    pub fn delta(&self) -> &T {
        &self.delta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Lowest price reachable on the lattice, `p0 - horizon * delta`.
    pub fn min_price(&self) -> T {
        self.p0.clone() - self.delta.clone() * T::from_count(self.horizon)
    }

    /// Highest price reachable on the lattice, `p0 + horizon * delta`.
    pub fn max_price(&self) -> T {
        self.p0.clone() + self.delta.clone() * T::from_count(self.horizon)
    }

    /// True when every lattice price is strictly positive. The malicious-stop
    /// argument at the final decision needs this; with a zero price corner the
    /// stop and continue values tie there.
    pub fn strictly_positive(&self) -> bool {
        self.min_price() > T::zero()
    }

    pub fn price_at(&self, time: usize, up_moves: usize) -> T {
        debug_assert!(up_moves <= time);
        self.p0.clone() + self.delta.clone() * T::from_count(2 * up_moves)
            - self.delta.clone() * T::from_count(time)
    }

    pub fn node(&self, time: usize, up_moves: usize) -> Result<PriceNode<T>> {
        if time > self.horizon {
            return Err(Error::HorizonExceeded {
                time,
                horizon: self.horizon,
            });
        }
        if up_moves > time {
            return Err(Error::InvalidMarket(format!(
                "node ({time}, {up_moves}) has more up-moves than periods"
            )));
        }
        Ok(PriceNode {
            time,
            up_moves,
            price: self.price_at(time, up_moves),
        })
    }

    pub fn root(&self) -> PriceNode<T> {
        PriceNode {
            time: 0,
            up_moves: 0,
            price: self.p0.clone(),
        }
    }

    /// Up and down children of `node`, each reached with probability 1/2.
    pub fn evolve(&self, node: &PriceNode<T>) -> Result<(PriceNode<T>, PriceNode<T>)> {
        if node.time >= self.horizon {
            return Err(Error::HorizonExceeded {
                time: node.time,
                horizon: self.horizon,
            });
        }
        let up = PriceNode {
            time: node.time + 1,
            up_moves: node.up_moves + 1,
            price: node.price.clone() + self.delta.clone(),
        };
        let down = PriceNode {
            time: node.time + 1,
            up_moves: node.up_moves,
            price: node.price.clone() - self.delta.clone(),
        };
        Ok((up, down))
    }

    pub fn lattice(&self) -> Lattice<T> {
        let levels = (0..=self.horizon)
            .map(|t| {
                (0..=t)
                    .map(|u| PriceNode {
                        time: t,
                        up_moves: u,
                        price: self.price_at(t, u),
                    })
                    .collect()
            })
            .collect();
        Lattice { levels }
    }
}

/// Probability of reaching `(time, up_moves)` from the root: `C(time, up_moves) / 2^time`.
pub fn node_weight<T: Scalar>(time: usize, up_moves: usize) -> T {
    if up_moves > time {
        return T::zero();
    }
    let k = up_moves.min(time - up_moves);
    // C(t, k) built incrementally; every partial product is an integer.
    let mut binom = T::one();
    for i in 0..k {
        binom = binom * T::from_count(time - i) / T::from_count(i + 1);
    }
    let mut scale = T::one();
    for _ in 0..time {
        scale = scale * T::half();
    }
    binom * scale
}

/// All lattice nodes, indexed by `(time, up_moves)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T> {
    levels: Vec<Vec<PriceNode<T>>>,
}

impl<T: Scalar> Lattice<T> {
    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn get(&self, time: usize, up_moves: usize) -> Option<&PriceNode<T>> {
        self.levels.get(time).and_then(|level| level.get(up_moves))
    }

    pub fn level(&self, time: usize) -> &[PriceNode<T>] {
        &self.levels[time]
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PriceNode<T>> {
        self.levels.iter().flatten()
    }

    pub fn weight(&self, node: &PriceNode<T>) -> T {
        node_weight(node.time, node.up_moves)
    }

    /// Checks `E[P_{t+1} | P_t] == P_t` at every non-terminal node using the
    /// stored children, which is exact in rational arithmetic.
    pub fn is_martingale(&self) -> bool {
        let h = self.horizon();
        (0..h).all(|t| {
            self.levels[t].iter().all(|node| {
                let up = &self.levels[t + 1][node.up_moves + 1];
                let down = &self.levels[t + 1][node.up_moves];
                T::half() * up.price.clone() + T::half() * down.price.clone() == node.price
            })
        })
    }
}
