//! The match-and-extend packetized-payment game.
//!
//! Alice sells one unit of asset 1 to Bob for `p0` units of asset 2, split
//! into `N` packets. Transfers alternate: Alice opens with `1/N` of the asset,
//! each later transfer matches the counterparty's previous packet and extends
//! by one more, and a final `1/N` top-up closes the swap, for `N + 1`
//! transfers in total. Before each transfer the sender decides to continue
//! (`c`) or stop (`s`); every continue except the last is followed by a wait
//! (`w`) during which the price moves one lattice step.

use std::fmt;

use crate::error::{Error, Result};
use crate::market::{MarketModel, PriceNode};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentId {
    Alice,
    Bob,
}

impl AgentId {
    pub const ALL: [AgentId; 2] = [AgentId::Alice, AgentId::Bob];

    /// Price-exposure direction: Alice is short asset 1, Bob is long.
    pub fn beta<T: Scalar>(self) -> T {
        match self {
            AgentId::Alice => -T::one(),
            AgentId::Bob => T::one(),
        }
    }

    pub fn counterparty(self) -> AgentId {
        match self {
            AgentId::Alice => AgentId::Bob,
            AgentId::Bob => AgentId::Alice,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentId::Alice => "alice",
            AgentId::Bob => "bob",
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Honest agents always continue; malicious agents carry no preference for
/// completion and best-respond on financial profit alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentType {
    Honest,
    Malicious,
}

impl AgentType {
    pub const ALL: [AgentType; 2] = [AgentType::Honest, AgentType::Malicious];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentType::Honest => "honest",
            AgentType::Malicious => "malicious",
        }
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Completion preference of the honest types, in units of asset 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Preferences<T> {
    pub alpha_alice_honest: T,
    pub alpha_bob_honest: T,
}

impl<T: Scalar> Preferences<T> {
    pub fn alpha(&self, agent: AgentId, agent_type: AgentType) -> T {
        match (agent, agent_type) {
            (_, AgentType::Malicious) => T::zero(),
            (AgentId::Alice, AgentType::Honest) => self.alpha_alice_honest.clone(),
            (AgentId::Bob, AgentType::Honest) => self.alpha_bob_honest.clone(),
        }
    }
}

/// Probability that a randomly matched Alice (resp. Bob) is honest.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    pub mu_alice: T,
    pub mu_bob: T,
}

impl<T: Scalar> Population<T> {
    pub fn new(mu_alice: T, mu_bob: T) -> Result<Self> {
        let pop = Self { mu_alice, mu_bob };
        pop.validate()?;
        Ok(pop)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, mu) in [("mu_a", &self.mu_alice), ("mu_b", &self.mu_bob)] {
            if *mu < T::zero() || *mu > T::one() {
                return Err(Error::InvalidSpec(format!(
                    "{name} must lie in [0, 1], got {mu}"
                )));
            }
        }
        Ok(())
    }

    pub fn prior(&self, agent: AgentId, agent_type: AgentType) -> T {
        let mu = match agent {
            AgentId::Alice => self.mu_alice.clone(),
            AgentId::Bob => self.mu_bob.clone(),
        };
        match agent_type {
            AgentType::Honest => mu,
            AgentType::Malicious => T::one() - mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollateralDisposition {
    /// Forfeited collateral leaves the game.
    #[default]
    Burned,
    /// Forfeited collateral is paid to the agent who did not stop.
    TransferredToCounterparty,
}

impl CollateralDisposition {
    pub fn name(self) -> &'static str {
        match self {
            CollateralDisposition::Burned => "burned",
            CollateralDisposition::TransferredToCounterparty => "transferred",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collateral<T> {
    pub alice: T,
    pub bob: T,
    pub disposition: CollateralDisposition,
}

impl<T: Scalar> Collateral<T> {
    pub fn none() -> Self {
        Self {
            alice: T::zero(),
            bob: T::zero(),
            disposition: CollateralDisposition::Burned,
        }
    }

    pub fn of(&self, agent: AgentId) -> T {
        match agent {
            AgentId::Alice => self.alice.clone(),
            AgentId::Bob => self.bob.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.alice.is_zero() && self.bob.is_zero()
    }
}

/// One fully specified game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec<T> {
    pub market: MarketModel<T>,
    pub n_packets: usize,
    pub preferences: Preferences<T>,
    pub population: Population<T>,
    pub collateral: Collateral<T>,
}

impl<T: Scalar> GameSpec<T> {
    /// An `n_packets` game over a fresh lattice with zero preferences, an
    /// all-honest population and no collateral.
    pub fn new(p0: T, delta: T, n_packets: usize) -> Result<Self> {
        if n_packets == 0 {
            return Err(Error::InvalidSpec("n_packets must be at least 1".into()));
        }
        let market = MarketModel::new(p0, delta, n_packets)?;
        Ok(Self {
            market,
            n_packets,
            preferences: Preferences {
                alpha_alice_honest: T::zero(),
                alpha_bob_honest: T::zero(),
            },
            population: Population {
                mu_alice: T::one(),
                mu_bob: T::one(),
            },
            collateral: Collateral::none(),
        })
    }

    pub fn with_preferences(mut self, alpha_alice: T, alpha_bob: T) -> Self {
        self.preferences = Preferences {
            alpha_alice_honest: alpha_alice,
            alpha_bob_honest: alpha_bob,
        };
        self
    }

    pub fn with_population(mut self, mu_alice: T, mu_bob: T) -> Self {
        self.population = Population { mu_alice, mu_bob };
        self
    }

    pub fn with_collateral(mut self, alice: T, bob: T) -> Self {
        self.collateral.alice = alice;
        self.collateral.bob = bob;
        self
    }

    pub fn with_disposition(mut self, disposition: CollateralDisposition) -> Self {
        self.collateral.disposition = disposition;
        self
    }

    pub fn p0(&self) -> &T {
        self.market.p0()
    }

    pub fn delta(&self) -> &T {
        self.market.delta()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_packets == 0 {
            return Err(Error::InvalidSpec("n_packets must be at least 1".into()));
        }
        if self.market.horizon() != self.n_packets {
            return Err(Error::InvalidSpec(format!(
                "market horizon {} must equal n_packets {}",
                self.market.horizon(),
                self.n_packets
            )));
        }
        // Re-run the market checks in case fields were edited after construction.
        MarketModel::new(
            self.market.p0().clone(),
            self.market.delta().clone(),
            self.market.horizon(),
        )
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        for (name, v) in [
            ("alpha_a", &self.preferences.alpha_alice_honest),
            ("alpha_b", &self.preferences.alpha_bob_honest),
            ("collateral_a", &self.collateral.alice),
            ("collateral_b", &self.collateral.bob),
        ] {
            if *v < T::zero() {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        self.population.validate()
    }

    pub fn price(&self, node: DecisionNode) -> T {
        self.market.price_at(node.step, node.up_moves)
    }
}

/// A decision point: `step` continues have happened and the price sits at
/// lattice node `(step, up_moves)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecisionNode {
    pub step: usize,
    pub up_moves: usize,
}

impl DecisionNode {
    pub fn new(step: usize, up_moves: usize) -> Self {
        debug_assert!(up_moves <= step);
        Self { step, up_moves }
    }

    /// Alice decides at even steps, Bob at odd ones.
    pub fn mover(self) -> AgentId {
        if self.step.is_multiple_of(2) {
            AgentId::Alice
        } else {
            AgentId::Bob
        }
    }

    pub fn price_node<T: Scalar>(self, market: &MarketModel<T>) -> PriceNode<T> {
        PriceNode {
            time: self.step,
            up_moves: self.up_moves,
            price: market.price_at(self.step, self.up_moves),
        }
    }

    /// Every decision node of an `n_packets` game, in step-major order.
    pub fn all(n_packets: usize) -> impl Iterator<Item = DecisionNode> {
        (0..=n_packets).flat_map(|k| (0..=k).map(move |u| DecisionNode::new(k, u)))
    }
}

impl fmt::Display for DecisionNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, up={})", self.step, self.up_moves)
    }
}

/// A choice available at a decision node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    Continue,
    Stop,
}

impl Choice {
    pub fn symbol(self) -> char {
        match self {
            Choice::Continue => 'c',
            Choice::Stop => 's',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Up,
    Down,
}

/// History alphabet. Waits are chance moves and carry the realized price move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Continue,
    Wait(Move),
    Stop,
}

impl From<Choice> for Action {
    fn from(choice: Choice) -> Self {
        match choice {
            Choice::Continue => Action::Continue,
            Choice::Stop => Action::Stop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryState {
    /// Waiting for the mover at this node.
    Decision(DecisionNode),
    /// A non-final continue was played; the price move is pending.
    AwaitingMove {
        step: usize,
        up_moves: usize,
    },
    Terminal(Exit),
}

impl HistoryState {
    /// Applies one action of an `n_packets` game; `None` if the grammar forbids it.
    pub fn advance(self, action: Action, n_packets: usize) -> Option<HistoryState> {
        match (self, action) {
            (HistoryState::Decision(node), Action::Continue) => Some(if node.step == n_packets {
                HistoryState::Terminal(Exit::Success {
                    up_moves: node.up_moves,
                })
            } else {
                HistoryState::AwaitingMove {
                    step: node.step + 1,
                    up_moves: node.up_moves,
                }
            }),
            (HistoryState::Decision(node), Action::Stop) => {
                Some(HistoryState::Terminal(Exit::Stop(node)))
            }
            (HistoryState::AwaitingMove { step, up_moves }, Action::Wait(m)) => {
                let up = usize::from(m == Move::Up);
                Some(HistoryState::Decision(DecisionNode::new(
                    step,
                    up_moves + up,
                )))
            }
            _ => None,
        }
    }
}

/// How a game ended: the node of the stopping decision, or success after the
/// final continue at `(N, up_moves)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Stop(DecisionNode),
    Success { up_moves: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    n_packets: usize,
    actions: Vec<Action>,
    state: HistoryState,
}

impl History {
    pub fn root(n_packets: usize) -> Self {
        Self {
            n_packets,
            actions: Vec::new(),
            state: HistoryState::Decision(DecisionNode::new(0, 0)),
        }
    }

    pub fn from_actions(n_packets: usize, actions: &[Action]) -> Result<Self> {
        let mut h = Self::root(n_packets);
        for &a in actions {
            h.push(a)?;
        }
        Ok(h)
    }

    /// The history that reaches `node` with its up-moves taken first.
    pub fn to_node(n_packets: usize, node: DecisionNode) -> Result<Self> {
        let mut h = Self::root(n_packets);
        for i in 0..node.step {
            h.push(Action::Continue)?;
            let m = if i < node.up_moves {
                Move::Up
            } else {
                Move::Down
            };
            h.push(Action::Wait(m))?;
        }
        Ok(h)
    }

    pub fn push(&mut self, action: Action) -> Result<()> {
        let next = self.state.advance(action, self.n_packets).ok_or_else(|| {
            Error::MalformedHistory(format!(
                "{action:?} not allowed after {self} (state {:?})",
                self.state
            ))
        })?;
        self.actions.push(action);
        self.state = next;
        Ok(())
    }

    pub fn with(mut self, action: Action) -> Result<Self> {
        self.push(action)?;
        Ok(self)
    }

    pub fn state(&self) -> HistoryState {
        self.state
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn n_packets(&self) -> usize {
        self.n_packets
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.state, HistoryState::Terminal(_))
    }

    pub fn continues(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| **a == Action::Continue)
            .count()
    }

    pub fn up_moves(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| **a == Action::Wait(Move::Up))
            .count()
    }

    pub fn moves(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a, Action::Wait(_)))
            .count()
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.actions.is_empty() {
            return f.write_str("{∅}");
        }
        let symbols: Vec<&str> = self
            .actions
            .iter()
            .map(|a| match a {
                Action::Continue => "c",
                Action::Wait(_) => "w",
                Action::Stop => "s",
            })
            .collect();
        write!(f, "{{{}}}", symbols.join(","))
    }
}

/// A single transfer of the match-and-extend schedule. Amounts of asset 2
/// are absolute (already multiplied by `p0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer<T> {
    pub step: usize,
    pub sender: AgentId,
    pub asset1: T,
    pub asset2: T,
}

/// Fraction of asset 1 Alice has sent once `n` transfers are complete.
pub fn cumulative_asset1<T: Scalar>(n: usize, n_packets: usize) -> T {
    let big_n = T::from_count(n_packets);
    match n {
        0 => T::zero(),
        n if n > n_packets => T::one(),
        n if n % 2 == 1 => T::from_count(n) / big_n,
        n => T::from_count(n - 1) / big_n,
    }
}

/// Fraction of `p0` Bob has paid once `n` transfers are complete.
pub fn cumulative_asset2<T: Scalar>(n: usize, n_packets: usize) -> T {
    let big_n = T::from_count(n_packets);
    match n {
        0 => T::zero(),
        n if n > n_packets => T::one(),
        n if n % 2 == 1 => T::from_count(n - 1) / big_n,
        n => T::from_count(n) / big_n,
    }
}

pub fn transfer_schedule<T: Scalar>(spec: &GameSpec<T>) -> Vec<Transfer<T>> {
    let n = spec.n_packets;
    (1..=n + 1)
        .map(|step| {
            let a1 = cumulative_asset1::<T>(step, n) - cumulative_asset1::<T>(step - 1, n);
            let a2 = cumulative_asset2::<T>(step, n) - cumulative_asset2::<T>(step - 1, n);
            Transfer {
                step,
                sender: if step % 2 == 1 {
                    AgentId::Alice
                } else {
                    AgentId::Bob
                },
                asset1: a1,
                asset2: a2 * spec.p0().clone(),
            }
        })
        .collect()
}

/// Staged financial payoff `Y_n`: Bob's net position after `exit_step`
/// transfers, with the received asset valued at `price`.
pub fn payoff_y<T: Scalar>(spec: &GameSpec<T>, exit_step: usize, price: &T) -> Result<T> {
    let n_packets = spec.n_packets;
    if exit_step > n_packets + 1 {
        return Err(Error::ExitStepOutOfRange {
            step: exit_step,
            max: n_packets + 1,
        });
    }
    let big_n = T::from_count(n_packets);
    let p0 = spec.p0().clone();
    let n = exit_step;
    let y = if n == 0 {
        T::zero()
    } else if n == n_packets + 1 {
        price.clone() - p0
    } else if n % 2 == 1 {
        T::from_count(n) / big_n.clone() * price.clone() - T::from_count(n - 1) / big_n * p0
    } else {
        T::from_count(n - 1) / big_n.clone() * price.clone() - T::from_count(n) / big_n * p0
    };
    Ok(y)
}

/// Transaction success indicator `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Settlement {
    Success,
    Failure,
}

impl Settlement {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Settlement::Success => T::one(),
            Settlement::Failure => -T::one(),
        }
    }
}

/// `alpha * X + beta * Y - forfeited`.
///
/// The financial term is `beta * Y` without an `X` factor, so a failed swap
/// leaves each side with its actual net ledger position. `alpha` must be zero
/// for malicious agents.
pub fn utility<T: Scalar>(
    agent: AgentId,
    agent_type: AgentType,
    alpha: &T,
    settlement: Settlement,
    y: &T,
    forfeited_own_collateral: &T,
) -> T {
    debug_assert!(agent_type == AgentType::Honest || alpha.is_zero());
    alpha.clone() * settlement.sign::<T>() + agent.beta::<T>() * y.clone()
        - forfeited_own_collateral.clone()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub settlement: Settlement,
    pub exit_step: usize,
    pub exit_price: T,
    pub y: T,
    pub stopper: Option<AgentId>,
    /// Indexed by `[agent][type]`.
    utilities: [[T; 2]; 2],
}

impl<T: Scalar> Outcome<T> {
    pub fn utility(&self, agent: AgentId, agent_type: AgentType) -> &T {
        &self.utilities[agent.index()][agent_type.index()]
    }
}

/// Outcome of the game ending through `exit`.
pub fn settle<T: Scalar>(spec: &GameSpec<T>, exit: Exit) -> Outcome<T> {
    let (settlement, exit_step, price, stopper) = match exit {
        Exit::Stop(node) => (
            Settlement::Failure,
            node.step,
            spec.price(node),
            Some(node.mover()),
        ),
        Exit::Success { up_moves } => (
            Settlement::Success,
            spec.n_packets + 1,
            spec.market.price_at(spec.n_packets, up_moves),
            None,
        ),
    };
    let y = payoff_y(spec, exit_step, &price).expect("exit step within range");
    let forfeited = stopper.map(|a| spec.collateral.of(a));
    let utilities = AgentId::ALL.map(|agent| {
        let (lost, credit) = match (stopper, &forfeited) {
            (Some(s), Some(c)) if s == agent => (c.clone(), T::zero()),
            (Some(_), Some(c))
                if spec.collateral.disposition
                    == CollateralDisposition::TransferredToCounterparty =>
            {
                (T::zero(), c.clone())
            }
            _ => (T::zero(), T::zero()),
        };
        AgentType::ALL.map(|t| {
            let alpha = spec.preferences.alpha(agent, t);
            utility(agent, t, &alpha, settlement, &y, &lost) + credit.clone()
        })
    });
    Outcome {
        settlement,
        exit_step,
        exit_price: price,
        y,
        stopper,
        utilities,
    }
}

pub fn terminal_outcome<T: Scalar>(spec: &GameSpec<T>, history: &History) -> Result<Outcome<T>> {
    if history.n_packets() != spec.n_packets {
        return Err(Error::MalformedHistory(format!(
            "history built for N = {}, spec has N = {}",
            history.n_packets(),
            spec.n_packets
        )));
    }
    match history.state() {
        HistoryState::Terminal(exit) => Ok(settle(spec, exit)),
        _ => Err(Error::NonTerminalHistory(history.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn q(n: i64) -> BigRational {
        ratio(n, 1)
    }

    fn spec(n: usize) -> GameSpec<BigRational> {
        GameSpec::new(q(100), q(10), n).unwrap()
    }

    #[test]
    fn schedule_two_packets() {
        let s = transfer_schedule(&spec(2));
        let got: Vec<_> = s
            .iter()
            .map(|t| (t.step, t.sender, t.asset1.clone(), t.asset2.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, AgentId::Alice, ratio(1, 2), q(0)),
                (2, AgentId::Bob, q(0), q(100)),
                (3, AgentId::Alice, ratio(1, 2), q(0)),
            ]
        );
    }

    #[test]
    fn schedule_single_packet() {
        let s = transfer_schedule(&spec(1));
        assert_eq!(s.len(), 2);
        assert_eq!(
            (s[0].sender, s[0].asset1.clone(), s[0].asset2.clone()),
            (AgentId::Alice, q(1), q(0))
        );
        assert_eq!(
            (s[1].sender, s[1].asset1.clone(), s[1].asset2.clone()),
            (AgentId::Bob, q(0), q(100))
        );
    }

    #[test]
    fn schedule_four_packets_cumulative() {
        let s = transfer_schedule(&GameSpec::new(q(100), q(10), 4).unwrap());
        let mut a1 = q(0);
        let mut a2 = q(0);
        let mut cum1 = Vec::new();
        let mut cum2 = Vec::new();
        for t in &s {
            a1 += t.asset1.clone();
            a2 += t.asset2.clone() / q(100);
            cum1.push(a1.clone());
            cum2.push(a2.clone());
        }
        assert_eq!(
            cum1,
            vec![ratio(1, 4), ratio(1, 4), ratio(3, 4), ratio(3, 4), q(1)]
        );
        assert_eq!(cum2, vec![q(0), ratio(2, 4), ratio(2, 4), q(1), q(1)]);
        // Each transfer moves only the sender's asset.
        for t in &s {
            match t.sender {
                AgentId::Alice => assert!(t.asset2.is_zero()),
                AgentId::Bob => assert!(t.asset1.is_zero()),
            }
        }
    }

    #[test]
    fn payoff_examples() {
        let s = spec(2);
        assert_eq!(payoff_y(&s, 0, &q(100)).unwrap(), q(0));
        assert_eq!(payoff_y(&s, 1, &q(110)).unwrap(), q(55));
        assert_eq!(payoff_y(&s, 2, &q(80)).unwrap(), q(-60));
        assert_eq!(payoff_y(&s, 3, &q(100)).unwrap(), q(0));
        assert_eq!(
            payoff_y(&s, 4, &q(100)),
            Err(Error::ExitStepOutOfRange { step: 4, max: 3 })
        );
    }

    #[test]
    fn utility_examples() {
        let z = q(0);
        assert_eq!(
            utility(
                AgentId::Bob,
                AgentType::Malicious,
                &z,
                Settlement::Failure,
                &q(55),
                &z
            ),
            q(55)
        );
        assert_eq!(
            utility(
                AgentId::Alice,
                AgentType::Honest,
                &q(30),
                Settlement::Success,
                &q(0),
                &z
            ),
            q(30)
        );
        assert_eq!(
            utility(
                AgentId::Alice,
                AgentType::Honest,
                &q(30),
                Settlement::Failure,
                &q(-60),
                &z
            ),
            q(30)
        );
        assert_eq!(
            utility(
                AgentId::Bob,
                AgentType::Honest,
                &q(30),
                Settlement::Success,
                &q(20),
                &z
            ),
            q(50)
        );
    }

    #[test]
    fn history_grammar() {
        let h = History::from_actions(
            2,
            &[
                Action::Continue,
                Action::Wait(Move::Up),
                Action::Continue,
                Action::Wait(Move::Down),
            ],
        )
        .unwrap();
        assert_eq!(h.to_string(), "{c,w,c,w}");
        assert_eq!(h.state(), HistoryState::Decision(DecisionNode::new(2, 1)));
        assert_eq!(DecisionNode::new(2, 1).mover(), AgentId::Alice);
        assert_eq!(History::root(2).to_string(), "{∅}");

        assert!(History::from_actions(2, &[Action::Wait(Move::Up)]).is_err());
        assert!(History::from_actions(2, &[Action::Continue, Action::Continue]).is_err());
        assert!(History::from_actions(2, &[Action::Stop, Action::Continue]).is_err());
        let done = History::from_actions(
            2,
            &[
                Action::Continue,
                Action::Wait(Move::Up),
                Action::Continue,
                Action::Wait(Move::Up),
                Action::Continue,
            ],
        )
        .unwrap();
        assert_eq!(
            done.state(),
            HistoryState::Terminal(Exit::Success { up_moves: 2 })
        );
        assert!(done.clone().with(Action::Wait(Move::Up)).is_err());
    }

    #[test]
    fn terminal_stop_by_bob_on_down_path() {
        let s = spec(2);
        let h = History::from_actions(
            2,
            &[Action::Continue, Action::Wait(Move::Down), Action::Stop],
        )
        .unwrap();
        let out = terminal_outcome(&s, &h).unwrap();
        assert_eq!(out.exit_step, 1);
        assert_eq!(out.exit_price, q(90));
        assert_eq!(out.y, q(45));
        assert_eq!(out.stopper, Some(AgentId::Bob));
        assert_eq!(*out.utility(AgentId::Bob, AgentType::Malicious), q(45));
        assert_eq!(*out.utility(AgentId::Alice, AgentType::Malicious), q(-45));
    }

    #[test]
    fn terminal_immediate_stop_costs_alpha() {
        let s = spec(2).with_preferences(q(40), q(25));
        let h = History::from_actions(2, &[Action::Stop]).unwrap();
        let out = terminal_outcome(&s, &h).unwrap();
        assert_eq!(out.exit_step, 0);
        assert_eq!(out.y, q(0));
        assert_eq!(*out.utility(AgentId::Alice, AgentType::Honest), q(-40));
    }

    #[test]
    fn terminal_success_up_up() {
        let s = spec(2);
        let h = History::from_actions(
            2,
            &[
                Action::Continue,
                Action::Wait(Move::Up),
                Action::Continue,
                Action::Wait(Move::Up),
                Action::Continue,
            ],
        )
        .unwrap();
        let out = terminal_outcome(&s, &h).unwrap();
        assert_eq!(out.settlement, Settlement::Success);
        assert_eq!(out.exit_step, 3);
        assert_eq!(out.y, q(20));
    }

    #[test]
    fn non_terminal_history_rejected() {
        let s = spec(2);
        let h = History::from_actions(2, &[Action::Continue]).unwrap();
        assert!(matches!(
            terminal_outcome(&s, &h),
            Err(Error::NonTerminalHistory(_))
        ));
    }

    #[test]
    fn collateral_forfeit_and_transfer() {
        let base = spec(2).with_collateral(q(7), q(11));
        let h = History::from_actions(2, &[Action::Continue, Action::Wait(Move::Up), Action::Stop])
            .unwrap();
        let burned = terminal_outcome(&base, &h).unwrap();
        assert_eq!(
            *burned.utility(AgentId::Bob, AgentType::Malicious),
            q(55 - 11)
        );
        assert_eq!(
            *burned.utility(AgentId::Alice, AgentType::Malicious),
            q(-55)
        );
        let moved = base.with_disposition(CollateralDisposition::TransferredToCounterparty);
        let out = terminal_outcome(&moved, &h).unwrap();
        assert_eq!(*out.utility(AgentId::Bob, AgentType::Malicious), q(55 - 11));
        assert_eq!(
            *out.utility(AgentId::Alice, AgentType::Malicious),
            q(-55 + 11)
        );
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::new(100.0, 10.0, 0).is_err());
        assert!(GameSpec::new(100.0, 40.0, 3).is_err());
        let bad = GameSpec::new(100.0, 10.0, 2)
            .unwrap()
            .with_population(1.5, 0.5);
        assert!(bad.validate().is_err());
        let bad = GameSpec::new(100.0, 10.0, 2)
            .unwrap()
            .with_preferences(-1.0, 0.0);
        assert!(bad.validate().is_err());
        let bad = GameSpec::new(100.0, 10.0, 2)
            .unwrap()
            .with_collateral(0.0, -2.0);
        assert!(bad.validate().is_err());
    }
}
