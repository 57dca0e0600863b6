//! Backward induction over the swap game with static type priors.
//!
//! Each agent knows its own type and holds a fixed prior over the
//! counterparty's type; priors are never updated along the history. At every
//! decision node the mover's value of `c` averages, over counterparty types
//! and the next price move, the outcome the strategy profile produces from the
//! child node onward. Honest movers always continue. Malicious movers take the
//! argmax and stop on ties.

mod oracle;
pub mod search;

use std::collections::BTreeMap;

use crate::error::Result;
use crate::game::{settle, AgentId, AgentType, Choice, DecisionNode, Exit, GameSpec};
use crate::scalar::Scalar;

pub use oracle::{oracle_value, ORACLE_MAX_PACKETS};

/// Pure strategy of every (agent, type) at every node where that agent moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile {
    n_packets: usize,
    malicious: BTreeMap<DecisionNode, Choice>,
}

impl StrategyProfile {
    /// Builds a profile from an arbitrary malicious rule; honest entries stay `c`.
    pub fn from_fn(n_packets: usize, mut malicious: impl FnMut(DecisionNode) -> Choice) -> Self {
        Self {
            n_packets,
            malicious: DecisionNode::all(n_packets)
                .map(|n| (n, malicious(n)))
                .collect(),
        }
    }

    pub fn n_packets(&self) -> usize {
        self.n_packets
    }

    /// Choice of the mover at `node` when it has `agent_type`.
    pub fn choice(&self, agent_type: AgentType, node: DecisionNode) -> Choice {
        match agent_type {
            AgentType::Honest => Choice::Continue,
            AgentType::Malicious => self.malicious[&node],
        }
    }

    /// `None` when `agent` does not move at `node`.
    pub fn action(
        &self,
        agent: AgentId,
        agent_type: AgentType,
        node: DecisionNode,
    ) -> Option<Choice> {
        (node.mover() == agent && self.malicious.contains_key(&node))
            .then(|| self.choice(agent_type, node))
    }

    pub fn entries(&self) -> impl Iterator<Item = (AgentId, AgentType, DecisionNode, Choice)> + '_ {
        self.malicious.keys().flat_map(move |&node| {
            AgentType::ALL.map(|t| (node.mover(), t, node, self.choice(t, node)))
        })
    }
}

/// Mover's expected utility of each choice at a node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValue<T> {
    pub continue_value: T,
    pub stop_value: T,
}

impl<T: Scalar> NodeValue<T> {
    pub fn value(&self, choice: Choice) -> &T {
        match choice {
            Choice::Continue => &self.continue_value,
            Choice::Stop => &self.stop_value,
        }
    }

    /// `continue - stop`; honesty is incentive-compatible where this is positive.
    pub fn margin(&self) -> T {
        self.continue_value.clone() - self.stop_value.clone()
    }
}

/// The worst-case node of an honest agent at one decision step.
#[derive(Debug, Clone, PartialEq)]
pub struct BindingNode<T> {
    pub agent: AgentId,
    pub node: DecisionNode,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HonestyAudit<T> {
    pub willing_alice: bool,
    pub willing_bob: bool,
    pub binding: Vec<BindingNode<T>>,
}

impl<T> HonestyAudit<T> {
    pub fn willing(&self, agent: AgentId) -> bool {
        match agent {
            AgentId::Alice => self.willing_alice,
            AgentId::Bob => self.willing_bob,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub strategy: StrategyProfile,
    /// Keyed by the mover at each node.
    pub node_values: BTreeMap<(AgentId, AgentType, DecisionNode), NodeValue<T>>,
    pub honesty: HonestyAudit<T>,
    /// Ex-ante expected utility by `[agent][type]`.
    ex_ante: [[T; 2]; 2],
    /// Every lattice price is strictly positive. When false the malicious
    /// stop at the zero-price corner is decided by the tie rule.
    pub strictly_positive_prices: bool,
}

impl<T: Scalar> SolveReport<T> {
    pub fn n_packets(&self) -> usize {
        self.strategy.n_packets()
    }

    pub fn node_value(
        &self,
        agent: AgentId,
        agent_type: AgentType,
        node: DecisionNode,
    ) -> Option<&NodeValue<T>> {
        self.node_values.get(&(agent, agent_type, node))
    }

    pub fn ex_ante(&self, agent: AgentId, agent_type: AgentType) -> &T {
        &self.ex_ante[agent.index()][agent_type.index()]
    }

    pub fn willing_honesty(&self, agent: AgentId) -> bool {
        self.honesty.willing(agent)
    }

    /// Nodes with `step >= min_step` where the malicious mover stops.
    pub fn malicious_stops(&self, min_step: usize) -> Vec<DecisionNode> {
        DecisionNode::all(self.n_packets())
            .filter(|n| {
                n.step >= min_step && self.strategy.choice(AgentType::Malicious, *n) == Choice::Stop
            })
            .collect()
    }

    pub fn malicious_stops_everywhere_from(&self, min_step: usize) -> bool {
        DecisionNode::all(self.n_packets())
            .filter(|n| n.step >= min_step)
            .all(|n| self.strategy.choice(AgentType::Malicious, n) == Choice::Stop)
    }

    pub fn malicious_continues_everywhere(&self) -> bool {
        self.malicious_stops(0).is_empty()
    }

    /// Whether malicious Alice pools with honest Alice on the opening transfer.
    pub fn malicious_alice_opens(&self) -> bool {
        self.strategy
            .choice(AgentType::Malicious, DecisionNode::new(0, 0))
            == Choice::Continue
    }

    /// True when a malicious `agent` facing an honest counterparty never lets
    /// the swap complete, on any price path.
    pub fn malicious_always_defects(&self, agent: AgentId) -> bool {
        let n = self.n_packets();
        let continues = |node: DecisionNode| {
            let t = if node.mover() == agent {
                AgentType::Malicious
            } else {
                AgentType::Honest
            };
            self.strategy.choice(t, node) == Choice::Continue
        };
        // Up-move counts reachable at the current step with only continues so far.
        let mut reachable = vec![true];
        for k in 0..=n {
            let alive: Vec<bool> = (0..=k)
                .map(|u| reachable[u] && continues(DecisionNode::new(k, u)))
                .collect();
            if k == n {
                return !alive.iter().any(|&a| a);
            }
            reachable = (0..=k + 1)
                .map(|u| (u <= k && alive[u]) || (u > 0 && alive[u - 1]))
                .collect();
        }
        unreachable!()
    }
}

/// Utilities `[alice_type][bob_type][agent]` of every type pairing.
type PairTable<T> = [[[T; 2]; 2]; 2];

fn pair_table<T: Scalar>(mut f: impl FnMut(AgentType, AgentType, AgentId) -> T) -> PairTable<T> {
    AgentType::ALL.map(|ta| AgentType::ALL.map(|tb| AgentId::ALL.map(|agent| f(ta, tb, agent))))
}

fn types_of(
    mover: AgentId,
    mover_type: AgentType,
    other_type: AgentType,
) -> (AgentType, AgentType) {
    match mover {
        AgentId::Alice => (mover_type, other_type),
        AgentId::Bob => (other_type, mover_type),
    }
}

pub fn solve<T: Scalar>(spec: &GameSpec<T>) -> Result<SolveReport<T>> {
    spec.validate()?;
    let n = spec.n_packets;
    let half = T::half();
    let mut malicious = BTreeMap::new();
    let mut node_values = BTreeMap::new();

    // Outcome tables of the nodes one step ahead, indexed by up-moves.
    let mut ahead: Vec<PairTable<T>> = Vec::new();
    for k in (0..=n).rev() {
        let mut here = Vec::with_capacity(k + 1);
        for u in 0..=k {
            let node = DecisionNode::new(k, u);
            let mover = node.mover();
            let other = mover.counterparty();

            let stop = settle(spec, Exit::Stop(node));
            let cont: PairTable<T> = if k == n {
                let success = settle(spec, Exit::Success { up_moves: u });
                pair_table(|ta, tb, agent| {
                    success
                        .utility(agent, if agent == AgentId::Alice { ta } else { tb })
                        .clone()
                })
            } else {
                let (down, up) = (&ahead[u], &ahead[u + 1]);
                pair_table(|ta, tb, agent| {
                    let (i, j, a) = (ta.index(), tb.index(), agent.index());
                    half.clone() * (down[i][j][a].clone() + up[i][j][a].clone())
                })
            };

            let mut chosen = [Choice::Continue; 2];
            for mover_type in AgentType::ALL {
                let continue_value = AgentType::ALL.iter().fold(T::zero(), |acc, &other_type| {
                    let (ta, tb) = types_of(mover, mover_type, other_type);
                    acc + spec.population.prior(other, other_type)
                        * cont[ta.index()][tb.index()][mover.index()].clone()
                });
                let stop_value = stop.utility(mover, mover_type).clone();
                let choice = match mover_type {
                    AgentType::Honest => Choice::Continue,
                    AgentType::Malicious if continue_value > stop_value => Choice::Continue,
                    AgentType::Malicious => Choice::Stop,
                };
                chosen[mover_type.index()] = choice;
                node_values.insert(
                    (mover, mover_type, node),
                    NodeValue {
                        continue_value,
                        stop_value,
                    },
                );
            }
            malicious.insert(node, chosen[AgentType::Malicious.index()]);

            here.push(pair_table(|ta, tb, agent| {
                let mover_type = if mover == AgentId::Alice { ta } else { tb };
                let agent_type = if agent == AgentId::Alice { ta } else { tb };
                match chosen[mover_type.index()] {
                    Choice::Continue => cont[ta.index()][tb.index()][agent.index()].clone(),
                    Choice::Stop => stop.utility(agent, agent_type).clone(),
                }
            }));
        }
        ahead = here;
    }

    let root = &ahead[0];
    let ex_ante = AgentId::ALL.map(|agent| {
        AgentType::ALL.map(|own| {
            AgentType::ALL.iter().fold(T::zero(), |acc, &other_type| {
                let (ta, tb) = types_of(agent, own, other_type);
                acc + spec.population.prior(agent.counterparty(), other_type)
                    * root[ta.index()][tb.index()][agent.index()].clone()
            })
        })
    });

    let honesty = audit_values(n, &node_values);
    Ok(SolveReport {
        strategy: StrategyProfile {
            n_packets: n,
            malicious,
        },
        node_values,
        honesty,
        ex_ante,
        strictly_positive_prices: spec.market.strictly_positive(),
    })
}

/// Honesty is willing for an agent when `c` beats `s` strictly for its honest
/// type at every node where it moves. All price nodes count as reachable
/// because honest play continues everywhere.
fn audit_values<T: Scalar>(
    n_packets: usize,
    values: &BTreeMap<(AgentId, AgentType, DecisionNode), NodeValue<T>>,
) -> HonestyAudit<T> {
    let mut willing = [true; 2];
    let mut binding = Vec::new();
    for k in 0..=n_packets {
        let mut worst: Option<BindingNode<T>> = None;
        for u in 0..=k {
            let node = DecisionNode::new(k, u);
            let agent = node.mover();
            let margin = values[&(agent, AgentType::Honest, node)].margin();
            if margin <= T::zero() {
                willing[agent.index()] = false;
            }
            if worst.as_ref().is_none_or(|w| margin < w.margin) {
                worst = Some(BindingNode {
                    agent,
                    node,
                    margin,
                });
            }
        }
        binding.extend(worst);
    }
    HonestyAudit {
        willing_alice: willing[AgentId::Alice.index()],
        willing_bob: willing[AgentId::Bob.index()],
        binding,
    }
}

pub fn audit_honesty<T: Scalar>(spec: &GameSpec<T>) -> Result<HonestyAudit<T>> {
    Ok(solve(spec)?.honesty)
}
