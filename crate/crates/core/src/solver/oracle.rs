//! Brute-force expected utilities by explicit enumeration.
//!
//! Independent of the backward-induction recursion: every counterparty type
//! and every completion of the price path is played out to a terminal outcome
//! and weighted by its probability.

use crate::error::{Error, Result};
use crate::game::{
    settle, Action, AgentId, AgentType, Choice, GameSpec, History, HistoryState, Move,
};
use crate::scalar::Scalar;

use super::StrategyProfile;

pub const ORACLE_MAX_PACKETS: usize = 12;

/// Expected utility of `agent` of `agent_type` given that `history` occurred,
/// when both sides follow `profile` from there on.
pub fn oracle_value<T: Scalar>(
    spec: &GameSpec<T>,
    profile: &StrategyProfile,
    agent: AgentId,
    agent_type: AgentType,
    history: &History,
) -> Result<T> {
    let n = spec.n_packets;
    if n > ORACLE_MAX_PACKETS {
        return Err(Error::EnumerationGuard {
            n,
            max: ORACLE_MAX_PACKETS,
        });
    }
    if profile.n_packets() != n {
        return Err(Error::UnsolvedSpec(format!(
            "profile has N = {}, spec has N = {n}",
            profile.n_packets()
        )));
    }
    if history.n_packets() != n {
        return Err(Error::MalformedHistory(format!(
            "history built for N = {}, spec has N = {n}",
            history.n_packets()
        )));
    }

    let remaining = n - history.moves();
    let mut path_weight = T::one();
    for _ in 0..remaining {
        path_weight = path_weight * T::half();
    }

    let other = agent.counterparty();
    let mut total = T::zero();
    for other_type in AgentType::ALL {
        let prior = spec.population.prior(other, other_type);
        let type_of = |a: AgentId| if a == agent { agent_type } else { other_type };
        for path in 0..(1u64 << remaining) {
            let mut bits = path;
            let mut state = history.state();
            let exit = loop {
                let action = match state {
                    HistoryState::Terminal(exit) => break exit,
                    HistoryState::AwaitingMove { .. } => {
                        let m = if bits & 1 == 1 { Move::Up } else { Move::Down };
                        bits >>= 1;
                        Action::Wait(m)
                    }
                    HistoryState::Decision(node) => {
                        match profile.choice(type_of(node.mover()), node) {
                            Choice::Continue => Action::Continue,
                            Choice::Stop => Action::Stop,
                        }
                    }
                };
                state = state
                    .advance(action, n)
                    .expect("profile play follows the history grammar");
            };
            let u = settle(spec, exit).utility(agent, agent_type).clone();
            total = total + prior.clone() * path_weight.clone() * u;
        }
    }
    Ok(total)
}
