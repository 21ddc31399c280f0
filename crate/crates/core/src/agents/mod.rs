//! Baseline opponents: uniform random, one-step look-ahead and open-loop
//! UCT search over redeterminized states.

mod mcts;
mod osla;
mod random;

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use mcts::{mcts_act, search, select_child, Child, MctsAgent, SearchNode, SearchTree};
pub use osla::{osla_act, OslaAgent};
pub use random::{random_act, RandomAgent};

use crate::engine::{ActionId, GameState, PlayerId};
use crate::error::AgentError;
use crate::rewards::terminal_reward;

/// Anything that picks actions for the player to move.
pub trait Agent {
    fn name(&self) -> &str;
    fn act(&mut self, state: &GameState) -> Result<ActionId, AgentError>;
}

/// Search limits of [`MctsAgent`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentBudget {
    pub mcts_iterations: u32,
    pub rollout_depth_cap: u32,
    pub exploration_constant: f64,
}

impl Default for AgentBudget {
    fn default() -> Self {
        Self {
            mcts_iterations: 128,
            rollout_depth_cap: 100,
            exploration_constant: std::f64::consts::SQRT_2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Random,
    Osla,
    Mcts,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Random, AgentKind::Osla, AgentKind::Mcts];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Osla => "osla",
            AgentKind::Mcts => "mcts",
        }
    }

    pub fn build(self, budget: AgentBudget, seed: u64) -> Box<dyn Agent + Send> {
        match self {
            AgentKind::Random => Box::new(RandomAgent::new(seed)),
            AgentKind::Osla => Box::new(OslaAgent::new(seed)),
            AgentKind::Mcts => Box::new(MctsAgent::new(budget, seed)),
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AgentError::UnknownAgent(s.to_string()))
    }
}

/// State evaluation shared by the planners, in [-1, 1]: the terminal reward
/// once the game is over, otherwise the player's score normalized by the
/// largest score magnitude (0 for games without a score).
pub fn heuristic(state: &GameState, player: PlayerId) -> f64 {
    if let Some(r) = state.result() {
        return terminal_reward(&r, player);
    }
    if !state.spec().has_score {
        return 0.0;
    }
    let scores = state.scores();
    let scale = 1.0 + scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    scores[player.0] / scale
}

pub(crate) fn agent_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform choice among the actions whose value equals the maximum.
pub(crate) fn argmax_uniform<R: Rng + ?Sized>(
    scored: &[(ActionId, f64)],
    rng: &mut R,
) -> Option<ActionId> {
    let best = scored
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<ActionId> = scored
        .iter()
        .filter(|&&(_, v)| v == best)
        .map(|&(a, _)| a)
        .collect();
    ties.choose(rng).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GameId;

    #[test]
    fn names_roundtrip() {
        for k in AgentKind::ALL {
            assert_eq!(k.name().parse::<AgentKind>().unwrap(), k);
        }
        assert!(matches!(
            "alphazero".parse::<AgentKind>(),
            Err(AgentError::UnknownAgent(_))
        ));
    }

    #[test]
    fn heuristic_is_bounded_and_zero_without_score() {
        let s = GameState::reset(GameId::TicTacToe, 2, 0).unwrap();
        assert_eq!(heuristic(&s, PlayerId(0)), 0.0);
        let d = GameState::reset(GameId::DotsAndBoxes, 2, 0).unwrap();
        assert_eq!(heuristic(&d, PlayerId(1)), 0.0);
    }
}
