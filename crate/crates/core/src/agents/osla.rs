use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{agent_rng, argmax_uniform, heuristic, Agent};
use crate::engine::{ActionId, GameState, PlayerId};
use crate::error::AgentError;

/// Evaluates every legal action on one redeterminization of `state` seen
/// from `player` and picks the best, breaking ties uniformly.
pub fn osla_act<R: Rng + ?Sized>(
    state: &GameState,
    player: PlayerId,
    rng: &mut R,
) -> Result<ActionId, AgentError> {
    let sample = state.redeterminize(player, rng.gen());
    let mask = sample.legal_actions()?;
    let scored: Vec<(ActionId, f64)> = mask
        .legal()
        .map(|a| {
            let mut child = sample.clone();
            child.apply(a)?;
            Ok((a, heuristic(&child, player)))
        })
        .collect::<Result<_, AgentError>>()?;
    argmax_uniform(&scored, rng).ok_or(AgentError::EmptyMask)
}

pub struct OslaAgent {
    rng: ChaCha8Rng,
}

impl OslaAgent {
    pub fn new(seed: u64) -> Self {
        Self { rng: agent_rng(seed) }
    }
}

impl Agent for OslaAgent {
    fn name(&self) -> &str {
        "osla"
    }

    fn act(&mut self, state: &GameState) -> Result<ActionId, AgentError> {
        let me = state.current_player()?;
        osla_act(state, me, &mut self.rng)
    }
}
