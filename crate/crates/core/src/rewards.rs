//! Game-agnostic reward functions and deferred delivery.
//!
//! Every mode is expressed as a per-player value; a player receives the
//! change of that value since their previous decision point, so summed
//! returns telescope to the final value.

use std::fmt;
use std::str::FromStr;

use crate::engine::{GameId, GameResult, GameState, Outcome, PlayerId};
use crate::error::GameError;
use crate::games;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum RewardMode {
    #[default]
    Terminal,
    Score,
    Leader,
    Ordinal,
}

impl RewardMode {
    pub const ALL: [RewardMode; 4] = [
        RewardMode::Terminal,
        RewardMode::Score,
        RewardMode::Leader,
        RewardMode::Ordinal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardMode::Terminal => "terminal",
            RewardMode::Score => "score",
            RewardMode::Leader => "leader",
            RewardMode::Ordinal => "ordinal",
        }
    }

    pub fn requires_score(self) -> bool {
        matches!(self, RewardMode::Score | RewardMode::Leader)
    }

    /// Fails for score-based modes on games without a score.
    pub fn check(self, game: GameId) -> Result<(), GameError> {
        if self.requires_score() && !games::spec(game).has_score {
            Err(GameError::ModeUnsupported {
                mode: self.name(),
                game,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RewardMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown reward mode `{s}` (expected terminal, score, leader or ordinal)"))
    }
}

pub const WIN_REWARD: f64 = 1.0;
pub const LOSS_REWARD: f64 = -1.0;
pub const DRAW_REWARD: f64 = 0.5;

pub fn terminal_reward(result: &GameResult, player: PlayerId) -> f64 {
    match result.outcome(player) {
        Outcome::Win => WIN_REWARD,
        Outcome::Loss => LOSS_REWARD,
        Outcome::Draw => DRAW_REWARD,
    }
}

fn check_player(state: &GameState, player: PlayerId) -> Result<(), GameError> {
    if player.0 < state.num_players() {
        Ok(())
    } else {
        Err(GameError::BadPlayer(player))
    }
}

pub fn score_value(state: &GameState, player: PlayerId) -> Result<f64, GameError> {
    RewardMode::Score.check(state.game())?;
    check_player(state, player)?;
    Ok(state.scores()[player.0])
}

/// Own score minus the best score; zero exactly for the leaders.
pub fn leader_value(state: &GameState, player: PlayerId) -> Result<f64, GameError> {
    RewardMode::Leader.check(state.game())?;
    check_player(state, player)?;
    let scores = state.scores();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(scores[player.0] - best)
}

/// Maps rank 1 to 1 and rank n to 0.
pub fn ordinal_from_rank(rank: usize, players: usize) -> f64 {
    (players - rank) as f64 / (players - 1) as f64
}

/// Competition ranks (1 = best) of `keys`, higher is better.
pub fn ranks(keys: &[f64]) -> Vec<usize> {
    keys.iter()
        .map(|k| 1 + keys.iter().filter(|o| *o > k).count())
        .collect()
}

/// Position in the current ranking: final ranks on terminal states,
/// otherwise ranks by score (everyone tied in games without a score).
pub fn ordinal_value(state: &GameState, player: PlayerId) -> Result<f64, GameError> {
    check_player(state, player)?;
    let n = state.num_players();
    let rank = match state.result() {
        Some(r) => r.ranks[player.0],
        None => ranks(&state.scores())[player.0],
    };
    Ok(ordinal_from_rank(rank, n))
}

/// Reward-function value of `player` in `state` under `mode`.
pub fn mode_value(mode: RewardMode, state: &GameState, player: PlayerId) -> Result<f64, GameError> {
    match mode {
        RewardMode::Terminal => {
            check_player(state, player)?;
            Ok(state
                .result()
                .map_or(0.0, |r| terminal_reward(&r, player)))
        }
        RewardMode::Score => score_value(state, player),
        RewardMode::Leader => leader_value(state, player),
        RewardMode::Ordinal => ordinal_value(state, player),
    }
}

/// Tracks each player's value at their last decision point.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardAccumulator {
    mode: RewardMode,
    last: Vec<f64>,
}

impl RewardAccumulator {
    pub fn new(mode: RewardMode, state: &GameState) -> Result<Self, GameError> {
        mode.check(state.game())?;
        let last = (0..state.num_players())
            .map(|p| mode_value(mode, state, PlayerId(p)))
            .collect::<Result<_, _>>()?;
        Ok(Self { mode, last })
    }

    pub fn mode(&self) -> RewardMode {
        self.mode
    }

    /// Value change for `player` since the previous call for that player.
    /// Call it when the player is about to act, or once at the end.
    pub fn step_reward(&mut self, state: &GameState, player: PlayerId) -> Result<f64, GameError> {
        let now = mode_value(self.mode, state, player)?;
        let delta = now - self.last[player.0];
        self.last[player.0] = now;
        Ok(delta)
    }

    /// Value change not yet delivered, without consuming it.
    pub fn pending(&self, state: &GameState, player: PlayerId) -> Result<f64, GameError> {
        Ok(mode_value(self.mode, state, player)? - self.last[player.0])
    }
}
