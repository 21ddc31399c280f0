//! Single-environment wrapper combining a game state with deferred rewards.

use crate::engine::{ActionId, ActionMask, GameId, GameResult, GameState, Observation, PlayerId};
use crate::error::GameError;
use crate::rewards::{RewardAccumulator, RewardMode};

/// What a [`Env::step`] call reports.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvStep {
    /// Player who took the action.
    pub actor: PlayerId,
    /// Player to act next, `None` at the end of the game.
    pub next: Option<PlayerId>,
    /// Reward delivered to `next` at this decision point, or to `actor` when
    /// the game ended.
    pub reward: f64,
    /// Final undelivered reward of every player, filled on the last step.
    pub final_rewards: Vec<f64>,
    pub result: Option<GameResult>,
}

impl EnvStep {
    pub fn done(&self) -> bool {
        self.next.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Env {
    game: GameId,
    num_players: usize,
    mode: RewardMode,
    state: GameState,
    rewards: RewardAccumulator,
}

impl Env {
    pub fn new(game: GameId, num_players: usize, mode: RewardMode, seed: u64) -> Result<Self, GameError> {
        mode.check(game)?;
        let state = GameState::reset(game, num_players, seed)?;
        let rewards = RewardAccumulator::new(mode, &state)?;
        Ok(Self {
            game,
            num_players,
            mode,
            state,
            rewards,
        })
    }

    pub fn reset(&mut self, seed: u64) -> PlayerId {
        self.state = GameState::reset(self.game, self.num_players, seed)
            .expect("configuration validated at construction");
        self.rewards = RewardAccumulator::new(self.mode, &self.state).expect("mode validated");
        self.state.current_player().expect("fresh game is running")
    }

    pub fn game(&self) -> GameId {
        self.game
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn reward_mode(&self) -> RewardMode {
        self.mode
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn current_player(&self) -> Result<PlayerId, GameError> {
        self.state.current_player()
    }

    pub fn observe(&self, player: PlayerId) -> Observation {
        self.state.observe(player)
    }

    pub fn legal_actions(&self) -> Result<ActionMask, GameError> {
        self.state.legal_actions()
    }

    /// Hands out the reward accrued by `player` since their last call.
    pub fn take_reward(&mut self, player: PlayerId) -> Result<f64, GameError> {
        self.rewards.step_reward(&self.state, player)
    }

    /// Applies `action` for the current player. On an illegal action the
    /// state is left untouched.
    pub fn step(&mut self, action: ActionId) -> Result<EnvStep, GameError> {
        let actor = self.state.current_player()?;
        let out = self.state.apply(action)?;
        match out.terminal {
            None => {
                let next = self.state.current_player()?;
                let reward = self.take_reward(next)?;
                Ok(EnvStep {
                    actor,
                    next: Some(next),
                    reward,
                    final_rewards: Vec::new(),
                    result: None,
                })
            }
            Some(result) => {
                let final_rewards = (0..self.num_players)
                    .map(|p| self.take_reward(PlayerId(p)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(EnvStep {
                    actor,
                    next: None,
                    reward: final_rewards[actor.0],
                    final_rewards,
                    result: Some(result),
                })
            }
        }
    }
}
