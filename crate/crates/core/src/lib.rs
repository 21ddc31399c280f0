//! Multi-agent tabletop game engine with action masks, game-agnostic
//! rewards, baseline planning agents and a self-play PPO trainer.

pub mod agents;
pub mod cli;
pub mod codec;
pub mod config;
pub mod engine;
pub mod env;
pub mod error;
pub mod eval;
pub mod games;
pub mod nn;
pub mod ppo;
pub mod rewards;
pub mod rng;
pub mod selfplay;

pub use engine::{
    ActionId, ActionMask, GameId, GameResult, GameState, Observation, Outcome, PlayerId,
};
pub use error::{AgentError, DecodeError, GameError};
pub use env::{Env, EnvStep};
pub use rewards::RewardMode;
