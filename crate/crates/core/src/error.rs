use thiserror::Error;

use crate::engine::{GameId, PlayerId};

/// Errors raised by the engine and the environment wrapper.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("{game} does not support {players} players (supported: {min}..={max})")]
    UnsupportedPlayers {
        game: GameId,
        players: usize,
        min: usize,
        max: usize,
    },
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("action {action} is not legal in the current state")]
    IllegalAction { action: usize },
    #[error("operation requires a running game but the state is terminal")]
    Terminal,
    #[error("operation requires a terminal state")]
    NotTerminal,
    #[error("player {0} is out of range")]
    BadPlayer(PlayerId),
    #[error("reward mode `{mode}` requires a game with a score; {game} has none")]
    ModeUnsupported { mode: &'static str, game: GameId },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Failure to parse a binary blob (state or checkpoint).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    Version(u16),
    #[error("unexpected end of input")]
    Truncated,
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("trailing bytes after payload")]
    Trailing,
}

/// Failures of the baseline agents.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("no legal action to choose from")]
    EmptyMask,
    #[error("unknown agent `{0}` (expected random, osla or mcts)")]
    UnknownAgent(String),
    #[error(transparent)]
    Game(#[from] GameError),
}
