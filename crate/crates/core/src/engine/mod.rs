//! Game-agnostic engine: identifiers, masks, observations, results and the
//! dispatching [`GameState`].

mod seating;
mod state;

use std::fmt;
use std::str::FromStr;

pub use seating::Seating;
pub use state::{GameState, StepOutcome, STATE_MAGIC, STATE_VERSION};

use crate::error::GameError;

/// Index into the game's enumerated action space.
pub type ActionId = usize;

/// Largest action space among the implemented games.
pub const MAX_ACTIONS: usize = 82;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameId {
    TicTacToe,
    Diamant,
    LoveLetter,
    ExplodingKittens,
    SushiGo,
    DotsAndBoxes,
}

impl GameId {
    pub const ALL: [GameId; 6] = [
        GameId::TicTacToe,
        GameId::Diamant,
        GameId::LoveLetter,
        GameId::ExplodingKittens,
        GameId::SushiGo,
        GameId::DotsAndBoxes,
    ];

    /// Canonical lowercase name used by the CLI, file names and checkpoints.
    pub fn name(self) -> &'static str {
        match self {
            GameId::TicTacToe => "tictactoe",
            GameId::Diamant => "diamant",
            GameId::LoveLetter => "loveletter",
            GameId::ExplodingKittens => "explodingkittens",
            GameId::SushiGo => "sushigo",
            GameId::DotsAndBoxes => "dotsandboxes",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            GameId::TicTacToe => 1,
            GameId::Diamant => 2,
            GameId::LoveLetter => 3,
            GameId::ExplodingKittens => 4,
            GameId::SushiGo => 5,
            GameId::DotsAndBoxes => 6,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.code() == code)
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameId {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Self::ALL
            .into_iter()
            .find(|g| g.name() == key)
            .ok_or_else(|| GameError::UnknownGame(s.to_string()))
    }
}

/// Fixed-length indicator vector over the game's action space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionMask {
    bits: Vec<bool>,
}

impl ActionMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_legal(&self, action: ActionId) -> bool {
        self.bits.get(action).copied().unwrap_or(false)
    }

    /// Number of set bits.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn legal(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_f32(&self) -> Vec<f32> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

/// Per-player numeric view of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub owner: PlayerId,
    pub values: Vec<f32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win,
    Loss,
    Draw,
}

/// Final outcome of a finished game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameResult {
    pub outcomes: Vec<Outcome>,
    pub scores: Vec<f64>,
    /// Competition ranking, 1 = best; tied players share the better rank.
    pub ranks: Vec<usize>,
}

impl GameResult {
    /// Rank players by `keys` (higher is better). A unique best player wins;
    /// several tied best players all draw; everyone else loses.
    pub fn from_keys(keys: &[f64], scores: Vec<f64>) -> Self {
        let ranks: Vec<usize> = keys
            .iter()
            .map(|k| 1 + keys.iter().filter(|o| *o > k).count())
            .collect();
        let leaders = ranks.iter().filter(|r| **r == 1).count();
        let outcomes = ranks
            .iter()
            .map(|&r| match (r, leaders) {
                (1, 1) => Outcome::Win,
                (1, _) => Outcome::Draw,
                _ => Outcome::Loss,
            })
            .collect();
        Self {
            outcomes,
            scores,
            ranks,
        }
    }

    pub fn from_scores(scores: Vec<f64>) -> Self {
        let keys = scores.clone();
        Self::from_keys(&keys, scores)
    }

    pub fn num_players(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome(&self, p: PlayerId) -> Outcome {
        self.outcomes[p.0]
    }

    /// Score of the best-ranked player (the winner, or a tied leader).
    pub fn winner_score(&self) -> f64 {
        self.ranks
            .iter()
            .zip(&self.scores)
            .filter(|(r, _)| **r == 1)
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Named span of an observation vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpan {
    pub name: &'static str,
    pub offset: usize,
    pub len: usize,
    pub meaning: String,
}

/// Ordered list of spans covering an observation vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationLayout {
    pub spans: Vec<FieldSpan>,
}

impl ObservationLayout {
    pub(crate) fn builder() -> LayoutBuilder {
        LayoutBuilder { spans: Vec::new() }
    }

    pub fn total(&self) -> usize {
        self.spans.last().map(|s| s.offset + s.len).unwrap_or(0)
    }

    pub fn span(&self, name: &str) -> Option<&FieldSpan> {
        self.spans.iter().find(|s| s.name == name)
    }
}

pub(crate) struct LayoutBuilder {
    spans: Vec<FieldSpan>,
}

impl LayoutBuilder {
    pub fn field(mut self, name: &'static str, len: usize, meaning: impl Into<String>) -> Self {
        let offset = self.spans.last().map(|s| s.offset + s.len).unwrap_or(0);
        self.spans.push(FieldSpan {
            name,
            offset,
            len,
            meaning: meaning.into(),
        });
        self
    }

    pub fn build(self) -> ObservationLayout {
        ObservationLayout { spans: self.spans }
    }
}
