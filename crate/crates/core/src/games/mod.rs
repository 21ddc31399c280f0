//! Concrete rulesets. Each game fixes its action enumeration and its
//! observation layout; both tables are printed by `tabletop inspect` and
//! reproduced in `docs/games.md`.

pub mod diamant;
pub mod dots_and_boxes;
pub mod exploding_kittens;
pub mod love_letter;
pub mod sushi_go;
pub mod tictactoe;

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameId, GameResult, ObservationLayout};
use crate::error::{DecodeError, GameError};
use crate::rng::GameRng;

/// Per-game behaviour behind [`crate::engine::GameState`].
///
/// Players are plain indices here; the public wrapper checks lifecycle and
/// legality before calling `apply`, so implementations may assume a running
/// state and a legal action.
pub(crate) trait Rules: Clone + std::fmt::Debug + PartialEq {
    fn new(num_players: usize, rng: &mut GameRng) -> Self;
    fn num_players(&self) -> usize;
    /// `None` once the game is over.
    fn current_player(&self) -> Option<usize>;
    /// `mask` arrives zeroed with length equal to the action count.
    fn legal_actions(&self, mask: &mut [bool]);
    fn apply(&mut self, action: ActionId, rng: &mut GameRng);
    /// `out` arrives zeroed with the layout's length.
    fn observe(&self, player: usize, out: &mut [f32]);
    fn result(&self) -> Option<GameResult>;
    fn scores(&self) -> Vec<f64>;
    fn redeterminize(&mut self, observer: usize, rng: &mut GameRng);
    fn encode(&self, enc: &mut Encoder);
    fn decode(dec: &mut Decoder<'_>, num_players: usize) -> Result<Self, DecodeError>;
    fn census(&self) -> Option<CardMultiset> {
        None
    }
}

/// Static description of a game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSpec {
    pub id: GameId,
    pub min_players: usize,
    pub max_players: usize,
    pub action_count: usize,
    pub perfect_info: bool,
    pub simultaneous: bool,
    pub has_score: bool,
}

impl GameSpec {
    pub fn supports(&self, players: usize) -> bool {
        (self.min_players..=self.max_players).contains(&players)
    }

    pub fn check_players(&self, players: usize) -> Result<(), GameError> {
        if self.supports(players) {
            Ok(())
        } else {
            Err(GameError::UnsupportedPlayers {
                game: self.id,
                players,
                min: self.min_players,
                max: self.max_players,
            })
        }
    }

    pub fn observation_len(&self, players: usize) -> usize {
        layout_unchecked(self.id, players).total()
    }
}

static SPECS: [GameSpec; 6] = [
    GameSpec {
        id: GameId::TicTacToe,
        min_players: 2,
        max_players: 2,
        action_count: tictactoe::ACTION_COUNT,
        perfect_info: true,
        simultaneous: false,
        has_score: false,
    },
    GameSpec {
        id: GameId::Diamant,
        min_players: 2,
        max_players: 5,
        action_count: diamant::ACTION_COUNT,
        perfect_info: false,
        simultaneous: true,
        has_score: true,
    },
    GameSpec {
        id: GameId::LoveLetter,
        min_players: 2,
        max_players: 4,
        action_count: love_letter::ACTION_COUNT,
        perfect_info: false,
        simultaneous: false,
        has_score: true,
    },
    GameSpec {
        id: GameId::ExplodingKittens,
        min_players: 2,
        max_players: 5,
        action_count: exploding_kittens::ACTION_COUNT,
        perfect_info: false,
        simultaneous: false,
        has_score: false,
    },
    GameSpec {
        id: GameId::SushiGo,
        min_players: 2,
        max_players: 5,
        action_count: sushi_go::ACTION_COUNT,
        perfect_info: false,
        simultaneous: true,
        has_score: true,
    },
    GameSpec {
        id: GameId::DotsAndBoxes,
        min_players: 2,
        max_players: 4,
        action_count: dots_and_boxes::ACTION_COUNT,
        perfect_info: true,
        simultaneous: false,
        has_score: true,
    },
];

pub fn spec(game: GameId) -> &'static GameSpec {
    SPECS
        .iter()
        .find(|s| s.id == game)
        .expect("every game has a spec")
}

pub fn action_space_size(game: GameId, players: usize) -> Result<usize, GameError> {
    let spec = spec(game);
    spec.check_players(players)?;
    Ok(spec.action_count)
}

pub fn observation_layout(game: GameId, players: usize) -> Result<ObservationLayout, GameError> {
    spec(game).check_players(players)?;
    Ok(layout_unchecked(game, players))
}

fn layout_unchecked(game: GameId, players: usize) -> ObservationLayout {
    match game {
        GameId::TicTacToe => tictactoe::layout(),
        GameId::Diamant => diamant::layout(players),
        GameId::LoveLetter => love_letter::layout(players),
        GameId::ExplodingKittens => exploding_kittens::layout(players),
        GameId::SushiGo => sushi_go::layout(players),
        GameId::DotsAndBoxes => dots_and_boxes::layout(),
    }
}

/// Meaning of every index of the game's action space, in order.
pub fn action_table(game: GameId) -> Vec<String> {
    let n = spec(game).action_count;
    (0..n)
        .map(|a| match game {
            GameId::TicTacToe => tictactoe::describe_action(a),
            GameId::Diamant => diamant::describe_action(a),
            GameId::LoveLetter => love_letter::describe_action(a),
            GameId::ExplodingKittens => exploding_kittens::describe_action(a),
            GameId::SushiGo => sushi_go::describe_action(a),
            GameId::DotsAndBoxes => dots_and_boxes::describe_action(a),
        })
        .collect()
}

/// Counts per card type, used to check that no card is created or lost.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CardMultiset {
    counts: Vec<u32>,
}

impl CardMultiset {
    pub fn with_types(types: usize) -> Self {
        Self {
            counts: vec![0; types],
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn add(&mut self, card: usize, n: u32) {
        self.counts[card] += n;
    }

    pub fn add_all<I: IntoIterator<Item = usize>>(&mut self, cards: I) {
        for c in cards {
            self.counts[c] += 1;
        }
    }

    pub fn count(&self, card: usize) -> u32 {
        self.counts[card]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Shared helpers for the card games' encoders.
pub(crate) fn encode_cards(enc: &mut Encoder, cards: &[u8]) {
    enc.u8_slice(cards);
}

pub(crate) fn decode_cards(
    dec: &mut Decoder<'_>,
    types: usize,
) -> Result<Vec<u8>, DecodeError> {
    let v = dec.u8_vec()?;
    if v.iter().any(|&c| c as usize >= types) {
        return Err(DecodeError::Invalid("card type out of range".into()));
    }
    Ok(v)
}

pub(crate) fn check_seating(
    seating: &crate::engine::Seating,
    n: usize,
) -> Result<(), DecodeError> {
    if seating.num_players() == n {
        Ok(())
    } else {
        Err(DecodeError::Invalid("seating size".into()))
    }
}

pub(crate) fn check_len<T>(v: &[T], n: usize, what: &str) -> Result<(), DecodeError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(DecodeError::Invalid(format!(
            "{what}: expected {n} entries, found {}",
            v.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_counts_are_normative() {
        let expect = [
            (GameId::TicTacToe, 9),
            (GameId::LoveLetter, 68),
            (GameId::ExplodingKittens, 43),
            (GameId::SushiGo, 20),
            (GameId::DotsAndBoxes, 82),
            (GameId::Diamant, 3),
        ];
        for (g, n) in expect {
            let s = spec(g);
            for p in s.min_players..=s.max_players {
                assert_eq!(action_space_size(g, p).unwrap(), n, "{g}");
            }
            assert_eq!(action_table(g).len(), n);
        }
    }

    #[test]
    fn layouts_have_documented_sizes() {
        assert_eq!(observation_layout(GameId::TicTacToe, 2).unwrap().total(), 9);
        assert_eq!(observation_layout(GameId::DotsAndBoxes, 2).unwrap().total(), 82);
        let ll = observation_layout(GameId::LoveLetter, 2).unwrap();
        assert_eq!(
            ll.spans.iter().map(|s| s.len).collect::<Vec<_>>(),
            vec![8, 8, 2]
        );
        assert_eq!(ll.total(), 18);
    }

    #[test]
    fn unsupported_counts_are_rejected() {
        assert!(matches!(
            action_space_size(GameId::TicTacToe, 3),
            Err(GameError::UnsupportedPlayers { .. })
        ));
        assert!(observation_layout(GameId::LoveLetter, 5).is_err());
        assert!(observation_layout(GameId::Diamant, 1).is_err());
    }
}
