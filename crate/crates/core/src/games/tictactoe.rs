//! Tic Tac Toe on a 3x3 board. Action `i` marks cell `i` (row-major).

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameResult, ObservationLayout, Outcome, Seating};
use crate::error::DecodeError;
use crate::games::Rules;
use crate::rng::GameRng;

pub const ACTION_COUNT: usize = 9;

pub(crate) const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

const EMPTY: u8 = u8::MAX;

pub fn layout() -> ObservationLayout {
    ObservationLayout::builder()
        .field(
            "board",
            9,
            "row-major cells: +1 observer's mark, -1 opponent's mark, 0 empty",
        )
        .build()
}

pub fn describe_action(a: ActionId) -> String {
    format!("mark cell row {} col {}", a / 3, a % 3)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TicTacToe {
    seating: Seating,
    /// Owner of each cell, or `EMPTY`.
    cells: [u8; 9],
    to_move: u8,
    winner: Option<u8>,
    finished: bool,
}

impl TicTacToe {
    fn line_complete(&self, by: u8) -> bool {
        LINES
            .iter()
            .any(|l| l.iter().all(|&c| self.cells[c] == by))
    }
}

impl Rules for TicTacToe {
    fn new(num_players: usize, rng: &mut GameRng) -> Self {
        let seating = Seating::random(num_players, rng);
        let to_move = seating.first() as u8;
        Self {
            seating,
            cells: [EMPTY; 9],
            to_move,
            winner: None,
            finished: false,
        }
    }

    fn num_players(&self) -> usize {
        2
    }

    fn current_player(&self) -> Option<usize> {
        (!self.finished).then_some(self.to_move as usize)
    }

    fn legal_actions(&self, mask: &mut [bool]) {
        for (m, c) in mask.iter_mut().zip(self.cells) {
            *m = c == EMPTY;
        }
    }

    fn apply(&mut self, action: ActionId, _rng: &mut GameRng) {
        let p = self.to_move;
        self.cells[action] = p;
        if self.line_complete(p) {
            self.winner = Some(p);
            self.finished = true;
        } else if self.cells.iter().all(|&c| c != EMPTY) {
            self.finished = true;
        } else {
            self.to_move = self.seating.next(p as usize) as u8;
        }
    }

    fn observe(&self, player: usize, out: &mut [f32]) {
        for (o, &c) in out.iter_mut().zip(&self.cells) {
            *o = match c {
                EMPTY => 0.0,
                c if c as usize == player => 1.0,
                _ => -1.0,
            };
        }
    }

    fn result(&self) -> Option<GameResult> {
        if !self.finished {
            return None;
        }
        let (outcomes, ranks) = match self.winner {
            Some(w) => {
                let w = w as usize;
                (
                    (0..2)
                        .map(|p| if p == w { Outcome::Win } else { Outcome::Loss })
                        .collect(),
                    (0..2).map(|p| if p == w { 1 } else { 2 }).collect(),
                )
            }
            None => (vec![Outcome::Draw; 2], vec![1, 1]),
        };
        Some(GameResult {
            outcomes,
            scores: vec![0.0; 2],
            ranks,
        })
    }

    fn scores(&self) -> Vec<f64> {
        vec![0.0; 2]
    }

    fn redeterminize(&mut self, _observer: usize, _rng: &mut GameRng) {}

    fn encode(&self, enc: &mut Encoder) {
        self.seating.encode(enc);
        enc.bytes(&self.cells);
        enc.u8(self.to_move);
        enc.u8(self.winner.unwrap_or(EMPTY));
        enc.bool(self.finished);
    }

    fn decode(dec: &mut Decoder<'_>, num_players: usize) -> Result<Self, DecodeError> {
        let seating = Seating::decode(dec)?;
        super::check_seating(&seating, num_players)?;
        let mut cells = [0u8; 9];
        cells.copy_from_slice(dec.take(9)?);
        let valid = |c: u8| c == EMPTY || (c as usize) < num_players;
        if !cells.iter().all(|&c| valid(c)) {
            return Err(DecodeError::Invalid("cell owner".into()));
        }
        let to_move = dec.u8()?;
        let winner = match dec.u8()? {
            EMPTY => None,
            w if (w as usize) < num_players => Some(w),
            _ => return Err(DecodeError::Invalid("winner".into())),
        };
        let finished = dec.bool()?;
        if to_move as usize >= num_players {
            return Err(DecodeError::Invalid("player to move".into()));
        }
        Ok(Self {
            seating,
            cells,
            to_move,
            winner,
            finished,
        })
    }
}
