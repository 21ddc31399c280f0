//! Dots and Boxes on a 7x5 box grid (8x6 dots, 82 edges).
//!
//! Edge indices: horizontal edges first, `row * 7 + col` for dot rows 0..=5
//! and columns 0..7, then vertical edges, `42 + row * 8 + col` for box rows
//! 0..5 and dot columns 0..=7.

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameResult, ObservationLayout, Seating};
use crate::error::DecodeError;
use crate::games::Rules;
use crate::rng::GameRng;

pub const COLS: usize = 7;
pub const ROWS: usize = 5;
pub const HORIZONTAL: usize = (ROWS + 1) * COLS;
pub const VERTICAL: usize = ROWS * (COLS + 1);
pub const ACTION_COUNT: usize = HORIZONTAL + VERTICAL;
pub const BOXES: usize = ROWS * COLS;

const NONE: u8 = u8::MAX;

pub fn layout() -> ObservationLayout {
    ObservationLayout::builder()
        .field(
            "edges",
            ACTION_COUNT,
            "per edge (action order): +1 drawn by observer, -1 drawn by another player, 0 undrawn",
        )
        .build()
}

pub fn describe_action(a: ActionId) -> String {
    if a < HORIZONTAL {
        format!("horizontal edge dot-row {} col {}", a / COLS, a % COLS)
    } else {
        let v = a - HORIZONTAL;
        format!("vertical edge box-row {} dot-col {}", v / (COLS + 1), v % (COLS + 1))
    }
}

/// The four edges of box `(row, col)`: top, bottom, left, right.
pub fn box_edges(row: usize, col: usize) -> [usize; 4] {
    [
        row * COLS + col,
        (row + 1) * COLS + col,
        HORIZONTAL + row * (COLS + 1) + col,
        HORIZONTAL + row * (COLS + 1) + col + 1,
    ]
}

/// Boxes (as `row * COLS + col`) that border edge `e`.
fn adjacent_boxes(e: usize) -> impl Iterator<Item = usize> {
    let (a, b) = if e < HORIZONTAL {
        let (r, c) = (e / COLS, e % COLS);
        (
            (r > 0).then(|| (r - 1) * COLS + c),
            (r < ROWS).then(|| r * COLS + c),
        )
    } else {
        let v = e - HORIZONTAL;
        let (r, c) = (v / (COLS + 1), v % (COLS + 1));
        (
            (c > 0).then(|| r * COLS + c - 1),
            (c < COLS).then(|| r * COLS + c),
        )
    };
    a.into_iter().chain(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DotsAndBoxes {
    seating: Seating,
    edges: [u8; ACTION_COUNT],
    boxes: [u8; BOXES],
    to_move: u8,
    drawn: u8,
}

impl DotsAndBoxes {
    fn box_count(&self, player: usize) -> usize {
        self.boxes.iter().filter(|&&b| b as usize == player).count()
    }

    pub fn completed_boxes(&self) -> usize {
        self.boxes.iter().filter(|&&b| b != NONE).count()
    }

    fn finished(&self) -> bool {
        self.drawn as usize == ACTION_COUNT
    }
}

impl Rules for DotsAndBoxes {
    fn new(num_players: usize, rng: &mut GameRng) -> Self {
        let seating = Seating::random(num_players, rng);
        let to_move = seating.first() as u8;
        Self {
            seating,
            edges: [NONE; ACTION_COUNT],
            boxes: [NONE; BOXES],
            to_move,
            drawn: 0,
        }
    }

    fn num_players(&self) -> usize {
        self.seating.num_players()
    }

    fn current_player(&self) -> Option<usize> {
        (!self.finished()).then_some(self.to_move as usize)
    }

    fn legal_actions(&self, mask: &mut [bool]) {
        for (m, &e) in mask.iter_mut().zip(&self.edges) {
            *m = e == NONE;
        }
    }

    fn apply(&mut self, action: ActionId, _rng: &mut GameRng) {
        let p = self.to_move;
        self.edges[action] = p;
        self.drawn += 1;
        let mut scored = false;
        for b in adjacent_boxes(action) {
            let (r, c) = (b / COLS, b % COLS);
            if box_edges(r, c).iter().all(|&e| self.edges[e] != NONE) {
                self.boxes[b] = p;
                scored = true;
            }
        }
        if !scored {
            self.to_move = self.seating.next(p as usize) as u8;
        }
    }

    fn observe(&self, player: usize, out: &mut [f32]) {
        for (o, &e) in out.iter_mut().zip(&self.edges) {
            *o = match e {
                NONE => 0.0,
                e if e as usize == player => 1.0,
                _ => -1.0,
            };
        }
    }

    fn result(&self) -> Option<GameResult> {
        self.finished()
            .then(|| GameResult::from_scores(self.scores()))
    }

    fn scores(&self) -> Vec<f64> {
        (0..self.num_players())
            .map(|p| self.box_count(p) as f64)
            .collect()
    }

    fn redeterminize(&mut self, _observer: usize, _rng: &mut GameRng) {}

    fn encode(&self, enc: &mut Encoder) {
        self.seating.encode(enc);
        enc.bytes(&self.edges);
        enc.bytes(&self.boxes);
        enc.u8(self.to_move);
        enc.u8(self.drawn);
    }

    fn decode(dec: &mut Decoder<'_>, num_players: usize) -> Result<Self, DecodeError> {
        let seating = Seating::decode(dec)?;
        super::check_seating(&seating, num_players)?;
        let mut edges = [0u8; ACTION_COUNT];
        edges.copy_from_slice(dec.take(ACTION_COUNT)?);
        let mut boxes = [0u8; BOXES];
        boxes.copy_from_slice(dec.take(BOXES)?);
        let owner_ok = |c: &u8| *c == NONE || (*c as usize) < num_players;
        if !edges.iter().all(owner_ok) || !boxes.iter().all(owner_ok) {
            return Err(DecodeError::Invalid("owner index".into()));
        }
        let to_move = dec.u8()?;
        let drawn = dec.u8()?;
        if to_move as usize >= num_players
            || drawn as usize != edges.iter().filter(|&&e| e != NONE).count()
        {
            return Err(DecodeError::Invalid("turn bookkeeping".into()));
        }
        Ok(Self {
            seating,
            edges,
            boxes,
            to_move,
            drawn,
        })
    }
}
