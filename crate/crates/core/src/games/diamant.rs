//! Diamant, without relic cards.
//!
//! Each reveal is followed by a decision sub-phase in which every player is
//! asked once, in turn order: explorers still in the cave choose to continue
//! (0) or retreat (1); players already at camp play the pass action (2).
//! Choices stay hidden until everyone has chosen, then resolve together.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameResult, ObservationLayout, Seating};
use crate::error::DecodeError;
use crate::games::{check_len, decode_cards, encode_cards, CardMultiset, Rules};
use crate::rng::GameRng;

pub const ACTION_COUNT: usize = 3;
pub const CONTINUE: ActionId = 0;
pub const RETREAT: ActionId = 1;
pub const PASS: ActionId = 2;

pub const ROUNDS: u8 = 5;
pub const TREASURES: [u8; 15] = [1, 2, 3, 4, 5, 5, 7, 7, 9, 11, 11, 13, 14, 15, 17];
pub const HAZARD_TYPES: usize = 5;
pub const HAZARD_COPIES: u8 = 3;
/// Card ids: `0..15` are the treasure cards, `15 + h` is hazard type `h`.
pub const CARD_TYPES: usize = TREASURES.len() + HAZARD_TYPES;

const NO_CHOICE: u8 = u8::MAX;
/// Gem counts are divided by this in observations.
const GEM_SCALE: f32 = 10.0;

fn hazard_of(card: u8) -> Option<usize> {
    (card as usize >= TREASURES.len()).then(|| card as usize - TREASURES.len())
}

pub fn layout(players: usize) -> ObservationLayout {
    ObservationLayout::builder()
        .field(
            "hazards",
            HAZARD_TYPES,
            "count of each hazard type revealed on the current path",
        )
        .field("treasure_tiles", 1, "treasure cards revealed on the current path")
        .field("last_tile_gems", 1, "gems left on the last revealed card / 10")
        .field("cave_gems", 1, "gems left on all revealed cards / 10")
        .field("round", 1, "round index, 0-based")
        .field(
            "banked",
            players,
            "banked gems / 10 per player, observer first, then turn order",
        )
        .field(
            "unbanked",
            players,
            "gems carried in the cave / 10 per player, same order",
        )
        .field("in_cave", players, "1 if the player is still exploring, same order")
        .build()
}

pub fn describe_action(a: ActionId) -> String {
    match a {
        CONTINUE => "continue exploring".into(),
        RETREAT => "retreat to camp and bank".into(),
        _ => "pass (already at camp)".into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diamant {
    seating: Seating,
    round: u8,
    deck: Vec<u8>,
    path: Vec<u8>,
    /// Gems still lying on each path card.
    path_gems: Vec<u8>,
    removed: [u8; HAZARD_TYPES],
    banked: Vec<u16>,
    unbanked: Vec<u16>,
    in_cave: Vec<bool>,
    choices: Vec<u8>,
    /// Turn position of the player to decide next.
    decider: u8,
    finished: bool,
}

impl Diamant {
    pub fn banked(&self) -> &[u16] {
        &self.banked
    }

    pub fn unbanked(&self) -> &[u16] {
        &self.unbanked
    }

    pub fn in_cave(&self) -> &[bool] {
        &self.in_cave
    }

    pub fn round(&self) -> u8 {
        self.round
    }

    pub fn path(&self) -> &[u8] {
        &self.path
    }

    fn n(&self) -> usize {
        self.banked.len()
    }

    fn start_round<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut deck: Vec<u8> = (0..TREASURES.len() as u8).collect();
        for h in 0..HAZARD_TYPES {
            let copies = HAZARD_COPIES - self.removed[h];
            deck.extend(std::iter::repeat((TREASURES.len() + h) as u8).take(copies as usize));
        }
        deck.shuffle(rng);
        self.deck = deck;
        self.path.clear();
        self.path_gems.clear();
        self.unbanked.iter_mut().for_each(|g| *g = 0);
        self.in_cave.iter_mut().for_each(|c| *c = true);
        self.reveal(rng);
    }

    /// Flips the next card; either opens a decision sub-phase or ends the round.
    fn reveal<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let Some(card) = self.deck.pop() else {
            // Unreachable with the standard deck: six hazards always repeat a type.
            self.bank_explorers();
            return self.end_round(rng);
        };
        self.path.push(card);
        match hazard_of(card) {
            Some(h) => {
                self.path_gems.push(0);
                let repeats = self.path[..self.path.len() - 1]
                    .iter()
                    .any(|&c| hazard_of(c) == Some(h));
                if repeats {
                    // the repeated hazard leaves the game
                    self.path.pop();
                    self.path_gems.pop();
                    for p in 0..self.n() {
                        if self.in_cave[p] {
                            self.unbanked[p] = 0;
                        }
                    }
                    self.removed[h] += 1;
                    return self.end_round(rng);
                }
            }
            None => {
                let value = TREASURES[card as usize] as u16;
                let explorers = self.in_cave.iter().filter(|c| **c).count() as u16;
                let share = value / explorers;
                for p in 0..self.n() {
                    if self.in_cave[p] {
                        self.unbanked[p] += share;
                    }
                }
                self.path_gems.push((value % explorers) as u8);
            }
        }
        self.choices.iter_mut().for_each(|c| *c = NO_CHOICE);
        self.decider = 0;
    }

    fn bank_explorers(&mut self) {
        for p in 0..self.n() {
            if self.in_cave[p] {
                self.banked[p] += self.unbanked[p];
                self.unbanked[p] = 0;
                self.in_cave[p] = false;
            }
        }
    }

    fn end_round<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.round += 1;
        self.unbanked.iter_mut().for_each(|g| *g = 0);
        if self.round >= ROUNDS {
            self.finished = true;
            self.in_cave.iter_mut().for_each(|c| *c = false);
        } else {
            self.start_round(rng);
        }
    }

    fn resolve_choices<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let leavers: Vec<usize> = (0..self.n())
            .filter(|&p| self.in_cave[p] && self.choices[p] == RETREAT as u8)
            .collect();
        if !leavers.is_empty() {
            let k = leavers.len() as u8;
            let mut share = 0u16;
            for gems in self.path_gems.iter_mut() {
                share += (*gems / k) as u16;
                *gems %= k;
            }
            for &p in &leavers {
                self.banked[p] += self.unbanked[p] + share;
                self.unbanked[p] = 0;
                self.in_cave[p] = false;
            }
        }
        if self.in_cave.iter().any(|c| *c) {
            self.reveal(rng);
        } else {
            self.end_round(rng);
        }
    }
}

impl Rules for Diamant {
    fn new(num_players: usize, rng: &mut GameRng) -> Self {
        let seating = Seating::random(num_players, rng);
        let mut s = Self {
            seating,
            round: 0,
            deck: Vec::new(),
            path: Vec::new(),
            path_gems: Vec::new(),
            removed: [0; HAZARD_TYPES],
            banked: vec![0; num_players],
            unbanked: vec![0; num_players],
            in_cave: vec![true; num_players],
            choices: vec![NO_CHOICE; num_players],
            decider: 0,
            finished: false,
        };
        s.start_round(rng);
        s
    }

    fn num_players(&self) -> usize {
        self.n()
    }

    fn current_player(&self) -> Option<usize> {
        (!self.finished).then(|| self.seating.at(self.decider as usize))
    }

    fn legal_actions(&self, mask: &mut [bool]) {
        let p = self.seating.at(self.decider as usize);
        if self.in_cave[p] {
            mask[CONTINUE] = true;
            mask[RETREAT] = true;
        } else {
            mask[PASS] = true;
        }
    }

    fn apply(&mut self, action: ActionId, rng: &mut GameRng) {
        let p = self.seating.at(self.decider as usize);
        self.choices[p] = action as u8;
        self.decider += 1;
        if self.decider as usize == self.n() {
            self.resolve_choices(rng);
        }
    }

    fn observe(&self, player: usize, out: &mut [f32]) {
        for &c in &self.path {
            if let Some(h) = hazard_of(c) {
                out[h] += 1.0;
            } else {
                out[HAZARD_TYPES] += 1.0;
            }
        }
        out[6] = self.path_gems.last().copied().unwrap_or(0) as f32 / GEM_SCALE;
        out[7] = self.path_gems.iter().map(|&g| g as f32).sum::<f32>() / GEM_SCALE;
        out[8] = self.round as f32;
        let n = self.n();
        for k in 0..n {
            let q = self.seating.relative(player, k);
            out[9 + k] = self.banked[q] as f32 / GEM_SCALE;
            out[9 + n + k] = self.unbanked[q] as f32 / GEM_SCALE;
            out[9 + 2 * n + k] = if self.in_cave[q] { 1.0 } else { 0.0 };
        }
    }

    fn result(&self) -> Option<GameResult> {
        self.finished
            .then(|| GameResult::from_scores(self.scores()))
    }

    fn scores(&self) -> Vec<f64> {
        self.banked.iter().map(|&g| g as f64).collect()
    }

    fn redeterminize(&mut self, observer: usize, rng: &mut GameRng) {
        self.deck.sort_unstable();
        self.deck.shuffle(rng);
        for p in 0..self.n() {
            if p != observer && self.choices[p] != NO_CHOICE && self.in_cave[p] {
                self.choices[p] = if rng.gen_bool(0.5) {
                    RETREAT as u8
                } else {
                    CONTINUE as u8
                };
            }
        }
    }

    fn census(&self) -> Option<CardMultiset> {
        let mut m = CardMultiset::with_types(CARD_TYPES);
        m.add_all(self.deck.iter().chain(&self.path).map(|&c| c as usize));
        for (h, &r) in self.removed.iter().enumerate() {
            m.add(TREASURES.len() + h, r as u32);
        }
        Some(m)
    }

    fn encode(&self, enc: &mut Encoder) {
        self.seating.encode(enc);
        enc.u8(self.round);
        encode_cards(enc, &self.deck);
        encode_cards(enc, &self.path);
        enc.u8_slice(&self.path_gems);
        enc.bytes(&self.removed);
        for p in 0..self.n() {
            enc.u16(self.banked[p]);
            enc.u16(self.unbanked[p]);
            enc.bool(self.in_cave[p]);
            enc.u8(self.choices[p]);
        }
        enc.u8(self.decider);
        enc.bool(self.finished);
    }

    fn decode(dec: &mut Decoder<'_>, n: usize) -> Result<Self, DecodeError> {
        let seating = Seating::decode(dec)?;
        super::check_seating(&seating, n)?;
        let round = dec.u8()?;
        let deck = decode_cards(dec, CARD_TYPES)?;
        let path = decode_cards(dec, CARD_TYPES)?;
        let path_gems = dec.u8_vec()?;
        check_len(&path_gems, path.len(), "path gems")?;
        let mut removed = [0u8; HAZARD_TYPES];
        removed.copy_from_slice(dec.take(HAZARD_TYPES)?);
        let mut banked = Vec::with_capacity(n);
        let mut unbanked = Vec::with_capacity(n);
        let mut in_cave = Vec::with_capacity(n);
        let mut choices = Vec::with_capacity(n);
        for _ in 0..n {
            banked.push(dec.u16()?);
            unbanked.push(dec.u16()?);
            in_cave.push(dec.bool()?);
            let c = dec.u8()?;
            if c != NO_CHOICE && c as usize >= ACTION_COUNT {
                return Err(DecodeError::Invalid("choice".into()));
            }
            choices.push(c);
        }
        let decider = dec.u8()?;
        let finished = dec.bool()?;
        if decider as usize >= n || round > ROUNDS || removed.iter().any(|&r| r > HAZARD_COPIES) {
            return Err(DecodeError::Invalid("round bookkeeping".into()));
        }
        Ok(Self {
            seating,
            round,
            deck,
            path,
            path_gems,
            removed,
            banked,
            unbanked,
            in_cave,
            choices,
            decider,
            finished,
        })
    }
}
