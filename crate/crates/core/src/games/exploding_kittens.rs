//! Exploding Kittens, original deck without expansions.
//!
//! Card types: Defuse, Nope, Attack, Skip, Favor, Shuffle, See the Future,
//! five cat types, and the Exploding Kitten (never held in a hand).
//!
//! Action enumeration (43 entries). Offsets count seats around the table
//! from the acting player (1 = next player).
//!
//! | index        | meaning                                                   |
//! |--------------|-----------------------------------------------------------|
//! | 0            | draw a card (ends one turn)                               |
//! | 1..=4        | play Attack, Skip, Shuffle, See the Future                |
//! | 5..=8        | play Favor on the player at offset 1..=4                  |
//! | 9 + 4c + o-1 | play a pair of cat `c` (0..5) on the player at offset `o` |
//! | 29           | Nope the pending card                                     |
//! | 30           | let the pending card resolve                              |
//! | 31..=34      | put the defused kitten back: top, 2nd, 3rd, bottom        |
//! | 35..=42      | give a card for a Favor: Defuse, Nope, Attack, Skip, Favor, Shuffle, See the Future, a cat |
//!
//! "Give a cat" hands over one card of the cat type the giver holds most of
//! (lowest type on ties).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameResult, ObservationLayout, Seating};
use crate::error::DecodeError;
use crate::games::{check_len, decode_cards, encode_cards, CardMultiset, Rules};
use crate::rng::GameRng;

pub const ACTION_COUNT: usize = 43;
/// Card types that can be held in hand.
pub const HAND_TYPES: usize = 12;
/// Hand types plus the Exploding Kitten.
pub const CARD_TYPES: usize = 13;

pub const DEFUSE: u8 = 0;
pub const NOPE: u8 = 1;
pub const ATTACK: u8 = 2;
pub const SKIP: u8 = 3;
pub const FAVOR: u8 = 4;
pub const SHUFFLE: u8 = 5;
pub const SEE_FUTURE: u8 = 6;
pub const FIRST_CAT: u8 = 7;
pub const CATS: usize = 5;
pub const KITTEN: u8 = 12;

pub const NAMES: [&str; CARD_TYPES] = [
    "Defuse",
    "Nope",
    "Attack",
    "Skip",
    "Favor",
    "Shuffle",
    "See the Future",
    "Tacocat",
    "Cattermelon",
    "Hairy Potato Cat",
    "Beard Cat",
    "Rainbow-Ralphing Cat",
    "Exploding Kitten",
];

const DEFUSES: u8 = 6;
const OTHER_COPIES: [(u8, u8); 11] = [
    (NOPE, 5),
    (ATTACK, 4),
    (SKIP, 4),
    (FAVOR, 4),
    (SHUFFLE, 4),
    (SEE_FUTURE, 5),
    (7, 4),
    (8, 4),
    (9, 4),
    (10, 4),
    (11, 4),
];
const INITIAL_HAND: usize = 7;

pub const DRAW: ActionId = 0;
const SIMPLE_BASE: ActionId = 1;
const SIMPLE_CARDS: [u8; 4] = [ATTACK, SKIP, SHUFFLE, SEE_FUTURE];
const FAVOR_BASE: ActionId = 5;
const CAT_BASE: ActionId = 9;
pub const NOPE_ACTION: ActionId = 29;
pub const PASS: ActionId = 30;
const PLACE_BASE: ActionId = 31;
const GIVE_BASE: ActionId = 35;
const MAX_OFFSET: usize = 4;

/// Copies of every card type in an `n`-player game.
pub fn composition(players: usize) -> Vec<u32> {
    let mut c = vec![0u32; CARD_TYPES];
    c[DEFUSE as usize] = DEFUSES as u32;
    for (t, k) in OTHER_COPIES {
        c[t as usize] = k as u32;
    }
    c[KITTEN as usize] = players as u32 - 1;
    c
}

pub fn layout(players: usize) -> ObservationLayout {
    ObservationLayout::builder()
        .field("hand", HAND_TYPES, "count of each holdable card type in own hand")
        .field(
            "opponent_hand_sizes",
            players - 1,
            "cards held by each other player, in turn order from the observer",
        )
        .field("draw_pile", 1, "cards left in the draw pile")
        .field(
            "phase",
            4,
            "one-hot: main turn, nope reaction, giving a favor, placing a defused kitten",
        )
        .build()
}

pub fn describe_action(a: ActionId) -> String {
    match a {
        DRAW => "draw a card".into(),
        1..=4 => format!("play {}", NAMES[SIMPLE_CARDS[a - SIMPLE_BASE] as usize]),
        5..=8 => format!("play Favor on player at offset {}", a - FAVOR_BASE + 1),
        9..=28 => {
            let i = a - CAT_BASE;
            format!(
                "play pair of {} on player at offset {}",
                NAMES[FIRST_CAT as usize + i / MAX_OFFSET],
                i % MAX_OFFSET + 1
            )
        }
        NOPE_ACTION => "play Nope".into(),
        PASS => "do not Nope".into(),
        31..=34 => ["put kitten on top", "put kitten 2nd from top", "put kitten 3rd from top", "put kitten at bottom"]
            [a - PLACE_BASE]
            .into(),
        _ => {
            let i = a - GIVE_BASE;
            if i < 7 {
                format!("give {}", NAMES[i])
            } else {
                "give a cat card".into()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Main,
    Reaction,
    FavorGive,
    DefusePlacement,
}

impl Phase {
    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(c: u8) -> Option<Self> {
        [Self::Main, Self::Reaction, Self::FavorGive, Self::DefusePlacement]
            .get(c as usize)
            .copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplodingKittens {
    seating: Seating,
    hands: Vec<[u8; HAND_TYPES]>,
    /// Draw pile; the top card is the last element.
    deck: Vec<u8>,
    discard: Vec<u8>,
    alive: Vec<bool>,
    eliminated: Vec<u8>,
    /// Player whose turn it is and the turns they still owe.
    turn: u8,
    turns_left: u8,
    phase: Phase,
    /// Action awaiting Nope reactions, its number of Nopes so far, the
    /// player who played the latest card in the chain and the offset from
    /// that player of whoever is being asked.
    pending: u8,
    nopes: u8,
    last: u8,
    asked: u8,
    /// Player who must give a card for a Favor.
    giver: u8,
    /// How many cards at the top of the pile each player has seen.
    known: Vec<u8>,
    finished: bool,
}

impl ExplodingKittens {
    fn n(&self) -> usize {
        self.alive.len()
    }

    pub fn hand(&self, p: usize) -> &[u8; HAND_TYPES] {
        &self.hands[p]
    }

    pub fn draw_pile(&self) -> &[u8] {
        &self.deck
    }

    pub fn is_alive(&self, p: usize) -> bool {
        self.alive[p]
    }

    fn hand_size(&self, p: usize) -> u32 {
        self.hands[p].iter().map(|&c| c as u32).sum()
    }

    fn target(&self, actor: usize, offset: usize) -> Option<usize> {
        if offset == 0 || offset >= self.n() {
            return None;
        }
        let t = self.seating.relative(actor, offset);
        (self.alive[t] && self.hand_size(t) > 0).then_some(t)
    }

    fn next_alive(&self, p: usize) -> usize {
        let mut q = self.seating.next(p);
        while !self.alive[q] {
            q = self.seating.next(q);
        }
        q
    }

    fn start_turn_of(&mut self, p: usize, turns: u8) {
        self.turn = p as u8;
        self.turns_left = turns;
        self.phase = Phase::Main;
    }

    fn end_one_turn(&mut self) {
        self.turns_left -= 1;
        if self.turns_left == 0 {
            let next = self.next_alive(self.turn as usize);
            self.start_turn_of(next, 1);
        } else {
            self.phase = Phase::Main;
        }
    }

    /// Next player allowed to Nope, searching after offset `from`.
    fn next_responder(&self, from: usize) -> Option<usize> {
        let last = self.last as usize;
        (from + 1..self.n()).find(|&k| {
            let q = self.seating.relative(last, k);
            self.alive[q] && self.hands[q][NOPE as usize] > 0
        })
    }

    fn ask_or_resolve(&mut self, from: usize, rng: &mut GameRng) {
        match self.next_responder(from) {
            Some(k) => {
                self.asked = k as u8;
                self.phase = Phase::Reaction;
            }
            None => self.resolve(rng),
        }
    }

    fn responder(&self) -> usize {
        self.seating.relative(self.last as usize, self.asked as usize)
    }

    fn discard_from(&mut self, p: usize, card: u8) {
        self.hands[p][card as usize] -= 1;
        self.discard.push(card);
    }

    fn resolve(&mut self, rng: &mut GameRng) {
        self.phase = Phase::Main;
        if self.nopes % 2 == 1 {
            return;
        }
        let actor = self.turn as usize;
        let a = self.pending as usize;
        match a {
            1..=4 => match SIMPLE_CARDS[a - SIMPLE_BASE] {
                ATTACK => {
                    let next = self.next_alive(actor);
                    self.start_turn_of(next, 2);
                }
                SKIP => self.end_one_turn(),
                SHUFFLE => {
                    self.deck.shuffle(rng);
                    self.known.fill(0);
                }
                _ => self.known[actor] = self.deck.len().min(3) as u8,
            },
            5..=8 => {
                if let Some(t) = self.target(actor, a - FAVOR_BASE + 1) {
                    self.giver = t as u8;
                    self.phase = Phase::FavorGive;
                }
            }
            _ => {
                let offset = (a - CAT_BASE) % MAX_OFFSET + 1;
                if let Some(t) = self.target(actor, offset) {
                    let mut pick = rng.gen_range(0..self.hand_size(t));
                    let card = (0..HAND_TYPES)
                        .find(|&c| {
                            let k = self.hands[t][c] as u32;
                            if pick < k {
                                true
                            } else {
                                pick -= k;
                                false
                            }
                        })
                        .unwrap();
                    self.hands[t][card] -= 1;
                    self.hands[actor][card] += 1;
                }
            }
        }
    }

    fn draw(&mut self) {
        let p = self.turn as usize;
        let card = self.deck.pop().expect("draw pile holds at least one kitten");
        for k in self.known.iter_mut() {
            *k = k.saturating_sub(1);
        }
        if card != KITTEN {
            self.hands[p][card as usize] += 1;
            self.end_one_turn();
        } else if self.hands[p][DEFUSE as usize] > 0 {
            self.discard_from(p, DEFUSE);
            self.phase = Phase::DefusePlacement;
        } else {
            self.discard.push(KITTEN);
            self.eliminate(p);
        }
    }

    fn eliminate(&mut self, p: usize) {
        self.alive[p] = false;
        self.eliminated.push(p as u8);
        for c in 0..HAND_TYPES {
            for _ in 0..self.hands[p][c] {
                self.discard.push(c as u8);
            }
            self.hands[p][c] = 0;
        }
        if self.alive.iter().filter(|a| **a).count() == 1 {
            self.finished = true;
        } else {
            let next = self.next_alive(p);
            self.start_turn_of(next, 1);
        }
    }

    fn place_kitten(&mut self, depth: usize) {
        let len = self.deck.len();
        let at = if depth == 3 { 0 } else { len - depth };
        self.deck.insert(at, KITTEN);
        let from_top = len - at;
        let placer = self.turn as usize;
        for (q, k) in self.known.iter_mut().enumerate() {
            let seen = *k as usize;
            *k = if q == placer && seen >= from_top {
                seen as u8 + 1
            } else {
                seen.min(from_top) as u8
            };
        }
        self.end_one_turn();
    }

    fn give_card(&self, action: ActionId) -> Option<u8> {
        let hand = &self.hands[self.giver as usize];
        let i = action - GIVE_BASE;
        if i < 7 {
            (hand[i] > 0).then_some(i as u8)
        } else {
            let cats = &hand[FIRST_CAT as usize..];
            let best = (0..CATS).max_by_key(|&c| (cats[c], std::cmp::Reverse(c)))?;
            (cats[best] > 0).then_some(FIRST_CAT + best as u8)
        }
    }
}

impl Rules for ExplodingKittens {
    fn new(num_players: usize, rng: &mut GameRng) -> Self {
        let seating = Seating::random(num_players, rng);
        let mut deck: Vec<u8> = OTHER_COPIES
            .iter()
            .flat_map(|&(t, k)| std::iter::repeat(t).take(k as usize))
            .collect();
        deck.shuffle(rng);
        let mut hands = vec![[0u8; HAND_TYPES]; num_players];
        for h in hands.iter_mut() {
            h[DEFUSE as usize] = 1;
            for _ in 0..INITIAL_HAND {
                let c = deck.pop().unwrap();
                h[c as usize] += 1;
            }
        }
        deck.extend(std::iter::repeat(DEFUSE).take(DEFUSES as usize - num_players));
        deck.extend(std::iter::repeat(KITTEN).take(num_players - 1));
        deck.shuffle(rng);
        let first = seating.first() as u8;
        Self {
            seating,
            hands,
            deck,
            discard: Vec::new(),
            alive: vec![true; num_players],
            eliminated: Vec::new(),
            turn: first,
            turns_left: 1,
            phase: Phase::Main,
            pending: 0,
            nopes: 0,
            last: 0,
            asked: 0,
            giver: 0,
            known: vec![0; num_players],
            finished: false,
        }
    }

    fn num_players(&self) -> usize {
        self.n()
    }

    fn current_player(&self) -> Option<usize> {
        if self.finished {
            return None;
        }
        Some(match self.phase {
            Phase::Main | Phase::DefusePlacement => self.turn as usize,
            Phase::Reaction => self.responder(),
            Phase::FavorGive => self.giver as usize,
        })
    }

    fn legal_actions(&self, mask: &mut [bool]) {
        match self.phase {
            Phase::Main => {
                let p = self.turn as usize;
                let hand = &self.hands[p];
                mask[DRAW] = true;
                for (i, &c) in SIMPLE_CARDS.iter().enumerate() {
                    mask[SIMPLE_BASE + i] = hand[c as usize] > 0;
                }
                for o in 1..=MAX_OFFSET {
                    let ok = self.target(p, o).is_some();
                    mask[FAVOR_BASE + o - 1] = ok && hand[FAVOR as usize] > 0;
                    for c in 0..CATS {
                        mask[CAT_BASE + c * MAX_OFFSET + o - 1] =
                            ok && hand[FIRST_CAT as usize + c] >= 2;
                    }
                }
            }
            Phase::Reaction => {
                mask[NOPE_ACTION] = true;
                mask[PASS] = true;
            }
            Phase::DefusePlacement => {
                let len = self.deck.len();
                for d in 0..3 {
                    mask[PLACE_BASE + d] = d <= len;
                }
                mask[PLACE_BASE + 3] = true;
            }
            Phase::FavorGive => {
                for a in GIVE_BASE..ACTION_COUNT {
                    mask[a] = self.give_card(a).is_some();
                }
            }
        }
    }

    fn apply(&mut self, action: ActionId, rng: &mut GameRng) {
        match self.phase {
            Phase::Main => {
                let p = self.turn as usize;
                match action {
                    DRAW => return self.draw(),
                    1..=4 => self.discard_from(p, SIMPLE_CARDS[action - SIMPLE_BASE]),
                    5..=8 => self.discard_from(p, FAVOR),
                    _ => {
                        let cat = FIRST_CAT + ((action - CAT_BASE) / MAX_OFFSET) as u8;
                        self.discard_from(p, cat);
                        self.discard_from(p, cat);
                    }
                }
                self.pending = action as u8;
                self.nopes = 0;
                self.last = p as u8;
                self.ask_or_resolve(0, rng);
            }
            Phase::Reaction => {
                if action == NOPE_ACTION {
                    let q = self.responder();
                    self.discard_from(q, NOPE);
                    self.nopes += 1;
                    self.last = q as u8;
                    self.ask_or_resolve(0, rng);
                } else {
                    self.ask_or_resolve(self.asked as usize, rng);
                }
            }
            Phase::FavorGive => {
                let card = self.give_card(action).unwrap() as usize;
                self.hands[self.giver as usize][card] -= 1;
                self.hands[self.turn as usize][card] += 1;
                self.phase = Phase::Main;
            }
            Phase::DefusePlacement => self.place_kitten(action - PLACE_BASE),
        }
    }

    fn observe(&self, player: usize, out: &mut [f32]) {
        let n = self.n();
        for (o, &c) in out.iter_mut().zip(&self.hands[player]) {
            *o = c as f32;
        }
        for k in 1..n {
            out[HAND_TYPES + k - 1] = self.hand_size(self.seating.relative(player, k)) as f32;
        }
        let base = HAND_TYPES + n - 1;
        out[base] = self.deck.len() as f32;
        out[base + 1 + self.phase.code() as usize] = 1.0;
    }

    fn result(&self) -> Option<GameResult> {
        if !self.finished {
            return None;
        }
        let n = self.n();
        let mut keys = vec![n as f64; n];
        for (i, &p) in self.eliminated.iter().enumerate() {
            keys[p as usize] = i as f64;
        }
        Some(GameResult::from_keys(&keys, vec![0.0; n]))
    }

    fn scores(&self) -> Vec<f64> {
        vec![0.0; self.n()]
    }

    fn redeterminize(&mut self, observer: usize, rng: &mut GameRng) {
        let keep = (self.known[observer] as usize).min(self.deck.len());
        let hidden_deck = self.deck.len() - keep;
        let mut pool: Vec<u8> = self.deck[..hidden_deck].to_vec();
        for p in (0..self.n()).filter(|&p| p != observer) {
            for c in 0..HAND_TYPES {
                pool.extend(std::iter::repeat(c as u8).take(self.hands[p][c] as usize));
            }
        }
        // kittens never sit in a hand
        let kittens: Vec<usize> = (0..hidden_deck).filter(|&i| self.deck[i] == KITTEN).collect();
        pool.retain(|&c| c != KITTEN);
        pool.sort_unstable();
        pool.shuffle(rng);
        for p in (0..self.n()).filter(|&p| p != observer) {
            let size = self.hand_size(p);
            self.hands[p] = [0; HAND_TYPES];
            for _ in 0..size {
                let c = pool.pop().unwrap();
                self.hands[p][c as usize] += 1;
            }
        }
        let mut rest = pool;
        rest.extend(std::iter::repeat(KITTEN).take(kittens.len()));
        rest.shuffle(rng);
        self.deck[..hidden_deck].copy_from_slice(&rest);
    }

    fn census(&self) -> Option<CardMultiset> {
        let mut m = CardMultiset::with_types(CARD_TYPES);
        for h in &self.hands {
            for (c, &k) in h.iter().enumerate() {
                m.add(c, k as u32);
            }
        }
        m.add_all(self.deck.iter().chain(&self.discard).map(|&c| c as usize));
        if self.phase == Phase::DefusePlacement && !self.finished {
            m.add(KITTEN as usize, 1);
        }
        Some(m)
    }

    fn encode(&self, enc: &mut Encoder) {
        self.seating.encode(enc);
        for h in &self.hands {
            enc.bytes(h);
        }
        encode_cards(enc, &self.deck);
        encode_cards(enc, &self.discard);
        for &a in &self.alive {
            enc.bool(a);
        }
        enc.u8_slice(&self.eliminated);
        enc.bytes(&[
            self.turn,
            self.turns_left,
            self.phase.code(),
            self.pending,
            self.nopes,
            self.last,
            self.asked,
            self.giver,
        ]);
        enc.u8_slice(&self.known);
        enc.bool(self.finished);
    }

    fn decode(dec: &mut Decoder<'_>, n: usize) -> Result<Self, DecodeError> {
        let seating = Seating::decode(dec)?;
        super::check_seating(&seating, n)?;
        let mut hands = Vec::with_capacity(n);
        for _ in 0..n {
            let mut h = [0u8; HAND_TYPES];
            h.copy_from_slice(dec.take(HAND_TYPES)?);
            hands.push(h);
        }
        let deck = decode_cards(dec, CARD_TYPES)?;
        let discard = decode_cards(dec, CARD_TYPES)?;
        let alive = (0..n).map(|_| dec.bool()).collect::<Result<Vec<_>, _>>()?;
        let eliminated = dec.u8_vec()?;
        let b = dec.take(8)?;
        let (turn, turns_left, phase, pending, nopes, last, asked, giver) =
            (b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]);
        let known = dec.u8_vec()?;
        let finished = dec.bool()?;
        check_len(&known, n, "known")?;
        let phase =
            Phase::from_code(phase).ok_or_else(|| DecodeError::Invalid("phase".into()))?;
        let players_ok = [turn, last, giver].iter().all(|&p| (p as usize) < n)
            && eliminated.iter().all(|&p| (p as usize) < n && !alive[p as usize])
            && (pending as usize) < ACTION_COUNT
            && (asked as usize) < n;
        if !players_ok {
            return Err(DecodeError::Invalid("turn bookkeeping".into()));
        }
        let s = Self {
            seating,
            hands,
            deck,
            discard,
            alive,
            eliminated,
            turn,
            turns_left,
            phase,
            pending,
            nopes,
            last,
            asked,
            giver,
            known,
            finished,
        };
        if s.census() != Some(CardMultiset::from_counts(composition(n))) {
            return Err(DecodeError::Invalid("card composition".into()));
        }
        Ok(s)
    }
}
