//! Love Letter, classic 16-card deck.
//!
//! Card types are indexed by rank minus one: Guard, Priest, Baron, Handmaid,
//! Prince, King, Countess, Princess.
//!
//! Action enumeration (68 entries). Target slots are offsets around the
//! table from the acting player: slot 0 is the actor, slot 1 the next
//! player, and so on. Slots at or beyond the player count are never legal.
//!
//! | index          | meaning                                              |
//! |----------------|------------------------------------------------------|
//! | `s*8 + g`      | Guard at slot `s` (0..4) guessing type `g` (0..8)    |
//! | `32 + (t-1)*4 + s` | card type `t` (1..8) at slot `s`                 |
//! | `60 + t`       | play card type `t` (0..8) without a target           |
//!
//! Some entries can never be legal (guessing Guard, targeting yourself with
//! anything but the Prince, targeting with Handmaid, Countess or Princess,
//! or the Prince without a target); they are kept so the table is a plain
//! product of (card, slot, guess).

use rand::seq::SliceRandom;

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameResult, ObservationLayout, Seating};
use crate::error::DecodeError;
use crate::games::{check_len, decode_cards, encode_cards, CardMultiset, Rules};
use crate::rng::GameRng;

pub const ACTION_COUNT: usize = 68;
pub const CARD_TYPES: usize = 8;
pub const MAX_PLAYERS: usize = 4;

pub const GUARD: u8 = 0;
pub const PRIEST: u8 = 1;
pub const BARON: u8 = 2;
pub const HANDMAID: u8 = 3;
pub const PRINCE: u8 = 4;
pub const KING: u8 = 5;
pub const COUNTESS: u8 = 6;
pub const PRINCESS: u8 = 7;

/// Copies of each card type in the deck.
pub const COMPOSITION: [u8; CARD_TYPES] = [5, 2, 2, 2, 2, 1, 1, 1];
const NAMES: [&str; CARD_TYPES] = [
    "Guard", "Priest", "Baron", "Handmaid", "Prince", "King", "Countess", "Princess",
];

const TARGETED_BASE: usize = 32;
const UNTARGETED_BASE: usize = 60;

pub fn tokens_to_win(players: usize) -> u8 {
    match players {
        2 => 7,
        3 => 5,
        _ => 4,
    }
}

pub fn layout(players: usize) -> ObservationLayout {
    ObservationLayout::builder()
        .field("hand", CARD_TYPES, "count of each card type in own hand")
        .field(
            "discards",
            CARD_TYPES,
            "count of each card type in all face-up discard piles",
        )
        .field(
            "tokens",
            players,
            "favour tokens per player, starting with the observer and following turn order",
        )
        .build()
}

/// Decoded form of an action index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Play {
    Guard { slot: usize, guess: u8 },
    Targeted { card: u8, slot: usize },
    Untargeted { card: u8 },
}

impl Play {
    pub fn decode(a: ActionId) -> Play {
        if a < TARGETED_BASE {
            Play::Guard {
                slot: a / 8,
                guess: (a % 8) as u8,
            }
        } else if a < UNTARGETED_BASE {
            let k = a - TARGETED_BASE;
            Play::Targeted {
                card: (k / 4 + 1) as u8,
                slot: k % 4,
            }
        } else {
            Play::Untargeted {
                card: (a - UNTARGETED_BASE) as u8,
            }
        }
    }

    pub fn encode(self) -> ActionId {
        match self {
            Play::Guard { slot, guess } => slot * 8 + guess as usize,
            Play::Targeted { card, slot } => TARGETED_BASE + (card as usize - 1) * 4 + slot,
            Play::Untargeted { card } => UNTARGETED_BASE + card as usize,
        }
    }

    pub fn card(self) -> u8 {
        match self {
            Play::Guard { .. } => GUARD,
            Play::Targeted { card, .. } | Play::Untargeted { card } => card,
        }
    }
}

pub fn describe_action(a: ActionId) -> String {
    match Play::decode(a) {
        Play::Guard { slot, guess } => {
            format!("Guard targeting slot {slot}, guessing {}", NAMES[guess as usize])
        }
        Play::Targeted { card, slot } => format!("{} targeting slot {slot}", NAMES[card as usize]),
        Play::Untargeted { card } => format!("{} without a target", NAMES[card as usize]),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoveLetter {
    seating: Seating,
    tokens: Vec<u8>,
    hands: Vec<Vec<u8>>,
    /// Face-down draw pile; the top card is the last element.
    deck: Vec<u8>,
    burned: Option<u8>,
    discards: Vec<Vec<u8>>,
    eliminated: Vec<bool>,
    protected: Vec<bool>,
    to_move: u8,
    round: u16,
    winner: Option<u8>,
}

impl LoveLetter {
    pub fn tokens(&self) -> &[u8] {
        &self.tokens
    }

    pub fn hand(&self, player: usize) -> &[u8] {
        &self.hands[player]
    }

    pub fn discards(&self, player: usize) -> &[u8] {
        &self.discards[player]
    }

    pub fn deck_len(&self) -> usize {
        self.deck.len()
    }

    fn n(&self) -> usize {
        self.tokens.len()
    }

    fn start_round(&mut self, first: usize, rng: &mut GameRng) {
        let n = self.n();
        let mut deck: Vec<u8> = COMPOSITION
            .iter()
            .enumerate()
            .flat_map(|(t, &c)| std::iter::repeat(t as u8).take(c as usize))
            .collect();
        deck.shuffle(rng);
        self.burned = deck.pop();
        self.hands = (0..n).map(|_| vec![deck.pop().unwrap()]).collect();
        self.deck = deck;
        self.discards = vec![Vec::new(); n];
        self.eliminated = vec![false; n];
        self.protected = vec![false; n];
        self.round += 1;
        self.begin_turn(first);
    }

    fn begin_turn(&mut self, p: usize) {
        self.to_move = p as u8;
        self.protected[p] = false;
        let card = self.deck.pop().expect("turn starts with a non-empty deck");
        self.hands[p].push(card);
    }

    fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&p| !self.eliminated[p])
    }

    fn targetable(&self, actor: usize, target: usize) -> bool {
        target != actor && !self.eliminated[target] && !self.protected[target]
    }

    fn any_opponent_targetable(&self, actor: usize) -> bool {
        (0..self.n()).any(|t| self.targetable(actor, t))
    }

    fn eliminate(&mut self, p: usize) {
        self.eliminated[p] = true;
        let hand = std::mem::take(&mut self.hands[p]);
        self.discards[p].extend(hand);
    }

    fn discard_from_hand(&mut self, p: usize, card: u8) {
        let i = self.hands[p]
            .iter()
            .position(|&c| c == card)
            .expect("card in hand");
        self.hands[p].remove(i);
        self.discards[p].push(card);
    }

    fn resolve(&mut self, actor: usize, play: Play) {
        match play {
            Play::Guard { slot, guess } => {
                let t = self.seating.relative(actor, slot);
                if self.hands[t][0] == guess {
                    self.eliminate(t);
                }
            }
            Play::Targeted { card, slot } => {
                let t = self.seating.relative(actor, slot);
                match card {
                    PRIEST => {}
                    BARON => {
                        let mine = self.hands[actor][0];
                        let theirs = self.hands[t][0];
                        if mine > theirs {
                            self.eliminate(t);
                        } else if theirs > mine {
                            self.eliminate(actor);
                        }
                    }
                    PRINCE => {
                        let dropped = self.hands[t].pop().expect("target holds a card");
                        self.discards[t].push(dropped);
                        if dropped == PRINCESS {
                            self.eliminated[t] = true;
                        } else {
                            let fresh = self
                                .deck
                                .pop()
                                .or_else(|| self.burned.take())
                                .expect("burned card backs an empty deck");
                            self.hands[t].push(fresh);
                        }
                    }
                    KING => {
                        let a = self.hands[actor][0];
                        self.hands[actor][0] = self.hands[t][0];
                        self.hands[t][0] = a;
                    }
                    _ => unreachable!("masked targeted card"),
                }
            }
            Play::Untargeted { card } => match card {
                HANDMAID => self.protected[actor] = true,
                PRINCESS => self.eliminate(actor),
                _ => {}
            },
        }
    }

    /// Ends the round if it is over; returns the round winners if so.
    fn round_winners(&self) -> Option<Vec<usize>> {
        let alive: Vec<usize> = self.alive().collect();
        if alive.len() == 1 {
            return Some(alive);
        }
        if !self.deck.is_empty() {
            return None;
        }
        let key = |p: usize| {
            let sum: u32 = self.discards[p].iter().map(|&c| c as u32 + 1).sum();
            (self.hands[p][0], sum)
        };
        let best = alive.iter().map(|&p| key(p)).max().unwrap();
        Some(alive.into_iter().filter(|&p| key(p) == best).collect())
    }
}

impl Rules for LoveLetter {
    fn new(num_players: usize, rng: &mut GameRng) -> Self {
        let seating = Seating::random(num_players, rng);
        let first = seating.first();
        let mut s = Self {
            seating,
            tokens: vec![0; num_players],
            hands: Vec::new(),
            deck: Vec::new(),
            burned: None,
            discards: Vec::new(),
            eliminated: Vec::new(),
            protected: Vec::new(),
            to_move: 0,
            round: 0,
            winner: None,
        };
        s.start_round(first, rng);
        s
    }

    fn num_players(&self) -> usize {
        self.n()
    }

    fn current_player(&self) -> Option<usize> {
        self.winner.is_none().then_some(self.to_move as usize)
    }

    fn legal_actions(&self, mask: &mut [bool]) {
        let actor = self.to_move as usize;
        let n = self.n();
        let hand = &self.hands[actor];
        let has = |c: u8| hand.contains(&c);
        let forced_countess = has(COUNTESS) && (has(KING) || has(PRINCE));
        let open = self.any_opponent_targetable(actor);
        let slot_ok = |slot: usize| slot < n && self.targetable(actor, self.seating.relative(actor, slot));
        for &card in hand {
            if forced_countess && card != COUNTESS {
                continue;
            }
            match card {
                GUARD => {
                    if open {
                        for slot in (1..n).filter(|&s| slot_ok(s)) {
                            for guess in 1..CARD_TYPES as u8 {
                                mask[Play::Guard { slot, guess }.encode()] = true;
                            }
                        }
                    } else {
                        mask[Play::Untargeted { card }.encode()] = true;
                    }
                }
                PRIEST | BARON | KING => {
                    if open {
                        for slot in (1..n).filter(|&s| slot_ok(s)) {
                            mask[Play::Targeted { card, slot }.encode()] = true;
                        }
                    } else {
                        mask[Play::Untargeted { card }.encode()] = true;
                    }
                }
                PRINCE => {
                    mask[Play::Targeted { card, slot: 0 }.encode()] = true;
                    for slot in (1..n).filter(|&s| slot_ok(s)) {
                        mask[Play::Targeted { card, slot }.encode()] = true;
                    }
                }
                HANDMAID | COUNTESS | PRINCESS => {
                    mask[Play::Untargeted { card }.encode()] = true;
                }
                _ => unreachable!(),
            }
        }
    }

    fn apply(&mut self, action: ActionId, rng: &mut GameRng) {
        let actor = self.to_move as usize;
        let play = Play::decode(action);
        self.discard_from_hand(actor, play.card());
        self.resolve(actor, play);

        if let Some(winners) = self.round_winners() {
            for &w in &winners {
                self.tokens[w] += 1;
            }
            let target = tokens_to_win(self.n());
            let champions: Vec<usize> = (0..self.n()).filter(|&p| self.tokens[p] >= target).collect();
            if let Some(&w) = champions.first() {
                self.winner = Some(w as u8);
                return;
            }
            let first = self
                .seating
                .from(self.seating.first())
                .find(|p| winners.contains(p))
                .unwrap();
            self.start_round(first, rng);
            return;
        }
        let next = self
            .seating
            .from(actor)
            .skip(1)
            .find(|&p| !self.eliminated[p])
            .expect("at least two players alive");
        self.begin_turn(next);
    }

    fn observe(&self, player: usize, out: &mut [f32]) {
        let (hand, rest) = out.split_at_mut(CARD_TYPES);
        let (discards, tokens) = rest.split_at_mut(CARD_TYPES);
        for &c in &self.hands[player] {
            hand[c as usize] += 1.0;
        }
        for pile in &self.discards {
            for &c in pile {
                discards[c as usize] += 1.0;
            }
        }
        for (k, t) in tokens.iter_mut().enumerate() {
            *t = self.tokens[self.seating.relative(player, k)] as f32;
        }
    }

    fn result(&self) -> Option<GameResult> {
        self.winner?;
        Some(GameResult::from_scores(self.scores()))
    }

    fn scores(&self) -> Vec<f64> {
        self.tokens.iter().map(|&t| t as f64).collect()
    }

    fn redeterminize(&mut self, observer: usize, rng: &mut GameRng) {
        if self.winner.is_some() {
            return;
        }
        let unseen = CardMultiset::from_counts(COMPOSITION.iter().map(|&c| c as u32).collect());
        let mut seen = CardMultiset::with_types(CARD_TYPES);
        seen.add_all(self.hands[observer].iter().map(|&c| c as usize));
        for pile in &self.discards {
            seen.add_all(pile.iter().map(|&c| c as usize));
        }
        let mut pool: Vec<u8> = Vec::new();
        for t in 0..CARD_TYPES {
            let left = unseen.count(t) - seen.count(t);
            pool.extend(std::iter::repeat(t as u8).take(left as usize));
        }
        pool.shuffle(rng);
        for p in (0..self.n()).filter(|&p| p != observer) {
            for c in self.hands[p].iter_mut() {
                *c = pool.pop().unwrap();
            }
        }
        if self.burned.is_some() {
            self.burned = pool.pop();
        }
        for c in self.deck.iter_mut() {
            *c = pool.pop().unwrap();
        }
        debug_assert!(pool.is_empty());
    }

    fn census(&self) -> Option<CardMultiset> {
        let mut m = CardMultiset::with_types(CARD_TYPES);
        let all = self
            .hands
            .iter()
            .chain(&self.discards)
            .flatten()
            .chain(&self.deck)
            .chain(&self.burned);
        m.add_all(all.map(|&c| c as usize));
        Some(m)
    }

    fn encode(&self, enc: &mut Encoder) {
        self.seating.encode(enc);
        enc.bytes(&self.tokens);
        for p in 0..self.n() {
            encode_cards(enc, &self.hands[p]);
            encode_cards(enc, &self.discards[p]);
            enc.bool(self.eliminated[p]);
            enc.bool(self.protected[p]);
        }
        encode_cards(enc, &self.deck);
        enc.u8(self.burned.unwrap_or(u8::MAX));
        enc.u8(self.to_move);
        enc.u16(self.round);
        enc.u8(self.winner.unwrap_or(u8::MAX));
    }

    fn decode(dec: &mut Decoder<'_>, n: usize) -> Result<Self, DecodeError> {
        let seating = Seating::decode(dec)?;
        super::check_seating(&seating, n)?;
        let tokens = dec.take(n)?.to_vec();
        let mut hands = Vec::with_capacity(n);
        let mut discards = Vec::with_capacity(n);
        let mut eliminated = Vec::with_capacity(n);
        let mut protected = Vec::with_capacity(n);
        for _ in 0..n {
            hands.push(decode_cards(dec, CARD_TYPES)?);
            discards.push(decode_cards(dec, CARD_TYPES)?);
            eliminated.push(dec.bool()?);
            protected.push(dec.bool()?);
        }
        let deck = decode_cards(dec, CARD_TYPES)?;
        let burned = match dec.u8()? {
            u8::MAX => None,
            c if (c as usize) < CARD_TYPES => Some(c),
            _ => return Err(DecodeError::Invalid("burned card".into())),
        };
        let to_move = dec.u8()?;
        let round = dec.u16()?;
        let winner = match dec.u8()? {
            u8::MAX => None,
            w if (w as usize) < n => Some(w),
            _ => return Err(DecodeError::Invalid("winner".into())),
        };
        check_len(&hands, n, "hands")?;
        if to_move as usize >= n || hands.iter().any(|h| h.len() > 2) {
            return Err(DecodeError::Invalid("turn bookkeeping".into()));
        }
        let s = Self {
            seating,
            tokens,
            hands,
            deck,
            burned,
            discards,
            eliminated,
            protected,
            to_move,
            round,
            winner,
        };
        let expected = CardMultiset::from_counts(COMPOSITION.iter().map(|&c| c as u32).collect());
        if s.census() != Some(expected) {
            return Err(DecodeError::Invalid("card composition".into()));
        }
        if winner.is_none() && s.hands[to_move as usize].len() != 2 {
            return Err(DecodeError::Invalid("actor must hold two cards".into()));
        }
        Ok(s)
    }
}
