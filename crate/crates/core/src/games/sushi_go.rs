//! Sushi Go!, standard 108-card deck, three rounds.
//!
//! Within a turn every player picks in turn order; picks stay hidden until
//! the last player has picked, then all are revealed and hands move to the
//! next player in turn order.
//!
//! Action enumeration (20 entries):
//!
//! | index     | meaning                                                     |
//! |-----------|-------------------------------------------------------------|
//! | `t`       | play one card of type `t` (0..12, see [`NAMES`])             |
//! | `12 + f`  | use chopsticks: play the best card of family `f` (0..8, see [`FAMILIES`]) now and pick one more card with a `t` action |
//!
//! "Best" means the highest Maki roll count or the most valuable nigiri.

use rand::seq::SliceRandom;

use crate::codec::{Decoder, Encoder};
use crate::engine::{ActionId, GameResult, ObservationLayout, Seating};
use crate::error::DecodeError;
use crate::games::{check_len, decode_cards, encode_cards, CardMultiset, Rules};
use crate::rng::GameRng;

pub const ACTION_COUNT: usize = 20;
pub const CARD_TYPES: usize = 12;
pub const ROUNDS: u8 = 3;

pub const MAKI1: u8 = 0;
pub const MAKI2: u8 = 1;
pub const MAKI3: u8 = 2;
pub const TEMPURA: u8 = 3;
pub const SASHIMI: u8 = 4;
pub const DUMPLING: u8 = 5;
pub const EGG: u8 = 6;
pub const SALMON: u8 = 7;
pub const SQUID: u8 = 8;
pub const WASABI: u8 = 9;
pub const CHOPSTICKS: u8 = 10;
pub const PUDDING: u8 = 11;

pub const NAMES: [&str; CARD_TYPES] = [
    "Maki x1",
    "Maki x2",
    "Maki x3",
    "Tempura",
    "Sashimi",
    "Dumpling",
    "Egg Nigiri",
    "Salmon Nigiri",
    "Squid Nigiri",
    "Wasabi",
    "Chopsticks",
    "Pudding",
];

pub const COMPOSITION: [u8; CARD_TYPES] = [6, 12, 8, 14, 14, 14, 5, 10, 5, 6, 4, 10];

pub const FAMILIES: [&str; 8] = [
    "Maki", "Tempura", "Sashimi", "Dumpling", "Nigiri", "Wasabi", "Chopsticks", "Pudding",
];

/// Card types of each family, best first.
const FAMILY_MEMBERS: [&[u8]; 8] = [
    &[MAKI3, MAKI2, MAKI1],
    &[TEMPURA],
    &[SASHIMI],
    &[DUMPLING],
    &[SQUID, SALMON, EGG],
    &[WASABI],
    &[CHOPSTICKS],
    &[PUDDING],
];

const SCORE_SCALE: f32 = 10.0;

pub fn hand_size(players: usize) -> usize {
    12 - players
}

pub fn layout(players: usize) -> ObservationLayout {
    ObservationLayout::builder()
        .field("hand", CARD_TYPES, "count of each card type in own hand")
        .field(
            "played",
            CARD_TYPES * players,
            "per player (observer first, then turn order) count of each card type on the table this round; the observer's own unrevealed picks are included",
        )
        .field(
            "score",
            players,
            "points banked in finished rounds / 10, same player order",
        )
        .field("pudding", players, "puddings collected so far, same player order")
        .build()
}

pub fn describe_action(a: ActionId) -> String {
    if a < CARD_TYPES {
        format!("play {}", NAMES[a])
    } else {
        format!(
            "use chopsticks: play best {} now, then pick another card",
            FAMILIES[a - CARD_TYPES]
        )
    }
}

fn best_of_family(hand: &[u8], family: usize) -> Option<u8> {
    FAMILY_MEMBERS[family]
        .iter()
        .copied()
        .find(|c| hand.contains(c))
}

/// Points of one player's table excluding Maki and Pudding, which are scored
/// relative to the other players.
pub fn tableau_points(cards: &[u8]) -> i32 {
    let count = |t: u8| cards.iter().filter(|&&c| c == t).count() as i32;
    let mut pts = count(TEMPURA) / 2 * 5 + count(SASHIMI) / 3 * 10;
    pts += [0, 1, 3, 6, 10, 15][count(DUMPLING).min(5) as usize];
    let mut wasabi = 0;
    for &c in cards {
        let base = match c {
            WASABI => {
                wasabi += 1;
                continue;
            }
            EGG => 1,
            SALMON => 2,
            SQUID => 3,
            _ => continue,
        };
        if wasabi > 0 {
            wasabi -= 1;
            pts += base * 3;
        } else {
            pts += base;
        }
    }
    pts
}

pub fn maki_rolls(cards: &[u8]) -> i32 {
    cards
        .iter()
        .map(|&c| match c {
            MAKI1 => 1,
            MAKI2 => 2,
            MAKI3 => 3,
            _ => 0,
        })
        .sum()
}

/// Majority points: `first` split among the players with the most, and, if
/// the first place is not shared, `second` split among the runners-up.
/// Players with zero never score.
pub fn majority_points(values: &[i32], first: i32, second: i32) -> Vec<i32> {
    let mut out = vec![0; values.len()];
    let top = values.iter().copied().max().unwrap_or(0);
    if top <= 0 {
        return out;
    }
    let winners: Vec<usize> = (0..values.len()).filter(|&p| values[p] == top).collect();
    for &p in &winners {
        out[p] += first / winners.len() as i32;
    }
    if winners.len() == 1 {
        let runner = values.iter().copied().filter(|&v| v < top).max().unwrap_or(0);
        if runner > 0 {
            let seconds: Vec<usize> = (0..values.len()).filter(|&p| values[p] == runner).collect();
            for &p in &seconds {
                out[p] += second / seconds.len() as i32;
            }
        }
    }
    out
}

/// End-of-game pudding points.
pub fn pudding_points(puddings: &[i32]) -> Vec<i32> {
    let n = puddings.len();
    let mut out = vec![0; n];
    let most = *puddings.iter().max().unwrap();
    let least = *puddings.iter().min().unwrap();
    if most == least {
        return out;
    }
    let top: Vec<usize> = (0..n).filter(|&p| puddings[p] == most).collect();
    for &p in &top {
        out[p] += 6 / top.len() as i32;
    }
    if n > 2 {
        let bottom: Vec<usize> = (0..n).filter(|&p| puddings[p] == least).collect();
        for &p in &bottom {
            out[p] -= 6 / bottom.len() as i32;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SushiGo {
    seating: Seating,
    round: u8,
    deck: Vec<u8>,
    hands: Vec<Vec<u8>>,
    /// Cards on each player's table this round, in play order.
    tables: Vec<Vec<u8>>,
    /// Hidden picks of the current turn, in pick order.
    pending: Vec<Vec<u8>>,
    used_chopsticks: Vec<bool>,
    /// Cards scored in finished rounds (everything but puddings).
    discard: Vec<u8>,
    puddings: Vec<u8>,
    score: Vec<i32>,
    decider: u8,
    follow_up: bool,
    finished: bool,
}

impl SushiGo {
    pub fn tables(&self) -> &[Vec<u8>] {
        &self.tables
    }

    pub fn hand(&self, p: usize) -> &[u8] {
        &self.hands[p]
    }

    pub fn round(&self) -> u8 {
        self.round
    }

    pub fn puddings(&self) -> &[u8] {
        &self.puddings
    }

    pub fn banked_score(&self) -> &[i32] {
        &self.score
    }

    fn n(&self) -> usize {
        self.score.len()
    }

    fn deal(&mut self) {
        let size = hand_size(self.n());
        for h in self.hands.iter_mut() {
            let at = self.deck.len() - size;
            *h = self.deck.split_off(at);
        }
        self.decider = 0;
        self.follow_up = false;
    }

    fn take_from_hand(&mut self, p: usize, card: u8) {
        let i = self.hands[p].iter().position(|&c| c == card).expect("card in hand");
        self.hands[p].swap_remove(i);
        self.pending[p].push(card);
    }

    fn reveal(&mut self) {
        let n = self.n();
        for p in 0..n {
            let picks = std::mem::take(&mut self.pending[p]);
            self.tables[p].extend(picks);
            if std::mem::take(&mut self.used_chopsticks[p]) {
                let i = self.tables[p]
                    .iter()
                    .position(|&c| c == CHOPSTICKS)
                    .expect("chopsticks on table");
                self.tables[p].remove(i);
                self.hands[p].push(CHOPSTICKS);
            }
        }
        if self.hands.iter().all(|h| h.is_empty()) {
            self.end_round();
        } else {
            // hands move to the next player in turn order
            let old = std::mem::take(&mut self.hands);
            self.hands = vec![Vec::new(); n];
            for (p, h) in old.into_iter().enumerate() {
                self.hands[self.seating.next(p)] = h;
            }
            self.decider = 0;
            self.follow_up = false;
        }
    }

    fn end_round(&mut self) {
        let n = self.n();
        let makis: Vec<i32> = self.tables.iter().map(|t| maki_rolls(t)).collect();
        let maki = majority_points(&makis, 6, 3);
        for p in 0..n {
            self.score[p] += tableau_points(&self.tables[p]) + maki[p];
            let table = std::mem::take(&mut self.tables[p]);
            for c in table {
                if c == PUDDING {
                    self.puddings[p] += 1;
                } else {
                    self.discard.push(c);
                }
            }
        }
        self.round += 1;
        if self.round >= ROUNDS {
            let pud: Vec<i32> = self.puddings.iter().map(|&x| x as i32).collect();
            for (s, extra) in self.score.iter_mut().zip(pudding_points(&pud)) {
                *s += extra;
            }
            self.finished = true;
        } else {
            self.deal();
        }
    }

    fn pick_legal(&self, p: usize, mask: &mut [bool]) {
        for &c in &self.hands[p] {
            mask[c as usize] = true;
        }
    }
}

impl Rules for SushiGo {
    fn new(num_players: usize, rng: &mut GameRng) -> Self {
        let seating = Seating::random(num_players, rng);
        let mut deck: Vec<u8> = COMPOSITION
            .iter()
            .enumerate()
            .flat_map(|(t, &c)| std::iter::repeat(t as u8).take(c as usize))
            .collect();
        deck.shuffle(rng);
        let mut s = Self {
            seating,
            round: 0,
            deck,
            hands: vec![Vec::new(); num_players],
            tables: vec![Vec::new(); num_players],
            pending: vec![Vec::new(); num_players],
            used_chopsticks: vec![false; num_players],
            discard: Vec::new(),
            puddings: vec![0; num_players],
            score: vec![0; num_players],
            decider: 0,
            follow_up: false,
            finished: false,
        };
        s.deal();
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
        self.pick_legal(p, mask);
        if !self.follow_up && self.hands[p].len() >= 2 && self.tables[p].contains(&CHOPSTICKS) {
            for f in 0..FAMILIES.len() {
                if best_of_family(&self.hands[p], f).is_some() {
                    mask[CARD_TYPES + f] = true;
                }
            }
        }
    }

    fn apply(&mut self, action: ActionId, _rng: &mut GameRng) {
        let p = self.seating.at(self.decider as usize);
        if action < CARD_TYPES {
            self.take_from_hand(p, action as u8);
            self.follow_up = false;
            self.decider += 1;
        } else {
            let card = best_of_family(&self.hands[p], action - CARD_TYPES).unwrap();
            self.take_from_hand(p, card);
            self.used_chopsticks[p] = true;
            self.follow_up = true;
        }
        if self.decider as usize == self.n() {
            self.reveal();
        }
    }

    fn observe(&self, player: usize, out: &mut [f32]) {
        let n = self.n();
        for &c in &self.hands[player] {
            out[c as usize] += 1.0;
        }
        let played = &mut out[CARD_TYPES..CARD_TYPES * (n + 1)];
        for k in 0..n {
            let q = self.seating.relative(player, k);
            let row = &mut played[k * CARD_TYPES..(k + 1) * CARD_TYPES];
            for &c in &self.tables[q] {
                row[c as usize] += 1.0;
            }
            if q == player {
                for &c in &self.pending[q] {
                    row[c as usize] += 1.0;
                }
            }
        }
        let base = CARD_TYPES * (n + 1);
        for k in 0..n {
            let q = self.seating.relative(player, k);
            out[base + k] = self.score[q] as f32 / SCORE_SCALE;
            out[base + n + k] = self.puddings[q] as f32;
        }
    }

    fn result(&self) -> Option<GameResult> {
        if !self.finished {
            return None;
        }
        // most puddings breaks ties
        let keys: Vec<f64> = (0..self.n())
            .map(|p| self.score[p] as f64 + self.puddings[p] as f64 * 1e-3)
            .collect();
        Some(GameResult::from_keys(&keys, self.scores()))
    }

    fn scores(&self) -> Vec<f64> {
        self.score.iter().map(|&s| s as f64).collect()
    }

    fn redeterminize(&mut self, observer: usize, rng: &mut GameRng) {
        let mut pool: Vec<u8> = self.deck.clone();
        for p in (0..self.n()).filter(|&p| p != observer) {
            pool.extend(&self.hands[p]);
            pool.extend(&self.pending[p]);
        }
        pool.sort_unstable();
        pool.shuffle(rng);
        for p in (0..self.n()).filter(|&p| p != observer) {
            for c in self.hands[p].iter_mut().chain(self.pending[p].iter_mut()) {
                *c = pool.pop().unwrap();
            }
        }
        for c in self.deck.iter_mut() {
            *c = pool.pop().unwrap();
        }
    }

    fn census(&self) -> Option<CardMultiset> {
        let mut m = CardMultiset::with_types(CARD_TYPES);
        let cards = self
            .hands
            .iter()
            .chain(&self.tables)
            .chain(&self.pending)
            .flatten()
            .chain(&self.deck)
            .chain(&self.discard);
        m.add_all(cards.map(|&c| c as usize));
        for &p in &self.puddings {
            m.add(PUDDING as usize, p as u32);
        }
        Some(m)
    }

    fn encode(&self, enc: &mut Encoder) {
        self.seating.encode(enc);
        enc.u8(self.round);
        encode_cards(enc, &self.deck);
        encode_cards(enc, &self.discard);
        for p in 0..self.n() {
            encode_cards(enc, &self.hands[p]);
            encode_cards(enc, &self.tables[p]);
            encode_cards(enc, &self.pending[p]);
            enc.bool(self.used_chopsticks[p]);
            enc.u8(self.puddings[p]);
            enc.i32(self.score[p]);
        }
        enc.u8(self.decider);
        enc.bool(self.follow_up);
        enc.bool(self.finished);
    }

    fn decode(dec: &mut Decoder<'_>, n: usize) -> Result<Self, DecodeError> {
        let seating = Seating::decode(dec)?;
        super::check_seating(&seating, n)?;
        let round = dec.u8()?;
        let deck = decode_cards(dec, CARD_TYPES)?;
        let discard = decode_cards(dec, CARD_TYPES)?;
        let mut hands = Vec::with_capacity(n);
        let mut tables = Vec::with_capacity(n);
        let mut pending = Vec::with_capacity(n);
        let mut used_chopsticks = Vec::with_capacity(n);
        let mut puddings = Vec::with_capacity(n);
        let mut score = Vec::with_capacity(n);
        for _ in 0..n {
            hands.push(decode_cards(dec, CARD_TYPES)?);
            tables.push(decode_cards(dec, CARD_TYPES)?);
            pending.push(decode_cards(dec, CARD_TYPES)?);
            used_chopsticks.push(dec.bool()?);
            puddings.push(dec.u8()?);
            score.push(dec.i32()?);
        }
        let decider = dec.u8()?;
        let follow_up = dec.bool()?;
        let finished = dec.bool()?;
        check_len(&hands, n, "hands")?;
        if decider as usize > n || round > ROUNDS {
            return Err(DecodeError::Invalid("turn bookkeeping".into()));
        }
        let s = Self {
            seating,
            round,
            deck,
            hands,
            tables,
            pending,
            used_chopsticks,
            discard,
            puddings,
            score,
            decider,
            follow_up,
            finished,
        };
        let expected = CardMultiset::from_counts(COMPOSITION.iter().map(|&c| c as u32).collect());
        if s.census() != Some(expected) {
            return Err(DecodeError::Invalid("card composition".into()));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deck_has_108_cards() {
        assert_eq!(COMPOSITION.iter().map(|&c| c as u32).sum::<u32>(), 108);
    }

    #[test]
    fn scoring_tables() {
        assert_eq!(tableau_points(&[TEMPURA, TEMPURA, TEMPURA]), 5);
        assert_eq!(tableau_points(&[SASHIMI; 6]), 20);
        assert_eq!(tableau_points(&[DUMPLING; 7]), 15);
        assert_eq!(tableau_points(&[WASABI, SQUID, SQUID]), 9 + 3);
        // nigiri before the wasabi is not boosted
        assert_eq!(tableau_points(&[EGG, WASABI, SALMON]), 1 + 6);
        assert_eq!(majority_points(&[5, 3, 3], 6, 3), vec![6, 1, 1]);
        assert_eq!(majority_points(&[5, 5, 3], 6, 3), vec![3, 3, 0]);
        assert_eq!(majority_points(&[0, 0], 6, 3), vec![0, 0]);
        assert_eq!(pudding_points(&[3, 1]), vec![6, 0]);
        assert_eq!(pudding_points(&[3, 1, 1]), vec![6, -3, -3]);
        assert_eq!(pudding_points(&[2, 2, 2]), vec![0, 0, 0]);
    }

    #[test]
    fn hands_rotate_after_everyone_picks() {
        let mut rng = GameRng::from_seed(3);
        let mut s = SushiGo::new(3, &mut rng);
        let before: Vec<Vec<u8>> = s.hands.clone();
        let mut picked = vec![0u8; 3];
        for _ in 0..3 {
            let p = s.current_player().unwrap();
            let c = s.hands[p][0];
            picked[p] = c;
            s.apply(c as usize, &mut rng);
        }
        for p in 0..3 {
            let mut expect = before[p].clone();
            let i = expect.iter().position(|&c| c == picked[p]).unwrap();
            expect.swap_remove(i);
            let mut got = s.hands[s.seating.next(p)].clone();
            expect.sort();
            got.sort();
            assert_eq!(got, expect);
            assert_eq!(s.tables[p], vec![picked[p]]);
        }
    }

    #[test]
    fn chopsticks_play_two_cards_and_return_to_hand() {
        let mut rng = GameRng::from_seed(9);
        let mut s = SushiGo::new(2, &mut rng);
        let p = s.current_player().unwrap();
        s.tables[p] = vec![CHOPSTICKS];
        // keep the composition intact: swap cards with the deck
        let mut hand = vec![SQUID, EGG, TEMPURA];
        let drop: Vec<u8> = s.hands[p].drain(3..).collect();
        std::mem::swap(&mut s.hands[p], &mut hand);
        s.deck.extend(hand);
        s.deck.extend(drop);
        let i = s.deck.iter().position(|&c| c == CHOPSTICKS).unwrap();
        s.deck.remove(i);
        let i = s.deck.iter().position(|&c| c == SQUID).unwrap();
        s.deck.remove(i);
        let i = s.deck.iter().position(|&c| c == EGG).unwrap();
        s.deck.remove(i);
        let i = s.deck.iter().position(|&c| c == TEMPURA).unwrap();
        s.deck.remove(i);
        assert_eq!(s.census().unwrap().total(), 108);

        let mut mask = [false; ACTION_COUNT];
        s.legal_actions(&mut mask);
        assert!(mask[CARD_TYPES + 4]); // nigiri family
        assert!(!mask[CARD_TYPES]); // no maki in hand
        s.apply(CARD_TYPES + 4, &mut rng);
        assert_eq!(s.current_player(), Some(p));
        let mut mask = [false; ACTION_COUNT];
        s.legal_actions(&mut mask);
        assert!(mask[..CARD_TYPES].iter().filter(|m| **m).count() == 2);
        assert!(mask[CARD_TYPES..].iter().all(|m| !*m));
        s.apply(TEMPURA as usize, &mut rng);
        let q = s.current_player().unwrap();
        let c = s.hands[q][0];
        s.apply(c as usize, &mut rng);
        assert_eq!(s.tables[p], vec![SQUID, TEMPURA]);
        assert!(s.hands[s.seating.next(p)].contains(&CHOPSTICKS));
        assert_eq!(s.census().unwrap().total(), 108);
    }
}
