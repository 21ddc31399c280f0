use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::{Decoder, Encoder};
use crate::error::DecodeError;

/// Turn order around the table, fixed at reset. `order[k]` is the player
/// sitting at turn position `k`; position 0 starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seating {
    order: Vec<u8>,
}

impl Seating {
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<u8> = (0..n as u8).collect();
        order.shuffle(rng);
        Self { order }
    }

    pub fn num_players(&self) -> usize {
        self.order.len()
    }

    pub fn first(&self) -> usize {
        self.order[0] as usize
    }

    pub fn position(&self, player: usize) -> usize {
        self.order
            .iter()
            .position(|&p| p as usize == player)
            .expect("player seated")
    }

    pub fn at(&self, position: usize) -> usize {
        self.order[position % self.order.len()] as usize
    }

    /// Player acting after `player`.
    pub fn next(&self, player: usize) -> usize {
        self.at(self.position(player) + 1)
    }

    /// The player `k` turn positions after `observer` (k = 0 is the observer).
    pub fn relative(&self, observer: usize, k: usize) -> usize {
        self.at(self.position(observer) + k)
    }

    /// All players in turn order starting from `player`.
    pub fn from(&self, player: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.position(player);
        (0..self.order.len()).map(move |k| self.at(start + k))
    }

    pub fn encode(&self, enc: &mut Encoder) {
        enc.u8_slice(&self.order);
    }

    pub fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let order = dec.u8_vec()?;
        let mut seen = order.clone();
        seen.sort_unstable();
        if seen.iter().enumerate().any(|(i, &p)| p as usize != i) {
            return Err(DecodeError::Invalid("seating is not a permutation".into()));
        }
        Ok(Self { order })
    }
}
