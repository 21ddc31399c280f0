use rand::seq::IteratorRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{agent_rng, Agent};
use crate::engine::{ActionId, ActionMask, GameState};
use crate::error::AgentError;

/// Uniform choice among the legal actions of `mask`.
pub fn random_act<R: Rng + ?Sized>(mask: &ActionMask, rng: &mut R) -> Result<ActionId, AgentError> {
    mask.legal().choose(rng).ok_or(AgentError::EmptyMask)
}

pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self { rng: agent_rng(seed) }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, state: &GameState) -> Result<ActionId, AgentError> {
        random_act(&state.legal_actions()?, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn uniform_over_nine_cells() {
        let mask = ActionMask::from_bits(vec![true; 9]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let draws = 100_000;
        let mut counts = [0u32; 9];
        for _ in 0..draws {
            counts[random_act(&mask, &mut rng).unwrap()] += 1;
        }
        let p = 1.0 / 9.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn single_and_empty_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut bits = vec![false; 5];
        bits[3] = true;
        assert_eq!(random_act(&ActionMask::from_bits(bits), &mut rng).unwrap(), 3);
        assert_eq!(
            random_act(&ActionMask::from_bits(vec![false; 5]), &mut rng),
            Err(AgentError::EmptyMask)
        );
    }
}
