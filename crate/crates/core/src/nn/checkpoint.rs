//! `PTCK` checkpoint files.
//!
//! Layout (little-endian): magic `PTCK`, u16 version, game name (u16 length
//! + UTF-8), u8 players, u32 obs_dim, u32 action_dim, u64 step, u64 seed,
//! u32 layer count, then per layer u32 rows, u32 cols, `rows*cols` f32
//! weights in row-major order and `rows` f32 biases. Layers are stored as
//! trunk 1, trunk 2, policy head, value head.

use std::path::Path;

use thiserror::Error;

use super::{Linear, Mlp};
use crate::codec::{Decoder, Encoder};
use crate::engine::GameId;
use crate::error::DecodeError;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PTCK";
pub const CHECKPOINT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Decode(#[from] DecodeError),
    #[error("checkpoint is for {found}, expected {expected}")]
    Mismatch { expected: String, found: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyCheckpoint {
    pub game: GameId,
    pub num_players: usize,
    pub step: u64,
    pub seed: u64,
    pub params: Mlp<f32>,
}

impl PolicyCheckpoint {
    pub fn obs_dim(&self) -> usize {
        self.params.obs_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.params.action_dim()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        e.bytes(CHECKPOINT_MAGIC);
        e.u16(CHECKPOINT_VERSION);
        e.str(self.game.name());
        e.u8(self.num_players as u8);
        e.u32(self.obs_dim() as u32);
        e.u32(self.action_dim() as u32);
        e.u64(self.step);
        e.u64(self.seed);
        e.u32(self.params.layers.len() as u32);
        for l in &self.params.layers {
            e.u32(l.rows as u32);
            e.u32(l.cols as u32);
            for &w in l.w.iter().chain(&l.b) {
                e.f32(w);
            }
        }
        e.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Decoder::new(bytes);
        if d.take(4)? != CHECKPOINT_MAGIC {
            return Err(DecodeError::BadMagic { expected: "PTCK" });
        }
        let version = d.u16()?;
        if version != CHECKPOINT_VERSION {
            return Err(DecodeError::Version(version));
        }
        let name = d.str()?;
        let game: GameId = name
            .parse()
            .map_err(|_| DecodeError::Invalid(format!("unknown game `{name}`")))?;
        let num_players = d.u8()? as usize;
        let obs_dim = d.u32()? as usize;
        let action_dim = d.u32()? as usize;
        let step = d.u64()?;
        let seed = d.u64()?;
        let count = d.u32()? as usize;
        if count != 4 {
            return Err(DecodeError::Invalid(format!("expected 4 layers, found {count}")));
        }
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let rows = d.u32()? as usize;
            let cols = d.u32()? as usize;
            let n = rows
                .checked_mul(cols)
                .filter(|n| *n <= bytes.len() && rows <= bytes.len())
                .ok_or(DecodeError::Truncated)?;
            let mut l = Linear::zeros(rows, cols);
            for w in l.w.iter_mut().take(n) {
                *w = d.f32()?;
            }
            for b in l.b.iter_mut() {
                *b = d.f32()?;
            }
            layers.push(l);
        }
        d.finish()?;
        let params = Mlp { layers };
        if !params.is_consistent() || params.obs_dim() != obs_dim || params.action_dim() != action_dim {
            return Err(DecodeError::Invalid("layer shapes disagree with header".into()));
        }
        Ok(Self {
            game,
            num_players,
            step,
            seed,
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Ok(Self::from_bytes(&std::fs::read(path)?)?)
    }

    /// Loads and refuses checkpoints trained for another configuration.
    pub fn load_for(path: &Path, game: GameId, num_players: usize) -> Result<Self, CheckpointError> {
        let ck = Self::load(path)?;
        ck.check(game, num_players)?;
        Ok(ck)
    }

    pub fn check(&self, game: GameId, num_players: usize) -> Result<(), CheckpointError> {
        if self.game != game || self.num_players != num_players {
            return Err(CheckpointError::Mismatch {
                expected: format!("{game} with {num_players} players"),
                found: format!("{} with {} players", self.game, self.num_players),
            });
        }
        let spec = crate::games::spec(game);
        if self.action_dim() != spec.action_count || self.obs_dim() != spec.observation_len(num_players) {
            return Err(CheckpointError::Mismatch {
                expected: format!(
                    "obs {} / actions {}",
                    spec.observation_len(num_players),
                    spec.action_count
                ),
                found: format!("obs {} / actions {}", self.obs_dim(), self.action_dim()),
            });
        }
        Ok(())
    }

    /// File name used by the trainer: `{game}_{seed}_{step}.ptck`.
    pub fn file_name(&self) -> String {
        format!("{}_{}_{}.ptck", self.game.name(), self.seed, self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> PolicyCheckpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        PolicyCheckpoint {
            game: GameId::TicTacToe,
            num_players: 2,
            step: 40_000,
            seed: 3,
            params: Mlp::new(9, 9, 64, &mut rng),
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let ck = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(ck.file_name());
        ck.save(&path).unwrap();
        let back = PolicyCheckpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes(), ck.to_bytes());
        assert_eq!(ck.file_name(), "tictactoe_3_40000.ptck");
    }

    #[test]
    fn truncated_and_foreign_files_are_rejected() {
        let bytes = sample().to_bytes();
        assert!(matches!(
            PolicyCheckpoint::from_bytes(&bytes[..bytes.len() - 3]),
            Err(DecodeError::Truncated)
        ));
        assert!(matches!(
            PolicyCheckpoint::from_bytes(b"TGST\x01\x00"),
            Err(DecodeError::BadMagic { .. })
        ));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ptck");
        sample().save(&path).unwrap();
        assert!(matches!(
            PolicyCheckpoint::load_for(&path, GameId::DotsAndBoxes, 2),
            Err(CheckpointError::Mismatch { .. })
        ));
        assert!(PolicyCheckpoint::load_for(&path, GameId::TicTacToe, 2).is_ok());
    }
}
