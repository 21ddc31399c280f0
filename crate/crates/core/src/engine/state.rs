use rand::RngCore;

use super::{ActionId, ActionMask, GameId, GameResult, Observation, PlayerId, MAX_ACTIONS};
use crate::codec::{Decoder, Encoder};
use crate::error::{DecodeError, GameError};
use crate::games::{
    self, diamant::Diamant, dots_and_boxes::DotsAndBoxes, exploding_kittens::ExplodingKittens,
    love_letter::LoveLetter, sushi_go::SushiGo, tictactoe::TicTacToe, CardMultiset, GameSpec,
    Rules,
};
use crate::rng::GameRng;

pub const STATE_MAGIC: &[u8; 4] = b"TGST";
pub const STATE_VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    TicTacToe(TicTacToe),
    Diamant(Diamant),
    LoveLetter(LoveLetter),
    ExplodingKittens(ExplodingKittens),
    SushiGo(SushiGo),
    DotsAndBoxes(DotsAndBoxes),
}

macro_rules! with_rules {
    ($kind:expr, $g:ident => $body:expr) => {
        match $kind {
            Kind::TicTacToe($g) => $body,
            Kind::Diamant($g) => $body,
            Kind::LoveLetter($g) => $body,
            Kind::ExplodingKittens($g) => $body,
            Kind::SushiGo($g) => $body,
            Kind::DotsAndBoxes($g) => $body,
        }
    };
}

/// Result of a successful [`GameState::apply`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Set when the action ended the game.
    pub terminal: Option<GameResult>,
}

/// Full (hidden-information) state of one game instance together with the
/// episode's random stream.
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    game: GameId,
    rng: GameRng,
    kind: Kind,
}

impl GameState {
    pub fn reset(game: GameId, num_players: usize, seed: u64) -> Result<Self, GameError> {
        let spec = games::spec(game);
        spec.check_players(num_players)?;
        let mut rng = GameRng::from_seed(seed);
        let kind = match game {
            GameId::TicTacToe => Kind::TicTacToe(TicTacToe::new(num_players, &mut rng)),
            GameId::Diamant => Kind::Diamant(Diamant::new(num_players, &mut rng)),
            GameId::LoveLetter => Kind::LoveLetter(LoveLetter::new(num_players, &mut rng)),
            GameId::ExplodingKittens => {
                Kind::ExplodingKittens(ExplodingKittens::new(num_players, &mut rng))
            }
            GameId::SushiGo => Kind::SushiGo(SushiGo::new(num_players, &mut rng)),
            GameId::DotsAndBoxes => Kind::DotsAndBoxes(DotsAndBoxes::new(num_players, &mut rng)),
        };
        Ok(Self { game, rng, kind })
    }

    pub fn game(&self) -> GameId {
        self.game
    }

    pub fn spec(&self) -> &'static GameSpec {
        games::spec(self.game)
    }

    pub fn num_players(&self) -> usize {
        with_rules!(&self.kind, g => g.num_players())
    }

    pub fn action_count(&self) -> usize {
        self.spec().action_count
    }

    pub fn observation_len(&self) -> usize {
        self.spec().observation_len(self.num_players())
    }

    pub fn is_terminal(&self) -> bool {
        with_rules!(&self.kind, g => g.current_player()).is_none()
    }

    /// The player who must act next.
    pub fn current_player(&self) -> Result<PlayerId, GameError> {
        with_rules!(&self.kind, g => g.current_player())
            .map(PlayerId)
            .ok_or(GameError::Terminal)
    }

    pub fn legal_actions(&self) -> Result<ActionMask, GameError> {
        let mut bits = vec![false; self.action_count()];
        self.legal_actions_into(&mut bits)?;
        Ok(ActionMask::from_bits(bits))
    }

    /// Writes the mask into `out` (length must equal the action count) and
    /// returns the number of legal actions.
    pub fn legal_actions_into(&self, out: &mut [bool]) -> Result<usize, GameError> {
        if self.is_terminal() {
            return Err(GameError::Terminal);
        }
        assert_eq!(out.len(), self.action_count(), "mask buffer length");
        out.fill(false);
        with_rules!(&self.kind, g => g.legal_actions(out));
        Ok(out.iter().filter(|b| **b).count())
    }

    pub fn is_legal(&self, action: ActionId) -> bool {
        let n = self.action_count();
        if action >= n || self.is_terminal() {
            return false;
        }
        let mut buf = [false; MAX_ACTIONS];
        with_rules!(&self.kind, g => g.legal_actions(&mut buf[..n]));
        buf[action]
    }

    pub fn apply(&mut self, action: ActionId) -> Result<StepOutcome, GameError> {
        if self.is_terminal() {
            return Err(GameError::Terminal);
        }
        if !self.is_legal(action) {
            return Err(GameError::IllegalAction { action });
        }
        let rng = &mut self.rng;
        with_rules!(&mut self.kind, g => g.apply(action, rng));
        Ok(StepOutcome {
            terminal: self.result(),
        })
    }

    pub fn observe(&self, player: PlayerId) -> Observation {
        let mut values = vec![0.0; self.observation_len()];
        self.observe_into(player, &mut values);
        Observation {
            owner: player,
            values,
        }
    }

    pub fn observe_into(&self, player: PlayerId, out: &mut [f32]) {
        assert!(player.0 < self.num_players(), "observer out of range");
        assert_eq!(out.len(), self.observation_len(), "observation buffer length");
        out.fill(0.0);
        with_rules!(&self.kind, g => g.observe(player.0, out));
    }

    pub fn result(&self) -> Option<GameResult> {
        with_rules!(&self.kind, g => g.result())
    }

    /// Current in-game score per player (zeros for games without a score).
    pub fn scores(&self) -> Vec<f64> {
        with_rules!(&self.kind, g => g.scores())
    }

    /// Clone in which everything `observer` cannot see is resampled from a
    /// stream seeded by `seed`, including the episode's future randomness.
    pub fn redeterminize(&self, observer: PlayerId, seed: u64) -> GameState {
        let mut rng = GameRng::from_seed(seed);
        let mut kind = self.kind.clone();
        with_rules!(&mut kind, g => g.redeterminize(observer.0, &mut rng));
        let episode = GameRng::from_seed(rng.next_u64());
        GameState {
            game: self.game,
            rng: episode,
            kind,
        }
    }

    /// Multiset of every card in every zone, for card games.
    pub fn census(&self) -> Option<CardMultiset> {
        with_rules!(&self.kind, g => g.census())
    }

    pub fn as_love_letter(&self) -> Option<&LoveLetter> {
        match &self.kind {
            Kind::LoveLetter(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_sushi_go(&self) -> Option<&SushiGo> {
        match &self.kind {
            Kind::SushiGo(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_diamant(&self) -> Option<&Diamant> {
        match &self.kind {
            Kind::Diamant(g) => Some(g),
            _ => None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.bytes(STATE_MAGIC);
        enc.u16(STATE_VERSION);
        enc.u8(self.game.code());
        enc.u8(self.num_players() as u8);
        self.rng.encode(&mut enc);
        with_rules!(&self.kind, g => g.encode(&mut enc));
        enc.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        if dec.take(4)? != STATE_MAGIC {
            return Err(DecodeError::BadMagic { expected: "TGST" });
        }
        let version = dec.u16()?;
        if version != STATE_VERSION {
            return Err(DecodeError::Version(version));
        }
        let code = dec.u8()?;
        let game = GameId::from_code(code)
            .ok_or_else(|| DecodeError::Invalid(format!("game code {code}")))?;
        let n = dec.u8()? as usize;
        games::spec(game)
            .check_players(n)
            .map_err(|e| DecodeError::Invalid(e.to_string()))?;
        let rng = GameRng::decode(&mut dec)?;
        let kind = match game {
            GameId::TicTacToe => Kind::TicTacToe(TicTacToe::decode(&mut dec, n)?),
            GameId::Diamant => Kind::Diamant(Diamant::decode(&mut dec, n)?),
            GameId::LoveLetter => Kind::LoveLetter(LoveLetter::decode(&mut dec, n)?),
            GameId::ExplodingKittens => {
                Kind::ExplodingKittens(ExplodingKittens::decode(&mut dec, n)?)
            }
            GameId::SushiGo => Kind::SushiGo(SushiGo::decode(&mut dec, n)?),
            GameId::DotsAndBoxes => Kind::DotsAndBoxes(DotsAndBoxes::decode(&mut dec, n)?),
        };
        dec.finish()?;
        Ok(Self { game, rng, kind })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_state_rejects_lifecycle_calls() {
        let mut s = GameState::reset(GameId::TicTacToe, 2, 1).unwrap();
        for a in [0, 3, 1, 4, 2] {
            s.apply(a).unwrap();
        }
        assert!(s.is_terminal());
        assert_eq!(s.current_player(), Err(GameError::Terminal));
        assert_eq!(s.legal_actions(), Err(GameError::Terminal));
        assert_eq!(s.apply(5), Err(GameError::Terminal));
        // observing a finished game is allowed
        assert_eq!(s.observe(PlayerId(0)).values.len(), 9);
    }

    #[test]
    fn decode_rejects_garbage() {
        let bytes = GameState::reset(GameId::LoveLetter, 3, 9).unwrap().to_bytes();
        assert!(matches!(
            GameState::from_bytes(&bytes[..bytes.len() - 1]),
            Err(DecodeError::Truncated)
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            GameState::from_bytes(&bad),
            Err(DecodeError::BadMagic { .. })
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(GameState::from_bytes(&extra), Err(DecodeError::Trailing));
    }
}
