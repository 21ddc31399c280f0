//! Flat `key = value` run configuration shared by the config file and the
//! command-line flags (a flag `--total-steps` sets key `total_steps`).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::agents::AgentKind;
use crate::engine::GameId;
use crate::games;
use crate::selfplay::TrainConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// Normalizes a flag or key spelling to the canonical key.
pub fn canonical_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

/// Splits a config file into `(key, value)` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        out.push((canonical_key(k), v.trim().to_string()));
    }
    Ok(out)
}

/// Seed list syntax: `N` (seeds 0..N), `a,b,c`, or `a..b` (end exclusive).
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    let spec = spec.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
        (a..b).collect()
    } else if spec.contains(',') {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|e| format!("{e}")))
            .collect::<Result<_, _>>()?
    } else {
        let n: u64 = spec.parse().map_err(|e| format!("{e}"))?;
        (0..n).collect()
    };
    if seeds.is_empty() {
        return Err("empty seed list".into());
    }
    Ok(seeds)
}

fn format_seeds(seeds: &[u64]) -> String {
    seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub game: Option<GameId>,
    /// Defaults to the game's smallest player count.
    pub players: Option<usize>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Everything else; its `game`, `players` and `seed` are filled per run.
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            game: None,
            players: None,
            seeds: vec![0],
            out: PathBuf::from("runs"),
            train: TrainConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

/// Accepts plain integers as well as `1e6` and `1_000_000`.
fn parse_count(key: &str, value: &str) -> Result<u64, ConfigError> {
    let v = value.trim().replace('_', "");
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = parse(key, &v)?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
            reason: "not a non-negative integer".into(),
        })
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 26] = [
        "game",
        "players",
        "reward_mode",
        "seeds",
        "total_steps",
        "lr",
        "num_envs",
        "horizon",
        "pool_size",
        "checkpoint_interval",
        "resample_interval",
        "latest_bias",
        "eval_interval",
        "eval_episodes",
        "mcts_iterations",
        "out",
        "gamma",
        "gae_lambda",
        "clip",
        "update_epochs",
        "minibatches",
        "ent_coef",
        "vf_coef",
        "max_grad_norm",
        "anneal_lr",
        "eval_opponents",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = canonical_key(key);
        let k = key.as_str();
        let t = &mut self.train;
        let count = |v: &str| parse_count(k, v);
        let size = |v: &str| count(v).map(|n| n as usize);
        match k {
            "game" => self.game = Some(parse(k, value)?),
            "players" => self.players = Some(size(value)?),
            "reward_mode" => t.reward_mode = parse(k, value)?,
            "seeds" => {
                self.seeds = parse_seeds(value).map_err(|reason| ConfigError::BadValue {
                    key: key.clone(),
                    value: value.into(),
                    reason,
                })?
            }
            "total_steps" => t.total_steps = count(value)?,
            "lr" => t.ppo.lr = parse(k, value)?,
            "num_envs" => t.num_envs = size(value)?,
            "horizon" => t.horizon = size(value)?,
            "pool_size" => t.pool_size = size(value)?,
            "checkpoint_interval" => t.checkpoint_interval = count(value)?,
            "resample_interval" => t.resample_interval = count(value)?,
            "latest_bias" => t.latest_bias = parse(k, value)?,
            "eval_interval" => t.eval_interval = count(value)?,
            "eval_episodes" => t.eval_episodes = size(value)?,
            "mcts_iterations" => t.mcts_iterations = parse(k, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "gamma" => t.ppo.gamma = parse(k, value)?,
            "gae_lambda" => t.ppo.gae_lambda = parse(k, value)?,
            "clip" => t.ppo.clip = parse(k, value)?,
            "update_epochs" => t.ppo.update_epochs = size(value)?,
            "minibatches" => t.ppo.minibatches = size(value)?,
            "ent_coef" => t.ppo.ent_coef = parse(k, value)?,
            "vf_coef" => t.ppo.vf_coef = parse(k, value)?,
            "max_grad_norm" => t.ppo.max_grad_norm = parse(k, value)?,
            "anneal_lr" => t.ppo.anneal_lr = parse(k, value)?,
            "eval_opponents" => t.eval_opponents = parse_agents(value)?,
            _ => return Err(ConfigError::UnknownKey(key)),
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (k, v) in parse_pairs(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    /// Training configuration for one seed, validated.
    pub fn train_config(&self, seed: u64) -> Result<TrainConfig, ConfigError> {
        let game = self.game.ok_or(ConfigError::Missing("game"))?;
        let players = self.players.unwrap_or(games::spec(game).min_players);
        let cfg = TrainConfig {
            game,
            players,
            seed,
            ..self.train.clone()
        };
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.train_config(self.seeds[0]).map(|_| ())
    }

    /// Resolved configuration in the same `key = value` format.
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let game = self.game.map(|g| g.name().to_string()).unwrap_or_default();
        let players = self
            .players
            .or(self.game.map(|g| games::spec(g).min_players))
            .map(|p| p.to_string())
            .unwrap_or_default();
        let opponents = t
            .eval_opponents
            .iter()
            .map(|a| a.name())
            .collect::<Vec<_>>()
            .join(",");
        let rows: [(&str, String); 26] = [
            ("game", game),
            ("players", players),
            ("reward_mode", t.reward_mode.name().into()),
            ("seeds", format_seeds(&self.seeds)),
            ("total_steps", t.total_steps.to_string()),
            ("lr", t.ppo.lr.to_string()),
            ("num_envs", t.num_envs.to_string()),
            ("horizon", t.horizon.to_string()),
            ("pool_size", t.pool_size.to_string()),
            ("checkpoint_interval", t.checkpoint_interval.to_string()),
            ("resample_interval", t.resample_interval.to_string()),
            ("latest_bias", t.latest_bias.to_string()),
            ("eval_interval", t.eval_interval.to_string()),
            ("eval_episodes", t.eval_episodes.to_string()),
            ("mcts_iterations", t.mcts_iterations.to_string()),
            ("out", self.out.display().to_string()),
            ("gamma", t.ppo.gamma.to_string()),
            ("gae_lambda", t.ppo.gae_lambda.to_string()),
            ("clip", t.ppo.clip.to_string()),
            ("update_epochs", t.ppo.update_epochs.to_string()),
            ("minibatches", t.ppo.minibatches.to_string()),
            ("ent_coef", t.ppo.ent_coef.to_string()),
            ("vf_coef", t.ppo.vf_coef.to_string()),
            ("max_grad_norm", t.ppo.max_grad_norm.to_string()),
            ("anneal_lr", t.ppo.anneal_lr.to_string()),
            ("eval_opponents", opponents),
        ];
        let mut s = String::new();
        for (k, v) in rows {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Comma-separated agent names.
pub fn parse_agents(value: &str) -> Result<Vec<AgentKind>, ConfigError> {
    let agents = value
        .split(',')
        .map(|s| {
            s.trim().parse::<AgentKind>().map_err(|e| ConfigError::BadValue {
                key: "agents".into(),
                value: value.into(),
                reason: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if agents.is_empty() {
        return Err(ConfigError::Missing("agents"));
    }
    Ok(agents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("0").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn text_roundtrip() {
        let mut cfg = RunConfig::from_text(
            "# run\ngame = dotsandboxes\nreward-mode = score\ntotal_steps = 1e5\nseeds = 1..3\nlr=0.0005\n",
        )
        .unwrap();
        assert_eq!(cfg.game, Some(GameId::DotsAndBoxes));
        assert_eq!(cfg.train.total_steps, 100_000);
        assert_eq!(cfg.seeds, vec![1, 2]);
        cfg.players = Some(2);
        let back = RunConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_key_is_settable_and_printed() {
        let text = RunConfig {
            game: Some(GameId::TicTacToe),
            ..Default::default()
        }
        .to_text();
        let pairs = parse_pairs(&text).unwrap();
        let keys: Vec<&str> = pairs.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, RunConfig::KEYS);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            RunConfig::from_text("nonsense"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::from_text("colour = red"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            RunConfig::from_text("horizon = -1"),
            Err(ConfigError::BadValue { .. })
        ));
        assert_eq!(
            RunConfig::default().validate(),
            Err(ConfigError::Missing("game"))
        );
    }
}
