//! Frozen-policy evaluation against the baseline agents.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentBudget, AgentKind};
use crate::engine::{GameId, GameState, Outcome, PlayerId};
use crate::error::{AgentError, GameError};
use crate::nn::{self, Mlp};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("policy expects obs {policy_obs} / actions {policy_actions}, game has {game_obs} / {game_actions}")]
    Mismatch {
        policy_obs: usize,
        policy_actions: usize,
        game_obs: usize,
        game_actions: usize,
    },
    #[error("need {needed} evaluation records for `{opponent}`, found {found}")]
    Insufficient {
        opponent: String,
        needed: usize,
        found: usize,
    },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// One evaluation measurement; also a row of the metrics stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: u64,
    pub kind: String,
    pub game: String,
    pub seed: u64,
    pub opponent: String,
    pub episodes: usize,
    pub win_rate: f64,
    pub tie_rate: f64,
    pub loss_rate: f64,
    pub mean_score: f64,
    /// Mean of winner's score minus learner's score.
    pub score_gap: f64,
}

/// How the learner chooses among its action probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ActionSelection {
    #[default]
    Sample,
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSettings {
    pub game: GameId,
    pub players: usize,
    pub opponent: AgentKind,
    pub episodes: usize,
    pub seed: u64,
    pub budget: AgentBudget,
    pub selection: ActionSelection,
}

/// Learner action for `state` from a frozen policy.
pub fn policy_act<R: Rng + ?Sized>(
    net: &Mlp<f32>,
    state: &GameState,
    selection: ActionSelection,
    rng: &mut R,
) -> Result<usize, GameError> {
    let me = state.current_player()?;
    let obs = state.observe(me);
    let mask = state.legal_actions()?;
    let out = net.forward(&obs.values, mask.as_slice());
    Ok(match selection {
        ActionSelection::Sample => nn::sample(&out.probs, rng),
        ActionSelection::Greedy => mask
            .legal()
            .max_by(|&a, &b| out.probs[a].total_cmp(&out.probs[b]).then(b.cmp(&a)))
            .expect("running state has a legal action"),
    })
}

fn check_dims(net: &Mlp<f32>, game: GameId, players: usize) -> Result<(), EvalError> {
    let spec = crate::games::spec(game);
    spec.check_players(players)?;
    let (obs, actions) = (spec.observation_len(players), spec.action_count);
    if net.obs_dim() != obs || net.action_dim() != actions {
        return Err(EvalError::Mismatch {
            policy_obs: net.obs_dim(),
            policy_actions: net.action_dim(),
            game_obs: obs,
            game_actions: actions,
        });
    }
    Ok(())
}

/// Plays `episodes` games of the policy against `opponent` (all other
/// seats), with the learner's seat drawn uniformly each episode.
pub fn evaluate(net: &Mlp<f32>, cfg: &EvalSettings, step: u64) -> Result<EvalRecord, EvalError> {
    check_dims(net, cfg.game, cfg.players)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opponent = cfg.opponent.build(cfg.budget, rng.gen());
    let (mut wins, mut ties, mut losses) = (0usize, 0usize, 0usize);
    let (mut score, mut gap) = (0.0, 0.0);
    for _ in 0..cfg.episodes {
        let mut state = GameState::reset(cfg.game, cfg.players, rng.gen())?;
        let learner = PlayerId(rng.gen_range(0..cfg.players));
        while let Ok(p) = state.current_player() {
            let a = if p == learner {
                policy_act(net, &state, cfg.selection, &mut rng)?
            } else {
                opponent.act(&state)?
            };
            state.apply(a)?;
        }
        let result = state.result().expect("finished game has a result");
        match result.outcome(learner) {
            Outcome::Win => wins += 1,
            Outcome::Draw => ties += 1,
            Outcome::Loss => losses += 1,
        }
        let mine = result.scores[learner.0];
        score += mine;
        gap += result.winner_score() - mine;
    }
    let n = cfg.episodes.max(1) as f64;
    Ok(EvalRecord {
        step,
        kind: "eval".into(),
        game: cfg.game.name().into(),
        seed: cfg.seed,
        opponent: cfg.opponent.name().into(),
        episodes: cfg.episodes,
        win_rate: wins as f64 / n,
        tie_rate: ties as f64 / n,
        loss_rate: losses as f64 / n,
        mean_score: score / n,
        score_gap: gap / n,
    })
}

/// Per-agent totals of a baseline tournament.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub slot: usize,
    pub agent: String,
    pub episodes: usize,
    pub win_rate: f64,
    pub tie_rate: f64,
    pub loss_rate: f64,
    pub mean_score: f64,
}

/// Plays `agents` (one per seat) against each other. Seats rotate every
/// episode so each agent plays every seat equally often.
pub fn run_match(
    game: GameId,
    agents: &[AgentKind],
    episodes: usize,
    seed: u64,
    budget: AgentBudget,
) -> Result<Vec<MatchRow>, EvalError> {
    let n = agents.len();
    crate::games::spec(game).check_players(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bots: Vec<_> = agents.iter().map(|k| k.build(budget, rng.gen())).collect();
    let mut tally = vec![[0usize; 3]; n];
    let mut scores = vec![0.0; n];
    for e in 0..episodes {
        let mut state = GameState::reset(game, n, rng.gen())?;
        let seat_of = |k: usize| (k + e) % n;
        while let Ok(p) = state.current_player() {
            let k = (p.0 + n - e % n) % n;
            let a = bots[k].act(&state)?;
            state.apply(a)?;
        }
        let result = state.result().expect("finished game has a result");
        for k in 0..n {
            let p = PlayerId(seat_of(k));
            let idx = match result.outcome(p) {
                Outcome::Win => 0,
                Outcome::Draw => 1,
                Outcome::Loss => 2,
            };
            tally[k][idx] += 1;
            scores[k] += result.scores[p.0];
        }
    }
    let d = episodes.max(1) as f64;
    Ok(agents
        .iter()
        .enumerate()
        .map(|(k, kind)| MatchRow {
            slot: k,
            agent: kind.name().into(),
            episodes,
            win_rate: tally[k][0] as f64 / d,
            tie_rate: tally[k][1] as f64 / d,
            loss_rate: tally[k][2] as f64 / d,
            mean_score: scores[k] / d,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub points: usize,
}

pub const SUMMARY_WINDOW: usize = 20;

/// Mean and deviation of `metric` over the last `window` records of
/// `opponent` (records in step order).
pub fn summarize_by(
    records: &[EvalRecord],
    opponent: &str,
    window: usize,
    metric: impl Fn(&EvalRecord) -> f64,
) -> Result<Summary, EvalError> {
    let vals: Vec<f64> = records
        .iter()
        .filter(|r| r.opponent == opponent)
        .map(metric)
        .collect();
    if vals.len() < window || window == 0 {
        return Err(EvalError::Insufficient {
            opponent: opponent.into(),
            needed: window.max(1),
            found: vals.len(),
        });
    }
    let tail = &vals[vals.len() - window..];
    let mean = tail.iter().sum::<f64>() / window as f64;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / window as f64;
    Ok(Summary {
        mean,
        sd: var.sqrt(),
        points: window,
    })
}

/// Final win rate against `opponent`.
pub fn summarize(records: &[EvalRecord], opponent: &str, window: usize) -> Result<Summary, EvalError> {
    summarize_by(records, opponent, window, |r| r.win_rate)
}

/// One row of the final results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub game: String,
    pub players: usize,
    pub reward_mode: String,
    pub opponent: String,
    pub win_rate: f64,
    pub sd: f64,
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(opponent: &str, win: f64) -> EvalRecord {
        EvalRecord {
            step: 0,
            kind: "eval".into(),
            game: "tictactoe".into(),
            seed: 0,
            opponent: opponent.into(),
            episodes: 5,
            win_rate: win,
            tie_rate: 1.0 - win,
            loss_rate: 0.0,
            mean_score: 0.0,
            score_gap: 0.0,
        }
    }

    #[test]
    fn summary_uses_only_the_last_window() {
        let mut rs: Vec<EvalRecord> = (0..30).map(|_| record("random", 0.0)).collect();
        rs.extend((0..20).map(|_| record("random", 0.7)));
        rs.push(record("osla", 1.0));
        let s = summarize(&rs, "random", 20).unwrap();
        assert!((s.mean - 0.7).abs() < 1e-12);
        assert!(s.sd.abs() < 1e-12);
        assert!(matches!(summarize(&rs, "osla", 20), Err(EvalError::Insufficient { .. })));
    }

    #[test]
    fn alternating_rates_average_to_half() {
        let rs: Vec<EvalRecord> = (0..20).map(|i| record("mcts", (i % 2) as f64)).collect();
        let s = summarize(&rs, "mcts", 20).unwrap();
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.sd, 0.5);
    }

    #[test]
    fn rates_sum_to_one_and_dims_are_checked() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net: Mlp<f32> = Mlp::new(9, 9, 8, &mut rng);
        let cfg = EvalSettings {
            game: GameId::TicTacToe,
            players: 2,
            opponent: AgentKind::Random,
            episodes: 10,
            seed: 4,
            budget: AgentBudget::default(),
            selection: ActionSelection::Sample,
        };
        let r = evaluate(&net, &cfg, 0).unwrap();
        assert!((r.win_rate + r.tie_rate + r.loss_rate - 1.0).abs() < 1e-9);
        assert_eq!(evaluate(&net, &cfg, 0).unwrap(), r);
        let wrong = EvalSettings {
            game: GameId::DotsAndBoxes,
            ..cfg
        };
        assert!(matches!(evaluate(&net, &wrong, 0), Err(EvalError::Mismatch { .. })));
    }
}
