//! Self-play PPO against a pool of frozen snapshots of the learner.
//!
//! Each vector step asks every environment's current player for an action:
//! environments where the learner is to move are batched through the
//! learner's policy, the rest are grouped by the snapshot seated there.
//! Only learner decisions are stored. As soon as one environment has
//! collected `horizon` transitions, all environments are flushed into one
//! update.

mod buffer;
mod pool;

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use buffer::{Decision, RolloutBuffers, Transition};
pub use pool::{OpponentPool, PoolEntry};

use crate::agents::{AgentBudget, AgentKind};
use crate::engine::{ActionId, GameId, Outcome, PlayerId};
use crate::env::Env;
use crate::error::GameError;
use crate::eval::{evaluate, ActionSelection, EvalError, EvalRecord, EvalSettings};
use crate::games;
use crate::nn::{self, Adam, CheckpointError, Mlp, PolicyCheckpoint, HIDDEN};
use crate::ppo::{ppo_update, PpoConfig, PpoError, UpdateStats};
use crate::rewards::RewardMode;

/// Episodes in the self-play running means.
pub const RUNNING_WINDOW: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub game: GameId,
    pub players: usize,
    pub reward_mode: RewardMode,
    pub seed: u64,
    /// Environment interactions; every applied action counts as one.
    pub total_steps: u64,
    pub num_envs: usize,
    pub horizon: usize,
    pub hidden: usize,
    pub ppo: PpoConfig,
    pub pool_size: usize,
    pub checkpoint_interval: u64,
    pub resample_interval: u64,
    pub latest_bias: f64,
    /// Zero disables periodic evaluation.
    pub eval_interval: u64,
    pub eval_episodes: usize,
    pub eval_opponents: Vec<AgentKind>,
    pub mcts_iterations: u32,
    pub eval_selection: ActionSelection,
    /// Where `{game}_{seed}_{step}.ptck` snapshots go; none when unset.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            game: GameId::TicTacToe,
            players: 2,
            reward_mode: RewardMode::Terminal,
            seed: 0,
            total_steps: 1_000_000,
            num_envs: 8,
            horizon: 128,
            hidden: HIDDEN,
            ppo: PpoConfig::default(),
            pool_size: 10,
            checkpoint_interval: 100_000,
            resample_interval: 20_000,
            latest_bias: 0.5,
            eval_interval: 20_000,
            eval_episodes: 5,
            eval_opponents: AgentKind::ALL.to_vec(),
            mcts_iterations: 128,
            eval_selection: ActionSelection::Sample,
            checkpoint_dir: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let spec = games::spec(self.game);
        spec.check_players(self.players)?;
        self.reward_mode.check(self.game)?;
        self.ppo.validate().map_err(TrainError::Config)?;
        let checks = [
            (self.total_steps > 0, "total_steps must be positive"),
            (self.num_envs > 0, "num_envs must be positive"),
            (self.horizon > 0, "horizon must be positive"),
            (self.hidden > 0, "hidden must be positive"),
            (self.pool_size > 0, "pool_size must be positive"),
            (self.checkpoint_interval > 0, "checkpoint_interval must be positive"),
            (self.resample_interval > 0, "resample_interval must be positive"),
            ((0.0..=1.0).contains(&self.latest_bias), "latest_bias must lie in [0, 1]"),
            (self.eval_episodes > 0, "eval_episodes must be positive"),
            (self.mcts_iterations > 0, "mcts_iterations must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(TrainError::Config(msg.to_string())),
            None => Ok(()),
        }
    }

    fn budget(&self) -> AgentBudget {
        AgentBudget {
            mcts_iterations: self.mcts_iterations,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("metrics output: {0}")]
    Io(#[from] std::io::Error),
}

/// Who sits where in one environment: the learner's seat and, per seat,
/// the pool snapshot playing it (the learner's own entry is unused).
#[derive(Clone, Debug, PartialEq)]
pub struct SeatAssignment {
    pub learner: PlayerId,
    pub opponents: Vec<u64>,
}

/// Merged actions of one vector step plus the learner's decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    /// `actions[i]` is the action for environment `i`.
    pub actions: Vec<ActionId>,
    pub learner: Vec<(usize, Decision)>,
    /// Number of forward passes per group, learner first.
    pub batch_sizes: Vec<usize>,
}

fn decide<R: Rng + ?Sized>(net: &Mlp<f32>, env: &Env, player: PlayerId, rng: &mut R) -> Result<Decision, GameError> {
    let obs = env.observe(player).values;
    let mask = env.legal_actions()?.as_slice().to_vec();
    let out = net.forward(&obs, &mask);
    let action = nn::sample(&out.probs, rng);
    Ok(Decision {
        log_prob: (out.probs[action] as f64).ln(),
        value: out.value as f64,
        obs,
        mask,
        action,
    })
}

/// Splits environments between the learner and the seated snapshots,
/// queries each group and merges the actions back in environment order.
pub fn route_step<R: Rng + ?Sized>(
    envs: &[Env],
    seats: &[SeatAssignment],
    learner: &Mlp<f32>,
    pool: &OpponentPool,
    rng: &mut R,
) -> Result<Routed, GameError> {
    let mut mine = Vec::new();
    let mut groups: BTreeMap<u64, Vec<(usize, PlayerId)>> = BTreeMap::new();
    for (i, env) in envs.iter().enumerate() {
        let p = env.current_player()?;
        if p == seats[i].learner {
            mine.push(i);
        } else {
            groups.entry(seats[i].opponents[p.0]).or_default().push((i, p));
        }
    }
    let mut actions = vec![0; envs.len()];
    let mut decisions = Vec::with_capacity(mine.len());
    let mut batch_sizes = vec![mine.len()];
    for i in mine {
        let d = decide(learner, &envs[i], seats[i].learner, rng)?;
        actions[i] = d.action;
        decisions.push((i, d));
    }
    for (id, members) in groups {
        let entry = pool
            .get(id)
            .or_else(|| pool.latest())
            .expect("pool holds at least one snapshot");
        batch_sizes.push(members.len());
        for (i, p) in members {
            actions[i] = decide(&entry.params, &envs[i], p, rng)?.action;
        }
    }
    Ok(Routed {
        actions,
        learner: decisions,
        batch_sizes,
    })
}

/// Outcome of one finished training episode from the learner's side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeStat {
    pub step: u64,
    pub outcome: Outcome,
    pub score: f64,
    /// Winner's score minus the learner's.
    pub gap: f64,
}

/// Self-play progress row of the metrics stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfPlayRecord {
    pub step: u64,
    pub kind: String,
    pub game: String,
    pub seed: u64,
    pub episodes: usize,
    pub win_rate: Option<f64>,
    pub tie_rate: Option<f64>,
    pub loss_rate: Option<f64>,
    pub learner_score: Option<f64>,
    pub score_gap: Option<f64>,
    pub samples: usize,
    pub lr: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub params: Mlp<f32>,
    pub steps: u64,
    pub pool_ids: Vec<u64>,
    pub evals: Vec<EvalRecord>,
    pub selfplay: Vec<SelfPlayRecord>,
    pub episodes: Vec<EpisodeStat>,
    pub learner_decisions: usize,
    pub trained_samples: usize,
    pub updates: usize,
    pub checkpoints: Vec<PathBuf>,
    /// How often each seat was given to the learner at a reset.
    pub seat_counts: Vec<usize>,
}

/// Running means over the most recent episodes.
#[derive(Clone, Debug, Default)]
struct Window {
    recent: VecDeque<EpisodeStat>,
}

impl Window {
    fn push(&mut self, e: EpisodeStat) {
        if self.recent.len() == RUNNING_WINDOW {
            self.recent.pop_front();
        }
        self.recent.push_back(e);
    }

    fn mean(&self, f: impl Fn(&EpisodeStat) -> f64) -> Option<f64> {
        (!self.recent.is_empty())
            .then(|| self.recent.iter().map(f).sum::<f64>() / self.recent.len() as f64)
    }

    fn rate(&self, o: Outcome) -> Option<f64> {
        self.mean(|e| if e.outcome == o { 1.0 } else { 0.0 })
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

fn crossed(before: u64, now: u64, interval: u64) -> bool {
    interval > 0 && now / interval > before / interval
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    metrics: &'a mut dyn Write,
    net: Mlp<f32>,
    opt: Adam,
    pool: OpponentPool,
    envs: Vec<Env>,
    seats: Vec<SeatAssignment>,
    buffers: RolloutBuffers,
    /// Learner reward handed out by `Env::step` but not yet stored.
    carry: Vec<f64>,
    env_rng: ChaCha8Rng,
    act_rng: ChaCha8Rng,
    pool_rng: ChaCha8Rng,
    update_rng: ChaCha8Rng,
    eval_rng: ChaCha8Rng,
    step: u64,
    window: Window,
    report: TrainReport,
}

impl Trainer<'_> {
    fn write_line<T: Serialize>(&mut self, row: &T) -> Result<(), TrainError> {
        let line = serde_json::to_string(row).map_err(std::io::Error::from)?;
        writeln!(self.metrics, "{line}")?;
        Ok(())
    }

    fn new_seats(&mut self) -> SeatAssignment {
        let n = self.cfg.players;
        let learner = PlayerId(self.env_rng.gen_range(0..n));
        self.report.seat_counts[learner.0] += 1;
        let opponents = (0..n)
            .map(|_| self.pool.sample(&mut self.pool_rng).expect("pool seeded"))
            .collect();
        SeatAssignment { learner, opponents }
    }

    fn resample_opponents(&mut self) {
        for i in 0..self.seats.len() {
            for p in 0..self.cfg.players {
                self.seats[i].opponents[p] = self.pool.sample(&mut self.pool_rng).expect("pool seeded");
            }
        }
    }

    fn snapshot(&mut self) -> Result<(), TrainError> {
        self.pool.add(self.step, self.net.clone());
        self.save_checkpoint()
    }

    fn save_checkpoint(&mut self) -> Result<(), TrainError> {
        if let Some(dir) = &self.cfg.checkpoint_dir {
            let ck = PolicyCheckpoint {
                game: self.cfg.game,
                num_players: self.cfg.players,
                step: self.step,
                seed: self.cfg.seed,
                params: self.net.clone(),
            };
            let path = dir.join(ck.file_name());
            ck.save(&path)?;
            self.report.checkpoints.push(path);
        }
        Ok(())
    }

    fn vector_step(&mut self) -> Result<(), TrainError> {
        let routed = route_step(&self.envs, &self.seats, &self.net, &self.pool, &mut self.act_rng)?;
        for (i, d) in routed.learner {
            let reward = std::mem::take(&mut self.carry[i]) + self.envs[i].take_reward(self.seats[i].learner)?;
            self.buffers.decide(i, reward, d);
            self.report.learner_decisions += 1;
        }
        for i in 0..self.envs.len() {
            let st = self.envs[i].step(routed.actions[i])?;
            self.step += 1;
            let me = self.seats[i].learner;
            if st.next == Some(me) {
                self.carry[i] += st.reward;
            }
            if let Some(result) = st.result {
                let reward = std::mem::take(&mut self.carry[i]) + st.final_rewards[me.0];
                self.buffers.finish_episode(i, reward);
                let score = result.scores[me.0];
                let stat = EpisodeStat {
                    step: self.step,
                    outcome: result.outcome(me),
                    score,
                    gap: result.winner_score() - score,
                };
                self.window.push(stat);
                self.report.episodes.push(stat);
                self.envs[i].reset(self.env_rng.gen());
                let learner = PlayerId(self.env_rng.gen_range(0..self.cfg.players));
                self.report.seat_counts[learner.0] += 1;
                self.seats[i].learner = learner;
            }
        }
        Ok(())
    }

    fn update(&mut self, finished: bool) -> Result<(), TrainError> {
        let mut final_boot = vec![0.0; self.envs.len()];
        if finished {
            for i in 0..self.envs.len() {
                let me = self.seats[i].learner;
                let reward = std::mem::take(&mut self.carry[i]) + self.envs[i].take_reward(me)?;
                if self.buffers.truncate(i, reward) {
                    let env = &self.envs[i];
                    let obs = env.observe(me).values;
                    final_boot[i] = self.net.activations(&obs).value as f64;
                }
            }
        }
        let cfg = &self.cfg.ppo;
        let mut batch = self.buffers.flush(cfg.gamma, cfg.gae_lambda, |env, b| {
            b.open_value(env).unwrap_or(final_boot[env])
        })?;
        if batch.is_empty() {
            return Ok(());
        }
        let frac = if cfg.anneal_lr {
            (1.0 - self.step as f64 / self.cfg.total_steps as f64).max(0.0)
        } else {
            1.0
        };
        // keep a small floor so the last update still moves
        self.opt.lr = cfg.lr * frac.max(1.0 / self.cfg.total_steps as f64);
        let stats: UpdateStats = ppo_update(&mut self.net, &mut self.opt, &mut batch, cfg, &mut self.update_rng)?;
        self.report.trained_samples += batch.len();
        self.report.updates += 1;
        let w = &self.window;
        let row = SelfPlayRecord {
            step: self.step,
            kind: "selfplay".into(),
            game: self.cfg.game.name().into(),
            seed: self.cfg.seed,
            episodes: self.report.episodes.len(),
            win_rate: w.rate(Outcome::Win),
            tie_rate: w.rate(Outcome::Draw),
            loss_rate: w.rate(Outcome::Loss),
            learner_score: w.mean(|e| e.score),
            score_gap: w.mean(|e| e.gap),
            samples: batch.len(),
            lr: self.opt.lr,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            clip_fraction: stats.clip_fraction,
            approx_kl: stats.approx_kl,
        };
        self.write_line(&row)?;
        self.report.selfplay.push(row);
        Ok(())
    }

    fn evaluate_all(&mut self) -> Result<(), TrainError> {
        for &opponent in &self.cfg.eval_opponents {
            let settings = EvalSettings {
                game: self.cfg.game,
                players: self.cfg.players,
                opponent,
                episodes: self.cfg.eval_episodes,
                seed: self.eval_rng.gen(),
                budget: self.cfg.budget(),
                selection: self.cfg.eval_selection,
            };
            let rec = evaluate(&self.net, &settings, self.step)?;
            self.write_line(&rec)?;
            self.report.evals.push(rec);
        }
        Ok(())
    }
}

/// Runs self-play training and writes JSON-lines metrics to `metrics`.
pub fn train(cfg: &TrainConfig, metrics: &mut dyn Write) -> Result<TrainReport, TrainError> {
    cfg.validate()?;
    let spec = games::spec(cfg.game);
    let mut init_rng = stream(cfg.seed, 0);
    let net = Mlp::new(spec.observation_len(cfg.players), spec.action_count, cfg.hidden, &mut init_rng);
    let opt = Adam::new(net.num_params(), cfg.ppo.lr).with_max_grad_norm(cfg.ppo.max_grad_norm);
    let mut t = Trainer {
        cfg,
        metrics,
        report: TrainReport {
            params: net.clone(),
            steps: 0,
            pool_ids: Vec::new(),
            evals: Vec::new(),
            selfplay: Vec::new(),
            episodes: Vec::new(),
            learner_decisions: 0,
            trained_samples: 0,
            updates: 0,
            checkpoints: Vec::new(),
            seat_counts: vec![0; cfg.players],
        },
        net,
        opt,
        pool: OpponentPool::new(cfg.pool_size, cfg.latest_bias),
        envs: Vec::with_capacity(cfg.num_envs),
        seats: Vec::with_capacity(cfg.num_envs),
        buffers: RolloutBuffers::new(cfg.num_envs),
        carry: vec![0.0; cfg.num_envs],
        env_rng: stream(cfg.seed, 1),
        act_rng: stream(cfg.seed, 2),
        pool_rng: stream(cfg.seed, 3),
        update_rng: stream(cfg.seed, 4),
        eval_rng: stream(cfg.seed, 5),
        step: 0,
        window: Window::default(),
    };
    t.snapshot()?;
    for _ in 0..cfg.num_envs {
        let env = Env::new(cfg.game, cfg.players, cfg.reward_mode, t.env_rng.gen())?;
        t.envs.push(env);
        let seats = t.new_seats();
        t.seats.push(seats);
    }
    while t.step < cfg.total_steps {
        let before = t.step;
        t.vector_step()?;
        let finished = t.step >= cfg.total_steps;
        if finished || t.buffers.ready(cfg.horizon) {
            t.update(finished)?;
        }
        let snap = crossed(before, t.step, cfg.checkpoint_interval);
        if snap {
            t.snapshot()?;
        }
        if crossed(before, t.step, cfg.resample_interval) {
            t.resample_opponents();
        }
        if crossed(before, t.step, cfg.eval_interval) {
            t.evaluate_all()?;
        }
        if finished && !snap {
            t.save_checkpoint()?;
        }
    }
    t.metrics.flush()?;
    let mut report = t.report;
    report.params = t.net;
    report.steps = t.step;
    report.pool_ids = t.pool.ids();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        assert!(crossed(19_992, 20_000, 20_000));
        assert!(!crossed(20_000, 20_008, 20_000));
        assert!(!crossed(0, 8, 0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = TrainConfig {
            players: 3,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(TrainError::Game(_))));
        let bad = TrainConfig {
            reward_mode: RewardMode::Score,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            latest_bias: 1.5,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(TrainError::Config(_))));
    }
}
