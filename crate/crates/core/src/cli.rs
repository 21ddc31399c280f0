//! `tabletop` command line: train, eval, match, inspect.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crate::agents::{AgentBudget, AgentKind};
use crate::config::{canonical_key, parse_agents, ConfigError, RunConfig};
use crate::engine::GameId;
use crate::eval::{
    evaluate, run_match, summarize, ActionSelection, EvalRecord, EvalSettings, SummaryRow,
    SUMMARY_WINDOW,
};
use crate::games;
use crate::nn::PolicyCheckpoint;
use crate::selfplay::{train, TrainReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn version() -> String {
    format!(
        "{} {} ({})",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        env!("TABLETOP_GIT_HASH")
    )
}

#[derive(Debug, Parser)]
#[command(name = "tabletop", version, about = "Tabletop game environments and self-play PPO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Self-play PPO training, one run per seed.
    Train(TrainArgs),
    /// Evaluate a checkpoint against baseline agents.
    Eval(EvalArgs),
    /// Play baseline agents against each other.
    Match(MatchArgs),
    /// Print action space and observation layout of a game.
    Inspect(InspectArgs),
}

/// Every key flag takes the raw text and goes through the same parser as
/// the config file.
#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub game: Option<String>,
    #[arg(long)]
    pub players: Option<String>,
    #[arg(long)]
    pub reward_mode: Option<String>,
    /// `N`, `a,b,c` or `a..b`.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub total_steps: Option<String>,
    #[arg(long)]
    pub lr: Option<String>,
    #[arg(long)]
    pub num_envs: Option<String>,
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub pool_size: Option<String>,
    #[arg(long)]
    pub checkpoint_interval: Option<String>,
    #[arg(long)]
    pub resample_interval: Option<String>,
    #[arg(long)]
    pub latest_bias: Option<String>,
    #[arg(long)]
    pub eval_interval: Option<String>,
    #[arg(long)]
    pub eval_episodes: Option<String>,
    #[arg(long)]
    pub mcts_iterations: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Run seeds concurrently, one worker per seed.
    #[arg(long)]
    pub parallel_seeds: bool,
}

impl TrainArgs {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("game", &self.game),
            ("players", &self.players),
            ("reward_mode", &self.reward_mode),
            ("seeds", &self.seeds),
            ("total_steps", &self.total_steps),
            ("lr", &self.lr),
            ("num_envs", &self.num_envs),
            ("horizon", &self.horizon),
            ("pool_size", &self.pool_size),
            ("checkpoint_interval", &self.checkpoint_interval),
            ("resample_interval", &self.resample_interval),
            ("latest_bias", &self.latest_bias),
            ("eval_interval", &self.eval_interval),
            ("eval_episodes", &self.eval_episodes),
            ("mcts_iterations", &self.mcts_iterations),
            ("out", &self.out),
        ]
    }

    /// Config file first, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(CliError::Usage)?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(&canonical_key(key), v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Comma-separated: random, osla, mcts.
    #[arg(long, default_value = "random,osla,mcts")]
    pub opponents: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 128)]
    pub mcts_iterations: u32,
    /// Take the most probable action instead of sampling.
    #[arg(long)]
    pub greedy: bool,
    /// CSV destination; defaults to `<checkpoint>.eval.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub game: String,
    /// One agent per seat, comma-separated.
    #[arg(long)]
    pub agents: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 128)]
    pub mcts_iterations: u32,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub game: String,
    #[arg(long)]
    pub players: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0:#}")]
    Usage(anyhow::Error),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Runtime(e.into())
}

fn usage<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Usage(e.into())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let res = match &cli.command {
        Command::Train(a) => cmd_train(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Match(a) => cmd_match(a, out),
        Command::Inspect(a) => cmd_inspect(a, out),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}"))
}

fn train_seed(cfg: &RunConfig, seed: u64) -> Result<TrainReport, CliError> {
    let mut tc = cfg.train_config(seed)?;
    let dir = seed_dir(&cfg.out, seed);
    fs::create_dir_all(&dir).map_err(runtime)?;
    tc.checkpoint_dir = Some(dir.clone());
    let file = fs::File::create(dir.join("metrics.jsonl")).map_err(runtime)?;
    let mut metrics = BufWriter::new(file);
    train(&tc, &mut metrics).map_err(runtime)
}

/// Table rows pooled over seeds: the last `SUMMARY_WINDOW` eval points of
/// every seed (fewer when a short run has fewer).
pub fn summary_rows(cfg: &RunConfig, reports: &[TrainReport]) -> Vec<SummaryRow> {
    let Some(game) = cfg.game else { return Vec::new() };
    let players = cfg.players.unwrap_or(games::spec(game).min_players);
    let mut rows = Vec::new();
    for opp in &cfg.train.eval_opponents {
        let mut points = Vec::new();
        for r in reports {
            let mine: Vec<&EvalRecord> = r.evals.iter().filter(|e| e.opponent == opp.name()).collect();
            let window = mine.len().min(SUMMARY_WINDOW);
            if window > 0 && summarize(&r.evals, opp.name(), window).is_ok() {
                points.extend(mine[mine.len() - window..].iter().map(|e| e.win_rate));
            }
        }
        if points.is_empty() {
            continue;
        }
        let mean = points.iter().sum::<f64>() / points.len() as f64;
        let var = points.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / points.len() as f64;
        rows.push(SummaryRow {
            game: game.name().into(),
            players,
            reward_mode: cfg.train.reward_mode.name().into(),
            opponent: opp.name().into(),
            win_rate: mean,
            sd: var.sqrt(),
        });
    }
    rows
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    fs::create_dir_all(&cfg.out).map_err(runtime)?;
    let text = format!("# {}\n{}", version(), cfg.to_text());
    fs::write(cfg.out.join("config.txt"), text).map_err(runtime)?;

    let reports: Vec<TrainReport> = if args.parallel_seeds && cfg.seeds.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = cfg
                .seeds
                .iter()
                .map(|&seed| {
                    let cfg = &cfg;
                    s.spawn(move || train_seed(cfg, seed))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(runtime(anyhow::anyhow!("worker panicked")))))
                .collect::<Result<_, _>>()
        })?
    } else {
        cfg.seeds
            .iter()
            .map(|&seed| train_seed(&cfg, seed))
            .collect::<Result<_, _>>()?
    };
    for (seed, r) in cfg.seeds.iter().zip(&reports) {
        writeln!(
            out,
            "seed {seed}: {} steps, {} episodes, {} updates -> {}",
            r.steps,
            r.episodes.len(),
            r.updates,
            seed_dir(&cfg.out, *seed).display()
        )
        .map_err(runtime)?;
    }
    let rows = summary_rows(&cfg, &reports);
    if !rows.is_empty() {
        crate::eval::write_summary_csv(&cfg.out.join("summary.csv"), &rows).map_err(runtime)?;
        for r in &rows {
            writeln!(out, "vs {:<7} win rate {:.3} ({:.3})", r.opponent, r.win_rate, r.sd).map_err(runtime)?;
        }
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opponents = parse_agents(&args.opponents)?;
    if args.episodes == 0 {
        return Err(usage(anyhow::anyhow!("--episodes must be positive")));
    }
    let ck = PolicyCheckpoint::load(&args.checkpoint)
        .with_context(|| format!("loading {}", args.checkpoint.display()))
        .map_err(CliError::Runtime)?;
    let budget = AgentBudget {
        mcts_iterations: args.mcts_iterations.max(1),
        ..Default::default()
    };
    let selection = if args.greedy {
        ActionSelection::Greedy
    } else {
        ActionSelection::Sample
    };
    let mut records = Vec::new();
    for (i, opponent) in opponents.into_iter().enumerate() {
        let settings = EvalSettings {
            game: ck.game,
            players: ck.num_players,
            opponent,
            episodes: args.episodes,
            seed: args.seed.wrapping_add(i as u64),
            budget,
            selection,
        };
        let rec = evaluate(&ck.params, &settings, ck.step).map_err(runtime)?;
        writeln!(out, "{}", serde_json::to_string(&rec).map_err(runtime)?).map_err(runtime)?;
        records.push(rec);
    }
    let path = args.out.clone().unwrap_or_else(|| {
        let mut p = args.checkpoint.clone().into_os_string();
        p.push(".eval.csv");
        PathBuf::from(p)
    });
    let mut w = csv::Writer::from_path(&path).map_err(runtime)?;
    for r in &records {
        w.serialize(r).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    Ok(())
}

fn parse_game(name: &str) -> Result<GameId, CliError> {
    name.parse().map_err(usage)
}

pub fn cmd_match(args: &MatchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let game = parse_game(&args.game)?;
    let agents: Vec<AgentKind> = parse_agents(&args.agents)?;
    games::spec(game).check_players(agents.len()).map_err(usage)?;
    let budget = AgentBudget {
        mcts_iterations: args.mcts_iterations.max(1),
        ..Default::default()
    };
    let rows = run_match(game, &agents, args.episodes, args.seed, budget).map_err(runtime)?;
    writeln!(out, "{} with {} players, {} episodes", game, agents.len(), args.episodes).map_err(runtime)?;
    writeln!(out, "{:<5} {:<7} {:>6} {:>6} {:>6} {:>10}", "seat", "agent", "win", "tie", "loss", "score").map_err(runtime)?;
    for r in rows {
        writeln!(
            out,
            "{:<5} {:<7} {:>6.3} {:>6.3} {:>6.3} {:>10.3}",
            r.slot, r.agent, r.win_rate, r.tie_rate, r.loss_rate, r.mean_score
        )
        .map_err(runtime)?;
    }
    Ok(())
}

pub fn cmd_inspect(args: &InspectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let game = parse_game(&args.game)?;
    let players = args.players.unwrap_or(games::spec(game).min_players);
    let actions = games::action_space_size(game, players).map_err(usage)?;
    let layout = games::observation_layout(game, players).map_err(usage)?;
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(runtime);
    w(out, format!("game: {game}"))?;
    w(out, format!("players: {players}"))?;
    w(out, format!("action_space_size: {actions}"))?;
    w(out, format!("observation_length: {}", layout.total()))?;
    w(out, format!("{:<20} {:>6} {:>6}  meaning", "field", "offset", "len"))?;
    for s in &layout.spans {
        w(out, format!("{:<20} {:>6} {:>6}  {}", s.name, s.offset, s.len, s.meaning))?;
    }
    w(out, "actions:".into())?;
    for (i, name) in games::action_table(game).iter().enumerate() {
        w(out, format!("{i:>4}  {name}"))?;
    }
    Ok(())
}
