//! Acceptance report: one PASS/FAIL line per criterion, printed straight to
//! stderr so it shows up whether or not the test passes.
//!
//! Criteria 8-11 train three seeds for 10^6 steps each on TicTacToe, Dots
//! and Boxes and Diamant with default settings; expect about a quarter of
//! an hour on one core.

mod common;

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabletop::engine::Outcome;
use tabletop::eval::EvalRecord;
use tabletop::nn::Mlp;
use tabletop::ppo::gae;
use tabletop::rewards::terminal_reward;
use tabletop::selfplay::{train, OpponentPool, TrainConfig, TrainReport};
use tabletop::{Env, GameId, GameResult, GameState, PlayerId, RewardMode};

const SEEDS: [u64; 3] = [0, 1, 2];
/// Eval points per seed pooled into a final number.
const FINAL_POINTS: usize = 20;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(lines: &mut Vec<Line>, id: u32, pass: bool, detail: String, started: Instant) {
    let line = Line { id, pass, detail };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {:>2}: {}  {}  [{:.0}s]",
        line.id,
        if line.pass { "PASS" } else { "FAIL" },
        line.detail,
        started.elapsed().as_secs_f64()
    );
    lines.push(line);
}

fn mask_fuzz() -> (bool, String) {
    let per_game = 100_000u64;
    let mut violations = Vec::new();
    for g in GameId::ALL {
        let cs: Vec<_> = common::configs().into_iter().filter(|c| c.0 == g).collect();
        for k in 0..per_game {
            let (game, n) = cs[k as usize % cs.len()];
            if let Err(e) = common::checked_playout(game, n, k, false) {
                violations.push(e);
            }
        }
    }
    let detail = format!("{per_game} playouts per game, {} violations{}", violations.len(), violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default());
    (violations.is_empty(), detail)
}

fn tictactoe_oracle() -> (bool, String) {
    use common::tictactoe::*;
    let mut oracle = HashSet::new();
    oracle_terminals(&mut [0; 9], 1, &mut oracle);
    let oracle_value = oracle_minimax(&mut [0; 9], 1);
    let s = GameState::reset(GameId::TicTacToe, 2, 0).unwrap();
    let first = s.current_player().unwrap();
    let mut reached = HashSet::new();
    engine_terminals(&s, first, &mut reached);
    let value = engine_minimax(&s, first, &mut HashMap::new());
    let pass = reached == oracle && value == oracle_value && oracle_value == 0;
    (pass, format!("terminal states engine {} / oracle {}, minimax engine {value} / oracle {oracle_value}", reached.len(), oracle.len()))
}

fn gae_check() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..200);
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.1)).collect();
        let boot = rng.gen_range(-1.0..1.0);
        let (g, l) = (rng.gen_range(0.8..1.0), rng.gen_range(0.8..1.0));
        let (adv, _) = gae(&r, &v, &d, boot, g, l).unwrap();
        let oracle = common::gae_oracle(&r, &v, &d, boot, g, l);
        for (a, o) in adv.iter().zip(&oracle) {
            worst = worst.max((a - o).abs());
        }
    }
    (worst < 1e-9, format!("100 sequences, max abs diff {worst:.2e} (< 1e-9)"))
}

fn gradient_check() -> (bool, String) {
    let worst = (0..10).map(common::gradient_error).fold(0.0f64, f64::max);
    (worst < 1e-4, format!("10 nets, max relative error {worst:.2e} (< 1e-4)"))
}

fn reward_cases() -> (bool, String) {
    let win = GameResult::from_scores(vec![3.0, 1.0]);
    let draw = GameResult::from_scores(vec![2.0, 2.0]);
    let unit = terminal_reward(&win, PlayerId(0)) == 1.0
        && terminal_reward(&win, PlayerId(1)) == -1.0
        && terminal_reward(&draw, PlayerId(0)) == 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut episodes = 0;
    let mut mismatches = 0;
    for (game, n) in common::configs() {
        if !tabletop::games::spec(game).has_score {
            continue;
        }
        for seed in 0..200 {
            let mut env = Env::new(game, n, RewardMode::Score, seed).unwrap();
            let mut total = vec![0.0; n];
            loop {
                let legal: Vec<usize> = env.legal_actions().unwrap().legal().collect();
                let st = env.step(legal[rng.gen_range(0..legal.len())]).unwrap();
                if let Some(q) = st.next {
                    total[q.0] += st.reward;
                } else {
                    for (t, r) in total.iter_mut().zip(&st.final_rewards) {
                        *t += r;
                    }
                    if total != st.result.unwrap().scores {
                        mismatches += 1;
                    }
                    break;
                }
            }
            episodes += 1;
        }
    }
    (unit && mismatches == 0, format!("win/loss/draw exact: {unit}; score telescoping exact on {}/{episodes} fuzzed episodes", episodes - mismatches))
}

fn pool_mechanics() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let net: Mlp<f32> = Mlp::new(9, 9, 4, &mut rng);
    let mut pool = OpponentPool::new(10, 0.5);
    for step in (0..=1_000_000u64).step_by(100_000) {
        pool.add(step, net.clone());
    }
    let draws = 10_000;
    let latest = (0..draws).filter(|_| pool.sample(&mut rng) == Some(1_000_000)).count() as f64 / draws as f64;
    let pass = pool.len() == 10 && (latest - 0.5).abs() <= 0.05;
    (pass, format!("size {} after 11 snapshots, latest drawn {latest:.4} (0.5 +- 0.05)", pool.len()))
}

fn determinism() -> (bool, String) {
    let cfg = TrainConfig { total_steps: 10_000, ..TrainConfig::default() };
    let mut a = Vec::new();
    let mut b = Vec::new();
    train(&cfg, &mut a).unwrap();
    train(&cfg, &mut b).unwrap();
    (a == b && !a.is_empty(), format!("two 1e4-step runs, {} metric bytes each, identical: {}", a.len(), a == b))
}

fn train_seeds(game: GameId, mode: RewardMode) -> Vec<TrainReport> {
    SEEDS
        .iter()
        .map(|&seed| {
            let cfg = TrainConfig { game, players: 2, reward_mode: mode, seed, ..TrainConfig::default() };
            train(&cfg, &mut std::io::sink()).unwrap()
        })
        .collect()
}

/// Mean of `metric` over the last eval points of every seed, pooled.
fn pooled(reports: &[TrainReport], opponent: &str, metric: impl Fn(&EvalRecord) -> f64) -> f64 {
    let mut points = Vec::new();
    for r in reports {
        let mine: Vec<&EvalRecord> = r.evals.iter().filter(|e| e.opponent == opponent).collect();
        let k = mine.len().min(FINAL_POINTS);
        points.extend(mine[mine.len() - k..].iter().map(|e| metric(e)));
    }
    points.iter().sum::<f64>() / points.len() as f64
}

fn win(e: &EvalRecord) -> f64 {
    e.win_rate
}

#[test]
fn acceptance_report() {
    let started = Instant::now();
    let mut lines = Vec::new();
    let quick: [(u32, fn() -> (bool, String)); 7] = [
        (1, mask_fuzz),
        (2, tictactoe_oracle),
        (3, gae_check),
        (4, gradient_check),
        (5, reward_cases),
        (6, pool_mechanics),
        (7, determinism),
    ];
    for (id, check) in quick {
        let (pass, detail) = check();
        report(&mut lines, id, pass, detail, started);
    }

    let ttt = train_seeds(GameId::TicTacToe, RewardMode::Terminal);
    let (r, o) = (pooled(&ttt, "random", win), pooled(&ttt, "osla", win));
    let m = pooled(&ttt, "mcts", |e| e.win_rate + e.tie_rate);
    report(
        &mut lines,
        8,
        r >= 0.95 && o >= 0.95 && m >= 0.70,
        format!("TicTacToe win vs random {r:.3} (>= 0.95), vs osla {o:.3} (>= 0.95), win+tie vs mcts {m:.3} (>= 0.70)"),
        started,
    );

    let dab = train_seeds(GameId::DotsAndBoxes, RewardMode::Score);
    let r = pooled(&dab, "random", win);
    report(
        &mut lines,
        9,
        r >= 0.90,
        format!("Dots and Boxes win vs random {r:.3} (>= 0.90); osla {:.3}, mcts {:.3}", pooled(&dab, "osla", win), pooled(&dab, "mcts", win)),
        started,
    );

    let dia = train_seeds(GameId::Diamant, RewardMode::Terminal);
    let o = pooled(&dia, "osla", win);
    report(&mut lines, 10, o >= 0.80, format!("Diamant win vs osla {o:.3} (>= 0.80)"), started);

    let ties: Vec<f64> = ttt.iter().map(|r| r.selfplay.last().and_then(|s| s.tie_rate).unwrap_or(0.0)).collect();
    let tie = ties.iter().sum::<f64>() / ties.len() as f64;
    let total = TrainConfig::default().total_steps;
    let decile = |lo: u64, hi: u64| {
        let s: Vec<f64> = dia
            .iter()
            .flat_map(|r| r.episodes.iter().filter(|e| e.step > lo && e.step <= hi).map(|e| e.score))
            .collect();
        s.iter().sum::<f64>() / s.len() as f64
    };
    let (first, last) = (decile(0, total / 10), decile(total - total / 10, total));
    // context only: the same learners' score against a fixed opponent
    let eval_score = |from_end: bool| {
        let v: Vec<f64> = dia
            .iter()
            .flat_map(|r| {
                let e: Vec<f64> = r.evals.iter().filter(|e| e.opponent == "osla").map(|e| e.mean_score).collect();
                let k = e.len() / 10;
                if from_end { e[e.len() - k..].to_vec() } else { e[..k].to_vec() }
            })
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let draws_seen = ttt.iter().flat_map(|r| &r.episodes).filter(|e| e.outcome == Outcome::Draw).count();
    report(
        &mut lines,
        11,
        tie > 0.6 && last > first,
        format!(
            "TicTacToe final self-play tie rate {tie:.3} (> 0.6; per seed {ties:.3?}, {draws_seen} draws overall); Diamant self-play learner score first decile {first:.2} -> last decile {last:.2} (must increase; eval score vs osla {:.2} -> {:.2})",
            eval_score(false),
            eval_score(true)
        ),
        started,
    );

    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    let _ = writeln!(std::io::stderr(), "acceptance: {}/{} criteria pass", lines.len() - failed.len(), lines.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
