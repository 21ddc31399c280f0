//! Oracles shared by the integration tests and the acceptance report.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabletop::games;
use tabletop::nn::Mlp;
use tabletop::ppo::{loss_and_grad, PpoConfig, TrainSample};
use tabletop::{GameError, GameId, GameState};

pub fn configs() -> Vec<(GameId, usize)> {
    GameId::ALL
        .iter()
        .flat_map(|&g| {
            let s = games::spec(g);
            (s.min_players..=s.max_players).map(move |n| (g, n))
        })
        .collect()
}

pub fn ply_bound(game: GameId) -> usize {
    match game {
        GameId::TicTacToe => 9,
        GameId::DotsAndBoxes => 82,
        _ => 2_000,
    }
}

/// One random playout with mask checks. `exhaustive` tries every illegal
/// action at every ply; otherwise one random illegal action per ply.
/// Returns a description of the first violation.
pub fn checked_playout(game: GameId, n: usize, seed: u64, exhaustive: bool) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GameState::reset(game, n, seed).map_err(|e| e.to_string())?;
    let initial = s.census();
    let mut plies = 0;
    let fail = |what: &str, plies: usize| Err(format!("{game} {n}p seed {seed} ply {plies}: {what}"));
    while !s.is_terminal() {
        let mask = s.legal_actions().map_err(|e| e.to_string())?;
        if mask.count() == 0 {
            return fail("empty mask", plies);
        }
        let illegal: Vec<usize> = (0..mask.len()).filter(|&a| !mask.is_legal(a)).collect();
        let probe: Vec<usize> = if exhaustive || illegal.is_empty() {
            illegal
        } else {
            vec![illegal[rng.gen_range(0..illegal.len())]]
        };
        if !probe.is_empty() {
            let before = s.to_bytes();
            for a in probe {
                if s.apply(a) != Err(GameError::IllegalAction { action: a }) {
                    return fail(&format!("illegal action {a} accepted"), plies);
                }
            }
            if before != s.to_bytes() {
                return fail("rejected action changed the state", plies);
            }
        }
        let legal: Vec<_> = mask.legal().collect();
        let a = legal[rng.gen_range(0..legal.len())];
        if let Err(e) = s.apply(a) {
            return fail(&format!("legal action {a} rejected: {e}"), plies);
        }
        plies += 1;
        if plies > ply_bound(game) {
            return fail("playout too long", plies);
        }
        if s.census() != initial {
            return fail("card conservation", plies);
        }
    }
    match s.result() {
        Some(r) if r.num_players() == n => Ok(()),
        _ => fail("terminal state without a full result", plies),
    }
}

pub mod tictactoe {
    use std::collections::{HashMap, HashSet};
    use tabletop::{GameState, Outcome, PlayerId};

    /// Board of 0 empty, 1 first mover, 2 second mover.
    pub type Board = [u8; 9];

    const LINES: [[usize; 3]; 8] = [
        [0, 1, 2], [3, 4, 5], [6, 7, 8], [0, 3, 6], [1, 4, 7], [2, 5, 8], [0, 4, 8], [2, 4, 6],
    ];

    fn winner(b: &Board) -> u8 {
        for l in LINES {
            if b[l[0]] != 0 && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]] {
                return b[l[0]];
            }
        }
        0
    }

    pub fn oracle_terminals(b: &mut Board, mover: u8, out: &mut HashSet<Board>) {
        if winner(b) != 0 || b.iter().all(|&c| c != 0) {
            out.insert(*b);
            return;
        }
        for i in 0..9 {
            if b[i] == 0 {
                b[i] = mover;
                oracle_terminals(b, 3 - mover, out);
                b[i] = 0;
            }
        }
    }

    /// Value for the first mover: +1 win, 0 draw, -1 loss.
    pub fn oracle_minimax(b: &mut Board, mover: u8) -> i32 {
        match winner(b) {
            1 => return 1,
            2 => return -1,
            _ if b.iter().all(|&c| c != 0) => return 0,
            _ => {}
        }
        let mut vals = Vec::new();
        for i in 0..9 {
            if b[i] == 0 {
                b[i] = mover;
                vals.push(oracle_minimax(b, 3 - mover));
                b[i] = 0;
            }
        }
        if mover == 1 { *vals.iter().max().unwrap() } else { *vals.iter().min().unwrap() }
    }

    fn engine_board(s: &GameState, first: PlayerId) -> Board {
        let obs = s.observe(first).values;
        let mut b = [0u8; 9];
        for (c, v) in b.iter_mut().zip(obs) {
            *c = if v > 0.0 { 1 } else if v < 0.0 { 2 } else { 0 };
        }
        b
    }

    pub fn engine_terminals(s: &GameState, first: PlayerId, out: &mut HashSet<Board>) {
        if s.is_terminal() {
            out.insert(engine_board(s, first));
            return;
        }
        for a in s.legal_actions().unwrap().legal() {
            let mut next = s.clone();
            next.apply(a).unwrap();
            engine_terminals(&next, first, out);
        }
    }

    pub fn engine_minimax(s: &GameState, first: PlayerId, memo: &mut HashMap<Board, i32>) -> i32 {
        let key = engine_board(s, first);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = if let Some(r) = s.result() {
            match r.outcome(first) {
                Outcome::Win => 1,
                Outcome::Loss => -1,
                Outcome::Draw => 0,
            }
        } else {
            let me = s.current_player().unwrap();
            let mask = s.legal_actions().unwrap();
            let vals = mask.legal().map(|a| {
                let mut next = s.clone();
                next.apply(a).unwrap();
                engine_minimax(&next, first, memo)
            });
            if me == first { vals.max().unwrap() } else { vals.min().unwrap() }
        };
        memo.insert(key, v);
        v
    }
}

/// Direct sum: A_t = sum_k (gamma*lambda)^k delta_{t+k}, stopping after the
/// first episode end.
pub fn gae_oracle(r: &[f64], v: &[f64], d: &[bool], boot: f64, g: f64, l: f64) -> Vec<f64> {
    let n = r.len();
    let value_after = |t: usize| if t + 1 < n { v[t + 1] } else { boot };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for k in t..n {
                let next = if d[k] { 0.0 } else { value_after(k) };
                sum += w * (r[k] + g * next - v[k]);
                if d[k] {
                    break;
                }
                w *= g * l;
            }
            sum
        })
        .collect()
}

pub fn random_batch(rng: &mut ChaCha8Rng, obs: usize, act: usize, n: usize) -> Vec<TrainSample> {
    (0..n)
        .map(|_| {
            let mut mask: Vec<bool> = (0..act).map(|_| rng.gen_bool(0.7)).collect();
            let action = rng.gen_range(0..act);
            mask[action] = true;
            TrainSample {
                obs: (0..obs).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                mask,
                action,
                old_log_prob: -rng.gen_range(0.1..2.5),
                advantage: rng.gen_range(-2.0..2.0),
                ret: rng.gen_range(-2.0..2.0),
            }
        })
        .collect()
}

/// Norm-wise relative error between analytic and central-difference
/// gradients of the full loss, in double precision.
pub fn gradient_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs = rng.gen_range(1..=8);
    let act = rng.gen_range(2..=6);
    let hidden = rng.gen_range(2..=6);
    let mut net: Mlp<f64> = Mlp::new(obs, act, hidden, &mut rng);
    // larger policy weights so the distribution is far from uniform
    for w in net.layers[2].w.iter_mut() {
        *w = rng.gen_range(-1.0..1.0);
    }
    let batch = random_batch(&mut rng, obs, act, 6);
    let refs: Vec<&TrainSample> = batch.iter().collect();
    let cfg = PpoConfig::default();
    let (_, grad) = loss_and_grad(&net, &refs, &cfg);
    let analytic = grad.flat();
    let base = net.flat();
    let eps = 1e-5;
    let mut num = vec![0.0; base.len()];
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] += eps;
        net.set_flat(&p);
        let up = loss_and_grad(&net, &refs, &cfg).0.loss;
        p[i] -= 2.0 * eps;
        net.set_flat(&p);
        let down = loss_and_grad(&net, &refs, &cfg).0.loss;
        num[i] = (up - down) / (2.0 * eps);
    }
    let diff: f64 = analytic.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = analytic
        .iter()
        .map(|a| a * a)
        .sum::<f64>()
        .sqrt()
        .max(num.iter().map(|a| a * a).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}
