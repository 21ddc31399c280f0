//! Randomized playouts over every game and player count.

mod common;

use common::{checked_playout, configs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabletop::games::{self, CardMultiset};
use tabletop::{GameId, GameState, PlayerId};

const PLAYOUTS: u64 = 200;

#[test]
fn masks_are_sound_and_playouts_terminate() {
    for (game, n) in configs() {
        for seed in 0..PLAYOUTS {
            checked_playout(game, n, seed, true).unwrap();
        }
    }
}

#[test]
fn dots_and_boxes_boxes_sum_to_35() {
    for n in 2..=4 {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = GameState::reset(GameId::DotsAndBoxes, n, seed).unwrap();
            while !s.is_terminal() {
                let legal: Vec<_> = s.legal_actions().unwrap().legal().collect();
                s.apply(legal[rng.gen_range(0..legal.len())]).unwrap();
            }
            assert_eq!(s.scores().iter().sum::<f64>(), 35.0);
        }
    }
}

#[test]
fn serialization_roundtrips_and_is_deterministic() {
    for (game, n) in configs() {
        for seed in 0..20 {
            let mut a = GameState::reset(game, n, seed).unwrap();
            let mut b = GameState::reset(game, n, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while !a.is_terminal() {
                assert_eq!(a.to_bytes(), b.to_bytes());
                let decoded = GameState::from_bytes(&a.to_bytes()).unwrap();
                assert_eq!(decoded, a, "{game} {n}p");
                let legal: Vec<_> = a.legal_actions().unwrap().legal().collect();
                let act = legal[rng.gen_range(0..legal.len())];
                a.apply(act).unwrap();
                b.apply(act).unwrap();
            }
            assert_eq!(a.to_bytes(), b.to_bytes());
        }
    }
}

#[test]
fn redeterminization_preserves_observer_view_and_cards() {
    for (game, n) in configs() {
        for seed in 0..20 {
            let mut s = GameState::reset(game, n, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while !s.is_terminal() {
                let p = PlayerId(rng.gen_range(0..n));
                let view = s.observe(p);
                let d = s.redeterminize(p, rng.gen());
                assert_eq!(d.observe(p), view, "{game} {n}p seed {seed}");
                assert_eq!(d.census(), s.census());
                assert_eq!(d.current_player(), s.current_player());
                let me = s.current_player().unwrap();
                let d = s.redeterminize(me, rng.gen());
                assert_eq!(d.legal_actions(), s.legal_actions(), "{game} {n}p mask view");
                let legal: Vec<_> = s.legal_actions().unwrap().legal().collect();
                s.apply(legal[rng.gen_range(0..legal.len())]).unwrap();
            }
        }
    }
}

#[test]
fn perfect_information_redeterminization_is_identity() {
    let s = GameState::reset(GameId::TicTacToe, 2, 3).unwrap();
    let d = s.redeterminize(PlayerId(0), 99);
    assert_eq!(d.observe(PlayerId(1)), s.observe(PlayerId(1)));
    assert_eq!(d.legal_actions(), s.legal_actions());
}

#[test]
fn clones_are_independent() {
    for (game, n) in configs() {
        let s = GameState::reset(game, n, 7).unwrap();
        let before = s.to_bytes();
        let mut c = s.clone();
        let a = c.legal_actions().unwrap().legal().next().unwrap();
        c.apply(a).unwrap();
        assert_eq!(s.to_bytes(), before);
    }
}

#[test]
fn census_matches_initial_composition() {
    let ll = GameState::reset(GameId::LoveLetter, 2, 0).unwrap();
    let counts: Vec<u32> = games::love_letter::COMPOSITION.iter().map(|&c| c as u32).collect();
    assert_eq!(ll.census(), Some(CardMultiset::from_counts(counts)));
    assert_eq!(GameState::reset(GameId::SushiGo, 4, 0).unwrap().census().unwrap().total(), 108);
}
