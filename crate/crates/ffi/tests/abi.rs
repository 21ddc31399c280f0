use std::ffi::{c_char, CStr, CString};
use std::process::Command;
use std::ptr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabletop::nn::{Mlp, PolicyCheckpoint};
use tabletop::{Env, GameId, PlayerId, RewardMode};
use tabletop_ffi::*;

fn last_error() -> String {
    let mut b = [0 as c_char; 512];
    unsafe { tt_last_error(b.as_mut_ptr(), b.len()) };
    unsafe { CStr::from_ptr(b.as_ptr()) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn new_env(game: &str, players: u32, mode: &str, seed: u64) -> u64 {
    let (g, m) = (cstr(game), cstr(mode));
    let mut h = 0;
    let st = unsafe { tt_env_new(g.as_ptr(), players, m.as_ptr(), seed, &mut h) };
    assert_eq!(st, TtStatus::Ok, "{}", last_error());
    h
}

#[test]
fn scripted_episodes_match_the_native_engine() {
    let configs = [
        ("tictactoe", GameId::TicTacToe, 2, RewardMode::Terminal),
        ("loveletter", GameId::LoveLetter, 3, RewardMode::Ordinal),
        ("dotsandboxes", GameId::DotsAndBoxes, 2, RewardMode::Score),
        ("diamant", GameId::Diamant, 4, RewardMode::Leader),
        ("sushigo", GameId::SushiGo, 3, RewardMode::Score),
        ("explodingkittens", GameId::ExplodingKittens, 3, RewardMode::Terminal),
    ];
    for (name, game, n, mode) in configs {
        let h = new_env(name, n as u32, mode.name(), 11);
        let mut native = Env::new(game, n, mode, 11).unwrap();
        let (mut players, mut actions, mut obs_len) = (0, 0, 0);
        unsafe { tt_env_dims(h, &mut players, &mut actions, &mut obs_len) };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ep in 0..20u64 {
            let mut first = 0;
            unsafe { tt_env_reset(h, ep, &mut first) };
            assert_eq!(PlayerId(first as usize), native.reset(ep));
            loop {
                let mut me = 0;
                unsafe { tt_env_current_player(h, &mut me) };
                let Ok(p) = native.current_player() else {
                    assert_eq!(me, -1);
                    break;
                };
                assert_eq!(me, p.0 as i32);
                let mut obs = vec![0f32; obs_len as usize];
                let mut mask = vec![0u8; actions as usize];
                let mut count = 0;
                unsafe {
                    assert_eq!(tt_env_observe(h, me as u32, obs.as_mut_ptr(), obs.len()), TtStatus::Ok);
                    assert_eq!(tt_env_mask(h, mask.as_mut_ptr(), mask.len(), &mut count), TtStatus::Ok);
                }
                let want_obs = native.observe(p).values;
                assert_eq!(
                    obs.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                    want_obs.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
                );
                let legal: Vec<usize> = native.legal_actions().unwrap().legal().collect();
                assert_eq!(count as usize, legal.len());
                assert!(legal.iter().all(|&a| mask[a] == 1));
                let a = legal[rng.gen_range(0..legal.len())];
                let mut info = TtStepInfo::default();
                assert_eq!(unsafe { tt_env_step(h, a as u32, &mut info) }, TtStatus::Ok);
                let st = native.step(a).unwrap();
                assert_eq!(info.reward.to_bits(), st.reward.to_bits());
                assert_eq!(info.done != 0, st.done());
                assert_eq!(info.next_player, st.next.map_or(-1, |q| q.0 as i32));
            }
            let mut scores = vec![0.0; n];
            let mut outcomes = vec![0; n];
            assert_eq!(
                unsafe { tt_env_result(h, scores.as_mut_ptr(), outcomes.as_mut_ptr(), n) },
                TtStatus::Ok
            );
            assert_eq!(scores, native.state().result().unwrap().scores);
        }
        let mut len = 0;
        assert_eq!(
            unsafe { tt_env_state_bytes(h, ptr::null_mut(), 0, &mut len) },
            TtStatus::BufferTooSmall
        );
        let mut blob = vec![0u8; len];
        assert_eq!(unsafe { tt_env_state_bytes(h, blob.as_mut_ptr(), len, &mut len) }, TtStatus::Ok);
        assert_eq!(blob, native.state().to_bytes());
        assert_eq!(tt_env_free(h), TtStatus::Ok);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = 0;
    let g = cstr("tictactoe");
    let bad = cstr("chess");
    unsafe {
        assert_eq!(tt_env_new(bad.as_ptr(), 2, ptr::null(), 0, &mut h), TtStatus::InvalidArgument);
        assert!(last_error().contains("chess"));
        assert_eq!(tt_env_new(g.as_ptr(), 3, ptr::null(), 0, &mut h), TtStatus::InvalidArgument);
        let score = cstr("score");
        assert_eq!(tt_env_new(g.as_ptr(), 2, score.as_ptr(), 0, &mut h), TtStatus::InvalidArgument);
        assert_eq!(tt_env_new(ptr::null(), 2, ptr::null(), 0, &mut h), TtStatus::NullPointer);
        assert_eq!(tt_env_new(g.as_ptr(), 2, ptr::null(), 0, ptr::null_mut()), TtStatus::NullPointer);
    }
    let h = new_env("tictactoe", 2, "terminal", 3);
    let mut info = TtStepInfo::default();
    unsafe {
        assert_eq!(tt_env_step(h, 4, &mut info), TtStatus::Ok);
        let mut len = 0;
        tt_env_state_bytes(h, ptr::null_mut(), 0, &mut len);
        let mut before = vec![0u8; len];
        tt_env_state_bytes(h, before.as_mut_ptr(), len, &mut len);
        assert_eq!(tt_env_step(h, 4, &mut info), TtStatus::IllegalAction);
        assert_eq!(tt_env_step(h, 99, &mut info), TtStatus::IllegalAction);
        let mut after = vec![0u8; len];
        tt_env_state_bytes(h, after.as_mut_ptr(), len, &mut len);
        assert_eq!(before, after);
        let mut small = [0f32; 3];
        assert_eq!(tt_env_observe(h, 0, small.as_mut_ptr(), 3), TtStatus::BufferTooSmall);
        let mut obs = [0f32; 9];
        assert_eq!(tt_env_observe(h, 5, obs.as_mut_ptr(), 9), TtStatus::InvalidArgument);
        let mut s = [0.0; 2];
        let mut o = [0; 2];
        assert_eq!(tt_env_result(h, s.as_mut_ptr(), o.as_mut_ptr(), 2), TtStatus::InvalidArgument);
    }
    assert_eq!(tt_env_free(h), TtStatus::Ok);
    assert_eq!(tt_env_free(h), TtStatus::InvalidHandle);
    assert_eq!(tt_env_free(0), TtStatus::InvalidHandle);
    assert!(!unsafe { CStr::from_ptr(tt_version()) }.to_bytes().is_empty());
}

#[test]
fn policy_forward_matches_native() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ck = PolicyCheckpoint {
        game: GameId::LoveLetter,
        num_players: 2,
        step: 1234,
        seed: 9,
        params: Mlp::new(18, 68, 64, &mut rng),
    };
    let path = dir.path().join(ck.file_name());
    ck.save(&path).unwrap();
    let p = cstr(path.to_str().unwrap());
    let mut h = 0;
    assert_eq!(unsafe { tt_policy_load(p.as_ptr(), &mut h) }, TtStatus::Ok);
    let (mut od, mut ad, mut np, mut step) = (0, 0, 0, 0);
    unsafe { tt_policy_info(h, &mut od, &mut ad, &mut np, &mut step) };
    assert_eq!((od, ad, np, step), (18, 68, 2, 1234));
    let mut env = Env::new(GameId::LoveLetter, 2, RewardMode::Terminal, 4).unwrap();
    let mut worst = 0f32;
    for _ in 0..200 {
        let Ok(me) = env.current_player() else {
            env.reset(rng.gen());
            continue;
        };
        let obs = env.observe(me).values;
        let mask = env.legal_actions().unwrap();
        let bytes: Vec<u8> = mask.as_slice().iter().map(|&b| b as u8).collect();
        let mut probs = vec![0f32; 68];
        let mut value = 0f32;
        let st = unsafe {
            tt_policy_forward(h, obs.as_ptr(), 18, bytes.as_ptr(), 68, probs.as_mut_ptr(), &mut value)
        };
        assert_eq!(st, TtStatus::Ok, "{}", last_error());
        let want = ck.params.forward(&obs, mask.as_slice());
        for (a, b) in probs.iter().zip(&want.probs) {
            worst = worst.max((a - b).abs());
        }
        worst = worst.max((value - want.value).abs());
        let legal: Vec<usize> = mask.legal().collect();
        env.step(legal[rng.gen_range(0..legal.len())]).unwrap();
    }
    assert!(worst < 1e-6, "max abs diff {worst}");
    let mut probs = vec![0f32; 68];
    let mut value = 0f32;
    let zeros = [0u8; 68];
    let obs = [0f32; 18];
    assert_eq!(
        unsafe { tt_policy_forward(h, obs.as_ptr(), 18, zeros.as_ptr(), 68, probs.as_mut_ptr(), &mut value) },
        TtStatus::InvalidArgument
    );
    assert_eq!(tt_policy_free(h), TtStatus::Ok);
    let missing = cstr(dir.path().join("none.ptck").to_str().unwrap());
    assert_eq!(unsafe { tt_policy_load(missing.as_ptr(), &mut h) }, TtStatus::Io);
    std::fs::write(dir.path().join("junk.ptck"), b"not a checkpoint").unwrap();
    let junk = cstr(dir.path().join("junk.ptck").to_str().unwrap());
    assert_eq!(unsafe { tt_policy_load(junk.as_ptr(), &mut h) }, TtStatus::Decode);
}

#[test]
fn vector_env_steps_and_autoresets() {
    let (g, m) = (cstr("tictactoe"), cstr("terminal"));
    let mut h = 0;
    assert_eq!(unsafe { tt_vec_new(g.as_ptr(), 2, m.as_ptr(), 4, 1, &mut h) }, TtStatus::Ok);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut obs = vec![0f32; 4 * 9];
    let mut masks = vec![0u8; 4 * 9];
    let mut players = vec![0i32; 4];
    let mut rewards = vec![0.0; 4];
    let mut dones = vec![0u8; 4];
    let mut finished = 0;
    for _ in 0..200 {
        unsafe {
            tt_vec_observe(h, obs.as_mut_ptr(), obs.len(), masks.as_mut_ptr(), masks.len(), players.as_mut_ptr(), 4)
        };
        let acts: Vec<u32> = (0..4)
            .map(|i| {
                let legal: Vec<u32> = (0..9).filter(|&a| masks[i * 9 + a as usize] == 1).collect();
                legal[rng.gen_range(0..legal.len())]
            })
            .collect();
        let st = unsafe { tt_vec_step(h, acts.as_ptr(), 4, rewards.as_mut_ptr(), dones.as_mut_ptr()) };
        assert_eq!(st, TtStatus::Ok, "{}", last_error());
        for i in 0..4 {
            if dones[i] == 1 {
                finished += 1;
                assert!([1.0, -1.0, 0.5].contains(&rewards[i]));
            }
        }
        assert!(players.iter().all(|&p| p == 0 || p == 1));
    }
    assert!(finished > 50);
    // an illegal action anywhere applies nothing
    unsafe {
        tt_vec_observe(h, obs.as_mut_ptr(), obs.len(), masks.as_mut_ptr(), masks.len(), players.as_mut_ptr(), 4)
    };
    let occupied = (0..9).find(|&a| masks[a] == 0);
    if let Some(bad) = occupied {
        let before = obs.clone();
        let acts = [bad as u32, 0, 0, 0];
        assert_eq!(
            unsafe { tt_vec_step(h, acts.as_ptr(), 4, rewards.as_mut_ptr(), dones.as_mut_ptr()) },
            TtStatus::IllegalAction
        );
        unsafe {
            tt_vec_observe(h, obs.as_mut_ptr(), obs.len(), masks.as_mut_ptr(), masks.len(), players.as_mut_ptr(), 4)
        };
        assert_eq!(obs, before);
    }
    assert_eq!(tt_vec_free(h), TtStatus::Ok);
}

/// Compiles the C smoke program against the generated header and the
/// static library.
#[test]
fn c_program_builds_and_runs() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().unwrap().parent().unwrap();
    let lib = target.join("libtabletop_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("plies "));
}
