//! C ABI over the tabletop engine.
//!
//! Objects live in process-wide registries and are addressed by opaque
//! `uint64_t` handles (0 is never a valid handle). Every function returns a
//! [`TtStatus`]; on failure a message is kept per thread and can be read
//! with [`tt_last_error`]. Panics are caught at the boundary and reported
//! as `TT_STATUS_PANIC`.
//!
//! A handle may be used from any thread, but not from two threads at once:
//! a call that finds the object in use returns `TT_STATUS_BUSY`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex, TryLockError};

use tabletop::nn::{CheckpointError, PolicyCheckpoint};
use tabletop::{Env, GameError, GameId, Outcome, PlayerId, RewardMode};
use thiserror::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidHandle = 2,
    InvalidArgument = 3,
    IllegalAction = 4,
    GameOver = 5,
    BufferTooSmall = 6,
    Io = 7,
    Decode = 8,
    Busy = 9,
    Panic = 10,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("null pointer for `{0}`")]
    Null(&'static str),
    #[error("no live object for handle {0}")]
    Handle(u64),
    #[error("{0}")]
    Argument(String),
    #[error("buffer `{name}` holds {got} elements, {need} needed")]
    Buffer {
        name: &'static str,
        need: usize,
        got: usize,
    },
    #[error("handle {0} is in use by another call")]
    Busy(u64),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

impl FfiError {
    fn status(&self) -> TtStatus {
        match self {
            FfiError::Null(_) => TtStatus::NullPointer,
            FfiError::Handle(_) => TtStatus::InvalidHandle,
            FfiError::Argument(_) => TtStatus::InvalidArgument,
            FfiError::Buffer { .. } => TtStatus::BufferTooSmall,
            FfiError::Busy(_) => TtStatus::Busy,
            FfiError::Game(GameError::IllegalAction { .. }) => TtStatus::IllegalAction,
            FfiError::Game(GameError::Terminal) => TtStatus::GameOver,
            FfiError::Game(GameError::Decode(_)) => TtStatus::Decode,
            FfiError::Game(_) => TtStatus::InvalidArgument,
            FfiError::Checkpoint(CheckpointError::Io(_)) => TtStatus::Io,
            FfiError::Checkpoint(CheckpointError::Decode(_)) => TtStatus::Decode,
            FfiError::Checkpoint(_) => TtStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> TtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            TtStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            e.status()
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TtStatus::Panic
        }
    }
}

struct Registry<T> {
    next: AtomicU64,
    items: Mutex<HashMap<u64, Arc<Mutex<T>>>>,
}

impl<T> Registry<T> {
    fn new() -> Self {
        Self {
            next: AtomicU64::new(1),
            items: Mutex::new(HashMap::new()),
        }
    }

    fn insert(&self, value: T) -> u64 {
        let id = self.next.fetch_add(1, Ordering::Relaxed);
        self.lock().insert(id, Arc::new(Mutex::new(value)));
        id
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<u64, Arc<Mutex<T>>>> {
        self.items.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn remove(&self, id: u64) -> Result<(), FfiError> {
        self.lock().remove(&id).map(|_| ()).ok_or(FfiError::Handle(id))
    }

    fn with<R>(&self, id: u64, f: impl FnOnce(&mut T) -> Result<R, FfiError>) -> Result<R, FfiError> {
        let item = self.lock().get(&id).cloned().ok_or(FfiError::Handle(id))?;
        let mut guard = match item.try_lock() {
            Ok(g) => g,
            Err(TryLockError::WouldBlock) => return Err(FfiError::Busy(id)),
            Err(TryLockError::Poisoned(p)) => p.into_inner(),
        };
        f(&mut guard)
    }
}

static ENVS: LazyLock<Registry<Env>> = LazyLock::new(Registry::new);
static POLICIES: LazyLock<Registry<PolicyCheckpoint>> = LazyLock::new(Registry::new);
static VEC_ENVS: LazyLock<Registry<VecEnv>> = LazyLock::new(Registry::new);

fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, FfiError> {
    // SAFETY: caller passes a valid, aligned, writable pointer or null.
    unsafe { p.as_mut() }.ok_or(FfiError::Null(name))
}

fn text<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    // SAFETY: non-null and documented as a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| FfiError::Argument(format!("`{name}` is not UTF-8")))
}

fn buf_mut<'a, T>(p: *mut T, len: usize, need: usize, name: &'static str) -> Result<&'a mut [T], FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    if len < need {
        return Err(FfiError::Buffer { name, need, got: len });
    }
    // SAFETY: non-null and the caller guarantees `len` writable elements.
    Ok(unsafe { slice::from_raw_parts_mut(p, need) })
}

fn buf<'a, T>(p: *const T, len: usize, need: usize, name: &'static str) -> Result<&'a [T], FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    if len < need {
        return Err(FfiError::Buffer { name, need, got: len });
    }
    // SAFETY: non-null and the caller guarantees `len` readable elements.
    Ok(unsafe { slice::from_raw_parts(p, need) })
}

fn parse_game(p: *const c_char) -> Result<GameId, FfiError> {
    Ok(text(p, "game")?.parse::<GameId>()?)
}

fn parse_mode(p: *const c_char) -> Result<RewardMode, FfiError> {
    if p.is_null() {
        return Ok(RewardMode::Terminal);
    }
    text(p, "reward_mode")?.parse().map_err(FfiError::Argument)
}

fn player_code(p: Result<PlayerId, GameError>) -> i32 {
    p.map_or(-1, |p| p.0 as i32)
}

fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Win => 1,
        Outcome::Draw => 0,
        Outcome::Loss => -1,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to fit) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Action-space size and observation length of `game` with `players`.
///
/// # Safety
/// `game` must be a NUL-terminated string; the out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn tt_game_info(
    game: *const c_char,
    players: u32,
    action_count: *mut u32,
    obs_len: *mut u32,
) -> TtStatus {
    guard(|| {
        let g = parse_game(game)?;
        let spec = tabletop::games::spec(g);
        spec.check_players(players as usize)?;
        *out(action_count, "action_count")? = spec.action_count as u32;
        *out(obs_len, "obs_len")? = spec.observation_len(players as usize) as u32;
        Ok(())
    })
}

/// Creates an environment. `reward_mode` may be null for `terminal`.
///
/// # Safety
/// String arguments NUL-terminated; `handle` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_new(
    game: *const c_char,
    players: u32,
    reward_mode: *const c_char,
    seed: u64,
    handle: *mut u64,
) -> TtStatus {
    guard(|| {
        let slot = out(handle, "handle")?;
        let env = Env::new(parse_game(game)?, players as usize, parse_mode(reward_mode)?, seed)?;
        *slot = ENVS.insert(env);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tt_env_free(handle: u64) -> TtStatus {
    guard(|| ENVS.remove(handle))
}

/// Starts a new episode; writes the first player to act.
///
/// # Safety
/// `player` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_reset(handle: u64, seed: u64, player: *mut u32) -> TtStatus {
    guard(|| {
        let slot = out(player, "player")?;
        ENVS.with(handle, |env| {
            *slot = env.reset(seed).0 as u32;
            Ok(())
        })
    })
}

/// Player to act, or -1 once the episode is over.
///
/// # Safety
/// `player` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_current_player(handle: u64, player: *mut i32) -> TtStatus {
    guard(|| {
        let slot = out(player, "player")?;
        ENVS.with(handle, |env| {
            *slot = player_code(env.current_player());
            Ok(())
        })
    })
}

/// Sizes of the buffers the other env calls expect.
///
/// # Safety
/// Out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_dims(
    handle: u64,
    num_players: *mut u32,
    action_count: *mut u32,
    obs_len: *mut u32,
) -> TtStatus {
    guard(|| {
        ENVS.with(handle, |env| {
            let s = env.state();
            *out(num_players, "num_players")? = s.num_players() as u32;
            *out(action_count, "action_count")? = s.action_count() as u32;
            *out(obs_len, "obs_len")? = s.observation_len() as u32;
            Ok(())
        })
    })
}

/// Observation of `player` into `obs[0..obs_len]`.
///
/// # Safety
/// `obs` must point to `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn tt_env_observe(handle: u64, player: u32, obs: *mut f32, len: usize) -> TtStatus {
    guard(|| {
        ENVS.with(handle, |env| {
            let s = env.state();
            if player as usize >= s.num_players() {
                return Err(GameError::BadPlayer(PlayerId(player as usize)).into());
            }
            let dst = buf_mut(obs, len, s.observation_len(), "obs")?;
            s.observe_into(PlayerId(player as usize), dst);
            Ok(())
        })
    })
}

/// Legal-action mask (1 legal, 0 not) of the player to act.
///
/// # Safety
/// `mask` must point to `len` writable bytes; `count` writable or null.
#[no_mangle]
pub unsafe extern "C" fn tt_env_mask(handle: u64, mask: *mut u8, len: usize, count: *mut u32) -> TtStatus {
    guard(|| {
        ENVS.with(handle, |env| {
            let m = env.legal_actions()?;
            let dst = buf_mut(mask, len, m.len(), "mask")?;
            for (d, &b) in dst.iter_mut().zip(m.as_slice()) {
                *d = b as u8;
            }
            if let Some(c) = count.as_mut() {
                *c = m.count() as u32;
            }
            Ok(())
        })
    })
}

/// What one step produced.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TtStepInfo {
    /// Player who acted.
    pub actor: u32,
    /// Player to act next, -1 when the episode ended.
    pub next_player: i32,
    /// Reward for `next_player`, or for `actor` when `done`.
    pub reward: f64,
    pub done: u8,
}

/// Applies `action` for the player to act. An illegal action leaves the
/// environment untouched and returns `TT_STATUS_ILLEGAL_ACTION`.
///
/// # Safety
/// `info` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_step(handle: u64, action: u32, info: *mut TtStepInfo) -> TtStatus {
    guard(|| {
        let slot = out(info, "info")?;
        ENVS.with(handle, |env| {
            let st = env.step(action as usize)?;
            *slot = TtStepInfo {
                actor: st.actor.0 as u32,
                next_player: st.next.map_or(-1, |p| p.0 as i32),
                reward: st.reward,
                done: st.done() as u8,
            };
            Ok(())
        })
    })
}

/// Reward accrued by `player` since it was last handed out.
///
/// # Safety
/// `reward` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_take_reward(handle: u64, player: u32, reward: *mut f64) -> TtStatus {
    guard(|| {
        let slot = out(reward, "reward")?;
        ENVS.with(handle, |env| {
            if player as usize >= env.num_players() {
                return Err(GameError::BadPlayer(PlayerId(player as usize)).into());
            }
            *slot = env.take_reward(PlayerId(player as usize))?;
            Ok(())
        })
    })
}

/// Final scores and outcomes (1 win, 0 draw, -1 loss) per player.
/// Fails with `TT_STATUS_INVALID_ARGUMENT` while the game is running.
///
/// # Safety
/// Both buffers must hold `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn tt_env_result(handle: u64, scores: *mut f64, outcomes: *mut i32, len: usize) -> TtStatus {
    guard(|| {
        ENVS.with(handle, |env| {
            let r = env.state().result().ok_or(GameError::NotTerminal)?;
            let n = r.num_players();
            let s = buf_mut(scores, len, n, "scores")?;
            s.copy_from_slice(&r.scores);
            let o = buf_mut(outcomes, len, n, "outcomes")?;
            for (p, slot) in o.iter_mut().enumerate() {
                *slot = outcome_code(r.outcome(PlayerId(p)));
            }
            Ok(())
        })
    })
}

/// Serialized game state. With a null or short buffer only `written`
/// (the needed size) is set and `TT_STATUS_BUFFER_TOO_SMALL` returned.
///
/// # Safety
/// `bytes` null or `len` writable bytes; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_env_state_bytes(handle: u64, bytes: *mut u8, len: usize, written: *mut usize) -> TtStatus {
    guard(|| {
        let w = out(written, "written")?;
        ENVS.with(handle, |env| {
            let blob = env.state().to_bytes();
            *w = blob.len();
            buf_mut(bytes, if bytes.is_null() { 0 } else { len }, blob.len(), "bytes")
                .map_err(|e| match e {
                    FfiError::Null(_) => FfiError::Buffer {
                        name: "bytes",
                        need: blob.len(),
                        got: 0,
                    },
                    e => e,
                })?
                .copy_from_slice(&blob);
            Ok(())
        })
    })
}

/// Loads a policy checkpoint file.
///
/// # Safety
/// `path` NUL-terminated; `handle` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_policy_load(path: *const c_char, handle: *mut u64) -> TtStatus {
    guard(|| {
        let slot = out(handle, "handle")?;
        let ck = PolicyCheckpoint::load(Path::new(text(path, "path")?))?;
        *slot = POLICIES.insert(ck);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tt_policy_free(handle: u64) -> TtStatus {
    guard(|| POLICIES.remove(handle))
}

/// Checkpoint dimensions and metadata.
///
/// # Safety
/// Out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn tt_policy_info(
    handle: u64,
    obs_dim: *mut u32,
    action_dim: *mut u32,
    num_players: *mut u32,
    step: *mut u64,
) -> TtStatus {
    guard(|| {
        POLICIES.with(handle, |ck| {
            *out(obs_dim, "obs_dim")? = ck.obs_dim() as u32;
            *out(action_dim, "action_dim")? = ck.action_dim() as u32;
            *out(num_players, "num_players")? = ck.num_players as u32;
            *out(step, "step")? = ck.step;
            Ok(())
        })
    })
}

/// Masked action probabilities and state value for one observation.
///
/// # Safety
/// `obs` holds `obs_len` floats, `mask` and `probs` hold `action_len`
/// elements, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_policy_forward(
    handle: u64,
    obs: *const f32,
    obs_len: usize,
    mask: *const u8,
    action_len: usize,
    probs: *mut f32,
    value: *mut f32,
) -> TtStatus {
    guard(|| {
        POLICIES.with(handle, |ck| {
            let (od, ad) = (ck.obs_dim(), ck.action_dim());
            if obs_len != od || action_len != ad {
                return Err(FfiError::Argument(format!(
                    "policy expects obs {od} and {ad} actions, got {obs_len} and {action_len}"
                )));
            }
            let o = buf(obs, obs_len, od, "obs")?;
            let m: Vec<bool> = buf(mask, action_len, ad, "mask")?.iter().map(|&b| b != 0).collect();
            if !m.iter().any(|&b| b) {
                return Err(FfiError::Argument("mask has no legal action".into()));
            }
            let res = ck.params.forward(o, &m);
            buf_mut(probs, action_len, ad, "probs")?.copy_from_slice(&res.probs);
            *out(value, "value")? = res.value;
            Ok(())
        })
    })
}

/// Batch of environments stepped together; finished episodes restart
/// automatically from seeds drawn off the batch seed.
pub struct VecEnv {
    envs: Vec<Env>,
    seed: u64,
    resets: u64,
}

impl VecEnv {
    fn next_seed(&mut self) -> u64 {
        self.resets += 1;
        // splitmix64 over (seed, reset count)
        let mut z = self.seed.wrapping_add(self.resets.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Creates `num_envs` environments; environment `i` starts from the
/// `i`-th derived seed.
///
/// # Safety
/// Strings NUL-terminated; `handle` writable.
#[no_mangle]
pub unsafe extern "C" fn tt_vec_new(
    game: *const c_char,
    players: u32,
    reward_mode: *const c_char,
    num_envs: u32,
    seed: u64,
    handle: *mut u64,
) -> TtStatus {
    guard(|| {
        let slot = out(handle, "handle")?;
        if num_envs == 0 {
            return Err(FfiError::Argument("num_envs must be positive".into()));
        }
        let (g, mode) = (parse_game(game)?, parse_mode(reward_mode)?);
        let mut v = VecEnv {
            envs: Vec::new(),
            seed,
            resets: 0,
        };
        for _ in 0..num_envs {
            let s = v.next_seed();
            v.envs.push(Env::new(g, players as usize, mode, s)?);
        }
        *slot = VEC_ENVS.insert(v);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tt_vec_free(handle: u64) -> TtStatus {
    guard(|| VEC_ENVS.remove(handle))
}

/// Row-major observations and masks of each environment's player to act,
/// plus those players.
///
/// # Safety
/// `obs` holds `num_envs * obs_len` floats, `masks` `num_envs *
/// action_count` bytes, `players` `num_envs` ints.
#[no_mangle]
pub unsafe extern "C" fn tt_vec_observe(
    handle: u64,
    obs: *mut f32,
    obs_total: usize,
    masks: *mut u8,
    mask_total: usize,
    players: *mut i32,
    players_len: usize,
) -> TtStatus {
    guard(|| {
        VEC_ENVS.with(handle, |v| {
            let n = v.envs.len();
            let (ol, al) = (v.envs[0].state().observation_len(), v.envs[0].state().action_count());
            let o = buf_mut(obs, obs_total, n * ol, "obs")?;
            let m = buf_mut(masks, mask_total, n * al, "masks")?;
            let p = buf_mut(players, players_len, n, "players")?;
            for (i, env) in v.envs.iter().enumerate() {
                let me = env.current_player()?;
                env.state().observe_into(me, &mut o[i * ol..(i + 1) * ol]);
                for (d, &b) in m[i * al..(i + 1) * al].iter_mut().zip(env.legal_actions()?.as_slice()) {
                    *d = b as u8;
                }
                p[i] = me.0 as i32;
            }
            Ok(())
        })
    })
}

/// Steps every environment with its action. `rewards[i]`/`dones[i]` are
/// as in [`TtStepInfo`]; a finished environment is reset before return.
/// Nothing is applied if any action is illegal.
///
/// # Safety
/// `actions` holds `n` values, `rewards` and `dones` `n` writable slots.
#[no_mangle]
pub unsafe extern "C" fn tt_vec_step(
    handle: u64,
    actions: *const u32,
    n: usize,
    rewards: *mut f64,
    dones: *mut u8,
) -> TtStatus {
    guard(|| {
        VEC_ENVS.with(handle, |v| {
            let k = v.envs.len();
            let a = buf(actions, n, k, "actions")?;
            let r = buf_mut(rewards, n, k, "rewards")?;
            let d = buf_mut(dones, n, k, "dones")?;
            for (env, &act) in v.envs.iter().zip(a) {
                if !env.state().is_legal(act as usize) {
                    return Err(GameError::IllegalAction { action: act as usize }.into());
                }
            }
            for i in 0..k {
                let st = v.envs[i].step(a[i] as usize)?;
                r[i] = st.reward;
                d[i] = st.done() as u8;
                if st.done() {
                    let s = v.next_seed();
                    v.envs[i].reset(s);
                }
            }
            Ok(())
        })
    })
}
