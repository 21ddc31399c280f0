#ifndef TABLETOP_H
#define TABLETOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum TtStatus {
  TT_STATUS_OK = 0,
  TT_STATUS_NULL_POINTER = 1,
  TT_STATUS_INVALID_HANDLE = 2,
  TT_STATUS_INVALID_ARGUMENT = 3,
  TT_STATUS_ILLEGAL_ACTION = 4,
  TT_STATUS_GAME_OVER = 5,
  TT_STATUS_BUFFER_TOO_SMALL = 6,
  TT_STATUS_IO = 7,
  TT_STATUS_DECODE = 8,
  TT_STATUS_BUSY = 9,
  TT_STATUS_PANIC = 10,
} TtStatus;

// What one step produced.
typedef struct TtStepInfo {
  // Player who acted.
  uint32_t actor;
  // Player to act next, -1 when the episode ended.
  int32_t next_player;
  // Reward for `next_player`, or for `actor` when `done`.
  double reward;
  uint8_t done;
} TtStepInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to fit) and returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t tt_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *tt_version(void);

// Action-space size and observation length of `game` with `players`.
//
// # Safety
// `game` must be a NUL-terminated string; the out pointers writable.
enum TtStatus tt_game_info(const char *game,
                           uint32_t players,
                           uint32_t *action_count,
                           uint32_t *obs_len);

// Creates an environment. `reward_mode` may be null for `terminal`.
//
// # Safety
// String arguments NUL-terminated; `handle` writable.
enum TtStatus tt_env_new(const char *game,
                         uint32_t players,
                         const char *reward_mode,
                         uint64_t seed,
                         uint64_t *handle);

enum TtStatus tt_env_free(uint64_t handle);

// Starts a new episode; writes the first player to act.
//
// # Safety
// `player` writable.
enum TtStatus tt_env_reset(uint64_t handle, uint64_t seed, uint32_t *player);

// Player to act, or -1 once the episode is over.
//
// # Safety
// `player` writable.
enum TtStatus tt_env_current_player(uint64_t handle, int32_t *player);

// Sizes of the buffers the other env calls expect.
//
// # Safety
// Out pointers writable.
enum TtStatus tt_env_dims(uint64_t handle,
                          uint32_t *num_players,
                          uint32_t *action_count,
                          uint32_t *obs_len);

// Observation of `player` into `obs[0..obs_len]`.
//
// # Safety
// `obs` must point to `len` writable floats.
enum TtStatus tt_env_observe(uint64_t handle, uint32_t player, float *obs, size_t len);

// Legal-action mask (1 legal, 0 not) of the player to act.
//
// # Safety
// `mask` must point to `len` writable bytes; `count` writable or null.
enum TtStatus tt_env_mask(uint64_t handle, uint8_t *mask, size_t len, uint32_t *count);

// Applies `action` for the player to act. An illegal action leaves the
// environment untouched and returns `TT_STATUS_ILLEGAL_ACTION`.
//
// # Safety
// `info` writable.
enum TtStatus tt_env_step(uint64_t handle, uint32_t action, struct TtStepInfo *info);

// Reward accrued by `player` since it was last handed out.
//
// # Safety
// `reward` writable.
enum TtStatus tt_env_take_reward(uint64_t handle, uint32_t player, double *reward);

// Final scores and outcomes (1 win, 0 draw, -1 loss) per player.
// Fails with `TT_STATUS_INVALID_ARGUMENT` while the game is running.
//
// # Safety
// Both buffers must hold `len` writable elements.
enum TtStatus tt_env_result(uint64_t handle, double *scores, int32_t *outcomes, size_t len);

// Serialized game state. With a null or short buffer only `written`
// (the needed size) is set and `TT_STATUS_BUFFER_TOO_SMALL` returned.
//
// # Safety
// `bytes` null or `len` writable bytes; `written` writable.
enum TtStatus tt_env_state_bytes(uint64_t handle, uint8_t *bytes, size_t len, size_t *written);

// Loads a policy checkpoint file.
//
// # Safety
// `path` NUL-terminated; `handle` writable.
enum TtStatus tt_policy_load(const char *path, uint64_t *handle);

enum TtStatus tt_policy_free(uint64_t handle);

// Checkpoint dimensions and metadata.
//
// # Safety
// Out pointers writable.
enum TtStatus tt_policy_info(uint64_t handle,
                             uint32_t *obs_dim,
                             uint32_t *action_dim,
                             uint32_t *num_players,
                             uint64_t *step);

// Masked action probabilities and state value for one observation.
//
// # Safety
// `obs` holds `obs_len` floats, `mask` and `probs` hold `action_len`
// elements, `value` writable.
enum TtStatus tt_policy_forward(uint64_t handle,
                                const float *obs,
                                size_t obs_len,
                                const uint8_t *mask,
                                size_t action_len,
                                float *probs,
                                float *value);

// Creates `num_envs` environments; environment `i` starts from the
// `i`-th derived seed.
//
// # Safety
// Strings NUL-terminated; `handle` writable.
enum TtStatus tt_vec_new(const char *game,
                         uint32_t players,
                         const char *reward_mode,
                         uint32_t num_envs,
                         uint64_t seed,
                         uint64_t *handle);

enum TtStatus tt_vec_free(uint64_t handle);

// Row-major observations and masks of each environment's player to act,
// plus those players.
//
// # Safety
// `obs` holds `num_envs * obs_len` floats, `masks` `num_envs *
// action_count` bytes, `players` `num_envs` ints.
enum TtStatus tt_vec_observe(uint64_t handle,
                             float *obs,
                             size_t obs_total,
                             uint8_t *masks,
                             size_t mask_total,
                             int32_t *players,
                             size_t players_len);

// Steps every environment with its action. `rewards[i]`/`dones[i]` are
// as in [`TtStepInfo`]; a finished environment is reset before return.
// Nothing is applied if any action is illegal.
//
// # Safety
// `actions` holds `n` values, `rewards` and `dones` `n` writable slots.
enum TtStatus tt_vec_step(uint64_t handle,
                          const uint32_t *actions,
                          size_t n,
                          double *rewards,
                          uint8_t *dones);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TABLETOP_H */
