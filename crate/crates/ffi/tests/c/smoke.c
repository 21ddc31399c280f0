#include <stdio.h>
#include <string.h>
#include "tabletop.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    TtStatus s_ = (call);                                                  \
    if (s_ != TT_STATUS_OK) {                                              \
      char msg[256];                                                       \
      tt_last_error(msg, sizeof msg);                                      \
      fprintf(stderr, "%s failed: %d %s\n", #call, (int)s_, msg);          \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  uint32_t actions = 0, obs_len = 0, players = 0, first = 0;
  CHECK(tt_game_info("dotsandboxes", 2, &actions, &obs_len));
  if (actions != 82 || obs_len != 82) return 2;

  uint64_t env = 0;
  CHECK(tt_env_new("tictactoe", 2, "terminal", 7, &env));
  CHECK(tt_env_dims(env, &players, &actions, &obs_len));
  CHECK(tt_env_reset(env, 7, &first));

  uint8_t mask[9];
  float obs[9];
  TtStepInfo info;
  memset(&info, 0, sizeof info);
  int plies = 0;
  while (!info.done) {
    uint32_t count = 0;
    int32_t me = -1;
    CHECK(tt_env_current_player(env, &me));
    CHECK(tt_env_observe(env, (uint32_t)me, obs, 9));
    CHECK(tt_env_mask(env, mask, 9, &count));
    uint32_t a = 0;
    while (!mask[a]) a++;
    CHECK(tt_env_step(env, a, &info));
    plies++;
  }
  double scores[2];
  int32_t outcomes[2];
  CHECK(tt_env_result(env, scores, outcomes, 2));
  if (tt_env_step(env, 0, &info) != TT_STATUS_GAME_OVER) return 3;
  CHECK(tt_env_free(env));
  if (tt_env_free(env) != TT_STATUS_INVALID_HANDLE) return 4;
  printf("plies %d outcomes %d %d\n", plies, outcomes[0], outcomes[1]);
  return 0;
}
