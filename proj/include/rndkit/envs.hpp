#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rndkit/matrix.hpp"
#include "rndkit/rng.hpp"

namespace rndkit {

class BinWriter;
class BinReader;

struct CorridorConfig {
    int num_rooms = 10;
    int room_width = 10;
    int noisy_room = -1;  // room whose observations carry live noise dims; -1 for none
    int d_noise = 8;
    double sticky_prob = 0.25;
    int max_episode_steps = 0;  // 0 means 8 * num_rooms * room_width

    int budget() const { return max_episode_steps > 0 ? max_episode_steps : 8 * num_rooms * room_width; }
    int obs_dim() const { return num_rooms + 1 + d_noise; }
    int num_states() const { return num_rooms * room_width; }
};

constexpr int kActLeft = 0;
constexpr int kActRight = 1;
constexpr int kActStay = 2;
constexpr int kNumActions = 3;

/// Chain of rooms, each room_width cells wide. The agent starts at room 0,
/// cell 0 and earns reward 1.0 for reaching the last cell of the last room,
/// which ends the episode. Observations are one-hot room, normalized cell
/// position, and d_noise channels that carry fresh uniform noise while the
/// agent stands in noisy_room and zeros everywhere else.
struct CorridorWorld {
    CorridorConfig cfg;
    int room = 0;
    int cell = 0;
    int steps = 0;
    int prev_action = -1;  // -1 until the first step of an episode
    double ep_return = 0.0;
    Rng rng;

    Vec observe();  // draws noise when standing in the noisy room
    int state_index() const { return room * cfg.room_width + cell; }
    bool at_goal() const { return room == cfg.num_rooms - 1 && cell == cfg.room_width - 1; }
};

int state_index(const CorridorWorld& env);

struct CompletedEpisode {
    int env = 0;
    double ep_return = 0.0;
    int length = 0;
    bool reached_goal = false;
};

struct StepResult {
    Mat obs;  // E x obs_dim, post-reset rows for finished envs
    Vec reward;
    std::vector<uint8_t> done;
    std::vector<int> state_index;    // matches obs rows (post-reset on done)
    std::vector<int> visited_index;  // state the transition actually reached
    std::vector<uint8_t> sticky_fired;
    std::vector<CompletedEpisode> completed;
};

/// E independent corridor instances with auto-reset. step() consumes one
/// action per env and returns results in fixed env order.
class VecEnv {
  public:
    VecEnv(const CorridorConfig& cfg, int num_envs);

    Mat reset(uint64_t seed);
    StepResult step(const std::vector<int>& actions);

    int num_envs() const { return static_cast<int>(envs_.size()); }
    int obs_dim() const { return cfg_.obs_dim(); }
    int num_actions() const { return kNumActions; }
    const CorridorConfig& config() const { return cfg_; }
    const CorridorWorld& env(int e) const { return envs_[e]; }

    void save(BinWriter& w) const;
    void load(BinReader& r);

  private:
    CorridorConfig cfg_;
    std::vector<CorridorWorld> envs_;
};

}  // namespace rndkit
