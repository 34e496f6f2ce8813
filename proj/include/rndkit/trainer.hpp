#pragma once

#include <memory>
#include <set>
#include <string>

#include "rndkit/agent.hpp"
#include "rndkit/bonus.hpp"
#include "rndkit/config.hpp"
#include "rndkit/envs.hpp"

namespace rndkit {

/// One RunLog row, produced per completed update. All quantities are
/// deterministic functions of (config, seed); wall time lives in a separate
/// timing file so logs compare byte-for-byte across runs.
struct LogRow {
    int update = 0;  // 1-based index of the completed update
    int64_t frames = 0;
    double ext_reward_mean = 0.0;      // per-step mean, shaping included, pre-coefficient
    double int_reward_raw_mean = 0.0;  // before return normalization
    double int_reward_norm_mean = 0.0;
    int ep_count = 0;  // episodes finished during this update
    double ep_return_mean = 0.0;
    double ep_len_mean = 0.0;
    int64_t goal_count = 0;  // cumulative episodes that reached the goal
    double best_ep_return = 0.0;
    double surrogate = 0.0;
    double vloss_e = 0.0;
    double vloss_i = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_frac = 0.0;
    double bonus_loss = 0.0;
    int64_t obs_count = 0;    // rows folded into the bonus obs normalizer
    int64_t policy_steps = 0;  // policy optimizer steps so far
    int64_t bonus_steps = 0;   // bonus optimizer steps so far
    int states_visited = 0;    // distinct tabular states reached so far
};

std::string log_header();
std::string format_log_row(const LogRow& row);

/// Instantiate the configured bonus; the seed stream is derived from
/// cfg.seed the same way the trainer derives its own streams.
std::unique_ptr<BonusModel> make_bonus(const ExperimentConfig& cfg);

/// Holds one full training run: vectorized env, policy, bonus model, and
/// every piece of mutable state needed to resume bit-exactly. Constructing
/// runs the observation-normalizer warm-up (uniform-random actions for
/// warmup_steps, then a fresh reset).
struct Trainer {
    explicit Trainer(const ExperimentConfig& config,
                     std::unique_ptr<BonusModel> injected = nullptr);

    ExperimentConfig cfg;
    VecEnv env;
    PolicyNet policy;
    AdamState policy_opt;
    std::unique_ptr<BonusModel> bonus;
    Rng act_rng, update_rng, bonus_shuffle_rng;
    Mat cur_obs;                 // num_envs x obs_dim
    std::vector<int> cur_state;  // tabular index per env
    int update_index = 0;        // completed updates
    int64_t frames = 0;
    int64_t goal_count = 0;
    double best_ep_return = 0.0;
    int64_t noisy_visits = 0;  // steps whose reached state sits in the noisy room
    std::set<int> visited;

    /// One cycle: collect rollout_len steps (intrinsic reward on each next
    /// observation, return normalizer fed per step), normalize intrinsic
    /// rewards, compute per-stream returns and advantages, fold the batch
    /// into the observation normalizer, then run the optimization epochs for
    /// policy and bonus. Throws NumericError when statistics go non-finite.
    LogRow run_update();

    void save(BinWriter& w) const;
    void load(BinReader& r);  // requires a structurally identical config
};

/// Config identity ignoring run bookkeeping (out_dir, updates,
/// snapshot_interval), used to pair snapshots with configs.
uint64_t structural_hash(const ExperimentConfig& cfg);

void save_snapshot_file(const Trainer& t, const std::string& path);
void load_snapshot_file(Trainer& t, const std::string& path);

struct TrainResult {
    bool aborted = false;
    std::string error;
    int updates_done = 0;
    int64_t frames = 0;
    int64_t goal_count = 0;
    double best_ep_return = 0.0;
};

/// Full run with file outputs under cfg.out_dir: run.csv (flushed per
/// update), run.timing.csv, config.resolved, snapshot.bin (at
/// snapshot_interval and at the end). On a NumericError the snapshot of the
/// last completed update is kept and the result reports the abort.
TrainResult run_training(const ExperimentConfig& cfg,
                         std::unique_ptr<BonusModel> injected = nullptr);

/// Continue a snapshotted run until cfg.updates, writing fresh outputs into
/// cfg.out_dir. Log rows continue from the snapshot's update index.
TrainResult resume_training(const ExperimentConfig& cfg, const std::string& snapshot_path);

}  // namespace rndkit
