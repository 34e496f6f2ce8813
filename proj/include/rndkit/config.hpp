#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rndkit/data.hpp"
#include "rndkit/envs.hpp"

namespace rndkit {

struct NoisyTvConfig {
    int replay_pool_steps = 4096;  // random-walk transitions collected per phase
    int train_steps = 30000;
    int batch_size = 128;
    std::vector<uint64_t> seeds = {1, 2, 3};
    int agent_updates = 60;
    std::vector<uint64_t> agent_seeds = {1, 2, 3, 4, 5};
    bool run_agents = true;
};

/// Every knob of a run, materialized. Field groups mirror the sections of
/// the JSON config files.
struct ExperimentConfig {
    // run
    int updates = 100;  // number of rollout+update cycles
    uint64_t seed = 1;
    std::string out_dir = "out";
    int snapshot_interval = 0;  // updates between snapshots; 0 = final only

    // ppo
    int rollout_len = 128;  // steps per env per rollout
    int num_envs = 16;
    int epochs = 4;
    int minibatches = 4;
    double gamma_e = 0.999;
    double gamma_i = 0.99;
    double lambda = 0.95;
    double clip_eps = 0.1;
    double entropy_coef = 0.001;
    double value_coef = 0.5;
    double learning_rate = 1e-4;
    double c_e = 2.0;  // extrinsic reward coefficient, applied before return computation
    double c_i = 1.0;
    bool episodic_ext = true;
    bool episodic_int = false;
    bool normalize_adv = true;
    std::vector<int> policy_hidden = {64, 64};
    bool two_value_heads = true;

    // bonus
    std::string bonus_kind = "rnd";  // rnd | dynamics | autoencoder | count | none
    int embedding_dim = 64;
    std::vector<int> target_hidden = {64};
    std::vector<int> predictor_hidden = {64, 64};
    double bonus_learning_rate = 1e-4;
    double keep_prob = -1.0;  // negative = auto min(1, 32/num_envs)
    int warmup_steps = 128;   // random-action steps priming the obs normalizer
    bool freeze_obs_norm = false;  // stop obs-normalizer updates after warm-up
    bool centered_return_std = true;
    std::string count_form = "inverse_sqrt";  // inverse_n | inverse_sqrt

    // env
    CorridorConfig env;
    bool dense_shaping = false;  // add potential-based progress shaping to ext reward

    // novelty
    NoveltyConfig novelty;
    std::vector<uint64_t> novelty_seeds = {1, 2, 3, 4, 5};
    std::string mnist_dir;  // empty = synthetic fallback

    // noisytv
    NoisyTvConfig noisytv;
};

/// keep_prob < 0 means "derive from num_envs"; returns the effective value.
double resolved_keep_prob(const ExperimentConfig& cfg);

/// Fill in derived fields (keep_prob) so the config is fully explicit.
void resolve_config(ExperimentConfig& cfg);

/// Range-check every field; throws std::invalid_argument naming the first
/// offending field.
void validate_config(const ExperimentConfig& cfg);

/// Parse a JSON config, overlaying the given values onto defaults. Unknown
/// sections or keys are rejected. The result is resolved and validated.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Full materialization of the config as canonical JSON text (sorted keys).
std::string config_to_json_text(const ExperimentConfig& cfg);

/// FNV-1a over the canonical JSON text of the resolved config.
uint64_t config_hash(const ExperimentConfig& cfg);

/// config_to_json_text plus the hash, written next to run outputs.
void write_resolved_config(const ExperimentConfig& cfg, const std::string& path);

std::string hash_hex(uint64_t h);

}  // namespace rndkit
