#pragma once

#include <vector>

#include "rndkit/bonus.hpp"
#include "rndkit/densenet.hpp"
#include "rndkit/envs.hpp"

namespace rndkit {

struct RndConfig {
    int obs_dim = 0;
    int embedding_dim = 64;
    std::vector<int> target_hidden = {64};
    // predictor gets one extra hidden layer so the target sits inside its
    // model class
    std::vector<int> predictor_hidden = {64, 64};
    double learning_rate = 1e-4;
    double keep_prob = 1.0;
    InitScheme init_scheme = InitScheme::ScaledUniform;
    bool sum_over_dims = false;  // default: mean over the k embedding dims
    int num_envs = 1;
    double gamma_i = 0.99;
    bool centered_return_std = true;
};

/// Frozen random target network plus a trained predictor; the squared
/// embedding error on never-visited observations is the exploration bonus.
class RndBonus : public BonusModel {
  public:
    RndBonus(const RndConfig& cfg, uint64_t seed);

    RndConfig cfg;
    DenseNet target;     // trainable=false for its whole lifetime
    DenseNet predictor;
    AdamState predictor_opt;
    Rng dropout_rng;

    Vec bonus(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
              const std::vector<int>& next_state) override;
    double train_step(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
                      const std::vector<int>& next_state) override;
    std::string kind() const override { return "rnd"; }
    int64_t opt_steps() const override { return predictor_opt.t; }

    void save(BinWriter& w) const override;
    void load(BinReader& r) override;
};

/// Squared embedding error per row of next_obs, after whitening. Read-only.
Vec intrinsic_reward(RndBonus& rnd, const Mat& next_obs);

/// One Adam step on the predictor over a batch thinned by per-element
/// Bernoulli(keep_prob) dropout. Returns the pre-step loss over retained
/// rows; takes no step when nothing is retained.
double train_predictor(RndBonus& rnd, const Mat& obs_batch);

/// Drive the environment with uniform-random actions for m_steps, feeding
/// every observation into the whitening stats, then reset. Returns the fresh
/// post-reset observation batch.
Mat warmup_obs_norm(RndBonus& rnd, VecEnv& env, int m_steps, Rng& action_rng,
                    uint64_t reset_seed);
Mat warmup_obs_norm(RunningMeanStd& rms, VecEnv& env, int m_steps, Rng& action_rng,
                    uint64_t reset_seed);

}  // namespace rndkit
