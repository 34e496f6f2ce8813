#pragma once

#include <stdexcept>
#include <vector>

#include "rndkit/densenet.hpp"
#include "rndkit/matrix.hpp"
#include "rndkit/rng.hpp"

namespace rndkit {

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Per-reward-stream settings for generalized advantage estimation.
/// Episodic streams stop bootstrapping at done flags; non-episodic streams
/// ignore dones entirely.
struct StreamSpec {
    double gamma = 0.99;
    double lam = 0.95;
    bool episodic = true;
    double coef = 1.0;  // reward-space coefficient, applied by the caller
};

struct GaeResult {
    Mat advantages;  // K x E
    Mat returns;     // K x E, advantages + values
};

/// rewards/values/dones are K x E (time-major); bootstrap holds the value of
/// the observation after step K-1 per env.
GaeResult compute_gae(const Mat& rewards, const Mat& values, const Vec& bootstrap,
                      const Mat& dones, const StreamSpec& spec);

Mat combine_advantages(const Mat& a_e, const Mat& a_i, double c_e, double c_i);

/// Policy with a shared trunk whose output row is [logits..., v_E, v_I]
/// (or [logits..., v] in single-head mode).
struct PolicyNet {
    DenseNet trunk;
    int n_actions = 0;
    int n_value_heads = 2;
};

PolicyNet init_policy(int obs_dim, int n_actions, const std::vector<int>& hidden, uint64_t seed,
                      bool two_value_heads = true, InitScheme scheme = InitScheme::Orthogonal);

struct ActResult {
    std::vector<int> actions;
    Vec log_probs;
    Vec v_e;
    Vec v_i;  // zeros in single-head mode
};

ActResult act(PolicyNet& policy, const Mat& obs, Rng& rng);

/// Value predictions without sampling, for bootstrap values at rollout end.
void predict_values(PolicyNet& policy, const Mat& obs, Vec& v_e, Vec& v_i);

Mat softmax_rows(const Mat& logits);

/// Everything collected over K steps of E envs. Row-major flattening: the
/// sample at step t of env e lives at row t*E + e.
struct RolloutBuffer {
    int K = 0, E = 0;
    Mat obs;           // (K*E) x obs_dim, policy inputs exactly as acted on
    Mat raw_next_obs;  // (K*E) x obs_dim, unnormalized next observations
    std::vector<int> actions;
    Vec log_probs;
    Mat e_rewards;  // K x E
    Mat i_rewards;  // K x E
    Mat dones;      // K x E
    Mat v_e, v_i;   // K x E
    Vec boot_v_e, boot_v_i;
    std::vector<int> next_state;  // tabular index of each next observation

    void init(int steps, int envs, int obs_dim);
    int rows() const { return K * E; }
};

struct PpoParams {
    int epochs = 4;
    int minibatches = 4;
    double clip_eps = 0.1;
    double entropy_coef = 0.001;
    double value_coef = 0.5;
    bool normalize_adv = true;
};

struct PpoLoss {
    double total = 0.0;
    double surrogate = 0.0;  // clipped objective E[min(rho*A, clip(rho)*A)]
    double vloss_e = 0.0;
    double vloss_i = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_frac = 0.0;
    Gradients grads;
};

/// Loss, diagnostics, and exact gradients for one minibatch. Pure in the
/// policy parameters.
PpoLoss ppo_loss(const PolicyNet& policy, const Mat& obs, const std::vector<int>& actions,
                 const Vec& old_log_probs, const Vec& advantages, const Vec& returns_e,
                 const Vec& returns_i, const PpoParams& p);

struct UpdateStats {
    double surrogate = 0.0;
    double vloss_e = 0.0;
    double vloss_i = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_frac = 0.0;
};

/// Shuffle, split into minibatches, and take one Adam step per minibatch for
/// the given number of epochs. Inputs are flat over K*E samples. Stats are
/// averaged over all minibatch steps.
UpdateStats ppo_update(PolicyNet& policy, AdamState& opt, const Mat& obs,
                       const std::vector<int>& actions, const Vec& old_log_probs,
                       const Vec& advantages, const Vec& returns_e, const Vec& returns_i,
                       const PpoParams& p, Rng& rng);

}  // namespace rndkit
