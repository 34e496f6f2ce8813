#include "rndkit/rnd.hpp"

#include <stdexcept>

#include "rndkit/serialize.hpp"

namespace rndkit {

namespace {

std::vector<int> layer_list(int in_dim, const std::vector<int>& hidden, int out_dim) {
    std::vector<int> sizes;
    sizes.push_back(in_dim);
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(out_dim);
    return sizes;
}

}  // namespace

RndBonus::RndBonus(const RndConfig& c, uint64_t seed)
    : BonusModel(c.obs_dim, c.num_envs, c.gamma_i, c.centered_return_std), cfg(c) {
    if (c.obs_dim <= 0) throw std::invalid_argument("RndBonus: obs_dim must be positive");
    if (c.keep_prob <= 0.0 || c.keep_prob > 1.0)
        throw std::invalid_argument("RndBonus: keep_prob must be in (0, 1]");
    Rng root(seed);
    target = init_dense_net(layer_list(c.obs_dim, c.target_hidden, c.embedding_dim),
                            c.init_scheme, root.split("target").seed(), HiddenAct::ReLU,
                            OutputAct::Identity, /*trainable=*/false);
    predictor = init_dense_net(layer_list(c.obs_dim, c.predictor_hidden, c.embedding_dim),
                               c.init_scheme, root.split("predictor").seed());
    predictor_opt = init_adam(predictor, c.learning_rate);
    dropout_rng = root.split("dropout");
}

Vec intrinsic_reward(RndBonus& rnd, const Mat& next_obs) {
    if (rnd.obs_rms.count <= 0)
        throw InvalidStateError("intrinsic_reward: observation normalizer not warmed up");
    Mat z = normalize_obs(rnd.obs_rms, next_obs);
    Mat t = forward(rnd.target, z);
    Mat p = forward(rnd.predictor, z);
    int k = rnd.cfg.embedding_dim;
    Vec out(next_obs.rows, 0.0);
    for (int i = 0; i < next_obs.rows; ++i) {
        double s = 0.0;
        for (int d = 0; d < k; ++d) {
            double diff = p(i, d) - t(i, d);
            s += diff * diff;
        }
        out[i] = rnd.cfg.sum_over_dims ? s : s / k;
    }
    return out;
}

double train_predictor(RndBonus& rnd, const Mat& obs_batch) {
    if (obs_batch.rows == 0) throw ShapeError("train_predictor: empty batch");
    if (rnd.obs_rms.count <= 0)
        throw InvalidStateError("train_predictor: observation normalizer not warmed up");

    std::vector<int> kept;
    kept.reserve(obs_batch.rows);
    for (int i = 0; i < obs_batch.rows; ++i)
        if (rnd.cfg.keep_prob >= 1.0 || rnd.dropout_rng.bernoulli(rnd.cfg.keep_prob))
            kept.push_back(i);
    if (kept.empty()) return 0.0;

    Mat z = normalize_obs(rnd.obs_rms, take_rows(obs_batch, kept));
    Mat t = forward(rnd.target, z);
    ForwardCache cache;
    Mat p = forward(rnd.predictor, z, &cache);

    int n = z.rows, k = rnd.cfg.embedding_dim;
    double scale = 1.0 / (static_cast<double>(n) * k);
    double loss = 0.0;
    Mat dy(n, k);
    for (size_t i = 0; i < p.a.size(); ++i) {
        double diff = p.a[i] - t.a[i];
        loss += diff * diff;
        dy.a[i] = 2.0 * diff * scale;
    }
    loss *= scale;

    auto grads = backward(rnd.predictor, cache, dy);
    adam_step(rnd.predictor_opt, rnd.predictor, grads);
    return loss;
}

Vec RndBonus::bonus(const Mat&, const std::vector<int>&, const Mat& next_obs,
                    const std::vector<int>&) {
    return intrinsic_reward(*this, next_obs);
}

double RndBonus::train_step(const Mat&, const std::vector<int>&, const Mat& next_obs,
                            const std::vector<int>&) {
    return train_predictor(*this, next_obs);
}

Mat warmup_obs_norm(RunningMeanStd& rms, VecEnv& env, int m_steps, Rng& action_rng,
                    uint64_t reset_seed) {
    if (m_steps < 1) throw std::invalid_argument("warmup_obs_norm: m_steps must be >= 1");
    env.reset(reset_seed);
    for (int t = 0; t < m_steps; ++t) {
        std::vector<int> actions(env.num_envs());
        for (auto& a : actions) a = static_cast<int>(action_rng.randint(env.num_actions()));
        auto res = env.step(actions);
        rms_update(rms, res.obs);
    }
    return env.reset(reset_seed);
}

Mat warmup_obs_norm(RndBonus& rnd, VecEnv& env, int m_steps, Rng& action_rng,
                    uint64_t reset_seed) {
    return warmup_obs_norm(rnd.obs_rms, env, m_steps, action_rng, reset_seed);
}

void RndBonus::save(BinWriter& w) const {
    BonusModel::save(w);
    write_densenet(w, target);
    write_densenet(w, predictor);
    write_adam(w, predictor_opt);
    w.str(dropout_rng.serialize_state());
}

void RndBonus::load(BinReader& r) {
    BonusModel::load(r);
    target = read_densenet(r);
    predictor = read_densenet(r);
    predictor_opt = read_adam(r);
    dropout_rng.restore_state(r.str());
}

}  // namespace rndkit
