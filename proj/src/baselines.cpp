#include "rndkit/baselines.hpp"

#include <cmath>
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

Mat append_one_hot(const Mat& z, const std::vector<int>& actions, int num_actions) {
    if (static_cast<int>(actions.size()) != z.rows)
        throw ShapeError("append_one_hot: one action per row required");
    Mat out(z.rows, z.cols + num_actions);
    for (int i = 0; i < z.rows; ++i) {
        int a = actions[i];
        if (a < 0 || a >= num_actions)
            throw std::invalid_argument("append_one_hot: action out of range");
        double* dst = out.row(i);
        const double* src = z.row(i);
        for (int j = 0; j < z.cols; ++j) dst[j] = src[j];
        for (int j = 0; j < num_actions; ++j) dst[z.cols + j] = j == a ? 1.0 : 0.0;
    }
    return out;
}

}  // namespace

DynamicsBonus::DynamicsBonus(const RndConfig& c, int n_actions, uint64_t seed)
    : BonusModel(c.obs_dim, c.num_envs, c.gamma_i, c.centered_return_std),
      cfg(c),
      num_actions(n_actions) {
    if (c.obs_dim <= 0) throw std::invalid_argument("DynamicsBonus: obs_dim must be positive");
    if (n_actions <= 0)
        throw std::invalid_argument("DynamicsBonus: num_actions must be positive");
    if (c.keep_prob <= 0.0 || c.keep_prob > 1.0)
        throw std::invalid_argument("DynamicsBonus: keep_prob must be in (0, 1]");
    Rng root(seed);
    features = init_dense_net(layer_list(c.obs_dim, c.target_hidden, c.embedding_dim),
                              c.init_scheme, root.split("features").seed(), HiddenAct::ReLU,
                              OutputAct::Identity, /*trainable=*/false);
    predictor =
        init_dense_net(layer_list(c.obs_dim + n_actions, c.predictor_hidden, c.embedding_dim),
                       c.init_scheme, root.split("predictor").seed());
    predictor_opt = init_adam(predictor, c.learning_rate);
    dropout_rng = root.split("dropout");
}

Vec dynamics_bonus(DynamicsBonus& db, const Mat& obs, const std::vector<int>& actions,
                   const Mat& next_obs) {
    if (db.obs_rms.count <= 0)
        throw InvalidStateError("dynamics_bonus: observation normalizer not warmed up");
    if (obs.rows != next_obs.rows)
        throw ShapeError("dynamics_bonus: obs/next_obs row mismatch");
    Mat zin = append_one_hot(normalize_obs(db.obs_rms, obs), actions, db.num_actions);
    Mat t = forward(db.features, normalize_obs(db.obs_rms, next_obs));
    Mat p = forward(db.predictor, zin);
    int k = db.cfg.embedding_dim;
    Vec out(obs.rows, 0.0);
    for (int i = 0; i < obs.rows; ++i) {
        double s = 0.0;
        for (int d = 0; d < k; ++d) {
            double diff = p(i, d) - t(i, d);
            s += diff * diff;
        }
        out[i] = db.cfg.sum_over_dims ? s : s / k;
    }
    return out;
}

double train_dynamics(DynamicsBonus& db, const Mat& obs, const std::vector<int>& actions,
                      const Mat& next_obs) {
    if (obs.rows == 0) throw ShapeError("train_dynamics: empty batch");
    if (db.obs_rms.count <= 0)
        throw InvalidStateError("train_dynamics: observation normalizer not warmed up");
    if (obs.rows != next_obs.rows || obs.rows != static_cast<int>(actions.size()))
        throw ShapeError("train_dynamics: batch pieces disagree on length");

    std::vector<int> kept;
    kept.reserve(obs.rows);
    for (int i = 0; i < obs.rows; ++i)
        if (db.cfg.keep_prob >= 1.0 || db.dropout_rng.bernoulli(db.cfg.keep_prob))
            kept.push_back(i);
    if (kept.empty()) return 0.0;

    std::vector<int> acts;
    acts.reserve(kept.size());
    for (int i : kept) acts.push_back(actions[i]);
    Mat zin = append_one_hot(normalize_obs(db.obs_rms, take_rows(obs, kept)), acts,
                             db.num_actions);
    Mat t = forward(db.features, normalize_obs(db.obs_rms, take_rows(next_obs, kept)));
    ForwardCache cache;
    Mat p = forward(db.predictor, zin, &cache);

    int n = zin.rows, k = db.cfg.embedding_dim;
    double scale = 1.0 / (static_cast<double>(n) * k);
    double loss = 0.0;
    Mat dy(n, k);
    for (size_t i = 0; i < p.a.size(); ++i) {
        double diff = p.a[i] - t.a[i];
        loss += diff * diff;
        dy.a[i] = 2.0 * diff * scale;
    }
    loss *= scale;

    auto grads = backward(db.predictor, cache, dy);
    adam_step(db.predictor_opt, db.predictor, grads);
    return loss;
}

Vec DynamicsBonus::bonus(const Mat& obs, const std::vector<int>& actions, const Mat& next_obs,
                         const std::vector<int>&) {
    return dynamics_bonus(*this, obs, actions, next_obs);
}

double DynamicsBonus::train_step(const Mat& obs, const std::vector<int>& actions,
                                 const Mat& next_obs, const std::vector<int>&) {
    return train_dynamics(*this, obs, actions, next_obs);
}

void DynamicsBonus::save(BinWriter& w) const {
    BonusModel::save(w);
    w.i32(num_actions);
    write_densenet(w, features);
    write_densenet(w, predictor);
    write_adam(w, predictor_opt);
    w.str(dropout_rng.serialize_state());
}

void DynamicsBonus::load(BinReader& r) {
    BonusModel::load(r);
    num_actions = r.i32();
    features = read_densenet(r);
    predictor = read_densenet(r);
    predictor_opt = read_adam(r);
    dropout_rng.restore_state(r.str());
}

AutoencoderBonus::AutoencoderBonus(const RndConfig& c, uint64_t seed)
    : BonusModel(c.obs_dim, c.num_envs, c.gamma_i, c.centered_return_std), cfg(c) {
    if (c.obs_dim <= 0)
        throw std::invalid_argument("AutoencoderBonus: obs_dim must be positive");
    if (c.keep_prob <= 0.0 || c.keep_prob > 1.0)
        throw std::invalid_argument("AutoencoderBonus: keep_prob must be in (0, 1]");
    bottleneck = std::max(2, c.obs_dim / 2);
    std::vector<int> sizes;
    sizes.push_back(c.obs_dim);
    for (int h : c.target_hidden) sizes.push_back(h);
    sizes.push_back(bottleneck);
    for (auto it = c.target_hidden.rbegin(); it != c.target_hidden.rend(); ++it)
        sizes.push_back(*it);
    sizes.push_back(c.obs_dim);
    Rng root(seed);
    net = init_dense_net(sizes, c.init_scheme, root.split("autoencoder").seed());
    opt = init_adam(net, c.learning_rate);
    dropout_rng = root.split("dropout");
}

Vec autoencoder_bonus(AutoencoderBonus& ae, const Mat& obs) {
    if (ae.obs_rms.count <= 0)
        throw InvalidStateError("autoencoder_bonus: observation normalizer not warmed up");
    Mat z = normalize_obs(ae.obs_rms, obs);
    Mat rec = forward(ae.net, z);
    Vec out(obs.rows, 0.0);
    for (int i = 0; i < obs.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < z.cols; ++j) {
            double diff = rec(i, j) - z(i, j);
            s += diff * diff;
        }
        out[i] = s / z.cols;
    }
    return out;
}

double train_autoencoder(AutoencoderBonus& ae, const Mat& obs) {
    if (obs.rows == 0) throw ShapeError("train_autoencoder: empty batch");
    if (ae.obs_rms.count <= 0)
        throw InvalidStateError("train_autoencoder: observation normalizer not warmed up");

    std::vector<int> kept;
    kept.reserve(obs.rows);
    for (int i = 0; i < obs.rows; ++i)
        if (ae.cfg.keep_prob >= 1.0 || ae.dropout_rng.bernoulli(ae.cfg.keep_prob))
            kept.push_back(i);
    if (kept.empty()) return 0.0;

    Mat z = normalize_obs(ae.obs_rms, take_rows(obs, kept));
    ForwardCache cache;
    Mat rec = forward(ae.net, z, &cache);

    int n = z.rows, d = z.cols;
    double scale = 1.0 / (static_cast<double>(n) * d);
    double loss = 0.0;
    Mat dy(n, d);
    for (size_t i = 0; i < rec.a.size(); ++i) {
        double diff = rec.a[i] - z.a[i];
        loss += diff * diff;
        dy.a[i] = 2.0 * diff * scale;
    }
    loss *= scale;

    auto grads = backward(ae.net, cache, dy);
    adam_step(ae.opt, ae.net, grads);
    return loss;
}

Vec AutoencoderBonus::bonus(const Mat&, const std::vector<int>&, const Mat& next_obs,
                            const std::vector<int>&) {
    return autoencoder_bonus(*this, next_obs);
}

double AutoencoderBonus::train_step(const Mat&, const std::vector<int>&, const Mat& next_obs,
                                    const std::vector<int>&) {
    return train_autoencoder(*this, next_obs);
}

void AutoencoderBonus::save(BinWriter& w) const {
    BonusModel::save(w);
    w.i32(bottleneck);
    write_densenet(w, net);
    write_adam(w, opt);
    w.str(dropout_rng.serialize_state());
}

void AutoencoderBonus::load(BinReader& r) {
    BonusModel::load(r);
    bottleneck = r.i32();
    net = read_densenet(r);
    opt = read_adam(r);
    dropout_rng.restore_state(r.str());
}

void record_visit(CountTable& table, int state_index) {
    if (state_index < 0) throw std::invalid_argument("record_visit: negative state index");
    ++table.counts[state_index];
}

double count_bonus(const CountTable& table, int state_index) {
    if (state_index < 0) throw std::invalid_argument("count_bonus: negative state index");
    auto it = table.counts.find(state_index);
    if (it == table.counts.end()) return 1.0;
    double n = static_cast<double>(it->second);
    return table.form == CountForm::InverseN ? 1.0 / n : 1.0 / std::sqrt(n);
}

void write_count_table(BinWriter& w, const CountTable& t) {
    w.u8(static_cast<uint8_t>(t.form));
    w.u64(t.counts.size());
    for (const auto& [state, n] : t.counts) {
        w.i32(state);
        w.u64(static_cast<uint64_t>(n));
    }
}

CountTable read_count_table(BinReader& r) {
    CountTable t;
    t.form = static_cast<CountForm>(r.u8());
    uint64_t n = r.u64();
    for (uint64_t i = 0; i < n; ++i) {
        int state = r.i32();
        t.counts[state] = static_cast<int64_t>(r.u64());
    }
    return t;
}

Vec CountBonus::bonus(const Mat&, const std::vector<int>&, const Mat& next_obs,
                      const std::vector<int>& next_state) {
    if (static_cast<int>(next_state.size()) != next_obs.rows)
        throw ShapeError("CountBonus: one state index per row required");
    Vec out(next_obs.rows, 0.0);
    for (int i = 0; i < next_obs.rows; ++i) {
        record_visit(table, next_state[i]);
        out[i] = count_bonus(table, next_state[i]);
    }
    return out;
}

void CountBonus::save(BinWriter& w) const {
    BonusModel::save(w);
    write_count_table(w, table);
}

void CountBonus::load(BinReader& r) {
    BonusModel::load(r);
    table = read_count_table(r);
}

}  // namespace rndkit
