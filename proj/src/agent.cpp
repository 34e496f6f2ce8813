#include "rndkit/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rndkit {

GaeResult compute_gae(const Mat& rewards, const Mat& values, const Vec& bootstrap,
                      const Mat& dones, const StreamSpec& spec) {
    int K = rewards.rows, E = rewards.cols;
    if (values.rows != K || values.cols != E || dones.rows != K || dones.cols != E)
        throw ShapeError("compute_gae: rewards/values/dones must share K x E shape");
    if (static_cast<int>(bootstrap.size()) != E)
        throw ShapeError("compute_gae: bootstrap must hold one value per env");

    GaeResult out;
    out.advantages = Mat(K, E);
    out.returns = Mat(K, E);
    for (int e = 0; e < E; ++e) {
        double acc = 0.0;
        for (int t = K - 1; t >= 0; --t) {
            double mask = spec.episodic ? 1.0 - dones(t, e) : 1.0;
            double v_next = t == K - 1 ? bootstrap[e] : values(t + 1, e);
            double delta = rewards(t, e) + spec.gamma * v_next * mask - values(t, e);
            acc = delta + spec.gamma * spec.lam * mask * acc;
            out.advantages(t, e) = acc;
            out.returns(t, e) = acc + values(t, e);
        }
    }
    return out;
}

Mat combine_advantages(const Mat& a_e, const Mat& a_i, double c_e, double c_i) {
    if (c_e < 0.0 || c_i < 0.0)
        throw std::invalid_argument("combine_advantages: coefficients must be non-negative");
    if (a_e.rows != a_i.rows || a_e.cols != a_i.cols)
        throw ShapeError("combine_advantages: shape mismatch");
    Mat out(a_e.rows, a_e.cols);
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] = c_e * a_e.a[i] + c_i * a_i.a[i];
    return out;
}

PolicyNet init_policy(int obs_dim, int n_actions, const std::vector<int>& hidden, uint64_t seed,
                      bool two_value_heads, InitScheme scheme) {
    if (n_actions < 2) throw std::invalid_argument("init_policy: need at least two actions");
    PolicyNet p;
    p.n_actions = n_actions;
    p.n_value_heads = two_value_heads ? 2 : 1;
    std::vector<int> sizes;
    sizes.push_back(obs_dim);
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(n_actions + p.n_value_heads);
    p.trunk = init_dense_net(sizes, scheme, seed);
    return p;
}

Mat softmax_rows(const Mat& logits) {
    Mat probs(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) {
        const double* in = logits.row(i);
        double* out = probs.row(i);
        double mx = in[0];
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
        double z = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            out[j] = std::exp(in[j] - mx);
            z += out[j];
        }
        for (int j = 0; j < logits.cols; ++j) out[j] /= z;
    }
    return probs;
}

namespace {

struct HeadView {
    Mat logits;  // B x n_actions
    Vec v_e;     // B
    Vec v_i;     // B, zeros in single-head mode
};

HeadView split_heads(const PolicyNet& p, const Mat& out) {
    HeadView h;
    h.logits = Mat(out.rows, p.n_actions);
    h.v_e.assign(out.rows, 0.0);
    h.v_i.assign(out.rows, 0.0);
    for (int i = 0; i < out.rows; ++i) {
        for (int j = 0; j < p.n_actions; ++j) h.logits(i, j) = out(i, j);
        h.v_e[i] = out(i, p.n_actions);
        if (p.n_value_heads == 2) h.v_i[i] = out(i, p.n_actions + 1);
    }
    return h;
}

}  // namespace

ActResult act(PolicyNet& policy, const Mat& obs, Rng& rng) {
    Mat out = forward(policy.trunk, obs);
    HeadView h = split_heads(policy, out);
    Mat probs = softmax_rows(h.logits);

    ActResult res;
    res.actions.resize(obs.rows);
    res.log_probs.assign(obs.rows, 0.0);
    res.v_e = h.v_e;
    res.v_i = h.v_i;
    for (int i = 0; i < obs.rows; ++i) {
        double u = rng.uniform();
        double cum = 0.0;
        int a = policy.n_actions - 1;
        for (int j = 0; j < policy.n_actions; ++j) {
            cum += probs(i, j);
            if (u < cum) {
                a = j;
                break;
            }
        }
        res.actions[i] = a;
        res.log_probs[i] = std::log(probs(i, a));
    }
    return res;
}

void predict_values(PolicyNet& policy, const Mat& obs, Vec& v_e, Vec& v_i) {
    Mat out = forward(policy.trunk, obs);
    HeadView h = split_heads(policy, out);
    v_e = h.v_e;
    v_i = h.v_i;
}

void RolloutBuffer::init(int steps, int envs, int obs_dim) {
    K = steps;
    E = envs;
    obs = Mat(steps * envs, obs_dim);
    raw_next_obs = Mat(steps * envs, obs_dim);
    actions.assign(static_cast<size_t>(steps) * envs, 0);
    log_probs.assign(static_cast<size_t>(steps) * envs, 0.0);
    e_rewards = Mat(steps, envs);
    i_rewards = Mat(steps, envs);
    dones = Mat(steps, envs);
    v_e = Mat(steps, envs);
    v_i = Mat(steps, envs);
    boot_v_e.assign(envs, 0.0);
    boot_v_i.assign(envs, 0.0);
    next_state.assign(static_cast<size_t>(steps) * envs, 0);
}

PpoLoss ppo_loss(const PolicyNet& policy, const Mat& obs, const std::vector<int>& actions,
                 const Vec& old_log_probs, const Vec& advantages, const Vec& returns_e,
                 const Vec& returns_i, const PpoParams& p) {
    int B = obs.rows;
    if (B == 0) throw ShapeError("ppo_loss: empty minibatch");
    if (static_cast<int>(actions.size()) != B || static_cast<int>(old_log_probs.size()) != B ||
        static_cast<int>(advantages.size()) != B || static_cast<int>(returns_e.size()) != B ||
        static_cast<int>(returns_i.size()) != B)
        throw ShapeError("ppo_loss: per-sample array length mismatch");

    ForwardCache cache;
    Mat out = forward(policy.trunk, obs, &cache);
    HeadView h = split_heads(policy, out);
    Mat probs = softmax_rows(h.logits);

    PpoLoss L;
    Mat dOut(B, out.cols);
    const double lo = 1.0 - p.clip_eps, hi = 1.0 + p.clip_eps;
    const double inv_b = 1.0 / B;

    for (int i = 0; i < B; ++i) {
        int a = actions[i];
        if (a < 0 || a >= policy.n_actions)
            throw ShapeError("ppo_loss: action index out of range");
        double lp_new = std::log(probs(i, a));
        double rho = std::exp(lp_new - old_log_probs[i]);
        double adv = advantages[i];

        double unclipped = rho * adv;
        double clipped = std::clamp(rho, lo, hi) * adv;
        bool use_unclipped = unclipped <= clipped;
        L.surrogate += std::min(unclipped, clipped) * inv_b;
        L.approx_kl += (old_log_probs[i] - lp_new) * inv_b;
        if (rho < lo || rho > hi) L.clip_frac += inv_b;

        // policy gradient wrt logits: flows only through the selected branch,
        // and the clipped branch is constant when rho is saturated
        double coef = 0.0;
        if (use_unclipped)
            coef = rho * adv;
        else if (rho > lo && rho < hi)
            coef = rho * adv;
        if (coef != 0.0) {
            for (int j = 0; j < policy.n_actions; ++j) {
                double ind = j == a ? 1.0 : 0.0;
                dOut(i, j) += -inv_b * coef * (ind - probs(i, j));
            }
        }

        // entropy bonus
        double H = 0.0;
        for (int j = 0; j < policy.n_actions; ++j) {
            double pj = probs(i, j);
            if (pj > 0.0) H -= pj * std::log(pj);
        }
        L.entropy += H * inv_b;
        for (int j = 0; j < policy.n_actions; ++j) {
            double pj = probs(i, j);
            if (pj > 0.0) dOut(i, j) += p.entropy_coef * inv_b * pj * (std::log(pj) + H);
        }

        // value heads
        double de = h.v_e[i] - returns_e[i];
        L.vloss_e += de * de * inv_b;
        dOut(i, policy.n_actions) = p.value_coef * 2.0 * de * inv_b;
        if (policy.n_value_heads == 2) {
            double di = h.v_i[i] - returns_i[i];
            L.vloss_i += di * di * inv_b;
            dOut(i, policy.n_actions + 1) = p.value_coef * 2.0 * di * inv_b;
        }
    }

    L.total = -L.surrogate + p.value_coef * (L.vloss_e + L.vloss_i) - p.entropy_coef * L.entropy;
    if (!std::isfinite(L.total)) {
        double amax = 0.0, amean = 0.0;
        for (double a : advantages) {
            amax = std::max(amax, std::fabs(a));
            amean += a * inv_b;
        }
        std::ostringstream msg;
        msg << "ppo_loss: non-finite loss (surrogate=" << L.surrogate << " vloss_e=" << L.vloss_e
            << " vloss_i=" << L.vloss_i << " entropy=" << L.entropy << " adv mean=" << amean
            << " adv max=" << amax << " batch=" << B << ")";
        throw NumericError(msg.str());
    }

    L.grads = backward(policy.trunk, cache, dOut);
    return L;
}

UpdateStats ppo_update(PolicyNet& policy, AdamState& opt, const Mat& obs,
                       const std::vector<int>& actions, const Vec& old_log_probs,
                       const Vec& advantages, const Vec& returns_e, const Vec& returns_i,
                       const PpoParams& p, Rng& rng) {
    int N = obs.rows;
    if (p.minibatches < 1 || p.epochs < 1)
        throw std::invalid_argument("ppo_update: epochs and minibatches must be >= 1");
    if (N < p.minibatches) throw ShapeError("ppo_update: fewer samples than minibatches");

    Vec adv = advantages;
    if (p.normalize_adv) {
        double mu = mean(adv);
        double sd = stddev(adv);
        for (auto& a : adv) a = (a - mu) / (sd + 1e-8);
    }

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);

    UpdateStats stats;
    int steps = 0;
    for (int epoch = 0; epoch < p.epochs; ++epoch) {
        rng.shuffle(order);
        int base = N / p.minibatches, extra = N % p.minibatches;
        int start = 0;
        for (int mb = 0; mb < p.minibatches; ++mb) {
            int sz = base + (mb < extra ? 1 : 0);
            std::vector<int> rows(order.begin() + start, order.begin() + start + sz);
            start += sz;

            Mat mb_obs = take_rows(obs, rows);
            std::vector<int> mb_act(sz);
            Vec mb_lp(sz), mb_adv(sz), mb_re(sz), mb_ri(sz);
            for (int i = 0; i < sz; ++i) {
                mb_act[i] = actions[rows[i]];
                mb_lp[i] = old_log_probs[rows[i]];
                mb_adv[i] = adv[rows[i]];
                mb_re[i] = returns_e[rows[i]];
                mb_ri[i] = returns_i[rows[i]];
            }

            PpoLoss L = ppo_loss(policy, mb_obs, mb_act, mb_lp, mb_adv, mb_re, mb_ri, p);
            adam_step(opt, policy.trunk, L.grads);

            stats.surrogate += L.surrogate;
            stats.vloss_e += L.vloss_e;
            stats.vloss_i += L.vloss_i;
            stats.entropy += L.entropy;
            stats.approx_kl += L.approx_kl;
            stats.clip_frac += L.clip_frac;
            ++steps;
        }
    }
    stats.surrogate /= steps;
    stats.vloss_e /= steps;
    stats.vloss_i /= steps;
    stats.entropy /= steps;
    stats.approx_kl /= steps;
    stats.clip_frac /= steps;
    return stats;
}

}  // namespace rndkit
