#include "rndkit/envs.hpp"

#include <stdexcept>

#include "rndkit/serialize.hpp"

namespace rndkit {

Vec CorridorWorld::observe() {
    Vec obs(cfg.obs_dim(), 0.0);
    obs[room] = 1.0;
    obs[cfg.num_rooms] =
        cfg.room_width > 1 ? static_cast<double>(cell) / (cfg.room_width - 1) : 0.0;
    if (room == cfg.noisy_room)
        for (int d = 0; d < cfg.d_noise; ++d) obs[cfg.num_rooms + 1 + d] = rng.uniform();
    return obs;
}

int state_index(const CorridorWorld& env) { return env.state_index(); }

VecEnv::VecEnv(const CorridorConfig& cfg, int num_envs) : cfg_(cfg) {
    if (cfg.num_rooms < 1 || cfg.room_width < 1)
        throw std::invalid_argument("VecEnv: rooms and width must be >= 1");
    if (num_envs < 1) throw std::invalid_argument("VecEnv: need at least one env");
    if (cfg.noisy_room >= cfg.num_rooms)
        throw std::invalid_argument("VecEnv: noisy_room out of range");
    envs_.resize(num_envs);
    for (auto& e : envs_) e.cfg = cfg;
}

Mat VecEnv::reset(uint64_t seed) {
    Rng root(seed);
    Mat obs(num_envs(), obs_dim());
    for (int e = 0; e < num_envs(); ++e) {
        auto& env = envs_[e];
        env.rng = root.split(static_cast<uint64_t>(e));
        env.room = 0;
        env.cell = 0;
        env.steps = 0;
        env.prev_action = -1;
        env.ep_return = 0.0;
        Vec row = env.observe();
        for (int j = 0; j < obs_dim(); ++j) obs(e, j) = row[j];
    }
    return obs;
}

StepResult VecEnv::step(const std::vector<int>& actions) {
    if (static_cast<int>(actions.size()) != num_envs())
        throw std::invalid_argument("VecEnv::step: expected one action per env");

    StepResult out;
    out.obs = Mat(num_envs(), obs_dim());
    out.reward.assign(num_envs(), 0.0);
    out.done.assign(num_envs(), 0);
    out.state_index.assign(num_envs(), 0);
    out.visited_index.assign(num_envs(), 0);
    out.sticky_fired.assign(num_envs(), 0);

    for (int e = 0; e < num_envs(); ++e) {
        auto& env = envs_[e];
        int a = actions[e];
        if (a < 0 || a >= kNumActions)
            throw std::invalid_argument("VecEnv::step: invalid action " + std::to_string(a) +
                                        " for env " + std::to_string(e));

        if (env.prev_action >= 0 && env.cfg.sticky_prob > 0.0 &&
            env.rng.bernoulli(env.cfg.sticky_prob)) {
            a = env.prev_action;
            out.sticky_fired[e] = 1;
        }
        env.prev_action = a;

        int pos = env.state_index();
        if (a == kActRight)
            pos = std::min(pos + 1, env.cfg.num_states() - 1);
        else if (a == kActLeft)
            pos = std::max(pos - 1, 0);
        env.room = pos / env.cfg.room_width;
        env.cell = pos % env.cfg.room_width;
        env.steps += 1;

        double r = env.at_goal() ? 1.0 : 0.0;
        env.ep_return += r;
        out.reward[e] = r;
        out.visited_index[e] = env.state_index();

        bool done = env.at_goal() || env.steps >= env.cfg.budget();
        if (done) {
            out.done[e] = 1;
            out.completed.push_back({e, env.ep_return, env.steps, env.at_goal()});
            env.room = 0;
            env.cell = 0;
            env.steps = 0;
            env.prev_action = -1;
            env.ep_return = 0.0;
        }
        out.state_index[e] = env.state_index();
        Vec row = env.observe();
        for (int j = 0; j < obs_dim(); ++j) out.obs(e, j) = row[j];
    }
    return out;
}

void VecEnv::save(BinWriter& w) const {
    w.u32(static_cast<uint32_t>(envs_.size()));
    for (const auto& env : envs_) {
        w.i32(env.room);
        w.i32(env.cell);
        w.i32(env.steps);
        w.i32(env.prev_action);
        w.f64(env.ep_return);
        w.str(env.rng.serialize_state());
    }
}

void VecEnv::load(BinReader& r) {
    uint32_t n = r.u32();
    if (n != envs_.size()) throw SerializeError("VecEnv: env count mismatch");
    for (auto& env : envs_) {
        env.room = r.i32();
        env.cell = r.i32();
        env.steps = r.i32();
        env.prev_action = r.i32();
        env.ep_return = r.f64();
        env.rng.restore_state(r.str());
    }
}

}  // namespace rndkit
