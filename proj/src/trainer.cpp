#include "rndkit/trainer.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "rndkit/baselines.hpp"
#include "rndkit/rnd.hpp"
#include "rndkit/serialize.hpp"

namespace rndkit {

std::string log_header() {
    return "update,frames,ext_reward_mean,int_reward_raw_mean,int_reward_norm_mean,ep_count,"
           "ep_return_mean,ep_len_mean,goal_count,best_ep_return,surrogate,vloss_e,vloss_i,"
           "entropy,approx_kl,clip_frac,bonus_loss,obs_count,policy_steps,bonus_steps,"
           "states_visited";
}

std::string format_log_row(const LogRow& r) {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "%d,%lld,%.10g,%.10g,%.10g,%d,%.10g,%.10g,%lld,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g,%.10g,%.10g,%.10g,%lld,%lld,%lld,%d",
                  r.update, static_cast<long long>(r.frames), r.ext_reward_mean,
                  r.int_reward_raw_mean, r.int_reward_norm_mean, r.ep_count, r.ep_return_mean,
                  r.ep_len_mean, static_cast<long long>(r.goal_count), r.best_ep_return,
                  r.surrogate, r.vloss_e, r.vloss_i, r.entropy, r.approx_kl, r.clip_frac,
                  r.bonus_loss, static_cast<long long>(r.obs_count),
                  static_cast<long long>(r.policy_steps), static_cast<long long>(r.bonus_steps),
                  r.states_visited);
    return buf;
}

std::unique_ptr<BonusModel> make_bonus(const ExperimentConfig& cfg) {
    uint64_t bonus_seed = Rng(cfg.seed).split("bonus").seed();
    int obs_dim = cfg.env.obs_dim();
    RndConfig rc;
    rc.obs_dim = obs_dim;
    rc.embedding_dim = cfg.embedding_dim;
    rc.target_hidden = cfg.target_hidden;
    rc.predictor_hidden = cfg.predictor_hidden;
    rc.learning_rate = cfg.bonus_learning_rate;
    rc.keep_prob = resolved_keep_prob(cfg);
    rc.num_envs = cfg.num_envs;
    rc.gamma_i = cfg.gamma_i;
    rc.centered_return_std = cfg.centered_return_std;

    if (cfg.bonus_kind == "rnd") return std::make_unique<RndBonus>(rc, bonus_seed);
    if (cfg.bonus_kind == "dynamics")
        return std::make_unique<DynamicsBonus>(rc, kNumActions, bonus_seed);
    if (cfg.bonus_kind == "autoencoder")
        return std::make_unique<AutoencoderBonus>(rc, bonus_seed);
    if (cfg.bonus_kind == "count") {
        CountForm form = cfg.count_form == "inverse_n" ? CountForm::InverseN
                                                       : CountForm::InverseSqrtN;
        return std::make_unique<CountBonus>(obs_dim, cfg.num_envs, cfg.gamma_i,
                                            cfg.centered_return_std, form);
    }
    if (cfg.bonus_kind == "none")
        return std::make_unique<ZeroBonus>(obs_dim, cfg.num_envs, cfg.gamma_i,
                                           cfg.centered_return_std);
    throw std::invalid_argument("make_bonus: unknown kind " + cfg.bonus_kind);
}

namespace {

ExperimentConfig prepared(ExperimentConfig cfg) {
    resolve_config(cfg);
    validate_config(cfg);
    return cfg;
}

}  // namespace

Trainer::Trainer(const ExperimentConfig& config, std::unique_ptr<BonusModel> injected)
    : cfg(prepared(config)), env(cfg.env, cfg.num_envs) {
    Rng root(cfg.seed);
    uint64_t reset_seed = root.split("env-reset").seed();
    uint64_t policy_seed = root.split("policy").seed();
    act_rng = root.split("act");
    update_rng = root.split("update");
    bonus_shuffle_rng = root.split("bonus-shuffle");
    Rng warmup_rng = root.split("warmup-actions");

    policy = init_policy(env.obs_dim(), env.num_actions(), cfg.policy_hidden, policy_seed,
                         cfg.two_value_heads);
    policy_opt = init_adam(policy.trunk, cfg.learning_rate);
    bonus = injected ? std::move(injected) : make_bonus(cfg);
    if (bonus->obs_rms.dim() != env.obs_dim())
        throw std::invalid_argument("Trainer: bonus observation dim does not match env");

    cur_obs = warmup_obs_norm(bonus->obs_rms, env, cfg.warmup_steps, warmup_rng, reset_seed);
    cur_state.assign(cfg.num_envs, 0);
}

namespace {

double potential(int state, int num_states) {
    return static_cast<double>(state) / (num_states - 1);
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw NumericError(std::string("run_update: non-finite ") + name);
}

}  // namespace

LogRow Trainer::run_update() {
    const int K = cfg.rollout_len, E = cfg.num_envs;
    RolloutBuffer buf;
    buf.init(K, E, env.obs_dim());

    double ext_sum = 0.0, int_raw_sum = 0.0;
    int ep_count = 0;
    double ep_ret_sum = 0.0;
    int64_t ep_len_sum = 0;

    for (int t = 0; t < K; ++t) {
        ActResult ar = act(policy, cur_obs, act_rng);
        StepResult res = env.step(ar.actions);
        Vec i_t = bonus->bonus(cur_obs, ar.actions, res.obs, res.visited_index);
        bonus->ret_norm.update(i_t);

        for (int e = 0; e < E; ++e) {
            int row = t * E + e;
            double r_ext = res.reward[e];
            if (cfg.dense_shaping)
                r_ext += potential(res.visited_index[e], env.config().num_states()) -
                         potential(cur_state[e], env.config().num_states());
            buf.e_rewards(t, e) = r_ext;
            buf.i_rewards(t, e) = i_t[e];
            buf.dones(t, e) = res.done[e] ? 1.0 : 0.0;
            buf.v_e(t, e) = ar.v_e[e];
            buf.v_i(t, e) = ar.v_i[e];
            buf.actions[row] = ar.actions[e];
            buf.log_probs[row] = ar.log_probs[e];
            buf.next_state[row] = res.visited_index[e];
            const double* src = cur_obs.row(e);
            double* dst = buf.obs.row(row);
            for (int j = 0; j < cur_obs.cols; ++j) dst[j] = src[j];
            const double* nsrc = res.obs.row(e);
            double* ndst = buf.raw_next_obs.row(row);
            for (int j = 0; j < res.obs.cols; ++j) ndst[j] = nsrc[j];

            ext_sum += r_ext;
            int_raw_sum += i_t[e];
            visited.insert(res.visited_index[e]);
            if (cfg.env.noisy_room >= 0 &&
                res.visited_index[e] / cfg.env.room_width == cfg.env.noisy_room)
                ++noisy_visits;
        }
        for (const auto& ce : res.completed) {
            ++ep_count;
            ep_ret_sum += ce.ep_return;
            ep_len_sum += ce.length;
            if (ce.reached_goal) ++goal_count;
            best_ep_return = std::max(best_ep_return, ce.ep_return);
        }
        cur_obs = res.obs;
        cur_state = res.state_index;
        frames += E;
    }

    predict_values(policy, cur_obs, buf.boot_v_e, buf.boot_v_i);

    // scale raw reward streams, normalizing the intrinsic one first
    double int_norm_sum = 0.0;
    Mat r_e(K, E), r_i(K, E);
    for (int t = 0; t < K; ++t) {
        for (int e = 0; e < E; ++e) {
            double norm = bonus->ret_norm.normalize_one(buf.i_rewards(t, e));
            int_norm_sum += norm;
            r_e(t, e) = cfg.c_e * buf.e_rewards(t, e);
            r_i(t, e) = cfg.c_i * norm;
        }
    }

    StreamSpec spec_e{cfg.gamma_e, cfg.lambda, cfg.episodic_ext, 1.0};
    StreamSpec spec_i{cfg.gamma_i, cfg.lambda, cfg.episodic_int, 1.0};

    Mat adv_m;
    Vec ret_e_flat(static_cast<size_t>(K) * E), ret_i_flat(static_cast<size_t>(K) * E, 0.0);
    if (cfg.two_value_heads) {
        GaeResult ge = compute_gae(r_e, buf.v_e, buf.boot_v_e, buf.dones, spec_e);
        GaeResult gi = compute_gae(r_i, buf.v_i, buf.boot_v_i, buf.dones, spec_i);
        adv_m = combine_advantages(ge.advantages, gi.advantages, 1.0, 1.0);
        for (int t = 0; t < K; ++t)
            for (int e = 0; e < E; ++e) {
                ret_e_flat[static_cast<size_t>(t) * E + e] = ge.returns(t, e);
                ret_i_flat[static_cast<size_t>(t) * E + e] = gi.returns(t, e);
            }
    } else {
        Mat r_sum(K, E);
        for (size_t i = 0; i < r_sum.a.size(); ++i) r_sum.a[i] = r_e.a[i] + r_i.a[i];
        GaeResult g = compute_gae(r_sum, buf.v_e, buf.boot_v_e, buf.dones, spec_e);
        adv_m = g.advantages;
        for (int t = 0; t < K; ++t)
            for (int e = 0; e < E; ++e)
                ret_e_flat[static_cast<size_t>(t) * E + e] = g.returns(t, e);
    }
    Vec adv_flat(static_cast<size_t>(K) * E);
    for (int t = 0; t < K; ++t)
        for (int e = 0; e < E; ++e) adv_flat[static_cast<size_t>(t) * E + e] = adv_m(t, e);

    // observation normalizer absorbs this rollout before any optimization
    if (!cfg.freeze_obs_norm) rms_update(bonus->obs_rms, buf.raw_next_obs);

    PpoParams params;
    params.epochs = cfg.epochs;
    params.minibatches = cfg.minibatches;
    params.clip_eps = cfg.clip_eps;
    params.entropy_coef = cfg.entropy_coef;
    params.value_coef = cfg.value_coef;
    params.normalize_adv = cfg.normalize_adv;

    UpdateStats us = ppo_update(policy, policy_opt, buf.obs, buf.actions, buf.log_probs,
                                adv_flat, ret_e_flat, ret_i_flat, params, update_rng);

    double bonus_loss_sum = 0.0;
    int bonus_calls = 0;
    const int rows = buf.rows();
    std::vector<int> order(rows);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        bonus_shuffle_rng.shuffle(order);
        int base = rows / cfg.minibatches, extra = rows % cfg.minibatches;
        int start = 0;
        for (int mb = 0; mb < cfg.minibatches; ++mb) {
            int sz = base + (mb < extra ? 1 : 0);
            std::vector<int> idx(order.begin() + start, order.begin() + start + sz);
            start += sz;
            if (idx.empty()) continue;
            std::vector<int> mb_actions(idx.size());
            std::vector<int> mb_next_state(idx.size());
            for (size_t i = 0; i < idx.size(); ++i) {
                mb_actions[i] = buf.actions[idx[i]];
                mb_next_state[i] = buf.next_state[idx[i]];
            }
            bonus_loss_sum += bonus->train_step(take_rows(buf.obs, idx), mb_actions,
                                                take_rows(buf.raw_next_obs, idx),
                                                mb_next_state);
            ++bonus_calls;
        }
    }

    ++update_index;

    LogRow row;
    row.update = update_index;
    row.frames = frames;
    row.ext_reward_mean = ext_sum / rows;
    row.int_reward_raw_mean = int_raw_sum / rows;
    row.int_reward_norm_mean = int_norm_sum / rows;
    row.ep_count = ep_count;
    row.ep_return_mean = ep_count > 0 ? ep_ret_sum / ep_count : 0.0;
    row.ep_len_mean = ep_count > 0 ? static_cast<double>(ep_len_sum) / ep_count : 0.0;
    row.goal_count = goal_count;
    row.best_ep_return = best_ep_return;
    row.surrogate = us.surrogate;
    row.vloss_e = us.vloss_e;
    row.vloss_i = us.vloss_i;
    row.entropy = us.entropy;
    row.approx_kl = us.approx_kl;
    row.clip_frac = us.clip_frac;
    row.bonus_loss = bonus_calls > 0 ? bonus_loss_sum / bonus_calls : 0.0;
    row.obs_count = static_cast<int64_t>(bonus->obs_rms.count);
    row.policy_steps = policy_opt.t;
    row.bonus_steps = bonus->opt_steps();
    row.states_visited = static_cast<int>(visited.size());

    require_finite(row.ext_reward_mean, "extrinsic reward mean");
    require_finite(row.int_reward_raw_mean, "intrinsic reward mean");
    require_finite(row.int_reward_norm_mean, "normalized intrinsic reward mean");
    require_finite(row.surrogate, "surrogate");
    require_finite(row.vloss_e, "value loss (ext)");
    require_finite(row.vloss_i, "value loss (int)");
    require_finite(row.entropy, "entropy");
    require_finite(row.approx_kl, "approximate KL");
    require_finite(row.bonus_loss, "bonus loss");
    require_finite(row.best_ep_return, "best episode return");
    return row;
}

namespace {
constexpr char kSnapshotMagic[] = "RKSNAP01";
}

uint64_t structural_hash(const ExperimentConfig& cfg) {
    nlohmann::json j = nlohmann::json::parse(config_to_json_text(cfg));
    j["run"].erase("out_dir");
    j["run"].erase("updates");
    j["run"].erase("snapshot_interval");
    return fnv1a64(j.dump(2));
}

void Trainer::save(BinWriter& w) const {
    w.str(kSnapshotMagic);
    w.u64(config_hash(cfg));
    w.u64(structural_hash(cfg));
    w.i32(update_index);
    w.u64(static_cast<uint64_t>(frames));
    w.u64(static_cast<uint64_t>(goal_count));
    w.f64(best_ep_return);
    w.u64(static_cast<uint64_t>(noisy_visits));
    env.save(w);
    write_densenet(w, policy.trunk);
    w.i32(policy.n_actions);
    w.i32(policy.n_value_heads);
    write_adam(w, policy_opt);
    w.str(bonus->kind());
    bonus->save(w);
    w.str(act_rng.serialize_state());
    w.str(update_rng.serialize_state());
    w.str(bonus_shuffle_rng.serialize_state());
    w.mat(cur_obs);
    w.u64(cur_state.size());
    for (int s : cur_state) w.i32(s);
    w.u64(visited.size());
    for (int s : visited) w.i32(s);
}

void Trainer::load(BinReader& r) {
    if (r.str() != kSnapshotMagic)
        throw SerializeError("snapshot: wrong magic (not a trainer snapshot)");
    r.u64();  // original config hash, informational
    if (r.u64() != structural_hash(cfg))
        throw std::invalid_argument(
            "snapshot: saved run used a structurally different config");
    update_index = r.i32();
    frames = static_cast<int64_t>(r.u64());
    goal_count = static_cast<int64_t>(r.u64());
    best_ep_return = r.f64();
    noisy_visits = static_cast<int64_t>(r.u64());
    env.load(r);
    policy.trunk = read_densenet(r);
    policy.n_actions = r.i32();
    policy.n_value_heads = r.i32();
    policy_opt = read_adam(r);
    std::string kind = r.str();
    if (kind != bonus->kind())
        throw std::invalid_argument("snapshot: bonus kind mismatch (snapshot has " + kind +
                                    ", config wants " + bonus->kind() + ")");
    bonus->load(r);
    act_rng.restore_state(r.str());
    update_rng.restore_state(r.str());
    bonus_shuffle_rng.restore_state(r.str());
    cur_obs = r.mat();
    cur_state.resize(r.u64());
    for (auto& s : cur_state) s = r.i32();
    visited.clear();
    uint64_t nv = r.u64();
    for (uint64_t i = 0; i < nv; ++i) visited.insert(r.i32());
}

void save_snapshot_file(const Trainer& t, const std::string& path) {
    BinWriter w;
    t.save(w);
    write_file(path, w.data());
}

void load_snapshot_file(Trainer& t, const std::string& path) {
    BinReader r(read_file(path));
    t.load(r);
    if (!r.at_end()) throw SerializeError("snapshot: trailing bytes in " + path);
}

namespace {

struct RunFiles {
    std::ofstream log;
    std::ofstream timing;

    RunFiles(const ExperimentConfig& cfg) {
        std::filesystem::create_directories(cfg.out_dir);
        write_resolved_config(cfg, cfg.out_dir + "/config.resolved");
        std::string hash_line = "# config_hash=" + hash_hex(config_hash(cfg)) + "\n";
        log.open(cfg.out_dir + "/run.csv");
        timing.open(cfg.out_dir + "/run.timing.csv");
        if (!log || !timing)
            throw std::runtime_error("run_training: cannot write into " + cfg.out_dir);
        log << hash_line << log_header() << "\n" << std::flush;
        timing << hash_line << "update,wall_ms\n" << std::flush;
    }

    void append(const LogRow& row, double wall_ms) {
        log << format_log_row(row) << "\n" << std::flush;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%d,%.3f", row.update, wall_ms);
        timing << buf << "\n" << std::flush;
    }
};

TrainResult drive(Trainer& trainer, RunFiles& files) {
    const ExperimentConfig& cfg = trainer.cfg;
    std::string snap_path = cfg.out_dir + "/snapshot.bin";
    BinWriter last_good;
    trainer.save(last_good);

    TrainResult result;
    using clock = std::chrono::steady_clock;
    while (trainer.update_index < cfg.updates) {
        auto t0 = clock::now();
        try {
            LogRow row = trainer.run_update();
            double wall_ms =
                std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            files.append(row, wall_ms);
        } catch (const NumericError& e) {
            write_file(snap_path, last_good.take());
            result.aborted = true;
            result.error = e.what();
            break;
        }
        last_good = BinWriter();
        trainer.save(last_good);
        if (cfg.snapshot_interval > 0 && trainer.update_index % cfg.snapshot_interval == 0)
            write_file(snap_path, last_good.data());
    }
    if (!result.aborted) write_file(snap_path, last_good.data());

    result.updates_done = trainer.update_index;
    result.frames = trainer.frames;
    result.goal_count = trainer.goal_count;
    result.best_ep_return = trainer.best_ep_return;
    return result;
}

}  // namespace

TrainResult run_training(const ExperimentConfig& cfg, std::unique_ptr<BonusModel> injected) {
    Trainer trainer(cfg, std::move(injected));
    RunFiles files(trainer.cfg);
    return drive(trainer, files);
}

TrainResult resume_training(const ExperimentConfig& cfg, const std::string& snapshot_path) {
    Trainer trainer(cfg);
    load_snapshot_file(trainer, snapshot_path);
    RunFiles files(trainer.cfg);
    return drive(trainer, files);
}

}  // namespace rndkit
