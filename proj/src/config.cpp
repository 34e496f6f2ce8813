#include "rndkit/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rndkit/rng.hpp"

namespace rndkit {

using nlohmann::json;

double resolved_keep_prob(const ExperimentConfig& cfg) {
    if (cfg.keep_prob >= 0.0) return cfg.keep_prob;
    return std::min(1.0, 32.0 / cfg.num_envs);
}

void resolve_config(ExperimentConfig& cfg) { cfg.keep_prob = resolved_keep_prob(cfg); }

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("config: " + field + " " + why);
}

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) bad_field(field, why);
}

void check_hidden(const std::vector<int>& hidden, const std::string& field) {
    for (int h : hidden) require(h > 0, field, "layers must be positive");
}

template <typename T>
T get_as(const json& j, const std::string& section, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        bad_field(section + "." + key, "has the wrong type");
    }
}

/// Overlay one section of user JSON onto defaults, rejecting unknown keys.
struct Section {
    const json& j;
    std::string name;
    std::set<std::string> seen;

    bool has(const std::string& key) {
        seen.insert(key);
        return j.contains(key);
    }
    template <typename T>
    void take(const std::string& key, T& into) {
        if (has(key)) into = get_as<T>(j.at(key), name, key);
    }
    void finish() {
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!seen.count(it.key()))
                bad_field(name + "." + it.key(), "is not a recognized setting");
    }
};

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    require(cfg.updates >= 1, "run.updates", "must be >= 1");
    require(cfg.snapshot_interval >= 0, "run.snapshot_interval", "must be >= 0");
    require(!cfg.out_dir.empty(), "run.out_dir", "must be set");

    require(cfg.rollout_len >= 1, "ppo.rollout_len", "must be >= 1");
    require(cfg.num_envs >= 1, "ppo.num_envs", "must be >= 1");
    require(cfg.epochs >= 1, "ppo.epochs", "must be >= 1");
    require(cfg.minibatches >= 1, "ppo.minibatches", "must be >= 1");
    require(cfg.minibatches <= cfg.rollout_len * cfg.num_envs, "ppo.minibatches",
            "cannot exceed samples per rollout");
    require(cfg.gamma_e > 0.0 && cfg.gamma_e <= 1.0, "ppo.gamma_e", "must be in (0, 1]");
    require(cfg.gamma_i > 0.0 && cfg.gamma_i <= 1.0, "ppo.gamma_i", "must be in (0, 1]");
    require(cfg.lambda >= 0.0 && cfg.lambda <= 1.0, "ppo.lambda", "must be in [0, 1]");
    require(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0, "ppo.clip_eps", "must be in (0, 1)");
    require(cfg.entropy_coef >= 0.0, "ppo.entropy_coef", "must be >= 0");
    require(cfg.value_coef > 0.0, "ppo.value_coef", "must be > 0");
    require(cfg.learning_rate > 0.0, "ppo.learning_rate", "must be > 0");
    require(cfg.c_e >= 0.0, "ppo.c_e", "must be >= 0");
    require(cfg.c_i >= 0.0, "ppo.c_i", "must be >= 0");
    check_hidden(cfg.policy_hidden, "ppo.policy_hidden");

    static const std::set<std::string> kKinds = {"rnd", "dynamics", "autoencoder", "count",
                                                 "none"};
    require(kKinds.count(cfg.bonus_kind) > 0, "bonus.kind",
            "must be one of rnd|dynamics|autoencoder|count|none");
    require(cfg.embedding_dim >= 1, "bonus.embedding_dim", "must be >= 1");
    check_hidden(cfg.target_hidden, "bonus.target_hidden");
    check_hidden(cfg.predictor_hidden, "bonus.predictor_hidden");
    require(cfg.bonus_learning_rate > 0.0, "bonus.learning_rate", "must be > 0");
    double kp = resolved_keep_prob(cfg);
    require(kp > 0.0 && kp <= 1.0, "bonus.keep_prob", "must resolve into (0, 1]");
    require(cfg.warmup_steps >= 1, "bonus.warmup_steps", "must be >= 1");
    require(cfg.count_form == "inverse_n" || cfg.count_form == "inverse_sqrt",
            "bonus.count_form", "must be inverse_n or inverse_sqrt");

    require(cfg.env.num_rooms >= 1, "env.rooms", "must be >= 1");
    require(cfg.env.room_width >= 2, "env.width", "must be >= 2");
    require(cfg.env.d_noise >= 0, "env.noise_dims", "must be >= 0");
    require(cfg.env.noisy_room >= -1 && cfg.env.noisy_room < cfg.env.num_rooms,
            "env.noisy_room", "must be -1 or a valid room index");
    require(cfg.env.noisy_room < 0 || cfg.env.d_noise > 0, "env.noise_dims",
            "must be positive when a noisy room is set");
    require(cfg.env.sticky_prob >= 0.0 && cfg.env.sticky_prob < 1.0, "env.sticky_prob",
            "must be in [0, 1)");
    require(cfg.env.max_episode_steps >= 0, "env.max_episode_steps", "must be >= 0");

    require(!cfg.novelty.n_values.empty(), "novelty.n_values", "must not be empty");
    for (size_t i = 0; i < cfg.novelty.n_values.size(); ++i) {
        require(cfg.novelty.n_values[i] >= 0, "novelty.n_values", "must be non-negative");
        if (i > 0)
            require(cfg.novelty.n_values[i] > cfg.novelty.n_values[i - 1], "novelty.n_values",
                    "must be strictly increasing");
    }
    require(cfg.novelty.target_class >= 0, "novelty.target_class", "must be >= 0");
    require(cfg.novelty.total_train >= 1, "novelty.total_train", "must be >= 1");
    require(cfg.novelty.n_values.back() <= cfg.novelty.total_train, "novelty.n_values",
            "cannot exceed total_train");
    require(cfg.novelty.embedding_dim >= 1, "novelty.embedding_dim", "must be >= 1");
    check_hidden(cfg.novelty.target_hidden, "novelty.target_hidden");
    check_hidden(cfg.novelty.predictor_hidden, "novelty.predictor_hidden");
    require(cfg.novelty.train_steps >= 1, "novelty.train_steps", "must be >= 1");
    require(cfg.novelty.batch_size >= 1, "novelty.batch_size", "must be >= 1");
    require(cfg.novelty.learning_rate > 0.0, "novelty.learning_rate", "must be > 0");
    require(cfg.novelty.max_test >= 1, "novelty.max_test", "must be >= 1");
    require(!cfg.novelty_seeds.empty(), "novelty.seeds", "must not be empty");

    require(cfg.noisytv.replay_pool_steps >= 1, "noisytv.replay_pool_steps", "must be >= 1");
    require(cfg.noisytv.train_steps >= 1, "noisytv.train_steps", "must be >= 1");
    require(cfg.noisytv.batch_size >= 1, "noisytv.batch_size", "must be >= 1");
    require(!cfg.noisytv.seeds.empty(), "noisytv.seeds", "must not be empty");
    require(cfg.noisytv.agent_updates >= 1, "noisytv.agent_updates", "must be >= 1");
    require(!cfg.noisytv.agent_seeds.empty(), "noisytv.agent_seeds", "must not be empty");
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    ExperimentConfig cfg;
    static const std::set<std::string> kSections = {"run",     "ppo",     "bonus",
                                                    "env", "novelty", "noisytv"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "config_hash") continue;  // stamped into resolved configs
        if (!kSections.count(it.key()))
            bad_field(it.key(), "is not a recognized section");
    }

    if (j.contains("run")) {
        Section s{j.at("run"), "run", {}};
        s.take("updates", cfg.updates);
        s.take("seed", cfg.seed);
        s.take("out_dir", cfg.out_dir);
        s.take("snapshot_interval", cfg.snapshot_interval);
        s.finish();
    }
    if (j.contains("ppo")) {
        Section s{j.at("ppo"), "ppo", {}};
        s.take("rollout_len", cfg.rollout_len);
        s.take("num_envs", cfg.num_envs);
        s.take("epochs", cfg.epochs);
        s.take("minibatches", cfg.minibatches);
        s.take("gamma_e", cfg.gamma_e);
        s.take("gamma_i", cfg.gamma_i);
        s.take("lambda", cfg.lambda);
        s.take("clip_eps", cfg.clip_eps);
        s.take("entropy_coef", cfg.entropy_coef);
        s.take("value_coef", cfg.value_coef);
        s.take("learning_rate", cfg.learning_rate);
        s.take("c_e", cfg.c_e);
        s.take("c_i", cfg.c_i);
        s.take("episodic_ext", cfg.episodic_ext);
        s.take("episodic_int", cfg.episodic_int);
        s.take("normalize_adv", cfg.normalize_adv);
        s.take("policy_hidden", cfg.policy_hidden);
        s.take("two_value_heads", cfg.two_value_heads);
        s.finish();
    }
    if (j.contains("bonus")) {
        Section s{j.at("bonus"), "bonus", {}};
        s.take("kind", cfg.bonus_kind);
        s.take("embedding_dim", cfg.embedding_dim);
        s.take("target_hidden", cfg.target_hidden);
        s.take("predictor_hidden", cfg.predictor_hidden);
        s.take("learning_rate", cfg.bonus_learning_rate);
        s.take("keep_prob", cfg.keep_prob);
        s.take("warmup_steps", cfg.warmup_steps);
        s.take("freeze_obs_norm", cfg.freeze_obs_norm);
        s.take("centered_return_std", cfg.centered_return_std);
        s.take("count_form", cfg.count_form);
        s.finish();
    }
    if (j.contains("env")) {
        Section s{j.at("env"), "env", {}};
        s.take("rooms", cfg.env.num_rooms);
        s.take("width", cfg.env.room_width);
        s.take("noisy_room", cfg.env.noisy_room);
        s.take("noise_dims", cfg.env.d_noise);
        s.take("sticky_prob", cfg.env.sticky_prob);
        s.take("max_episode_steps", cfg.env.max_episode_steps);
        s.take("dense_shaping", cfg.dense_shaping);
        s.finish();
    }
    if (j.contains("novelty")) {
        Section s{j.at("novelty"), "novelty", {}};
        s.take("target_class", cfg.novelty.target_class);
        s.take("n_values", cfg.novelty.n_values);
        s.take("total_train", cfg.novelty.total_train);
        s.take("embedding_dim", cfg.novelty.embedding_dim);
        s.take("target_hidden", cfg.novelty.target_hidden);
        s.take("predictor_hidden", cfg.novelty.predictor_hidden);
        s.take("train_steps", cfg.novelty.train_steps);
        s.take("batch_size", cfg.novelty.batch_size);
        s.take("learning_rate", cfg.novelty.learning_rate);
        s.take("max_test", cfg.novelty.max_test);
        s.take("seeds", cfg.novelty_seeds);
        s.take("mnist_dir", cfg.mnist_dir);
        s.finish();
    }
    if (j.contains("noisytv")) {
        Section s{j.at("noisytv"), "noisytv", {}};
        s.take("replay_pool_steps", cfg.noisytv.replay_pool_steps);
        s.take("train_steps", cfg.noisytv.train_steps);
        s.take("batch_size", cfg.noisytv.batch_size);
        s.take("seeds", cfg.noisytv.seeds);
        s.take("agent_updates", cfg.noisytv.agent_updates);
        s.take("agent_seeds", cfg.noisytv.agent_seeds);
        s.take("run_agents", cfg.noisytv.run_agents);
        s.finish();
    }

    resolve_config(cfg);
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    j["run"] = {{"updates", cfg.updates},
                {"seed", cfg.seed},
                {"out_dir", cfg.out_dir},
                {"snapshot_interval", cfg.snapshot_interval}};
    j["ppo"] = {{"rollout_len", cfg.rollout_len},
                {"num_envs", cfg.num_envs},
                {"epochs", cfg.epochs},
                {"minibatches", cfg.minibatches},
                {"gamma_e", cfg.gamma_e},
                {"gamma_i", cfg.gamma_i},
                {"lambda", cfg.lambda},
                {"clip_eps", cfg.clip_eps},
                {"entropy_coef", cfg.entropy_coef},
                {"value_coef", cfg.value_coef},
                {"learning_rate", cfg.learning_rate},
                {"c_e", cfg.c_e},
                {"c_i", cfg.c_i},
                {"episodic_ext", cfg.episodic_ext},
                {"episodic_int", cfg.episodic_int},
                {"normalize_adv", cfg.normalize_adv},
                {"policy_hidden", cfg.policy_hidden},
                {"two_value_heads", cfg.two_value_heads}};
    j["bonus"] = {{"kind", cfg.bonus_kind},
                  {"embedding_dim", cfg.embedding_dim},
                  {"target_hidden", cfg.target_hidden},
                  {"predictor_hidden", cfg.predictor_hidden},
                  {"learning_rate", cfg.bonus_learning_rate},
                  {"keep_prob", resolved_keep_prob(cfg)},
                  {"warmup_steps", cfg.warmup_steps},
                  {"freeze_obs_norm", cfg.freeze_obs_norm},
                  {"centered_return_std", cfg.centered_return_std},
                  {"count_form", cfg.count_form}};
    j["env"] = {{"rooms", cfg.env.num_rooms},
                {"width", cfg.env.room_width},
                {"noisy_room", cfg.env.noisy_room},
                {"noise_dims", cfg.env.d_noise},
                {"sticky_prob", cfg.env.sticky_prob},
                {"max_episode_steps", cfg.env.max_episode_steps},
                {"dense_shaping", cfg.dense_shaping}};
    j["novelty"] = {{"target_class", cfg.novelty.target_class},
                    {"n_values", cfg.novelty.n_values},
                    {"total_train", cfg.novelty.total_train},
                    {"embedding_dim", cfg.novelty.embedding_dim},
                    {"target_hidden", cfg.novelty.target_hidden},
                    {"predictor_hidden", cfg.novelty.predictor_hidden},
                    {"train_steps", cfg.novelty.train_steps},
                    {"batch_size", cfg.novelty.batch_size},
                    {"learning_rate", cfg.novelty.learning_rate},
                    {"max_test", cfg.novelty.max_test},
                    {"seeds", cfg.novelty_seeds},
                    {"mnist_dir", cfg.mnist_dir}};
    j["noisytv"] = {
                    {"replay_pool_steps", cfg.noisytv.replay_pool_steps},
                    {"train_steps", cfg.noisytv.train_steps},
                    {"batch_size", cfg.noisytv.batch_size},
                    {"seeds", cfg.noisytv.seeds},
                    {"agent_updates", cfg.noisytv.agent_updates},
                    {"agent_seeds", cfg.noisytv.agent_seeds},
                    {"run_agents", cfg.noisytv.run_agents}};
    return j.dump(2);
}

uint64_t config_hash(const ExperimentConfig& cfg) {
    return fnv1a64(config_to_json_text(cfg));
}

std::string hash_hex(uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_resolved_config(const ExperimentConfig& cfg, const std::string& path) {
    json j = json::parse(config_to_json_text(cfg));
    j["config_hash"] = hash_hex(config_hash(cfg));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace rndkit
