// Command-line front end: config-driven training plus the two measurement
// experiments (novelty curve, noisy-tv contrast) and a curve checker.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "rndkit/config.hpp"
#include "rndkit/data.hpp"
#include "rndkit/noisytv.hpp"
#include "rndkit/serialize.hpp"
#include "rndkit/trainer.hpp"

namespace {

using namespace rndkit;
namespace fs = std::filesystem;

// exit codes double as error categories
constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kBadConfig = 2;
constexpr int kIoFailure = 3;
constexpr int kCheckFailed = 4;

struct CurveFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fs::filesystem_error("cannot write", path, std::error_code());
    out << text;
    out.flush();
    if (!out) throw fs::filesystem_error("write failed", path, std::error_code());
}

struct CommonFlags {
    std::string config_path;
    uint64_t seed = 0;
    std::string out_dir;
    int64_t frames = 0;
    std::string bonus;
    bool has_seed = false, has_out = false, has_frames = false, has_bonus = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool with_overrides) {
    cmd->add_option("--config", f.config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out_dir, "output directory (overrides run.out_dir)");
    if (!with_overrides) return;
    cmd->add_option("--seed", f.seed, "seed override");
    cmd->add_option("--frames", f.frames, "frame budget; updates = ceil(frames / (K*E))")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--bonus", f.bonus, "bonus override")
        ->check(CLI::IsMember({"rnd", "dynamics", "autoencoder", "count", "none"}));
}

ExperimentConfig load_with_overrides(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg = load_config_file(f.config_path);
    if (cmd->count("--seed")) cfg.seed = f.seed;
    if (cmd->count("--out")) cfg.out_dir = f.out_dir;
    if (cmd->count("--bonus")) cfg.bonus_kind = f.bonus;
    if (cmd->count("--frames")) {
        int64_t per_update = static_cast<int64_t>(cfg.rollout_len) * cfg.num_envs;
        cfg.updates = static_cast<int>((f.frames + per_update - 1) / per_update);
    }
    return cfg;
}

int report_run(const TrainResult& res, const std::string& out_dir) {
    if (res.aborted) {
        std::fprintf(stderr, "training aborted after %d updates: %s\n", res.updates_done,
                     res.error.c_str());
        std::fprintf(stderr, "snapshot of the last completed update kept in %s\n",
                     out_dir.c_str());
        return kRuntimeFailure;
    }
    std::printf("updates=%d frames=%lld goals=%lld best_return=%.6g\n", res.updates_done,
                static_cast<long long>(res.frames), static_cast<long long>(res.goal_count),
                res.best_ep_return);
    std::printf("outputs in %s (run.csv, config.resolved, snapshot.bin)\n", out_dir.c_str());
    return kOk;
}

int cmd_train(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg = load_with_overrides(cmd, f);
    return report_run(run_training(cfg), cfg.out_dir);
}

int cmd_replay_snapshot(const CLI::App* cmd, const CommonFlags& f,
                        const std::string& snapshot_path) {
    ExperimentConfig cfg = load_with_overrides(cmd, f);
    return report_run(resume_training(cfg, snapshot_path), cfg.out_dir);
}

int cmd_novelty(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg = load_with_overrides(cmd, f);
    resolve_config(cfg);
    validate_config(cfg);
    std::vector<uint64_t> seeds = cfg.novelty_seeds;
    if (cmd->count("--seed")) seeds = {f.seed};
    if (seeds.empty()) throw std::invalid_argument("novelty: needs at least one seed");

    bool use_idx = !cfg.mnist_dir.empty() && idx_dataset_present(cfg.mnist_dir);
    std::string dataset_kind = use_idx ? "mnist-idx" : "synthetic";
    LabeledDataset idx_ds;
    if (use_idx) idx_ds = load_idx_dataset(cfg.mnist_dir);

    int max_n = *std::max_element(cfg.novelty.n_values.begin(), cfg.novelty.n_values.end());
    auto synth_for = [&](uint64_t seed) {
        std::vector<int> per_class(10, 5);
        per_class[0] = cfg.novelty.total_train;
        per_class[cfg.novelty.target_class] =
            std::max(per_class[cfg.novelty.target_class], max_n);
        return synthetic_dataset(seed, per_class, cfg.novelty.max_test);
    };

    std::string csv = "n,test_mse,seed\n";
    char line[128];
    int negatives = 0;
    LabeledDataset synth_ds;
    for (uint64_t seed : seeds) {
        if (!use_idx) synth_ds = synth_for(seed);
        const LabeledDataset& ds = use_idx ? idx_ds : synth_ds;
        NoveltyCurve curve = novelty_experiment(ds, cfg.novelty, seed);
        Vec logn, mse;
        for (const auto& p : curve.points) {
            std::snprintf(line, sizeof line, "%d,%.10g,%llu\n", p.n, p.test_mse,
                          static_cast<unsigned long long>(p.seed));
            csv += line;
            logn.push_back(std::log(static_cast<double>(std::max(p.n, 1))));
            mse.push_back(p.test_mse);
        }
        double rho = spearman(logn, mse);
        if (rho < 0.0) ++negatives;
        std::printf("seed=%llu dataset=%s spearman=%+.4f\n",
                    static_cast<unsigned long long>(seed), dataset_kind.c_str(), rho);
    }

    fs::create_directories(cfg.out_dir);
    std::string curve_path = cfg.out_dir + "/curve.csv";
    write_text_file(curve_path, csv);
    nlohmann::json meta;
    meta["config_hash"] = hash_hex(config_hash(cfg));
    meta["dataset"] = dataset_kind;
    meta["seeds"] = seeds;
    meta["n_values"] = cfg.novelty.n_values;
    write_text_file(cfg.out_dir + "/curve.meta.json", meta.dump(2) + "\n");

    std::printf("decreasing in %d of %zu seeds; wrote %s\n", negatives, seeds.size(),
                curve_path.c_str());
    return kOk;
}

struct CurveRow {
    int n = 0;
    double test_mse = 0.0;
    uint64_t seed = 0;
};

std::vector<CurveRow> parse_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CurveFileError("curve file: cannot open " + path);
    std::string line;
    bool saw_header = false;
    std::vector<CurveRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "n,test_mse,seed")
                throw CurveFileError("curve file: expected header n,test_mse,seed, got \"" +
                                     line + "\"");
            saw_header = true;
            continue;
        }
        CurveRow r;
        char extra;
        unsigned long long s = 0;
        if (std::sscanf(line.c_str(), "%d,%lf,%llu%c", &r.n, &r.test_mse, &s, &extra) != 3)
            throw CurveFileError("curve file: malformed row \"" + line + "\"");
        r.seed = s;
        rows.push_back(r);
    }
    if (!saw_header) throw CurveFileError("curve file: no header found in " + path);
    if (rows.empty()) throw CurveFileError("curve file: no data rows in " + path);
    return rows;
}

int cmd_check(const std::string& curve_path) {
    auto rows = parse_curve_csv(curve_path);
    std::vector<uint64_t> order;
    for (const auto& r : rows)
        if (std::find(order.begin(), order.end(), r.seed) == order.end())
            order.push_back(r.seed);

    int negatives = 0;
    for (uint64_t seed : order) {
        Vec logn, mse;
        for (const auto& r : rows) {
            if (r.seed != seed) continue;
            logn.push_back(std::log(static_cast<double>(std::max(r.n, 1))));
            mse.push_back(r.test_mse);
        }
        if (logn.size() < 3)
            throw CurveFileError("curve file: seed " + std::to_string(seed) +
                                 " has fewer than 3 points");
        double rho = spearman(logn, mse);
        if (rho < 0.0) ++negatives;
        std::printf("seed=%llu spearman=%+.4f\n", static_cast<unsigned long long>(seed), rho);
    }
    int total = static_cast<int>(order.size());
    int needed = (4 * total + 4) / 5;  // ceil(0.8 * seeds)
    bool pass = negatives >= needed;
    std::printf("novelty check: error decreases with n in %d of %d seeds (need %d) -> %s\n",
                negatives, total, needed, pass ? "PASS" : "FAIL");
    return pass ? kOk : kCheckFailed;
}

int cmd_noisytv(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg = load_with_overrides(cmd, f);
    NoisyTvReport report = run_noisytv_contrast(cfg);
    std::fputs(noisytv_report_text(report).c_str(), stdout);
    fs::create_directories(cfg.out_dir);
    std::string csv_path = cfg.out_dir + "/noisytv.csv";
    write_text_file(csv_path, noisytv_report_csv(report));
    std::printf("wrote %s\n", csv_path.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exploration-bonus toolkit: corridor training runs and bonus diagnostics"};
    app.require_subcommand(1);

    CommonFlags train_f, replay_f, novelty_f, noisytv_f;
    std::string snapshot_path, curve_path = "out/curve.csv";

    CLI::App* train = app.add_subcommand("train", "run training from a config");
    add_common_flags(train, train_f, true);

    CLI::App* replay =
        app.add_subcommand("replay-snapshot", "resume a snapshotted run to completion");
    add_common_flags(replay, replay_f, true);
    replay->add_option("--snapshot", snapshot_path, "snapshot.bin to resume from")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* novelty =
        app.add_subcommand("novelty", "train predictors at varying target-class counts");
    add_common_flags(novelty, novelty_f, true);

    CLI::App* check = app.add_subcommand("check", "verify a novelty curve trends downward");
    check->add_option("--curve", curve_path, "curve.csv produced by the novelty command")
        ->check(CLI::ExistingFile);

    CLI::App* noisytv =
        app.add_subcommand("noisytv", "bonus contrast between a noisy tile and its frozen copy");
    add_common_flags(noisytv, noisytv_f, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kBadConfig;
    }

    try {
        if (train->parsed()) return cmd_train(train, train_f);
        if (replay->parsed()) return cmd_replay_snapshot(replay, replay_f, snapshot_path);
        if (novelty->parsed()) return cmd_novelty(novelty, novelty_f);
        if (check->parsed()) return cmd_check(curve_path);
        if (noisytv->parsed()) return cmd_noisytv(noisytv, noisytv_f);
    } catch (const CurveFileError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIoFailure;
    } catch (const IdxError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIoFailure;
    } catch (const SerializeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIoFailure;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIoFailure;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBadConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeFailure;
    }
    return kOk;
}
