// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line with its wall time. Run everything or a
// single check with --criterion N.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rndkit/agent.hpp"
#include "rndkit/baselines.hpp"
#include "rndkit/config.hpp"
#include "rndkit/data.hpp"
#include "rndkit/densenet.hpp"
#include "rndkit/matrix.hpp"
#include "rndkit/noisytv.hpp"
#include "rndkit/rng.hpp"
#include "rndkit/serialize.hpp"
#include "rndkit/stats.hpp"
#include "rndkit/trainer.hpp"

using namespace rndkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

char scratch[512];

std::string fmt(const char* f, ...) {
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(scratch, sizeof scratch, f, ap);
    va_end(ap);
    return scratch;
}

// ---------------------------------------------------------------- 1: gradients

double coeff_loss(const Mat& y, const Mat& c) {
    double s = 0.0;
    for (size_t i = 0; i < y.a.size(); ++i) s += y.a[i] * c.a[i];
    return s;
}

double rel_err(double got, double want) {
    double denom = std::max({std::fabs(got), std::fabs(want), 1e-8});
    return std::fabs(got - want) / denom;
}

Outcome check_gradients() {
    Rng rng(2718);
    std::vector<std::vector<int>> shapes = {{3, 5, 2}, {4, 4}, {2, 6, 6, 3}, {7, 3, 5}};
    std::vector<HiddenAct> hacts = {HiddenAct::ReLU, HiddenAct::LeakyReLU};
    std::vector<OutputAct> oacts = {OutputAct::Identity, OutputAct::Sigmoid};
    const double h = 1e-5;
    double worst = 0.0;
    int cases = 0;

    for (int trial = 0; trial < 56; ++trial) {
        auto sizes = shapes[trial % shapes.size()];
        auto net = init_dense_net(sizes, trial % 2 ? InitScheme::Orthogonal : InitScheme::ScaledUniform,
                                  5000 + trial, hacts[(trial / 4) % 2], oacts[(trial / 8) % 2]);
        int batch = 1 + trial % 3;
        Mat x(batch, sizes.front());
        // keep inputs away from ReLU kinks so central differences stay valid
        for (auto& v : x.a) v = rng.uniform(-1.5, 1.5) + 0.3;
        Mat c(batch, sizes.back());
        for (auto& v : c.a) v = rng.uniform(-1.0, 1.0);

        ForwardCache cache;
        forward(net, x, &cache);
        auto g = backward(net, cache, c);

        auto fd_of = [&](auto&& poke) {
            DenseNet n2 = net;
            poke(n2, +h);
            double up = coeff_loss(forward(n2, x), c);
            DenseNet n3 = net;
            poke(n3, -h);
            double down = coeff_loss(forward(n3, x), c);
            return (up - down) / (2 * h);
        };
        for (int l = 0; l < net.num_layers(); ++l) {
            const Mat& w = net.weights[l];
            for (int i = 0; i < w.rows; ++i)
                for (int j = 0; j < w.cols; ++j) {
                    double fd = fd_of([&](DenseNet& n, double d) { n.weights[l](i, j) += d; });
                    worst = std::max(worst, rel_err(g.dW[l](i, j), fd));
                }
            for (size_t i = 0; i < net.biases[l].size(); ++i) {
                double fd = fd_of([&](DenseNet& n, double d) { n.biases[l][i] += d; });
                worst = std::max(worst, rel_err(g.db[l][i], fd));
            }
        }
        for (int r = 0; r < x.rows; ++r)
            for (int col = 0; col < x.cols; ++col) {
                Mat x2 = x;
                x2(r, col) += h;
                double up = coeff_loss(forward(net, x2), c);
                x2(r, col) -= 2 * h;
                double down = coeff_loss(forward(net, x2), c);
                worst = std::max(worst, rel_err(g.dX(r, col), (up - down) / (2 * h)));
            }
        ++cases;
    }
    bool pass = cases >= 50 && worst < 1e-4;
    return {pass, fmt("backward vs central differences: max rel err %.3g over %d nets", worst,
                      cases)};
}

// ---------------------------------------------------------- 2: gae oracle

Vec brute_force_returns(const Vec& rewards, const std::vector<int>& dones, double gamma,
                        double bootstrap) {
    int K = static_cast<int>(rewards.size());
    Vec ret(K, 0.0);
    for (int t = 0; t < K; ++t) {
        double g = 1.0, sum = 0.0;
        bool ended = false;
        for (int u = t; u < K; ++u) {
            sum += g * rewards[u];
            if (dones[u]) {
                ended = true;
                break;
            }
            g *= gamma;
        }
        if (!ended) sum += g * bootstrap;
        ret[t] = sum;
    }
    return ret;
}

Outcome check_gae_oracle() {
    Rng rng(40404);
    const int K = 20;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Vec rewards(K);
        std::vector<int> dones(K, 0);
        for (int t = 0; t < K; ++t) {
            rewards[t] = rng.uniform(-1.0, 1.0);
            dones[t] = rng.uniform() < 0.2 ? 1 : 0;
        }
        double gamma = 0.9 + 0.0999 * rng.uniform();
        double boot = rng.uniform(-2.0, 2.0);
        Mat r(K, 1), v(K, 1), d(K, 1);
        for (int t = 0; t < K; ++t) {
            r(t, 0) = rewards[t];
            d(t, 0) = dones[t];
        }
        auto out = compute_gae(r, v, Vec{boot}, d, StreamSpec{gamma, 1.0, true, 1.0});
        Vec want = brute_force_returns(rewards, dones, gamma, boot);
        for (int t = 0; t < K; ++t) worst = std::max(worst, std::fabs(out.returns(t, 0) - want[t]));
    }
    if (worst >= 1e-10)
        return {false, fmt("lambda=1 episodic returns drifted from discounted sums by %.3g", worst)};

    // hand-built mid-episode done: episodic must cut the tail, non-episodic must not
    int K2 = 6;
    Mat r(K2, 1), v(K2, 1), d(K2, 1);
    Rng rng2(5);
    for (int t = 0; t < K2; ++t) {
        r(t, 0) = rng2.uniform(0.0, 1.0);
        v(t, 0) = rng2.uniform(-1.0, 1.0);
    }
    d(3, 0) = 1.0;
    auto epi = compute_gae(r, v, Vec{1.7}, d, StreamSpec{0.99, 0.95, true, 1.0});
    auto non = compute_gae(r, v, Vec{1.7}, d, StreamSpec{0.99, 0.95, false, 1.0});
    bool mask_ok = std::fabs(epi.advantages(3, 0) - (r(3, 0) - v(3, 0))) < 1e-12;
    double delta = r(3, 0) + 0.99 * v(4, 0) - v(3, 0);
    mask_ok = mask_ok &&
              std::fabs(non.advantages(3, 0) - (delta + 0.99 * 0.95 * non.advantages(4, 0))) < 1e-12;
    for (int t = 0; t <= 3; ++t) mask_ok = mask_ok && epi.advantages(t, 0) != non.advantages(t, 0);
    for (int t = 4; t < K2; ++t)
        mask_ok = mask_ok && std::fabs(epi.advantages(t, 0) - non.advantages(t, 0)) < 1e-12;
    if (!mask_ok) return {false, "episodic/non-episodic done masking disagrees with hand values"};
    return {true, fmt("100 random trajectories match discounted sums (max err %.2g); done masks ok",
                      worst)};
}

// --------------------------------------------- 3: return decomposition

Outcome check_return_decomposition() {
    Rng rng(909);
    const int K = 20, E = 3;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        double gamma = 0.9 + 0.0999 * rng.uniform();
        double lam = 0.8 + 0.2 * rng.uniform();
        StreamSpec spec{gamma, lam, true, 1.0};
        Mat re(K, E), ri(K, E), ve(K, E), vi(K, E), d(K, E), rsum(K, E), vsum(K, E);
        Vec be(E), bi(E), bsum(E);
        for (int t = 0; t < K; ++t)
            for (int e = 0; e < E; ++e) {
                re(t, e) = rng.uniform(-1.0, 1.0);
                ri(t, e) = rng.uniform(0.0, 1.0);
                ve(t, e) = rng.normal();
                vi(t, e) = rng.normal();
                d(t, e) = rng.uniform() < 0.2 ? 1.0 : 0.0;
                rsum(t, e) = re(t, e) + ri(t, e);
                vsum(t, e) = ve(t, e) + vi(t, e);
            }
        for (int e = 0; e < E; ++e) {
            be[e] = rng.normal();
            bi[e] = rng.normal();
            bsum[e] = be[e] + bi[e];
        }
        auto ge = compute_gae(re, ve, be, d, spec);
        auto gi = compute_gae(ri, vi, bi, d, spec);
        auto gs = compute_gae(rsum, vsum, bsum, d, spec);
        for (size_t i = 0; i < gs.returns.a.size(); ++i)
            worst = std::max(worst,
                             std::fabs(gs.returns.a[i] - (ge.returns.a[i] + gi.returns.a[i])));
    }
    bool pass = worst < 1e-10;
    return {pass, fmt("summed-stream returns equal R_E + R_I per timestep (max err %.2g, 50 "
                      "trajectory batches)",
                      worst)};
}

// ----------------------------------------------------- 4: novelty curve

std::string mnist_dir() {
    const char* env = std::getenv("MNIST_DIR");
    if (env && *env) return env;
    return "data/mnist";
}

Outcome check_novelty_curve() {
    NoveltyConfig nc;  // library defaults: n in {10,100,1000,5000}, 800 train steps
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    int max_n = *std::max_element(nc.n_values.begin(), nc.n_values.end());

    auto negatives_on = [&](std::function<LabeledDataset(uint64_t)> make_ds) {
        int neg = 0;
        for (uint64_t seed : seeds) {
            LabeledDataset ds = make_ds(seed);
            NoveltyCurve curve = novelty_experiment(ds, nc, seed);
            Vec logn, mse;
            for (const auto& p : curve.points) {
                logn.push_back(std::log(static_cast<double>(p.n)));
                mse.push_back(p.test_mse);
            }
            if (spearman(logn, mse) < 0.0) ++neg;
        }
        return neg;
    };

    std::vector<int> per_class(10, 5);
    per_class[0] = nc.total_train;
    per_class[nc.target_class] = std::max(per_class[nc.target_class], max_n);
    int neg_synth = negatives_on(
        [&](uint64_t seed) { return synthetic_dataset(seed, per_class, nc.max_test); });

    std::string detail = fmt("synthetic: error falls with n in %d/5 seeds", neg_synth);
    bool pass = neg_synth >= 4;

    if (idx_dataset_present(mnist_dir())) {
        LabeledDataset idx_ds = load_idx_dataset(mnist_dir());
        int neg_idx = negatives_on([&](uint64_t) { return idx_ds; });
        detail += fmt("; mnist idx: %d/5 seeds", neg_idx);
        pass = pass && neg_idx >= 4;
    } else {
        detail += "; no idx files found, synthetic fallback only";
    }
    return {pass, detail};
}

// ------------------------------------------------ 5: noisy-tv contrast

Outcome check_noisytv() {
    ExperimentConfig cfg;
    cfg.env.num_rooms = 2;
    cfg.env.room_width = 5;
    cfg.env.noisy_room = 1;
    cfg.env.d_noise = 1;
    cfg.env.sticky_prob = 0.0;
    cfg.embedding_dim = 8;
    cfg.target_hidden = {16};
    cfg.predictor_hidden = {32, 32};
    cfg.bonus_learning_rate = 3e-3;
    cfg.noisytv.replay_pool_steps = 4096;
    cfg.noisytv.train_steps = 30000;
    cfg.noisytv.batch_size = 128;
    cfg.noisytv.seeds = {1, 2, 3};
    cfg.noisytv.run_agents = false;

    NoisyTvReport rep = run_noisytv_contrast(cfg);
    bool pass = true;
    std::string detail = "rnd ratios";
    for (const auto& t : rep.rnd) {
        pass = pass && t.ratio() >= 0.5 && t.ratio() <= 2.0;
        detail += fmt(" %.2f", t.ratio());
    }
    detail += " (need [0.5,2]); dynamics ratios";
    for (const auto& t : rep.dynamics) {
        pass = pass && t.ratio() >= 5.0;
        detail += fmt(" %.0f", t.ratio());
    }
    detail += " (need >=5)";
    return {pass, detail};
}

// ------------------------------------------------- 6: exploration win

int corridor_goal_seeds(const ExperimentConfig& base, const std::string& bonus_kind,
                        const std::vector<uint64_t>& seeds) {
    int wins = 0;
    for (uint64_t seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.seed = seed;
        cfg.bonus_kind = bonus_kind;
        Trainer t(cfg);
        for (int u = 0; u < cfg.updates && t.goal_count == 0; ++u) t.run_update();
        if (t.goal_count > 0) ++wins;
    }
    return wins;
}

Outcome check_exploration_win() {
    ExperimentConfig cfg;
    cfg.env.num_rooms = 10;
    cfg.env.room_width = 10;
    cfg.env.d_noise = 0;
    cfg.env.sticky_prob = 0.0;
    cfg.env.max_episode_steps = 200;
    cfg.rollout_len = 128;
    cfg.num_envs = 16;
    cfg.updates = 97;  // 97 * 128 * 16 = 198656 frames < 200k
    cfg.learning_rate = 1e-3;
    cfg.bonus_learning_rate = 1e-3;
    cfg.policy_hidden = {64, 64};
    cfg.embedding_dim = 32;
    cfg.target_hidden = {64};
    cfg.predictor_hidden = {64, 64};

    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int rnd_wins = corridor_goal_seeds(cfg, "rnd", seeds);
    int none_wins = corridor_goal_seeds(cfg, "none", seeds);
    bool pass = rnd_wins >= 5 && none_wins <= 1;
    return {pass, fmt("goal within 200k frames: rnd %d/10 seeds (need >=5), plain ppo %d/10 "
                      "(need <=1)",
                      rnd_wins, none_wins)};
}

// ------------------------------------------- 7: normalization contracts

Outcome check_normalization() {
    Rng rng(515);
    // clipping holds for arbitrary inputs, including degenerate dimensions
    RunningMeanStd rms(6);
    Mat warm(32, 6);
    for (int r = 0; r < warm.rows; ++r)
        for (int c = 0; c < warm.cols; ++c)
            warm(r, c) = c == 5 ? 3.0 : rng.normal() * (c + 1);  // dim 5 constant
    rms_update(rms, warm);
    double worst_abs = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Vec x(6);
        for (auto& v : x) v = rng.uniform(-1e6, 1e6);
        Vec y = normalize_obs(rms, x);
        for (double v : y) worst_abs = std::max(worst_abs, std::fabs(v));
    }
    if (worst_abs > 5.0) return {false, fmt("normalize_obs escaped [-5,5]: |y| = %.3g", worst_abs)};

    // welford vs two-pass on random batch partitions
    const int N = 2000, D = 8;
    Mat all(N, D);
    for (auto& v : all.a) v = rng.uniform(-3.0, 3.0) * (1 + rng.uniform());
    RunningMeanStd acc(D);
    int row = 0;
    while (row < N) {
        int take = std::min(N - row, 1 + static_cast<int>(rng.randint(64)));
        Mat batch(take, D);
        for (int r = 0; r < take; ++r)
            for (int c = 0; c < D; ++c) batch(r, c) = all(row + r, c);
        rms_update(acc, batch);
        row += take;
    }
    double worst_rel = 0.0;
    for (int c = 0; c < D; ++c) {
        double mean = 0.0;
        for (int r = 0; r < N; ++r) mean += all(r, c);
        mean /= N;
        double var = 0.0;
        for (int r = 0; r < N; ++r) var += (all(r, c) - mean) * (all(r, c) - mean);
        var /= N;
        worst_rel = std::max(worst_rel, rel_err(acc.mean[c], mean));
        worst_rel = std::max(worst_rel, rel_err(acc.var(c), var));
    }
    if (worst_rel > 1e-9)
        return {false, fmt("welford drifted from two-pass moments by %.3g relative", worst_rel)};

    // stationary bonus stream: normalized intrinsic returns settle near unit std
    const int E = 4;
    ReturnNormalizer rn(E, 0.99);
    RunningMeanStd normed(1);
    for (int step = 0; step < 10000; ++step) {
        Vec i_step(E);
        for (auto& v : i_step) v = 0.5 + rng.uniform();  // stationary positive bonuses
        rn.update(i_step);
        if (step >= 5000)
            for (int e = 0; e < E; ++e) rms_update(normed, Vec{rn.accum[e] / rn.return_std()});
    }
    double ret_std = normed.stddev(0);
    if (ret_std < 0.5 || ret_std > 2.0)
        return {false, fmt("normalized intrinsic-return std %.3f outside [0.5,2]", ret_std)};
    return {true, fmt("clip bound %.3g, welford rel err %.2g, normalized return std %.3f",
                      worst_abs, worst_rel, ret_std)};
}

// ------------------------------------------------ 8: count bonus values

Outcome check_count_bonus() {
    CountTable table;
    table.form = CountForm::InverseSqrtN;
    Vec got;
    for (int visit = 0; visit < 4; ++visit) {
        record_visit(table, 7);
        got.push_back(count_bonus(table, 7));
    }
    Vec want = {1.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(3.0), 0.5};
    for (int i = 0; i < 4; ++i)
        if (got[i] != want[i])
            return {false, fmt("visit %d gave %.17g, want %.17g", i + 1, got[i], want[i])};
    return {true, "visit sequence yields exactly 1, 1/sqrt(2), 1/sqrt(3), 1/2"};
}

// --------------------------------------- 9: determinism and snapshot

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> data_rows(const std::string& text) {
    std::vector<std::string> rows;
    std::stringstream ss(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        rows.push_back(line);
    }
    return rows;
}

Outcome check_determinism() {
    ExperimentConfig cfg;
    cfg.updates = 6;
    cfg.seed = 17;
    cfg.snapshot_interval = 3;
    cfg.rollout_len = 32;
    cfg.num_envs = 8;
    cfg.epochs = 2;
    cfg.minibatches = 2;
    cfg.learning_rate = 1e-3;
    cfg.bonus_learning_rate = 1e-3;
    cfg.policy_hidden = {32};
    cfg.embedding_dim = 8;
    cfg.target_hidden = {16};
    cfg.predictor_hidden = {16, 16};
    cfg.warmup_steps = 16;
    cfg.env.num_rooms = 3;
    cfg.env.room_width = 6;
    cfg.env.d_noise = 0;

    fs::path root = fs::temp_directory_path() / "acceptance_det";
    fs::remove_all(root);
    cfg.out_dir = (root / "a").string();

    run_training(cfg);
    std::string log1 = slurp(root / "a" / "run.csv");
    std::string snap1 = slurp(root / "a" / "snapshot.bin");
    fs::remove_all(root / "a");
    run_training(cfg);
    std::string log2 = slurp(root / "a" / "run.csv");
    std::string snap2 = slurp(root / "a" / "snapshot.bin");
    if (log1.empty() || log1 != log2) return {false, "repeated seeded runs produced different run.csv"};
    if (snap1 != snap2) return {false, "repeated seeded runs produced different snapshot.bin"};

    // interrupted at update 3, resumed to 6: tail rows must match byte for byte
    ExperimentConfig half = cfg;
    half.updates = 3;
    half.out_dir = (root / "half").string();
    run_training(half);
    ExperimentConfig fin = cfg;
    fin.out_dir = (root / "resumed").string();
    resume_training(fin, (root / "half" / "snapshot.bin").string());
    auto full_rows = data_rows(log1);
    auto tail_rows = data_rows(slurp(root / "resumed" / "run.csv"));
    if (full_rows.size() != 6 || tail_rows.size() != 3)
        return {false, fmt("expected 6 full and 3 resumed rows, got %zu and %zu", full_rows.size(),
                           tail_rows.size())};
    for (int i = 0; i < 3; ++i)
        if (full_rows[3 + i] != tail_rows[i])
            return {false, fmt("resumed row %d diverged from the uninterrupted run", i + 4)};
    fs::remove_all(root);
    return {true, "reruns byte-identical; resume-from-snapshot matches uninterrupted tail"};
}

// ------------------------------------------------------ 10: idx parser

std::vector<uint8_t> bytes_of(std::initializer_list<int> xs) {
    std::vector<uint8_t> out;
    for (int x : xs) out.push_back(static_cast<uint8_t>(x));
    return out;
}

Outcome check_idx_parser() {
    // standard 4-file layout
    fs::path dir = fs::temp_directory_path() / "acceptance_idx";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto write_images = [&](const std::string& name, int n, uint8_t base) {
        IdxTensor t;
        t.dtype = kIdxUbyte;
        t.dims = {static_cast<uint32_t>(n), 28, 28};
        for (int i = 0; i < n * 28 * 28; ++i) t.data.push_back((base + i) % 256);
        write_file((dir / name).string(), encode_idx(t));
    };
    auto write_labels = [&](const std::string& name, const std::vector<double>& ys) {
        IdxTensor t;
        t.dtype = kIdxUbyte;
        t.dims = {static_cast<uint32_t>(ys.size())};
        t.data = ys;
        write_file((dir / name).string(), encode_idx(t));
    };
    write_images("train-images-idx3-ubyte", 6, 10);
    write_labels("train-labels-idx1-ubyte", {0, 1, 2, 3, 4, 5});
    write_images("t10k-images-idx3-ubyte", 4, 200);
    write_labels("t10k-labels-idx1-ubyte", {5, 4, 3, 2});
    bool layout_ok = idx_dataset_present(dir.string());
    LabeledDataset ds = load_idx_dataset(dir.string());
    layout_ok = layout_ok && ds.train_x.rows == 6 && ds.train_x.cols == 28 * 28 &&
                ds.test_x.rows == 4 && ds.train_y == std::vector<int>{0, 1, 2, 3, 4, 5} &&
                ds.test_y == std::vector<int>{5, 4, 3, 2} &&
                std::fabs(ds.train_x(0, 0) - 10.0 / 255.0) < 1e-12;
    fs::remove_all(dir);
    if (!layout_ok) return {false, "four-file layout did not decode to the expected dataset"};

    // crafted malformed inputs, each with the right typed error
    struct Bad {
        const char* name;
        std::vector<uint8_t> bytes;
        IdxError::Kind kind;
    };
    std::vector<Bad> bads = {
        {"empty", {}, IdxError::Kind::TruncatedHeader},
        {"three-byte stub", bytes_of({0, 0, 0x08}), IdxError::Kind::TruncatedHeader},
        {"nonzero first magic byte", bytes_of({1, 0, 0x08, 1, 0, 0, 0, 1, 5}),
         IdxError::Kind::BadMagic},
        {"nonzero second magic byte", bytes_of({0, 7, 0x08, 1, 0, 0, 0, 1, 5}),
         IdxError::Kind::BadMagic},
        {"signed-byte dtype", bytes_of({0, 0, 0x09, 1, 0, 0, 0, 1, 5}),
         IdxError::Kind::UnsupportedDtype},
        {"int32 dtype", bytes_of({0, 0, 0x0C, 1, 0, 0, 0, 1, 0, 0, 0, 5}),
         IdxError::Kind::UnsupportedDtype},
        {"missing dim words", bytes_of({0, 0, 0x08, 2, 0, 0, 0, 2}),
         IdxError::Kind::TruncatedHeader},
        {"payload cut short", bytes_of({0, 0, 0x08, 2, 0, 0, 0, 2, 0, 0, 0, 2, 10, 11, 12}),
         IdxError::Kind::DataSizeMismatch},
        {"trailing bytes", bytes_of({0, 0, 0x08, 1, 0, 0, 0, 2, 5, 6, 7}),
         IdxError::Kind::DataSizeMismatch},
        {"dim product overflow", bytes_of({0, 0, 0x08, 2, 0, 1, 0, 0, 0, 1, 0, 0}),
         IdxError::Kind::DimOverflow},
    };
    int rejected = 0;
    for (const auto& b : bads) {
        try {
            parse_idx(b.bytes);
            return {false, fmt("malformed input \"%s\" was accepted", b.name)};
        } catch (const IdxError& e) {
            if (e.kind != b.kind)
                return {false, fmt("malformed input \"%s\" raised the wrong error kind", b.name)};
            ++rejected;
        }
    }

    // round trips: canonical bytes survive, random tensors survive
    auto vec_bytes = bytes_of({0, 0, 0x08, 1, 0, 0, 0, 3, 7, 2, 9});
    bool rt_ok = encode_idx(parse_idx(vec_bytes)) == vec_bytes;
    Rng rng(808);
    for (int trial = 0; trial < 40 && rt_ok; ++trial) {
        IdxTensor t;
        t.dtype = trial % 2 ? kIdxFloat : kIdxUbyte;
        int nd = 1 + static_cast<int>(rng.randint(3));
        size_t total = 1;
        for (int i = 0; i < nd; ++i) {
            uint32_t dim = 1 + static_cast<uint32_t>(rng.randint(4));
            t.dims.push_back(dim);
            total *= dim;
        }
        for (size_t i = 0; i < total; ++i)
            t.data.push_back(t.dtype == kIdxUbyte
                                 ? static_cast<double>(rng.randint(256))
                                 : static_cast<double>(static_cast<float>(rng.normal())));
        auto enc = encode_idx(t);
        IdxTensor back = parse_idx(enc);
        rt_ok = back.dtype == t.dtype && back.dims == t.dims && back.data == t.data &&
                encode_idx(back) == enc;
    }
    if (!rt_ok) return {false, "idx round trip lost information"};
    return {true, fmt("4-file layout decodes; %d malformed inputs rejected with typed errors; "
                      "round trips lossless",
                      rejected)};
}

// --------------------------------------------------------------- driver

struct Criterion {
    int number;
    const char* name;
    double budget_sec;
    Outcome (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }

    std::vector<Criterion> criteria = {
        {1, "gradient correctness", 30, check_gradients},
        {2, "gae oracle equivalence", 5, check_gae_oracle},
        {3, "return decomposition", 5, check_return_decomposition},
        {4, "novelty curve", 300, check_novelty_curve},
        {5, "noisy-tv separation", 300, check_noisytv},
        {6, "exploration win", 1200, check_exploration_win},
        {7, "normalization contracts", 30, check_normalization},
        {8, "count-bonus exactness", 1, check_count_bonus},
        {9, "determinism and snapshot", 120, check_determinism},
        {10, "idx parser", 5, check_idx_parser},
    };

    int failures = 0, ran = 0;
    for (const auto& c : criteria) {
        if (only && c.number != only) continue;
        ++ran;
        auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out = {false, std::string("unexpected exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_budget = secs < c.budget_sec;
        bool pass = out.pass && in_budget;
        std::printf("criterion %2d: %s (%.1fs)  %s%s\n", c.number, pass ? "PASS" : "FAIL", secs,
                    out.detail.c_str(),
                    in_budget ? "" : fmt(" [over %.0fs budget]", c.budget_sec).c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (!ran) {
        std::fprintf(stderr, "no such criterion\n");
        return 2;
    }
    if (only == 0)
        std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
