#include <algorithm>
#include <cmath>
#include <numeric>

#include "rndkit/data.hpp"
#include "rndkit/densenet.hpp"
#include "rndkit/rng.hpp"
#include "rndkit/stats.hpp"

namespace rndkit {

LabeledDataset synthetic_dataset(uint64_t seed, const std::vector<int>& per_class_train,
                                 int per_class_test, int dim) {
    int num_classes = static_cast<int>(per_class_train.size());
    if (num_classes < 2) throw std::invalid_argument("synthetic_dataset: need >= 2 classes");

    Rng root(seed);
    Mat protos(num_classes, dim);
    Rng prng = root.split("prototypes");
    for (auto& v : protos.a) v = prng.uniform();

    auto fill_split = [&](Mat& x, std::vector<int>& y, const std::vector<int>& counts,
                          Rng rng) {
        int total = std::accumulate(counts.begin(), counts.end(), 0);
        x = Mat(total, dim);
        y.resize(total);
        int row = 0;
        for (int c = 0; c < num_classes; ++c) {
            for (int i = 0; i < counts[c]; ++i, ++row) {
                y[row] = c;
                double* dst = x.row(row);
                const double* p = protos.row(c);
                for (int j = 0; j < dim; ++j)
                    dst[j] = std::clamp(p[j] + 0.15 * rng.normal(), 0.0, 1.0);
            }
        }
    };

    LabeledDataset ds;
    ds.num_classes = num_classes;
    fill_split(ds.train_x, ds.train_y, per_class_train, root.split("train"));
    fill_split(ds.test_x, ds.test_y, std::vector<int>(num_classes, per_class_test),
               root.split("test"));
    return ds;
}

double spearman(const Vec& x, const Vec& y) {
    size_t n = x.size();
    if (y.size() != n || n < 2) throw std::invalid_argument("spearman: need two equal series");

    auto ranks = [](const Vec& v) {
        size_t n = v.size();
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t(0));
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        Vec r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };

    Vec rx = ranks(x), ry = ranks(y);
    double mx = mean(rx), my = mean(ry);
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0.0 || dy == 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

namespace {

std::vector<int> class_indices(const std::vector<int>& labels, int cls) {
    std::vector<int> out;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> layer_list(int in_dim, const std::vector<int>& hidden, int out_dim) {
    std::vector<int> sizes{in_dim};
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(out_dim);
    return sizes;
}

}  // namespace

NoveltyCurve novelty_experiment(const LabeledDataset& ds, const NoveltyConfig& cfg,
                                uint64_t seed) {
    for (size_t i = 1; i < cfg.n_values.size(); ++i)
        if (cfg.n_values[i] <= cfg.n_values[i - 1])
            throw std::invalid_argument("novelty_experiment: n_values must be strictly increasing");

    int dim = ds.train_x.cols;
    std::vector<int> target_pool = class_indices(ds.train_y, cfg.target_class);
    std::vector<int> pad_pool = class_indices(ds.train_y, 0);
    std::vector<int> test_pool = class_indices(ds.test_y, cfg.target_class);
    if (test_pool.empty())
        throw std::invalid_argument("novelty_experiment: no held-out examples of class " +
                                    std::to_string(cfg.target_class));

    for (int n : cfg.n_values) {
        if (n > cfg.total_train)
            throw std::invalid_argument("novelty_experiment: n=" + std::to_string(n) +
                                        " exceeds total_train=" + std::to_string(cfg.total_train));
        if (n > static_cast<int>(target_pool.size()))
            throw std::invalid_argument(
                "novelty_experiment: n=" + std::to_string(n) + " requested but only " +
                std::to_string(target_pool.size()) + " examples of class " +
                std::to_string(cfg.target_class) + " available");
        if (cfg.total_train - n > static_cast<int>(pad_pool.size()))
            throw std::invalid_argument(
                "novelty_experiment: padding needs " + std::to_string(cfg.total_train - n) +
                " class-0 examples but only " + std::to_string(pad_pool.size()) + " available");
    }

    Rng root(seed);
    if (static_cast<int>(test_pool.size()) > cfg.max_test) test_pool.resize(cfg.max_test);
    Mat test_x = take_rows(ds.test_x, test_pool);

    NoveltyCurve curve;
    curve.seed = seed;

    for (int n : cfg.n_values) {
        Rng rng = root.split("n" + std::to_string(n));

        std::vector<int> tp = target_pool, pp = pad_pool;
        rng.split("pick-target").shuffle(tp);
        rng.split("pick-pad").shuffle(pp);
        std::vector<int> rows(tp.begin(), tp.begin() + n);
        rows.insert(rows.end(), pp.begin(), pp.begin() + (cfg.total_train - n));
        Mat train_x = take_rows(ds.train_x, rows);

        RunningMeanStd rms(dim);
        rms_update(rms, train_x);
        Mat z = normalize_obs(rms, train_x);

        DenseNet target = init_dense_net(
            layer_list(dim, cfg.target_hidden, cfg.embedding_dim), InitScheme::ScaledUniform,
            rng.split("target").seed(), HiddenAct::ReLU, OutputAct::Identity,
            /*trainable=*/false);
        DenseNet predictor =
            init_dense_net(layer_list(dim, cfg.predictor_hidden, cfg.embedding_dim),
                           InitScheme::ScaledUniform, rng.split("predictor").seed());
        AdamState opt = init_adam(predictor, cfg.learning_rate);

        // the target is frozen, so its embeddings can be computed once
        Mat emb = forward(target, z);

        Rng batch_rng = rng.split("batches");
        int k = cfg.embedding_dim;
        for (int step = 0; step < cfg.train_steps; ++step) {
            std::vector<int> mb(cfg.batch_size);
            for (auto& r : mb) r = static_cast<int>(batch_rng.randint(cfg.total_train));
            Mat zb = take_rows(z, mb);
            Mat tb = take_rows(emb, mb);
            ForwardCache cache;
            Mat pb = forward(predictor, zb, &cache);
            Mat dy(pb.rows, pb.cols);
            double scale = 1.0 / (static_cast<double>(pb.rows) * k);
            for (size_t i = 0; i < pb.a.size(); ++i) dy.a[i] = 2.0 * (pb.a[i] - tb.a[i]) * scale;
            auto g = backward(predictor, cache, dy);
            adam_step(opt, predictor, g);
        }

        Mat zt = normalize_obs(rms, test_x);
        Mat te = forward(target, zt);
        Mat pe = forward(predictor, zt);
        double mse = 0.0;
        for (size_t i = 0; i < te.a.size(); ++i) {
            double d = pe.a[i] - te.a[i];
            mse += d * d;
        }
        mse /= static_cast<double>(te.a.size());

        curve.points.push_back({n, mse, seed});
    }
    return curve;
}

}  // namespace rndkit
