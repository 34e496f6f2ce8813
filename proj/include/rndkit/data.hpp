#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rndkit/matrix.hpp"

namespace rndkit {

struct IdxError : std::runtime_error {
    enum class Kind {
        BadMagic,
        UnsupportedDtype,
        TruncatedHeader,
        DataSizeMismatch,
        DimOverflow,
    };
    Kind kind;
    size_t offset;  // byte position where parsing failed

    IdxError(Kind k, size_t off, const std::string& msg)
        : std::runtime_error(msg), kind(k), offset(off) {}
};

constexpr uint8_t kIdxUbyte = 0x08;
constexpr uint8_t kIdxFloat = 0x0D;

/// Decoded IDX tensor. Values are held as doubles, which is lossless for
/// both supported dtypes; the dtype tag drives re-encoding.
struct IdxTensor {
    uint8_t dtype = kIdxUbyte;
    std::vector<uint32_t> dims;
    std::vector<double> data;

    size_t elements() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return n;
    }
};

IdxTensor parse_idx(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_idx(const IdxTensor& t);
IdxTensor load_idx_file(const std::string& path);

/// Labeled examples with pixel values scaled to [0,1].
struct LabeledDataset {
    Mat train_x;
    std::vector<int> train_y;
    Mat test_x;
    std::vector<int> test_y;
    int num_classes = 10;
};

/// Standard 4-file layout: train-images-idx3-ubyte, train-labels-idx1-ubyte,
/// t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte under dir.
LabeledDataset load_idx_dataset(const std::string& dir);
bool idx_dataset_present(const std::string& dir);

/// Gaussian class prototypes plus noise, clamped to [0,1]. per_class_train
/// gives the number of training examples generated for each class.
LabeledDataset synthetic_dataset(uint64_t seed, const std::vector<int>& per_class_train,
                                 int per_class_test, int dim = 784);

struct NoveltyConfig {
    int target_class = 1;
    std::vector<int> n_values = {10, 100, 1000, 5000};
    int total_train = 5000;
    int embedding_dim = 32;
    std::vector<int> target_hidden = {64};
    std::vector<int> predictor_hidden = {64, 64};
    int train_steps = 800;
    int batch_size = 64;
    double learning_rate = 1e-3;
    int max_test = 500;
};

struct NoveltyPoint {
    int n = 0;
    double test_mse = 0.0;
    uint64_t seed = 0;
};

struct NoveltyCurve {
    std::vector<NoveltyPoint> points;  // n strictly increasing
    uint64_t seed = 0;
    uint64_t config_hash = 0;
};

/// For each n, train a fresh predictor against a fresh frozen target on a
/// fixed-size mixture of n target-class and (total-n) class-0 examples, then
/// measure embedding MSE on held-out target-class examples.
NoveltyCurve novelty_experiment(const LabeledDataset& ds, const NoveltyConfig& cfg,
                                uint64_t seed);

/// Spearman rank correlation with average ranks on ties.
double spearman(const Vec& x, const Vec& y);

}  // namespace rndkit
