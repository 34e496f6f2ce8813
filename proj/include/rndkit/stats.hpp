#pragma once

#include <cstdint>
#include <vector>

#include "rndkit/matrix.hpp"

namespace rndkit {

class BinWriter;
class BinReader;

/// Streaming per-dimension mean/variance via a parallel Welford merge.
/// Variance is the population variance (divide by count).
struct RunningMeanStd {
    double count = 0.0;
    Vec mean;
    Vec m2;  // sum of squared deviations

    explicit RunningMeanStd(int dim = 0) : mean(dim, 0.0), m2(dim, 0.0) {}
    int dim() const { return static_cast<int>(mean.size()); }
    double var(int i) const { return count > 0 ? m2[i] / count : 0.0; }
    double stddev(int i) const;
};

/// Merge a batch of rows into the accumulator.
void rms_update(RunningMeanStd& rms, const Mat& batch);
void rms_update(RunningMeanStd& rms, const Vec& single);

/// Whiten and clip: clip((x - mean) / (std + 1e-8), -5, +5).
Vec normalize_obs(const RunningMeanStd& rms, const Vec& x);
Mat normalize_obs(const RunningMeanStd& rms, const Mat& batch);

constexpr double kObsClip = 5.0;
constexpr double kSigmaEps = 1e-8;

/// Scales intrinsic rewards by the running std of the discounted forward
/// return accumulator. One accumulator per environment; accumulators are
/// never reset at episode ends.
struct ReturnNormalizer {
    double gamma = 0.99;
    std::vector<double> accum;  // r-tilde per environment
    RunningMeanStd rms;         // scalar stats over accumulator samples
    bool centered = true;       // false: RMS of r-tilde instead of centered std

    ReturnNormalizer() : rms(1) {}
    ReturnNormalizer(int num_envs, double gamma_i, bool centered_std = true)
        : gamma(gamma_i), accum(num_envs, 0.0), rms(1), centered(centered_std) {}

    /// Fold one step of intrinsic rewards (one value per env) into the
    /// accumulators and the std estimate.
    void update(const Vec& i_step);

    double return_std() const;

    /// i / sigma_R. When sigma_R is still ~0 the inputs pass through
    /// unscaled and *warmup is set.
    Vec normalize(const Vec& i_batch, bool* warmup = nullptr) const;
    double normalize_one(double i, bool* warmup = nullptr) const;
};

void write_rms(BinWriter& w, const RunningMeanStd& rms);
RunningMeanStd read_rms(BinReader& r);
void write_retnorm(BinWriter& w, const ReturnNormalizer& rn);
ReturnNormalizer read_retnorm(BinReader& r);

}  // namespace rndkit
