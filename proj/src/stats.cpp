#include "rndkit/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rndkit/serialize.hpp"

namespace rndkit {

double RunningMeanStd::stddev(int i) const { return std::sqrt(var(i)); }

void rms_update(RunningMeanStd& rms, const Mat& batch) {
    if (batch.cols != rms.dim())
        throw ShapeError("rms_update: batch has " + std::to_string(batch.cols) +
                         " cols, accumulator has " + std::to_string(rms.dim()));
    if (batch.rows == 0) return;

    double n_b = batch.rows;
    for (int j = 0; j < batch.cols; ++j) {
        double mean_b = 0.0;
        for (int i = 0; i < batch.rows; ++i) mean_b += batch(i, j);
        mean_b /= n_b;
        double m2_b = 0.0;
        for (int i = 0; i < batch.rows; ++i) {
            double d = batch(i, j) - mean_b;
            m2_b += d * d;
        }
        // Chan et al. parallel merge of (count, mean, M2) pairs.
        double delta = mean_b - rms.mean[j];
        double tot = rms.count + n_b;
        rms.mean[j] += delta * n_b / tot;
        rms.m2[j] += m2_b + delta * delta * rms.count * n_b / tot;
    }
    rms.count += n_b;
}

void rms_update(RunningMeanStd& rms, const Vec& single) {
    Mat m(1, static_cast<int>(single.size()));
    m.a = single;
    rms_update(rms, m);
}

Vec normalize_obs(const RunningMeanStd& rms, const Vec& x) {
    if (rms.count <= 0) throw InvalidStateError("normalize_obs: no data seen yet");
    if (static_cast<int>(x.size()) != rms.dim())
        throw ShapeError("normalize_obs: dimension mismatch");
    Vec z(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double s = rms.stddev(static_cast<int>(i));
        double v = (x[i] - rms.mean[i]) / (s + kSigmaEps);
        z[i] = std::clamp(v, -kObsClip, kObsClip);
    }
    return z;
}

Mat normalize_obs(const RunningMeanStd& rms, const Mat& batch) {
    if (rms.count <= 0) throw InvalidStateError("normalize_obs: no data seen yet");
    if (batch.cols != rms.dim()) throw ShapeError("normalize_obs: dimension mismatch");
    Mat z(batch.rows, batch.cols);
    for (int j = 0; j < batch.cols; ++j) {
        double s = rms.stddev(j) + kSigmaEps;
        double mu = rms.mean[j];
        for (int i = 0; i < batch.rows; ++i)
            z(i, j) = std::clamp((batch(i, j) - mu) / s, -kObsClip, kObsClip);
    }
    return z;
}

void ReturnNormalizer::update(const Vec& i_step) {
    if (i_step.size() != accum.size())
        throw ShapeError("ReturnNormalizer::update: expected one reward per env");
    for (size_t e = 0; e < accum.size(); ++e) {
        accum[e] = gamma * accum[e] + i_step[e];
        rms_update(rms, Vec{accum[e]});
    }
}

double ReturnNormalizer::return_std() const {
    if (rms.count <= 0) return 0.0;
    if (centered) return rms.stddev(0);
    // RMS variant: sqrt(E[r-tilde^2]) = sqrt(var + mean^2)
    return std::sqrt(rms.var(0) + rms.mean[0] * rms.mean[0]);
}

double ReturnNormalizer::normalize_one(double i, bool* warmup) const {
    double s = return_std();
    if (s < 1e-12) {
        if (warmup) *warmup = true;
        return i;
    }
    if (warmup) *warmup = false;
    return i / s;
}

Vec ReturnNormalizer::normalize(const Vec& i_batch, bool* warmup) const {
    double s = return_std();
    if (s < 1e-12) {
        if (warmup) *warmup = true;
        return i_batch;
    }
    if (warmup) *warmup = false;
    Vec out(i_batch.size());
    for (size_t i = 0; i < i_batch.size(); ++i) out[i] = i_batch[i] / s;
    return out;
}

void write_rms(BinWriter& w, const RunningMeanStd& rms) {
    w.f64(rms.count);
    w.vec(rms.mean);
    w.vec(rms.m2);
}

RunningMeanStd read_rms(BinReader& r) {
    RunningMeanStd rms;
    rms.count = r.f64();
    rms.mean = r.vec();
    rms.m2 = r.vec();
    if (rms.mean.size() != rms.m2.size()) throw SerializeError("rms: mean/m2 size mismatch");
    return rms;
}

void write_retnorm(BinWriter& w, const ReturnNormalizer& rn) {
    w.f64(rn.gamma);
    w.vec(rn.accum);
    w.u8(rn.centered ? 1 : 0);
    write_rms(w, rn.rms);
}

ReturnNormalizer read_retnorm(BinReader& r) {
    ReturnNormalizer rn;
    rn.gamma = r.f64();
    rn.accum = r.vec();
    rn.centered = r.u8() != 0;
    rn.rms = read_rms(r);
    return rn;
}

}  // namespace rndkit
