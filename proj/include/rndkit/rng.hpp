#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rndkit {

/// Seedable 64-bit generator with stream splitting. Each component of a run
/// (env, init, shuffle, dropout, ...) owns an independent stream derived from
/// the root seed, so adding a consumer never perturbs the others.
///
/// All distributions are generated from raw engine words in-library, which
/// keeps sequences stable under one toolchain and makes the full state
/// serializable as (seed, engine state).
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(uint64_t seed);

    /// Derive an independent child stream. Deterministic in (seed, stream_id).
    Rng split(uint64_t stream_id) const;
    Rng split(std::string_view label) const;

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller; no cached spare, so state is just the engine.
    double normal();
    /// Uniform integer in [0, n). n must be positive.
    int randint(int n);
    bool bernoulli(double p);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(randint(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::string serialize_state() const;
    void restore_state(const std::string& s);

private:
    uint64_t seed_ = 0;
    std::mt19937_64 engine_;
};

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);

}  // namespace rndkit
