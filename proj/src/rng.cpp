#include "rndkit/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rndkit {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

Rng::Rng(uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(uint64_t stream_id) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL)));
}

Rng Rng::split(std::string_view label) const { return split(fnv1a64(label)); }

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

int Rng::randint(int n) {
    if (n <= 0) throw std::invalid_argument("randint: n must be positive");
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<int>(x % un);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

std::string Rng::serialize_state() const {
    std::ostringstream os;
    os << seed_ << ' ' << engine_;
    return os.str();
}

void Rng::restore_state(const std::string& s) {
    std::istringstream is(s);
    is >> seed_ >> engine_;
    if (!is) throw std::runtime_error("Rng::restore_state: malformed state string");
}

}  // namespace rndkit
