#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mcsim {

// Raised when an operation needs state that has not been prepared yet
// (untrained model, non-warm CQI history, missing artifact).
class NotReadyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoFeasibleClusterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// SplitMix64 step; used to derive independent substream seeds from one
// run seed so that adding a consumer never perturbs the other streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// mt19937_64 plus explicit variate transforms. The transforms are written
// out (instead of std::*_distribution) so that a given seed produces the
// same trace on every standard library.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1).
    double uniform01() {
        return (engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Box-Muller, one value per call (the pair's second half is discarded
    // to keep the draw count predictable).
    double normal(double mean = 0.0, double sigma = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * M_PI * u2);
    }

    // Exponential with mean 1.
    double exponential1() {
        return -std::log1p(-uniform01());
    }

    bool bernoulli(double p) { return uniform01() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Small-scale power fading as a dB offset. diversity = 1 is Rayleigh
// (exponential scale, mean 1); higher orders average that many exponential
// draws (Nakagami-m style), thinning the deep-fade tail the way diversity
// combining does.
inline double fading_db(Random& rng, int diversity) {
    double sum = 0.0;
    for (int i = 0; i < diversity; ++i) sum += rng.exponential1();
    double e = sum / diversity;
    if (e <= 0.0) return -400.0;
    return linear_to_db(e);
}

inline double rayleigh_fading_db(Random& rng) { return fading_db(rng, 1); }

}  // namespace mcsim
