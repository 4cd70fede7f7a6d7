#pragma once

#include <cstdint>
#include <random>

namespace tailrisk {

/// Owned pseudo-random stream. One seed gives one reproducible sequence;
/// replication l of an experiment uses substream(seed, l), so the draws of a
/// replication never depend on which thread runs it or in what order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    static RandomStream substream(std::uint64_t seed, std::uint64_t index);

    /// Uniform on the open interval (0, 1).
    double uniform_open();
    double normal();
    double exponential();
    /// Gamma(shape, scale 1).
    double gamma(double shape);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tailrisk
