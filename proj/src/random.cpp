#include "tailrisk/random.hpp"

#include <cmath>

namespace tailrisk {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

RandomStream RandomStream::substream(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(splitmix64(seed) ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL));
}

double RandomStream::uniform_open() {
    // 53-bit mantissa; redraw the single value that would give 0.
    for (;;) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::exponential() { return -std::log(uniform_open()); }

double RandomStream::gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
}

}  // namespace tailrisk
