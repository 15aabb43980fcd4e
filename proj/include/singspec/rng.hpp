#pragma once

#include <cmath>
#include <cstdint>

namespace singspec {

// Counter-based stream: output_i = mix(key + i*GAMMA). Streams keyed by
// (seed, replicate_id) are independent and order-independent, so replicates
// can run on any worker in any order and still reproduce bit-for-bit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t key) : state_(key) {}

    SplitMix64(std::uint64_t seed, std::uint64_t stream) : state_(derive_key(seed, stream)) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0,1), never exactly 0 or 1.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
        z = (z ^ (z >> 29)) * 0xFF51AFD7ED558CCDULL;
        z = (z ^ (z >> 32)) * 0xC4CEB9FE1A85EC53ULL;
        return z ^ (z >> 29);
    }

private:
    std::uint64_t state_;
};

/// Standard normal variates via Box-Muller on a SplitMix64 stream.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t key) : rng_(key) {}
    GaussianStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform01();
        const double u2 = rng_.uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    SplitMix64& raw() { return rng_; }

private:
    SplitMix64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace singspec
