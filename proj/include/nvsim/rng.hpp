#pragma once

#include <cstdint>
#include <cmath>

namespace nvsim {

/// SplitMix64 finalizer. Used for seed mixing and substream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive an independent substream seed from (master seed, stream index).
/// Trajectories, detector arms and sweep points each get their own index so
/// results do not depend on scheduling or evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Philox4x32-10 counter-based generator.
/// The output is a pure function of (key, counter), so identical seeds give
/// identical streams no matter how work is split across threads.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_lo_(static_cast<std::uint32_t>(seed)),
                                              key_hi_(static_cast<std::uint32_t>(seed >> 32)) {}

    std::uint64_t next_u64() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    /// Uniform double in the open interval (0, 1); never returns 0 or 1.
    double uniform() {
        const std::uint64_t x = next_u64();
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Exponential waiting time with the given rate (events per unit time).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Standard normal deviate (Box-Muller, pairs cached).
    double gaussian() {
        if (have_gauss_) {
            have_gauss_ = false;
            return cached_gauss_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_gauss_ = r * std::sin(a);
        have_gauss_ = true;
        return r * std::cos(a);
    }

    /// Poisson deviate. Exact multiplication method in chunks, so large means
    /// stay exact at the cost of O(mean) uniforms.
    std::uint64_t poisson(double mean);

private:
    void refill();

    std::uint32_t key_lo_, key_hi_;
    std::uint64_t counter_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int have_ = 0;
    double cached_gauss_ = 0.0;
    bool have_gauss_ = false;
};

} // namespace nvsim
