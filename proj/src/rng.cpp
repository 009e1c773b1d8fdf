#include "nvsim/rng.hpp"

namespace nvsim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t c1 = ctr[1], c3 = ctr[3];
    ctr[0] = hi1 ^ c1 ^ k0;
    ctr[1] = lo1;
    ctr[2] = hi0 ^ c3 ^ k1;
    ctr[3] = lo0;
}

} // namespace

void CounterRng::refill() {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        0u, 0u,
    };
    std::uint32_t k0 = key_lo_, k1 = key_hi_;
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    ++counter_;
    buf_[0] = (static_cast<std::uint64_t>(ctr[0]) << 32) | ctr[1];
    buf_[1] = (static_cast<std::uint64_t>(ctr[2]) << 32) | ctr[3];
    have_ = 2;
}

std::uint64_t CounterRng::poisson(double mean) {
    std::uint64_t n = 0;
    // exp(mean) overflows double past ~700; draw in chunks of 500.
    while (mean > 500.0) {
        double acc = 0.0;
        std::uint64_t k = 0;
        const double chunk = 500.0;
        while (true) {
            acc += exponential(1.0);
            if (acc > chunk) break;
            ++k;
        }
        n += k;
        mean -= chunk;
    }
    const double limit = std::exp(-mean);
    double prod = uniform();
    while (prod > limit) {
        prod *= uniform();
        ++n;
    }
    return n;
}

} // namespace nvsim
