#include "nvsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvsim/rng.hpp"

namespace nvsim::detection {

void DetectorConfig::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw std::invalid_argument("detector: efficiency must be in [0, 1]");
    if (!(dark_rate_per_s >= 0.0) || !std::isfinite(dark_rate_per_s))
        throw std::invalid_argument("detector: dark rate must be non-negative");
    if (!(jitter_sigma_ps >= 0.0) || !std::isfinite(jitter_sigma_ps))
        throw std::invalid_argument("detector: jitter sigma must be non-negative");
}

void HBTConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw std::invalid_argument("hbt: split ratio must be in (0, 1)");
    if (!(background_rate_per_s >= 0.0) || !std::isfinite(background_rate_per_s))
        throw std::invalid_argument("hbt: background rate must be non-negative");
}

PhotonStream thin(const PhotonStream& stream, double keep_probability, std::uint64_t seed) {
    if (!(keep_probability >= 0.0 && keep_probability <= 1.0))
        throw std::invalid_argument("thin: keep probability must be in [0, 1]");
    PhotonStream out;
    out.duration_ps = stream.duration_ps;
    out.label = stream.label;
    if (keep_probability == 1.0) {
        out.timestamps_ps = stream.timestamps_ps;
        return out;
    }
    if (keep_probability == 0.0) return out;
    CounterRng rng(seed);
    out.timestamps_ps.reserve(
        static_cast<std::size_t>(static_cast<double>(stream.size()) * keep_probability) + 16);
    for (std::uint64_t t : stream.timestamps_ps)
        if (rng.bernoulli(keep_probability)) out.timestamps_ps.push_back(t);
    return out;
}

PhotonStream add_poisson_events(const PhotonStream& stream, double rate_per_s,
                                std::uint64_t seed) {
    if (!(rate_per_s >= 0.0) || !std::isfinite(rate_per_s))
        throw std::invalid_argument("add_poisson_events: rate must be non-negative");
    if (rate_per_s == 0.0) return stream;

    CounterRng rng(seed);
    const double rate_per_ps = rate_per_s / kPsPerSecond;
    std::vector<std::uint64_t> extra;
    extra.reserve(static_cast<std::size_t>(
                      rate_per_s * static_cast<double>(stream.duration_ps) / kPsPerSecond) + 16);
    double t = 0.0;
    const auto duration = static_cast<double>(stream.duration_ps);
    while (true) {
        t += rng.exponential(rate_per_ps);
        if (t >= duration) break;
        extra.push_back(static_cast<std::uint64_t>(t));
    }

    PhotonStream out;
    out.duration_ps = stream.duration_ps;
    out.label = stream.label;
    out.timestamps_ps.resize(stream.size() + extra.size());
    std::merge(stream.timestamps_ps.begin(), stream.timestamps_ps.end(),
               extra.begin(), extra.end(), out.timestamps_ps.begin());
    return out;
}

HbtOutput beamsplit(const PhotonStream& stream, double split_ratio, std::uint64_t seed) {
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw std::invalid_argument("beamsplit: split ratio must be in (0, 1)");
    CounterRng rng(seed);
    HbtOutput out;
    out.detector1.duration_ps = out.detector2.duration_ps = stream.duration_ps;
    out.detector1.label = stream.label + ":arm1";
    out.detector2.label = stream.label + ":arm2";
    out.detector1.timestamps_ps.reserve(
        static_cast<std::size_t>(static_cast<double>(stream.size()) * split_ratio) + 16);
    out.detector2.timestamps_ps.reserve(
        static_cast<std::size_t>(static_cast<double>(stream.size()) * (1.0 - split_ratio)) + 16);
    for (std::uint64_t t : stream.timestamps_ps) {
        if (rng.bernoulli(split_ratio))
            out.detector1.timestamps_ps.push_back(t);
        else
            out.detector2.timestamps_ps.push_back(t);
    }
    return out;
}

PhotonStream apply_detector(const PhotonStream& stream, const DetectorConfig& config,
                            std::uint64_t seed) {
    config.validate();
    PhotonStream s = thin(stream, config.efficiency, derive_seed(seed, 1));
    s = add_poisson_events(s, config.dark_rate_per_s, derive_seed(seed, 2));

    if (config.jitter_sigma_ps > 0.0 && s.duration_ps > 0) {
        CounterRng rng(derive_seed(seed, 3));
        const auto last_tick = static_cast<double>(s.duration_ps - 1);
        for (auto& t : s.timestamps_ps) {
            const double shifted =
                static_cast<double>(t) + rng.gaussian() * config.jitter_sigma_ps;
            t = static_cast<std::uint64_t>(std::llround(std::clamp(shifted, 0.0, last_tick)));
        }
        std::sort(s.timestamps_ps.begin(), s.timestamps_ps.end());
    }

    if (config.dead_time_ps > 0 && !s.timestamps_ps.empty()) {
        std::vector<std::uint64_t> alive;
        alive.reserve(s.size());
        std::uint64_t last = 0;
        bool first = true;
        for (std::uint64_t t : s.timestamps_ps) {
            if (first || t >= last + config.dead_time_ps) {
                alive.push_back(t);
                last = t;
                first = false;
            }
        }
        s.timestamps_ps = std::move(alive);
    }
    return s;
}

HbtOutput run_hbt(const PhotonStream& emission, const HBTConfig& hbt,
                  const DetectorConfig& det1, const DetectorConfig& det2,
                  std::uint64_t seed) {
    hbt.validate();
    det1.validate();
    det2.validate();
    const PhotonStream collected =
        add_poisson_events(emission, hbt.background_rate_per_s, derive_seed(seed, 10));
    HbtOutput split = beamsplit(collected, hbt.split_ratio, derive_seed(seed, 11));
    HbtOutput out;
    out.detector1 = apply_detector(split.detector1, det1, derive_seed(seed, 12));
    out.detector2 = apply_detector(split.detector2, det2, derive_seed(seed, 13));
    out.detector1.label = "clicks:det1";
    out.detector2.label = "clicks:det2";
    return out;
}

} // namespace nvsim::detection
