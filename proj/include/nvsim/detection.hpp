#pragma once

#include <cstdint>

#include "nvsim/photon_stream.hpp"

namespace nvsim::detection {

/// Single-photon detector model, applied in this order:
/// efficiency thinning, dark-count injection, timing jitter (with re-sort),
/// non-paralyzable dead time.
struct DetectorConfig {
    double efficiency = 1.0;          // photon survival probability, [0, 1]
    std::uint64_t dead_time_ps = 50000;
    double dark_rate_per_s = 300.0;
    double jitter_sigma_ps = 0.0;     // 0 disables jitter

    void validate() const;

    bool operator==(const DetectorConfig&) const = default;
};

/// Hanbury Brown-Twiss front end: uncorrelated background light enters the
/// same collection path as the signal, then a beamsplitter routes photons to
/// the two detectors.
struct HBTConfig {
    double split_ratio = 0.5;         // probability of routing to detector 1
    double background_rate_per_s = 0.0;
    std::uint64_t tac_delay_ps = 50000; // electronic delay of the stop channel

    void validate() const;

    bool operator==(const HBTConfig&) const = default;
};

struct HbtOutput {
    PhotonStream detector1;
    PhotonStream detector2;
};

/// Keep each event independently with probability keep_probability.
PhotonStream thin(const PhotonStream& stream, double keep_probability, std::uint64_t seed);

/// Merge a homogeneous Poisson process of the given rate into the stream.
PhotonStream add_poisson_events(const PhotonStream& stream, double rate_per_s,
                                std::uint64_t seed);

/// Independently route each event to output 1 with probability split_ratio.
/// Every input event lands in exactly one output.
HbtOutput beamsplit(const PhotonStream& stream, double split_ratio, std::uint64_t seed);

/// Apply the full detector chain (see DetectorConfig).
PhotonStream apply_detector(const PhotonStream& stream, const DetectorConfig& config,
                            std::uint64_t seed);

/// Background injection, beamsplitter, and both detectors in one call.
/// Substreams for each stage derive deterministically from the seed.
HbtOutput run_hbt(const PhotonStream& emission, const HBTConfig& hbt,
                  const DetectorConfig& det1, const DetectorConfig& det2,
                  std::uint64_t seed);

} // namespace nvsim::detection
