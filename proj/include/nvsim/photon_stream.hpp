#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nvsim {

/// Time is kept as integer picosecond ticks throughout; rate math happens in
/// double precision and is rounded to ticks when an event is recorded.
constexpr double kPsPerSecond = 1e12;
constexpr double kPsPerNs = 1e3;

/// A tagged stream of detection/emission timestamps.
/// timestamps are non-decreasing picosecond ticks in [0, duration_ps).
struct PhotonStream {
    std::vector<std::uint64_t> timestamps_ps;
    std::uint64_t duration_ps = 0;
    std::string label;

    std::size_t size() const { return timestamps_ps.size(); }
    double duration_s() const { return static_cast<double>(duration_ps) / kPsPerSecond; }

    /// Mean event rate in events per second.
    double rate_per_s() const {
        return duration_ps == 0 ? 0.0 : static_cast<double>(size()) / duration_s();
    }

    /// Throws std::invalid_argument if timestamps are unsorted, out of range,
    /// or the duration is zero while events exist.
    void validate() const;
};

/// Merge already-sorted streams into one sorted stream. Durations must match.
PhotonStream merge_streams(const std::vector<PhotonStream>& streams);

} // namespace nvsim
