#include "nvsim/photon_stream.hpp"

#include <algorithm>
#include <stdexcept>

namespace nvsim {

void PhotonStream::validate() const {
    if (!timestamps_ps.empty() && duration_ps == 0)
        throw std::invalid_argument("photon stream has events but zero duration");
    std::uint64_t prev = 0;
    for (std::uint64_t t : timestamps_ps) {
        if (t < prev)
            throw std::invalid_argument("photon stream timestamps are not sorted");
        if (t >= duration_ps)
            throw std::invalid_argument("photon stream timestamp beyond duration");
        prev = t;
    }
}

PhotonStream merge_streams(const std::vector<PhotonStream>& streams) {
    if (streams.empty()) return {};
    PhotonStream out;
    out.duration_ps = streams.front().duration_ps;
    std::size_t total = 0;
    for (const auto& s : streams) {
        if (s.duration_ps != out.duration_ps)
            throw std::invalid_argument("merge_streams: durations differ");
        total += s.size();
    }
    out.timestamps_ps.reserve(total);
    for (const auto& s : streams) {
        const std::size_t mid = out.timestamps_ps.size();
        out.timestamps_ps.insert(out.timestamps_ps.end(),
                                 s.timestamps_ps.begin(), s.timestamps_ps.end());
        std::inplace_merge(out.timestamps_ps.begin(),
                           out.timestamps_ps.begin() + static_cast<std::ptrdiff_t>(mid),
                           out.timestamps_ps.end());
    }
    out.label = streams.front().label;
    return out;
}

} // namespace nvsim
