#pragma once

#include <cstdint>
#include <vector>

#include "nvsim/g2_curve.hpp"
#include "nvsim/photon_stream.hpp"

namespace nvsim::correlate {

/// Delay axis: bins [tau_min + i*w, tau_min + (i+1)*w), i = 0..nbins-1.
/// tau_max is rounded up to a whole number of bins if needed.
struct CorrelationWindow {
    std::int64_t bin_width_ps = 1000;
    std::int64_t tau_min_ps = -200000;
    std::int64_t tau_max_ps = 200000;

    std::size_t bin_count() const;
    std::int64_t effective_tau_max_ps() const {
        return tau_min_ps + static_cast<std::int64_t>(bin_count()) * bin_width_ps;
    }
    void validate() const;

    bool operator==(const CorrelationWindow&) const = default;
};

enum class HistogramMode { all_pairs, tac_start_stop };

/// Raw coincidence histogram plus the bookkeeping needed to normalize it.
struct CoincidenceHistogram {
    CorrelationWindow window;
    std::vector<std::uint64_t> counts;
    double acquisition_s = 0.0;
    double rate1_per_s = 0.0; // raw click rate on the start channel
    double rate2_per_s = 0.0; // raw click rate on the stop channel
    HistogramMode mode = HistogramMode::all_pairs;

    double bin_center_ns(std::size_t i) const {
        return (static_cast<double>(window.tau_min_ps) +
                (static_cast<double>(i) + 0.5) * static_cast<double>(window.bin_width_ps)) /
               kPsPerNs;
    }
    std::uint64_t total_counts() const;
};

/// Exact delay histogram over every ordered pair (t1 in starts, t2 in stops)
/// with t2 - t1 inside the window. Single linear merge pass; with threads > 1
/// the start stream is chunked and partial histograms are summed, which is
/// bit-identical to the sequential result. Passing the same stream object as
/// both inputs computes the autocorrelation (self-pairs excluded).
CoincidenceHistogram pair_histogram(const PhotonStream& starts, const PhotonStream& stops,
                                    const CorrelationWindow& window, int threads = 1);

/// Start-stop time-to-amplitude converter emulation. The stop channel is
/// delayed by tac_delay_ps, so negative true delays down to -tac_delay are
/// recordable. Each accepted start converts on the first delayed stop; starts
/// arriving during a conversion are discarded; a conversion times out once
/// the recordable window has passed. Entry recorded at (stop delay - tac_delay).
CoincidenceHistogram tac_histogram(const PhotonStream& starts, const PhotonStream& stops,
                                   const CorrelationWindow& window,
                                   std::uint64_t tac_delay_ps);

/// Normalize counts to the uncorrelated-coincidence level:
/// C_N(tau) = c(tau) / (N1 * N2 * w * T). Poisson errors, with empty bins
/// assigned the one-count error floor. Throws when a rate or T is zero.
G2Curve normalize(const CoincidenceHistogram& histogram);

/// Remove a Poissonian background admixture with signal fraction
/// rho = S / (S + B):  g2 = (C_N - (1 - rho^2)) / rho^2.
/// Requires a raw-normalized curve and 0 < rho <= 1.
G2Curve background_correct(const G2Curve& curve, double rho);

struct ZeroDelayEstimate {
    double value = 0.0;
    double sigma = 0.0;
};

/// Curve value at tau = 0: the average of the two bins adjacent to zero
/// (bin edges are expected to land on zero), or the single nearest bin when
/// zero touches the edge of the delay range. Throws if zero is outside it.
ZeroDelayEstimate zero_delay_value(const G2Curve& curve);

} // namespace nvsim::correlate
