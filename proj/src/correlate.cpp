#include "nvsim/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace nvsim::correlate {

std::size_t CorrelationWindow::bin_count() const {
    const std::int64_t span = tau_max_ps - tau_min_ps;
    return static_cast<std::size_t>((span + bin_width_ps - 1) / bin_width_ps);
}

void CorrelationWindow::validate() const {
    if (bin_width_ps <= 0)
        throw std::invalid_argument("correlation window: bin width must be positive");
    if (tau_max_ps <= tau_min_ps)
        throw std::invalid_argument("correlation window: tau_max must exceed tau_min");
}

std::uint64_t CoincidenceHistogram::total_counts() const {
    std::uint64_t sum = 0;
    for (std::uint64_t c : counts) sum += c;
    return sum;
}

namespace {

void check_inputs(const PhotonStream& a, const PhotonStream& b) {
    a.validate();
    b.validate();
    if (a.duration_ps != b.duration_ps)
        throw std::invalid_argument("correlate: stream durations differ");
    if (a.duration_ps == 0)
        throw std::invalid_argument("correlate: zero acquisition duration");
}

// Correlate starts[i0, i1) against all stops. Histogram added into counts.
void pair_scan(const std::vector<std::uint64_t>& starts,
               const std::vector<std::uint64_t>& stops,
               std::size_t i0, std::size_t i1, bool same_stream,
               std::int64_t tau_min, std::int64_t tau_max, std::int64_t width,
               std::vector<std::uint64_t>& counts) {
    std::size_t lo = 0;
    for (std::size_t i = i0; i < i1; ++i) {
        const auto t1 = static_cast<std::int64_t>(starts[i]);
        while (lo < stops.size() && static_cast<std::int64_t>(stops[lo]) < t1 + tau_min) ++lo;
        for (std::size_t j = lo; j < stops.size(); ++j) {
            const auto t2 = static_cast<std::int64_t>(stops[j]);
            if (t2 - t1 >= tau_max) break;
            if (same_stream && i == j) continue;
            counts[static_cast<std::size_t>((t2 - t1 - tau_min) / width)] += 1;
        }
    }
}

} // namespace

CoincidenceHistogram pair_histogram(const PhotonStream& starts, const PhotonStream& stops,
                                    const CorrelationWindow& window, int threads) {
    window.validate();
    check_inputs(starts, stops);
    const bool same_stream = &starts == &stops;

    CoincidenceHistogram hist;
    hist.window = window;
    hist.window.tau_max_ps = window.effective_tau_max_ps();
    hist.counts.assign(window.bin_count(), 0);
    hist.acquisition_s = starts.duration_s();
    hist.rate1_per_s = starts.rate_per_s();
    hist.rate2_per_s = stops.rate_per_s();
    hist.mode = HistogramMode::all_pairs;

    const std::int64_t tau_min = hist.window.tau_min_ps;
    const std::int64_t tau_max = hist.window.tau_max_ps;
    const std::int64_t width = hist.window.bin_width_ps;

    const std::size_t n = starts.size();
    if (n == 0 || stops.size() == 0) return hist;

    if (threads <= 1) {
        pair_scan(starts.timestamps_ps, stops.timestamps_ps, 0, n, same_stream,
                  tau_min, tau_max, width, hist.counts);
        return hist;
    }

    const auto nthreads = static_cast<std::size_t>(threads);
    std::vector<std::vector<std::uint64_t>> partial(
        nthreads, std::vector<std::uint64_t>(hist.counts.size(), 0));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t k = 0; k < nthreads; ++k) {
        const std::size_t i0 = n * k / nthreads;
        const std::size_t i1 = n * (k + 1) / nthreads;
        pool.emplace_back([&, i0, i1, k] {
            pair_scan(starts.timestamps_ps, stops.timestamps_ps, i0, i1, same_stream,
                      tau_min, tau_max, width, partial[k]);
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& p : partial)
        for (std::size_t b = 0; b < p.size(); ++b) hist.counts[b] += p[b];
    return hist;
}

CoincidenceHistogram tac_histogram(const PhotonStream& starts, const PhotonStream& stops,
                                   const CorrelationWindow& window,
                                   std::uint64_t tac_delay_ps) {
    window.validate();
    check_inputs(starts, stops);

    CoincidenceHistogram hist;
    hist.window = window;
    hist.window.tau_max_ps = window.effective_tau_max_ps();
    hist.counts.assign(window.bin_count(), 0);
    hist.acquisition_s = starts.duration_s();
    hist.rate1_per_s = starts.rate_per_s();
    hist.rate2_per_s = stops.rate_per_s();
    hist.mode = HistogramMode::tac_start_stop;

    const auto delay = static_cast<std::int64_t>(tac_delay_ps);
    const std::int64_t tau_min = hist.window.tau_min_ps;
    const std::int64_t tau_max = hist.window.tau_max_ps;
    const std::int64_t width = hist.window.bin_width_ps;
    // Conversion gives up once no stop could land inside the recordable axis.
    const std::int64_t conversion_window = tau_max + delay;
    if (conversion_window <= 0) return hist; // nothing recordable

    std::size_t j = 0;
    std::int64_t busy_until = -1;
    for (std::uint64_t ts : starts.timestamps_ps) {
        const auto t1 = static_cast<std::int64_t>(ts);
        if (t1 < busy_until) continue; // TAC still converting; start discarded
        while (j < stops.size() &&
               static_cast<std::int64_t>(stops.timestamps_ps[j]) + delay < t1)
            ++j;
        if (j == stops.size()) break;
        const std::int64_t arrival = static_cast<std::int64_t>(stops.timestamps_ps[j]) + delay;
        if (arrival - t1 >= conversion_window) {
            busy_until = t1 + conversion_window; // timed out, reset
            continue;
        }
        busy_until = arrival;
        const std::int64_t tau = arrival - t1 - delay;
        if (tau >= tau_min && tau < tau_max)
            hist.counts[static_cast<std::size_t>((tau - tau_min) / width)] += 1;
        ++j; // the stop pulse that ended this conversion is consumed
    }
    return hist;
}

G2Curve normalize(const CoincidenceHistogram& histogram) {
    if (!(histogram.rate1_per_s > 0.0) || !(histogram.rate2_per_s > 0.0))
        throw std::invalid_argument("normalize: zero click rate, normalization undefined");
    if (!(histogram.acquisition_s > 0.0))
        throw std::invalid_argument("normalize: zero acquisition time");

    const double w_s = static_cast<double>(histogram.window.bin_width_ps) / kPsPerSecond;
    const double level = histogram.rate1_per_s * histogram.rate2_per_s * w_s *
                         histogram.acquisition_s;

    G2Curve curve;
    curve.kind = G2Curve::Kind::raw_normalized;
    curve.delays_ns.resize(histogram.counts.size());
    curve.values.resize(histogram.counts.size());
    curve.sigma.resize(histogram.counts.size());
    for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
        const auto c = static_cast<double>(histogram.counts[i]);
        curve.delays_ns[i] = histogram.bin_center_ns(i);
        curve.values[i] = c / level;
        curve.sigma[i] = std::sqrt(std::max(c, 1.0)) / level;
    }
    return curve;
}

G2Curve background_correct(const G2Curve& curve, double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("background_correct: rho must be in (0, 1]");
    if (curve.kind != G2Curve::Kind::raw_normalized)
        throw std::invalid_argument("background_correct: expects a raw-normalized curve");

    G2Curve out;
    out.kind = G2Curve::Kind::background_corrected;
    out.delays_ns = curve.delays_ns;
    out.values.resize(curve.size());
    out.sigma.resize(curve.size());
    const double rho2 = rho * rho;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out.values[i] = (curve.values[i] - (1.0 - rho2)) / rho2;
        out.sigma[i] = curve.sigma[i] / rho2;
    }
    return out;
}

ZeroDelayEstimate zero_delay_value(const G2Curve& curve) {
    if (curve.size() == 0) throw std::invalid_argument("zero_delay_value: empty curve");
    const double half_w = curve.size() >= 2
                              ? 0.5 * (curve.delays_ns[1] - curve.delays_ns[0])
                              : std::abs(curve.delays_ns.front());
    if (curve.delays_ns.front() - half_w > 1e-9 || curve.delays_ns.back() + half_w < -1e-9)
        throw std::invalid_argument("zero_delay_value: zero delay not covered");
    // nearest bin center on each side of zero; bin edges sit on zero, so the
    // two centers are each half a bin away
    std::size_t below = curve.size(), above = curve.size();
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.delays_ns[i] <= 0.0) below = i;
        if (curve.delays_ns[i] >= 0.0 && above == curve.size()) above = i;
    }
    if (below == curve.size()) below = above;
    if (above == curve.size()) above = below;
    if (below == above)
        return {curve.values[below], curve.sigma[below]};
    return {0.5 * (curve.values[below] + curve.values[above]),
            0.5 * std::hypot(curve.sigma[below], curve.sigma[above])};
}

} // namespace nvsim::correlate

namespace nvsim {

void G2Curve::validate() const {
    if (values.size() != delays_ns.size() || sigma.size() != delays_ns.size())
        throw std::invalid_argument("g2 curve: column sizes differ");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] < -5.0 * sigma[i])
            throw std::invalid_argument("g2 curve: value below -5 sigma");
}

std::string to_string(G2Curve::Kind kind) {
    switch (kind) {
        case G2Curve::Kind::raw_normalized: return "raw-normalized";
        case G2Curve::Kind::background_corrected: return "background-corrected";
        case G2Curve::Kind::analytic: return "analytic";
    }
    return "unknown";
}

} // namespace nvsim
