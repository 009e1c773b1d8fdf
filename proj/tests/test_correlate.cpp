#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nvsim/correlate.hpp"
#include "nvsim/detection.hpp"
#include "nvsim/rng.hpp"

using namespace nvsim;
using namespace nvsim::correlate;

namespace {

PhotonStream stream_ps(std::vector<std::uint64_t> ticks, std::uint64_t duration_ps) {
    PhotonStream s;
    std::sort(ticks.begin(), ticks.end());
    s.timestamps_ps = std::move(ticks);
    s.duration_ps = duration_ps;
    return s;
}

PhotonStream random_stream(CounterRng& rng, std::size_t n, std::uint64_t duration_ps) {
    std::vector<std::uint64_t> t(n);
    for (auto& x : t) x = rng.next_u64() % duration_ps;
    return stream_ps(std::move(t), duration_ps);
}

// quadratic reference correlator, deliberately different from the library
std::vector<std::uint64_t> brute_force(const PhotonStream& a, const PhotonStream& b,
                                       const CorrelationWindow& w, bool same) {
    std::vector<std::uint64_t> counts(w.bin_count(), 0);
    const std::int64_t lo = w.tau_min_ps, hi = w.effective_tau_max_ps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (same && i == j) continue;
            const std::int64_t tau = static_cast<std::int64_t>(b.timestamps_ps[j]) -
                                     static_cast<std::int64_t>(a.timestamps_ps[i]);
            if (tau >= lo && tau < hi)
                counts[static_cast<std::size_t>((tau - lo) / w.bin_width_ps)] += 1;
        }
    }
    return counts;
}

} // namespace

TEST_CASE("window geometry") {
    CorrelationWindow w;
    w.bin_width_ps = 500;
    w.tau_min_ps = -500;
    w.tau_max_ps = 700; // not a whole number of bins: rounds up to 1000
    CHECK(w.bin_count() == 3);
    CHECK(w.effective_tau_max_ps() == 1000);

    w.bin_width_ps = 0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w.bin_width_ps = 500;
    w.tau_max_ps = w.tau_min_ps;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("pair histogram: handcrafted") {
    CorrelationWindow w;
    w.bin_width_ps = 1000;
    w.tau_min_ps = -2000;
    w.tau_max_ps = 2000;
    // pairs: 5000->4500 (-500, bin 1), 5000->5100 (100, bin 2),
    // 9000->9900 (900, bin 2); 5000->9900 etc. fall outside
    const auto starts = stream_ps({5000, 9000}, 20000);
    const auto stops = stream_ps({4500, 5100, 9900}, 20000);
    const auto h = pair_histogram(starts, stops, w);
    CHECK(h.counts == std::vector<std::uint64_t>{0, 1, 2, 0});
    CHECK(h.total_counts() == 3);
    CHECK(h.bin_center_ns(0) == doctest::Approx(-1.5));
    CHECK(h.bin_center_ns(3) == doctest::Approx(1.5));
    CHECK(h.mode == HistogramMode::all_pairs);
}

TEST_CASE("pair histogram: matches brute force bit for bit") {
    CounterRng rng(2024);
    for (int rep = 0; rep < 60; ++rep) {
        const std::uint64_t duration = 200000 + rng.next_u64() % 800000;
        const auto a = random_stream(rng, 50 + rng.next_u64() % 250, duration);
        const auto b = random_stream(rng, 50 + rng.next_u64() % 250, duration);
        CorrelationWindow w;
        w.bin_width_ps = static_cast<std::int64_t>(100 + rng.next_u64() % 3000);
        w.tau_min_ps = -static_cast<std::int64_t>(rng.next_u64() % 50000);
        w.tau_max_ps = static_cast<std::int64_t>(1 + rng.next_u64() % 50000);
        const auto h = pair_histogram(a, b, w);
        CHECK(h.counts == brute_force(a, b, w, false));
    }
}

TEST_CASE("pair histogram: autocorrelation skips self pairs only") {
    CounterRng rng(77);
    const auto a = random_stream(rng, 400, 500000);
    CorrelationWindow w;
    w.bin_width_ps = 250;
    w.tau_min_ps = -20000;
    w.tau_max_ps = 20000;
    const auto h = pair_histogram(a, a, w);
    CHECK(h.counts == brute_force(a, a, w, true));

    // an identical copy is a distinct stream: self pairs count there
    const PhotonStream copy = a;
    const auto h2 = pair_histogram(a, copy, w);
    CHECK(h2.counts == brute_force(a, copy, w, false));
    const std::size_t zero_bin = static_cast<std::size_t>((0 - w.tau_min_ps) / w.bin_width_ps);
    CHECK(h2.counts[zero_bin] == h.counts[zero_bin] + a.size());
}

TEST_CASE("pair histogram: thread count never changes the answer") {
    CounterRng rng(31337);
    const auto a = random_stream(rng, 3000, 5000000);
    const auto b = random_stream(rng, 3000, 5000000);
    CorrelationWindow w;
    w.bin_width_ps = 1000;
    w.tau_min_ps = -100000;
    w.tau_max_ps = 100000;
    const auto h1 = pair_histogram(a, b, w, 1);
    for (int threads : {2, 3, 7, 16}) {
        const auto hn = pair_histogram(a, b, w, threads);
        CHECK(hn.counts == h1.counts);
    }
}

TEST_CASE("tac histogram: handcrafted sequences") {
    CorrelationWindow w;
    w.bin_width_ps = 1000;
    w.tau_min_ps = -5000;
    w.tau_max_ps = 5000;

    SUBCASE("positive and negative delays around the electronic offset") {
        // stop at +2 ns records in bin 7; stop 3 ns before the start is
        // reachable thanks to the 5 ns stop-channel delay (bin 2)
        const auto starts = stream_ps({10000, 40000}, 100000);
        const auto stops = stream_ps({12000, 37000}, 100000);
        const auto h = tac_histogram(starts, stops, w, 5000);
        std::vector<std::uint64_t> expected(10, 0);
        expected[7] = 1;
        expected[2] = 1;
        CHECK(h.counts == expected);
        CHECK(h.mode == HistogramMode::tac_start_stop);
    }

    SUBCASE("start during a conversion is discarded") {
        const auto starts = stream_ps({10000, 11000}, 100000);
        const auto stops = stream_ps({18000}, 100000);
        // the delayed stop lands at 23 ns, outside the 10 ns conversion
        // window of the first start; the second start arrived while that
        // conversion was still pending
        const auto h = tac_histogram(starts, stops, w, 5000);
        CHECK(h.total_counts() == 0);
    }

    SUBCASE("a consumed stop cannot serve a later start") {
        const auto starts = stream_ps({1000, 2000}, 100000);
        const auto stops = stream_ps({1500}, 100000);
        const auto h = tac_histogram(starts, stops, w, 0);
        std::vector<std::uint64_t> expected(10, 0);
        expected[5] = 1; // 0.5 ns
        CHECK(h.counts == expected);
    }

    SUBCASE("only the first stop converts") {
        const auto starts = stream_ps({1000}, 100000);
        const auto stops = stream_ps({1100, 1200, 1300}, 100000);
        const auto h = tac_histogram(starts, stops, w, 0);
        CHECK(h.total_counts() == 1);
        CHECK(h.counts[5] == 1); // 0.1 ns
    }
}

TEST_CASE("tac histogram: agrees with the pair correlator at low rates") {
    PhotonStream blank;
    blank.duration_ps = static_cast<std::uint64_t>(40 * kPsPerSecond);
    const auto a = detection::add_poisson_events(blank, 1e4, 901);
    const auto b = detection::add_poisson_events(blank, 1e4, 902);
    CorrelationWindow w;
    w.bin_width_ps = 1000;
    w.tau_min_ps = -100000;
    w.tau_max_ps = 100000;
    const auto pairs = pair_histogram(a, b, w);
    const auto tac = tac_histogram(a, b, w, 100000);
    // about 800 pairs expected; at rate * conversion_window ~ 2e-3 the
    // start-discard and first-stop-only losses together cost a few counts
    std::uint64_t diff = 0;
    for (std::size_t i = 0; i < pairs.counts.size(); ++i)
        diff += pairs.counts[i] > tac.counts[i] ? pairs.counts[i] - tac.counts[i]
                                                : tac.counts[i] - pairs.counts[i];
    CHECK(pairs.total_counts() > 400); // the comparison has teeth
    CHECK(diff <= 10);
}

TEST_CASE("normalize: uncorrelated level and error conventions") {
    CoincidenceHistogram h;
    h.window.bin_width_ps = 1000;
    h.window.tau_min_ps = -1000;
    h.window.tau_max_ps = 1000;
    h.counts = {25, 0};
    h.acquisition_s = 10.0;
    h.rate1_per_s = 1000.0;
    h.rate2_per_s = 2000.0;
    const double level = 1000.0 * 2000.0 * 1e-9 * 10.0; // 0.02
    const auto curve = normalize(h);
    CHECK(curve.kind == G2Curve::Kind::raw_normalized);
    CHECK(curve.values[0] == doctest::Approx(25.0 / level).epsilon(1e-12));
    CHECK(curve.sigma[0] == doctest::Approx(5.0 / level).epsilon(1e-12));
    // empty bins carry the one-count error floor
    CHECK(curve.values[1] == 0.0);
    CHECK(curve.sigma[1] == doctest::Approx(1.0 / level).epsilon(1e-12));
    CHECK(curve.delays_ns[0] == doctest::Approx(-0.5));

    h.rate1_per_s = 0.0;
    CHECK_THROWS_AS(normalize(h), std::invalid_argument);
}

TEST_CASE("background correction: frozen arithmetic") {
    G2Curve curve;
    curve.kind = G2Curve::Kind::raw_normalized;
    curve.delays_ns = {-0.5, 0.5, 10.5};
    curve.values = {0.17, 0.09297052154195018, 1.0};
    curve.sigma = {0.02, 0.02, 0.03};

    const double rho = 20.0 / 21.0;
    const auto fixed = background_correct(curve, rho);
    CHECK(fixed.kind == G2Curve::Kind::background_corrected);
    // (0.17 - (1 - rho^2)) / rho^2 with rho = 20/21 is exactly 0.084925
    CHECK(fixed.values[0] == doctest::Approx(0.084925).epsilon(1e-12));
    // a curve pinned at the uncorrelated background floor corrects to zero
    CHECK(fixed.values[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fixed.values[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fixed.sigma[0] == doctest::Approx(0.02 * 441.0 / 400.0).epsilon(1e-12));

    CHECK(background_correct(curve, 1.0).values[0] == doctest::Approx(0.17));
    CHECK_THROWS_AS(background_correct(curve, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(background_correct(curve, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(background_correct(fixed, rho), std::invalid_argument);
}

TEST_CASE("zero delay estimate") {
    G2Curve curve;
    curve.delays_ns = {-1.5, -0.5, 0.5, 1.5};
    curve.values = {4.0, 3.0, 2.0, 1.0};
    curve.sigma = {0.4, 0.3, 0.2, 0.1};
    const auto z = zero_delay_value(curve);
    CHECK(z.value == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(z.sigma == doctest::Approx(0.5 * std::hypot(0.3, 0.2)).epsilon(1e-12));

    G2Curve one_sided;
    one_sided.delays_ns = {0.5, 1.5, 2.5};
    one_sided.values = {7.0, 8.0, 9.0};
    one_sided.sigma = {0.1, 0.1, 0.1};
    CHECK(zero_delay_value(one_sided).value == doctest::Approx(7.0));

    G2Curve off;
    off.delays_ns = {5.5, 6.5};
    off.values = {1.0, 1.0};
    off.sigma = {0.1, 0.1};
    CHECK_THROWS_AS(zero_delay_value(off), std::invalid_argument);
}

TEST_CASE("g2 curve validation") {
    G2Curve c;
    c.delays_ns = {0.5};
    c.values = {0.2, 0.3}; // size mismatch
    c.sigma = {0.1};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.values = {-0.6};
    c.sigma = {0.1}; // -6 sigma: beyond noise
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.values = {-0.3}; // -3 sigma: plausible noise
    CHECK_NOTHROW(c.validate());
    CHECK(to_string(G2Curve::Kind::background_corrected) == "background-corrected");
}
