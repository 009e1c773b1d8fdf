#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nvsim/photophysics.hpp"

using namespace nvsim;
using namespace nvsim::photophysics;

namespace {

LevelScheme scheme(double r, double g, double ke, double ks, double beta = 0.0) {
    LevelScheme s;
    s.pump_rate_per_s = r;
    s.radiative_rate_per_s = g;
    s.shelve_rate_per_s = ke;
    s.deshelve_rate_per_s = ks;
    s.pump_shelving_beta = beta;
    return s;
}

} // namespace

TEST_CASE("steady state: frozen three-level occupations") {
    // r=1e7, gamma=4e7, ke=1e6, ks=3e5 solves to exactly (123, 30, 100)/253
    const auto ss = steady_state(scheme(1e7, 4e7, 1e6, 3e5));
    CHECK(ss.ground == doctest::Approx(0.48616600790513836).epsilon(1e-12));
    CHECK(ss.excited == doctest::Approx(0.11857707509881422).epsilon(1e-12));
    CHECK(ss.shelf == doctest::Approx(0.3952569169960474).epsilon(1e-12));
    CHECK(ss.ground + ss.excited + ss.shelf == doctest::Approx(1.0).epsilon(1e-12));

    // same effective shelving rate through the pump-induced channel
    const auto ss2 = steady_state(scheme(1e7, 4e7, 0.0, 3e5, 0.1));
    CHECK(ss2.excited == doctest::Approx(ss.excited).epsilon(1e-12));
    CHECK(ss2.shelf == doctest::Approx(ss.shelf).epsilon(1e-12));
}

TEST_CASE("steady state: limiting cases") {
    const auto dark = steady_state(scheme(0.0, 4e7, 1e6, 3e5));
    CHECK(dark.ground == 1.0);
    CHECK(dark.excited == 0.0);
    CHECK(dark.shelf == 0.0);

    // no shelving: two-level occupation r / (r + gamma)
    const auto two = steady_state(scheme(3e7, 3e7, 0.0, 0.0));
    CHECK(two.excited == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.shelf == 0.0);

    // shelf with no return path swallows everything
    const auto trapped = steady_state(scheme(1e7, 4e7, 1e6, 0.0));
    CHECK(trapped.ground == 0.0);
    CHECK(trapped.excited == 0.0);
    CHECK(trapped.shelf == 1.0);
}

TEST_CASE("level scheme validation") {
    CHECK_THROWS_AS(scheme(1e7, 0.0, 0.0, 0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(scheme(-1.0, 4e7, 0.0, 0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(scheme(1e7, 4e7, -2.0, 0.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(scheme(0.0, 4e7, 0.0, 0.0).validate());
    CHECK(scheme(2e6, 4e7, 1e3, 5e2, 0.5).effective_shelve_rate_per_s() ==
          doctest::Approx(1e3 + 0.5 * 2e6).epsilon(1e-15));
}

TEST_CASE("analytic g2: two-level closed form") {
    const double r = 3e6, g = 4.7e7;
    std::vector<double> delays;
    for (int i = 0; i <= 300; ++i) delays.push_back(i * 1.0);
    const auto curve = analytic_g2(scheme(r, g, 0.0, 0.0), delays);
    REQUIRE(curve.size() == delays.size());
    CHECK(curve.kind == G2Curve::Kind::analytic);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double expected = -std::expm1(-(r + g) * delays[i] * 1e-9);
        CHECK(curve.values[i] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(curve.sigma[i] == 0.0);
    }
    CHECK(curve.values[0] == 0.0);
}

TEST_CASE("analytic g2: frozen three-level values") {
    // independently solved from the spectral decomposition of the reduced
    // two-state system at 40-digit precision
    const auto s = scheme(1e7, 4e7, 1e6, 3e5);
    const auto curve = analytic_g2(s, {0.0, 10.0, 50.0, 500.0, 2000.0});
    CHECK(curve.values[0] == 0.0);
    CHECK(curve.values[1] == doctest::Approx(0.6605088850727726).epsilon(1e-9));
    CHECK(curve.values[2] == doctest::Approx(1.5187576338572794).epsilon(1e-9));
    CHECK(curve.values[3] == doctest::Approx(1.5196449756029213).epsilon(1e-9));
    CHECK(curve.values[4] == doctest::Approx(1.2461959660354007).epsilon(1e-9));

    CHECK_THROWS_AS(analytic_g2(s, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(analytic_g2(scheme(0.0, 4e7, 1e6, 3e5), {1.0}), std::invalid_argument);
}

TEST_CASE("gillespie: determinism and seed separation") {
    const auto s = scheme(5e6, 4e7, 1e6, 3e5);
    const auto a = simulate_emission(s, 2e6, 99);
    const auto b = simulate_emission(s, 2e6, 99);
    const auto c = simulate_emission(s, 2e6, 100);
    CHECK(a.timestamps_ps == b.timestamps_ps);
    CHECK(a.duration_ps == 2000000000ull);
    CHECK(a.timestamps_ps != c.timestamps_ps);
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("gillespie: empty cases") {
    const auto none = simulate_emission(scheme(0.0, 4e7, 0.0, 0.0), 1e6, 7);
    CHECK(none.size() == 0);
    CHECK_THROWS_AS(simulate_emission(scheme(1e6, 4e7, 0.0, 0.0), 1e-4, 7),
                    std::invalid_argument);
}

TEST_CASE("gillespie: two-level photon waiting time") {
    // one emission cycle is exp(r) then exp(gamma); the mean gap is 1/r+1/gamma
    const double r = 1e8, g = 1e8;
    const auto stream = simulate_emission(scheme(r, g, 0.0, 0.0), 2e7, 4242);
    REQUIRE(stream.size() > 100000);
    double sum = 0.0, sum2 = 0.0;
    const auto& t = stream.timestamps_ps;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double gap_ns = static_cast<double>(t[i] - t[i - 1]) / 1e3;
        sum += gap_ns;
        sum2 += gap_ns * gap_ns;
    }
    const double n = static_cast<double>(t.size() - 1);
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double expected_mean = 1e9 / r + 1e9 / g; // 20 ns
    const double expected_var = 1e18 / (r * r) + 1e18 / (g * g); // hypoexponential
    CHECK(std::abs(mean - expected_mean) < 3.0 * std::sqrt(expected_var / n));
    CHECK(var == doctest::Approx(expected_var).epsilon(0.02));
}

TEST_CASE("gillespie: rate and occupancy match the steady state") {
    const auto s = scheme(1e7, 4e7, 1e6, 3e5);
    const double duration_ns = 2e8; // 0.2 s
    const auto stream = simulate_emission(s, duration_ns, 555);
    const auto ss = steady_state(s);
    const double expected_rate = s.radiative_rate_per_s * ss.excited;
    // photon counts here are over-dispersed (bunching), hence the wide band
    const double sigma = 3.3 * std::sqrt(static_cast<double>(stream.size())) / 0.2;
    CHECK(std::abs(stream.rate_per_s() - expected_rate) < 5.0 * sigma);

    const auto occ = simulate_occupancy(s, duration_ns, 556);
    CHECK(occ.ground + occ.excited + occ.shelf == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(occ.excited - ss.excited) < 1e-3);
    CHECK(std::abs(occ.shelf - ss.shelf) < 0.012);
    CHECK(std::abs(occ.ground - ss.ground) < 0.012);
}

TEST_CASE("emission rate vs power") {
    const auto s = scheme(0.0, 4e7, 1e6, 3e5);
    // far above saturation the excited occupation approaches 1/(1 + ke/ks)
    const auto plateau = emission_rate_vs_power(s, 4e13, {1.0});
    CHECK(plateau[0] / 4e7 == doctest::Approx(3.0 / 13.0).epsilon(1e-6));

    const auto rising = emission_rate_vs_power(s, 4e6, {1.0, 2.0, 4.0, 8.0});
    for (std::size_t i = 1; i < rising.size(); ++i) CHECK(rising[i] > rising[i - 1]);

    // pump-induced shelving makes the curve roll over
    const auto si = scheme(0.0, 4e7, 0.0, 3e5, 1.0);
    const auto roll = emission_rate_vs_power(si, 1e7, {1.0, 100.0});
    CHECK(roll[1] < roll[0]);

    CHECK_THROWS_AS(emission_rate_vs_power(s, 0.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(emission_rate_vs_power(s, 1e6, {-1.0}), std::invalid_argument);
}

TEST_CASE("medium: decay rate scaling and crystal lifetime") {
    CHECK(decay_rate_in_medium(1e8, 2.4, 1.0) == doctest::Approx(2.4e8).epsilon(1e-15));
    CHECK(decay_rate_in_medium(1e8, 2.4, 0.9) ==
          doctest::Approx(2.4e8 * 0.81).epsilon(1e-15));

    MediumModel m; // defaults: n 2.4 on fused silica 1.45, bulk lifetime 11.6 ns
    CHECK(nanocrystal_lifetime_ns(m) == doctest::Approx(22.726530612244898).epsilon(1e-12));

    MediumModel air = m;
    air.substrate_index = 1.0; // crystal surrounded by air on both sides
    CHECK(nanocrystal_lifetime_ns(air) ==
          doctest::Approx(2.4 * 11.6).epsilon(1e-12));
}
