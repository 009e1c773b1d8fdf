#include "nvsim/photophysics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvsim/rng.hpp"

namespace nvsim::photophysics {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Solve a 3x3 linear system in place (partial pivoting). Returns false when
// numerically singular.
bool solve3(double a[3][4]) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        if (piv != col)
            for (int c = 0; c < 4; ++c) std::swap(a[piv][c], a[col][c]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (int r = 0; r < 3; ++r) a[r][3] /= a[r][r];
    return true;
}

struct TwoLevelReduced {
    // d/dt (pe, ps) = A (pe, ps) + b with pg eliminated.
    double a11, a12, a21, a22, b1;
};

TwoLevelReduced reduced_system(const LevelScheme& s) {
    const double r = s.pump_rate_per_s;
    const double g = s.radiative_rate_per_s;
    const double ke = s.effective_shelve_rate_per_s();
    const double ks = s.deshelve_rate_per_s;
    return {-(r + g + ke), -r, ke, -ks, r};
}

} // namespace

void LevelScheme::validate() const {
    if (!finite_nonneg(pump_rate_per_s) || !finite_nonneg(shelve_rate_per_s) ||
        !finite_nonneg(deshelve_rate_per_s) || !finite_nonneg(pump_shelving_beta))
        throw std::invalid_argument("level scheme: rates must be finite and non-negative");
    if (!std::isfinite(radiative_rate_per_s) || radiative_rate_per_s <= 0.0)
        throw std::invalid_argument("level scheme: radiative rate must be positive");
}

Occupations steady_state(const LevelScheme& scheme) {
    scheme.validate();
    const double r = scheme.pump_rate_per_s;
    const double g = scheme.radiative_rate_per_s;
    const double ke = scheme.effective_shelve_rate_per_s();
    const double ks = scheme.deshelve_rate_per_s;

    if (r == 0.0) return {1.0, 0.0, 0.0};
    if (ke == 0.0) {
        // Shelf unreachable: plain two-level balance.
        const double pe = r / (r + g);
        return {1.0 - pe, pe, 0.0};
    }
    if (ks == 0.0) return {0.0, 0.0, 1.0}; // shelf is absorbing
    // Rate matrix rows for (pg, pe, ps); the third equation is replaced by
    // the normalization constraint.
    double a[3][4] = {
        {-r, g, ks, 0.0},
        {r, -(g + ke), 0.0, 0.0},
        {1.0, 1.0, 1.0, 1.0},
    };
    if (!solve3(a))
        throw std::runtime_error("steady_state: singular rate matrix");
    Occupations occ{a[0][3], a[1][3], a[2][3]};
    const double sum = occ.ground + occ.excited + occ.shelf;
    occ.ground /= sum;
    occ.excited /= sum;
    occ.shelf /= sum;
    return occ;
}

G2Curve analytic_g2(const LevelScheme& scheme, const std::vector<double>& delays_ns) {
    scheme.validate();
    for (double d : delays_ns)
        if (!(d >= 0.0))
            throw std::invalid_argument("analytic_g2: delays must be non-negative");

    const Occupations ss = steady_state(scheme);
    if (ss.excited <= 0.0)
        throw std::invalid_argument("analytic_g2: no steady-state emission for this scheme");

    G2Curve curve;
    curve.kind = G2Curve::Kind::analytic;
    curve.delays_ns = delays_ns;
    curve.values.resize(delays_ns.size());
    curve.sigma.assign(delays_ns.size(), 0.0);

    const double r = scheme.pump_rate_per_s;
    const double g = scheme.radiative_rate_per_s;
    const double ke = scheme.effective_shelve_rate_per_s();

    if (ke == 0.0) {
        // Two-level closed form: g2(tau) = 1 - exp(-(r + gamma) tau).
        const double k_per_ns = (r + g) / 1e9;
        for (std::size_t i = 0; i < delays_ns.size(); ++i)
            curve.values[i] = delays_ns[i] == 0.0 ? 0.0 : -std::expm1(-k_per_ns * delays_ns[i]);
        return curve;
    }

    // Reduced 2x2 system for (pe, ps); pe(t) relaxes to steady state as a sum
    // of two exponentials with the eigenvalues of A.
    const TwoLevelReduced m = reduced_system(scheme);
    const double tr = m.a11 + m.a22;
    const double det = m.a11 * m.a22 - m.a12 * m.a21;
    if (det <= 0.0)
        throw std::invalid_argument("analytic_g2: shelf never relaxes (deshelve rate zero)");
    double disc = tr * tr * 0.25 - det;
    disc = disc > 0.0 ? std::sqrt(disc) : 0.0;
    const double mu1 = tr * 0.5 - disc; // fast eigenvalue (most negative)
    const double mu2 = tr * 0.5 + disc; // slow eigenvalue

    // Deviation from steady state, v(t) = exp(At) v0 with v0 = -(pe_ss, ps_ss).
    const double v0e = -ss.excited;
    const double v0s = -ss.shelf;
    const double sep = mu1 - mu2;

    for (std::size_t i = 0; i < delays_ns.size(); ++i) {
        const double t = delays_ns[i] * 1e-9;
        double ve;
        if (std::fabs(sep) > 1e-9 * std::fabs(mu1)) {
            // Spectral projectors of the 2x2 matrix.
            const double p1e = ((m.a11 - mu2) * v0e + m.a12 * v0s) / sep;
            const double p2e = ((m.a11 - mu1) * v0e + m.a12 * v0s) / -sep;
            ve = p1e * std::exp(mu1 * t) + p2e * std::exp(mu2 * t);
        } else {
            // Degenerate eigenvalues: exp(At) = e^{mu t} (I + (A - mu I) t).
            const double mu = tr * 0.5;
            const double we = v0e + ((m.a11 - mu) * v0e + m.a12 * v0s) * t;
            ve = we * std::exp(mu * t);
        }
        curve.values[i] = t == 0.0 ? 0.0 : (ss.excited + ve) / ss.excited;
    }
    return curve;
}

namespace {

enum class State { ground, excited, shelf };

/// One kinetic Monte Carlo pass. on_photon(t_seconds) is called per radiative
/// decay; dwell accumulates per-state time when requested.
template <typename PhotonFn>
void run_trajectory(const LevelScheme& scheme, double duration_s, std::uint64_t seed,
                    PhotonFn&& on_photon, double dwell[3] = nullptr) {
    CounterRng rng(seed);
    const double r = scheme.pump_rate_per_s;
    const double g = scheme.radiative_rate_per_s;
    const double ke = scheme.effective_shelve_rate_per_s();
    const double ks = scheme.deshelve_rate_per_s;
    const double branch_g = g / (g + ke);

    State state = State::ground;
    double t = 0.0;
    while (t < duration_s) {
        double dt;
        State next;
        bool photon = false;
        switch (state) {
            case State::ground:
                if (r <= 0.0) { dt = duration_s - t; next = state; break; }
                dt = rng.exponential(r);
                next = State::excited;
                break;
            case State::excited:
                dt = rng.exponential(g + ke);
                if (ke <= 0.0 || rng.uniform() < branch_g) {
                    next = State::ground;
                    photon = true;
                } else {
                    next = State::shelf;
                }
                break;
            case State::shelf:
            default:
                if (ks <= 0.0) { dt = duration_s - t; next = state; break; }
                dt = rng.exponential(ks);
                next = State::ground;
                break;
        }
        const double t_next = t + dt;
        if (dwell) dwell[static_cast<int>(state)] += std::min(t_next, duration_s) - t;
        if (t_next >= duration_s) break;
        if (next == state) { t = t_next; continue; } // absorbing segment exhausted
        t = t_next;
        state = next;
        if (photon) on_photon(t);
    }
}

} // namespace

PhotonStream simulate_emission(const LevelScheme& scheme, double duration_ns,
                               std::uint64_t seed) {
    scheme.validate();
    if (!(duration_ns > 0.0))
        throw std::invalid_argument("simulate_emission: duration must be positive");

    PhotonStream out;
    out.duration_ps = static_cast<std::uint64_t>(std::llround(duration_ns * kPsPerNs));
    if (out.duration_ps == 0)
        throw std::invalid_argument("simulate_emission: duration below one picosecond tick");
    out.label = "emission";
    const double duration_s = duration_ns * 1e-9;

    const Occupations ss = steady_state(scheme);
    const double expected = scheme.radiative_rate_per_s * ss.excited * duration_s;
    out.timestamps_ps.reserve(static_cast<std::size_t>(expected * 1.05) + 64);

    const std::uint64_t last_tick = out.duration_ps - 1;
    run_trajectory(scheme, duration_s, seed, [&](double t) {
        const auto tick = static_cast<std::uint64_t>(std::llround(t * kPsPerSecond));
        out.timestamps_ps.push_back(std::min(tick, last_tick));
    });
    return out;
}

Occupations simulate_occupancy(const LevelScheme& scheme, double duration_ns,
                               std::uint64_t seed) {
    scheme.validate();
    if (!(duration_ns > 0.0))
        throw std::invalid_argument("simulate_occupancy: duration must be positive");
    double dwell[3] = {0.0, 0.0, 0.0};
    const double duration_s = duration_ns * 1e-9;
    run_trajectory(scheme, duration_s, seed, [](double) {}, dwell);
    const double total = dwell[0] + dwell[1] + dwell[2];
    return {dwell[0] / total, dwell[1] / total, dwell[2] / total};
}

std::vector<double> emission_rate_vs_power(const LevelScheme& scheme_template,
                                           double kappa_per_s_per_mw,
                                           const std::vector<double>& powers_mw) {
    if (!(kappa_per_s_per_mw > 0.0) || !std::isfinite(kappa_per_s_per_mw))
        throw std::invalid_argument("emission_rate_vs_power: kappa must be positive");
    std::vector<double> rates;
    rates.reserve(powers_mw.size());
    for (double p : powers_mw) {
        if (!(p >= 0.0))
            throw std::invalid_argument("emission_rate_vs_power: negative power");
        const LevelScheme s = scheme_template.with_pump(kappa_per_s_per_mw * p);
        rates.push_back(s.radiative_rate_per_s * steady_state(s).excited);
    }
    return rates;
}

double decay_rate_in_medium(double vacuum_rate_per_s, double refractive_index,
                            double local_field_factor) {
    if (!(vacuum_rate_per_s > 0.0) || !(refractive_index > 0.0) || !(local_field_factor > 0.0))
        throw std::invalid_argument("decay_rate_in_medium: arguments must be positive");
    return refractive_index * local_field_factor * local_field_factor * vacuum_rate_per_s;
}

double nanocrystal_lifetime_ns(const MediumModel& medium) {
    if (!(medium.bulk_index > 0.0) || !(medium.substrate_index > 0.0) ||
        !(medium.bulk_lifetime_ns > 0.0))
        throw std::invalid_argument("nanocrystal_lifetime: parameters must be positive");
    // Average of the radiative rates seen by the two half-spaces (air above,
    // substrate below), both scaled relative to the bulk-host rate.
    return 2.0 * medium.bulk_index * medium.bulk_lifetime_ns / (1.0 + medium.substrate_index);
}

} // namespace nvsim::photophysics
