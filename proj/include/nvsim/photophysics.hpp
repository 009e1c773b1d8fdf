#pragma once

#include <cstdint>
#include <vector>

#include "nvsim/g2_curve.hpp"
#include "nvsim/photon_stream.hpp"

namespace nvsim::photophysics {

/// Three-level emitter: ground, excited, shelving state.
/// Pumping promotes ground -> excited; the excited state decays radiatively
/// back to ground (one photon per decay) or crosses into the shelf, which
/// relaxes back to ground without photon emission. All rates in 1/s.
struct LevelScheme {
    double pump_rate_per_s = 0.0;       // ground -> excited
    double radiative_rate_per_s = 0.0;  // excited -> ground, emits a photon
    double shelve_rate_per_s = 0.0;     // excited -> shelf
    double deshelve_rate_per_s = 0.0;   // shelf -> ground
    double pump_shelving_beta = 0.0;    // dimensionless; adds beta*pump to shelving

    /// Shelving rate including the pump-induced channel.
    double effective_shelve_rate_per_s() const {
        return shelve_rate_per_s + pump_shelving_beta * pump_rate_per_s;
    }

    LevelScheme with_pump(double pump_per_s) const {
        LevelScheme s = *this;
        s.pump_rate_per_s = pump_per_s;
        return s;
    }

    /// Throws std::invalid_argument when a rate is negative, non-finite, or
    /// the radiative rate is zero.
    void validate() const;

    bool operator==(const LevelScheme&) const = default;
};

/// Occupation probabilities of the three states; sums to 1.
struct Occupations {
    double ground = 0.0;
    double excited = 0.0;
    double shelf = 0.0;
};

/// Dielectric environment of the emitter.
struct MediumModel {
    double bulk_index = 2.4;        // refractive index of the host crystal
    double substrate_index = 1.45;  // index of the supporting half-space
    double local_field_factor = 1.0;
    double bulk_lifetime_ns = 11.6; // radiative lifetime inside the bulk host

    bool operator==(const MediumModel&) const = default;
};

/// Unique stationary distribution of the rate equations.
/// pump_rate == 0 returns all population in the ground state.
Occupations steady_state(const LevelScheme& scheme);

/// Analytic normalized autocorrelation of the emission intensity:
/// g2(tau) = p_excited(tau | ground at 0) / p_excited(steady state).
/// delays_ns must be non-negative (the curve is symmetric in tau).
/// g2(0) is exactly 0. Throws if the steady emission rate vanishes.
G2Curve analytic_g2(const LevelScheme& scheme, const std::vector<double>& delays_ns);

/// Exact stochastic trajectory of the scheme; records one timestamp per
/// radiative decay. Event times are exponential (kinetic Monte Carlo), not
/// time-discretized. Identical (scheme, duration, seed) give identical output.
PhotonStream simulate_emission(const LevelScheme& scheme, double duration_ns,
                               std::uint64_t seed);

/// Time-averaged state occupations over one stochastic trajectory.
/// Used to cross-check steady_state against the sampler.
Occupations simulate_occupancy(const LevelScheme& scheme, double duration_ns,
                               std::uint64_t seed);

/// Steady-state emitted photon rate (1/s) versus pump power.
/// pump = kappa * power; with pump_shelving_beta > 0 the shelving rate grows
/// with pump, which makes the curve non-monotone.
std::vector<double> emission_rate_vs_power(const LevelScheme& scheme_template,
                                           double kappa_per_s_per_mw,
                                           const std::vector<double>& powers_mw);

/// Radiative rate inside a homogeneous medium of index n with local-field
/// factor l: rate_medium = n * l^2 * rate_vacuum.
double decay_rate_in_medium(double vacuum_rate_per_s, double refractive_index,
                            double local_field_factor);

/// Predicted lifetime of an emitter in a sub-wavelength crystal lying on a
/// substrate, surrounded by air on the other side: averages the local density
/// of states of the two half-spaces,
///   1/tau = (1 + n_substrate) / (2 * n_bulk * tau_bulk).
double nanocrystal_lifetime_ns(const MediumModel& medium);

} // namespace nvsim::photophysics
