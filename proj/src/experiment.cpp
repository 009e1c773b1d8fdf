#include "nvsim/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include "nvsim/rng.hpp"

namespace nvsim {

PowerPointResult run_power_point(const io::ExperimentConfig& config,
                                 std::size_t power_index, int threads) {
    config.validate();
    if (power_index >= config.powers_mw.size())
        throw std::out_of_range("run_power_point: power index out of range");

    PowerPointResult r;
    r.power_mw = config.powers_mw[power_index];
    r.scheme = config.emitter.with_pump(config.kappa_per_s_per_mw * r.power_mw);

    const auto ss = photophysics::steady_state(r.scheme);
    r.emitted_rate_model_per_s = r.scheme.radiative_rate_per_s * ss.excited;

    // expected pre-dead-time rates per detector; dead time thins signal and
    // background in the same proportion, so the signal fractions carry over
    const double p1 = config.hbt.split_ratio;
    const double s1 = r.emitted_rate_model_per_s * config.detector1.efficiency * p1;
    const double s2 = r.emitted_rate_model_per_s * config.detector2.efficiency * (1.0 - p1);
    const double b1 = config.hbt.background_rate_per_s * config.detector1.efficiency * p1 +
                      config.detector1.dark_rate_per_s;
    const double b2 = config.hbt.background_rate_per_s * config.detector2.efficiency * (1.0 - p1) +
                      config.detector2.dark_rate_per_s;
    r.rho1_model = s1 / (s1 + b1);
    r.rho2_model = s2 / (s2 + b2);
    r.rho_effective = std::sqrt(r.rho1_model * r.rho2_model);

    const double duration_ns = config.acquisition_s * 1e9;
    const auto emission = photophysics::simulate_emission(
        r.scheme, duration_ns, derive_seed(config.seed, power_index));
    r.clicks = detection::run_hbt(emission, config.hbt, config.detector1, config.detector2,
                                  derive_seed(config.seed, 0x100 + power_index));

    r.rate1_per_s = r.clicks.detector1.rate_per_s();
    r.rate2_per_s = r.clicks.detector2.rate_per_s();

    if (config.mode == correlate::HistogramMode::all_pairs) {
        r.histogram = correlate::pair_histogram(r.clicks.detector1, r.clicks.detector2,
                                                config.window, threads);
    } else {
        r.histogram = correlate::tac_histogram(r.clicks.detector1, r.clicks.detector2,
                                               config.window, config.hbt.tac_delay_ps);
    }
    r.normalized = correlate::normalize(r.histogram);
    r.corrected = correlate::background_correct(r.normalized, r.rho_effective);
    return r;
}

} // namespace nvsim
