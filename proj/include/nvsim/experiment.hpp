#pragma once

#include <cstddef>

#include "nvsim/config.hpp"
#include "nvsim/correlate.hpp"
#include "nvsim/detection.hpp"
#include "nvsim/g2_curve.hpp"
#include "nvsim/photophysics.hpp"

namespace nvsim {

/// Everything produced by one power point of an experiment run.
struct PowerPointResult {
    double power_mw = 0.0;
    photophysics::LevelScheme scheme; // pump rate set to kappa * power

    detection::HbtOutput clicks;
    correlate::CoincidenceHistogram histogram;
    G2Curve normalized; // histogram / (N1 N2 w T)
    G2Curve corrected;  // background-corrected

    double emitted_rate_model_per_s = 0.0; // steady-state emission rate
    double rate1_per_s = 0.0;              // measured detector click rates
    double rate2_per_s = 0.0;
    double rho1_model = 0.0; // model signal fraction, detector 1
    double rho2_model = 0.0;
    double rho_effective = 0.0; // sqrt(rho1 * rho2); used for the correction
};

/// Simulate one power point: emitter trajectory, detection chain, coincidence
/// histogram, normalization and background correction. The signal fractions
/// rho come from the configured rates (signal / (signal + background + dark)),
/// not from the realized streams; that mirrors how they are obtained on a real
/// setup, from separate source-blocked calibration runs.
/// Deterministic in (config, power_index).
PowerPointResult run_power_point(const io::ExperimentConfig& config,
                                 std::size_t power_index, int threads = 1);

} // namespace nvsim
