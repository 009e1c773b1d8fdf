#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvsim/correlate.hpp"
#include "nvsim/detection.hpp"
#include "nvsim/photophysics.hpp"

namespace nvsim::io {

/// Full description of a simulated experiment run. Serialized as a flat
/// key = value text file; every physical key carries its unit in the name.
struct ExperimentConfig {
    std::string label = "custom";
    std::uint64_t seed = 42;
    double acquisition_s = 1.0;
    std::vector<double> powers_mw = {2.7};
    double kappa_per_s_per_mw = 1e5; // pump rate per mW of excitation power

    // pump_rate field ignored; set per power. Defaults to a 25 ns two-level
    // emitter so a minimal config is complete without an emitter section.
    photophysics::LevelScheme emitter{0.0, 4e7};
    photophysics::MediumModel medium;

    detection::HBTConfig hbt;
    detection::DetectorConfig detector1;
    detection::DetectorConfig detector2;

    correlate::CorrelationWindow window;
    correlate::HistogramMode mode = correlate::HistogramMode::all_pairs;

    bool operator==(const ExperimentConfig&) const = default;

    /// Canonical text form; parse_config(to_text()) reproduces the object.
    std::string to_text() const;

    /// Throws std::invalid_argument when any section fails validation.
    void validate() const;
};

/// Parse key = value text ('#' starts a comment). Unknown keys, duplicates
/// and malformed values raise std::invalid_argument naming the line and key.
ExperimentConfig parse_config(const std::string& text);

/// Read a config file (see parse_config). Throws std::runtime_error when the
/// file cannot be read.
ExperimentConfig load_config_file(const std::string& path);

/// Built-in experiment presets. Names:
///   nanocrystal        emitter in a sub-wavelength crystal, calibrated
///                      operating point for coincidence histograms
///   bulk               emitter deep inside the host crystal
///   nanocrystal-sweep  dip-width power sweep, nanocrystal lifetime
///   bulk-sweep         dip-width power sweep, bulk lifetime
///   shelving           strong shelving: bunching shoulder demo
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);

/// Commented source text of a preset (documentation included).
std::string preset_text(const std::string& name);
ExperimentConfig load_preset(const std::string& name);

} // namespace nvsim::io
