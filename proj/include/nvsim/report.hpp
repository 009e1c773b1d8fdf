#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "nvsim/correlate.hpp"
#include "nvsim/experiment.hpp"
#include "nvsim/fitting.hpp"
#include "nvsim/g2_curve.hpp"
#include "nvsim/inference.hpp"
#include "nvsim/photophysics.hpp"

namespace nvsim::report {

using json = nlohmann::ordered_json;

/// JSON building blocks for run and analysis reports. Reports carry no
/// timestamps or hostnames, so rerunning with the same config and seed
/// produces byte-identical files.

json fit_block(const inference::FitResult& fit);
json power_point_block(const PowerPointResult& point);
json medium_block(const photophysics::MediumModel& medium);
json multiphoton_block(double cn_zero, const std::vector<double>& p1_values);
json emitter_count_block(double g2_zero, double g2_zero_sigma);

/// CSV with bin centers and raw coincidence counts.
std::string histogram_csv(const correlate::CoincidenceHistogram& histogram);

/// CSV with normalized and background-corrected curves side by side.
std::string curves_csv(const G2Curve& normalized, const G2Curve& corrected);

/// Plain-text rendering of a report tree: nested "key: value" lines.
std::string render_text(const json& report);

/// Atomic write (temp file + rename); creates parent directories.
void write_text_file(const std::string& path, const std::string& content);

} // namespace nvsim::report
