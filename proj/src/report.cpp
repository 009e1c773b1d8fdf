#include "nvsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace nvsim::report {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

json fit_block(const inference::FitResult& fit) {
    json j;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["chi2_reduced"] = fit.chi2_reduced;
    if (!fit.note.empty()) j["note"] = fit.note;
    json params = json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i)
        params[fit.names[i]] = {{"value", fit.values[i]}, {"sigma", fit.uncertainties[i]}};
    j["parameters"] = params;
    return j;
}

json power_point_block(const PowerPointResult& point) {
    json j;
    j["power_mw"] = point.power_mw;
    j["pump_per_s"] = point.scheme.pump_rate_per_s;
    j["emitted_rate_model_per_s"] = point.emitted_rate_model_per_s;
    j["rate1_per_s"] = point.rate1_per_s;
    j["rate2_per_s"] = point.rate2_per_s;
    j["rho1_model"] = point.rho1_model;
    j["rho2_model"] = point.rho2_model;
    j["rho_effective"] = point.rho_effective;
    j["coincidences_total"] = point.histogram.total_counts();

    const auto cn0 = correlate::zero_delay_value(point.normalized);
    const auto g2c0 = correlate::zero_delay_value(point.corrected);
    j["cn_zero"] = cn0.value;
    j["cn_zero_sigma"] = cn0.sigma;
    j["g2_corrected_zero"] = g2c0.value;
    j["g2_corrected_zero_sigma"] = g2c0.sigma;
    j["emitter_count"] = emitter_count_block(g2c0.value, g2c0.sigma);
    return j;
}

json medium_block(const photophysics::MediumModel& medium) {
    json j;
    j["bulk_index"] = medium.bulk_index;
    j["substrate_index"] = medium.substrate_index;
    j["local_field_factor"] = medium.local_field_factor;
    j["bulk_lifetime_ns"] = medium.bulk_lifetime_ns;
    const double bulk_rate_per_s = 1e9 / medium.bulk_lifetime_ns;
    const double lf2 = medium.local_field_factor * medium.local_field_factor;
    const double vacuum_rate_per_s = bulk_rate_per_s / (medium.bulk_index * lf2);
    j["vacuum_lifetime_ns"] = 1e9 / vacuum_rate_per_s;
    j["nanocrystal_lifetime_ns"] = photophysics::nanocrystal_lifetime_ns(medium);
    return j;
}

json multiphoton_block(double cn_zero, const std::vector<double>& p1_values) {
    json j;
    j["cn_zero"] = cn_zero;
    // p2 scales as cn_zero * p1^2 / 2; a Poissonian source has cn_zero = 1,
    // so cn_zero is directly the suppression factor
    j["suppression_vs_poissonian"] = cn_zero;
    json rows = json::array();
    for (double p1 : p1_values) {
        json row;
        row["p1"] = p1;
        row["p2"] = inference::multiphoton_probability(cn_zero, p1);
        row["p2_poissonian"] = inference::multiphoton_probability(1.0, p1);
        rows.push_back(row);
    }
    j["windows"] = rows;
    return j;
}

json emitter_count_block(double g2_zero, double g2_zero_sigma) {
    json j;
    j["g2_zero"] = g2_zero;
    j["g2_zero_sigma"] = g2_zero_sigma;
    if (g2_zero >= 1.0) {
        j["note"] = "no antibunching; emitter count undefined";
        return j;
    }
    const auto est = inference::estimate_emitter_count(std::max(0.0, g2_zero));
    j["estimate"] = est.estimate;
    j["rounded"] = est.rounded;
    j["ambiguous"] = est.ambiguous;
    return j;
}

std::string histogram_csv(const correlate::CoincidenceHistogram& histogram) {
    std::string out;
    out += "# acquisition_s = " + fmt_double(histogram.acquisition_s) + "\n";
    out += "# rate1_per_s = " + fmt_double(histogram.rate1_per_s) + "\n";
    out += "# rate2_per_s = " + fmt_double(histogram.rate2_per_s) + "\n";
    out += std::string("# mode = ") +
           (histogram.mode == correlate::HistogramMode::all_pairs ? "all-pairs" : "tac") + "\n";
    out += "tau_ns,counts\n";
    for (std::size_t i = 0; i < histogram.counts.size(); ++i)
        out += fmt_double(histogram.bin_center_ns(i)) + "," +
               std::to_string(histogram.counts[i]) + "\n";
    return out;
}

std::string curves_csv(const G2Curve& normalized, const G2Curve& corrected) {
    if (normalized.size() != corrected.size())
        throw std::invalid_argument("curves_csv: curve sizes differ");
    std::string out = "tau_ns,cn,cn_sigma,g2_corrected,g2_corrected_sigma\n";
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        out += fmt_double(normalized.delays_ns[i]) + "," + fmt_double(normalized.values[i]) +
               "," + fmt_double(normalized.sigma[i]) + "," + fmt_double(corrected.values[i]) +
               "," + fmt_double(corrected.sigma[i]) + "\n";
    }
    return out;
}

namespace {

void render_node(const json& node, int indent, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    auto scalar = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            if (value.is_object() || (value.is_array() && !value.empty() &&
                                      (value.front().is_object() || value.front().is_array()))) {
                out += pad + key + ":\n";
                render_node(value, indent + 1, out);
            } else if (value.is_array()) {
                out += pad + key + ": [";
                for (std::size_t i = 0; i < value.size(); ++i)
                    out += (i ? ", " : "") + scalar(value[i]);
                out += "]\n";
            } else {
                out += pad + key + ": " + scalar(value) + "\n";
            }
        }
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i) {
            out += pad + "[" + std::to_string(i) + "]:\n";
            render_node(node[i], indent + 1, out);
        }
    } else {
        out += pad + scalar(node) + "\n";
    }
}

} // namespace

std::string render_text(const json& report) {
    std::string out;
    render_node(report, 0, out);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (!target.parent_path().empty()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

} // namespace nvsim::report
