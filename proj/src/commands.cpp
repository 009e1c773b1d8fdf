#include "nvsim/commands.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nvsim/config.hpp"
#include "nvsim/correlate.hpp"
#include "nvsim/experiment.hpp"
#include "nvsim/inference.hpp"
#include "nvsim/report.hpp"
#include "nvsim/stream_io.hpp"
#include "nvsim/version.hpp"

namespace nvsim::cli {

namespace fs = std::filesystem;
using report::json;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? hw : 1;
}

io::ExperimentConfig resolve_config(const std::string& preset, const std::string& config_path) {
    if (!preset.empty() && !config_path.empty())
        throw std::invalid_argument("give either a preset or a config file, not both");
    if (preset.empty() && config_path.empty())
        throw std::invalid_argument("a preset name or a config file is required");
    return preset.empty() ? io::load_config_file(config_path) : io::load_preset(preset);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// minimal CSV reader: '#' lines are comments, first data line is the header
struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
    std::vector<double> values(int col) const {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[static_cast<std::size_t>(col)]);
        return v;
    }
};

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv file: " + path);
    Csv csv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (csv.columns.empty()) {
            csv.columns = cells;
            continue;
        }
        if (cells.size() != csv.columns.size())
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(csv.columns.size()) +
                                     " cells, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                         ": cannot parse '" + c + "' as a number");
            }
        }
        csv.rows.push_back(std::move(row));
    }
    if (csv.columns.empty()) throw std::runtime_error(path + ": no header row");
    return csv;
}

correlate::CorrelationWindow window_from_ns(double bin_width_ns, double tau_min_ns,
                                            double tau_max_ns) {
    correlate::CorrelationWindow w;
    w.bin_width_ps = std::llround(bin_width_ns * 1000.0);
    w.tau_min_ps = std::llround(tau_min_ns * 1000.0);
    w.tau_max_ps = std::llround(tau_max_ns * 1000.0);
    w.validate();
    return w;
}

void write_json_report(const std::string& base, const json& j) {
    report::write_text_file(base + ".json", j.dump(2) + "\n");
    report::write_text_file(base + ".txt", report::render_text(j));
}

G2Curve curve_from_csv(const Csv& csv) {
    const int tau = csv.column("tau_ns");
    if (tau < 0) throw std::runtime_error("csv: missing tau_ns column");
    int value = csv.column("g2_corrected");
    std::string sigma_name = "g2_corrected_sigma";
    if (value < 0) {
        value = csv.column("cn");
        sigma_name = "cn_sigma";
    }
    if (value < 0) {
        value = csv.column("value");
        sigma_name = "sigma";
    }
    if (value < 0)
        throw std::runtime_error("csv: need a g2_corrected, cn, or value column");
    const int sigma = csv.column(sigma_name);

    G2Curve curve;
    curve.kind = G2Curve::Kind::background_corrected;
    for (const auto& row : csv.rows) {
        curve.delays_ns.push_back(row[static_cast<std::size_t>(tau)]);
        curve.values.push_back(row[static_cast<std::size_t>(value)]);
        curve.sigma.push_back(sigma >= 0 ? row[static_cast<std::size_t>(sigma)] : 0.0);
    }
    return curve;
}

} // namespace

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        io::ExperimentConfig cfg = resolve_config(options.preset, options.config_path);
        if (options.has_seed) cfg.seed = options.seed;
        if (options.has_acquisition) cfg.acquisition_s = options.acquisition_s;
        cfg.validate();
        const int threads = resolve_threads(options.threads);

        report::write_text_file(join(options.out_dir, "config.txt"), cfg.to_text());

        // no thread count or timestamps in the output: the same config and
        // seed must produce byte-identical files on any machine
        json run;
        run["version"] = kVersion;
        run["label"] = cfg.label;
        run["seed"] = cfg.seed;
        json points = json::array();
        for (std::size_t i = 0; i < cfg.powers_mw.size(); ++i) {
            const auto point = run_power_point(cfg, i, threads);
            const std::string tag = "p" + std::to_string(i);

            json block = report::power_point_block(point);
            if (options.write_streams) {
                const std::string f1 = "det1_" + tag + ".stream";
                const std::string f2 = "det2_" + tag + ".stream";
                io::write_stream(point.clicks.detector1, join(options.out_dir, f1));
                io::write_stream(point.clicks.detector2, join(options.out_dir, f2));
                block["stream_files"] = {f1, f2};
            }
            const std::string hist_name = "hist_" + tag + ".csv";
            const std::string curve_name = "g2_" + tag + ".csv";
            report::write_text_file(join(options.out_dir, hist_name),
                                    report::histogram_csv(point.histogram));
            report::write_text_file(join(options.out_dir, curve_name),
                                    report::curves_csv(point.normalized, point.corrected));
            block["histogram_file"] = hist_name;
            block["curves_file"] = curve_name;
            points.push_back(block);

            out << cfg.label << " " << point.power_mw << " mW: rates " << point.rate1_per_s
                << " / " << point.rate2_per_s << " per s, coincidences "
                << point.histogram.total_counts() << ", corrected g2(0) = "
                << block["g2_corrected_zero"].get<double>() << "\n";
        }
        run["points"] = points;
        run["config"] = cfg.to_text();
        write_json_report(join(options.out_dir, "run"), run);
        out << "wrote " << join(options.out_dir, "run.json") << "\n";
        return 0;
    });
}

int cmd_correlate(const CorrelateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (options.starts_path.empty() || options.stops_path.empty())
            throw std::invalid_argument("correlate needs a start and a stop stream file");
        const auto window =
            window_from_ns(options.bin_width_ns, options.tau_min_ns, options.tau_max_ns);

        const PhotonStream starts = io::read_stream(options.starts_path);
        const bool self = options.stops_path == options.starts_path;
        const PhotonStream stops_storage = self ? PhotonStream{} : io::read_stream(options.stops_path);
        const PhotonStream& stops = self ? starts : stops_storage;

        correlate::CoincidenceHistogram hist;
        if (options.tac) {
            hist = correlate::tac_histogram(starts, stops, window,
                                            static_cast<std::uint64_t>(std::llround(
                                                options.tac_delay_ns * 1000.0)));
        } else {
            hist = correlate::pair_histogram(starts, stops, window,
                                             resolve_threads(options.threads));
        }
        const auto normalized = correlate::normalize(hist);
        const auto corrected = correlate::background_correct(normalized, options.rho);

        report::write_text_file(options.out_prefix + "_hist.csv", report::histogram_csv(hist));
        report::write_text_file(options.out_prefix + "_g2.csv",
                                report::curves_csv(normalized, corrected));

        json j;
        j["version"] = kVersion;
        j["starts"] = options.starts_path;
        j["stops"] = options.stops_path;
        j["mode"] = options.tac ? "tac" : "all-pairs";
        j["rho"] = options.rho;
        j["rate1_per_s"] = hist.rate1_per_s;
        j["rate2_per_s"] = hist.rate2_per_s;
        j["acquisition_s"] = hist.acquisition_s;
        j["coincidences_total"] = hist.total_counts();
        if (window.tau_min_ps <= 0 && window.effective_tau_max_ps() >= 0) {
            const auto cn0 = correlate::zero_delay_value(normalized);
            const auto g2c0 = correlate::zero_delay_value(corrected);
            j["cn_zero"] = cn0.value;
            j["cn_zero_sigma"] = cn0.sigma;
            j["g2_corrected_zero"] = g2c0.value;
            j["g2_corrected_zero_sigma"] = g2c0.sigma;
            j["emitter_count"] = report::emitter_count_block(g2c0.value, g2c0.sigma);
        }
        write_json_report(options.out_prefix, j);
        out << report::render_text(j);
        return 0;
    });
}

int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (options.input_csv.empty()) throw std::invalid_argument("fit needs an input csv");
        const Csv csv = read_csv(options.input_csv);

        inference::FitResult fit;
        if (options.model == "dip") {
            fit = inference::fit_exponential_dip(curve_from_csv(csv));
        } else if (options.model == "three-level") {
            fit = inference::fit_three_level(curve_from_csv(csv), options.fix_bunching);
        } else if (options.model == "saturation") {
            if (options.emitter.empty())
                throw std::invalid_argument(
                    "saturation fit needs --emitter (preset name or config file)");
            const io::ExperimentConfig cfg = io::is_preset(options.emitter)
                                                 ? io::load_preset(options.emitter)
                                                 : io::load_config_file(options.emitter);
            const int p = csv.column("power_mw"), r = csv.column("rate_per_s");
            if (p < 0 || r < 0)
                throw std::runtime_error("csv: need power_mw and rate_per_s columns");
            fit = inference::fit_saturation(csv.values(p), csv.values(r), cfg.emitter,
                                            options.fit_beta);
        } else if (options.model == "linescan") {
            const int x = csv.column("position_um"), c = csv.column("counts");
            if (x < 0 || c < 0)
                throw std::runtime_error("csv: need position_um and counts columns");
            fit = inference::fit_linescan(csv.values(x), csv.values(c));
        } else {
            throw std::invalid_argument("unknown fit model '" + options.model +
                                        "' (dip, three-level, saturation, linescan)");
        }

        json j;
        j["version"] = kVersion;
        j["model"] = options.model;
        j["input"] = options.input_csv;
        j["fit"] = report::fit_block(fit);
        report::write_text_file(options.out_json, j.dump(2) + "\n");
        out << report::render_text(j);
        if (!fit.converged) {
            err << "fit did not converge" << (fit.note.empty() ? "" : ": " + fit.note) << "\n";
            return 1;
        }
        return 0;
    });
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        std::string preset = options.preset;
        if (preset == "nanocrystal" || preset == "bulk") preset += "-sweep";
        const io::ExperimentConfig cfg = resolve_config(preset, options.config_path);
        const int threads = resolve_threads(options.threads);

        std::vector<inference::PowerSweepPoint> sweep_points;
        std::vector<double> powers, total_rates;
        json points = json::array();
        for (std::size_t i = 0; i < cfg.powers_mw.size(); ++i) {
            const auto point = run_power_point(cfg, i, threads);
            const auto fit = inference::fit_exponential_dip(point.corrected);
            if (!fit.converged) {
                err << "dip fit failed at " << point.power_mw << " mW"
                    << (fit.note.empty() ? "" : ": " + fit.note) << "\n";
                return 1;
            }
            inference::PowerSweepPoint sp;
            sp.power_mw = point.power_mw;
            sp.k_per_ns = fit.value("k_per_ns");
            sp.k_sigma_per_ns = fit.uncertainty("k_per_ns");
            sweep_points.push_back(sp);
            powers.push_back(point.power_mw);
            total_rates.push_back(point.rate1_per_s + point.rate2_per_s);

            if (options.write_curves) {
                const std::string name = "g2_p" + std::to_string(i) + ".csv";
                report::write_text_file(join(options.out_dir, name),
                                        report::curves_csv(point.normalized, point.corrected));
            }
            json row;
            row["power_mw"] = sp.power_mw;
            row["k_per_ns"] = sp.k_per_ns;
            row["k_sigma_per_ns"] = sp.k_sigma_per_ns;
            row["contrast"] = fit.value("contrast");
            row["baseline"] = fit.value("baseline");
            row["rate_total_per_s"] = total_rates.back();
            points.push_back(row);
            out << cfg.label << " " << sp.power_mw << " mW: k = " << sp.k_per_ns
                << " per ns (sigma " << sp.k_sigma_per_ns << ")\n";
        }

        const auto lifetime = inference::extrapolate_lifetime(sweep_points);

        json j;
        j["version"] = kVersion;
        j["label"] = cfg.label;
        j["seed"] = cfg.seed;
        j["acquisition_s"] = cfg.acquisition_s;
        j["points"] = points;
        j["lifetime_fit"] = report::fit_block(lifetime);
        // the saturation model needs at least 4 points; a 3-point sweep is
        // still fine for the lifetime extrapolation, so just skip it
        if (powers.size() >= 4) {
            const auto saturation = inference::fit_saturation(
                powers, total_rates, cfg.emitter, cfg.emitter.pump_shelving_beta > 0.0);
            j["saturation_fit"] = report::fit_block(saturation);
        }
        j["medium"] = report::medium_block(cfg.medium);
        json cmp;
        cmp["tau_fit_ns"] = lifetime.value("tau_ns");
        cmp["tau_fit_sigma_ns"] = lifetime.uncertainty("tau_ns");
        cmp["nanocrystal_prediction_ns"] = photophysics::nanocrystal_lifetime_ns(cfg.medium);
        cmp["bulk_lifetime_ns"] = cfg.medium.bulk_lifetime_ns;
        j["comparison"] = cmp;
        write_json_report(join(options.out_dir, "sweep"), j);

        out << "zero-power dip width: tau = " << lifetime.value("tau_ns") << " ns (sigma "
            << lifetime.uncertainty("tau_ns") << ")\n";
        out << "wrote " << join(options.out_dir, "sweep.json") << "\n";
        return lifetime.converged ? 0 : 1;
    });
}

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        json rep;
        rep["version"] = kVersion;

        photophysics::MediumModel medium;
        medium.bulk_index = options.bulk_index;
        medium.substrate_index = options.substrate_index;
        medium.local_field_factor = options.local_field;
        medium.bulk_lifetime_ns = options.bulk_lifetime_ns;
        rep["medium"] = report::medium_block(medium);

        if (options.has_g2_zero)
            rep["emitter_count"] =
                report::emitter_count_block(options.g2_zero, options.g2_zero_sigma);
        if (options.has_cn_zero) {
            const std::vector<double> p1s =
                options.p1_values.empty() ? std::vector<double>{0.1} : options.p1_values;
            rep["multiphoton"] = report::multiphoton_block(options.cn_zero, p1s);
        }

        struct SweepRow {
            std::string label;
            double slope = 0.0, slope_sigma = 0.0;
        };
        std::vector<SweepRow> rows;
        if (!options.sweep_jsons.empty()) {
            json sweeps = json::array();
            for (const auto& path : options.sweep_jsons) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot open sweep file: " + path);
                const json sj = json::parse(in);
                const auto& params = sj.at("lifetime_fit").at("parameters");
                json row;
                row["file"] = path;
                row["label"] = sj.at("label");
                row["gamma_per_ns"] = params.at("gamma_per_ns").at("value");
                row["gamma_sigma_per_ns"] = params.at("gamma_per_ns").at("sigma");
                row["tau_ns"] = params.at("tau_ns").at("value");
                row["tau_sigma_ns"] = params.at("tau_ns").at("sigma");
                row["slope_per_ns_per_mw"] = params.at("slope_per_ns_per_mw").at("value");
                sweeps.push_back(row);
                rows.push_back({sj.at("label").get<std::string>(),
                                params.at("slope_per_ns_per_mw").at("value").get<double>(),
                                params.at("slope_per_ns_per_mw").at("sigma").get<double>()});
            }
            rep["sweeps"] = sweeps;
            if (rows.size() >= 2) {
                // pump-efficiency ratio of the first two sweeps
                const double ratio = rows[0].slope / rows[1].slope;
                const double rel0 = rows[0].slope_sigma / rows[0].slope;
                const double rel1 = rows[1].slope_sigma / rows[1].slope;
                json jr;
                jr["labels"] = {rows[0].label, rows[1].label};
                jr["value"] = ratio;
                jr["sigma"] = std::abs(ratio) * std::hypot(rel0, rel1);
                rep["slope_ratio"] = jr;
            }
        }

        write_json_report(options.out_prefix, rep);
        out << report::render_text(rep);
        return 0;
    });
}

int cmd_presets(std::ostream& out) {
    for (const auto& name : io::preset_names()) out << name << "\n";
    return 0;
}

int cmd_preset_show(const std::string& name, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        out << io::preset_text(name);
        return 0;
    });
}

} // namespace nvsim::cli
