#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nvsim::cli {

/// Command implementations behind the nvsim binary. They are plain functions
/// so tests can drive them in-process. All return a process exit code:
///   0  success
///   1  operational failure (I/O, fit did not converge)
///   2  bad usage (unknown preset, malformed config or arguments)

struct SimulateOptions {
    std::string preset;      // built-in preset name ...
    std::string config_path; // ... or a config file; exactly one of the two
    std::string out_dir = "out";
    int threads = 0; // 0 = all hardware threads
    bool write_streams = true;
    bool has_seed = false;
    std::uint64_t seed = 0; // optional override
    bool has_acquisition = false;
    double acquisition_s = 0.0; // optional override
};
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct CorrelateOptions {
    std::string starts_path; // stream file, start channel
    std::string stops_path;  // stream file, stop channel; same path = autocorrelation
    double bin_width_ns = 1.0;
    double tau_min_ns = -200.0;
    double tau_max_ns = 200.0;
    bool tac = false; // start-stop converter emulation instead of all pairs
    double tac_delay_ns = 50.0;
    double rho = 1.0; // signal fraction for the background correction
    std::string out_prefix = "corr";
    int threads = 0;
};
int cmd_correlate(const CorrelateOptions& options, std::ostream& out, std::ostream& err);

struct FitOptions {
    std::string model;     // dip | three-level | saturation | linescan
    std::string input_csv; // columns depend on the model, see README
    std::string out_json = "fit.json";
    bool fix_bunching = false; // three-level: pin the bunching amplitude to 0
    bool fit_beta = false;     // saturation: fit the pump-induced shelving
    std::string emitter;       // saturation: preset name or config file for the
                               // level-scheme template
};
int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err);

struct SweepOptions {
    std::string preset; // "nanocrystal" and "bulk" resolve to their -sweep presets
    std::string config_path;
    std::string out_dir = "sweep";
    int threads = 0;
    bool write_curves = true;
};
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

struct ReportOptions {
    std::vector<std::string> sweep_jsons; // sweep.json files to combine
    bool has_cn_zero = false;
    double cn_zero = 0.0; // measured normalized zero-delay level
    std::vector<double> p1_values; // trigger-window photon numbers; default 0.1
    bool has_g2_zero = false;
    double g2_zero = 0.0; // corrected zero-delay value
    double g2_zero_sigma = 0.0;
    double bulk_index = 2.4;
    double substrate_index = 1.45;
    double local_field = 1.0;
    double bulk_lifetime_ns = 11.6;
    std::string out_prefix = "report";
};
int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err);

/// List the built-in presets (one per line) or print one preset's text.
int cmd_presets(std::ostream& out);
int cmd_preset_show(const std::string& name, std::ostream& out, std::ostream& err);

} // namespace nvsim::cli
