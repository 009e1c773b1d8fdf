#include "nvsim/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nvsim::io {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& key, const std::string& text, int line_no) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        fail(line_no, key + ": cannot parse '" + text + "' as a number");
    }
    if (used != text.size()) fail(line_no, key + ": trailing junk in '" + text + "'");
    if (!std::isfinite(v)) fail(line_no, key + ": value must be finite");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text, int line_no) {
    size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        fail(line_no, key + ": cannot parse '" + text + "' as an unsigned integer");
    }
    if (used != text.size()) fail(line_no, key + ": trailing junk in '" + text + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text,
                                      int line_no) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(line_no, key + ": empty list entry");
        out.push_back(parse_double(key, item, line_no));
    }
    if (out.empty()) fail(line_no, key + ": empty list");
    return out;
}

std::int64_t ns_to_ps(double ns) { return std::llround(ns * 1000.0); }

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_double(v[i]);
    }
    return out;
}

} // namespace

std::string ExperimentConfig::to_text() const {
    std::string t;
    auto kv = [&t](const std::string& k, const std::string& v) { t += k + " = " + v + "\n"; };
    kv("label", label);
    kv("seed", std::to_string(seed));
    kv("acquisition_s", fmt_double(acquisition_s));
    kv("powers_mw", fmt_list(powers_mw));
    kv("kappa_per_s_per_mw", fmt_double(kappa_per_s_per_mw));
    kv("radiative_per_s", fmt_double(emitter.radiative_rate_per_s));
    kv("shelve_per_s", fmt_double(emitter.shelve_rate_per_s));
    kv("deshelve_per_s", fmt_double(emitter.deshelve_rate_per_s));
    kv("pump_shelving_beta", fmt_double(emitter.pump_shelving_beta));
    kv("medium_bulk_index", fmt_double(medium.bulk_index));
    kv("medium_substrate_index", fmt_double(medium.substrate_index));
    kv("medium_local_field", fmt_double(medium.local_field_factor));
    kv("medium_bulk_lifetime_ns", fmt_double(medium.bulk_lifetime_ns));
    kv("split_ratio", fmt_double(hbt.split_ratio));
    kv("background_per_s", fmt_double(hbt.background_rate_per_s));
    kv("tac_delay_ps", std::to_string(hbt.tac_delay_ps));
    kv("det1_efficiency", fmt_double(detector1.efficiency));
    kv("det1_dead_time_ps", std::to_string(detector1.dead_time_ps));
    kv("det1_dark_per_s", fmt_double(detector1.dark_rate_per_s));
    kv("det1_jitter_sigma_ps", fmt_double(detector1.jitter_sigma_ps));
    kv("det2_efficiency", fmt_double(detector2.efficiency));
    kv("det2_dead_time_ps", std::to_string(detector2.dead_time_ps));
    kv("det2_dark_per_s", fmt_double(detector2.dark_rate_per_s));
    kv("det2_jitter_sigma_ps", fmt_double(detector2.jitter_sigma_ps));
    kv("bin_width_ns", fmt_double(window.bin_width_ps / 1000.0));
    kv("tau_min_ns", fmt_double(window.tau_min_ps / 1000.0));
    kv("tau_max_ns", fmt_double(window.tau_max_ps / 1000.0));
    kv("histogram_mode",
       mode == correlate::HistogramMode::all_pairs ? "all-pairs" : "tac");
    return t;
}

void ExperimentConfig::validate() const {
    if (label.empty()) throw std::invalid_argument("config: label must not be empty");
    if (!(acquisition_s > 0.0) || !std::isfinite(acquisition_s))
        throw std::invalid_argument("config: acquisition_s must be positive");
    if (powers_mw.empty()) throw std::invalid_argument("config: powers_mw must not be empty");
    for (double p : powers_mw)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("config: powers_mw entries must be positive");
    if (!(kappa_per_s_per_mw > 0.0) || !std::isfinite(kappa_per_s_per_mw))
        throw std::invalid_argument("config: kappa_per_s_per_mw must be positive");
    emitter.validate();
    if (!(medium.bulk_index >= 1.0) || !(medium.substrate_index >= 1.0))
        throw std::invalid_argument("config: refractive indices must be >= 1");
    if (!(medium.local_field_factor > 0.0))
        throw std::invalid_argument("config: medium_local_field must be positive");
    if (!(medium.bulk_lifetime_ns > 0.0))
        throw std::invalid_argument("config: medium_bulk_lifetime_ns must be positive");
    hbt.validate();
    detector1.validate();
    detector2.validate();
    window.validate();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::set<std::string> seen;
    using Setter = std::function<void(const std::string&, int)>;
    // every key names its unit; times in seconds/ns/ps as suffixed
    const std::map<std::string, Setter> setters = {
        {"label", [&](const std::string& v, int) { c.label = v; }},
        {"seed", [&](const std::string& v, int n) { c.seed = parse_u64("seed", v, n); }},
        {"acquisition_s",
         [&](const std::string& v, int n) { c.acquisition_s = parse_double("acquisition_s", v, n); }},
        {"powers_mw",
         [&](const std::string& v, int n) { c.powers_mw = parse_double_list("powers_mw", v, n); }},
        {"kappa_per_s_per_mw",
         [&](const std::string& v, int n) {
             c.kappa_per_s_per_mw = parse_double("kappa_per_s_per_mw", v, n);
         }},
        {"radiative_per_s",
         [&](const std::string& v, int n) {
             c.emitter.radiative_rate_per_s = parse_double("radiative_per_s", v, n);
         }},
        {"shelve_per_s",
         [&](const std::string& v, int n) {
             c.emitter.shelve_rate_per_s = parse_double("shelve_per_s", v, n);
         }},
        {"deshelve_per_s",
         [&](const std::string& v, int n) {
             c.emitter.deshelve_rate_per_s = parse_double("deshelve_per_s", v, n);
         }},
        {"pump_shelving_beta",
         [&](const std::string& v, int n) {
             c.emitter.pump_shelving_beta = parse_double("pump_shelving_beta", v, n);
         }},
        {"medium_bulk_index",
         [&](const std::string& v, int n) {
             c.medium.bulk_index = parse_double("medium_bulk_index", v, n);
         }},
        {"medium_substrate_index",
         [&](const std::string& v, int n) {
             c.medium.substrate_index = parse_double("medium_substrate_index", v, n);
         }},
        {"medium_local_field",
         [&](const std::string& v, int n) {
             c.medium.local_field_factor = parse_double("medium_local_field", v, n);
         }},
        {"medium_bulk_lifetime_ns",
         [&](const std::string& v, int n) {
             c.medium.bulk_lifetime_ns = parse_double("medium_bulk_lifetime_ns", v, n);
         }},
        {"split_ratio",
         [&](const std::string& v, int n) { c.hbt.split_ratio = parse_double("split_ratio", v, n); }},
        {"background_per_s",
         [&](const std::string& v, int n) {
             c.hbt.background_rate_per_s = parse_double("background_per_s", v, n);
         }},
        {"tac_delay_ps",
         [&](const std::string& v, int n) { c.hbt.tac_delay_ps = parse_u64("tac_delay_ps", v, n); }},
        {"det1_efficiency",
         [&](const std::string& v, int n) {
             c.detector1.efficiency = parse_double("det1_efficiency", v, n);
         }},
        {"det1_dead_time_ps",
         [&](const std::string& v, int n) {
             c.detector1.dead_time_ps = parse_u64("det1_dead_time_ps", v, n);
         }},
        {"det1_dark_per_s",
         [&](const std::string& v, int n) {
             c.detector1.dark_rate_per_s = parse_double("det1_dark_per_s", v, n);
         }},
        {"det1_jitter_sigma_ps",
         [&](const std::string& v, int n) {
             c.detector1.jitter_sigma_ps = parse_double("det1_jitter_sigma_ps", v, n);
         }},
        {"det2_efficiency",
         [&](const std::string& v, int n) {
             c.detector2.efficiency = parse_double("det2_efficiency", v, n);
         }},
        {"det2_dead_time_ps",
         [&](const std::string& v, int n) {
             c.detector2.dead_time_ps = parse_u64("det2_dead_time_ps", v, n);
         }},
        {"det2_dark_per_s",
         [&](const std::string& v, int n) {
             c.detector2.dark_rate_per_s = parse_double("det2_dark_per_s", v, n);
         }},
        {"det2_jitter_sigma_ps",
         [&](const std::string& v, int n) {
             c.detector2.jitter_sigma_ps = parse_double("det2_jitter_sigma_ps", v, n);
         }},
        {"bin_width_ns",
         [&](const std::string& v, int n) {
             c.window.bin_width_ps = ns_to_ps(parse_double("bin_width_ns", v, n));
         }},
        {"tau_min_ns",
         [&](const std::string& v, int n) {
             c.window.tau_min_ps = ns_to_ps(parse_double("tau_min_ns", v, n));
         }},
        {"tau_max_ns",
         [&](const std::string& v, int n) {
             c.window.tau_max_ps = ns_to_ps(parse_double("tau_max_ns", v, n));
         }},
        {"histogram_mode",
         [&](const std::string& v, int n) {
             if (v == "all-pairs") c.mode = correlate::HistogramMode::all_pairs;
             else if (v == "tac") c.mode = correlate::HistogramMode::tac_start_stop;
             else fail(n, "histogram_mode: expected 'all-pairs' or 'tac', got '" + v + "'");
         }},
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "missing key before '='");
        if (value.empty()) fail(line_no, key + ": missing value");
        auto it = setters.find(key);
        if (it == setters.end()) fail(line_no, "unknown key '" + key + "'");
        if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");
        it->second(value, line_no);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

// Presets are stored as commented config text so they can be dumped for the
// user to edit. Operating points are chosen so a full acquisition runs on a
// desk machine in seconds while keeping realistic detector count levels.

const char* kPresetNanocrystal = R"(# Single emitter in a sub-wavelength crystal on a fused-silica substrate.
# Calibrated so that at 2.7 mW the two detectors register about 22500 and
# 24500 clicks per second with a 20:1 signal-to-background ratio on the
# first detector. Collection efficiency is folded into det*_efficiency;
# it is set high so the acquisition is desk-scale instead of lab-scale.
label = nanocrystal
seed = 42
acquisition_s = 300

# pump rate = kappa * power. 2.7 mW sits far below saturation so the
# antibunching dip width stays close to the intrinsic lifetime.
powers_mw = 2.7
kappa_per_s_per_mw = 43600

# 25 ns radiative lifetime: the reduced optical density of states around a
# crystal much smaller than the wavelength stretches the bulk lifetime.
radiative_per_s = 4.0e7
# shelving is pump-induced here (beta = 1), with a slow return to ground;
# this produces the weak bunching shoulder seen at higher powers.
shelve_per_s = 0
deshelve_per_s = 1950
pump_shelving_beta = 1.0

medium_bulk_index = 2.4
medium_substrate_index = 1.45
medium_local_field = 1.0
medium_bulk_lifetime_ns = 11.6

# slightly lopsided splitter, matches the count asymmetry of the two arms
split_ratio = 0.4787234042553192
background_per_s = 3580
tac_delay_ps = 50000

det1_efficiency = 0.45
det1_dead_time_ps = 50000
det1_dark_per_s = 300
det1_jitter_sigma_ps = 0
det2_efficiency = 0.45
det2_dead_time_ps = 50000
det2_dark_per_s = 300
det2_jitter_sigma_ps = 0

bin_width_ns = 1
tau_min_ns = -200
tau_max_ns = 200
histogram_mode = all-pairs
)";

const char* kPresetBulk = R"(# Single emitter deep inside the host crystal. Lifetime is the bulk value;
# scattered pump light raises the background to a 4:1 signal-to-background
# ratio per detector.
label = bulk
seed = 42
acquisition_s = 300

powers_mw = 2.7
kappa_per_s_per_mw = 21800

# bulk radiative lifetime 11.6 ns
radiative_per_s = 8.6206896551724137e7
shelve_per_s = 0
deshelve_per_s = 985
pump_shelving_beta = 1.0

medium_bulk_index = 2.4
medium_substrate_index = 1.45
medium_local_field = 1.0
medium_bulk_lifetime_ns = 11.6

split_ratio = 0.5
background_per_s = 12790
tac_delay_ps = 50000

det1_efficiency = 0.45
det1_dead_time_ps = 50000
det1_dark_per_s = 300
det1_jitter_sigma_ps = 0
det2_efficiency = 0.45
det2_dead_time_ps = 50000
det2_dark_per_s = 300
det2_jitter_sigma_ps = 0

bin_width_ns = 1
tau_min_ns = -200
tau_max_ns = 200
histogram_mode = all-pairs
)";

// The sweep presets strip the emitter down to a clean two-level system
// (no shelving, no background, ideal detectors) so the fitted dip width
// k(P) = pump + radiative is exactly linear in power and the zero-power
// intercept is the bare radiative rate. Short acquisitions per point are
// enough because the count rates are high.

const char* kPresetNanocrystalSweep = R"(# Power sweep for dip-width extrapolation, nanocrystal lifetime (25 ns).
label = nanocrystal-sweep
seed = 1234
acquisition_s = 0.5

powers_mw = 2, 4, 6, 8, 10, 12
kappa_per_s_per_mw = 4.0e6

radiative_per_s = 4.0e7
shelve_per_s = 0
deshelve_per_s = 0
pump_shelving_beta = 0

medium_bulk_index = 2.4
medium_substrate_index = 1.45
medium_local_field = 1.0
medium_bulk_lifetime_ns = 11.6

split_ratio = 0.5
background_per_s = 0
tac_delay_ps = 50000

det1_efficiency = 1
det1_dead_time_ps = 0
det1_dark_per_s = 0
det1_jitter_sigma_ps = 0
det2_efficiency = 1
det2_dead_time_ps = 0
det2_dark_per_s = 0
det2_jitter_sigma_ps = 0

bin_width_ns = 0.5
tau_min_ns = -150
tau_max_ns = 150
histogram_mode = all-pairs
)";

const char* kPresetBulkSweep = R"(# Power sweep for dip-width extrapolation, bulk lifetime (11.6 ns).
# Same sweep powers as the nanocrystal sweep with half the pump efficiency.
label = bulk-sweep
seed = 1234
acquisition_s = 0.5

powers_mw = 2, 4, 6, 8, 10, 12
kappa_per_s_per_mw = 2.0e6

radiative_per_s = 8.6206896551724137e7
shelve_per_s = 0
deshelve_per_s = 0
pump_shelving_beta = 0

medium_bulk_index = 2.4
medium_substrate_index = 1.45
medium_local_field = 1.0
medium_bulk_lifetime_ns = 11.6

split_ratio = 0.5
background_per_s = 0
tac_delay_ps = 50000

det1_efficiency = 1
det1_dead_time_ps = 0
det1_dark_per_s = 0
det1_jitter_sigma_ps = 0
det2_efficiency = 1
det2_dead_time_ps = 0
det2_dark_per_s = 0
det2_jitter_sigma_ps = 0

bin_width_ns = 0.5
tau_min_ns = -150
tau_max_ns = 150
histogram_mode = all-pairs
)";

const char* kPresetShelving = R"(# Strongly shelving emitter: the correlation function rises above one on
# intermediate timescales (photon bunching) before settling to the long-time
# plateau. Ideal detection, wide delay window to resolve the slow decay.
label = shelving
seed = 77
acquisition_s = 2

powers_mw = 2.7
kappa_per_s_per_mw = 4444444.444444444

radiative_per_s = 4.0e7
shelve_per_s = 4.0e6
deshelve_per_s = 2.0e6
pump_shelving_beta = 0

medium_bulk_index = 2.4
medium_substrate_index = 1.45
medium_local_field = 1.0
medium_bulk_lifetime_ns = 11.6

split_ratio = 0.5
background_per_s = 0
tac_delay_ps = 50000

det1_efficiency = 1
det1_dead_time_ps = 0
det1_dark_per_s = 0
det1_jitter_sigma_ps = 0
det2_efficiency = 1
det2_dead_time_ps = 0
det2_dark_per_s = 0
det2_jitter_sigma_ps = 0

bin_width_ns = 2
tau_min_ns = -1500
tau_max_ns = 1500
histogram_mode = all-pairs
)";

const std::map<std::string, const char*>& preset_table() {
    static const std::map<std::string, const char*> table = {
        {"nanocrystal", kPresetNanocrystal},
        {"bulk", kPresetBulk},
        {"nanocrystal-sweep", kPresetNanocrystalSweep},
        {"bulk-sweep", kPresetBulkSweep},
        {"shelving", kPresetShelving},
    };
    return table;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : preset_table()) names.push_back(name);
    return names;
}

bool is_preset(const std::string& name) { return preset_table().count(name) != 0; }

std::string preset_text(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end())
        throw std::invalid_argument("unknown preset '" + name + "'");
    return it->second;
}

ExperimentConfig load_preset(const std::string& name) {
    return parse_config(preset_text(name));
}

} // namespace nvsim::io
