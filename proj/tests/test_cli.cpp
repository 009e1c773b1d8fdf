#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

#include "nvsim/commands.hpp"
#include "nvsim/config.hpp"

using namespace nvsim;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "nvsim_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// small, fast two-level run: 0.05 s at 8e6 emitted photons per second
const char* kFastConfig = "label = clitest\n"
                          "seed = 9\n"
                          "acquisition_s = 0.05\n"
                          "powers_mw = 5\n"
                          "kappa_per_s_per_mw = 2e6\n"
                          "radiative_per_s = 4e7\n"
                          "shelve_per_s = 0\n"
                          "deshelve_per_s = 0\n"
                          "pump_shelving_beta = 0\n"
                          "split_ratio = 0.5\n"
                          "background_per_s = 0\n"
                          "det1_efficiency = 1\n"
                          "det1_dead_time_ps = 0\n"
                          "det1_dark_per_s = 0\n"
                          "det2_efficiency = 1\n"
                          "det2_dead_time_ps = 0\n"
                          "det2_dark_per_s = 0\n"
                          "bin_width_ns = 1\n"
                          "tau_min_ns = -100\n"
                          "tau_max_ns = 100\n";

std::string write_config(const std::string& name, const std::string& text) {
    const auto path = work_dir() / name;
    std::ofstream(path) << text;
    return path.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("simulate: outputs, determinism, byte-identical reruns") {
    const auto cfg = write_config("fast.conf", kFastConfig);
    const auto dir_a = (work_dir() / "run_a").string();
    const auto dir_b = (work_dir() / "run_b").string();

    cli::SimulateOptions opt;
    opt.config_path = cfg;
    opt.out_dir = dir_a;
    opt.threads = 2;
    std::ostringstream out, err;
    REQUIRE(cli::cmd_simulate(opt, out, err) == 0);
    CHECK(err.str().empty());
    CHECK(out.str().find("clitest") != std::string::npos);

    for (const char* name : {"run.json", "run.txt", "config.txt", "det1_p0.stream",
                             "det2_p0.stream", "hist_p0.csv", "g2_p0.csv"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(dir_a) / name));
    }

    const auto run = ordered_json::parse(slurp(fs::path(dir_a) / "run.json"));
    CHECK(run.at("label") == "clitest");
    const auto& point = run.at("points").at(0);
    // two-level emitter at pump 1e7: emitted rate 8e6, split over two ideal arms
    CHECK(point.at("rate1_per_s").get<double>() == doctest::Approx(4e6).epsilon(0.02));
    CHECK(point.at("rate2_per_s").get<double>() == doctest::Approx(4e6).epsilon(0.02));
    CHECK(point.at("rho_effective").get<double>() == 1.0);
    CHECK(point.at("g2_corrected_zero").get<double>() < 0.1);
    CHECK(point.at("emitter_count").at("rounded").get<int>() == 1);

    // a second run with the same config and seed is byte-identical
    opt.out_dir = dir_b;
    opt.threads = 7; // thread count must not matter
    std::ostringstream out2;
    REQUIRE(cli::cmd_simulate(opt, out2, err) == 0);
    CHECK(slurp(fs::path(dir_a) / "run.json") == slurp(fs::path(dir_b) / "run.json"));
    CHECK(slurp(fs::path(dir_a) / "det1_p0.stream") ==
          slurp(fs::path(dir_b) / "det1_p0.stream"));
    CHECK(slurp(fs::path(dir_a) / "det2_p0.stream") ==
          slurp(fs::path(dir_b) / "det2_p0.stream"));
    CHECK(slurp(fs::path(dir_a) / "g2_p0.csv") == slurp(fs::path(dir_b) / "g2_p0.csv"));
}

TEST_CASE("simulate: usage errors") {
    std::ostringstream out, err;
    cli::SimulateOptions both;
    both.preset = "nanocrystal";
    both.config_path = "x.conf";
    CHECK(cli::cmd_simulate(both, out, err) == 2);

    cli::SimulateOptions neither;
    CHECK(cli::cmd_simulate(neither, out, err) == 2);

    cli::SimulateOptions unknown;
    unknown.preset = "granite";
    CHECK(cli::cmd_simulate(unknown, out, err) == 2);
    CHECK(err.str().find("granite") != std::string::npos);
}

TEST_CASE("correlate: cross and auto correlation from stream files") {
    const auto dir = (work_dir() / "run_a").string(); // produced above
    REQUIRE(fs::exists(fs::path(dir) / "det1_p0.stream"));

    cli::CorrelateOptions opt;
    opt.starts_path = (fs::path(dir) / "det1_p0.stream").string();
    opt.stops_path = (fs::path(dir) / "det2_p0.stream").string();
    opt.out_prefix = (work_dir() / "corr").string();
    opt.threads = 2;
    std::ostringstream out, err;
    REQUIRE(cli::cmd_correlate(opt, out, err) == 0);
    CHECK(fs::exists(opt.out_prefix + ".json"));
    CHECK(fs::exists(opt.out_prefix + "_hist.csv"));
    CHECK(fs::exists(opt.out_prefix + "_g2.csv"));
    const auto j = ordered_json::parse(slurp(opt.out_prefix + ".json"));
    CHECK(j.at("coincidences_total").get<std::uint64_t>() > 100);
    CHECK(j.at("g2_corrected_zero").get<double>() < 0.2);

    // same file on both channels: autocorrelation of one detector
    cli::CorrelateOptions self = opt;
    self.stops_path = self.starts_path;
    self.out_prefix = (work_dir() / "auto").string();
    std::ostringstream out2;
    REQUIRE(cli::cmd_correlate(self, out2, err) == 0);
    const auto ja = ordered_json::parse(slurp(self.out_prefix + ".json"));
    CHECK(ja.at("coincidences_total").get<std::uint64_t>() > 0);

    cli::CorrelateOptions missing = opt;
    missing.starts_path = (work_dir() / "nope.stream").string();
    CHECK(cli::cmd_correlate(missing, out2, err) == 1);
}

TEST_CASE("correlate: tac mode runs") {
    const auto dir = (work_dir() / "run_a").string();
    cli::CorrelateOptions opt;
    opt.starts_path = (fs::path(dir) / "det1_p0.stream").string();
    opt.stops_path = (fs::path(dir) / "det2_p0.stream").string();
    opt.tac = true;
    opt.tac_delay_ns = 150.0; // cover the full negative delay axis
    opt.out_prefix = (work_dir() / "tac").string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_correlate(opt, out, err) == 0);
    const auto j = ordered_json::parse(slurp(opt.out_prefix + ".json"));
    CHECK(j.at("mode") == "tac");
    CHECK(j.at("coincidences_total").get<std::uint64_t>() > 0);
}

TEST_CASE("fit: dip and three-level from the generated csv") {
    const auto csv = (work_dir() / "run_a" / "g2_p0.csv").string();
    cli::FitOptions opt;
    opt.model = "dip";
    opt.input_csv = csv;
    opt.out_json = (work_dir() / "fit_dip.json").string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_fit(opt, out, err) == 0);
    const auto j = ordered_json::parse(slurp(opt.out_json));
    const double k = j.at("fit").at("parameters").at("k_per_ns").at("value").get<double>();
    CHECK(k == doctest::Approx(0.05).epsilon(0.10)); // pump 1e7 + decay 4e7

    cli::FitOptions tl = opt;
    tl.model = "three-level";
    tl.fix_bunching = true;
    tl.out_json = (work_dir() / "fit_tl.json").string();
    REQUIRE(cli::cmd_fit(tl, out, err) == 0);
    const auto jt = ordered_json::parse(slurp(tl.out_json));
    CHECK(jt.at("fit").at("parameters").at("lambda1_per_ns").at("value").get<double>() ==
          doctest::Approx(k).epsilon(0.05));
}

TEST_CASE("fit: saturation and linescan from csv") {
    // saturation data straight from the two-level steady state
    std::string sat = "power_mw,rate_per_s\n";
    for (int i = 1; i <= 8; ++i) {
        const double r = 4e6 * i;
        const double pe = r / (r + 4e7);
        sat += std::to_string(i) + "," + std::to_string(2e7 * pe) + "\n";
    }
    const auto sat_csv = write_config("sat.csv", sat);
    cli::FitOptions opt;
    opt.model = "saturation";
    opt.input_csv = sat_csv;
    opt.emitter = "nanocrystal-sweep"; // two-level template
    opt.out_json = (work_dir() / "fit_sat.json").string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_fit(opt, out, err) == 0);
    const auto j = ordered_json::parse(slurp(opt.out_json));
    CHECK(j.at("fit").at("parameters").at("kappa_per_s_per_mw").at("value").get<double>() ==
          doctest::Approx(4e6).epsilon(0.01));

    std::string scan = "position_um,counts\n";
    for (int i = 0; i <= 60; ++i) {
        const double x = 0.1 * i;
        const double mean = 80.0 + 700.0 * std::exp(-(x - 3.0) * (x - 3.0) / (2.0 * 0.16));
        scan += std::to_string(x) + "," + std::to_string(std::floor(mean)) + "\n";
    }
    const auto scan_csv = write_config("scan.csv", scan);
    cli::FitOptions ls;
    ls.model = "linescan";
    ls.input_csv = scan_csv;
    ls.out_json = (work_dir() / "fit_scan.json").string();
    REQUIRE(cli::cmd_fit(ls, out, err) == 0);
    const auto js = ordered_json::parse(slurp(ls.out_json));
    CHECK(js.at("fit").at("parameters").at("center_um").at("value").get<double>() ==
          doctest::Approx(3.0).epsilon(0.02));

    cli::FitOptions bad = opt;
    bad.model = "polynomial";
    CHECK(cli::cmd_fit(bad, out, err) == 2);
    cli::FitOptions gone = opt;
    gone.input_csv = (work_dir() / "missing.csv").string();
    CHECK(cli::cmd_fit(gone, out, err) == 1);
    cli::FitOptions no_emitter = opt;
    no_emitter.emitter.clear();
    CHECK(cli::cmd_fit(no_emitter, out, err) == 2);
}

TEST_CASE("sweep and report: lifetime extrapolation round trip") {
    const std::string sweep_cfg = "label = mini-sweep\n"
                                  "seed = 33\n"
                                  "acquisition_s = 0.05\n"
                                  "powers_mw = 2, 6, 12\n"
                                  "kappa_per_s_per_mw = 4e6\n"
                                  "radiative_per_s = 4e7\n"
                                  "split_ratio = 0.5\n"
                                  "background_per_s = 0\n"
                                  "det1_efficiency = 1\n"
                                  "det1_dead_time_ps = 0\n"
                                  "det1_dark_per_s = 0\n"
                                  "det2_efficiency = 1\n"
                                  "det2_dead_time_ps = 0\n"
                                  "det2_dark_per_s = 0\n"
                                  "bin_width_ns = 0.5\n"
                                  "tau_min_ns = -150\n"
                                  "tau_max_ns = 150\n";
    const auto cfg = write_config("sweep.conf", sweep_cfg);
    cli::SweepOptions opt;
    opt.config_path = cfg;
    opt.out_dir = (work_dir() / "sweep").string();
    opt.threads = 2;
    std::ostringstream out, err;
    REQUIRE(cli::cmd_sweep(opt, out, err) == 0);
    const auto sweep_json = fs::path(opt.out_dir) / "sweep.json";
    REQUIRE(fs::exists(sweep_json));
    const auto j = ordered_json::parse(slurp(sweep_json));
    CHECK(j.at("points").size() == 3);
    const double tau =
        j.at("lifetime_fit").at("parameters").at("tau_ns").at("value").get<double>();
    CHECK(tau == doctest::Approx(25.0).epsilon(0.12));
    CHECK(fs::exists(fs::path(opt.out_dir) / "g2_p2.csv"));

    // combine the same sweep twice: the slope ratio must come out at one
    cli::ReportOptions rep;
    rep.sweep_jsons = {sweep_json.string(), sweep_json.string()};
    rep.has_cn_zero = true;
    rep.cn_zero = 0.17;
    rep.has_g2_zero = true;
    rep.g2_zero = 0.05;
    rep.out_prefix = (work_dir() / "report").string();
    REQUIRE(cli::cmd_report(rep, out, err) == 0);
    const auto r = ordered_json::parse(slurp(rep.out_prefix + ".json"));
    CHECK(r.at("slope_ratio").at("value").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.at("multiphoton").at("windows").at(0).at("p2").get<double>() ==
          doctest::Approx(8.5e-4).epsilon(1e-9));
    CHECK(r.at("emitter_count").at("rounded").get<int>() == 1);
    CHECK(r.at("medium").at("nanocrystal_lifetime_ns").get<double>() ==
          doctest::Approx(22.7265306).epsilon(1e-6));

    cli::ReportOptions missing;
    missing.sweep_jsons = {(work_dir() / "no_sweep.json").string()};
    CHECK(cli::cmd_report(missing, out, err) == 1);
}

TEST_CASE("presets command") {
    std::ostringstream out, err;
    CHECK(cli::cmd_presets(out) == 0);
    CHECK(out.str().find("nanocrystal\n") != std::string::npos);
    CHECK(out.str().find("shelving\n") != std::string::npos);

    std::ostringstream text;
    CHECK(cli::cmd_preset_show("bulk", text, err) == 0);
    CHECK(text.str().find("label = bulk") != std::string::npos);
    CHECK(cli::cmd_preset_show("granite", text, err) == 2);
}

TEST_CASE("installed binary smoke test") {
    const char* bin = std::getenv("NVSIM_BIN");
    if (bin == nullptr) {
        MESSAGE("NVSIM_BIN not set; skipping binary smoke test");
        return;
    }
    const std::string b(bin);
    CHECK(run_command(b + " --version > /dev/null") == 0);
    CHECK(run_command(b + " presets | grep -q nanocrystal") == 0);
    CHECK(run_command(b + " presets bulk | grep -q 'label = bulk'") == 0);
    CHECK(run_command(b + " definitely-not-a-command > /dev/null 2>&1") == 2);
    CHECK(run_command(b + " fit --model dip > /dev/null 2>&1") == 2); // missing --in

    const auto cfg = write_config("smoke.conf", kFastConfig);
    const auto dir = (work_dir() / "bin_run").string();
    CHECK(run_command(b + " simulate --config " + cfg + " --out " + dir +
                      " --no-streams > /dev/null") == 0);
    CHECK(fs::exists(fs::path(dir) / "run.json"));
    CHECK_FALSE(fs::exists(fs::path(dir) / "det1_p0.stream"));
}
