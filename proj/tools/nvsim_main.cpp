// nvsim: simulate single-photon emitters, build coincidence histograms,
// and fit the standard photophysics models. See README for a walkthrough.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "nvsim/commands.hpp"
#include "nvsim/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"single-photon emitter simulation and correlation analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", nvsim::kVersion);
    int rc = 0;

    nvsim::cli::SimulateOptions sim;
    auto* s = app.add_subcommand(
        "simulate", "run a configured experiment: emitter, detection chain, histograms");
    s->add_option("--preset", sim.preset, "built-in preset (see 'nvsim presets')");
    s->add_option("--config", sim.config_path, "experiment config file")
        ->check(CLI::ExistingFile);
    s->add_option("--out", sim.out_dir, "output directory")->capture_default_str();
    s->add_option("--threads", sim.threads, "worker threads, 0 = all")->capture_default_str();
    s->add_option("--seed", sim.seed, "override the config seed");
    s->add_option("--time", sim.acquisition_s, "override the acquisition time (s)");
    s->add_flag("--streams,!--no-streams", sim.write_streams,
                "write the detector timestamp streams");
    s->callback([&]() {
        sim.has_seed = s->count("--seed") > 0;
        sim.has_acquisition = s->count("--time") > 0;
        rc = nvsim::cli::cmd_simulate(sim, std::cout, std::cerr);
    });

    nvsim::cli::CorrelateOptions corr;
    auto* c = app.add_subcommand("correlate",
                                 "coincidence histogram and g2 from timestamp streams");
    c->add_option("starts", corr.starts_path, "start-channel stream file")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("stops", corr.stops_path,
                  "stop-channel stream file (omit for autocorrelation)")
        ->check(CLI::ExistingFile);
    c->add_option("--bin-width-ns", corr.bin_width_ns, "histogram bin width (ns)")
        ->capture_default_str();
    c->add_option("--tau-min-ns", corr.tau_min_ns, "lower delay edge (ns)")
        ->capture_default_str();
    c->add_option("--tau-max-ns", corr.tau_max_ns, "upper delay edge (ns)")
        ->capture_default_str();
    c->add_flag("--tac", corr.tac, "emulate a start-stop converter instead of all pairs");
    c->add_option("--tac-delay-ns", corr.tac_delay_ns, "stop-channel electronic delay (ns)")
        ->capture_default_str();
    c->add_option("--rho", corr.rho, "signal fraction for the background correction")
        ->capture_default_str();
    c->add_option("--out", corr.out_prefix, "output file prefix")->capture_default_str();
    c->add_option("--threads", corr.threads, "worker threads, 0 = all")->capture_default_str();
    c->callback([&]() {
        if (corr.stops_path.empty()) corr.stops_path = corr.starts_path;
        rc = nvsim::cli::cmd_correlate(corr, std::cout, std::cerr);
    });

    nvsim::cli::FitOptions fit;
    auto* f = app.add_subcommand("fit", "fit a model to csv data");
    f->add_option("--model", fit.model, "dip | three-level | saturation | linescan")
        ->required();
    f->add_option("--in", fit.input_csv, "input csv")->required()->check(CLI::ExistingFile);
    f->add_option("--out", fit.out_json, "output json")->capture_default_str();
    f->add_flag("--fix-bunching", fit.fix_bunching,
                "three-level: pin the bunching amplitude to zero");
    f->add_flag("--fit-beta", fit.fit_beta, "saturation: fit the pump-induced shelving");
    f->add_option("--emitter", fit.emitter,
                  "saturation: preset or config file providing the level scheme");
    f->callback([&]() { rc = nvsim::cli::cmd_fit(fit, std::cout, std::cerr); });

    nvsim::cli::SweepOptions sweep;
    auto* w = app.add_subcommand(
        "sweep", "power sweep: fit dip widths and extrapolate the zero-power lifetime");
    w->add_option("--preset", sweep.preset,
                  "sweep preset; 'nanocrystal' and 'bulk' resolve to their -sweep variants");
    w->add_option("--config", sweep.config_path, "experiment config file")
        ->check(CLI::ExistingFile);
    w->add_option("--out", sweep.out_dir, "output directory")->capture_default_str();
    w->add_option("--threads", sweep.threads, "worker threads, 0 = all")->capture_default_str();
    w->add_flag("--curves,!--no-curves", sweep.write_curves, "write per-power g2 csv files");
    w->callback([&]() { rc = nvsim::cli::cmd_sweep(sweep, std::cout, std::cerr); });

    nvsim::cli::ReportOptions rep;
    auto* r = app.add_subcommand("report", "combine measurements into a summary report");
    r->add_option("--sweep", rep.sweep_jsons, "sweep.json file (repeatable)");
    r->add_option("--cn0", rep.cn_zero, "measured normalized zero-delay coincidence level");
    r->add_option("--p1", rep.p1_values, "single-photon probability per window (repeatable)");
    r->add_option("--g2zero", rep.g2_zero, "background-corrected g2(0)");
    r->add_option("--g2zero-sigma", rep.g2_zero_sigma, "uncertainty of g2(0)");
    r->add_option("--bulk-index", rep.bulk_index, "host crystal refractive index")
        ->capture_default_str();
    r->add_option("--substrate-index", rep.substrate_index, "substrate refractive index")
        ->capture_default_str();
    r->add_option("--local-field", rep.local_field, "local-field factor")
        ->capture_default_str();
    r->add_option("--bulk-lifetime-ns", rep.bulk_lifetime_ns, "bulk radiative lifetime (ns)")
        ->capture_default_str();
    r->add_option("--out", rep.out_prefix, "output file prefix")->capture_default_str();
    r->callback([&]() {
        rep.has_cn_zero = r->count("--cn0") > 0;
        rep.has_g2_zero = r->count("--g2zero") > 0;
        rc = nvsim::cli::cmd_report(rep, std::cout, std::cerr);
    });

    std::string preset_name;
    auto* p = app.add_subcommand("presets", "list built-in presets, or print one");
    p->add_option("name", preset_name, "preset to print");
    p->callback([&]() {
        rc = preset_name.empty() ? nvsim::cli::cmd_presets(std::cout)
                                 : nvsim::cli::cmd_preset_show(preset_name, std::cout,
                                                               std::cerr);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return rc;
}
