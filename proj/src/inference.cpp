#include "nvsim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nvsim::inference {

namespace {

struct WeightedData {
    const G2Curve* curve;
    std::vector<double> weights; // 1/sigma, or 1 for exact points
};

WeightedData weighted(const G2Curve& curve) {
    WeightedData d{&curve, {}};
    d.weights.resize(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
        d.weights[i] = curve.sigma[i] > 0.0 ? 1.0 / curve.sigma[i] : 1.0;
    return d;
}

double baseline_estimate(const G2Curve& curve) {
    // Median of the outer 25% of delay magnitudes.
    std::vector<std::pair<double, double>> bydist;
    bydist.reserve(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
        bydist.emplace_back(std::fabs(curve.delays_ns[i]), curve.values[i]);
    std::sort(bydist.begin(), bydist.end());
    const std::size_t n0 = bydist.size() - std::max<std::size_t>(bydist.size() / 4, 2);
    std::vector<double> tail;
    for (std::size_t i = n0; i < bydist.size(); ++i) tail.push_back(bydist[i].second);
    std::sort(tail.begin(), tail.end());
    return tail[tail.size() / 2];
}

// Initial decay constant from where the dip recovers to half depth.
double dip_rate_guess(const G2Curve& curve, double baseline, double contrast) {
    const double half = baseline * (1.0 - 0.5 * contrast);
    double tau_half = 0.0;
    std::vector<std::pair<double, double>> bydist;
    for (std::size_t i = 0; i < curve.size(); ++i)
        bydist.emplace_back(std::fabs(curve.delays_ns[i]), curve.values[i]);
    std::sort(bydist.begin(), bydist.end());
    for (const auto& [d, v] : bydist)
        if (v >= half && d > 0.0) { tau_half = d; break; }
    if (tau_half <= 0.0) tau_half = bydist.back().first / 10.0;
    return std::log(2.0) / std::max(tau_half, 1e-6);
}

} // namespace

FitResult fit_exponential_dip(const G2Curve& curve) {
    if (curve.size() < 10)
        throw std::invalid_argument("fit_exponential_dip: need at least 10 points");
    const WeightedData data = weighted(curve);

    const double b0 = std::max(baseline_estimate(curve), 1e-6);
    double vmin = curve.values[0];
    for (double v : curve.values) vmin = std::min(vmin, v);
    const double a0 = std::clamp(1.0 - vmin / b0, 0.05, 1.2);
    const double k0 = dip_rate_guess(curve, b0, a0);

    const auto model = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double k = p[0], a = p[1], b = p[2];
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double f = b * (1.0 - a * std::exp(-k * std::fabs(curve.delays_ns[i])));
            r[i] = (curve.values[i] - f) * data.weights[i];
        }
    };
    return lm_fit(model, curve.size(), {"k_per_ns", "contrast", "baseline"}, {k0, a0, b0});
}

FitResult fit_three_level(const G2Curve& curve, bool fix_bunching_to_zero) {
    if (curve.size() < 10)
        throw std::invalid_argument("fit_three_level: need at least 10 points");
    const WeightedData data = weighted(curve);

    if (fix_bunching_to_zero) {
        const double k0 = dip_rate_guess(curve, 1.0, 1.0);
        const auto model = [&](const std::vector<double>& p, std::vector<double>& r) {
            for (std::size_t i = 0; i < curve.size(); ++i) {
                const double f = 1.0 - std::exp(-p[0] * std::fabs(curve.delays_ns[i]));
                r[i] = (curve.values[i] - f) * data.weights[i];
            }
        };
        FitResult res = lm_fit(model, curve.size(), {"lambda1_per_ns"}, {k0});
        res.names.insert(res.names.end(), {"lambda2_per_ns", "bunching_a"});
        res.values.insert(res.values.end(), {0.0, 0.0});
        res.uncertainties.insert(res.uncertainties.end(), {0.0, 0.0});
        return res;
    }

    double vmax = curve.values[0];
    double dmax = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        vmax = std::max(vmax, curve.values[i]);
        dmax = std::max(dmax, std::fabs(curve.delays_ns[i]));
    }
    const double a0 = std::max(vmax - 1.0, 0.02);
    const double l1_0 = dip_rate_guess(curve, 1.0 + a0, 1.0);
    const double l2_0 = std::max(2.0 / dmax, l1_0 / 50.0);

    const auto model = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double l1 = p[0], l2 = p[1], a = p[2];
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double d = std::fabs(curve.delays_ns[i]);
            const double f = 1.0 - (1.0 + a) * std::exp(-l1 * d) + a * std::exp(-l2 * d);
            r[i] = (curve.values[i] - f) * data.weights[i];
        }
    };
    FitResult res = lm_fit(model, curve.size(), {"lambda1_per_ns", "lambda2_per_ns", "bunching_a"},
                           {l1_0, l2_0, a0});
    if (res.converged && res.values[0] < res.values[1]) {
        // Keep lambda1 the fast rate. Amplitude transforms accordingly:
        // swapping the exponentials maps a -> -(1+a).
        std::swap(res.values[0], res.values[1]);
        std::swap(res.uncertainties[0], res.uncertainties[1]);
        res.values[2] = -(1.0 + res.values[2]);
        res.note = "eigenvalues reordered";
    }
    if (res.converged &&
        std::fabs(res.values[0] - res.values[1]) < 1e-3 * std::fabs(res.values[0])) {
        res.note = res.note.empty() ? "degenerate rates" : res.note + "; degenerate rates";
    }
    return res;
}

FitResult extrapolate_lifetime(const std::vector<PowerSweepPoint>& points) {
    if (points.size() < 3)
        throw std::invalid_argument("extrapolate_lifetime: need at least 3 sweep points");
    std::vector<double> x, y, w;
    double pmin = points.front().power_mw, pmax = pmin;
    for (const auto& pt : points) {
        if (!(pt.k_per_ns > 0.0))
            throw std::invalid_argument("extrapolate_lifetime: dip rate must be positive");
        x.push_back(pt.power_mw);
        y.push_back(pt.k_per_ns);
        const double s = pt.k_sigma_per_ns > 0.0 ? pt.k_sigma_per_ns : 1e-6;
        w.push_back(1.0 / (s * s));
        pmin = std::min(pmin, pt.power_mw);
        pmax = std::max(pmax, pt.power_mw);
    }
    if (!(pmax > pmin))
        throw std::invalid_argument("extrapolate_lifetime: zero power spread");

    const LineFit line = weighted_line_fit(x, y, w);
    FitResult res;
    res.names = {"gamma_per_ns", "slope_per_ns_per_mw", "tau_ns"};
    const double gamma = line.intercept;
    res.values = {gamma, line.slope, 1.0 / gamma};
    res.uncertainties = {line.intercept_sigma, line.slope_sigma,
                         line.intercept_sigma / (gamma * gamma)};
    res.chi2_reduced = line.dof > 0 ? line.chi2 / line.dof : 0.0;
    res.converged = gamma > 0.0;
    if (!res.converged) res.note = "non-positive zero-power intercept";
    res.iterations = 0;
    return res;
}

FitResult fit_saturation(const std::vector<double>& powers_mw,
                         const std::vector<double>& rates_per_s,
                         const photophysics::LevelScheme& scheme_template,
                         bool fit_beta) {
    if (powers_mw.size() != rates_per_s.size())
        throw std::invalid_argument("fit_saturation: size mismatch");
    if (powers_mw.size() < 4)
        throw std::invalid_argument("fit_saturation: need at least 4 points");

    double rate_max = 0.0, p_at_max = 1.0, pmax = 0.0;
    for (std::size_t i = 0; i < powers_mw.size(); ++i) {
        if (rates_per_s[i] > rate_max) {
            rate_max = rates_per_s[i];
            p_at_max = std::max(powers_mw[i], 1e-9);
        }
        pmax = std::max(pmax, powers_mw[i]);
    }
    if (!(rate_max > 0.0))
        throw std::invalid_argument("fit_saturation: all rates zero");

    // Guess: knee near the maximum-rate power.
    const double kappa0 = scheme_template.radiative_rate_per_s / p_at_max;
    const double amp0 = rate_max * 2.0;

    const auto model_rate = [&](double amplitude, double kappa, double beta, double power) {
        photophysics::LevelScheme s = scheme_template.with_pump(kappa * power);
        s.pump_shelving_beta = beta;
        return amplitude * photophysics::steady_state(s).excited;
    };

    const auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double beta = fit_beta ? p[2] : scheme_template.pump_shelving_beta;
        for (std::size_t i = 0; i < powers_mw.size(); ++i) {
            if (p[1] <= 0.0 || (fit_beta && p[2] < 0.0)) {
                r[i] = 1e12; // out of the physical domain
                continue;
            }
            r[i] = rates_per_s[i] - model_rate(p[0], p[1], beta, powers_mw[i]);
        }
    };

    std::vector<std::string> names = {"amplitude_per_s", "kappa_per_s_per_mw"};
    std::vector<double> init = {amp0, kappa0};
    if (fit_beta) {
        names.push_back("beta");
        init.push_back(std::max(scheme_template.pump_shelving_beta, 0.1));
    }
    LmOptions opt;
    opt.scale_covariance_by_chi2 = true; // rates carry no per-point errors
    FitResult res = lm_fit(residuals, powers_mw.size(), names, init, opt);

    if (res.converged) {
        // Locate the fitted curve's maximum on a fine grid over the scan.
        const double beta = fit_beta ? res.values[2] : scheme_template.pump_shelving_beta;
        double best_rate = 0.0, best_p = 0.0;
        for (int i = 1; i <= 2000; ++i) {
            const double p = pmax * i / 2000.0;
            const double v = model_rate(res.values[0], res.values[1], beta, p);
            if (v > best_rate) {
                best_rate = v;
                best_p = p;
            }
        }
        res.names.insert(res.names.end(), {"peak_rate_per_s", "peak_power_mw"});
        res.values.insert(res.values.end(), {best_rate, best_p});
        res.uncertainties.insert(res.uncertainties.end(), {0.0, 0.0});
    }
    return res;
}

FitResult fit_linescan(const std::vector<double>& positions_um,
                       const std::vector<double>& counts) {
    if (positions_um.size() != counts.size())
        throw std::invalid_argument("fit_linescan: size mismatch");
    if (positions_um.size() < 6)
        throw std::invalid_argument("fit_linescan: need at least 6 points");

    double cmin = counts[0], cmax = counts[0], x_at_max = positions_um[0];
    double xmin = positions_um[0], xmax = positions_um[0];
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0.0)
            throw std::invalid_argument("fit_linescan: negative counts");
        if (counts[i] > cmax) {
            cmax = counts[i];
            x_at_max = positions_um[i];
        }
        cmin = std::min(cmin, counts[i]);
        xmin = std::min(xmin, positions_um[i]);
        xmax = std::max(xmax, positions_um[i]);
    }

    const double b0 = std::max(cmin, 1e-3);
    const double s0 = std::max(cmax - cmin, 1e-3);
    const double sx0 = std::max((xmax - xmin) / 10.0, 1e-3);

    const auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double dx = positions_um[i] - p[2];
            const double f = p[0] + p[1] * std::exp(-dx * dx / (2.0 * p[3] * p[3]));
            r[i] = (counts[i] - f) / std::sqrt(std::max(counts[i], 1.0)); // Poisson weights
        }
    };
    FitResult res = lm_fit(residuals, counts.size(),
                           {"background", "signal", "center_um", "sigma_um"},
                           {b0, s0, x_at_max, sx0});

    if (res.converged) {
        const double signal = res.values[1];
        const double sig_err = res.uncertainties[1];
        if (!(signal > 0.0) || signal < 3.0 * sig_err) {
            res.converged = false;
            res.note = "no significant peak";
            return res;
        }
        res.values[3] = std::fabs(res.values[3]);
        const double background = std::max(res.values[0], 0.0);
        res.names.insert(res.names.end(), {"signal_to_background", "fwhm_um"});
        res.values.insert(res.values.end(),
                          {background > 0.0 ? signal / background
                                            : std::numeric_limits<double>::infinity(),
                           2.0 * std::sqrt(2.0 * std::log(2.0)) * res.values[3]});
        res.uncertainties.insert(res.uncertainties.end(), {0.0, 0.0});
    }
    return res;
}

EmitterCountEstimate estimate_emitter_count(double g2_zero) {
    if (!(g2_zero >= 0.0 && g2_zero < 1.0))
        throw std::invalid_argument("estimate_emitter_count: g2(0) must be in [0, 1)");
    EmitterCountEstimate est;
    est.estimate = 1.0 / (1.0 - g2_zero);
    est.rounded = std::max(1, static_cast<int>(std::lround(est.estimate)));
    est.ambiguous = std::fabs(est.estimate - std::lround(est.estimate)) > 0.25;
    return est;
}

double multiphoton_probability(double cn_zero, double p1) {
    if (!(cn_zero >= 0.0) || !std::isfinite(cn_zero))
        throw std::invalid_argument("multiphoton_probability: cn_zero must be non-negative");
    if (!(p1 >= 0.0 && p1 <= 1.0))
        throw std::invalid_argument("multiphoton_probability: p1 must be in [0, 1]");
    return cn_zero * p1 * p1 / 2.0;
}

} // namespace nvsim::inference
