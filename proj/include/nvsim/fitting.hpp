#pragma once

#include <functional>
#include <string>
#include <vector>

namespace nvsim::inference {

/// Outcome of a weighted least-squares fit. Parameter uncertainties are only
/// meaningful when converged is true; non-convergence is reported here rather
/// than thrown so callers can decide.
struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> uncertainties;
    double chi2_reduced = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string note;

    double value(const std::string& name) const;
    double uncertainty(const std::string& name) const;
};

/// Residual vector callback: fill r with (data - model) / sigma at params p.
using ResidualFn = std::function<void(const std::vector<double>& p, std::vector<double>& r)>;

struct LmOptions {
    int max_iterations = 200;
    double parameter_tolerance = 1e-10; // relative step below which we stop
    double fd_step = 1e-6;              // relative finite-difference step
    bool scale_covariance_by_chi2 = false; // for unweighted (sigma-less) fits
};

/// Levenberg-Marquardt with a numeric forward-difference Jacobian.
/// n_residuals must not change between calls.
FitResult lm_fit(const ResidualFn& residuals, std::size_t n_residuals,
                 const std::vector<std::string>& names, std::vector<double> initial,
                 const LmOptions& options = {});

/// Weighted straight-line fit y = intercept + slope * x, closed form.
/// weights are 1/sigma_y^2.
struct LineFit {
    double intercept = 0.0, slope = 0.0;
    double intercept_sigma = 0.0, slope_sigma = 0.0;
    double chi2 = 0.0;
    int dof = 0;
};
LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& weights);

} // namespace nvsim::inference
