#pragma once

#include <vector>

#include "nvsim/fitting.hpp"
#include "nvsim/g2_curve.hpp"
#include "nvsim/photophysics.hpp"

namespace nvsim::inference {

/// One power point of a pump-power sweep: fitted antibunching-dip rate
/// constant k (1/ns) and its standard error.
struct PowerSweepPoint {
    double power_mw = 0.0;
    double k_per_ns = 0.0;
    double k_sigma_per_ns = 0.0;
};

struct EmitterCountEstimate {
    double estimate = 1.0;  // 1 / (1 - g2(0))
    int rounded = 1;
    bool ambiguous = false; // fractional estimate > 0.25 from every integer
};

/// Fit baseline * (1 - contrast * exp(-k |tau|)) to a correlation curve.
/// Parameters: k_per_ns, contrast, baseline. Requires >= 10 points.
/// Zero sigma entries get unit weight (exact curves).
FitResult fit_exponential_dip(const G2Curve& curve);

/// Fit the three-level form 1 - (1+a) exp(-l1 |tau|) + a exp(-l2 |tau|).
/// Parameters: lambda1_per_ns (fast), lambda2_per_ns (slow), bunching_a.
/// With fix_bunching_to_zero the model collapses to 1 - exp(-l1 |tau|).
/// Near-equal rates are flagged in the result note.
FitResult fit_three_level(const G2Curve& curve, bool fix_bunching_to_zero = false);

/// Weighted linear extrapolation of dip widths to zero pump power:
/// k(P) = gamma + slope * P. Returns gamma_per_ns, slope_per_ns_per_mw,
/// tau_ns = 1/gamma with propagated uncertainties. Requires >= 3 points with
/// a non-degenerate power spread.
FitResult extrapolate_lifetime(const std::vector<PowerSweepPoint>& points);

/// Fit measured rate-vs-power points with the steady-state emission model
/// amplitude * p_excited(kappa * P) of the supplied scheme template.
/// Parameters: amplitude_per_s, kappa_per_s_per_mw, and optionally beta.
/// Requires >= 4 points.
FitResult fit_saturation(const std::vector<double>& powers_mw,
                         const std::vector<double>& rates_per_s,
                         const photophysics::LevelScheme& scheme_template,
                         bool fit_beta = false);

/// Fit counts(x) = background + signal * exp(-(x - x0)^2 / (2 sx^2)) to a
/// confocal line scan with Poisson weights. Parameters: background, signal,
/// center_um, sigma_um; derived signal_to_background and fwhm_um are appended.
/// A scan with no significant peak comes back converged = false.
FitResult fit_linescan(const std::vector<double>& positions_um,
                       const std::vector<double>& counts);

/// Number of independent equal-rate emitters consistent with a corrected
/// g2(0): p = 1 / (1 - g2_zero). Requires 0 <= g2_zero < 1.
EmitterCountEstimate estimate_emitter_count(double g2_zero);

/// Probability of >= 2 photons in a trigger window with mean photon number
/// p1, given the measured normalized zero-delay coincidence level:
/// p2 = cn_zero * p1^2 / 2. A Poissonian source has cn_zero = 1.
double multiphoton_probability(double cn_zero, double p1);

} // namespace nvsim::inference
