#pragma once

#include <string>
#include <vector>

namespace nvsim {

/// Normalized second-order correlation curve.
/// delays are bin centers (or evaluation points) in ns, may be negative.
/// sigma entries are per-point standard errors; 0 marks an exact
/// (noise-free, analytic) value.
struct G2Curve {
    enum class Kind { raw_normalized, background_corrected, analytic };

    std::vector<double> delays_ns;
    std::vector<double> values;
    std::vector<double> sigma;
    Kind kind = Kind::raw_normalized;

    std::size_t size() const { return delays_ns.size(); }

    /// Throws std::invalid_argument on size mismatch or a value below -5 sigma
    /// (correlations are non-negative up to noise).
    void validate() const;
};

std::string to_string(G2Curve::Kind kind);

} // namespace nvsim
