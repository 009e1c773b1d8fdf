#include "nvsim/fitting.hpp"

#include <cmath>
#include <stdexcept>

namespace nvsim::inference {

double FitResult::value(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw std::invalid_argument("fit result: no parameter named " + name);
}

double FitResult::uncertainty(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return uncertainties[i];
    throw std::invalid_argument("fit result: no parameter named " + name);
}

namespace {

// Solve A x = b for small dense symmetric systems, Gaussian elimination with
// partial pivoting. Returns false when singular.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
    return true;
}

// Invert a small symmetric positive matrix in place via Gauss-Jordan.
bool invert_dense(std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    a = std::move(inv);
    return true;
}

double sum_sq(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

} // namespace

FitResult lm_fit(const ResidualFn& residuals, std::size_t n_residuals,
                 const std::vector<std::string>& names, std::vector<double> initial,
                 const LmOptions& options) {
    const std::size_t np = initial.size();
    if (names.size() != np)
        throw std::invalid_argument("lm_fit: names/initial size mismatch");
    if (n_residuals < np)
        throw std::invalid_argument("lm_fit: fewer residuals than parameters");

    std::vector<double> p = std::move(initial);
    std::vector<double> r(n_residuals), r_try(n_residuals);
    std::vector<std::vector<double>> jac(np, std::vector<double>(n_residuals));

    residuals(p, r);
    double chi2 = sum_sq(r);

    FitResult result;
    result.names = names;
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    auto fill_jacobian = [&](const std::vector<double>& at, const std::vector<double>& r0) {
        std::vector<double> pp = at;
        std::vector<double> rp(n_residuals);
        for (std::size_t k = 0; k < np; ++k) {
            const double h = options.fd_step * std::max(std::fabs(at[k]), 1e-10);
            pp[k] = at[k] + h;
            residuals(pp, rp);
            pp[k] = at[k];
            for (std::size_t i = 0; i < n_residuals; ++i)
                jac[k][i] = (rp[i] - r0[i]) / h;
        }
    };

    for (; iter < options.max_iterations && !converged; ++iter) {
        fill_jacobian(p, r);

        // Normal equations JtJ and gradient Jt r.
        std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
        std::vector<double> jtr(np, 0.0);
        for (std::size_t a = 0; a < np; ++a) {
            for (std::size_t b = a; b < np; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_residuals; ++i) s += jac[a][i] * jac[b][i];
                jtj[a][b] = jtj[b][a] = s;
            }
            double g = 0.0;
            for (std::size_t i = 0; i < n_residuals; ++i) g += jac[a][i] * r[i];
            jtr[a] = g;
        }

        bool stepped = false;
        for (int damp = 0; damp < 40; ++damp) {
            auto a = jtj;
            for (std::size_t k = 0; k < np; ++k)
                a[k][k] += lambda * std::max(jtj[k][k], 1e-30);
            std::vector<double> delta = jtr;
            for (double& d : delta) d = -d;
            if (!solve_dense(a, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> p_try(np);
            for (std::size_t k = 0; k < np; ++k) p_try[k] = p[k] + delta[k];
            residuals(p_try, r_try);
            const double chi2_try = sum_sq(r_try);
            if (std::isfinite(chi2_try) && chi2_try <= chi2) {
                double max_rel = 0.0;
                for (std::size_t k = 0; k < np; ++k)
                    max_rel = std::max(max_rel,
                                       std::fabs(delta[k]) / std::max(std::fabs(p[k]), 1e-30));
                p = std::move(p_try);
                r = r_try;
                chi2 = chi2_try;
                lambda = std::max(lambda * 0.25, 1e-12);
                stepped = true;
                if (max_rel < options.parameter_tolerance) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            // Damping exhausted without improvement: local minimum reached.
            converged = true;
        }
    }

    if (!std::isfinite(chi2)) {
        converged = false;
        result.note = "non-finite chi-square";
    }
    result.values = p;
    result.iterations = iter;
    result.converged = converged;
    const std::size_t dof = n_residuals > np ? n_residuals - np : 1;
    result.chi2_reduced = chi2 / static_cast<double>(dof);
    result.uncertainties.assign(np, 0.0);

    if (converged) {
        fill_jacobian(p, r);
        std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = a; b < np; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_residuals; ++i) s += jac[a][i] * jac[b][i];
                jtj[a][b] = jtj[b][a] = s;
            }
        if (invert_dense(jtj)) {
            const double scale = options.scale_covariance_by_chi2 ? result.chi2_reduced : 1.0;
            for (std::size_t k = 0; k < np; ++k)
                result.uncertainties[k] = std::sqrt(std::max(jtj[k][k] * scale, 0.0));
        } else {
            result.note = "covariance singular";
        }
    }
    return result;
}

LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& weights) {
    if (x.size() != y.size() || x.size() != weights.size())
        throw std::invalid_argument("weighted_line_fit: size mismatch");
    if (x.size() < 2)
        throw std::invalid_argument("weighted_line_fit: need at least two points");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = weights[i];
        if (!(w > 0.0))
            throw std::invalid_argument("weighted_line_fit: weights must be positive");
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (!(std::fabs(det) > 0.0))
        throw std::invalid_argument("weighted_line_fit: degenerate abscissa (zero spread)");
    LineFit fit;
    fit.intercept = (swxx * swy - swx * swxy) / det;
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept_sigma = std::sqrt(swxx / det);
    fit.slope_sigma = std::sqrt(sw / det);
    fit.dof = static_cast<int>(x.size()) - 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double resid = y[i] - fit.intercept - fit.slope * x[i];
        fit.chi2 += weights[i] * resid * resid;
    }
    return fit;
}

} // namespace nvsim::inference
