#include "qrng/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

struct Model {
    const std::vector<double>& lags;
    const std::vector<double>& values;
    const std::vector<double>& sigmas;

    double cost(double a, double tau) const {
        double sum = 0.0;
        for (std::size_t k = 0; k < lags.size(); ++k) {
            const double r = (1.0 - a * std::exp(-std::abs(lags[k]) / tau) - values[k]) /
                             sigmas[k];
            sum += r * r;
        }
        return sum;
    }
};

double clamp_a(double a) { return std::clamp(a, 0.0, 1.0); }

}  // namespace

AntibunchFit fit_antibunching(const G2Curve& curve) {
    const std::size_t n = curve.lags_ns.size();
    if (n < 5)
        throw ConfigError("fit_antibunching: need at least 5 bins");
    if (curve.normalized.size() != n || curve.counts.size() != n)
        throw ConfigError("fit_antibunching: inconsistent curve arrays");

    // Poisson weights from raw counts; zero-count bins weighted as one count.
    const double norm_const =
        curve.rate_a * curve.rate_b * curve.bin_width_ns * curve.total_time_ns;
    std::vector<double> sigmas(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double c = std::max<double>(static_cast<double>(curve.counts[k]), 1.0);
        sigmas[k] = std::sqrt(c) / norm_const;
    }
    Model model{curve.lags_ns, curve.normalized, sigmas};

    // init: a0 from the curve minimum, tau0 from the 1 - a0/e recovery lag
    double min_value = curve.normalized[0];
    for (const double v : curve.normalized) min_value = std::min(min_value, v);
    double a = clamp_a(1.0 - min_value);
    const double recovery_level = 1.0 - a / std::exp(1.0);
    double tau = 0.0;
    const double max_lag = std::abs(curve.lags_ns.back());
    {
        // scan |lag| ascending, averaging the +/- bins
        const std::size_t zero = curve.zero_bin();
        for (std::size_t off = 1; zero + off < n; ++off) {
            const double y =
                0.5 * (curve.normalized[zero + off] + curve.normalized[zero - off]);
            if (y >= recovery_level) {
                tau = curve.lags_ns[zero + off];
                break;
            }
        }
        if (tau <= 0.0) tau = max_lag / 3.0;
    }

    if (n >= 2 && max_lag < 3.0 * tau)
        throw ConfigError("fit_antibunching: curve must span at least 3 lifetimes");

    std::ostringstream trace;
    trace.precision(10);
    AntibunchFit fit;
    bool singular = false;
    double cost = model.cost(a, tau);
    int iter = 0;
    for (; iter < 200; ++iter) {
        // Gauss-Newton normal equations on whitened residuals
        double jaa = 0.0, jat = 0.0, jtt = 0.0, ga = 0.0, gt = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double al = std::abs(curve.lags_ns[k]);
            const double e = std::exp(-al / tau);
            const double r = (1.0 - a * e - curve.normalized[k]) / sigmas[k];
            const double ja = -e / sigmas[k];
            const double jt = -a * e * al / (tau * tau) / sigmas[k];
            jaa += ja * ja;
            jat += ja * jt;
            jtt += jt * jt;
            ga += ja * r;
            gt += jt * r;
        }
        const double det = jaa * jtt - jat * jat;
        trace << "iter " << iter << ": a=" << a << " tau=" << tau << " cost=" << cost
              << "\n";
        if (!(std::isfinite(det)) || std::abs(det) < 1e-300 * std::max(jaa, jtt) ||
            jtt == 0.0) {
            singular = true;
            break;
        }
        const double da = (-ga * jtt + gt * jat) / det;
        const double dtau = (-gt * jaa + ga * jat) / det;

        double step = 1.0;
        double next_a = a, next_tau = tau, next_cost = cost;
        bool improved = false;
        for (int halving = 0; halving < 60; ++halving) {
            const double ca = clamp_a(a + step * da);
            const double ct = std::max(tau + step * dtau, 1e-9);
            const double c = model.cost(ca, ct);
            if (c < cost) {
                next_a = ca;
                next_tau = ct;
                next_cost = c;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            // stationary within line-search resolution
            fit.converged = true;
            break;
        }
        const double rel_step =
            std::max(std::abs(next_a - a) / std::max(std::abs(a), 1e-12),
                     std::abs(next_tau - tau) / std::max(std::abs(tau), 1e-12));
        a = next_a;
        tau = next_tau;
        cost = next_cost;
        if (rel_step < 1e-8) {
            fit.converged = true;
            break;
        }
    }

    if (!fit.converged && !singular)
        throw FitError("fit_antibunching: no convergence in 200 iterations", trace.str());

    fit.contrast_a = a;
    fit.tau0_ns = tau;
    fit.g2_at_zero = 1.0 - a;
    fit.iterations = iter;
    fit.at_bound = (a <= 0.0 || a >= 1.0);

    // parameter covariance from the linearized normal equations
    double jaa = 0.0, jat = 0.0, jtt = 0.0, rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double al = std::abs(curve.lags_ns[k]);
        const double e = std::exp(-al / tau);
        const double r = (1.0 - a * e - curve.normalized[k]) / sigmas[k];
        const double ja = -e / sigmas[k];
        const double jt = -a * e * al / (tau * tau) / sigmas[k];
        jaa += ja * ja;
        jat += ja * jt;
        jtt += jt * jt;
        rss += r * r;
    }
    fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
    const double det = jaa * jtt - jat * jat;
    if (std::isfinite(det) && det > 0.0) {
        fit.stderr_a = std::sqrt(jtt / det);
        fit.stderr_tau0 = std::sqrt(jaa / det);
    } else {
        fit.stderr_a = std::numeric_limits<double>::infinity();
        fit.stderr_tau0 = std::numeric_limits<double>::infinity();
        singular = true;
    }

    // no usable dip: amplitude insignificant or tau unconstrained
    fit.unidentifiable = singular || fit.contrast_a < 0.02 ||
                         fit.contrast_a < 3.0 * fit.stderr_a ||
                         fit.stderr_tau0 > std::abs(fit.tau0_ns);
    if (singular) fit.converged = true;  // flagged result, not an error
    return fit;
}

std::string AntibunchFit::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{\n"
        << "  \"contrast_a\": " << contrast_a << ",\n"
        << "  \"tau0_ns\": " << tau0_ns << ",\n"
        << "  \"g2_at_zero\": " << g2_at_zero << ",\n"
        << "  \"residual_rms\": " << residual_rms << ",\n"
        << "  \"stderr_a\": " << stderr_a << ",\n"
        << "  \"stderr_tau0_ns\": " << stderr_tau0 << ",\n"
        << "  \"iterations\": " << iterations << ",\n"
        << "  \"converged\": " << (converged ? "true" : "false") << ",\n"
        << "  \"at_bound\": " << (at_bound ? "true" : "false") << ",\n"
        << "  \"unidentifiable\": " << (unidentifiable ? "true" : "false") << "\n"
        << "}\n";
    return out.str();
}

}  // namespace qrng
