#include "qrng/g2.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

void check_sorted(const std::vector<std::int64_t>& ps, const char* which) {
    for (std::size_t i = 1; i < ps.size(); ++i)
        if (ps[i] < ps[i - 1])
            throw ConfigError(std::string("histogram_coincidences: stream ") + which +
                              " is not sorted");
}

}  // namespace

G2Curve histogram_coincidences(const std::vector<std::int64_t>& a_ps,
                               const std::vector<std::int64_t>& b_ps,
                               double bin_width_ns, double max_lag_ns,
                               bool exclude_equal_index) {
    if (a_ps.empty() || b_ps.empty())
        throw ConfigError("histogram_coincidences: empty stream (rates undefined)");
    if (!(std::isfinite(bin_width_ns) && bin_width_ns > 0.0))
        throw ConfigError("histogram_coincidences: bin_width_ns must be > 0");
    if (!(std::isfinite(max_lag_ns) && max_lag_ns >= bin_width_ns))
        throw ConfigError("histogram_coincidences: max_lag_ns must be >= bin_width_ns");
    check_sorted(a_ps, "a");
    check_sorted(b_ps, "b");

    const int k_max = static_cast<int>(std::floor(max_lag_ns / bin_width_ns + 1e-9));
    const std::size_t n_bins = static_cast<std::size_t>(2 * k_max + 1);
    const double window_ns = (k_max + 0.5) * bin_width_ns;
    const std::int64_t window_ps =
        static_cast<std::int64_t>(std::ceil(window_ns * 1000.0));

    G2Curve curve;
    curve.bin_width_ns = bin_width_ns;
    curve.counts.assign(n_bins, 0);
    curve.lags_ns.resize(n_bins);
    for (int k = -k_max; k <= k_max; ++k)
        curve.lags_ns[static_cast<std::size_t>(k + k_max)] = k * bin_width_ns;

    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < a_ps.size(); ++i) {
        const std::int64_t ta = a_ps[i];
        while (lo < b_ps.size() && b_ps[lo] < ta - window_ps) ++lo;
        if (hi < lo) hi = lo;
        while (hi < b_ps.size() && b_ps[hi] <= ta + window_ps) ++hi;
        for (std::size_t j = lo; j < hi; ++j) {
            if (exclude_equal_index && j == i) continue;
            const double lag_ns = static_cast<double>(b_ps[j] - ta) * 1e-3;
            const int k = static_cast<int>(std::floor(lag_ns / bin_width_ns + 0.5));
            if (k < -k_max || k > k_max) continue;  // inside window_ps, outside last bin
            ++curve.counts[static_cast<std::size_t>(k + k_max)];
        }
    }

    const std::int64_t t_min = std::min(a_ps.front(), b_ps.front());
    const std::int64_t t_max = std::max(a_ps.back(), b_ps.back());
    curve.total_time_ns = static_cast<double>(t_max - t_min) * 1e-3;
    if (curve.total_time_ns <= 0.0)
        throw ConfigError("histogram_coincidences: zero observation span");
    curve.rate_a = static_cast<double>(a_ps.size()) / curve.total_time_ns;
    curve.rate_b = static_cast<double>(b_ps.size()) / curve.total_time_ns;

    const double norm =
        curve.rate_a * curve.rate_b * curve.bin_width_ns * curve.total_time_ns;
    curve.normalized.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
        curve.normalized[k] = static_cast<double>(curve.counts[k]) / norm;
    return curve;
}

G2Curve autocorrelation(const std::vector<std::int64_t>& ps, double bin_width_ns,
                        double max_lag_ns) {
    return histogram_coincidences(ps, ps, bin_width_ns, max_lag_ns, true);
}

std::string g2_to_csv(const G2Curve& curve) {
    std::ostringstream out;
    out.precision(12);
    out << "lag_ns,counts,normalized\n";
    for (std::size_t k = 0; k < curve.lags_ns.size(); ++k)
        out << curve.lags_ns[k] << ',' << curve.counts[k] << ',' << curve.normalized[k]
            << '\n';
    return out.str();
}

}  // namespace qrng
