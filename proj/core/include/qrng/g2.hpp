#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qrng {

/// Signed-lag coincidence histogram between two channels, normalized by the
/// uncorrelated-pair expectation rate_a * rate_b * bin_width * total_time so
/// that Poissonian light sits at 1.0. The bin containing lag 0 is centered
/// at 0; bin k covers ((k-1/2)*bin_width, (k+1/2)*bin_width].
struct G2Curve {
    double bin_width_ns = 0.0;
    std::vector<double> lags_ns;        ///< bin centers, -K..K
    std::vector<std::uint64_t> counts;  ///< raw coincidences per bin
    std::vector<double> normalized;     ///< counts / (rate_a*rate_b*bin*T)
    double total_time_ns = 0.0;         ///< common observation span
    double rate_a = 0.0;                ///< singles rate of stream a (1/ns)
    double rate_b = 0.0;                ///< singles rate of stream b (1/ns)

    std::size_t zero_bin() const { return lags_ns.size() / 2; }
};

/// Histogram all pairs (t_a, t_b) with |t_b - t_a| within the bin span into
/// signed-lag bins via a two-pointer sweep: O(n + m + pairs-in-window).
/// Streams are picosecond timestamps and must be sorted ascending; bin
/// parameters are in ns. The window extends half a bin beyond the last bin
/// center so every reported bin is fully covered.
///
/// With exclude_equal_index = true, pairs at the same array index are not
/// counted; use this (or autocorrelation()) when a and b are the same stream.
G2Curve histogram_coincidences(const std::vector<std::int64_t>& a_ps,
                               const std::vector<std::int64_t>& b_ps,
                               double bin_width_ns, double max_lag_ns,
                               bool exclude_equal_index = false);

/// Self-correlation of one stream, excluding self-pairs.
G2Curve autocorrelation(const std::vector<std::int64_t>& ps, double bin_width_ns,
                        double max_lag_ns);

/// CSV export: header "lag_ns,counts,normalized".
std::string g2_to_csv(const G2Curve& curve);

}  // namespace qrng
