#include "qrng/randtests.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <future>
#include <numeric>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/fft.hpp"
#include "qrng/gf2.hpp"
#include "qrng/special.hpp"

namespace qrng {

namespace {

using Bits = std::vector<std::uint8_t>;

constexpr std::uint64_t kBatteryMinBits = 100;

double safe_log2(double x) { return std::log(x) * 1.4426950408889634074; }

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

TestResult make_skip(std::string name, std::string reason) {
    TestResult r;
    r.name = std::move(name);
    r.skipped = true;
    r.skip_reason = std::move(reason);
    r.pass = false;
    return r;
}

void finalize_pass(TestResult& r, double alpha) {
    r.pass = !r.p_values.empty();
    for (const double p : r.p_values)
        if (!(p >= alpha)) r.pass = false;
}

// ---------------------------------------------------------------------------
// individual test implementations on unpacked bits
// ---------------------------------------------------------------------------

TestResult frequency_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "frequency";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");
    std::int64_t sum = 0;
    for (const auto b : eps) sum += b ? 1 : -1;
    const double s_obs =
        std::abs(static_cast<double>(sum)) / std::sqrt(static_cast<double>(n));
    r.statistic = s_obs;
    r.parameters = "n=" + std::to_string(n);
    r.p_values = {erfc(s_obs / std::sqrt(2.0))};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult block_frequency_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "block_frequency";
    const std::size_t n = eps.size();
    const std::size_t M = static_cast<std::size_t>(params.block_frequency_block_len);
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");
    const std::size_t N = n / M;
    if (N == 0) return make_skip(r.name, "input shorter than one block");
    double chi2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < M; ++j) ones += eps[i * M + j];
        const double pi = static_cast<double>(ones) / static_cast<double>(M);
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * static_cast<double>(M);
    r.statistic = chi2;
    r.parameters = "M=" + std::to_string(M) + " N=" + std::to_string(N);
    r.p_values = {regularized_gamma_q(static_cast<double>(N) / 2.0, chi2 / 2.0)};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult cumulative_sums_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "cumulative_sums";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    double max_z = 0.0;
    for (int mode = 0; mode < 2; ++mode) {
        std::int64_t sum = 0;
        std::int64_t peak = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = (mode == 0) ? i : (n - 1 - i);
            sum += eps[idx] ? 1 : -1;
            peak = std::max(peak, std::abs(sum));
        }
        const double z = static_cast<double>(peak);
        max_z = std::max(max_z, z);
        double sum1 = 0.0;
        const long k1_lo = static_cast<long>(
            std::floor((-static_cast<double>(n) / z + 1.0) / 4.0));
        const long k1_hi =
            static_cast<long>(std::floor((static_cast<double>(n) / z - 1.0) / 4.0));
        for (long k = k1_lo; k <= k1_hi; ++k)
            sum1 += normal_cdf((4.0 * k + 1.0) * z / sqrt_n) -
                    normal_cdf((4.0 * k - 1.0) * z / sqrt_n);
        double sum2 = 0.0;
        const long k2_lo = static_cast<long>(
            std::floor((-static_cast<double>(n) / z - 3.0) / 4.0));
        for (long k = k2_lo; k <= k1_hi; ++k)
            sum2 += normal_cdf((4.0 * k + 3.0) * z / sqrt_n) -
                    normal_cdf((4.0 * k + 1.0) * z / sqrt_n);
        r.p_values.push_back(1.0 - sum1 + sum2);
    }
    r.statistic = max_z;
    r.parameters = "n=" + std::to_string(n);
    finalize_pass(r, params.alpha);
    return r;
}

TestResult runs_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "runs";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");
    std::size_t ones = 0;
    for (const auto b : eps) ones += b;
    const double pi = static_cast<double>(ones) / static_cast<double>(n);
    r.parameters = "n=" + std::to_string(n) + " pi=" + fmt(pi);
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n))) {
        // frequency prerequisite failed; the runs statistic is meaningless
        r.statistic = 0.0;
        r.p_values = {0.0};
        finalize_pass(r, params.alpha);
        return r;
    }
    std::size_t v = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) v += (eps[i] != eps[i + 1]);
    const double vd = static_cast<double>(v);
    const double nn = static_cast<double>(n);
    r.statistic = vd;
    r.p_values = {erfc(std::abs(vd - 2.0 * nn * pi * (1.0 - pi)) /
                       (2.0 * std::sqrt(2.0 * nn) * pi * (1.0 - pi)))};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult longest_run_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "longest_run_of_ones";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 128)
        return make_skip(r.name, "need at least 128 bits");

    std::size_t M;
    std::vector<double> pi;
    std::vector<int> edges;  // category upper bounds; last is open
    if (n < 6272) {
        M = 8;
        pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
        edges = {1, 2, 3};
    } else if (n < 750000) {
        M = 128;
        pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071,
              0.112398847};
        edges = {4, 5, 6, 7, 8};
    } else {
        M = 10000;
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
        edges = {10, 11, 12, 13, 14, 15};
    }
    const std::size_t N = n / M;
    std::vector<double> nu(pi.size(), 0.0);
    for (std::size_t b = 0; b < N; ++b) {
        int longest = 0;
        int run = 0;
        for (std::size_t j = 0; j < M; ++j) {
            run = eps[b * M + j] ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        std::size_t cat = pi.size() - 1;
        for (std::size_t c = 0; c < edges.size(); ++c) {
            if (longest <= edges[c]) {
                cat = c;
                break;
            }
        }
        nu[cat] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < pi.size(); ++c) {
        const double expect = static_cast<double>(N) * pi[c];
        chi2 += (nu[c] - expect) * (nu[c] - expect) / expect;
    }
    r.statistic = chi2;
    r.parameters = "M=" + std::to_string(M) + " N=" + std::to_string(N);
    r.p_values = {
        regularized_gamma_q(static_cast<double>(pi.size() - 1) / 2.0, chi2 / 2.0)};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult rank_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "binary_matrix_rank";
    const std::size_t n = eps.size();
    constexpr std::size_t kRows = 32;
    constexpr std::size_t kBitsPerMatrix = kRows * kRows;
    const std::size_t N = n / kBitsPerMatrix;
    if (N < 38) return make_skip(r.name, "need at least 38 32x32 matrices (38912 bits)");

    // exact full/one-deficient rank probabilities for square GF(2) matrices
    double p_full = 1.0;
    for (std::size_t j = 1; j <= kRows; ++j) p_full *= 1.0 - std::ldexp(1.0, -static_cast<int>(j));
    double p_minus1 = 0.0;
    {
        // P(rank = m-1) = 2 * (sum of 2^-i terms) ... use the product formula
        double prod = 1.0;
        for (std::size_t i = 0; i < kRows - 1; ++i) {
            const double num = 1.0 - std::ldexp(1.0, static_cast<int>(i) - 32);
            const double den = 1.0 - std::ldexp(1.0, static_cast<int>(i) - 31);
            prod *= num * num / den;
        }
        p_minus1 = prod * 0.5;  // 2^{r(64-r)-1024} at r=31 is 2^-1
    }
    const double p_rest = 1.0 - p_full - p_minus1;

    std::size_t f_full = 0, f_minus1 = 0;
    std::array<std::uint64_t, kRows> rows{};
    for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t i = 0; i < kRows; ++i) {
            std::uint64_t word = 0;
            const std::size_t base = m * kBitsPerMatrix + i * kRows;
            for (std::size_t j = 0; j < kRows; ++j)
                word = (word << 1) | eps[base + j];
            rows[i] = word;
        }
        const int rank = gf2_rank(rows, kRows);
        if (rank == static_cast<int>(kRows)) ++f_full;
        else if (rank == static_cast<int>(kRows) - 1) ++f_minus1;
    }
    const double nd = static_cast<double>(N);
    const double f2 = nd - static_cast<double>(f_full) - static_cast<double>(f_minus1);
    double chi2 = 0.0;
    chi2 += std::pow(static_cast<double>(f_full) - nd * p_full, 2) / (nd * p_full);
    chi2 += std::pow(static_cast<double>(f_minus1) - nd * p_minus1, 2) / (nd * p_minus1);
    chi2 += std::pow(f2 - nd * p_rest, 2) / (nd * p_rest);
    r.statistic = chi2;
    r.parameters = "N=" + std::to_string(N);
    r.p_values = {std::exp(-chi2 / 2.0)};  // igamc(1, x/2) for 2 df
    finalize_pass(r, params.alpha);
    return r;
}

TestResult dft_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "discrete_fourier_transform";
    const std::size_t n = eps.size();
    if (n < 1000) return make_skip(r.name, "need at least 1000 bits");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = eps[i] ? 1.0 : -1.0;
    const auto mags = dft_magnitudes(x, n / 2);
    const double threshold = std::sqrt(static_cast<double>(n) * std::log(1.0 / 0.05));
    std::size_t below = 0;
    for (const double m : mags) below += (m < threshold);
    const double n0 = 0.95 * static_cast<double>(n) / 2.0;
    const double n1 = static_cast<double>(below);
    const double d =
        (n1 - n0) / std::sqrt(static_cast<double>(n) * 0.95 * 0.05 / 3.8);
    r.statistic = d;
    r.parameters = "n=" + std::to_string(n) + " T=" + fmt(threshold);
    r.p_values = {erfc(std::abs(d) / std::sqrt(2.0))};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult non_overlapping_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "non_overlapping_template";
    const std::size_t n = eps.size();
    const int m = params.template_len;
    if (m < 2 || m > 16)
        return make_skip(r.name, "template length must be in [2, 16]");
    constexpr std::size_t N = 8;
    const std::size_t M = n / N;
    const double mu =
        (static_cast<double>(M) - m + 1.0) / std::ldexp(1.0, m);
    if (mu < 5.0)
        return make_skip(r.name, "blocks too short (match mean < 5); need more bits");
    const double sigma2 =
        static_cast<double>(M) *
        (1.0 / std::ldexp(1.0, m) - (2.0 * m - 1.0) / std::ldexp(1.0, 2 * m));

    const auto templates = aperiodic_templates(m);
    // id of each m-bit window value, or -1
    std::vector<std::int16_t> template_id(static_cast<std::size_t>(1) << m, -1);
    for (std::size_t t = 0; t < templates.size(); ++t)
        template_id[templates[t]] = static_cast<std::int16_t>(t);

    // single pass per block; per-template non-overlap cursor
    std::vector<std::vector<std::uint32_t>> counts(
        templates.size(), std::vector<std::uint32_t>(N, 0));
    std::vector<std::size_t> next_ok(templates.size(), 0);
    const std::uint32_t mask = (1u << m) - 1u;
    for (std::size_t b = 0; b < N; ++b) {
        std::fill(next_ok.begin(), next_ok.end(), 0);
        std::uint32_t window = 0;
        for (std::size_t j = 0; j < M; ++j) {
            window = ((window << 1) | eps[b * M + j]) & mask;
            if (j + 1 < static_cast<std::size_t>(m)) continue;
            const std::int16_t id = template_id[window];
            if (id < 0) continue;
            const std::size_t pos = j + 1 - static_cast<std::size_t>(m);
            if (pos < next_ok[static_cast<std::size_t>(id)]) continue;
            ++counts[static_cast<std::size_t>(id)][b];
            next_ok[static_cast<std::size_t>(id)] = pos + static_cast<std::size_t>(m);
        }
    }

    r.parameters = "m=" + std::to_string(m) + " M=" + std::to_string(M) +
                   " N=" + std::to_string(N) + " templates=" +
                   std::to_string(templates.size());
    double worst = 0.0;
    r.p_values.reserve(templates.size());
    for (std::size_t t = 0; t < templates.size(); ++t) {
        double chi2 = 0.0;
        for (std::size_t b = 0; b < N; ++b) {
            const double diff = static_cast<double>(counts[t][b]) - mu;
            chi2 += diff * diff / sigma2;
        }
        worst = std::max(worst, chi2);
        r.p_values.push_back(
            regularized_gamma_q(static_cast<double>(N) / 2.0, chi2 / 2.0));
    }
    r.statistic = worst;
    finalize_pass(r, params.alpha);
    return r;
}

TestResult overlapping_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "overlapping_template";
    const std::size_t n = eps.size();
    const int m = params.template_len;
    const std::size_t M = static_cast<std::size_t>(params.overlapping_block_len);
    if (n < 1000000)
        return make_skip(r.name, "need at least 1e6 bits for a calibrated block layout");
    const std::size_t N = n / M;
    constexpr int K = 5;
    const auto pis = overlapping_occurrence_pis(m, static_cast<int>(M), K);

    std::vector<double> nu(K + 1, 0.0);
    for (std::size_t b = 0; b < N; ++b) {
        int count = 0;
        int run = 0;
        for (std::size_t j = 0; j < M; ++j) {
            run = eps[b * M + j] ? run + 1 : 0;
            if (run >= m) ++count;  // window of m ones ending here
        }
        nu[static_cast<std::size_t>(std::min(count, K))] += 1.0;
    }
    double chi2 = 0.0;
    for (int c = 0; c <= K; ++c) {
        const double expect = static_cast<double>(N) * pis[static_cast<std::size_t>(c)];
        chi2 += (nu[static_cast<std::size_t>(c)] - expect) *
                (nu[static_cast<std::size_t>(c)] - expect) / expect;
    }
    r.statistic = chi2;
    r.parameters = "m=" + std::to_string(m) + " M=" + std::to_string(M) +
                   " N=" + std::to_string(N);
    r.p_values = {regularized_gamma_q(K / 2.0, chi2 / 2.0)};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult universal_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "universal";
    const std::size_t n = eps.size();
    if (n < 387840) return make_skip(r.name, "need at least 387840 bits");
    int L = 5;
    if (n >= 387840) L = 6;
    if (n >= 904960) L = 7;
    if (n >= 2068480) L = 8;
    if (n >= 4654080) L = 9;
    if (n >= 10342400) L = 10;
    if (n >= 22753280) L = 11;
    if (n >= 49643520) L = 12;
    if (n >= 107560960) L = 13;
    if (n >= 231669760) L = 14;
    if (n >= 496435200) L = 15;
    if (n >= 1059061760) L = 16;
    static constexpr double kExpected[] = {0,         0,         0,        0,
                                           0,         0,         5.2177052, 6.1962507,
                                           7.1836656, 8.1764248, 9.1723243, 10.170032,
                                           11.168765, 12.168070, 13.167693, 14.167488,
                                           15.167379};
    static constexpr double kVariance[] = {0,     0,     0,     0,     0,     0,
                                           2.954, 3.125, 3.238, 3.311, 3.356, 3.384,
                                           3.401, 3.410, 3.416, 3.419, 3.421};
    const std::size_t Q = 10u * (static_cast<std::size_t>(1) << L);
    const std::size_t blocks = n / static_cast<std::size_t>(L);
    const std::size_t K = blocks - Q;

    std::vector<std::size_t> last(static_cast<std::size_t>(1) << L, 0);
    double sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < blocks; ++i) {
        std::uint32_t value = 0;
        for (int j = 0; j < L; ++j) value = (value << 1) | eps[pos++];
        if (i < Q) {
            last[value] = i + 1;
        } else {
            sum += safe_log2(static_cast<double>(i + 1 - last[value]));
            last[value] = i + 1;
        }
    }
    const double fn = sum / static_cast<double>(K);
    const double c = 0.7 - 0.8 / L +
                     (4.0 + 32.0 / L) * std::pow(static_cast<double>(K), -3.0 / L) / 15.0;
    const double sigma = c * std::sqrt(kVariance[L] / static_cast<double>(K));
    r.statistic = fn;
    r.parameters = "L=" + std::to_string(L) + " Q=" + std::to_string(Q) +
                   " K=" + std::to_string(K);
    r.p_values = {erfc(std::abs(fn - kExpected[L]) / (std::sqrt(2.0) * sigma))};
    finalize_pass(r, params.alpha);
    return r;
}

double apen_phi(const Bits& eps, int m) {
    if (m == 0) return 0.0;
    const std::size_t n = eps.size();
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(1) << m, 0);
    std::uint32_t window = 0;
    const std::uint32_t mask = (1u << m) - 1u;
    for (std::size_t i = 0; i < n + static_cast<std::size_t>(m) - 1; ++i) {
        window = ((window << 1) | eps[i % n]) & mask;
        if (i + 1 >= static_cast<std::size_t>(m)) ++counts[window];
    }
    double phi = 0.0;
    const double nd = static_cast<double>(n);
    for (const auto c : counts) {
        if (c == 0) continue;
        const double q = static_cast<double>(c) / nd;
        phi += q * std::log(q);
    }
    return phi;
}

TestResult approximate_entropy_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "approximate_entropy";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");
    int m = params.approx_entropy_block_len;
    if (params.adapt_block_lengths) {
        const int limit = static_cast<int>(std::floor(safe_log2(static_cast<double>(n)))) - 6;
        m = std::min(m, limit);
    }
    if (m < 1) return make_skip(r.name, "input too short for any valid block length");
    const double apen = apen_phi(eps, m) - apen_phi(eps, m + 1);
    const double chi2 = 2.0 * static_cast<double>(n) * (std::log(2.0) - apen);
    r.statistic = chi2;
    r.parameters = "m=" + std::to_string(m);
    r.p_values = {regularized_gamma_q(std::ldexp(1.0, m - 1), chi2 / 2.0)};
    finalize_pass(r, params.alpha);
    return r;
}

double serial_psi2(const Bits& eps, int m) {
    if (m <= 0) return 0.0;
    const std::size_t n = eps.size();
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(1) << m, 0);
    std::uint32_t window = 0;
    const std::uint32_t mask = (1u << m) - 1u;
    for (std::size_t i = 0; i < n + static_cast<std::size_t>(m) - 1; ++i) {
        window = ((window << 1) | eps[i % n]) & mask;
        if (i + 1 >= static_cast<std::size_t>(m)) ++counts[window];
    }
    double sum = 0.0;
    for (const auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
    return std::ldexp(1.0, m) / static_cast<double>(n) * sum - static_cast<double>(n);
}

TestResult serial_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "serial";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");
    int m = params.serial_block_len;
    if (params.adapt_block_lengths) {
        const int limit = static_cast<int>(std::floor(safe_log2(static_cast<double>(n)))) - 3;
        m = std::min(m, limit);
    }
    if (m < 2) return make_skip(r.name, "input too short for any valid block length");
    const double psi_m = serial_psi2(eps, m);
    const double psi_m1 = serial_psi2(eps, m - 1);
    const double psi_m2 = serial_psi2(eps, m - 2);
    const double d1 = psi_m - psi_m1;
    const double d2 = psi_m - 2.0 * psi_m1 + psi_m2;
    r.statistic = d1;
    r.parameters = "m=" + std::to_string(m);
    r.p_values = {regularized_gamma_q(std::ldexp(1.0, m - 2), d1 / 2.0),
                  regularized_gamma_q(std::ldexp(1.0, m - 3), d2 / 2.0)};
    finalize_pass(r, params.alpha);
    return r;
}

TestResult linear_complexity_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "linear_complexity";
    const std::size_t n = eps.size();
    const std::size_t M = static_cast<std::size_t>(params.linear_complexity_block_len);
    const std::size_t N = n / M;
    if (N < 200)
        return make_skip(r.name,
                         "need at least 200 blocks of " + std::to_string(M) + " bits");
    const double Md = static_cast<double>(M);
    const double sign_m1 = (M % 2 == 0) ? 1.0 : -1.0;  // (-1)^M
    const double mean = Md / 2.0 + (9.0 - sign_m1) / 36.0 -
                        (Md / 3.0 + 2.0 / 9.0) / std::ldexp(1.0, static_cast<int>(M));
    // exact category probabilities {1/96, 1/32, 1/8, 1/2, 1/4, 1/16, 1/48}
    static constexpr double kPi[7] = {1.0 / 96, 1.0 / 32, 1.0 / 8, 1.0 / 2,
                                      1.0 / 4,  1.0 / 16, 1.0 / 48};
    std::array<double, 7> nu{};
    for (std::size_t b = 0; b < N; ++b) {
        const int L = linear_complexity(
            std::span<const std::uint8_t>(eps.data() + b * M, M));
        const double T = sign_m1 * (static_cast<double>(L) - mean) + 2.0 / 9.0;
        std::size_t cat;
        if (T <= -2.5) cat = 0;
        else if (T <= -1.5) cat = 1;
        else if (T <= -0.5) cat = 2;
        else if (T <= 0.5) cat = 3;
        else if (T <= 1.5) cat = 4;
        else if (T <= 2.5) cat = 5;
        else cat = 6;
        nu[cat] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
        const double expect = static_cast<double>(N) * kPi[c];
        chi2 += (nu[c] - expect) * (nu[c] - expect) / expect;
    }
    r.statistic = chi2;
    r.parameters = "M=" + std::to_string(M) + " N=" + std::to_string(N);
    r.p_values = {regularized_gamma_q(3.0, chi2 / 2.0)};
    finalize_pass(r, params.alpha);
    return r;
}

struct Cycles {
    std::vector<std::size_t> zero_positions;  // indices in the padded walk
    std::size_t J = 0;
};

TestResult random_excursions_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "random_excursions";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");

    // cycle-wise visit counts for states -4..-1, 1..4
    static constexpr int kStates[8] = {-4, -3, -2, -1, 1, 2, 3, 4};
    std::array<std::array<double, 6>, 8> nu{};  // nu[state][visits 0..5+]
    std::array<std::uint32_t, 8> visits_this_cycle{};
    std::size_t J = 0;
    int s = 0;
    auto close_cycle = [&] {
        ++J;
        for (int st = 0; st < 8; ++st) {
            const std::uint32_t v = std::min<std::uint32_t>(visits_this_cycle[st], 5);
            nu[st][v] += 1.0;
            visits_this_cycle[st] = 0;
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        s += eps[i] ? 1 : -1;
        if (s == 0) {
            close_cycle();
        } else if (s >= -4 && s <= 4) {
            const int idx = (s < 0) ? s + 4 : s + 3;
            ++visits_this_cycle[static_cast<std::size_t>(idx)];
        }
    }
    if (s != 0) close_cycle();  // final partial cycle

    const double min_j =
        std::max(0.005 * std::sqrt(static_cast<double>(n)), 500.0);
    r.parameters = "J=" + std::to_string(J);
    if (static_cast<double>(J) < min_j)
        return make_skip(r.name, "too few zero-crossing cycles (J=" + std::to_string(J) +
                                     " < " + fmt(min_j) + ")");

    const double Jd = static_cast<double>(J);
    for (int st = 0; st < 8; ++st) {
        const double x = std::abs(kStates[st]);
        std::array<double, 6> pi{};
        pi[0] = 1.0 - 1.0 / (2.0 * x);
        for (int k = 1; k <= 4; ++k)
            pi[static_cast<std::size_t>(k)] =
                1.0 / (4.0 * x * x) * std::pow(1.0 - 1.0 / (2.0 * x), k - 1);
        pi[5] = 1.0 / (2.0 * x) * std::pow(1.0 - 1.0 / (2.0 * x), 4);
        double chi2 = 0.0;
        for (int k = 0; k <= 5; ++k) {
            const double expect = Jd * pi[static_cast<std::size_t>(k)];
            chi2 += (nu[st][static_cast<std::size_t>(k)] - expect) *
                    (nu[st][static_cast<std::size_t>(k)] - expect) / expect;
        }
        r.p_values.push_back(regularized_gamma_q(2.5, chi2 / 2.0));
    }
    r.statistic = Jd;
    finalize_pass(r, params.alpha);
    return r;
}

TestResult random_excursions_variant_impl(const Bits& eps, const TestParams& params) {
    TestResult r;
    r.name = "random_excursions_variant";
    const std::size_t n = eps.size();
    if (params.enforce_minimums && n < 100)
        return make_skip(r.name, "need at least 100 bits");

    std::array<double, 19> xi{};  // visit totals for states -9..9 (index x+9)
    std::size_t J = 0;
    int s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s += eps[i] ? 1 : -1;
        if (s == 0) ++J;
        else if (s >= -9 && s <= 9) xi[static_cast<std::size_t>(s + 9)] += 1.0;
    }
    if (s != 0) ++J;

    const double min_j =
        std::max(0.005 * std::sqrt(static_cast<double>(n)), 500.0);
    r.parameters = "J=" + std::to_string(J);
    if (static_cast<double>(J) < min_j)
        return make_skip(r.name, "too few zero-crossing cycles (J=" + std::to_string(J) +
                                     " < " + fmt(min_j) + ")");
    const double Jd = static_cast<double>(J);
    for (int x = -9; x <= 9; ++x) {
        if (x == 0) continue;
        const double denom = std::sqrt(2.0 * Jd * (4.0 * std::abs(x) - 2.0));
        r.p_values.push_back(
            erfc(std::abs(xi[static_cast<std::size_t>(x + 9)] - Jd) / denom));
    }
    r.statistic = Jd;
    finalize_pass(r, params.alpha);
    return r;
}

using TestFn = TestResult (*)(const Bits&, const TestParams&);

struct TestEntry {
    const char* name;
    TestFn fn;
};

constexpr TestEntry kBattery[] = {
    {"frequency", frequency_impl},
    {"block_frequency", block_frequency_impl},
    {"runs", runs_impl},
    {"longest_run_of_ones", longest_run_impl},
    {"binary_matrix_rank", rank_impl},
    {"discrete_fourier_transform", dft_impl},
    {"non_overlapping_template", non_overlapping_impl},
    {"overlapping_template", overlapping_impl},
    {"universal", universal_impl},
    {"linear_complexity", linear_complexity_impl},
    {"serial", serial_impl},
    {"approximate_entropy", approximate_entropy_impl},
    {"cumulative_sums", cumulative_sums_impl},
    {"random_excursions", random_excursions_impl},
    {"random_excursions_variant", random_excursions_variant_impl},
};

void check_params(const TestParams& params) {
    if (!(params.alpha > 0.0 && params.alpha < 1.0))
        throw ConfigError("TestParams: alpha must be in (0, 1)");
}

TestResult run_single(TestFn fn, const BitStream& bits, const TestParams& params) {
    check_params(params);
    const Bits eps = bits.unpack();
    return fn(eps, params);
}

}  // namespace

std::vector<std::uint32_t> aperiodic_templates(int length) {
    if (length < 1 || length > 20)
        throw ConfigError("aperiodic_templates: length must be in [1, 20]");
    const std::uint32_t total = 1u << length;
    std::vector<std::uint32_t> out;
    for (std::uint32_t value = 0; value < total; ++value) {
        bool aperiodic = true;
        for (int shift = 1; shift < length && aperiodic; ++shift) {
            // overlap possible iff the (length-shift)-bit suffix equals the prefix
            const std::uint32_t prefix = value >> shift;
            const std::uint32_t suffix = value & ((1u << (length - shift)) - 1u);
            if (prefix == suffix) aperiodic = false;
        }
        if (aperiodic) out.push_back(value);
    }
    return out;
}

std::vector<double> overlapping_occurrence_pis(int m, int block_len, int max_count) {
    if (m < 1 || m > 32) throw ConfigError("overlapping_occurrence_pis: bad m");
    const std::size_t runs = static_cast<std::size_t>(m) + 1;
    const std::size_t cats = static_cast<std::size_t>(max_count) + 1;
    std::vector<double> state(runs * cats, 0.0);
    std::vector<double> next(runs * cats, 0.0);
    state[0] = 1.0;
    for (int step = 0; step < block_len; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t run = 0; run < runs; ++run) {
            for (std::size_t c = 0; c < cats; ++c) {
                const double p = state[run * cats + c];
                if (p == 0.0) continue;
                next[0 * cats + c] += 0.5 * p;  // bit 0 resets the run
                const std::size_t run2 = std::min(run + 1, runs - 1);
                const std::size_t c2 =
                    (run + 1 >= static_cast<std::size_t>(m)) ? std::min(c + 1, cats - 1)
                                                             : c;
                next[run2 * cats + c2] += 0.5 * p;
            }
        }
        state.swap(next);
    }
    std::vector<double> pis(cats, 0.0);
    for (std::size_t run = 0; run < runs; ++run)
        for (std::size_t c = 0; c < cats; ++c) pis[c] += state[run * cats + c];
    return pis;
}

double TestResult::min_p() const {
    double m = 1.0;
    for (const double p : p_values) m = std::min(m, p);
    return p_values.empty() ? std::numeric_limits<double>::quiet_NaN() : m;
}

TestReport run_battery(const BitStream& bits, const TestParams& params) {
    check_params(params);
    TestReport report;
    report.n_bits = bits.size();
    report.alpha = params.alpha;
    const std::size_t n_tests = std::size(kBattery);
    report.results.resize(n_tests);

    if (bits.size() < kBatteryMinBits) {
        for (std::size_t i = 0; i < n_tests; ++i)
            report.results[i] =
                make_skip(kBattery[i].name, "input shorter than 100 bits");
        report.overall_pass = false;
        return report;
    }

    const Bits eps = bits.unpack();
    if (params.parallel) {
        std::vector<std::future<TestResult>> futures;
        futures.reserve(n_tests);
        for (std::size_t i = 0; i < n_tests; ++i)
            futures.push_back(std::async(std::launch::async, [&, i] {
                return kBattery[i].fn(eps, params);
            }));
        for (std::size_t i = 0; i < n_tests; ++i) report.results[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < n_tests; ++i)
            report.results[i] = kBattery[i].fn(eps, params);
    }

    report.overall_pass = true;
    bool any_executed = false;
    for (const auto& result : report.results) {
        if (result.skipped) continue;
        any_executed = true;
        if (!result.pass) report.overall_pass = false;
    }
    if (!any_executed) report.overall_pass = false;
    return report;
}

TestResult test_frequency(const BitStream& b, const TestParams& p) {
    return run_single(frequency_impl, b, p);
}
TestResult test_block_frequency(const BitStream& b, const TestParams& p) {
    return run_single(block_frequency_impl, b, p);
}
TestResult test_cumulative_sums(const BitStream& b, const TestParams& p) {
    return run_single(cumulative_sums_impl, b, p);
}
TestResult test_runs(const BitStream& b, const TestParams& p) {
    return run_single(runs_impl, b, p);
}
TestResult test_longest_run(const BitStream& b, const TestParams& p) {
    return run_single(longest_run_impl, b, p);
}
TestResult test_matrix_rank(const BitStream& b, const TestParams& p) {
    return run_single(rank_impl, b, p);
}
TestResult test_dft(const BitStream& b, const TestParams& p) {
    return run_single(dft_impl, b, p);
}
TestResult test_non_overlapping_templates(const BitStream& b, const TestParams& p) {
    return run_single(non_overlapping_impl, b, p);
}
TestResult test_overlapping_templates(const BitStream& b, const TestParams& p) {
    return run_single(overlapping_impl, b, p);
}
TestResult test_universal(const BitStream& b, const TestParams& p) {
    return run_single(universal_impl, b, p);
}
TestResult test_approximate_entropy(const BitStream& b, const TestParams& p) {
    return run_single(approximate_entropy_impl, b, p);
}
TestResult test_serial(const BitStream& b, const TestParams& p) {
    return run_single(serial_impl, b, p);
}
TestResult test_linear_complexity(const BitStream& b, const TestParams& p) {
    return run_single(linear_complexity_impl, b, p);
}
TestResult test_random_excursions(const BitStream& b, const TestParams& p) {
    return run_single(random_excursions_impl, b, p);
}
TestResult test_random_excursions_variant(const BitStream& b, const TestParams& p) {
    return run_single(random_excursions_variant_impl, b, p);
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string TestReport::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{\n  \"n_bits\": " << n_bits << ",\n  \"alpha\": " << alpha
        << ",\n  \"overall_pass\": " << (overall_pass ? "true" : "false")
        << ",\n  \"tests\": [\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out << "    {\"name\": \"" << r.name << "\", \"parameters\": \""
            << json_escape(r.parameters) << "\", ";
        if (r.skipped) {
            out << "\"skipped\": true, \"reason\": \"" << json_escape(r.skip_reason)
                << "\"";
        } else {
            out << "\"skipped\": false, \"statistic\": " << r.statistic
                << ", \"pass\": " << (r.pass ? "true" : "false") << ", \"p_values\": [";
            for (std::size_t k = 0; k < r.p_values.size(); ++k) {
                if (k) out << ", ";
                out << r.p_values[k];
            }
            out << "]";
        }
        out << "}" << (i + 1 < results.size() ? ",\n" : "\n");
    }
    out << "  ]\n}\n";
    return out.str();
}

std::string TestReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "test,min_p,pass\n";
    for (const auto& r : results) {
        out << r.name << ',';
        if (r.skipped) out << "skipped," << "skipped";
        else out << r.min_p() << ',' << (r.pass ? "pass" : "fail");
        out << '\n';
    }
    return out.str();
}

SecondLevelReport second_level_analysis(const BitStream& bits, std::uint64_t sequence_bits,
                                        const TestParams& params) {
    if (sequence_bits < kBatteryMinBits)
        throw ConfigError("second_level_analysis: sequence_bits must be >= 100");
    const std::size_t n_seq = static_cast<std::size_t>(bits.size() / sequence_bits);
    if (n_seq < 2)
        throw ConfigError("second_level_analysis: need at least 2 full sequences");

    SecondLevelReport report;
    report.n_sequences = n_seq;
    report.sequence_bits = sequence_bits;
    report.alpha = params.alpha;

    const std::size_t n_tests = std::size(kBattery);
    std::vector<std::vector<double>> pooled(n_tests);
    std::vector<std::size_t> executed(n_tests, 0);

    for (std::size_t s = 0; s < n_seq; ++s) {
        BitStream chunk;
        for (std::uint64_t i = 0; i < sequence_bits; ++i)
            chunk.push_back(bits[s * sequence_bits + i]);
        const TestReport r = run_battery(chunk, params);
        for (std::size_t t = 0; t < n_tests; ++t) {
            if (r.results[t].skipped) continue;
            ++executed[t];
            for (const double p : r.results[t].p_values) pooled[t].push_back(p);
        }
    }

    report.overall_pass = true;
    for (std::size_t t = 0; t < n_tests; ++t) {
        SecondLevelRow row;
        row.name = kBattery[t].name;
        row.sequences_executed = executed[t];
        row.n_p_values = pooled[t].size();
        if (pooled[t].empty()) {
            row.pass = true;  // nothing executed; nothing to judge
            report.rows.push_back(row);
            continue;
        }
        std::size_t passing = 0;
        std::array<double, 10> hist{};
        for (const double p : pooled[t]) {
            passing += (p >= params.alpha);
            const int bin = std::min(9, static_cast<int>(p * 10.0));
            hist[static_cast<std::size_t>(bin)] += 1.0;
        }
        const double count = static_cast<double>(pooled[t].size());
        row.proportion = static_cast<double>(passing) / count;
        const double center = 1.0 - params.alpha;
        const double band = 3.0 * std::sqrt(params.alpha * (1.0 - params.alpha) / count);
        row.proportion_low = center - band;
        row.proportion_high = std::min(1.0, center + band);
        double chi2 = 0.0;
        for (const double h : hist) {
            const double expect = count / 10.0;
            chi2 += (h - expect) * (h - expect) / expect;
        }
        row.uniformity_p = regularized_gamma_q(4.5, chi2 / 2.0);
        row.pass = row.proportion >= row.proportion_low &&
                   row.proportion <= row.proportion_high && row.uniformity_p >= 1e-4;
        if (!row.pass) report.overall_pass = false;
        report.rows.push_back(row);
    }
    return report;
}

std::string SecondLevelReport::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{\n  \"n_sequences\": " << n_sequences
        << ",\n  \"sequence_bits\": " << sequence_bits << ",\n  \"alpha\": " << alpha
        << ",\n  \"overall_pass\": " << (overall_pass ? "true" : "false")
        << ",\n  \"tests\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << "    {\"name\": \"" << r.name << "\", \"sequences_executed\": "
            << r.sequences_executed << ", \"n_p_values\": " << r.n_p_values
            << ", \"proportion\": " << r.proportion << ", \"proportion_band\": ["
            << r.proportion_low << ", " << r.proportion_high
            << "], \"uniformity_p\": " << r.uniformity_p
            << ", \"pass\": " << (r.pass ? "true" : "false") << "}"
            << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    out << "  ]\n}\n";
    return out.str();
}

}  // namespace qrng
