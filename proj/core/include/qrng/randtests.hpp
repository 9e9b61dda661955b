#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qrng/bitstream.hpp"

namespace qrng {

/// Battery parameters. Block lengths follow the SP 800-22 defaults; with
/// adapt_block_lengths the serial and approximate-entropy block lengths are
/// clamped to the documented validity bounds for short inputs
/// (m <= log2(n) - 3 and m <= log2(n) - 6 respectively).
struct TestParams {
    double alpha = 0.01;
    int block_frequency_block_len = 128;
    int template_len = 9;              ///< non-overlapping and overlapping tests
    int overlapping_block_len = 1032;
    int linear_complexity_block_len = 500;
    int serial_block_len = 16;
    int approx_entropy_block_len = 10;
    bool adapt_block_lengths = true;
    bool parallel = true;              ///< run battery tests concurrently
    /// Length gates protect the validity of each test's asymptotic
    /// approximation. Known-answer checks on tiny published examples disable
    /// them deliberately; leave on everywhere else.
    bool enforce_minimums = true;
};

struct TestResult {
    std::string name;
    std::string parameters;        ///< rendered parameter set, e.g. "M=128 N=781"
    double statistic = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> p_values;  ///< one or more; all must clear alpha to pass
    bool skipped = false;
    std::string skip_reason;
    bool pass = false;

    /// Headline value for bar-chart style output.
    double min_p() const;
};

struct TestReport {
    std::uint64_t n_bits = 0;
    double alpha = 0.01;
    std::vector<TestResult> results;
    bool overall_pass = false;  ///< every executed test passed

    std::string to_json() const;
    /// "test,min_p,pass" rows, skipped tests marked.
    std::string to_csv() const;
};

/// Run all fifteen tests in canonical order. Inputs shorter than 100 bits
/// skip everything; each test additionally enforces its own minimum length
/// and reports itself skipped (never silently passed) when unmet.
TestReport run_battery(const BitStream& bits, const TestParams& params = {});

TestResult test_frequency(const BitStream& bits, const TestParams& params = {});
TestResult test_block_frequency(const BitStream& bits, const TestParams& params = {});
TestResult test_cumulative_sums(const BitStream& bits, const TestParams& params = {});
TestResult test_runs(const BitStream& bits, const TestParams& params = {});
TestResult test_longest_run(const BitStream& bits, const TestParams& params = {});
TestResult test_matrix_rank(const BitStream& bits, const TestParams& params = {});
TestResult test_dft(const BitStream& bits, const TestParams& params = {});
TestResult test_non_overlapping_templates(const BitStream& bits,
                                          const TestParams& params = {});
TestResult test_overlapping_templates(const BitStream& bits, const TestParams& params = {});
TestResult test_universal(const BitStream& bits, const TestParams& params = {});
TestResult test_approximate_entropy(const BitStream& bits, const TestParams& params = {});
TestResult test_serial(const BitStream& bits, const TestParams& params = {});
TestResult test_linear_complexity(const BitStream& bits, const TestParams& params = {});
TestResult test_random_excursions(const BitStream& bits, const TestParams& params = {});
TestResult test_random_excursions_variant(const BitStream& bits,
                                          const TestParams& params = {});

/// All aperiodic templates of the given length, encoded as integers
/// (MSB = first template bit). 148 templates for length 9.
std::vector<std::uint32_t> aperiodic_templates(int length);

/// Exact distribution of the capped overlapping-occurrence count of the
/// all-ones template (length m) in an M-bit block, computed by dynamic
/// programming over (current run, capped count). Exact replacement for the
/// tabulated constants; matches them to their published precision.
std::vector<double> overlapping_occurrence_pis(int m, int block_len, int max_count);

/// Second-level (multi-sequence) analysis: partition the input into
/// fixed-length sequences, run the battery on each, and aggregate per test
/// the pass proportion (with the standard 3-sigma acceptance band) and the
/// p-value uniformity chi-square over 10 bins.
struct SecondLevelRow {
    std::string name;
    std::size_t sequences_executed = 0;
    std::size_t n_p_values = 0;
    double proportion = 0.0;
    double proportion_low = 0.0;   ///< acceptance band
    double proportion_high = 1.0;
    double uniformity_p = 0.0;
    bool pass = false;
};

struct SecondLevelReport {
    std::size_t n_sequences = 0;
    std::uint64_t sequence_bits = 0;
    double alpha = 0.01;
    std::vector<SecondLevelRow> rows;
    bool overall_pass = false;

    std::string to_json() const;
};

SecondLevelReport second_level_analysis(const BitStream& bits, std::uint64_t sequence_bits,
                                        const TestParams& params = {});

}  // namespace qrng
