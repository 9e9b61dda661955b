#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrng/bitstream.hpp"
#include "qrng/timetag.hpp"

namespace qrng {

/// Maps detector identities to bit values. Every detector id appearing in a
/// stream must be in exactly one of the three sets.
class EncodingRule {
public:
    EncodingRule(std::vector<Detector> zero_set, std::vector<Detector> one_set,
                 std::vector<Detector> discard_set = {});

    /// The conventional rule for this setup: R1 -> 0, R2 -> 1, T1 discarded.
    static EncodingRule reflection_pair();

    enum class Assign : std::uint8_t { Zero, One, Discard, Unassigned };
    Assign assignment(Detector d) const { return map_[static_cast<std::size_t>(d)]; }

    std::string describe() const;

private:
    std::array<Assign, 3> map_{Assign::Unassigned, Assign::Unassigned, Assign::Unassigned};
};

/// One bit per non-discarded tag, in timestamp order. Throws ConfigError if
/// a tag's detector has no assignment.
BitStream encode_bits(const std::vector<TimeTag>& tags, const EncodingRule& rule);

/// Streaming two-bit block mapper with one bit of carry state. Feeding the
/// same bits in any chunking produces identical output; a trailing odd bit
/// is dropped at finish().
class BlockDebiaser {
public:
    /// First stage: 11 -> 1, 10 -> 0, 00/01 discarded.
    static BlockDebiaser stage1();
    /// Von Neumann: 01 -> 0, 10 -> 1, 00/11 discarded.
    static BlockDebiaser von_neumann();

    void feed(const BitStream& chunk, BitStream& out);
    void feed_bit(bool bit, BitStream& out);
    /// Drops any pending odd bit and resets the carry.
    void finish();

private:
    BlockDebiaser(std::array<std::int8_t, 4> block_map, BitOrigin out_origin)
        : block_map_(block_map), out_origin_(out_origin) {}

    std::array<std::int8_t, 4> block_map_;  // index b1*2+b0 -> 0, 1, or -1 (discard)
    BitOrigin out_origin_;
    bool has_pending_ = false;
    bool pending_ = false;
};

BitStream debias_stage1(const BitStream& raw);
BitStream debias_von_neumann(const BitStream& stage1);

/// Bit counts through the cascade. Ratios are NaN when the denominator is
/// empty ("undefined" in the JSON output).
struct RateReport {
    std::uint64_t raw_bits = 0;
    std::uint64_t stage1_bits = 0;
    std::uint64_t unbiased_bits = 0;

    double stage1_retention() const;
    double von_neumann_retention() const;
    double total_retention() const;

    std::string to_json() const;
};

struct CascadeResult {
    BitStream unbiased;
    RateReport rates;
};

/// Both stages in sequence: stage-1 truncation, then von Neumann.
CascadeResult debias_cascade(const BitStream& raw);

}  // namespace qrng
