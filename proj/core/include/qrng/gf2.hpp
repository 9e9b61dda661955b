#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qrng {

/// Rank over GF(2) of a matrix given as row bitmasks (bit j = column j),
/// up to 64 columns. Gaussian elimination on machine words.
int gf2_rank(std::span<const std::uint64_t> rows, int ncols);

/// Linear complexity (shortest LFSR length) of a bit sequence, one bit per
/// byte. Berlekamp-Massey on bit-packed words; O(n^2/64).
int linear_complexity(std::span<const std::uint8_t> bits);

}  // namespace qrng
