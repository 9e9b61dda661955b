#include "qrng/gf2.hpp"

#include <bit>

#include "qrng/errors.hpp"

namespace qrng {

int gf2_rank(std::span<const std::uint64_t> rows, int ncols) {
    if (ncols < 1 || ncols > 64) throw ConfigError("gf2_rank: ncols must be in [1, 64]");
    std::vector<std::uint64_t> work(rows.begin(), rows.end());
    int rank = 0;
    for (int col = ncols - 1; col >= 0 && rank < static_cast<int>(work.size()); --col) {
        const std::uint64_t mask = 1ull << col;
        std::size_t pivot = static_cast<std::size_t>(rank);
        while (pivot < work.size() && !(work[pivot] & mask)) ++pivot;
        if (pivot == work.size()) continue;
        std::swap(work[pivot], work[static_cast<std::size_t>(rank)]);
        const std::uint64_t pivot_row = work[static_cast<std::size_t>(rank)];
        for (std::size_t r = 0; r < work.size(); ++r) {
            if (r != static_cast<std::size_t>(rank) && (work[r] & mask))
                work[r] ^= pivot_row;
        }
        ++rank;
    }
    return rank;
}

namespace {

// Extract (len <= 64) bits of a packed LSB-first bit array starting at
// bit offset `pos`.
inline std::uint64_t extract_bits(const std::vector<std::uint64_t>& packed,
                                  std::size_t pos, int len) {
    const std::size_t word = pos >> 6;
    const int shift = static_cast<int>(pos & 63);
    std::uint64_t value = packed[word] >> shift;
    if (shift != 0 && word + 1 < packed.size()) value |= packed[word + 1] << (64 - shift);
    if (len < 64) value &= (1ull << len) - 1;
    return value;
}

}  // namespace

int linear_complexity(std::span<const std::uint8_t> bits) {
    const std::size_t n = bits.size();
    if (n == 0) return 0;

    // reversed copy of the sequence, bit-packed LSB-first: rev bit i = s_{n-1-i};
    // the discrepancy window s_{t-L..t} is then contiguous in rev.
    const std::size_t words = (n + 63) / 64 + 1;
    std::vector<std::uint64_t> rev(words, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (bits[n - 1 - i]) rev[i >> 6] |= 1ull << (i & 63);

    // connection polynomial C and previous B, packed LSB-first (c_0 = bit 0)
    std::vector<std::uint64_t> c(words, 0), b(words, 0), t;
    c[0] = 1;
    b[0] = 1;
    int L = 0;
    std::size_t m = static_cast<std::size_t>(-1);  // position of last L update

    for (std::size_t pos = 0; pos < n; ++pos) {
        // discrepancy d = sum_{j=0..L} c_j s_{pos-j} = parity(C & rev[n-1-pos ..])
        const std::size_t off = n - 1 - pos;
        int parity = 0;
        const int lwords = (L >> 6) + 1;
        for (int w = 0; w < lwords; ++w) {
            std::uint64_t window = extract_bits(rev, off + (static_cast<std::size_t>(w) << 6),
                                                64);
            if (w == lwords - 1) {
                const int rem = (L & 63) + 1;
                if (rem < 64) window &= (1ull << rem) - 1;
            }
            parity ^= std::popcount(c[static_cast<std::size_t>(w)] & window) & 1;
        }
        if (!parity) continue;

        // C(D) ^= B(D) * D^(pos - m)
        const std::size_t shift = pos - m;
        if (2 * L <= pos) {
            t = c;
            const std::size_t word_shift = shift >> 6;
            const int bit_shift = static_cast<int>(shift & 63);
            for (std::size_t w = words; w-- > word_shift;) {
                std::uint64_t v = b[w - word_shift] << bit_shift;
                if (bit_shift != 0 && w > word_shift)
                    v |= b[w - word_shift - 1] >> (64 - bit_shift);
                c[w] ^= v;
            }
            L = static_cast<int>(pos) + 1 - L;
            m = pos;
            b.swap(t);
        } else {
            const std::size_t word_shift = shift >> 6;
            const int bit_shift = static_cast<int>(shift & 63);
            for (std::size_t w = words; w-- > word_shift;) {
                std::uint64_t v = b[w - word_shift] << bit_shift;
                if (bit_shift != 0 && w > word_shift)
                    v |= b[w - word_shift - 1] >> (64 - bit_shift);
                c[w] ^= v;
            }
        }
    }
    return L;
}

}  // namespace qrng
