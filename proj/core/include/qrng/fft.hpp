#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qrng {

/// In-place iterative radix-2 transform; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& data, bool inverse);

/// Forward DFT of arbitrary length: radix-2 directly for powers of two,
/// Bluestein's chirp-z otherwise (chirp phases reduced mod 2n in integer
/// arithmetic so large transforms keep full precision).
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& input);

/// |X_k| for k = 0..count-1 of the DFT of a real sequence.
std::vector<double> dft_magnitudes(const std::vector<double>& input, std::size_t count);

}  // namespace qrng
