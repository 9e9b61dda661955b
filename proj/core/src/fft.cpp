#include "qrng/fft.hpp"

#include <cmath>
#include <numbers>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_pow2(n)) throw ConfigError("fft_pow2: size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle =
            (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> step(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= step;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& value : data) value *= scale;
    }
}

std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& input) {
    const std::size_t n = input.size();
    if (n == 0) return {};
    if (is_pow2(n)) {
        std::vector<std::complex<double>> data = input;
        fft_pow2(data, false);
        return data;
    }

    // Bluestein: X_k = conj(c_k) * IFFT(FFT(a) .* FFT(b)) with chirp
    // c_k =0 exp(-i pi k^2 / n); k^2 is reduced mod 2n in integers so the
    // phase stays accurate for million-point transforms.
    const std::size_t m = next_pow2(2 * n - 1);
    const double base = std::numbers::pi / static_cast<double>(n);
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t k2 =
            (static_cast<std::uint64_t>(k) * k) % (2 * static_cast<std::uint64_t>(n));
        const double phase = base * static_cast<double>(k2);
        chirp[k] = {std::cos(phase), -std::sin(phase)};
    }
    std::vector<std::complex<double>> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = input[k] * chirp[k];
    b[0] = {1.0, 0.0};
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a, true);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    return out;
}

std::vector<double> dft_magnitudes(const std::vector<double>& input, std::size_t count) {
    std::vector<std::complex<double>> data(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) data[i] = {input[i], 0.0};
    const auto spectrum = dft(data);
    std::vector<double> mags(std::min(count, spectrum.size()));
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(spectrum[k]);
    return mags;
}

}  // namespace qrng
