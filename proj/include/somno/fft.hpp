#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "somno/errors.hpp"

namespace somno {

using cdouble = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

// In-place iterative radix-2 Cooley-Tukey. data.size() must be a power of two.
inline void fft_radix2(std::vector<cdouble>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;

  // bit reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const cdouble wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cdouble u = data[i + k];
        const cdouble v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= inv;
  }
}

}  // namespace detail

// DFT of arbitrary length: radix-2 when the size is a power of two, Bluestein's
// chirp-z algorithm otherwise. Forward transform is unnormalized
// (X[k] = sum_n x[n] e^{-2πi kn/N}); the inverse divides by N.
inline std::vector<cdouble> dft(std::vector<cdouble> data, bool inverse = false) {
  const std::size_t n = data.size();
  if (n == 0) return data;
  if (is_pow2(n)) {
    detail::fft_radix2(data, inverse);
    return data;
  }

  // Bluestein: x[n]·b*[n] convolved with b, where b[n] = e^{iπ n²/N}.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cdouble> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k² mod 2N avoids precision loss for large k
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) /
                       static_cast<double>(n);
    chirp[k] = cdouble(std::cos(ang), std::sin(ang));
  }

  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cdouble> a(m, cdouble(0.0, 0.0));
  std::vector<cdouble> b(m, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = data[k] * chirp[k];
  for (std::size_t k = 0; k < n; ++k) {
    const cdouble c = std::conj(chirp[k]);
    b[k] = c;
    if (k != 0) b[m - k] = c;
  }
  detail::fft_radix2(a, false);
  detail::fft_radix2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  detail::fft_radix2(a, true);

  std::vector<cdouble> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  if (inverse) {
    const double invn = 1.0 / static_cast<double>(n);
    for (auto& x : out) x *= invn;
  }
  return out;
}

inline std::vector<cdouble> dft_real(const std::vector<double>& x,
                                     std::size_t padded_size = 0,
                                     bool zero_mean = false) {
  std::size_t n = x.size();
  std::size_t m = padded_size == 0 ? n : padded_size;
  if (m < n) throw err::config("padded DFT size smaller than input");
  double mean = 0.0;
  if (zero_mean && n > 0) {
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
  }
  std::vector<cdouble> data(m, cdouble(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) data[i] = cdouble(x[i] - mean, 0.0);
  return dft(std::move(data), false);
}

}  // namespace somno
