// AVX2/FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; callers reach it through the runtime dispatcher.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "qfc/kernels.hpp"

namespace qfc::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;
// Phasors are advanced by complex rotation and re-seeded from exact trig
// every kReseed frequency samples; the recurrence error stays near 1e-14.
constexpr std::size_t kReseed = 64;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline void unit_phasor(double cycles, double& c, double& s) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  cycles -= std::nearbyint(cycles);
  c = std::cos(two_pi * cycles);
  s = -std::sin(two_pi * cycles);
}

}  // namespace

void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im) {
  const std::size_t n_delays = delays.size();
  const std::size_t blocks = n_delays / kLanes;

  alignas(32) double seed_re[kLanes];
  alignas(32) double seed_im[kLanes];
  alignas(32) double rot_re[kLanes];
  alignas(32) double rot_im[kLanes];
  alignas(32) double out_re[kLanes];
  alignas(32) double out_im[kLanes];

  for (std::size_t blk = 0; blk < blocks; ++blk) {
    double t[kLanes];
    for (std::size_t l = 0; l < kLanes; ++l) {
      t[l] = delays[blk * kLanes + l] * scale;
      unit_phasor(nu.step * t[l], rot_re[l], rot_im[l]);
    }
    const __m256d rr = _mm256_load_pd(rot_re);
    const __m256d ri = _mm256_load_pd(rot_im);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();

    for (std::size_t k0 = 0; k0 < nu.count; k0 += kReseed) {
      const double nu_k0 = nu.first + static_cast<double>(k0) * nu.step;
      for (std::size_t l = 0; l < kLanes; ++l) unit_phasor(nu_k0 * t[l], seed_re[l], seed_im[l]);
      __m256d zr = _mm256_load_pd(seed_re);
      __m256d zi = _mm256_load_pd(seed_im);
      const std::size_t k1 = std::min(nu.count, k0 + kReseed);
      for (std::size_t k = k0; k < k1; ++k) {
        const __m256d w = _mm256_set1_pd(weights[k]);
        acc_re = _mm256_fmadd_pd(w, zr, acc_re);
        acc_im = _mm256_fmadd_pd(w, zi, acc_im);
        const __m256d nr = _mm256_fmsub_pd(zr, rr, _mm256_mul_pd(zi, ri));
        const __m256d ni = _mm256_fmadd_pd(zr, ri, _mm256_mul_pd(zi, rr));
        zr = nr;
        zi = ni;
      }
    }
    _mm256_store_pd(out_re, acc_re);
    _mm256_store_pd(out_im, acc_im);
    for (std::size_t l = 0; l < kLanes; ++l) {
      re[blk * kLanes + l] = out_re[l];
      im[blk * kLanes + l] = out_im[l];
    }
  }

  const std::size_t done = blocks * kLanes;
  if (done < n_delays) {
    scalar::fourier_sums(nu, weights, delays.subspan(done), scale, re.subspan(done),
                         im.subspan(done));
  }
}

void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out) {
  const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(b.size());
  for (std::ptrdiff_t s = 0; s < na + nb - 1; ++s) {
    const std::ptrdiff_t offset = s - (na - 1);
    const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, -offset);
    const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(na, nb - offset);
    const double* pa = a.data() + i0;
    const double* pb = b.data() + i0 + offset;
    const std::ptrdiff_t n = i1 - i0;

    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::ptrdiff_t i = 0;
    for (; i + 8 <= n; i += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) sum += pa[i] * pb[i];
    out[s] = sum;
  }
}

}  // namespace qfc::kernels::avx2
