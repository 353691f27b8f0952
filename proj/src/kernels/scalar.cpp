#include <cmath>
#include <cstddef>
#include <numbers>

#include "qfc/kernels.hpp"

namespace qfc::kernels::scalar {

void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < delays.size(); ++j) {
    const double t = delays[j] * scale;
    double sum_re = 0.0;
    double sum_im = 0.0;
    for (std::size_t k = 0; k < nu.count; ++k) {
      const double nu_k = nu.first + static_cast<double>(k) * nu.step;
      // Reduce to a fractional cycle before the trig call.
      double cycles = nu_k * t;
      cycles -= std::nearbyint(cycles);
      const double phase = two_pi * cycles;
      sum_re += weights[k] * std::cos(phase);
      sum_im -= weights[k] * std::sin(phase);
    }
    re[j] = sum_re;
    im[j] = sum_im;
  }
}

void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out) {
  const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(a.size());
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(b.size());
  for (std::ptrdiff_t s = 0; s < na + nb - 1; ++s) {
    const std::ptrdiff_t offset = s - (na - 1);
    double sum = 0.0;
    for (std::ptrdiff_t i = 0; i < na; ++i) {
      const std::ptrdiff_t k = i + offset;
      if (k < 0 || k >= nb) continue;
      sum += a[i] * b[k];
    }
    out[s] = sum;
  }
}

}  // namespace qfc::kernels::scalar
