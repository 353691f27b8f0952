#pragma once

// Data-parallel inner loops shared by the spectral and two-photon code.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds,
// an AVX2/FMA variant. The variant is chosen once at runtime from CPUID; tests
// can pin a variant with ScopedIsa to check the two against each other.

#include <cstddef>
#include <span>
#include <string_view>

namespace qfc::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Best variant supported by both the build and the running CPU.
Isa detected_isa();

// Variant currently used by the dispatching entry points below.
Isa active_isa();

// Returns false (and leaves the selection untouched) if `isa` is unavailable.
bool set_active_isa(Isa isa);

class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()), ok_(set_active_isa(isa)) {}
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;
  bool ok() const { return ok_; }

 private:
  Isa previous_;
  bool ok_;
};

// Uniform frequency axis nu_k = first + k * step, k = 0..count-1.
struct UniformAxis {
  double first = 0.0;
  double step = 0.0;
  std::size_t count = 0;
};

// For each delay t_j: re[j] = sum_k w_k cos(2 pi scale nu_k t_j),
//                     im[j] = -sum_k w_k sin(2 pi scale nu_k t_j).
// `scale` converts the nu*t product to cycles (1e-3 for GHz * ps).
void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im);

// Full discrete cross-correlation: out[s] = sum_i a[i] * b[i + s - (a.size() - 1)],
// for s = 0..a.size()+b.size()-2, terms outside b dropped.
void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out);

namespace scalar {
void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im);
void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out);
}  // namespace scalar

namespace avx2 {
void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im);
void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out);
}  // namespace avx2

}  // namespace qfc::kernels
