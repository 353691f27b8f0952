#include "qfc/kernels.hpp"

#include <atomic>

namespace qfc::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(QFC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& selection() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() { return selection().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) return false;
  selection().store(isa, std::memory_order_relaxed);
  return true;
}

void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im) {
#if defined(QFC_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::fourier_sums(nu, weights, delays, scale, re, im);
#endif
  scalar::fourier_sums(nu, weights, delays, scale, re, im);
}

void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out) {
#if defined(QFC_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::cross_correlation(a, b, out);
#endif
  scalar::cross_correlation(a, b, out);
}

#if !defined(QFC_HAVE_AVX2)
// Builds without the AVX2 translation unit route the named variant to the
// reference code so callers and tests link unconditionally.
namespace avx2 {
void fourier_sums(const UniformAxis& nu, std::span<const double> weights,
                  std::span<const double> delays, double scale,
                  std::span<double> re, std::span<double> im) {
  scalar::fourier_sums(nu, weights, delays, scale, re, im);
}
void cross_correlation(std::span<const double> a, std::span<const double> b,
                       std::span<double> out) {
  scalar::cross_correlation(a, b, out);
}
}  // namespace avx2
#endif

}  // namespace qfc::kernels
