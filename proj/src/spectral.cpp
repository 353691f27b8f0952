#include "qfc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "qfc/curve_io.hpp"
#include "qfc/kernels.hpp"

namespace qfc::spectral {
namespace {

constexpr double kUniformTolerance = 1e-9;
constexpr double kEnvelopeEdgeLevel = 1e-3;

double uniform_step(const std::vector<double>& x, const char* what) {
  if (x.size() < 2) return 0.0;
  const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(step > 0.0)) throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double d = x[i] - x[i - 1];
    if (!(d > 0.0)) throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
    if (std::abs(d - step) > kUniformTolerance * step) {
      throw std::invalid_argument(std::string(what) + " grid is not uniform at index " +
                                  std::to_string(i));
    }
  }
  return step;
}

double sinc2(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

}  // namespace

FrequencyGrid FrequencyGrid::symmetric(double half_span_ghz, double step_ghz) {
  if (!(step_ghz > 0.0) || !(half_span_ghz >= 0.0)) {
    throw std::invalid_argument("frequency grid needs step > 0 and half span >= 0");
  }
  const auto half = static_cast<std::size_t>(std::floor(half_span_ghz / step_ghz + 1e-9));
  return {-static_cast<double>(half) * step_ghz, step_ghz, 2 * half + 1};
}

std::vector<double> FrequencyGrid::values() const {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = at(i);
  return v;
}

Spectrum::Spectrum(std::vector<double> nu_ghz, std::vector<double> intensity,
                   double center_wavelength_nm)
    : nu_(std::move(nu_ghz)),
      intensity_(std::move(intensity)),
      center_wavelength_nm_(center_wavelength_nm) {
  if (nu_.empty()) throw std::invalid_argument("spectrum is empty");
  if (nu_.size() != intensity_.size()) {
    throw std::invalid_argument("spectrum grid and intensity lengths differ");
  }
  step_ = uniform_step(nu_, "spectrum");
  bool any_positive = false;
  for (double v : intensity_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("spectral intensity must be finite and nonnegative");
    }
    any_positive = any_positive || v > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("spectrum has no positive intensity");
}

Spectrum::Spectrum(const FrequencyGrid& grid, std::vector<double> intensity,
                   double center_wavelength_nm)
    : Spectrum(grid.values(), std::move(intensity), center_wavelength_nm) {}

CoherenceEnvelope::CoherenceEnvelope(std::vector<double> tau_ps, std::vector<double> magnitude)
    : tau_(std::move(tau_ps)), magnitude_(std::move(magnitude)) {
  if (tau_.size() < 3 || tau_.size() % 2 == 0) {
    throw std::invalid_argument("coherence envelope needs an odd number (>= 3) of delays");
  }
  if (tau_.size() != magnitude_.size()) {
    throw std::invalid_argument("coherence envelope grid and magnitude lengths differ");
  }
  step_ = uniform_step(tau_, "delay");
  const std::size_t c = center();
  for (std::size_t j = 0; j <= c; ++j) {
    if (std::abs(tau_[c + j] + tau_[c - j]) > kUniformTolerance * step_ * static_cast<double>(c + 1)) {
      throw std::invalid_argument("delay grid is not symmetric about zero");
    }
  }
  for (double m : magnitude_) {
    if (!(m >= 0.0 && m <= 1.0 + 1e-9)) {
      throw std::invalid_argument("coherence envelope magnitude outside [0, 1]");
    }
  }
}

Spectrum gaussian_spectrum(double center_ghz, double fwhm_ghz, const FrequencyGrid& grid,
                           double center_wavelength_nm) {
  if (!(fwhm_ghz > 0.0)) throw std::invalid_argument("Gaussian FWHM must be positive");
  const double sigma = fwhm_ghz / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  std::vector<double> intensity(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double z = (grid.at(i) - center_ghz) / sigma;
    intensity[i] = std::exp(-0.5 * z * z);
  }
  return Spectrum(grid, std::move(intensity), center_wavelength_nm);
}

Spectrum rectangular_spectrum(double center_ghz, double width_ghz, const FrequencyGrid& grid) {
  if (!(width_ghz > 0.0)) throw std::invalid_argument("rectangle width must be positive");
  // Half-open [lo, hi): a plateau whose edges fall on grid points covers
  // exactly width/step samples.
  const double lo = center_ghz - 0.5 * width_ghz;
  const double hi = center_ghz + 0.5 * width_ghz;
  const double eps = 1e-9 * grid.step_ghz;
  std::vector<double> intensity(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double nu = grid.at(i);
    intensity[i] = (nu - lo >= -eps && nu - hi < -eps) ? 1.0 : 0.0;
  }
  return Spectrum(grid, std::move(intensity));
}

double phase_matching_response(const PhaseMatching& pm, double nu_ghz) {
  const double k = 2.0 * kSincHalfPoint / pm.fwhm_ghz;
  return sinc2((nu_ghz - pm.center_offset_ghz) * k);
}

Spectrum sinc2_spectrum(double center_ghz, double fwhm_ghz, const FrequencyGrid& grid) {
  if (!(fwhm_ghz > 0.0)) throw std::invalid_argument("sinc^2 FWHM must be positive");
  const PhaseMatching pm{center_ghz, fwhm_ghz};
  std::vector<double> intensity(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) intensity[i] = phase_matching_response(pm, grid.at(i));
  return Spectrum(grid, std::move(intensity));
}

double integral_bandwidth(const Spectrum& s) {
  if (s.size() < 2) {
    throw std::domain_error("bandwidth of a single-sample spectrum is not resolved by its grid");
  }
  const auto& I = s.intensity();
  const double peak = *std::max_element(I.begin(), I.end());
  if (!(peak > 0.0)) throw std::domain_error("spectrum has no positive intensity");
  double sum = 0.0;
  for (double v : I) sum += v / peak;
  return sum * s.step();
}

CoherenceEnvelope coherence_envelope(const Spectrum& s, double tau_max_ps, std::size_t n_points) {
  if (!(tau_max_ps > 0.0)) throw std::invalid_argument("tau_max must be positive");
  if (n_points < 3 || n_points % 2 == 0) {
    throw std::invalid_argument("coherence envelope needs an odd number (>= 3) of delays");
  }
  const std::size_t half = (n_points - 1) / 2;
  const double step = tau_max_ps / static_cast<double>(half);

  // |g1| is even for a real spectrum: evaluate tau >= 0 and mirror, which
  // keeps magnitude(tau) == magnitude(-tau) exact.
  std::vector<double> delays(half + 1);
  for (std::size_t j = 0; j <= half; ++j) delays[j] = static_cast<double>(j) * step;
  std::vector<double> re(half + 1), im(half + 1);
  const kernels::UniformAxis axis{s.nu().front(), s.step(), s.size()};
  kernels::fourier_sums(axis, s.intensity(), delays, kCyclesPerGhzPs, re, im);

  const double norm = re[0];
  if (!(norm > 0.0)) throw std::domain_error("spectrum has no positive intensity");

  std::vector<double> tau(n_points), mag(n_points);
  for (std::size_t j = 0; j <= half; ++j) {
    const double m = std::min(1.0, std::hypot(re[j], im[j]) / norm);
    tau[half + j] = delays[j];
    tau[half - j] = -delays[j];
    mag[half + j] = m;
    mag[half - j] = m;
  }
  mag[half] = 1.0;
  return CoherenceEnvelope(std::move(tau), std::move(mag));
}

CoherenceTime coherence_time(const CoherenceEnvelope& e) {
  const auto& m = e.magnitude();
  const double sum = std::accumulate(m.begin(), m.end(), 0.0);
  return {sum * e.step(), m.front() >= kEnvelopeEdgeLevel || m.back() >= kEnvelopeEdgeLevel};
}

double time_bandwidth_product(double coherence_time_ps, double bandwidth_ghz) {
  return coherence_time_ps * bandwidth_ghz * kCyclesPerGhzPs;
}

double time_bandwidth_product(const Spectrum& s, const CoherenceEnvelope& e) {
  return time_bandwidth_product(coherence_time(e).value_ps, integral_bandwidth(s));
}

Spectrum apply_phase_matching(const Spectrum& s, const PhaseMatching& pm) {
  if (!(pm.fwhm_ghz > 0.0)) throw std::invalid_argument("phase-matching FWHM must be positive");
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = s.intensity()[i] * phase_matching_response(pm, s.nu()[i]);
  }
  return Spectrum(s.nu(), std::move(out), s.center_wavelength_nm());
}

Spectrum read_spectrum(std::istream& in, std::string_view source, double center_wavelength_nm) {
  ColumnData cols = read_columns(in, source);
  try {
    return Spectrum(std::move(cols.x), std::move(cols.y), center_wavelength_nm);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string(source) + ": " + e.what());
  }
}

Spectrum load_spectrum(const std::filesystem::path& path, double center_wavelength_nm) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spectrum file " + path.string());
  return read_spectrum(in, path.string(), center_wavelength_nm);
}

void write_spectrum(std::ostream& out, const Spectrum& s, const std::vector<std::string>& comments) {
  write_columns(out, "nu_GHz,intensity", {s.nu(), s.intensity(), {}}, comments);
}

void write_envelope(std::ostream& out, const CoherenceEnvelope& e,
                    const std::vector<std::string>& comments) {
  write_columns(out, "tau_ps,g1_magnitude", {e.tau(), e.magnitude(), {}}, comments);
}

void write_visibility(std::ostream& out, const VisibilityCurve& v,
                      const std::vector<std::string>& comments) {
  write_columns(out, v.sigma.empty() ? "tau_ps,visibility" : "tau_ps,visibility,sigma",
                {v.tau_ps, v.visibility, v.sigma}, comments);
}

VisibilityCurve read_visibility(std::istream& in, std::string_view source) {
  ColumnData cols = read_columns(in, source);
  for (double v : cols.y) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::runtime_error(std::string(source) + ": visibility outside [0, 1]");
  }
  return {std::move(cols.x), std::move(cols.y), std::move(cols.sigma)};
}

}  // namespace qfc::spectral
