#pragma once

// Optical spectra, first-order coherence envelopes and the conversion
// phase-matching filter.
//
// Units: optical frequency offsets in GHz, delays in ps. A product of the two
// is converted to cycles with kCyclesPerGhzPs.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qfc::spectral {

// sinc^2(x) = 1/2 at x = kSincHalfPoint.
inline constexpr double kSincHalfPoint = 1.3915574;
inline constexpr double kCyclesPerGhzPs = 1e-3;

// Uniform frequency axis nu_i = first + i * step.
struct FrequencyGrid {
  double first_ghz = 0.0;
  double step_ghz = 1.0;
  std::size_t count = 0;

  // Grid covering [-half_span, +half_span] with 0 as a grid point.
  static FrequencyGrid symmetric(double half_span_ghz, double step_ghz);
  double at(std::size_t i) const { return first_ghz + static_cast<double>(i) * step_ghz; }
  std::vector<double> values() const;
};

class Spectrum {
 public:
  // Throws std::invalid_argument unless the grid is strictly increasing and
  // uniform to 1e-9, intensities are finite and nonnegative, and at least one
  // is positive. A single sample is a monochromatic line.
  Spectrum(std::vector<double> nu_ghz, std::vector<double> intensity,
           double center_wavelength_nm = 0.0);
  Spectrum(const FrequencyGrid& grid, std::vector<double> intensity,
           double center_wavelength_nm = 0.0);

  const std::vector<double>& nu() const { return nu_; }
  const std::vector<double>& intensity() const { return intensity_; }
  double center_wavelength_nm() const { return center_wavelength_nm_; }
  std::size_t size() const { return nu_.size(); }
  // Grid step in GHz; 0 for a single-sample spectrum.
  double step() const { return step_; }
  FrequencyGrid grid() const { return {nu_.front(), step_, nu_.size()}; }

 private:
  std::vector<double> nu_;
  std::vector<double> intensity_;
  double center_wavelength_nm_ = 0.0;
  double step_ = 0.0;
};

struct PhaseMatching {
  double center_offset_ghz = 0.0;
  double fwhm_ghz = 0.0;
};

// |g1(tau)| on a symmetric uniform delay grid with an odd number of points.
class CoherenceEnvelope {
 public:
  // Throws std::invalid_argument on a malformed grid or a magnitude outside
  // [0, 1 + 1e-9].
  CoherenceEnvelope(std::vector<double> tau_ps, std::vector<double> magnitude);

  const std::vector<double>& tau() const { return tau_; }
  const std::vector<double>& magnitude() const { return magnitude_; }
  std::size_t size() const { return tau_.size(); }
  std::size_t center() const { return tau_.size() / 2; }
  double step() const { return step_; }
  double tau_max() const { return tau_.back(); }

 private:
  std::vector<double> tau_;
  std::vector<double> magnitude_;
  double step_ = 0.0;
};

struct VisibilityCurve {
  std::vector<double> tau_ps;
  std::vector<double> visibility;
  std::vector<double> sigma;  // empty when no uncertainty is attached
};

struct CoherenceTime {
  double value_ps = 0.0;
  // Set when |g1| at either grid edge is still >= 1e-3, i.e. the integral is
  // cut off by the grid rather than by the envelope.
  bool truncated = false;
};

// Tabulated constructors.
Spectrum gaussian_spectrum(double center_ghz, double fwhm_ghz, const FrequencyGrid& grid,
                           double center_wavelength_nm = 0.0);
Spectrum rectangular_spectrum(double center_ghz, double width_ghz, const FrequencyGrid& grid);
// Throws std::invalid_argument if fwhm_ghz <= 0.
Spectrum sinc2_spectrum(double center_ghz, double fwhm_ghz, const FrequencyGrid& grid);

// sinc^2 filter response at `nu_ghz`, 1 at the center.
double phase_matching_response(const PhaseMatching& pm, double nu_ghz);

// Integral of I/max(I) over frequency, GHz. Throws std::domain_error for a
// single-sample spectrum, whose width is not resolved by the grid.
double integral_bandwidth(const Spectrum& s);

// |sum I(nu) exp(-i 2 pi nu tau)| / sum I(nu) on n_points delays spanning
// [-tau_max, tau_max]. n_points must be odd and >= 3.
CoherenceEnvelope coherence_envelope(const Spectrum& s, double tau_max_ps, std::size_t n_points);

CoherenceTime coherence_time(const CoherenceEnvelope& e);

// tau_c * delta_nu, dimensionless.
double time_bandwidth_product(const Spectrum& s, const CoherenceEnvelope& e);
double time_bandwidth_product(double coherence_time_ps, double bandwidth_ghz);

Spectrum apply_phase_matching(const Spectrum& s, const PhaseMatching& pm);

// Fitted visibility of a sampled fringe c * (1 + v sin(w x + phi)).
struct FringeSample {
  double x = 0.0;
  double count = 0.0;
};

struct FringeFitOptions {
  // Fix w instead of fitting it (e.g. 1 when x is a phase in radians).
  std::optional<double> angular_frequency;
  // Weight each sample by 1/max(count, 1) and report the unscaled covariance,
  // i.e. Poisson counting errors. Otherwise errors come from the residuals.
  bool poisson_weights = false;
  int max_iterations = 200;
};

struct FringeFit {
  double visibility = 0.0;
  double sigma = 0.0;
  double offset = 0.0;
  double angular_frequency = 0.0;
  double phase = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Throws std::invalid_argument for fewer than 8 samples or samples spanning
// less than one period, and qfc::FitError if the iteration does not converge.
FringeFit fringe_fit(std::span<const FringeSample> samples, const FringeFitOptions& options = {});

// Spectrum file: "nu_GHz,intensity" rows.
Spectrum read_spectrum(std::istream& in, std::string_view source = "<stream>",
                       double center_wavelength_nm = 0.0);
Spectrum load_spectrum(const std::filesystem::path& path, double center_wavelength_nm = 0.0);
void write_spectrum(std::ostream& out, const Spectrum& s,
                    const std::vector<std::string>& comments = {});
void write_envelope(std::ostream& out, const CoherenceEnvelope& e,
                    const std::vector<std::string>& comments = {});
void write_visibility(std::ostream& out, const VisibilityCurve& v,
                      const std::vector<std::string>& comments = {});
VisibilityCurve read_visibility(std::istream& in, std::string_view source = "<stream>");

}  // namespace qfc::spectral
