#pragma once

// Two-photon (Franson) coherence built from single-photon envelopes.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qfc/spectral.hpp"

namespace qfc::twophoton {

// F(dtau) on a symmetric uniform grid of interferometer imbalances
// dtau = tau_A - tau_B (ps). F(0) = 1.
class PairCoherence {
 public:
  PairCoherence(std::vector<double> dtau_ps, std::vector<double> f_value);

  const std::vector<double>& dtau() const { return dtau_; }
  const std::vector<double>& f() const { return f_; }
  std::size_t size() const { return dtau_.size(); }
  double step() const { return step_; }
  bool contains(double dtau_ps) const;
  // Linear interpolation; throws std::out_of_range outside the grid.
  double at(double dtau_ps) const;

  // F == 1 everywhere on [-half_range, half_range], e.g. for closed-form checks.
  static PairCoherence flat(double half_range_ps, std::size_t n_points = 3);

 private:
  std::vector<double> dtau_;
  std::vector<double> f_;
  double step_ = 0.0;
};

struct FransonSettings {
  double tau_a_ps = 0.0;
  double tau_b_ps = 0.0;
  double phi_a = 0.0;  // fine phase of interferometer A (rad)
  double phi_b = 0.0;  // fine phase of interferometer B (rad)
  double omega_a = 0.0;  // rad/ps
  double omega_b = 0.0;  // rad/ps
  double phi_0 = 0.0;
  double gamma_p = 1.0;
  double v_mi = 1.0;
  double v_mzi = 1.0;
};

struct BellResult {
  double visibility = 0.0;
  double sigma = 0.0;
  double bound = 0.0;
  double violation_sigmas = 0.0;
  double classical_bound = 0.5;
  double classical_sigmas = 0.0;
  bool violates_bell = false;
  bool exceeds_classical = false;
};

struct Fidelity {
  double value = 0.0;
  double sigma = 0.0;
};

// Normalized overlap of two envelopes versus relative shift. Grids with
// different steps are resampled (linear interpolation) onto the finer one.
// Throws std::domain_error if the zero-shift overlap vanishes.
PairCoherence pair_coherence(const spectral::CoherenceEnvelope& a,
                             const spectral::CoherenceEnvelope& b);

// Integral of F over dtau (ps).
double pair_coherence_time(const PairCoherence& pc);

// Relative coincidence rate
//   1 + v_mi v_mzi F(tau_A - tau_B) gamma_p cos(w_A tau_A + w_B tau_B + phi_A + phi_B + phi_0).
double coincidence_rate(const FransonSettings& settings, const PairCoherence& pc);

spectral::VisibilityCurve expected_visibility_curve(const PairCoherence& pc, double v_mi,
                                                    double v_mzi);

Fidelity entanglement_fidelity(double v_max, double sigma);

// Throws std::invalid_argument if sigma <= 0.
BellResult bell_check(double visibility, double sigma);

void write_pair_coherence(std::ostream& out, const PairCoherence& pc,
                          const std::vector<std::string>& comments = {});
PairCoherence read_pair_coherence(std::istream& in, std::string_view source = "<stream>");

}  // namespace qfc::twophoton
