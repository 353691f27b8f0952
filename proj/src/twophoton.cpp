#include "qfc/twophoton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qfc/curve_io.hpp"
#include "qfc/kernels.hpp"

namespace qfc::twophoton {
namespace {

// Envelope magnitudes resampled at `step` over the envelope's own range.
std::vector<double> resample(const spectral::CoherenceEnvelope& e, double step) {
  const auto half = static_cast<std::size_t>(std::floor(e.tau_max() / step + 1e-9));
  std::vector<double> out(2 * half + 1);
  const auto& tau = e.tau();
  const auto& mag = e.magnitude();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half)) * step;
    const double u = (t - tau.front()) / e.step();
    const auto k = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), e.size() - 2);
    const double frac = std::clamp(u - static_cast<double>(k), 0.0, 1.0);
    out[i] = mag[k] + frac * (mag[k + 1] - mag[k]);
  }
  return out;
}

}  // namespace

PairCoherence::PairCoherence(std::vector<double> dtau_ps, std::vector<double> f_value)
    : dtau_(std::move(dtau_ps)), f_(std::move(f_value)) {
  if (dtau_.size() < 3 || dtau_.size() % 2 == 0) {
    throw std::invalid_argument("pair coherence needs an odd number (>= 3) of delays");
  }
  if (dtau_.size() != f_.size()) throw std::invalid_argument("pair coherence lengths differ");
  step_ = (dtau_.back() - dtau_.front()) / static_cast<double>(dtau_.size() - 1);
  if (!(step_ > 0.0)) throw std::invalid_argument("pair coherence grid must be increasing");
  const std::size_t c = dtau_.size() / 2;
  for (std::size_t i = 1; i < dtau_.size(); ++i) {
    if (std::abs(dtau_[i] - dtau_[i - 1] - step_) > 1e-9 * step_) {
      throw std::invalid_argument("pair coherence grid is not uniform");
    }
  }
  if (std::abs(dtau_[c]) > 1e-9 * step_) {
    throw std::invalid_argument("pair coherence grid is not centered on zero");
  }
  for (double v : f_) {
    if (!(v >= 0.0 && v <= 1.0 + 1e-9)) throw std::invalid_argument("F outside [0, 1]");
  }
}

bool PairCoherence::contains(double dtau_ps) const {
  const double edge = dtau_.back() * (1.0 + 1e-12);
  return std::abs(dtau_ps) <= edge;
}

double PairCoherence::at(double dtau_ps) const {
  if (!contains(dtau_ps)) {
    throw std::out_of_range("delay imbalance " + std::to_string(dtau_ps) +
                            " ps outside the pair-coherence grid");
  }
  const double u = (dtau_ps - dtau_.front()) / step_;
  const auto k = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), size() - 2);
  const double frac = std::clamp(u - static_cast<double>(k), 0.0, 1.0);
  return f_[k] + frac * (f_[k + 1] - f_[k]);
}

PairCoherence PairCoherence::flat(double half_range_ps, std::size_t n_points) {
  if (!(half_range_ps > 0.0) || n_points < 3 || n_points % 2 == 0) {
    throw std::invalid_argument("flat pair coherence needs a positive range and odd n >= 3");
  }
  const double half = static_cast<double>(n_points / 2);
  std::vector<double> d(n_points);
  for (std::size_t i = 0; i < n_points; ++i) d[i] = (static_cast<double>(i) - half) * half_range_ps / half;
  return PairCoherence(std::move(d), std::vector<double>(n_points, 1.0));
}

PairCoherence pair_coherence(const spectral::CoherenceEnvelope& a,
                             const spectral::CoherenceEnvelope& b) {
  const double step = std::min(a.step(), b.step());
  const auto same = [&](double s) { return std::abs(s - step) <= 1e-9 * step; };
  const std::vector<double> ga = same(a.step()) ? a.magnitude() : resample(a, step);
  const std::vector<double> gb = same(b.step()) ? b.magnitude() : resample(b, step);

  const std::size_t ha = ga.size() / 2;
  const std::size_t hb = gb.size() / 2;
  std::vector<double> corr(ga.size() + gb.size() - 1);
  kernels::cross_correlation(ga, gb, corr);
  // The kernel pairs a[i] with b[i + s - (na - 1)]; with centered arrays that
  // is shift j = s - (na - 1) + ha - hb. Output index h + j holds C(j).
  const std::size_t h = ha + hb;
  std::vector<double> c(2 * h + 1, 0.0);
  for (std::size_t s = 0; s < corr.size(); ++s) {
    const auto j = static_cast<std::ptrdiff_t>(s) - static_cast<std::ptrdiff_t>(ga.size() - 1) +
                   static_cast<std::ptrdiff_t>(ha) - static_cast<std::ptrdiff_t>(hb);
    c[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(h) + j)] = corr[s];
  }
  const double norm = c[h];
  if (!(norm > 0.0)) throw std::domain_error("envelopes have no overlap at zero imbalance");

  std::vector<double> dtau(c.size()), f(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    dtau[i] = (static_cast<double>(i) - static_cast<double>(h)) * step;
    f[i] = c[i] / norm;
  }
  f[h] = 1.0;
  return PairCoherence(std::move(dtau), std::move(f));
}

double pair_coherence_time(const PairCoherence& pc) {
  return std::accumulate(pc.f().begin(), pc.f().end(), 0.0) * pc.step();
}

double coincidence_rate(const FransonSettings& settings, const PairCoherence& pc) {
  const double f = pc.at(settings.tau_a_ps - settings.tau_b_ps);
  const double phase = settings.omega_a * settings.tau_a_ps + settings.omega_b * settings.tau_b_ps +
                       settings.phi_a + settings.phi_b + settings.phi_0;
  return 1.0 + settings.v_mi * settings.v_mzi * f * settings.gamma_p * std::cos(phase);
}

spectral::VisibilityCurve expected_visibility_curve(const PairCoherence& pc, double v_mi,
                                                    double v_mzi) {
  spectral::VisibilityCurve curve;
  curve.tau_ps = pc.dtau();
  curve.visibility.resize(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) curve.visibility[i] = v_mi * v_mzi * pc.f()[i];
  return curve;
}

Fidelity entanglement_fidelity(double v_max, double sigma) {
  if (!(v_max >= 0.0 && v_max <= 1.0)) throw std::invalid_argument("visibility outside [0, 1]");
  return {0.5 * (1.0 + v_max), 0.5 * sigma};
}

BellResult bell_check(double visibility, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("Bell check needs a positive sigma");
  BellResult r;
  r.visibility = visibility;
  r.sigma = sigma;
  r.bound = 1.0 / std::sqrt(2.0);
  r.violation_sigmas = (visibility - r.bound) / sigma;
  r.classical_bound = 0.5;
  r.classical_sigmas = (visibility - r.classical_bound) / sigma;
  r.violates_bell = r.violation_sigmas > 0.0;
  r.exceeds_classical = r.classical_sigmas > 0.0;
  return r;
}

void write_pair_coherence(std::ostream& out, const PairCoherence& pc,
                          const std::vector<std::string>& comments) {
  write_columns(out, "dtau_ps,F", {pc.dtau(), pc.f(), {}}, comments);
}

PairCoherence read_pair_coherence(std::istream& in, std::string_view source) {
  ColumnData cols = read_columns(in, source);
  try {
    return PairCoherence(std::move(cols.x), std::move(cols.y));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string(source) + ": " + e.what());
  }
}

}  // namespace qfc::twophoton
