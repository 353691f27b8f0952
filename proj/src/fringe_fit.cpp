#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qfc/errors.hpp"
#include "qfc/spectral.hpp"

namespace qfc::spectral {
namespace {

constexpr std::size_t kMinSamples = 8;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Offset + quadrature amplitudes for a fixed angular frequency:
// y ~ A + B sin(w x) + C cos(w x), weighted linear least squares.
struct LinearFringe {
  Eigen::Vector3d coef = Eigen::Vector3d::Zero();
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  double chi2 = std::numeric_limits<double>::infinity();
  bool ok = false;
};

LinearFringe solve_linear(std::span<const FringeSample> s, const Eigen::VectorXd& w, double omega) {
  LinearFringe out;
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Eigen::Vector3d row(1.0, std::sin(omega * s[i].x), std::cos(omega * s[i].x));
    ata.noalias() += w[i] * row * row.transpose();
    aty.noalias() += w[i] * s[i].count * row;
  }
  Eigen::LDLT<Eigen::Matrix3d> ldlt(ata);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      std::abs(ldlt.vectorD().minCoeff()) < 1e-12 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
    return out;
  }
  out.coef = ldlt.solve(aty);
  out.normal = ata;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = out.coef[0] + out.coef[1] * std::sin(omega * s[i].x) +
                     out.coef[2] * std::cos(omega * s[i].x);
    chi2 += w[i] * (s[i].count - f) * (s[i].count - f);
  }
  out.chi2 = chi2;
  out.ok = true;
  return out;
}

double model(const Eigen::Vector4d& p, double x) {
  return p[0] + p[1] * std::sin(p[3] * x) + p[2] * std::cos(p[3] * x);
}

double weighted_chi2(std::span<const FringeSample> s, const Eigen::VectorXd& w,
                     const Eigen::Vector4d& p) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = s[i].count - model(p, s[i].x);
    chi2 += w[i] * r * r;
  }
  return chi2;
}

Eigen::Matrix4d normal_matrix(std::span<const FringeSample> s, const Eigen::VectorXd& w,
                              const Eigen::Vector4d& p, Eigen::Vector4d* gradient) {
  Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
  Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s[i].x;
    const double sn = std::sin(p[3] * x);
    const double cs = std::cos(p[3] * x);
    const Eigen::Vector4d j(1.0, sn, cs, x * (p[1] * cs - p[2] * sn));
    jtj.noalias() += w[i] * j * j.transpose();
    jtr.noalias() += w[i] * (s[i].count - model(p, x)) * j;
  }
  if (gradient) *gradient = jtr;
  return jtj;
}

// Levenberg-Marquardt on (A, B, C, w) from a periodogram starting point.
Eigen::Vector4d refine(std::span<const FringeSample> s, const Eigen::VectorXd& w,
                       Eigen::Vector4d p, int max_iterations, int& iterations) {
  double chi2 = weighted_chi2(s, w, p);
  double lambda = 1e-3;
  for (iterations = 1; iterations <= max_iterations; ++iterations) {
    Eigen::Vector4d g;
    const Eigen::Matrix4d jtj = normal_matrix(s, w, p, &g);
    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() *= (1.0 + lambda);
      const Eigen::Vector4d step = damped.ldlt().solve(g);
      const Eigen::Vector4d trial = p + step;
      const double trial_chi2 = weighted_chi2(s, w, trial);
      if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
        const double drop = chi2 - trial_chi2;
        const bool small_step =
            step.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + p.cwiseAbs().maxCoeff());
        p = trial;
        const double previous = chi2;
        chi2 = trial_chi2;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        if (drop <= 1e-14 * std::max(previous, 1e-300) || small_step) return p;
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping: p is a minimum to working precision.
    if (!improved) return p;
  }
  throw FitError("fringe fit did not converge within " + std::to_string(max_iterations) +
                     " iterations",
                 chi2);
}

}  // namespace

FringeFit fringe_fit(std::span<const FringeSample> samples, const FringeFitOptions& options) {
  if (samples.size() < kMinSamples) {
    throw std::invalid_argument("fringe fit needs at least 8 samples");
  }
  double x_min = samples.front().x, x_max = samples.front().x;
  for (const auto& s : samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.count)) {
      throw std::invalid_argument("fringe samples must be finite");
    }
    x_min = std::min(x_min, s.x);
    x_max = std::max(x_max, s.x);
  }
  const double span = x_max - x_min;
  if (!(span > 0.0)) throw std::invalid_argument("fringe samples span no range");
  // Range covered by the samples counting one mean spacing, so that N points
  // at phases 2 pi k / N count as one full period.
  const double n = static_cast<double>(samples.size());
  const double coverage = span * n / (n - 1.0);

  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(samples.size()));
  if (options.poisson_weights) {
    for (std::size_t i = 0; i < samples.size(); ++i) w[i] = 1.0 / std::max(samples[i].count, 1.0);
  }

  FringeFit fit;
  Eigen::Vector3d abc;
  Eigen::Matrix3d cov3;
  double chi2 = 0.0;

  LinearFringe lin;
  if (options.angular_frequency) {
    const double omega = *options.angular_frequency;
    if (!(omega > 0.0) || omega * coverage < kTwoPi * (1.0 - 1e-9)) {
      throw std::invalid_argument("fringe samples must span at least one period");
    }
    lin = solve_linear(samples, w, omega);
    if (!lin.ok) throw FitError("fringe design matrix is singular");
    fit.angular_frequency = omega;
  } else {
    // Periodogram scan from one period over the span to the mean-spacing Nyquist limit.
    const double omega_lo = kTwoPi / coverage;
    const double omega_hi =
        std::max(omega_lo, std::numbers::pi * static_cast<double>(samples.size() - 1) / span);
    const double d_omega = 0.05 * kTwoPi / span;
    double best_omega = omega_lo;
    for (double omega = omega_lo; omega <= omega_hi + 0.5 * d_omega; omega += d_omega) {
      LinearFringe trial = solve_linear(samples, w, omega);
      if (trial.ok && trial.chi2 < lin.chi2) {
        lin = trial;
        best_omega = omega;
      }
    }
    if (!lin.ok) throw FitError("fringe design matrix is singular");
    fit.angular_frequency = best_omega;
  }
  abc = lin.coef;
  chi2 = lin.chi2;
  cov3 = lin.normal.inverse();

  const double amplitude = std::hypot(abc[1], abc[2]);
  if (!(abc[0] > 0.0)) throw FitError("fringe offset is not positive", chi2);

  const bool modulated = amplitude > 1e-12 * abc[0];
  const std::size_t n_params = options.angular_frequency ? 3 : 4;
  if (!options.angular_frequency && modulated) {
    Eigen::Vector4d p(abc[0], abc[1], abc[2], fit.angular_frequency);
    p = refine(samples, w, p, options.max_iterations, fit.iterations);
    abc = p.head<3>();
    fit.angular_frequency = p[3];
    chi2 = weighted_chi2(samples, w, p);
    const Eigen::Matrix4d cov4 = normal_matrix(samples, w, p, nullptr).inverse();
    cov3 = cov4.topLeftCorner<3, 3>();
  }

  if (!options.poisson_weights) {
    const double dof = static_cast<double>(samples.size() - n_params);
    cov3 *= chi2 / dof;
  }

  const double a = abc[0];
  const double r = std::hypot(abc[1], abc[2]);
  double var = 0.0;
  if (r > 1e-12 * a) {
    const Eigen::Vector3d grad(-r / (a * a), abc[1] / (a * r), abc[2] / (a * r));
    var = grad.dot(cov3 * grad);
  } else {
    var = 0.5 * (cov3(1, 1) + cov3(2, 2)) / (a * a);
  }

  fit.offset = a;
  fit.visibility = std::clamp(r / a, 0.0, 1.0);
  fit.sigma = std::sqrt(std::max(var, 0.0));
  fit.phase = std::atan2(abc[2], abc[1]);
  fit.residual = chi2;
  return fit;
}

}  // namespace qfc::spectral
