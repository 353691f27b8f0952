#include "qfc/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qfc/errors.hpp"

namespace qfc::models {

double singles_rate(double pair_rate, double eta, double q, double dark_rate) {
  return eta * pair_rate * (1.0 + q) + dark_rate;
}

double accidental_rate_per_bin(double s1, double s2, double dt) { return s1 * s2 * dt; }

double true_coincidence_rate(double pair_rate, double eta1, double eta2) {
  return pair_rate * eta1 * eta2;
}

AbParams ab_from_physics(double q1, double q2, double eta1, double eta2, double dark_rate2) {
  if (!(eta1 > 0.0) || !(eta2 > 0.0)) throw std::domain_error("a and b need eta1, eta2 > 0");
  return {(1.0 + q2) / eta1, (1.0 + q1) / eta2 * dark_rate2};
}

double sbr_model(double herald_rate, const RateModelParams& p) {
  const double denom = p.a * herald_rate + p.b;
  if (!(denom > 0.0) || !(p.dt > 0.0)) throw std::domain_error("SBR model undefined: a R + b <= 0");
  return 1.0 / (p.dt * denom);
}

double g2_from_sbr(double sbr) {
  if (!(sbr >= 0.0)) throw std::domain_error("SBR must be >= 0");
  if (std::isinf(sbr)) return 0.0;
  const double f = sbr / (sbr + 1.0);
  return 1.0 - f * f;
}

SbrFit fit_sbr(std::span<const SbrPoint> points, double dt) {
  if (points.size() < 3) throw std::invalid_argument("SBR fit needs at least 3 points");
  if (!(dt > 0.0)) throw std::invalid_argument("time bin must be positive");

  // y = 1/(sbr dt), sigma_y = sigma_sbr / (sbr^2 dt).
  double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
  double r_max = 0.0;
  for (const auto& p : points) {
    if (!(p.sbr > 0.0) || !(p.sigma > 0.0)) {
      throw std::invalid_argument("SBR points need positive sbr and sigma");
    }
    const double y = 1.0 / (p.sbr * dt);
    const double sy = p.sigma / (p.sbr * p.sbr * dt);
    const double w = 1.0 / (sy * sy);
    sw += w;
    swx += w * p.herald_rate;
    swxx += w * p.herald_rate * p.herald_rate;
    swy += w * y;
    swxy += w * p.herald_rate * y;
    r_max = std::max(r_max, std::abs(p.herald_rate));
  }
  const double det = sw * swxx - swx * swx;
  if (!(det > 1e-12 * sw * swxx)) throw FitError("SBR fit is rank deficient: herald rates coincide");

  SbrFit fit;
  fit.a = (sw * swxy - swx * swy) / det;
  fit.b = (swxx * swy - swx * swxy) / det;
  fit.cov_aa = sw / det;
  fit.cov_bb = swxx / det;
  fit.cov_ab = -swx / det;

  if (fit.b <= 1e-9 * std::abs(fit.a) * r_max) {
    fit.b_at_boundary = true;
    fit.b = 0.0;
    fit.a = swxy / swxx;
    fit.cov_aa = 1.0 / swxx;
    fit.cov_ab = 0.0;
    fit.cov_bb = 0.0;
  }

  for (const auto& p : points) {
    const double y = 1.0 / (p.sbr * dt);
    const double sy = p.sigma / (p.sbr * p.sbr * dt);
    const double r = (y - (fit.a * p.herald_rate + fit.b)) / sy;
    fit.chi2 += r * r;
  }
  return fit;
}

}  // namespace qfc::models
