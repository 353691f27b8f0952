#pragma once

// Closed-form singles / coincidence / SBR rate models and the SBR fit.
// Rates in 1/s, time bins in s.

#include <span>

namespace qfc::models {

struct RateModelParams {
  double a = 0.0;   // dimensionless
  double b = 0.0;   // 1/s
  double dt = 0.0;  // s
};

// eta P (1 + q) + W.
double singles_rate(double pair_rate, double eta, double q, double dark_rate);

// S1 S2 dt: accidental coincidences per bin per second.
double accidental_rate_per_bin(double s1, double s2, double dt);

// P eta1 eta2.
double true_coincidence_rate(double pair_rate, double eta1, double eta2);

struct AbParams {
  double a = 0.0;
  double b = 0.0;
};

// a = (1 + q2) / eta1, b = (1 + q1) W2 / eta2 (herald-arm dark counts neglected).
AbParams ab_from_physics(double q1, double q2, double eta1, double eta2, double dark_rate2);

// 1 / (dt (a R + b)). Throws std::domain_error when a R + b <= 0.
double sbr_model(double herald_rate, const RateModelParams& p);

// 1 - (SBR / (SBR + 1))^2.
double g2_from_sbr(double sbr);

struct SbrPoint {
  double herald_rate = 0.0;
  double sbr = 0.0;
  double sigma = 0.0;
};

struct SbrFit {
  double a = 0.0;
  double b = 0.0;
  // Covariance of (a, b); with b at the boundary only var(a) is populated.
  double cov_aa = 0.0;
  double cov_ab = 0.0;
  double cov_bb = 0.0;
  bool b_at_boundary = false;
  double chi2 = 0.0;
};

// Weighted least squares on 1/(sbr dt) = a R + b. An unconstrained b at or
// below numerical zero is clamped to 0 and a is refitted. Throws
// std::invalid_argument on fewer than 3 points or nonpositive sigmas/SBRs,
// and qfc::FitError when all herald rates coincide.
SbrFit fit_sbr(std::span<const SbrPoint> points, double dt);

}  // namespace qfc::models
