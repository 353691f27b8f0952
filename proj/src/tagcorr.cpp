#include "qfc/tagcorr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qfc/errors.hpp"
#include "qfc/spectral.hpp"

namespace qfc::tagcorr {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void require_sorted(const TagStream& s, const char* name) {
  if (!std::is_sorted(s.tags.begin(), s.tags.end())) {
    throw std::invalid_argument(std::string(name) + " stream is not sorted");
  }
}

// Mean count of bins with |centre| > exclusion.
double far_bin_mean(const CorrelationHistogram& h, Timestamp exclusion, std::size_t& n_bins) {
  double sum = 0.0;
  n_bins = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(h.bin_center_ps(i)) > static_cast<double>(exclusion)) {
      sum += static_cast<double>(h.bins[i]);
      ++n_bins;
    }
  }
  return n_bins ? sum / static_cast<double>(n_bins) : 0.0;
}

// Heralds whose window holds an event of `hbt`, each event credited to its
// nearest herald(s).
std::vector<std::uint8_t> flag_heralds(const std::vector<Timestamp>& heralds, const TagStream& hbt,
                                       Timestamp window, Timestamp offset) {
  std::vector<std::uint8_t> flags(heralds.size(), 0);
  if (heralds.empty()) return flags;
  for (Timestamp raw : hbt.tags) {
    const Timestamp t = raw - offset;
    const auto lb = std::lower_bound(heralds.begin(), heralds.end(), t);
    const bool has_right = lb != heralds.end();
    const bool has_left = lb != heralds.begin();
    const Timestamp right = has_right ? *lb - t : 0;
    const Timestamp left = has_left ? t - *(lb - 1) : 0;
    Timestamp nearest = 0;
    if (has_right && has_left) nearest = std::min(right, left);
    else if (has_right) nearest = right;
    else nearest = left;
    if (2 * nearest > window) continue;
    if (has_right && right == nearest) {
      for (auto it = lb; it != heralds.end() && *it == *lb; ++it) flags[static_cast<std::size_t>(it - heralds.begin())] = 1;
    }
    if (has_left && left == nearest) {
      const Timestamp v = *(lb - 1);
      for (auto it = lb; it != heralds.begin() && *(it - 1) == v; --it) {
        flags[static_cast<std::size_t>(it - 1 - heralds.begin())] = 1;
      }
    }
  }
  return flags;
}

double gaussian_bin_mass(double lo, double hi, double mu, double sigma) {
  if (sigma <= 0.0) return (mu >= lo && mu < hi) ? 1.0 : 0.0;
  const double s = sigma * std::sqrt(2.0);
  return 0.5 * (std::erf((hi - mu) / s) - std::erf((lo - mu) / s));
}

}  // namespace

std::uint64_t CorrelationHistogram::total() const {
  return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0});
}

CorrelationHistogram cross_correlate(const TagStream& a, const TagStream& b, Timestamp bin_width_ps,
                                     Timestamp delay_range_ps) {
  if (bin_width_ps <= 0) throw std::invalid_argument("bin width must be positive");
  if (delay_range_ps < 0) throw std::invalid_argument("delay range must be >= 0");
  require_sorted(a, "first");
  require_sorted(b, "second");

  CorrelationHistogram h;
  h.bin_width_ps = bin_width_ps;
  // Smallest H with (H + 1/2) w >= delay_range.
  h.half_bins = std::max<std::int64_t>(0, floor_div(2 * delay_range_ps - bin_width_ps + 2 * bin_width_ps - 1,
                                                    2 * bin_width_ps));
  h.bins.assign(static_cast<std::size_t>(2 * h.half_bins + 1), 0);
  h.total_time_ps = std::max(a.duration_ps, b.duration_ps);
  if (h.total_time_ps > 0) {
    const double seconds = static_cast<double>(h.total_time_ps) / static_cast<double>(simkit::kPsPerSecond);
    h.singles_rate1 = static_cast<double>(a.size()) / seconds;
    h.singles_rate2 = static_cast<double>(b.size()) / seconds;
  }
  if (a.empty() || b.empty()) return h;

  // Accepted differences d satisfy -(2H+1) w <= 2d < (2H+1) w.
  const std::int64_t edge = (2 * h.half_bins + 1) * bin_width_ps;
  std::size_t start = 0;
  for (Timestamp ta : a.tags) {
    while (start < b.size() && 2 * (b.tags[start] - ta) < -edge) ++start;
    for (std::size_t j = start; j < b.size(); ++j) {
      const std::int64_t d2 = 2 * (b.tags[j] - ta);
      if (d2 >= edge) break;
      const std::int64_t k = floor_div(d2 + bin_width_ps, 2 * bin_width_ps);
      ++h.bins[static_cast<std::size_t>(k + h.half_bins)];
    }
  }
  return h;
}

Timestamp analysis_bin(Timestamp base_bin_ps, double multiplier) {
  if (base_bin_ps <= 0 || !(multiplier > 0.0)) {
    throw std::invalid_argument("analysis bin needs a positive base and multiplier");
  }
  return std::max<Timestamp>(1, static_cast<Timestamp>(std::llround(static_cast<double>(base_bin_ps) * multiplier)));
}

SbrResult extract_sbr(const CorrelationHistogram& h, Timestamp signal_window_ps,
                      Timestamp background_exclusion_ps) {
  if (!(h.delay_range_ps() > static_cast<double>(background_exclusion_ps) &&
        2 * background_exclusion_ps > signal_window_ps && signal_window_ps > 0)) {
    throw std::invalid_argument("SBR needs delay_range > background_exclusion > signal_window/2 > 0");
  }
  SbrResult r;
  const double bg = far_bin_mean(h, background_exclusion_ps, r.background_bins);
  if (r.background_bins == 0) throw std::invalid_argument("no far-delay bins beyond the exclusion");
  double central = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (2.0 * std::abs(h.bin_center_ps(i)) <= static_cast<double>(signal_window_ps)) {
      central += static_cast<double>(h.bins[i]);
      ++r.central_bins;
    }
  }
  r.background_per_bin = bg;
  if (!(bg > 0.0)) throw UndefinedRatio("SBR undefined: far-delay background is zero");
  const double nc = static_cast<double>(r.central_bins);
  r.signal = central - bg * nc;
  r.sbr = r.signal / (bg * nc);
  const double d_central = 1.0 / (nc * bg);
  const double d_bg = -central / (nc * bg * bg);
  const double var_bg = bg / static_cast<double>(r.background_bins);
  r.sigma = std::sqrt(d_central * d_central * central + d_bg * d_bg * var_bg);
  return r;
}

double accidental_floor_per_ps(const CorrelationHistogram& h, Timestamp background_exclusion_ps) {
  std::size_t n = 0;
  const double mean = far_bin_mean(h, background_exclusion_ps, n);
  if (n == 0) throw std::invalid_argument("no far-delay bins beyond the exclusion");
  return mean / static_cast<double>(h.bin_width_ps);
}

HeraldedG2Result heralded_g2(const TagStream& herald, const TagStream& hbt1, const TagStream& hbt2,
                             Timestamp window_ps, const G2Options& options) {
  if (window_ps <= 0) throw std::invalid_argument("herald window must be positive");
  if (!(0 <= options.plateau_min && options.plateau_min <= options.plateau_max &&
        options.plateau_max <= options.max_separation && options.plateau_min > 0)) {
    throw std::invalid_argument("need 0 < plateau_min <= plateau_max <= max_separation");
  }
  require_sorted(herald, "herald");
  require_sorted(hbt1, "HBT-1");
  require_sorted(hbt2, "HBT-2");

  const auto flags1 = flag_heralds(herald.tags, hbt1, window_ps, options.offset_ps);
  const auto flags2 = flag_heralds(herald.tags, hbt2, window_ps, options.offset_ps);
  std::vector<std::int64_t> idx1, idx2;
  for (std::size_t i = 0; i < flags1.size(); ++i) {
    if (flags1[i]) idx1.push_back(static_cast<std::int64_t>(i));
    if (flags2[i]) idx2.push_back(static_cast<std::int64_t>(i));
  }

  HeraldedG2Result r;
  const std::int64_t M = options.max_separation;
  r.max_separation = M;
  r.histogram.assign(static_cast<std::size_t>(2 * M + 1), 0);
  r.heralds = herald.size();
  r.flagged1 = idx1.size();
  r.flagged2 = idx2.size();

  std::size_t start = 0;
  for (std::int64_t i : idx1) {
    while (start < idx2.size() && idx2[start] < i - M) ++start;
    for (std::size_t k = start; k < idx2.size() && idx2[k] <= i + M; ++k) {
      ++r.histogram[static_cast<std::size_t>(idx2[k] - i + M)];
    }
  }

  double plateau_sum = 0.0;
  std::size_t plateau_bins = 0;
  for (std::int64_t m = -options.plateau_max; m <= options.plateau_max; ++m) {
    if (std::abs(m) < options.plateau_min) continue;
    plateau_sum += static_cast<double>(r.count(m));
    ++plateau_bins;
  }
  r.plateau = plateau_sum / static_cast<double>(plateau_bins);
  if (!(r.plateau > 0.0)) throw UndefinedRatio("g2 normalization plateau is empty");

  const double c0 = static_cast<double>(r.count(0));
  r.g2_zero = c0 / r.plateau;
  const double var_plateau = r.plateau / static_cast<double>(plateau_bins);
  const double var_c0 = std::max(c0, 1.0);
  r.sigma = std::sqrt(var_c0 / (r.plateau * r.plateau) +
                      c0 * c0 / std::pow(r.plateau, 4) * var_plateau);
  return r;
}

std::uint64_t gated_coincidences(const TagStream& a, const TagStream& b, Timestamp gate_ps,
                                 Timestamp center_ps) {
  if (gate_ps < 0) throw std::invalid_argument("gate must be >= 0");
  require_sorted(a, "first");
  require_sorted(b, "second");
  std::uint64_t n = 0;
  if (gate_ps == 0) return 0;
  std::size_t start = 0;
  for (Timestamp ta : a.tags) {
    while (start < b.size() && 2 * (b.tags[start] - ta - center_ps) < -gate_ps) ++start;
    for (std::size_t j = start; j < b.size() && 2 * (b.tags[j] - ta - center_ps) < gate_ps; ++j) ++n;
  }
  return n;
}

Visibility franson_visibility_scan(std::span<const ScanPoint> scans) {
  std::vector<spectral::FringeSample> samples;
  samples.reserve(scans.size());
  for (const auto& s : scans) samples.push_back({s.phase, s.count});
  spectral::FringeFitOptions opt;
  opt.angular_frequency = 1.0;
  opt.poisson_weights = true;
  const auto fit = spectral::fringe_fit(samples, opt);
  return {fit.visibility, fit.sigma};
}

PeakAreas franson_peak_areas(const CorrelationHistogram& h, double delay_ps, double jitter_sigma_ps) {
  if (!(delay_ps > 0.0) || jitter_sigma_ps < 0.0) {
    throw std::invalid_argument("peak areas need a positive delay and nonnegative jitter");
  }
  const double centers[3] = {-delay_ps, 0.0, delay_ps};
  const double w = static_cast<double>(h.bin_width_ps);
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  Eigen::Vector4d aty = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double c = h.bin_center_ps(i);
    Eigen::Vector4d row;
    for (int p = 0; p < 3; ++p) row[p] = gaussian_bin_mass(c - 0.5 * w, c + 0.5 * w, centers[p], jitter_sigma_ps);
    row[3] = 1.0;
    const double y = static_cast<double>(h.bins[i]);
    const double weight = 1.0 / std::max(y, 1.0);
    ata.noalias() += weight * row * row.transpose();
    aty.noalias() += weight * y * row;
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(ata);
  if (!lu.isInvertible()) throw FitError("three-peak design matrix is singular");
  const Eigen::Vector4d coef = lu.solve(aty);
  const Eigen::Matrix4d cov = lu.inverse();
  PeakAreas out;
  for (int p = 0; p < 3; ++p) {
    out.area[p] = coef[p];
    out.sigma[p] = std::sqrt(std::max(cov(p, p), 0.0));
  }
  out.floor_per_bin = coef[3];
  return out;
}

}  // namespace qfc::tagcorr
