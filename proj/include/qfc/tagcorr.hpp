#pragma once

// Time-tag analysis: coincidence histograms, gated counts, SBR extraction and
// the herald-indexed g2(0) estimator.

#include <cstdint>
#include <span>
#include <vector>

#include "qfc/simkit.hpp"

namespace qfc::tagcorr {

using simkit::TagStream;
using simkit::Timestamp;

// Bins of width w centred on k*w for k = -half_bins..half_bins; bin k counts
// pairs with (k - 1/2) w <= t_b - t_a < (k + 1/2) w.
struct CorrelationHistogram {
  Timestamp bin_width_ps = 0;
  std::int64_t half_bins = 0;
  std::vector<std::uint64_t> bins;
  Timestamp total_time_ps = 0;
  double singles_rate1 = 0.0;  // counts/s of stream a
  double singles_rate2 = 0.0;  // counts/s of stream b

  std::size_t size() const { return bins.size(); }
  std::size_t center() const { return static_cast<std::size_t>(half_bins); }
  double bin_center_ps(std::size_t i) const {
    return static_cast<double>((static_cast<std::int64_t>(i) - half_bins) * bin_width_ps);
  }
  double delay_range_ps() const { return (static_cast<double>(half_bins) + 0.5) * static_cast<double>(bin_width_ps); }
  std::uint64_t total() const;
};

// Two-pointer sweep over sorted streams. The bin count is the smallest odd
// number whose span covers +-delay_range.
CorrelationHistogram cross_correlate(const TagStream& a, const TagStream& b, Timestamp bin_width_ps,
                                     Timestamp delay_range_ps);

// Analysis bin scaled by a multiplier (e.g. an enlarged bin for detectors
// whose jitter spreads true coincidences beyond one nominal bin).
Timestamp analysis_bin(Timestamp base_bin_ps, double multiplier);

struct SbrResult {
  double signal = 0.0;              // background-subtracted central counts
  double background_per_bin = 0.0;  // mean of the far-delay bins
  double sbr = 0.0;                 // signal / (background_per_bin * central_bins)
  double sigma = 0.0;
  std::size_t central_bins = 0;
  std::size_t background_bins = 0;
};

// Central bins: |centre| <= signal_window/2. Background bins:
// |centre| > background_exclusion. Throws std::invalid_argument unless
// delay_range > background_exclusion > signal_window/2, and
// qfc::UndefinedRatio when the background is zero.
SbrResult extract_sbr(const CorrelationHistogram& h, Timestamp signal_window_ps,
                      Timestamp background_exclusion_ps);

// Mean far-delay count per ps of delay, the accidental floor.
double accidental_floor_per_ps(const CorrelationHistogram& h, Timestamp background_exclusion_ps);

struct G2Options {
  std::int64_t max_separation = 50;
  std::int64_t plateau_min = 10;
  std::int64_t plateau_max = 50;
  // HBT events are looked for around herald + offset.
  Timestamp offset_ps = 0;
};

struct HeraldedG2Result {
  std::int64_t max_separation = 0;
  std::vector<std::uint64_t> histogram;  // index m + max_separation
  double plateau = 0.0;                  // mean count over the normalization bins
  double g2_zero = 0.0;
  double sigma = 0.0;
  std::size_t heralds = 0;
  std::size_t flagged1 = 0;
  std::size_t flagged2 = 0;

  std::uint64_t count(std::int64_t m) const { return histogram[static_cast<std::size_t>(m + max_separation)]; }
  double normalized(std::int64_t m) const { return static_cast<double>(count(m)) / plateau; }
};

// Heralded autocorrelation:
//  1. flag each herald that has an HBT-1 (resp. HBT-2) event within
//     +-window/2; an HBT event flags only its nearest herald (all of them on
//     an exact tie);
//  2. for every (HBT-1 flag i, HBT-2 flag j) pair record m = j - i, negative
//     when the second detector's event came first;
//  3. histogram m over |m| <= max_separation;
//  4. normalize by the mean of plateau_min <= |m| <= plateau_max.
// Throws qfc::UndefinedRatio if the plateau is empty.
HeraldedG2Result heralded_g2(const TagStream& herald, const TagStream& hbt1, const TagStream& hbt2,
                             Timestamp window_ps, const G2Options& options = {});

// Pairs with -gate/2 <= t_b - t_a - center < gate/2.
std::uint64_t gated_coincidences(const TagStream& a, const TagStream& b, Timestamp gate_ps,
                                 Timestamp center_ps);

struct ScanPoint {
  double phase = 0.0;  // rad
  double count = 0.0;  // gated (optionally background-corrected) coincidences
};

struct Visibility {
  double visibility = 0.0;
  double sigma = 0.0;
};

// Fringe fit at unit angular frequency with Poisson weights.
Visibility franson_visibility_scan(std::span<const ScanPoint> scans);

struct PeakAreas {
  double area[3] = {0.0, 0.0, 0.0};   // peaks at -delay, 0, +delay
  double sigma[3] = {0.0, 0.0, 0.0};
  double floor_per_bin = 0.0;
};

// Amplitudes of three Gaussian peaks of known width (the combined detector
// jitter) at -delay, 0, +delay over a flat floor, by Poisson-weighted linear
// least squares on the bin-integrated model.
PeakAreas franson_peak_areas(const CorrelationHistogram& h, double delay_ps, double jitter_sigma_ps);

}  // namespace qfc::tagcorr
