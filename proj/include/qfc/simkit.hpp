#pragma once

// Monte Carlo generation of time-tag streams for the pair source, frequency
// converter, HBT splitter, Franson interferometers and detectors.
//
// Timestamps are integer picoseconds. Every generator takes an explicit seed;
// sub-processes draw from independent engines derived from it, so equal seeds
// and parameters give bit-identical streams.

#include <cstdint>
#include <span>
#include <vector>

#include "qfc/twophoton.hpp"

namespace qfc::simkit {

using Timestamp = std::int64_t;
inline constexpr Timestamp kPsPerSecond = 1'000'000'000'000;

namespace channel {
inline constexpr std::uint8_t herald = 0;
inline constexpr std::uint8_t signal = 1;
inline constexpr std::uint8_t hbt1 = 2;
inline constexpr std::uint8_t hbt2 = 3;
inline constexpr std::uint8_t franson_a = 4;
inline constexpr std::uint8_t franson_b = 5;
}  // namespace channel

struct TagStream {
  std::uint8_t channel = 0;
  std::vector<Timestamp> tags;  // nondecreasing, within [0, duration_ps]
  Timestamp duration_ps = 0;

  std::size_t size() const { return tags.size(); }
  bool empty() const { return tags.empty(); }
  double duration_s() const { return static_cast<double>(duration_ps) / static_cast<double>(kPsPerSecond); }
  // Counts per second; 0 for a zero-length stream.
  double rate_per_s() const;
  // Throws std::invalid_argument if unsorted or out of range.
  void validate() const;
};

struct SourceParams {
  double pair_rate_per_s = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double dark_rate1_per_s = 0.0;
  double dark_rate2_per_s = 0.0;

  void validate() const;
};

struct DetectorModel {
  double jitter_sigma_ps = 0.0;
  Timestamp dead_time_ps = 0;

  void validate() const;
};

struct PairStreams {
  TagStream herald;
  TagStream signal;
};

// splitmix64 finalizer of (seed, stream_id); used for every sub-engine.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

// Homogeneous Poisson arrivals on [0, duration). Throws qfc::SizingError if
// the expected count exceeds 2^31.
std::vector<Timestamp> poisson_arrivals(double rate_per_s, Timestamp duration_ps, std::uint64_t seed);

// Pair creation at rate P; herald kept with eta1, signal with eta2
// (independently); background q*P*eta and dark counts W added per mode.
PairStreams generate_pair_streams(const SourceParams& p, Timestamp duration_ps, std::uint64_t seed);

// Gaussian jitter (rounded to whole ps), re-sort, drop tags leaving
// [0, duration], then drop tags closer than dead_time to the last kept tag.
TagStream apply_detector(const TagStream& s, const DetectorModel& d, std::uint64_t seed);

struct SplitStreams {
  TagStream first;
  TagStream second;
};

// 50/50 routing of each tag.
SplitStreams hbt_split(const TagStream& s, std::uint64_t seed,
                       std::uint8_t first_channel = channel::hbt1,
                       std::uint8_t second_channel = channel::hbt2);

// Keep each tag with probability `efficiency`, then add Poisson background.
TagStream qfc_transform(const TagStream& s, double efficiency, double background_rate_per_s,
                        std::uint64_t seed);

struct FransonMcConfig {
  double delay_imbalance_ps = 0.0;  // D_B - D_A
  double delay_ps = 1140.0;         // D_A
  double phase_sum = 0.0;           // rad
  double apparatus_visibility = 0.88 * 0.95;
  double gamma_p = 1.0;
  twophoton::PairCoherence pc = twophoton::PairCoherence::flat(100.0);
  DetectorModel detector_a;
  DetectorModel detector_b;
  double gate_ps = 512.0;

  void validate() const;
};

struct FransonStreams {
  TagStream a;
  TagStream b;
};

// One photon of each pair in each interferometer. The indistinguishable
// short-short / long-long combinations take probability
// (1 + v F(dtau) gamma_p cos(phase)) / 2; the two distinguishable ones share
// the rest equally, so the per-pair total is phase independent. Detector
// models are applied afterwards.
FransonStreams franson_sample(std::span<const Timestamp> pair_times, const FransonMcConfig& cfg,
                              Timestamp duration_ps, std::uint64_t seed);

}  // namespace qfc::simkit
