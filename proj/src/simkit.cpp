#include "qfc/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "qfc/errors.hpp"

namespace qfc::simkit {
namespace {

constexpr double kMaxExpectedCount = 2147483648.0;  // 2^31

// Sub-engine ids; fixed so adding a new sub-process never shifts the others.
enum : std::uint64_t {
  kPairTimes = 1,
  kHeraldThinning = 2,
  kSignalThinning = 3,
  kHeraldBackground = 4,
  kSignalBackground = 5,
  kHeraldDark = 6,
  kSignalDark = 7,
  kJitter = 8,
  kSplit = 9,
  kQfcThinning = 10,
  kQfcBackground = 11,
  kFransonPaths = 12,
  kFransonDetectorA = 13,
  kFransonDetectorB = 14,
};

void check_rate(double r, const char* name) {
  if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument(std::string(name) + " must be >= 0");
}

void check_fraction(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

void check_expected(double expected, const char* what) {
  if (expected > kMaxExpectedCount) {
    throw SizingError(std::string(what) + ": expected count " + std::to_string(expected) +
                      " exceeds 2^31 per stream");
  }
}

std::vector<Timestamp> merge_sorted(std::vector<Timestamp> a, const std::vector<Timestamp>& b) {
  const auto mid = static_cast<std::ptrdiff_t>(a.size());
  a.insert(a.end(), b.begin(), b.end());
  std::inplace_merge(a.begin(), a.begin() + mid, a.end());
  return a;
}

std::vector<Timestamp> thin(const std::vector<Timestamp>& in, double keep, std::uint64_t seed) {
  if (keep >= 1.0) return in;
  std::vector<Timestamp> out;
  if (keep <= 0.0) return out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(in.size()) * keep * 1.01) + 16);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pass(keep);
  for (Timestamp t : in) {
    if (pass(rng)) out.push_back(t);
  }
  return out;
}

}  // namespace

double TagStream::rate_per_s() const {
  return duration_ps > 0 ? static_cast<double>(tags.size()) / duration_s() : 0.0;
}

void TagStream::validate() const {
  if (duration_ps < 0) throw std::invalid_argument("tag stream duration is negative");
  if (!std::is_sorted(tags.begin(), tags.end())) throw std::invalid_argument("tag stream is not sorted");
  if (!tags.empty() && (tags.front() < 0 || tags.back() > duration_ps)) {
    throw std::invalid_argument("tag stream has timestamps outside [0, duration]");
  }
}

void SourceParams::validate() const {
  check_rate(pair_rate_per_s, "pair_rate_per_s");
  check_rate(q1, "q1");
  check_rate(q2, "q2");
  check_fraction(eta1, "eta1");
  check_fraction(eta2, "eta2");
  check_rate(dark_rate1_per_s, "dark_rate1_per_s");
  check_rate(dark_rate2_per_s, "dark_rate2_per_s");
}

void DetectorModel::validate() const {
  if (!std::isfinite(jitter_sigma_ps) || jitter_sigma_ps < 0.0) {
    throw std::invalid_argument("jitter_sigma_ps must be >= 0");
  }
  if (dead_time_ps < 0) throw std::invalid_argument("dead_time_ps must be >= 0");
}

void FransonMcConfig::validate() const {
  if (!(delay_ps > 0.0)) throw std::invalid_argument("interferometer delay must be positive");
  if (!(delay_ps + delay_imbalance_ps > 0.0)) {
    throw std::invalid_argument("second interferometer delay must be positive");
  }
  check_fraction(apparatus_visibility, "apparatus_visibility");
  check_fraction(gamma_p, "gamma_p");
  if (!pc.contains(delay_imbalance_ps)) {
    throw std::out_of_range("delay imbalance outside the pair-coherence grid");
  }
  detector_a.validate();
  detector_b.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<Timestamp> poisson_arrivals(double rate_per_s, Timestamp duration_ps, std::uint64_t seed) {
  check_rate(rate_per_s, "rate");
  if (duration_ps < 0) throw std::invalid_argument("duration must be >= 0");
  std::vector<Timestamp> out;
  const double duration = static_cast<double>(duration_ps);
  const double rate_per_ps = rate_per_s / static_cast<double>(kPsPerSecond);
  const double expected = rate_per_ps * duration;
  check_expected(expected, "Poisson process");
  if (expected <= 0.0) return out;

  out.reserve(static_cast<std::size_t>(expected + 6.0 * std::sqrt(expected) + 16.0));
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate_per_ps);
  double t = gap(rng);
  while (t < duration) {
    out.push_back(std::min(static_cast<Timestamp>(std::llround(t)), duration_ps));
    t += gap(rng);
  }
  return out;
}

PairStreams generate_pair_streams(const SourceParams& p, Timestamp duration_ps, std::uint64_t seed) {
  p.validate();
  if (duration_ps < 0) throw std::invalid_argument("duration must be >= 0");
  const double seconds = static_cast<double>(duration_ps) / static_cast<double>(kPsPerSecond);
  check_expected(p.pair_rate_per_s * seconds, "pair creation");
  check_expected((p.eta1 * p.pair_rate_per_s * (1.0 + p.q1) + p.dark_rate1_per_s) * seconds, "herald stream");
  check_expected((p.eta2 * p.pair_rate_per_s * (1.0 + p.q2) + p.dark_rate2_per_s) * seconds, "signal stream");

  const auto pairs = poisson_arrivals(p.pair_rate_per_s, duration_ps, derive_seed(seed, kPairTimes));

  std::vector<Timestamp> herald = thin(pairs, p.eta1, derive_seed(seed, kHeraldThinning));
  std::vector<Timestamp> signal = thin(pairs, p.eta2, derive_seed(seed, kSignalThinning));

  // Background photons are injected after the transmittance: rate q * P * eta.
  herald = merge_sorted(std::move(herald),
                        poisson_arrivals(p.q1 * p.pair_rate_per_s * p.eta1, duration_ps,
                                         derive_seed(seed, kHeraldBackground)));
  signal = merge_sorted(std::move(signal),
                        poisson_arrivals(p.q2 * p.pair_rate_per_s * p.eta2, duration_ps,
                                         derive_seed(seed, kSignalBackground)));
  herald = merge_sorted(std::move(herald), poisson_arrivals(p.dark_rate1_per_s, duration_ps,
                                                            derive_seed(seed, kHeraldDark)));
  signal = merge_sorted(std::move(signal), poisson_arrivals(p.dark_rate2_per_s, duration_ps,
                                                            derive_seed(seed, kSignalDark)));

  return {TagStream{channel::herald, std::move(herald), duration_ps},
          TagStream{channel::signal, std::move(signal), duration_ps}};
}

TagStream apply_detector(const TagStream& s, const DetectorModel& d, std::uint64_t seed) {
  d.validate();
  TagStream out{s.channel, {}, s.duration_ps};
  std::vector<Timestamp> shifted;
  if (d.jitter_sigma_ps > 0.0) {
    shifted.reserve(s.tags.size());
    std::mt19937_64 rng(derive_seed(seed, kJitter));
    std::normal_distribution<double> jitter(0.0, d.jitter_sigma_ps);
    for (Timestamp t : s.tags) {
      const Timestamp moved = t + static_cast<Timestamp>(std::llround(jitter(rng)));
      if (moved >= 0 && moved <= s.duration_ps) shifted.push_back(moved);
    }
    std::sort(shifted.begin(), shifted.end());
  } else {
    shifted = s.tags;
  }

  if (d.dead_time_ps <= 0) {
    out.tags = std::move(shifted);
    return out;
  }
  out.tags.reserve(shifted.size());
  for (Timestamp t : shifted) {
    if (out.tags.empty() || t - out.tags.back() >= d.dead_time_ps) out.tags.push_back(t);
  }
  return out;
}

SplitStreams hbt_split(const TagStream& s, std::uint64_t seed, std::uint8_t first_channel,
                       std::uint8_t second_channel) {
  SplitStreams out{{first_channel, {}, s.duration_ps}, {second_channel, {}, s.duration_ps}};
  out.first.tags.reserve(s.tags.size() / 2 + 16);
  out.second.tags.reserve(s.tags.size() / 2 + 16);
  std::mt19937_64 rng(derive_seed(seed, kSplit));
  std::bernoulli_distribution to_first(0.5);
  for (Timestamp t : s.tags) (to_first(rng) ? out.first : out.second).tags.push_back(t);
  return out;
}

TagStream qfc_transform(const TagStream& s, double efficiency, double background_rate_per_s,
                        std::uint64_t seed) {
  check_fraction(efficiency, "efficiency");
  check_rate(background_rate_per_s, "background_rate_per_s");
  TagStream out{s.channel, thin(s.tags, efficiency, derive_seed(seed, kQfcThinning)), s.duration_ps};
  out.tags = merge_sorted(std::move(out.tags),
                          poisson_arrivals(background_rate_per_s, s.duration_ps,
                                           derive_seed(seed, kQfcBackground)));
  return out;
}

FransonStreams franson_sample(std::span<const Timestamp> pair_times, const FransonMcConfig& cfg,
                              Timestamp duration_ps, std::uint64_t seed) {
  cfg.validate();
  const double f = cfg.pc.at(cfg.delay_imbalance_ps);
  const double p_central =
      0.5 * (1.0 + cfg.apparatus_visibility * f * cfg.gamma_p * std::cos(cfg.phase_sum));
  const auto delay_a = static_cast<Timestamp>(std::llround(cfg.delay_ps));
  const auto delay_b = static_cast<Timestamp>(std::llround(cfg.delay_ps + cfg.delay_imbalance_ps));

  TagStream a{channel::franson_a, {}, duration_ps};
  TagStream b{channel::franson_b, {}, duration_ps};
  a.tags.reserve(pair_times.size());
  b.tags.reserve(pair_times.size());

  std::mt19937_64 rng(derive_seed(seed, kFransonPaths));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (Timestamp t : pair_times) {
    bool long_a = false;
    bool long_b = false;
    const bool central = u01(rng) < p_central;
    const bool first = coin(rng);
    if (central) {
      long_a = long_b = first;  // long-long or short-short
    } else {
      long_a = first;           // long-short or short-long
      long_b = !first;
    }
    const Timestamp ta = t + (long_a ? delay_a : 0);
    const Timestamp tb = t + (long_b ? delay_b : 0);
    if (ta >= 0 && ta <= duration_ps) a.tags.push_back(ta);
    if (tb >= 0 && tb <= duration_ps) b.tags.push_back(tb);
  }
  std::sort(a.tags.begin(), a.tags.end());
  std::sort(b.tags.begin(), b.tags.end());

  return {apply_detector(a, cfg.detector_a, derive_seed(seed, kFransonDetectorA)),
          apply_detector(b, cfg.detector_b, derive_seed(seed, kFransonDetectorB))};
}

}  // namespace qfc::simkit
