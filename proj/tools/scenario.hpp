#pragma once

// Scenario files for the qfcsim front end: YAML with units spelled out in the
// key names (pair_rate_per_s, jitter_sigma_ps, ...). Unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "qfc/simkit.hpp"
#include "qfc/spectral.hpp"

namespace qfc::cli {

// Validation failure; the message carries "file:line: ".
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { pairs, g2, franson };

struct SpectrumSource {
  std::filesystem::path file;  // empty: synthetic Gaussian
  double fwhm_ghz = 173.0;
  double center_wavelength_nm = 854.0;
  double half_span_ghz = 3000.0;
  double step_ghz = 0.5;
};

struct QfcStage {
  double efficiency = 1.0;
  double background_rate_per_s = 0.0;
};

struct FransonScan {
  double delay_ps = 1140.0;
  double delay_imbalance_ps = 0.0;
  double v_mi = 0.88;
  double v_mzi = 0.95;
  int phase_points = 16;
  double background_rate_per_s = 0.0;  // uncorrelated counts added on each detector
  double tau_max_ps = 200.0;
  std::size_t envelope_points = 801;
};

struct AnalysisSettings {
  simkit::Timestamp bin_ps = 1500;
  double bin_multiplier = 1.0;
  simkit::Timestamp window_ps = 1500;
  simkit::Timestamp gate_ps = 512;
  simkit::Timestamp delay_range_ps = 60000;
  simkit::Timestamp background_exclusion_ps = 15000;
  std::int64_t max_separation = 50;
  std::int64_t plateau_min = 10;
  std::int64_t plateau_max = 50;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::g2;
  std::uint64_t seed = 1;
  simkit::Timestamp duration_ps = 0;
  simkit::SourceParams source;
  std::optional<QfcStage> qfc;
  simkit::DetectorModel herald_detector;
  simkit::DetectorModel signal_detector;
  simkit::DetectorModel hbt1_detector;
  simkit::DetectorModel hbt2_detector;
  simkit::DetectorModel franson_a_detector;
  simkit::DetectorModel franson_b_detector;
  SpectrumSource spectrum;
  spectral::PhaseMatching phase_matching{0.0, 118.0};
  FransonScan franson;
  AnalysisSettings analysis;
};

std::string kind_name(ScenarioKind kind);

// `name_or_path` is a file, or the name of a bundled scenario.
std::filesystem::path resolve_scenario(const std::string& name_or_path);

// Throws ScenarioError on parse or validation failure.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& source_name,
                        const std::filesystem::path& base_dir = {});

// The spectrum named by the scenario (file or synthetic Gaussian).
spectral::Spectrum scenario_spectrum(const Scenario& s);

}  // namespace qfc::cli
