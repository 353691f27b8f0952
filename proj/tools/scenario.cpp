#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#ifndef QFC_SCENARIO_DIR
#define QFC_SCENARIO_DIR ""
#endif

namespace qfc::cli {
namespace {

class Reader {
 public:
  Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const auto mark = at.Mark();
    std::ostringstream os;
    os << source_ << ':' << (mark.line >= 0 ? mark.line + 1 : 0) << ": " << msg;
    throw ScenarioError(os.str());
  }

  // Rejects keys not in `allowed`; typos in unit suffixes land here.
  void check_keys(const YAML::Node& map, const std::string& where,
                  const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
      if (!seen.insert(key).second) fail(kv.first, "duplicate key '" + key + "' in " + where);
    }
  }

  double number(const YAML::Node& map, const std::string& key, double fallback,
                const std::string& where) const {
    const YAML::Node v = map[key];
    if (!v) return fallback;
    try {
      const double x = v.as<double>();
      if (!std::isfinite(x)) fail(v, where + "." + key + " must be finite");
      return x;
    } catch (const YAML::BadConversion&) {
      fail(v, where + "." + key + " must be a number");
    }
  }

  double nonneg(const YAML::Node& map, const std::string& key, double fallback,
                const std::string& where) const {
    const double x = number(map, key, fallback, where);
    if (x < 0.0) fail(map[key], where + "." + key + " must be >= 0");
    return x;
  }

  double fraction(const YAML::Node& map, const std::string& key, double fallback,
                  const std::string& where) const {
    const double x = number(map, key, fallback, where);
    if (x < 0.0 || x > 1.0) fail(map[key], where + "." + key + " must be in [0, 1]");
    return x;
  }

  double positive(const YAML::Node& map, const std::string& key, double fallback,
                  const std::string& where) const {
    const double x = number(map, key, fallback, where);
    if (!(x > 0.0)) fail(map[key], where + "." + key + " must be > 0");
    return x;
  }

  std::int64_t integer(const YAML::Node& map, const std::string& key, std::int64_t fallback,
                       const std::string& where, std::int64_t min_value) const {
    const YAML::Node v = map[key];
    if (!v) return fallback;
    std::int64_t x = 0;
    try {
      x = v.as<std::int64_t>();
    } catch (const YAML::BadConversion&) {
      fail(v, where + "." + key + " must be an integer");
    }
    if (x < min_value) fail(v, where + "." + key + " must be >= " + std::to_string(min_value));
    return x;
  }

  std::string text(const YAML::Node& map, const std::string& key, const std::string& fallback) const {
    const YAML::Node v = map[key];
    if (!v) return fallback;
    if (!v.IsScalar()) fail(v, key + " must be a string");
    return v.as<std::string>();
  }

 private:
  std::string source_;
};

simkit::DetectorModel read_detector(const Reader& r, const YAML::Node& det, const std::string& where) {
  simkit::DetectorModel d;
  if (!det) return d;
  r.check_keys(det, where, {"jitter_sigma_ps", "dead_time_ps"});
  d.jitter_sigma_ps = r.nonneg(det, "jitter_sigma_ps", 0.0, where);
  d.dead_time_ps = r.integer(det, "dead_time_ps", 0, where, 0);
  return d;
}

}  // namespace

std::string kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::pairs: return "pairs";
    case ScenarioKind::g2: return "g2";
    case ScenarioKind::franson: return "franson";
  }
  return "?";
}

std::filesystem::path resolve_scenario(const std::string& name_or_path) {
  const std::filesystem::path direct(name_or_path);
  if (std::filesystem::is_regular_file(direct)) return direct;
  const std::filesystem::path bundled_dir(QFC_SCENARIO_DIR);
  if (!bundled_dir.empty()) {
    for (const char* ext : {".yaml", ".yml"}) {
      auto p = bundled_dir / (name_or_path + ext);
      if (std::filesystem::is_regular_file(p)) return p;
    }
  }
  throw ScenarioError(name_or_path + ": no such scenario file or bundled scenario");
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string(), path.parent_path());
}

Scenario parse_scenario(const std::string& text, const std::string& source_name,
                        const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(source_name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const Reader r(source_name);
  if (!root || !root.IsMap()) r.fail(root, "scenario must be a mapping");
  r.check_keys(root, "scenario",
               {"name", "kind", "seed", "duration_ps", "duration_s", "source", "qfc", "detectors",
                "spectrum", "phase_matching", "franson", "analysis"});

  Scenario s;
  s.name = r.text(root, "name", "unnamed");
  const std::string kind = r.text(root, "kind", "g2");
  if (kind == "pairs") {
    s.kind = ScenarioKind::pairs;
  } else if (kind == "g2") {
    s.kind = ScenarioKind::g2;
  } else if (kind == "franson") {
    s.kind = ScenarioKind::franson;
  } else {
    r.fail(root["kind"], "kind must be one of pairs, g2, franson");
  }
  if (root["seed"]) {
    try {
      s.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      r.fail(root["seed"], "seed must be an unsigned integer");
    }
  }
  if (root["duration_ps"] && root["duration_s"]) {
    r.fail(root["duration_s"], "give either duration_ps or duration_s");
  }
  if (root["duration_s"]) {
    const double secs = r.nonneg(root, "duration_s", 0.0, "scenario");
    s.duration_ps = static_cast<simkit::Timestamp>(std::llround(secs * static_cast<double>(simkit::kPsPerSecond)));
  } else {
    s.duration_ps = r.integer(root, "duration_ps", 0, "scenario", 0);
  }

  if (const YAML::Node src = root["source"]) {
    r.check_keys(src, "source",
                 {"pair_rate_per_s", "q1", "q2", "eta1", "eta2", "dark_rate1_per_s", "dark_rate2_per_s"});
    s.source.pair_rate_per_s = r.nonneg(src, "pair_rate_per_s", 0.0, "source");
    s.source.q1 = r.nonneg(src, "q1", 0.0, "source");
    s.source.q2 = r.nonneg(src, "q2", 0.0, "source");
    s.source.eta1 = r.fraction(src, "eta1", 1.0, "source");
    s.source.eta2 = r.fraction(src, "eta2", 1.0, "source");
    s.source.dark_rate1_per_s = r.nonneg(src, "dark_rate1_per_s", 0.0, "source");
    s.source.dark_rate2_per_s = r.nonneg(src, "dark_rate2_per_s", 0.0, "source");
  } else {
    r.fail(root, "missing 'source' section");
  }

  if (const YAML::Node q = root["qfc"]) {
    r.check_keys(q, "qfc", {"efficiency", "background_rate_per_s"});
    QfcStage stage;
    stage.efficiency = r.fraction(q, "efficiency", 1.0, "qfc");
    stage.background_rate_per_s = r.nonneg(q, "background_rate_per_s", 0.0, "qfc");
    s.qfc = stage;
  }

  if (const YAML::Node det = root["detectors"]) {
    r.check_keys(det, "detectors", {"herald", "signal", "hbt1", "hbt2", "franson_a", "franson_b"});
    s.herald_detector = read_detector(r, det["herald"], "detectors.herald");
    s.signal_detector = read_detector(r, det["signal"], "detectors.signal");
    s.hbt1_detector = read_detector(r, det["hbt1"], "detectors.hbt1");
    s.hbt2_detector = read_detector(r, det["hbt2"], "detectors.hbt2");
    s.franson_a_detector = read_detector(r, det["franson_a"], "detectors.franson_a");
    s.franson_b_detector = read_detector(r, det["franson_b"], "detectors.franson_b");
  }

  if (const YAML::Node sp = root["spectrum"]) {
    r.check_keys(sp, "spectrum", {"file", "fwhm_ghz", "center_wavelength_nm", "half_span_ghz", "step_ghz"});
    if (sp["file"]) {
      std::filesystem::path f = r.text(sp, "file", "");
      if (f.is_relative() && !base_dir.empty()) f = base_dir / f;
      if (!std::filesystem::is_regular_file(f)) r.fail(sp["file"], "spectrum file not found: " + f.string());
      s.spectrum.file = f;
    }
    s.spectrum.fwhm_ghz = r.positive(sp, "fwhm_ghz", s.spectrum.fwhm_ghz, "spectrum");
    s.spectrum.center_wavelength_nm =
        r.nonneg(sp, "center_wavelength_nm", s.spectrum.center_wavelength_nm, "spectrum");
    s.spectrum.half_span_ghz = r.positive(sp, "half_span_ghz", s.spectrum.half_span_ghz, "spectrum");
    s.spectrum.step_ghz = r.positive(sp, "step_ghz", s.spectrum.step_ghz, "spectrum");
    if (s.spectrum.step_ghz >= s.spectrum.half_span_ghz) r.fail(sp, "spectrum.step_ghz must be below half_span_ghz");
  }

  if (const YAML::Node pm = root["phase_matching"]) {
    r.check_keys(pm, "phase_matching", {"center_offset_ghz", "fwhm_ghz"});
    s.phase_matching.center_offset_ghz = r.number(pm, "center_offset_ghz", 0.0, "phase_matching");
    s.phase_matching.fwhm_ghz = r.positive(pm, "fwhm_ghz", s.phase_matching.fwhm_ghz, "phase_matching");
  }

  if (const YAML::Node fr = root["franson"]) {
    r.check_keys(fr, "franson",
                 {"delay_ps", "delay_imbalance_ps", "v_mi", "v_mzi", "phase_points",
                  "background_rate_per_s", "tau_max_ps", "envelope_points"});
    auto& f = s.franson;
    f.delay_ps = r.positive(fr, "delay_ps", f.delay_ps, "franson");
    f.delay_imbalance_ps = r.number(fr, "delay_imbalance_ps", f.delay_imbalance_ps, "franson");
    f.v_mi = r.fraction(fr, "v_mi", f.v_mi, "franson");
    f.v_mzi = r.fraction(fr, "v_mzi", f.v_mzi, "franson");
    f.phase_points = static_cast<int>(r.integer(fr, "phase_points", f.phase_points, "franson", 8));
    f.background_rate_per_s = r.nonneg(fr, "background_rate_per_s", 0.0, "franson");
    f.tau_max_ps = r.positive(fr, "tau_max_ps", f.tau_max_ps, "franson");
    f.envelope_points = static_cast<std::size_t>(
        r.integer(fr, "envelope_points", static_cast<std::int64_t>(f.envelope_points), "franson", 3));
    if (f.envelope_points % 2 == 0) r.fail(fr["envelope_points"], "franson.envelope_points must be odd");
    if (f.delay_ps + f.delay_imbalance_ps <= 0.0) {
      r.fail(fr, "franson.delay_ps + delay_imbalance_ps must be > 0");
    }
    if (std::abs(f.delay_imbalance_ps) > 2.0 * f.tau_max_ps) {
      r.fail(fr["delay_imbalance_ps"], "franson.delay_imbalance_ps lies outside the pair-coherence grid (2 * tau_max_ps)");
    }
  }

  if (const YAML::Node an = root["analysis"]) {
    r.check_keys(an, "analysis",
                 {"bin_ps", "bin_multiplier", "window_ps", "gate_ps", "delay_range_ps",
                  "background_exclusion_ps", "max_separation", "plateau_min", "plateau_max"});
    auto& a = s.analysis;
    a.bin_ps = r.integer(an, "bin_ps", a.bin_ps, "analysis", 1);
    a.bin_multiplier = r.positive(an, "bin_multiplier", a.bin_multiplier, "analysis");
    a.window_ps = r.integer(an, "window_ps", a.window_ps, "analysis", 1);
    a.gate_ps = r.integer(an, "gate_ps", a.gate_ps, "analysis", 0);
    a.delay_range_ps = r.integer(an, "delay_range_ps", a.delay_range_ps, "analysis", 1);
    a.background_exclusion_ps =
        r.integer(an, "background_exclusion_ps", a.background_exclusion_ps, "analysis", 0);
    a.max_separation = r.integer(an, "max_separation", a.max_separation, "analysis", 1);
    a.plateau_min = r.integer(an, "plateau_min", a.plateau_min, "analysis", 1);
    a.plateau_max = r.integer(an, "plateau_max", a.plateau_max, "analysis", 1);
    if (a.plateau_min > a.plateau_max || a.plateau_max > a.max_separation) {
      r.fail(an, "analysis requires plateau_min <= plateau_max <= max_separation");
    }
    if (!(a.delay_range_ps > a.background_exclusion_ps)) {
      r.fail(an, "analysis.delay_range_ps must exceed background_exclusion_ps");
    }
  }

  // Expected counts are checked here so that oversize runs fail before any output.
  const double seconds = static_cast<double>(s.duration_ps) / static_cast<double>(simkit::kPsPerSecond);
  if (s.source.pair_rate_per_s * seconds > 2147483648.0) {
    r.fail(root["source"] ? root["source"] : root,
           "expected pair count exceeds 2^31; shorten duration or lower pair_rate_per_s");
  }
  return s;
}

spectral::Spectrum scenario_spectrum(const Scenario& s) {
  if (!s.spectrum.file.empty()) return spectral::load_spectrum(s.spectrum.file, s.spectrum.center_wavelength_nm);
  return spectral::gaussian_spectrum(
      0.0, s.spectrum.fwhm_ghz,
      spectral::FrequencyGrid::symmetric(s.spectrum.half_span_ghz, s.spectrum.step_ghz),
      s.spectrum.center_wavelength_nm);
}

}  // namespace qfc::cli
