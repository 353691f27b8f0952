#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "qfc/curve_io.hpp"
#include "qfc/errors.hpp"
#include "qfc/models.hpp"
#include "qfc/simkit.hpp"
#include "qfc/spectral.hpp"
#include "qfc/tag_io.hpp"
#include "qfc/tagcorr.hpp"
#include "qfc/twophoton.hpp"
#include "scenario.hpp"

namespace qfc::cli {
namespace {

using json = nlohmann::ordered_json;
using simkit::TagStream;
using simkit::Timestamp;

constexpr double kPsToS = 1e-12;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr const char* kSummary = "summary.json";
constexpr const char* kInsufficient = "insufficient data";

// Sub-seeds of the front end, disjoint from the library's own ids.
enum : std::uint64_t {
  kHeraldDetector = 101,
  kQfc = 102,
  kSignalDetector = 103,
  kHbtSplit = 104,
  kHbt1Detector = 105,
  kHbt2Detector = 106,
  kFransonPairs = 1000,
  kFransonPaths = 2000,
  kFransonBackgroundA = 3000,
  kFransonBackgroundB = 4000,
};

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path.string() + ": cannot open (run simulate first?)");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, std::string_view header, const ColumnData& d,
               const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  write_columns(out, header, d, comments);
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

void prepare_out(const std::filesystem::path& out) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  std::filesystem::create_directories(out);
}

void apply_overrides(AnalysisSettings& a, const Overrides& o) {
  if (o.bin_ps) {
    if (*o.bin_ps <= 0) throw std::invalid_argument("--bin-ps must be > 0");
    a.bin_ps = *o.bin_ps;
  }
  if (o.gate_ps) {
    if (*o.gate_ps < 0) throw std::invalid_argument("--gate-ps must be >= 0");
    a.gate_ps = *o.gate_ps;
  }
  if (o.window_ps) {
    if (*o.window_ps <= 0) throw std::invalid_argument("--window-ps must be > 0");
    a.window_ps = *o.window_ps;
  }
}

json analysis_json(const AnalysisSettings& a) {
  return json{{"bin_ps", a.bin_ps},
              {"bin_multiplier", a.bin_multiplier},
              {"window_ps", a.window_ps},
              {"gate_ps", a.gate_ps},
              {"delay_range_ps", a.delay_range_ps},
              {"background_exclusion_ps", a.background_exclusion_ps},
              {"max_separation", a.max_separation},
              {"plateau_min", a.plateau_min},
              {"plateau_max", a.plateau_max}};
}

AnalysisSettings analysis_from_json(const json& j) {
  AnalysisSettings a;
  a.bin_ps = j.value("bin_ps", a.bin_ps);
  a.bin_multiplier = j.value("bin_multiplier", a.bin_multiplier);
  a.window_ps = j.value("window_ps", a.window_ps);
  a.gate_ps = j.value("gate_ps", a.gate_ps);
  a.delay_range_ps = j.value("delay_range_ps", a.delay_range_ps);
  a.background_exclusion_ps = j.value("background_exclusion_ps", a.background_exclusion_ps);
  a.max_separation = j.value("max_separation", a.max_separation);
  a.plateau_min = j.value("plateau_min", a.plateau_min);
  a.plateau_max = j.value("plateau_max", a.plateau_max);
  return a;
}

// Rate-model prediction for the herald/signal chain. Conversion thins the
// signal arm's pair photons, background and dark counts alike (dark counts
// are generated upstream of the converter here), then adds its own floor.
json rate_prediction(const Scenario& s) {
  double eta2 = s.source.eta2;
  double w2 = s.source.dark_rate2_per_s;
  if (s.qfc) {
    eta2 *= s.qfc->efficiency;
    w2 = w2 * s.qfc->efficiency + s.qfc->background_rate_per_s;
  }
  json p;
  if (!(s.source.eta1 > 0.0 && eta2 > 0.0)) return p;
  const auto ab = models::ab_from_physics(s.source.q1, s.source.q2, s.source.eta1, eta2, w2);
  const double r_her = models::singles_rate(s.source.pair_rate_per_s, s.source.eta1, s.source.q1, 0.0);
  const double dt_bin = static_cast<double>(tagcorr::analysis_bin(s.analysis.bin_ps, s.analysis.bin_multiplier)) * kPsToS;
  const double dt_win = static_cast<double>(s.analysis.window_ps) * kPsToS;
  p["a"] = ab.a;
  p["b"] = ab.b;
  p["herald_rate_per_s"] = r_her;
  if (ab.a * r_her + ab.b > 0.0) {
    p["sbr"] = models::sbr_model(r_her, {ab.a, ab.b, dt_bin});
    p["g2_zero"] = models::g2_from_sbr(models::sbr_model(r_her, {ab.a, ab.b, dt_win}));
  }
  return p;
}

twophoton::PairCoherence scenario_pair_coherence(const Scenario& s) {
  const auto spec = scenario_spectrum(s);
  const auto filtered = spectral::apply_phase_matching(spec, s.phase_matching);
  const auto ea = spectral::coherence_envelope(spec, s.franson.tau_max_ps, s.franson.envelope_points);
  const auto eb = spectral::coherence_envelope(filtered, s.franson.tau_max_ps, s.franson.envelope_points);
  return twophoton::pair_coherence(ea, eb);
}

TagStream merge_channels(TagStream a, const TagStream& b, std::uint8_t channel) {
  const auto mid = static_cast<std::ptrdiff_t>(a.tags.size());
  a.tags.insert(a.tags.end(), b.tags.begin(), b.tags.end());
  std::inplace_merge(a.tags.begin(), a.tags.begin() + mid, a.tags.end());
  a.channel = channel;
  a.duration_ps = std::max(a.duration_ps, b.duration_ps);
  return a;
}

std::string phase_file(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "franson_%02d.ptag", k);
  return buf;
}

// --- simulate ------------------------------------------------------------

json simulate_chain(const Scenario& s, std::uint64_t seed, const std::filesystem::path& out) {
  const auto pairs = simkit::generate_pair_streams(s.source, s.duration_ps, seed);
  const TagStream herald = simkit::apply_detector(pairs.herald, s.herald_detector,
                                                  simkit::derive_seed(seed, kHeraldDetector));
  TagStream signal = pairs.signal;
  if (s.qfc) {
    signal = simkit::qfc_transform(signal, s.qfc->efficiency, s.qfc->background_rate_per_s,
                                   simkit::derive_seed(seed, kQfc));
  }
  json files = json::array();
  json counts;
  auto emit = [&](const std::string& name, const TagStream& t) {
    const std::vector<TagStream> one{t};
    simkit::write_ptag(out / name, one);
    files.push_back(name);
    counts[name.substr(0, name.find('.'))] = t.size();
  };
  emit("herald.ptag", herald);
  if (s.kind == ScenarioKind::pairs) {
    emit("signal.ptag", simkit::apply_detector(signal, s.signal_detector,
                                               simkit::derive_seed(seed, kSignalDetector)));
  } else {
    const auto split = simkit::hbt_split(signal, simkit::derive_seed(seed, kHbtSplit));
    emit("hbt1.ptag", simkit::apply_detector(split.first, s.hbt1_detector,
                                             simkit::derive_seed(seed, kHbt1Detector)));
    emit("hbt2.ptag", simkit::apply_detector(split.second, s.hbt2_detector,
                                             simkit::derive_seed(seed, kHbt2Detector)));
  }
  return json{{"files", files}, {"counts", counts}, {"prediction", rate_prediction(s)}};
}

json simulate_franson(const Scenario& s, std::uint64_t seed, const std::filesystem::path& out) {
  const auto& f = s.franson;
  simkit::FransonMcConfig cfg;
  cfg.delay_ps = f.delay_ps;
  cfg.delay_imbalance_ps = f.delay_imbalance_ps;
  cfg.apparatus_visibility = f.v_mi * f.v_mzi;
  cfg.pc = scenario_pair_coherence(s);
  cfg.detector_a = s.franson_a_detector;
  cfg.detector_b = s.franson_b_detector;
  cfg.gate_ps = static_cast<double>(s.analysis.gate_ps);
  cfg.validate();

  // Pairs with both photons detected; uncorrelated counts ride on top.
  const double pair_rate = s.source.pair_rate_per_s * s.source.eta1 * s.source.eta2;
  json files = json::array();
  json phases = json::array();
  std::uint64_t tags = 0;
  for (int k = 0; k < f.phase_points; ++k) {
    const auto uk = static_cast<std::uint64_t>(k);
    cfg.phase_sum = kTwoPi * k / f.phase_points;
    const auto times = simkit::poisson_arrivals(pair_rate, s.duration_ps,
                                                simkit::derive_seed(seed, kFransonPairs + uk));
    auto st = simkit::franson_sample(times, cfg, s.duration_ps, simkit::derive_seed(seed, kFransonPaths + uk));
    if (f.background_rate_per_s > 0.0) {
      const TagStream bg_a{simkit::channel::franson_a,
                           simkit::poisson_arrivals(f.background_rate_per_s, s.duration_ps,
                                                    simkit::derive_seed(seed, kFransonBackgroundA + uk)),
                           s.duration_ps};
      const TagStream bg_b{simkit::channel::franson_b,
                           simkit::poisson_arrivals(f.background_rate_per_s, s.duration_ps,
                                                    simkit::derive_seed(seed, kFransonBackgroundB + uk)),
                           s.duration_ps};
      st.a = merge_channels(st.a, bg_a, simkit::channel::franson_a);
      st.b = merge_channels(st.b, bg_b, simkit::channel::franson_b);
    }
    const std::vector<TagStream> both{st.a, st.b};
    simkit::write_ptag(out / phase_file(k), both);
    files.push_back(phase_file(k));
    phases.push_back(cfg.phase_sum);
    tags += st.a.size() + st.b.size();
  }
  const double f_dtau = cfg.pc.at(f.delay_imbalance_ps);
  return json{{"files", files},
              {"counts", {{"tags", tags}}},
              {"franson",
               {{"phases_rad", phases},
                {"delay_ps", f.delay_ps},
                {"delay_imbalance_ps", f.delay_imbalance_ps},
                {"pair_coherence_at_imbalance", f_dtau},
                {"jitter_sigma_a_ps", s.franson_a_detector.jitter_sigma_ps},
                {"jitter_sigma_b_ps", s.franson_b_detector.jitter_sigma_ps}}},
              {"prediction", {{"visibility", cfg.apparatus_visibility * f_dtau}}}};
}

// --- analyze -------------------------------------------------------------

TagStream load_channel(const std::filesystem::path& path, std::uint8_t ch) {
  return simkit::read_tags(path).channel(ch);
}

void analyze_chain(const std::string& kind, const AnalysisSettings& a, const std::filesystem::path& in,
                   const std::filesystem::path& out, json& result) {
  const TagStream herald = load_channel(in / "herald.ptag", simkit::channel::herald);
  TagStream signal;
  TagStream hbt1, hbt2;
  if (kind == "pairs") {
    signal = load_channel(in / "signal.ptag", simkit::channel::signal);
  } else {
    hbt1 = load_channel(in / "hbt1.ptag", simkit::channel::hbt1);
    hbt2 = load_channel(in / "hbt2.ptag", simkit::channel::hbt2);
    signal = merge_channels(hbt1, hbt2, simkit::channel::signal);
  }
  bool ok = true;

  const Timestamp bin = tagcorr::analysis_bin(a.bin_ps, a.bin_multiplier);
  const auto h = tagcorr::cross_correlate(herald, signal, bin, a.delay_range_ps);
  ColumnData corr;
  for (std::size_t i = 0; i < h.size(); ++i) {
    corr.x.push_back(h.bin_center_ps(i));
    corr.y.push_back(static_cast<double>(h.bins[i]));
  }
  write_csv(out / "correlation.csv", "delay_ps,coincidences", corr,
            {"bin_ps=" + std::to_string(bin), "total_time_ps=" + std::to_string(h.total_time_ps)});
  result["herald_rate_per_s"] = h.singles_rate1;
  result["signal_rate_per_s"] = h.singles_rate2;
  try {
    const auto sbr = tagcorr::extract_sbr(h, bin, a.background_exclusion_ps);
    result["sbr"] = sbr.sbr;
    result["sbr_sigma"] = sbr.sigma;
    result["g2_zero_from_sbr"] = models::g2_from_sbr(std::max(sbr.sbr, 0.0));
  } catch (const UndefinedRatio&) {
    result["sbr"] = nullptr;
    ok = false;
  }

  if (kind != "pairs") {
    tagcorr::G2Options opt;
    opt.max_separation = a.max_separation;
    opt.plateau_min = a.plateau_min;
    opt.plateau_max = a.plateau_max;
    try {
      const auto g2 = tagcorr::heralded_g2(herald, hbt1, hbt2, a.window_ps, opt);
      result["g2_zero"] = g2.g2_zero;
      result["sigma"] = g2.sigma;
      result["heralds"] = g2.heralds;
      ColumnData hist;
      for (std::int64_t m = -g2.max_separation; m <= g2.max_separation; ++m) {
        hist.x.push_back(static_cast<double>(m));
        hist.y.push_back(g2.normalized(m));
        hist.sigma.push_back(std::sqrt(static_cast<double>(std::max<std::uint64_t>(g2.count(m), 1))) / g2.plateau);
      }
      write_csv(out / "g2_histogram.csv", "herald_separation,g2,sigma", hist,
                {"window_ps=" + std::to_string(a.window_ps), "plateau=" + num(g2.plateau)});
    } catch (const UndefinedRatio&) {
      result["g2_zero"] = nullptr;
      result["sigma"] = nullptr;
      ok = false;
    }
  }
  result["status"] = ok ? "ok" : kInsufficient;
}

void analyze_franson(const json& manifest, const AnalysisSettings& a, const std::filesystem::path& in,
                     const std::filesystem::path& out, json& result) {
  const auto& files = manifest.at("files");
  const auto& phases = manifest.at("franson").at("phases_rad");
  const double delay = manifest.at("franson").at("delay_ps").get<double>();
  const Timestamp hist_bin = 32;
  const Timestamp hist_range = static_cast<Timestamp>(std::llround(2.0 * delay)) + 2000;
  std::vector<std::uint64_t> summed;
  std::vector<tagcorr::ScanPoint> scan;
  ColumnData scan_csv;
  double total_gated = 0.0;
  double floor_ps = 0.0;

  for (std::size_t k = 0; k < files.size(); ++k) {
    const auto tf = simkit::read_tags(in / files[k].get<std::string>());
    const TagStream sa = tf.channel(simkit::channel::franson_a);
    const TagStream sb = tf.channel(simkit::channel::franson_b);
    const double gated = static_cast<double>(tagcorr::gated_coincidences(sa, sb, a.gate_ps, 0));
    // Background correction: accidental floor from far delays, per ps of gate.
    const auto far = tagcorr::cross_correlate(sa, sb, a.bin_ps, a.delay_range_ps);
    const double fl = tagcorr::accidental_floor_per_ps(far, a.background_exclusion_ps);
    floor_ps += fl;
    const double corrected = gated - fl * static_cast<double>(a.gate_ps);
    scan.push_back({phases[k].get<double>(), corrected});
    scan_csv.x.push_back(phases[k].get<double>());
    scan_csv.y.push_back(corrected);
    scan_csv.sigma.push_back(std::sqrt(std::max(gated, 1.0)));
    total_gated += gated;
    const auto h = tagcorr::cross_correlate(sa, sb, hist_bin, hist_range);
    if (summed.empty()) summed.assign(h.size(), 0);
    for (std::size_t i = 0; i < h.size(); ++i) summed[i] += h.bins[i];
  }
  write_csv(out / "franson_scan.csv", "phase_rad,gated_coincidences,sigma", scan_csv,
            {"gate_ps=" + std::to_string(a.gate_ps), "background_corrected=1"});
  ColumnData hist;
  const auto half = static_cast<std::int64_t>(summed.size() / 2);
  for (std::size_t i = 0; i < summed.size(); ++i) {
    hist.x.push_back(static_cast<double>((static_cast<std::int64_t>(i) - half) * hist_bin));
    hist.y.push_back(static_cast<double>(summed[i]));
  }
  write_csv(out / "franson_histogram.csv", "delay_ps,coincidences", hist,
            {"bin_ps=" + std::to_string(hist_bin), "phase_averaged=1"});

  result["gated_coincidences"] = total_gated;
  result["accidental_floor_per_ps"] = files.empty() ? 0.0 : floor_ps / static_cast<double>(files.size());
  if (scan.size() < 8 || total_gated <= 0.0) {
    result["visibility"] = nullptr;
    result["sigma"] = nullptr;
    result["status"] = kInsufficient;
    return;
  }
  try {
    const auto v = tagcorr::franson_visibility_scan(scan);
    result["visibility"] = v.visibility;
    result["sigma"] = v.sigma;
    if (v.sigma > 0.0) {
      const auto bell = twophoton::bell_check(v.visibility, v.sigma);
      result["bell"] = {{"bound", bell.bound},
                        {"violation_sigmas", bell.violation_sigmas},
                        {"violates_bell", bell.violates_bell},
                        {"classical_sigmas", bell.classical_sigmas},
                        {"exceeds_classical", bell.exceeds_classical}};
    }
    const auto fid = twophoton::entanglement_fidelity(v.visibility, v.sigma);
    result["fidelity"] = {{"value", fid.value}, {"sigma", fid.sigma}};
    result["status"] = "ok";
  } catch (const FitError&) {
    result["visibility"] = nullptr;
    result["sigma"] = nullptr;
    result["status"] = kInsufficient;
  }
}

// --- reproduce -----------------------------------------------------------

struct FigureSetup {
  spectral::Spectrum spectrum;
  spectral::Spectrum filtered;
  spectral::PhaseMatching pm;
  double tau_max_ps = 100.0;
  std::size_t points = 2001;
};

FigureSetup figure_setup() {
  const spectral::PhaseMatching pm{0.0, 118.0};
  auto sp = spectral::gaussian_spectrum(0.0, 173.0, spectral::FrequencyGrid::symmetric(3000.0, 0.5), 854.0);
  auto filtered = spectral::apply_phase_matching(sp, pm);
  return {std::move(sp), std::move(filtered), pm};
}

std::vector<std::string> spectrum_comments(const spectral::Spectrum& s, const spectral::CoherenceEnvelope& e,
                                           const std::string& label) {
  const auto tc = spectral::coherence_time(e);
  const double dnu = spectral::integral_bandwidth(s);
  return {"spectrum=" + label,
          "bandwidth_GHz=" + num(dnu),
          "coherence_time_ps=" + num(tc.value_ps),
          "time_bandwidth_product=" + num(tc.value_ps * dnu * spectral::kCyclesPerGhzPs)};
}

void reproduce_fig2(const std::filesystem::path& out) {
  const auto fs = figure_setup();
  const auto e = spectral::coherence_envelope(fs.spectrum, fs.tau_max_ps, fs.points);
  ColumnData d{e.tau(), e.magnitude(), {}};
  write_csv(out / "fig2.csv", "tau_ps,visibility", d,
            spectrum_comments(fs.spectrum, e, "gaussian fwhm_GHz=173 (synthetic stand-in)"));
  std::ofstream sp(out / "fig2_spectrum.csv", std::ios::binary);
  spectral::write_spectrum(sp, fs.spectrum, {"fwhm_GHz=173"});
}

void reproduce_fig3(const std::filesystem::path& out) {
  const auto fs = figure_setup();
  const auto e = spectral::coherence_envelope(fs.filtered, fs.tau_max_ps, fs.points);
  auto comments = spectrum_comments(fs.filtered, e, "gaussian fwhm_GHz=173 x sinc2 fwhm_GHz=118");
  comments.push_back("phase_matching_bandwidth_GHz=" +
                     num(spectral::integral_bandwidth(spectral::sinc2_spectrum(
                         0.0, fs.pm.fwhm_ghz, spectral::FrequencyGrid::symmetric(3000.0, 0.5)))));
  comments.push_back("measured_comparison_coherence_time_ps=10.5");
  ColumnData d{e.tau(), e.magnitude(), {}};
  write_csv(out / "fig3.csv", "tau_ps,visibility", d, comments);
  std::ofstream sp(out / "fig3_spectrum.csv", std::ios::binary);
  spectral::write_spectrum(sp, fs.filtered, {"gaussian fwhm_GHz=173 x sinc2 fwhm_GHz=118"});
}

void reproduce_fig4(const std::filesystem::path& out, std::uint64_t seed) {
  const auto fs = figure_setup();
  const double tau_max = 200.0;
  const auto ea = spectral::coherence_envelope(fs.spectrum, tau_max, 801);
  const auto eb = spectral::coherence_envelope(fs.filtered, tau_max, 801);
  const auto pc = twophoton::pair_coherence(ea, eb);
  const double v_mi = 0.88, v_mzi = 0.95;
  const auto curve = twophoton::expected_visibility_curve(pc, v_mi, v_mzi);
  ColumnData d;
  for (std::size_t i = 0; i < curve.tau_ps.size(); ++i) {
    if (std::abs(curve.tau_ps[i]) > 60.0) continue;
    d.x.push_back(curve.tau_ps[i]);
    d.y.push_back(curve.visibility[i]);
  }
  const std::vector<std::string> params{"v_mi=0.88", "v_mzi=0.95",
                                        "pair_coherence_time_ps=" + num(twophoton::pair_coherence_time(pc)),
                                        "measured_comparison_pair_coherence_time_ps=12.4"};
  write_csv(out / "fig4.csv", "dtau_ps,visibility", d, params);

  // Monte Carlo points: APD-like jitter on A, small jitter on B, 512 ps gate.
  simkit::FransonMcConfig cfg;
  cfg.apparatus_visibility = v_mi * v_mzi;
  cfg.pc = pc;
  cfg.detector_a.jitter_sigma_ps = 600.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  cfg.detector_b.jitter_sigma_ps = 50.0;
  const Timestamp duration = simkit::kPsPerSecond;
  const double pair_rate = 2e4;
  const Timestamp gate = 512;
  const int n_phase = 16;
  ColumnData mc;
  std::vector<std::uint64_t> inset;
  const Timestamp inset_bin = 32;
  for (int i = 0; i <= 12; ++i) {
    const double dtau = -30.0 + 5.0 * i;
    cfg.delay_imbalance_ps = dtau;
    std::vector<tagcorr::ScanPoint> scan;
    for (int k = 0; k < n_phase; ++k) {
      const auto id = static_cast<std::uint64_t>(i * 100 + k);
      cfg.phase_sum = kTwoPi * k / n_phase;
      const auto times = simkit::poisson_arrivals(pair_rate, duration, simkit::derive_seed(seed, kFransonPairs + id));
      const auto st = simkit::franson_sample(times, cfg, duration, simkit::derive_seed(seed, kFransonPaths + id));
      scan.push_back({cfg.phase_sum, static_cast<double>(tagcorr::gated_coincidences(st.a, st.b, gate, 0))});
      if (i == 6) {
        const auto h = tagcorr::cross_correlate(st.a, st.b, inset_bin, 4000);
        if (inset.empty()) inset.assign(h.size(), 0);
        for (std::size_t b = 0; b < h.size(); ++b) inset[b] += h.bins[b];
      }
    }
    const auto v = tagcorr::franson_visibility_scan(scan);
    mc.x.push_back(dtau);
    mc.y.push_back(v.visibility);
    mc.sigma.push_back(v.sigma);
  }
  auto mc_params = params;
  mc_params.push_back("seed=" + std::to_string(seed));
  mc_params.push_back("jitter_sigma_a_ps=" + num(cfg.detector_a.jitter_sigma_ps));
  mc_params.push_back("jitter_sigma_b_ps=" + num(cfg.detector_b.jitter_sigma_ps));
  mc_params.push_back("gate_ps=512");
  mc_params.push_back("delay_ps=1140");
  write_csv(out / "fig4_mc.csv", "dtau_ps,visibility,sigma", mc, mc_params);
  ColumnData ins;
  const auto half = static_cast<std::int64_t>(inset.size() / 2);
  for (std::size_t b = 0; b < inset.size(); ++b) {
    ins.x.push_back(static_cast<double>((static_cast<std::int64_t>(b) - half) * inset_bin));
    ins.y.push_back(static_cast<double>(inset[b]));
  }
  write_csv(out / "fig4_inset.csv", "delay_ps,coincidences", ins,
            {"dtau_ps=0", "phase_averaged=1", "bin_ps=32", "seed=" + std::to_string(seed)});
}

// The two fitted (a, b) presets. Names carry no wavelength on purpose:
// which data set each belongs to is ambiguous.
struct Preset {
  const char* name;
  double a;
  double b;
};
constexpr Preset kPresets[] = {{"preset_a6p78_b1p67e6", 6.78, 1.67e6}, {"preset_a19p1_b0", 19.1, 0.0}};
constexpr double kReferenceBinS = 1.5e-9;

std::vector<double> herald_rates() {
  std::vector<double> r;
  for (int i = 0; i <= 100; ++i) r.push_back(1e4 * i);
  return r;
}

void reproduce_fig5b(const std::filesystem::path& out) {
  const auto rates = herald_rates();
  for (const double mult : {1.0, 1.29}) {
    ColumnData d;
    d.x = rates;
    for (double r : rates) {
      d.y.push_back(models::g2_from_sbr(models::sbr_model(r, {kPresets[0].a, kPresets[0].b, kReferenceBinS * mult})));
      // b = 0 at R = 0: SBR diverges and g2 goes to its limit 0.
      const bool singular = kPresets[1].a * r + kPresets[1].b <= 0.0;
      d.sigma.push_back(singular ? 0.0
                                 : models::g2_from_sbr(models::sbr_model(r, {kPresets[1].a, kPresets[1].b, kReferenceBinS * mult})));
    }
    const std::string name = mult == 1.0 ? "fig5b.csv" : "fig5b_bin1p29.csv";
    write_csv(out / name,
              std::string("herald_rate_per_s,g2_") + kPresets[0].name + ",g2_" + kPresets[1].name, d,
              {"dt_s=" + num(kReferenceBinS * mult), "bin_multiplier=" + num(mult)});
  }
}

void reproduce_fig5c(const std::filesystem::path& out) {
  ColumnData d;
  d.x = herald_rates();
  for (double r : d.x) {
    d.y.push_back(models::sbr_model(r, {kPresets[0].a, kPresets[0].b, kReferenceBinS}));
    // b = 0 makes the R = 0 point singular; it is reported as 0 (no data).
    const double s19 = kPresets[1].a * r + kPresets[1].b > 0.0
                           ? models::sbr_model(r, {kPresets[1].a, kPresets[1].b, kReferenceBinS})
                           : 0.0;
    d.sigma.push_back(s19);
  }
  write_csv(out / "fig5c.csv",
            std::string("herald_rate_per_s,sbr_") + kPresets[0].name + ",sbr_" + kPresets[1].name, d,
            {"dt_s=1.5e-09", std::string(kPresets[0].name) + ": a=6.78 b_per_s=1.67e6",
             std::string(kPresets[1].name) + ": a=19.1 b_per_s=0 (sbr column 0 marks the R=0 divergence)"});
}

}  // namespace

int cmd_simulate(const std::string& scenario, const std::filesystem::path& out, const Overrides& o) {
  Scenario s = load_scenario(resolve_scenario(scenario));
  apply_overrides(s.analysis, o);
  const std::uint64_t seed = o.seed.value_or(s.seed);
  prepare_out(out);
  json summary{{"command", "simulate"},
               {"scenario", s.name},
               {"kind", kind_name(s.kind)},
               {"seed", seed},
               {"duration_ps", s.duration_ps}};
  const json body = s.kind == ScenarioKind::franson ? simulate_franson(s, seed, out)
                                                    : simulate_chain(s, seed, out);
  for (auto it = body.begin(); it != body.end(); ++it) summary[it.key()] = it.value();
  summary["analysis"] = analysis_json(s.analysis);
  write_json(out / kSummary, summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_analyze(const std::filesystem::path& in, const std::filesystem::path& out,
                const std::string& scenario, const Overrides& o) {
  if (in.empty()) throw std::invalid_argument("--in is required");
  const json manifest = read_json(in / kSummary);
  AnalysisSettings a = analysis_from_json(manifest.value("analysis", json::object()));
  if (!scenario.empty()) a = load_scenario(resolve_scenario(scenario)).analysis;
  apply_overrides(a, o);
  prepare_out(out);
  const std::string kind = manifest.at("kind").get<std::string>();
  json result{{"command", "analyze"}, {"scenario", manifest.value("scenario", "")}, {"kind", kind}};
  if (kind == "franson") {
    analyze_franson(manifest, a, in, out, result);
  } else if (kind == "g2" || kind == "pairs") {
    analyze_chain(kind, a, in, out, result);
  } else {
    throw std::invalid_argument("unknown kind '" + kind + "' in " + (in / kSummary).string());
  }
  if (manifest.contains("prediction")) result["prediction"] = manifest["prediction"];
  result["analysis"] = analysis_json(a);
  write_json(out / kSummary, result);
  std::cout << result.dump(2) << '\n';
  return 0;
}

int cmd_fit(const std::filesystem::path& points_csv, const std::filesystem::path& out,
            const Overrides& o) {
  if (points_csv.empty()) throw std::invalid_argument("--in is required");
  const ColumnData d = read_columns(points_csv);
  if (d.sigma.empty()) throw std::invalid_argument(points_csv.string() + ": need herald_rate_per_s,sbr,sigma columns");
  std::vector<models::SbrPoint> pts;
  for (std::size_t i = 0; i < d.x.size(); ++i) pts.push_back({d.x[i], d.y[i], d.sigma[i]});
  const double dt = static_cast<double>(o.bin_ps.value_or(1500)) * kPsToS;
  if (!(dt > 0.0)) throw std::invalid_argument("--bin-ps must be > 0");
  const auto fit = models::fit_sbr(pts, dt);
  prepare_out(out);
  const json result{{"command", "fit"},
                    {"a", fit.a},
                    {"b", fit.b},
                    {"b_at_boundary", fit.b_at_boundary},
                    {"cov_aa", fit.cov_aa},
                    {"cov_ab", fit.cov_ab},
                    {"cov_bb", fit.cov_bb},
                    {"chi2", fit.chi2},
                    {"dt_s", dt},
                    {"points", pts.size()}};
  write_json(out / kSummary, result);
  std::cout << result.dump(2) << '\n';
  return 0;
}

int cmd_reproduce(const std::string& figure, const std::filesystem::path& out, const Overrides& o) {
  static const char* known[] = {"fig2", "fig3", "fig4", "fig5b", "fig5c"};
  if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return figure == k; }) ==
      std::end(known)) {
    throw std::invalid_argument("unknown figure '" + figure + "' (expected fig2, fig3, fig4, fig5b, fig5c)");
  }
  prepare_out(out);
  if (figure == "fig2") reproduce_fig2(out);
  if (figure == "fig3") reproduce_fig3(out);
  if (figure == "fig4") reproduce_fig4(out, o.seed.value_or(1));
  if (figure == "fig5b") reproduce_fig5b(out);
  if (figure == "fig5c") reproduce_fig5c(out);
  std::cout << "wrote " << figure << " data to " << out.string() << '\n';
  return 0;
}

}  // namespace qfc::cli
