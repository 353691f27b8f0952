#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "qfc/curve_io.hpp"
#include "qfc/models.hpp"
#include "qfc/tag_io.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qfc::cli;

namespace {

const fs::path kScratch = QFC_TEST_SCRATCH;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run qfcsim(const std::string& args) {
  fs::create_directories(kScratch);
  const auto out = kScratch / "stdout.txt";
  const auto err = kScratch / "stderr.txt";
  const std::string cmd = std::string("\"") + QFCSIM_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path scratch(const std::string& name) {
  const auto p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

const char* kSmallG2 = R"(name: small
kind: g2
seed: 5
duration_s: 0.002
source:
  pair_rate_per_s: 1.0e6
  eta1: 0.5
  eta2: 0.5
qfc:
  efficiency: 0.5
  background_rate_per_s: 1.0e6
detectors:
  hbt1: {jitter_sigma_ps: 40.0, dead_time_ps: 100}
)";

std::string parse_error(const std::string& text) {
  try {
    parse_scenario(text, "t.yaml");
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("scenario parsing") {
  const auto s = parse_scenario(kSmallG2, "t.yaml");
  CHECK(s.name == "small");
  CHECK(s.kind == ScenarioKind::g2);
  CHECK(s.duration_ps == 2'000'000'000);
  CHECK(s.source.eta2 == 0.5);
  REQUIRE(s.qfc.has_value());
  CHECK(s.qfc->background_rate_per_s == 1e6);
  CHECK(s.hbt1_detector.jitter_sigma_ps == 40.0);
  CHECK(s.hbt1_detector.dead_time_ps == 100);
  CHECK(s.analysis.bin_ps == 1500);

  for (const char* name : {"g2-chain", "franson", "sbr-1", "sbr-10", "sbr-100"}) {
    const auto path = resolve_scenario(name);
    CHECK(fs::exists(path));
    CHECK(load_scenario(path).name == name);
  }
  CHECK_THROWS_AS(resolve_scenario("no-such-scenario"), ScenarioError);
}

TEST_CASE("scenario errors name the file and line") {
  const std::string base = kSmallG2;
  CHECK(parse_error(base + "bogus_key: 1\n").find("t.yaml:14:") != std::string::npos);
  CHECK(parse_error(base + "bogus_key: 1\n").find("bogus_key") != std::string::npos);
  std::string eta = base;
  eta.replace(eta.find("eta2: 0.5"), 9, "eta2: 1.5");
  CHECK(parse_error(eta).find("t.yaml:8:") != std::string::npos);
  std::string unit = base;
  unit.replace(unit.find("jitter_sigma_ps"), 15, "jitter_sigma_ns");
  CHECK(parse_error(unit).find("t.yaml:13:") != std::string::npos);
  CHECK(parse_error(base + "duration_ps: 5\n").find("duration") != std::string::npos);
  CHECK_FALSE(parse_error("name: x\nkind: g2\nduration_s: 1\n").empty());  // no source
  CHECK_FALSE(parse_error(base + "franson: {envelope_points: 800}\n").empty());
  CHECK_FALSE(parse_error(base + "analysis: {plateau_min: 20, plateau_max: 10}\n").empty());
  CHECK_FALSE(parse_error(base + "spectrum: {file: missing.csv}\n").empty());
  CHECK(parse_error(base + "kind: pairs\n").find("duplicate key 'kind'") != std::string::npos);
  std::string kind = base;
  kind.replace(kind.find("kind: g2"), 8, "kind: g3");
  CHECK(parse_error(kind).find("t.yaml:2:") != std::string::npos);
  CHECK(parse_error("source: [1, 2\n").find("t.yaml") != std::string::npos);
  std::string huge = base;
  huge.replace(huge.find("duration_s: 0.002"), 17, "duration_s: 1.0e5");
  CHECK_FALSE(parse_error(huge).empty());
}

TEST_CASE("simulate is deterministic and writes the g2 chain files") {
  const auto dir = scratch("det");
  const auto yaml = write_file(dir / "small.yaml", kSmallG2);
  const auto a = qfcsim("simulate --scenario \"" + yaml.string() + "\" --out \"" + (dir / "a").string() + "\"");
  const auto b = qfcsim("simulate --scenario \"" + yaml.string() + "\" --out \"" + (dir / "b").string() + "\"");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"herald.ptag", "hbt1.ptag", "hbt2.ptag", "summary.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK_FALSE(fs::exists(dir / "a" / "signal.ptag"));
  const auto summary = read_json(dir / "a" / "summary.json");
  CHECK(summary["kind"] == "g2");
  CHECK(summary["seed"] == 5);
  CHECK(json::parse(a.out) == summary);
  const auto herald = qfc::simkit::read_ptag(dir / "a" / "herald.ptag");
  CHECK(herald.duration_ps == 2'000'000'000);
  CHECK(summary["counts"]["herald"] == herald.channel(0).size());

  const auto c = qfcsim("simulate --scenario \"" + yaml.string() + "\" --seed 6 --out \"" + (dir / "c").string() + "\"");
  REQUIRE(c.code == 0);
  CHECK(slurp(dir / "a" / "herald.ptag") != slurp(dir / "c" / "herald.ptag"));
}

TEST_CASE("zero duration gives valid empty files and insufficient data") {
  const auto dir = scratch("zero");
  std::string text = kSmallG2;
  text.replace(text.find("duration_s: 0.002"), 17, "duration_ps: 0");
  const auto yaml = write_file(dir / "zero.yaml", text);
  REQUIRE(qfcsim("simulate --scenario \"" + yaml.string() + "\" --out \"" + (dir / "run").string() + "\"").code == 0);
  for (const char* f : {"herald.ptag", "hbt1.ptag", "hbt2.ptag"}) {
    const auto file = qfc::simkit::read_ptag(dir / "run" / f);
    CHECK(file.duration_ps == 0);
    CHECK(file.streams.empty());
  }
  const auto r = qfcsim("analyze --in \"" + (dir / "run").string() + "\" --out \"" + (dir / "ana").string() + "\"");
  CHECK(r.code == 0);
  const auto s = read_json(dir / "ana" / "summary.json");
  CHECK(s["status"] == "insufficient data");
  CHECK(s["g2_zero"].is_null());
  CHECK(s["sbr"].is_null());
}

TEST_CASE("analyze on the bundled g2 chain agrees with the SBR model") {
  const auto dir = scratch("g2chain");
  REQUIRE(qfcsim("simulate --scenario g2-chain --out \"" + (dir / "run").string() + "\"").code == 0);
  const auto r = qfcsim("analyze --in \"" + (dir / "run").string() + "\" --out \"" + (dir / "ana").string() + "\"");
  REQUIRE(r.code == 0);
  const auto s = read_json(dir / "ana" / "summary.json");
  CHECK(s["status"] == "ok");
  const double sbr = s["sbr"], sbr_sigma = s["sbr_sigma"];
  const double g2 = s["g2_zero"], sigma = s["sigma"];
  const double predicted_sbr = s["prediction"]["sbr"];
  CHECK(std::abs(sbr - predicted_sbr) <= 3.0 * sbr_sigma);
  CHECK(std::abs(g2 - qfc::models::g2_from_sbr(predicted_sbr)) <= 3.0 * sigma);
  CHECK(fs::exists(dir / "ana" / "correlation.csv"));
  CHECK(fs::exists(dir / "ana" / "g2_histogram.csv"));

  SUBCASE("flags override the analysis settings") {
    const auto w = qfcsim("analyze --in \"" + (dir / "run").string() + "\" --out \"" + (dir / "w").string() +
                          "\" --bin-ps 3000 --window-ps 3000");
    REQUIRE(w.code == 0);
    const auto ws = read_json(dir / "w" / "summary.json");
    CHECK(ws["analysis"]["bin_ps"] == 3000);
    CHECK(ws["analysis"]["window_ps"] == 3000);
    CHECK(ws["sbr"].get<double>() < sbr);
  }
}

TEST_CASE("analyze on Franson output recovers the configured visibility") {
  const auto dir = scratch("franson");
  REQUIRE(qfcsim("simulate --scenario franson --out \"" + (dir / "run").string() + "\"").code == 0);
  CHECK(fs::exists(dir / "run" / "franson_00.ptag"));
  CHECK(fs::exists(dir / "run" / "franson_15.ptag"));
  const auto r = qfcsim("analyze --in \"" + (dir / "run").string() + "\" --out \"" + (dir / "ana").string() + "\"");
  REQUIRE(r.code == 0);
  const auto s = read_json(dir / "ana" / "summary.json");
  const double v = s["visibility"], sigma = s["sigma"];
  CHECK(std::abs(v - 0.836) <= 3.0 * sigma);
  CHECK(s["prediction"]["visibility"].get<double>() == doctest::Approx(0.836));
  CHECK(s["bell"]["violates_bell"] == true);
  const auto scan = qfc::read_columns(dir / "ana" / "franson_scan.csv");
  CHECK(scan.x.size() == 16);
}

TEST_CASE("fit command") {
  const auto dir = scratch("fit");
  std::ostringstream csv;
  csv.precision(17);
  csv << "herald_rate_per_s,sbr,sigma\n";
  for (double r : {1e5, 2e5, 4e5, 8e5}) {
    const double s = qfc::models::sbr_model(r, {6.78, 1.67e6, 1.5e-9});
    csv << r << ',' << s << ',' << 0.01 * s << '\n';
  }
  const auto pts = write_file(dir / "points.csv", csv.str());
  REQUIRE(qfcsim("fit --in \"" + pts.string() + "\" --out \"" + (dir / "out").string() + "\"").code == 0);
  const auto s = read_json(dir / "out" / "summary.json");
  CHECK(s["a"].get<double>() == doctest::Approx(6.78).epsilon(1e-6));
  CHECK(s["b"].get<double>() == doctest::Approx(1.67e6).epsilon(1e-6));
  CHECK(s["b_at_boundary"] == false);

  write_file(dir / "two.csv", "1,2,0.1\n2,1,0.1\n");
  CHECK(qfcsim("fit --in \"" + (dir / "two.csv").string() + "\" --out \"" + (dir / "o2").string() + "\"").code != 0);
}

TEST_CASE("reproduce emits every figure") {
  const auto dir = scratch("figs");
  for (const char* fig : {"fig2", "fig3", "fig4", "fig5b", "fig5c"}) {
    CAPTURE(fig);
    CHECK(qfcsim(std::string("reproduce ") + fig + " --out \"" + dir.string() + "\"").code == 0);
  }
  const auto fig2 = qfc::read_columns(dir / "fig2.csv");
  const auto peak2 = std::max_element(fig2.y.begin(), fig2.y.end());
  CHECK(*peak2 == doctest::Approx(1.0));
  CHECK(slurp(dir / "fig3.csv").find("coherence_time_ps=") != std::string::npos);

  const auto fig4 = qfc::read_columns(dir / "fig4.csv");
  CHECK(std::abs(*std::max_element(fig4.y.begin(), fig4.y.end()) - 0.836) <= 0.001);
  const auto mc = qfc::read_columns(dir / "fig4_mc.csv");
  CHECK(mc.x.size() == 13);
  CHECK(mc.sigma.size() == 13);
  CHECK(fs::exists(dir / "fig4_inset.csv"));

  const auto fig5c = qfc::read_columns(dir / "fig5c.csv");
  CHECK(std::abs(fig5c.y.front() - 399.2) <= 0.5);
  const auto fig5b = qfc::read_columns(dir / "fig5b.csv");
  CHECK(std::abs(fig5b.y.front() - 4.99e-3) <= 1e-4);
  CHECK(fs::exists(dir / "fig5b_bin1p29.csv"));

  const auto again = scratch("figs2");
  REQUIRE(qfcsim("reproduce fig4 --out \"" + again.string() + "\"").code == 0);
  CHECK(slurp(dir / "fig4_mc.csv") == slurp(again / "fig4_mc.csv"));
}

TEST_CASE("failures exit nonzero") {
  const auto dir = scratch("fail");
  CHECK(qfcsim("reproduce fig9 --out \"" + dir.string() + "\"").code == 2);
  CHECK(qfcsim("simulate --scenario no-such --out \"" + dir.string() + "\"").code == 2);
  const auto bad = write_file(dir / "bad.yaml", std::string(kSmallG2) + "typo_rate: 3\n");
  const auto r = qfcsim("simulate --scenario \"" + bad.string() + "\" --out \"" + (dir / "o").string() + "\"");
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.yaml:14:") != std::string::npos);
  CHECK(qfcsim("frobnicate").code == 2);
  CHECK(qfcsim("simulate --out x").code == 2);
  CHECK(qfcsim("analyze --in \"" + (dir / "nothing").string() + "\" --out \"" + (dir / "o").string() + "\"").code != 0);
  CHECK(qfcsim("reproduce fig2 --out \"" + dir.string() + "\"").code == 0);
}
