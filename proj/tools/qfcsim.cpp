// qfcsim: scenario-driven simulation, analysis, fitting and figure data.
//
//   qfcsim simulate  --scenario g2-chain --out run/ [--seed N]
//   qfcsim analyze   --in run/ --out ana/ [--scenario F] [--bin-ps] [--gate-ps] [--window-ps]
//   qfcsim fit       --in points.csv --out fit/ [--bin-ps]
//   qfcsim reproduce fig4 --out figs/ [--seed N]
//
// Exit codes: 0 success, 2 validation or usage error, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qfc/errors.hpp"
#include "scenario.hpp"

namespace {

constexpr int kValidationExit = 2;
constexpr int kFailureExit = 1;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfcsim: photon-pair time-tag simulation and coherence analysis"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out;
  std::string in;
  std::string figure;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> bin_ps;
  std::optional<std::int64_t> gate_ps;
  std::optional<std::int64_t> window_ps;

  auto add_analysis_flags = [&](CLI::App* c) {
    c->add_option("--bin-ps", bin_ps, "coincidence bin width (ps)");
    c->add_option("--gate-ps", gate_ps, "Franson gate width (ps)");
    c->add_option("--window-ps", window_ps, "herald window for g2 (ps)");
  };

  auto* sim = app.add_subcommand("simulate", "generate PTAG files from a scenario");
  sim->add_option("--scenario", scenario, "scenario file or bundled name")->required();
  sim->add_option("--out", out, "output directory")->required();
  sim->add_option("--seed", seed, "override the scenario seed");
  add_analysis_flags(sim);

  auto* ana = app.add_subcommand("analyze", "g2 / SBR / visibility from a simulate output directory");
  ana->add_option("--in", in, "directory written by simulate")->required();
  ana->add_option("--out", out, "output directory")->required();
  ana->add_option("--scenario", scenario, "take analysis settings from this scenario");
  ana->add_option("--seed", seed, "unused; accepted for symmetry");
  add_analysis_flags(ana);

  auto* fit = app.add_subcommand("fit", "fit a, b of the SBR model to herald_rate_per_s,sbr,sigma points");
  fit->add_option("--in", in, "CSV of points")->required();
  fit->add_option("--out", out, "output directory")->required();
  fit->add_option("--bin-ps", bin_ps, "time bin of the SBR points (ps), default 1500");

  auto* rep = app.add_subcommand("reproduce", "emit figure curve data as CSV");
  rep->add_option("figure", figure, "fig2, fig3, fig4, fig5b or fig5c")->required();
  rep->add_option("--out", out, "output directory")->required();
  rep->add_option("--seed", seed, "Monte Carlo seed (fig4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  const qfc::cli::Overrides o{seed, bin_ps, gate_ps, window_ps};
  try {
    if (*sim) return qfc::cli::cmd_simulate(scenario, out, o);
    if (*ana) return qfc::cli::cmd_analyze(in, out, scenario, o);
    if (*fit) return qfc::cli::cmd_fit(in, out, o);
    if (*rep) return qfc::cli::cmd_reproduce(figure, out, o);
  } catch (const qfc::cli::ScenarioError& e) {
    std::cerr << "qfcsim: " << e.what() << '\n';
    return kValidationExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qfcsim: " << e.what() << '\n';
    return kValidationExit;
  } catch (const std::out_of_range& e) {
    std::cerr << "qfcsim: " << e.what() << '\n';
    return kValidationExit;
  } catch (const qfc::SizingError& e) {
    std::cerr << "qfcsim: " << e.what() << '\n';
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "qfcsim: " << e.what() << '\n';
    return kFailureExit;
  }
  return kFailureExit;
}
