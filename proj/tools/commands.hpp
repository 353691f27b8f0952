#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace qfc::cli {

// Command-line overrides of the scenario's analysis settings.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> bin_ps;
  std::optional<std::int64_t> gate_ps;
  std::optional<std::int64_t> window_ps;
};

// Each returns the process exit code. Validation problems throw.
int cmd_simulate(const std::string& scenario, const std::filesystem::path& out, const Overrides& o);
int cmd_analyze(const std::filesystem::path& in, const std::filesystem::path& out,
                const std::string& scenario, const Overrides& o);
int cmd_fit(const std::filesystem::path& points_csv, const std::filesystem::path& out,
            const Overrides& o);
int cmd_reproduce(const std::string& figure, const std::filesystem::path& out, const Overrides& o);

}  // namespace qfc::cli
