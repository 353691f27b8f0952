#pragma once

// Two-column UTF-8 text shared by spectra, pair-coherence and visibility
// curves: optional '#' comment/header lines, then "x,y" (or "x,y,sigma") rows.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qfc {

struct ColumnData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;  // empty unless every row carried a third column
};

// Throws std::runtime_error naming `source` and the offending line number.
ColumnData read_columns(std::istream& in, std::string_view source = "<stream>");
ColumnData read_columns(const std::filesystem::path& path);

// `header` is written after "# " on the first line, e.g. "nu_GHz,intensity".
// `comments` are extra "# key=value" style lines placed before the header.
void write_columns(std::ostream& out, std::string_view header, const ColumnData& data,
                   const std::vector<std::string>& comments = {});

}  // namespace qfc
