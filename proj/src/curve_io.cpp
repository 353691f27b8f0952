#include "qfc/curve_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace qfc {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void put_double(std::ostream& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

}  // namespace

ColumnData read_columns(std::istream& in, std::string_view source) {
  ColumnData data;
  std::string line;
  std::size_t line_no = 0;
  bool seen_row = false;
  bool three_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;

    double values[3];
    std::size_t n = 0;
    bool ok = true;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      const std::string_view field =
          row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (n == 3 || !parse_double(field, values[n])) {
        ok = false;
        break;
      }
      ++n;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!ok || n < 2) {
      // A single bare column-name header is tolerated before the first row.
      if (!seen_row && data.x.empty() && row.find_first_of("0123456789") == std::string_view::npos) {
        continue;
      }
      throw std::runtime_error(std::string(source) + ":" + std::to_string(line_no) +
                               ": expected two or three comma-separated numbers");
    }
    if (!seen_row) {
      three_columns = (n == 3);
      seen_row = true;
    } else if ((n == 3) != three_columns) {
      throw std::runtime_error(std::string(source) + ":" + std::to_string(line_no) +
                               ": inconsistent column count");
    }
    data.x.push_back(values[0]);
    data.y.push_back(values[1]);
    if (n == 3) data.sigma.push_back(values[2]);
  }
  if (data.x.empty()) throw std::runtime_error(std::string(source) + ": no data rows");
  return data;
}

ColumnData read_columns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_columns(in, path.string());
}

void write_columns(std::ostream& out, std::string_view header, const ColumnData& data,
                   const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "# " << header << '\n';
  const bool with_sigma = !data.sigma.empty();
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    put_double(out, data.x[i]);
    out << ',';
    put_double(out, data.y[i]);
    if (with_sigma) {
      out << ',';
      put_double(out, data.sigma[i]);
    }
    out << '\n';
  }
}

}  // namespace qfc
