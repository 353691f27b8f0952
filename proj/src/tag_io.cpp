#include "qfc/tag_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qfc::simkit {
namespace {

constexpr std::array<char, 4> kMagic{'P', 'T', 'A', 'G'};
constexpr std::size_t kRecordBytes = 9;

struct Record {
  Timestamp t;
  std::uint8_t channel;
};

std::vector<Record> interleave(std::span<const TagStream> streams, Timestamp& duration) {
  duration = 0;
  std::size_t total = 0;
  for (const auto& s : streams) {
    duration = std::max(duration, s.duration_ps);
    total += s.size();
  }
  std::vector<Record> records;
  records.reserve(total);
  for (const auto& s : streams) {
    for (Timestamp t : s.tags) records.push_back({t, s.channel});
  }
  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    return a.t != b.t ? a.t < b.t : a.channel < b.channel;
  });
  return records;
}

template <typename T>
void put_le(char* dst, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
}

template <typename T>
T get_le(const char* src) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[i])) << (8 * i);
  return static_cast<T>(v);
}

TagFile group(Timestamp duration, const std::map<std::uint8_t, std::vector<Timestamp>>& by_channel,
              std::string_view source) {
  TagFile file;
  file.duration_ps = duration;
  for (const auto& [ch, tags] : by_channel) {
    TagStream s{ch, tags, duration};
    std::sort(s.tags.begin(), s.tags.end());
    if (!s.tags.empty() && (s.tags.front() < 0 || s.tags.back() > duration)) {
      throw std::runtime_error(std::string(source) + ": timestamp outside [0, duration]");
    }
    file.streams.push_back(std::move(s));
  }
  return file;
}

}  // namespace

TagStream TagFile::channel(std::uint8_t ch) const {
  for (const auto& s : streams) {
    if (s.channel == ch) return s;
  }
  return TagStream{ch, {}, duration_ps};
}

void write_ptag(std::ostream& out, std::span<const TagStream> streams) {
  Timestamp duration = 0;
  const auto records = interleave(streams, duration);
  char header[4 + 2 + 8];
  std::memcpy(header, kMagic.data(), 4);
  put_le<std::uint16_t>(header + 4, kPtagVersion);
  put_le<std::uint64_t>(header + 6, static_cast<std::uint64_t>(duration));
  out.write(header, sizeof header);

  std::vector<char> buf;
  buf.reserve(std::min<std::size_t>(records.size(), 1 << 16) * kRecordBytes);
  for (const auto& r : records) {
    char rec[kRecordBytes];
    rec[0] = static_cast<char>(r.channel);
    put_le<std::uint64_t>(rec + 1, static_cast<std::uint64_t>(r.t));
    buf.insert(buf.end(), rec, rec + kRecordBytes);
    if (buf.size() >= (1 << 16) * kRecordBytes) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing PTAG data");
}

void write_ptag(const std::filesystem::path& path, std::span<const TagStream> streams) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  write_ptag(out, streams);
}

TagFile read_ptag(std::istream& in, std::string_view source) {
  char header[4 + 2 + 8];
  if (!in.read(header, sizeof header)) {
    throw std::runtime_error(std::string(source) + ": truncated PTAG header");
  }
  if (std::memcmp(header, kMagic.data(), 4) != 0) {
    throw std::runtime_error(std::string(source) + ": not a PTAG file (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(header + 4);
  if (version != kPtagVersion) {
    throw std::runtime_error(std::string(source) + ": unsupported PTAG version " + std::to_string(version));
  }
  const auto duration = get_le<std::uint64_t>(header + 6);
  if (duration > static_cast<std::uint64_t>(INT64_MAX)) {
    throw std::runtime_error(std::string(source) + ": duration out of range");
  }

  std::map<std::uint8_t, std::vector<Timestamp>> by_channel;
  char rec[kRecordBytes];
  std::size_t index = 0;
  while (in.read(rec, kRecordBytes)) {
    const auto t = get_le<std::uint64_t>(rec + 1);
    if (t > duration) {
      throw std::runtime_error(std::string(source) + ": record " + std::to_string(index) +
                               " lies beyond the stated duration");
    }
    by_channel[static_cast<std::uint8_t>(rec[0])].push_back(static_cast<Timestamp>(t));
    ++index;
  }
  if (in.gcount() != 0) {
    throw std::runtime_error(std::string(source) + ": truncated record after " + std::to_string(index) + " records");
  }
  return group(static_cast<Timestamp>(duration), by_channel, source);
}

TagFile read_ptag(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_ptag(in, path.string());
}

void write_tag_csv(std::ostream& out, std::span<const TagStream> streams) {
  Timestamp duration = 0;
  const auto records = interleave(streams, duration);
  out << "# duration_ps=" << duration << '\n' << "channel,timestamp_ps\n";
  for (const auto& r : records) out << static_cast<unsigned>(r.channel) << ',' << r.t << '\n';
  if (!out) throw std::runtime_error("failed writing tag CSV");
}

void write_tag_csv(const std::filesystem::path& path, std::span<const TagStream> streams) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  write_tag_csv(out, streams);
}

TagFile read_tag_csv(std::istream& in, std::string_view source) {
  std::map<std::uint8_t, std::vector<Timestamp>> by_channel;
  Timestamp duration = -1;
  Timestamp latest = 0;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const char* what) {
    throw std::runtime_error(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "# duration_ps=";
      if (line.rfind(key, 0) == 0) {
        const char* b = line.data() + key.size();
        const auto [p, ec] = std::from_chars(b, line.data() + line.size(), duration);
        if (ec != std::errc() || duration < 0) fail("bad duration_ps");
      }
      continue;
    }
    if (line == "channel,timestamp_ps") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail("expected channel,timestamp_ps");
    unsigned ch = 0;
    Timestamp t = 0;
    const char* end = line.data() + line.size();
    const auto r1 = std::from_chars(line.data(), line.data() + comma, ch);
    const auto r2 = std::from_chars(line.data() + comma + 1, end, t);
    if (r1.ec != std::errc() || r1.ptr != line.data() + comma || ch > 255) fail("bad channel");
    if (r2.ec != std::errc() || r2.ptr != end || t < 0) fail("bad timestamp");
    by_channel[static_cast<std::uint8_t>(ch)].push_back(t);
    latest = std::max(latest, t);
  }
  return group(duration >= 0 ? duration : latest, by_channel, source);
}

TagFile read_tag_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_tag_csv(in, path.string());
}

TagFile read_tags(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_tag_csv(path) : read_ptag(path);
}

}  // namespace qfc::simkit
