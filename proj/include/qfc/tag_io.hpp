#pragma once

// Time-tag files.
//
// PTAG (binary, little-endian): "PTAG", u16 version = 1, u64 duration_ps,
// then 9-byte records {u8 channel, u64 timestamp_ps} in time order.
// CSV (debug): "channel,timestamp_ps" rows; an optional "# duration_ps=N"
// comment carries the duration.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "qfc/simkit.hpp"

namespace qfc::simkit {

inline constexpr std::uint16_t kPtagVersion = 1;

struct TagFile {
  Timestamp duration_ps = 0;
  std::vector<TagStream> streams;  // one per channel present, ascending channel id

  // The stream for `ch`, or an empty stream of the file's duration.
  TagStream channel(std::uint8_t ch) const;
};

// Streams are interleaved in time order (ties by channel id). Duration is the
// largest of the streams' durations.
void write_ptag(std::ostream& out, std::span<const TagStream> streams);
void write_ptag(const std::filesystem::path& path, std::span<const TagStream> streams);
TagFile read_ptag(std::istream& in, std::string_view source = "<stream>");
TagFile read_ptag(const std::filesystem::path& path);

void write_tag_csv(std::ostream& out, std::span<const TagStream> streams);
void write_tag_csv(const std::filesystem::path& path, std::span<const TagStream> streams);
TagFile read_tag_csv(std::istream& in, std::string_view source = "<stream>");
TagFile read_tag_csv(const std::filesystem::path& path);

// Dispatches on the extension: ".csv" is the debug format, anything else PTAG.
TagFile read_tags(const std::filesystem::path& path);

}  // namespace qfc::simkit
