#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "qfc/tag_io.hpp"

using namespace qfc::simkit;

namespace {

std::vector<TagStream> sample_streams() {
  return {TagStream{0, {0, 5, 5, 300}, 1000}, TagStream{3, {5, 7, 0x0102030405LL}, 0x0102030406LL}};
}

std::string error_of(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_ptag(in, "t.ptag");
  } catch (const std::runtime_error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("PTAG byte layout") {
  const std::vector<TagStream> s{TagStream{2, {0x0102030405060708LL}, 0x7fffffffffffffffLL}};
  std::ostringstream out;
  write_ptag(out, s);
  const std::string b = out.str();
  REQUIRE(b.size() == 14 + 9);
  CHECK(b.substr(0, 4) == "PTAG");
  CHECK(b[4] == 1);
  CHECK(b[5] == 0);
  CHECK(static_cast<unsigned char>(b[6]) == 0xff);
  CHECK(static_cast<unsigned char>(b[13]) == 0x7f);
  CHECK(b[14] == 2);
  for (int i = 0; i < 8; ++i) CHECK(b[15 + i] == 8 - i);  // little-endian
}

TEST_CASE("PTAG round trip interleaves by time then channel") {
  const auto s = sample_streams();
  std::stringstream io;
  write_ptag(io, s);
  const std::string b = io.str();
  CHECK(b.size() == 14 + 9 * 7);
  // t = 5 occurs on both channels; channel 0 first.
  CHECK(b[14 + 9 * 1] == 0);
  CHECK(b[14 + 9 * 3] == 3);
  const auto f = read_ptag(io);
  CHECK(f.duration_ps == 0x0102030406LL);
  REQUIRE(f.streams.size() == 2);
  CHECK(f.channel(0).tags == s[0].tags);
  CHECK(f.channel(3).tags == s[1].tags);
  CHECK(f.channel(3).duration_ps == f.duration_ps);
  CHECK(f.channel(9).empty());
  CHECK(f.channel(9).duration_ps == f.duration_ps);
}

TEST_CASE("empty PTAG keeps its duration") {
  std::stringstream io;
  const std::vector<TagStream> s{TagStream{0, {}, 12345}};
  write_ptag(io, s);
  const auto f = read_ptag(io);
  CHECK(f.duration_ps == 12345);
  CHECK(f.streams.empty());
}

TEST_CASE("malformed PTAG input") {
  std::ostringstream out;
  write_ptag(out, sample_streams());
  const std::string good = out.str();
  CHECK(error_of("PTA").find("truncated PTAG header") != std::string::npos);
  std::string bad = good;
  bad[0] = 'X';
  CHECK(error_of(bad).find("bad magic") != std::string::npos);
  bad = good;
  bad[4] = 2;
  CHECK(error_of(bad).find("version 2") != std::string::npos);
  CHECK(error_of(good.substr(0, good.size() - 3)).find("truncated record after 6") != std::string::npos);
  bad = good;
  bad[6] = 0;  // shrink duration below the last tag
  bad[7] = 0;
  bad[8] = 0;
  bad[9] = 0;
  bad[10] = 0;
  CHECK(error_of(bad).find("beyond the stated duration") != std::string::npos);
  CHECK(error_of(good).empty());
  CHECK(error_of(bad).rfind("t.ptag:", 0) == 0);
}

TEST_CASE("CSV round trip") {
  const auto s = sample_streams();
  std::stringstream io;
  write_tag_csv(io, s);
  CHECK(io.str().rfind("# duration_ps=4328719366\nchannel,timestamp_ps\n0,0\n", 0) == 0);
  const auto f = read_tag_csv(io);
  CHECK(f.duration_ps == 0x0102030406LL);
  CHECK(f.channel(0).tags == s[0].tags);
  CHECK(f.channel(3).tags == s[1].tags);
}

TEST_CASE("CSV without duration uses the last tag") {
  std::istringstream in("1,40\r\n\n1,10\n2,25\n");
  const auto f = read_tag_csv(in);
  CHECK(f.duration_ps == 40);
  CHECK(f.channel(1).tags == std::vector<Timestamp>{10, 40});
}

TEST_CASE("CSV errors carry line numbers") {
  const auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_tag_csv(in, "tags.csv");
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("channel,timestamp_ps\n0,1\n0;2\n").find("tags.csv:3") != std::string::npos);
  CHECK(message("0,1\n300,2\n").find("tags.csv:2: bad channel") != std::string::npos);
  CHECK(message("0,-5\n").find("bad timestamp") != std::string::npos);
  CHECK(message("0,5x\n").find("bad timestamp") != std::string::npos);
  CHECK(message("# duration_ps=10\n0,11\n").find("outside") != std::string::npos);
}

TEST_CASE("files dispatch on the extension") {
  const auto dir = std::filesystem::temp_directory_path() / "qfc_tag_io_test";
  std::filesystem::create_directories(dir);
  const auto s = sample_streams();
  write_ptag(dir / "a.ptag", s);
  write_tag_csv(dir / "a.csv", s);
  const auto p = read_tags(dir / "a.ptag");
  const auto c = read_tags(dir / "a.csv");
  CHECK(p.channel(3).tags == c.channel(3).tags);
  CHECK(p.duration_ps == c.duration_ps);
  CHECK_THROWS_AS(read_tags(dir / "missing.ptag"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
