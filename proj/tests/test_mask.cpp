#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "croprow/io.hpp"
#include "croprow/mask.hpp"
#include "oracles.hpp"

using namespace croprow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / ("croprow_mask_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

Mask load_bytes(const std::string& s) {
  const auto b = bytes_of(s);
  return parse_pgm(b);
}

MaskLoadError::Kind load_error(const std::string& s) {
  try {
    load_bytes(s);
  } catch (const MaskLoadError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a load error";
  return MaskLoadError::Kind::Io;
}

std::string p5_header(int w, int h) { return "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n"; }

}  // namespace

TEST(Mask, RejectsTinyAndNonBinary) {
  EXPECT_THROW(Mask(15, 16), std::invalid_argument);
  EXPECT_THROW(Mask(16, 8), std::invalid_argument);
  EXPECT_THROW(Mask(16, 16, std::vector<std::uint8_t>(256, 2)), std::invalid_argument);
  EXPECT_THROW(Mask(16, 16, std::vector<std::uint8_t>(255, 0)), std::invalid_argument);
}

TEST(Mask, AllZeroPgmLoadsEmpty) {
  const auto m = load_bytes(p5_header(512, 512) + std::string(512 * 512, '\0'));
  EXPECT_EQ(m.width(), 512);
  EXPECT_EQ(m.height(), 512);
  EXPECT_EQ(m.count(), 0u);
}

TEST(Mask, SingleColumnIdentity) {
  std::string payload(512 * 512, '\0');
  for (int y = 0; y < 512; ++y) payload[static_cast<std::size_t>(y) * 512 + 256] = static_cast<char>(255);
  const auto m = load_bytes(p5_header(512, 512) + payload);
  EXPECT_EQ(column_sum(m, 256, 0, 512), 512);
  EXPECT_EQ(m.count(), 512u);
}

TEST(Mask, ThresholdAt128) {
  std::string payload(16 * 16, '\0');
  payload[0] = static_cast<char>(127);
  payload[1] = static_cast<char>(128);
  const auto m = load_bytes(p5_header(16, 16) + payload);
  EXPECT_EQ(m.at(0, 0), 0);
  EXPECT_EQ(m.at(1, 0), 1);
}

TEST(Mask, PlainPgmWithComments) {
  std::string text = "P2\n# comment\n16 16\n# another\n15\n";
  for (int i = 0; i < 256; ++i) text += (i == 17 ? "8 " : i == 18 ? "7 " : "0 ");
  const auto m = load_bytes(text);
  EXPECT_EQ(m.at(1, 1), 1);  // 8/15 >= 128/255
  EXPECT_EQ(m.at(2, 1), 0);
  EXPECT_EQ(m.count(), 1u);
}

TEST(Mask, SixteenBitSamples) {
  std::string payload(16 * 16 * 2, '\0');
  payload[0] = static_cast<char>(0x80);  // 32768 of 65535, just under 128/255
  payload[2] = static_cast<char>(0x81);  // 33024
  const auto m = load_bytes("P5 16 16 65535\n" + payload);
  EXPECT_EQ(m.at(0, 0), 0);
  EXPECT_EQ(m.at(1, 0), 1);
  EXPECT_EQ(m.count(), 1u);
}

TEST(Mask, DistinctLoadErrors) {
  EXPECT_EQ(load_error("P6\n16 16\n255\n" + std::string(768, '\0')), MaskLoadError::Kind::UnsupportedFormat);
  EXPECT_EQ(load_error("P5\n16 x\n255\n"), MaskLoadError::Kind::MalformedHeader);
  EXPECT_EQ(load_error(p5_header(16, 16) + std::string(100, '\0')), MaskLoadError::Kind::TruncatedPayload);
  EXPECT_EQ(load_error(p5_header(8, 8) + std::string(64, '\0')), MaskLoadError::Kind::InvalidDimensions);
  EXPECT_THROW(load_mask("/nonexistent/dir/mask.pgm"), MaskLoadError);
}

TEST(Mask, AllOnesEncoding) {
  const Mask m(16, 16, std::vector<std::uint8_t>(256, 1));
  const auto bytes = encode_pgm(m);
  const std::string header = p5_header(16, 16);
  ASSERT_EQ(bytes.size(), header.size() + 256);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())), header);
  for (std::size_t i = header.size(); i < bytes.size(); ++i) EXPECT_EQ(bytes[i], 255);
}

TEST(Mask, RoundTripRandom) {
  std::mt19937_64 rng(7);
  const auto dir = temp_dir();
  for (int i = 0; i < 20; ++i) {
    std::uniform_int_distribution<int> dim(16, 90);
    const auto m = oracle::random_mask(rng, dim(rng), dim(rng));
    const auto path = dir / ("m" + std::to_string(i) + ".pgm");
    save_mask(m, path);
    EXPECT_EQ(load_mask(path), m);
  }
  fs::remove_all(dir);
}

TEST(Mask, SaveToUnwritablePathFails) {
  const Mask m(16, 16);
  EXPECT_THROW(save_mask(m, "/nonexistent/dir/out.pgm"), MaskWriteError);
}

TEST(ColumnSum, Examples) {
  const Mask ones(128, 128, std::vector<std::uint8_t>(128 * 128, 1));
  EXPECT_EQ(column_sum(ones, 0, 0, 102), 102);
  const Mask zeros(128, 128);
  EXPECT_EQ(column_sum(zeros, 17, 3, 90), 0);
  Mask even(16, 16);
  for (int y = 0; y < 16; y += 2) even.set(5, y, true);
  EXPECT_EQ(column_sum(even, 5, 0, 10), 5);
}

TEST(ColumnSum, BoundsChecked) {
  const Mask m(16, 16);
  EXPECT_THROW(column_sum(m, 16, 0, 1), std::out_of_range);
  EXPECT_THROW(column_sum(m, 0, 5, 4), std::out_of_range);
  EXPECT_THROW(column_sum(m, 0, 0, 17), std::out_of_range);
  EXPECT_EQ(column_sum(m, 0, 16, 16), 0);
}

TEST(ColumnSum, AdditiveAndBounded) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto m = oracle::random_mask(rng, 64, 64);
    std::uniform_int_distribution<int> col(0, 63), row(0, 64);
    int a = row(rng), b = row(rng), c = row(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const int x = col(rng);
    EXPECT_EQ(column_sum(m, x, a, c), column_sum(m, x, a, b) + column_sum(m, x, b, c));
    EXPECT_LE(column_sum(m, x, a, c), c - a);
  }
}

TEST(Mask, MirrorFlipsColumns) {
  Mask m(16, 20);
  m.set(2, 3, true);
  const auto r = m.mirrored();
  EXPECT_EQ(r.at(13, 3), 1);
  EXPECT_EQ(r.count(), 1u);
  EXPECT_EQ(r.mirrored(), m);
}
