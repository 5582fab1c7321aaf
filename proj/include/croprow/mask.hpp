#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace croprow {

/// Pixel coordinate: x is the column (rightward), y the row (downward).
struct ImagePoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

/// Row-major binary crop-row mask. 1 marks a crop-row pixel.
///
/// Origin is the top-left corner; at(x, y) reads column x of row y.
/// Dimensions are at least 16x16. The grid is immutable once built
/// except through set(), which is used by renderers before sharing.
class Mask {
 public:
  static constexpr int kMinSize = 16;

  Mask() = default;
  Mask(int width, int height);
  Mask(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, bool on) { pixels_[index(x, y)] = on ? 1 : 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const std::uint8_t> row(int y) const {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  std::size_t count() const;

  /// Horizontal flip: column x maps to width-1-x.
  Mask mirrored() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

class MaskLoadError : public std::runtime_error {
 public:
  enum class Kind { Io, UnsupportedFormat, MalformedHeader, TruncatedPayload, InvalidDimensions };

  MaskLoadError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class MaskWriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a P5 (binary) or P2 (plain) greyscale PGM. Values >= 128 of the
/// full-scale range become 1. maxval above 255 is read as 16-bit big endian.
Mask load_mask(const std::filesystem::path& path);
Mask parse_pgm(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");

/// Writes P5 with maxval 255; 1 -> 255, 0 -> 0. The file is written to a
/// sibling temporary and renamed into place.
void save_mask(const Mask& mask, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const Mask& mask);

/// Sum of column x over rows [y_from, y_to). Throws std::out_of_range on bad indices.
int column_sum(const Mask& mask, int x, int y_from, int y_to);

/// Sum of row y over columns [x_from, x_to).
int row_sum(const Mask& mask, int y, int x_from, int x_to);

}  // namespace croprow
