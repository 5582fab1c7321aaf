#include "croprow/mask.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "croprow/io.hpp"

namespace croprow {

Mask::Mask(int width, int height) : Mask(width, height, {}) {}

Mask::Mask(int width, int height, std::vector<std::uint8_t> pixels) : width_(width), height_(height) {
  if (width < kMinSize || height < kMinSize)
    throw std::invalid_argument("mask must be at least 16x16, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (pixels.empty()) pixels.assign(n, 0);
  if (pixels.size() != n) throw std::invalid_argument("mask pixel count does not match dimensions");
  if (std::any_of(pixels.begin(), pixels.end(), [](std::uint8_t p) { return p > 1; }))
    throw std::invalid_argument("mask pixels must be 0 or 1");
  pixels_ = std::move(pixels);
}

std::size_t Mask::count() const {
  return std::accumulate(pixels_.begin(), pixels_.end(), std::size_t{0});
}

Mask Mask::mirrored() const {
  Mask out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.pixels_[out.index(width_ - 1 - x, y)] = pixels_[index(x, y)];
  return out;
}

namespace {

using Kind = MaskLoadError::Kind;

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw MaskLoadError(Kind::MalformedHeader, name_ + ": expected " + what);
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw MaskLoadError(Kind::MalformedHeader, name_ + ": " + what + " out of range");
      ++pos_;
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

}  // namespace

Mask parse_pgm(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw MaskLoadError(Kind::MalformedHeader, name + ": missing PGM magic");
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '5' && kind != '2')
    throw MaskLoadError(Kind::UnsupportedFormat, name + ": unsupported format P" + std::string(1, kind));

  HeaderReader reader(bytes, name);
  reader.advance(2);
  const long width = reader.read_uint("width");
  const long height = reader.read_uint("height");
  const long maxval = reader.read_uint("maxval");
  if (maxval < 1 || maxval > 65535) throw MaskLoadError(Kind::MalformedHeader, name + ": bad maxval");
  if (width < Mask::kMinSize || height < Mask::kMinSize)
    throw MaskLoadError(Kind::InvalidDimensions, name + ": dimensions below 16x16");

  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint8_t> pixels(n);
  // Binarize at the midpoint of the range: 128 of 255.
  const auto on = [maxval](long v) { return v * 255 >= 128 * maxval; };

  if (kind == '5') {
    // Exactly one whitespace byte separates the header from the raster.
    if (reader.pos() >= bytes.size() || !std::isspace(bytes[reader.pos()]))
      throw MaskLoadError(Kind::MalformedHeader, name + ": missing separator after header");
    reader.advance(1);
    const std::size_t sample = maxval > 255 ? 2 : 1;
    if (bytes.size() - reader.pos() < n * sample)
      throw MaskLoadError(Kind::TruncatedPayload, name + ": truncated raster (" +
                                                      std::to_string(bytes.size() - reader.pos()) + " of " +
                                                      std::to_string(n * sample) + " bytes)");
    const auto* raster = bytes.data() + reader.pos();
    for (std::size_t i = 0; i < n; ++i) {
      long v = sample == 2 ? (raster[2 * i] << 8) | raster[2 * i + 1] : raster[i];
      pixels[i] = on(v) ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      reader.skip_space_and_comments();
      if (reader.pos() >= bytes.size())
        throw MaskLoadError(Kind::TruncatedPayload, name + ": truncated raster at sample " + std::to_string(i));
      const long v = reader.read_uint("sample");
      if (v > maxval) throw MaskLoadError(Kind::MalformedHeader, name + ": sample exceeds maxval");
      pixels[i] = on(v) ? 1 : 0;
    }
  }
  return Mask(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

Mask load_mask(const std::filesystem::path& path) {
  std::string data;
  try {
    data = read_file(path);
  } catch (const IoError& e) {
    throw MaskLoadError(Kind::Io, e.what());
  }
  std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
  return parse_pgm(bytes, path.string());
}

std::vector<std::uint8_t> encode_pgm(const Mask& mask) {
  const std::string header =
      "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + mask.pixels().size());
  for (auto p : mask.pixels()) out.push_back(p ? 255 : 0);
  return out;
}

void save_mask(const Mask& mask, const std::filesystem::path& path) {
  if (mask.empty()) throw std::invalid_argument("cannot save an empty mask");
  const auto bytes = encode_pgm(mask);
  try {
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const IoError& e) {
    throw MaskWriteError(e.what());
  }
}

int column_sum(const Mask& mask, int x, int y_from, int y_to) {
  if (x < 0 || x >= mask.width() || y_from < 0 || y_from > y_to || y_to > mask.height())
    throw std::out_of_range("column_sum: index out of range");
  int sum = 0;
  for (int y = y_from; y < y_to; ++y) sum += mask.at(x, y);
  return sum;
}

int row_sum(const Mask& mask, int y, int x_from, int x_to) {
  if (y < 0 || y >= mask.height() || x_from < 0 || x_from > x_to || x_to > mask.width())
    throw std::out_of_range("row_sum: index out of range");
  auto r = mask.row(y);
  return std::accumulate(r.begin() + x_from, r.begin() + x_to, 0);
}

}  // namespace croprow
