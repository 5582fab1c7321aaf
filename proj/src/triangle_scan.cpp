#include "croprow/triangle_scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace croprow {

namespace {

// Products like 0.2 * 500 must floor to 100, not 99.
int floor_px(double v) { return static_cast<int>(std::floor(v + 1e-9)); }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid scan config: ") + what);
}

// Floor division for a possibly negative numerator and positive denominator.
long long floor_div(long long num, long long den) {
  long long q = num / den;
  if ((num % den != 0) && (num < 0)) --q;
  return q;
}

}  // namespace

void ScanConfig::validate() const {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(anchor_x_min_frac >= 0.0 && anchor_x_min_frac < anchor_x_max_frac && anchor_x_max_frac <= 1.0,
          "anchor x fractions must satisfy 0 <= min < max <= 1");
  require(anchor_threshold_frac > 0.0 && anchor_threshold_frac <= 1.0, "anchor_threshold_frac must lie in (0, 1]");
  require(n_max >= 0, "n_max must be non-negative");
  require(pr_offset_frac >= 0.0 && pr_min_frac >= 0.0 && pr_min_frac <= pr_max_frac && pr_max_frac <= 1.0,
          "B/C fractions must satisfy 0 <= pr_min <= pr_max <= 1");
}

int roi_height(const ScanConfig& cfg, int image_height) {
  const int h = floor_px(cfg.s * image_height);
  if (h < 1) throw std::invalid_argument("scan ROI height floor(s*H) must be at least 1");
  return h;
}

int argmax_plateau_centre(std::span<const int> scores) {
  const int first = argmax_first(scores);
  if (first < 0) return first;
  int last = first;
  while (last + 1 < static_cast<int>(scores.size()) && scores[last + 1] == scores[first]) ++last;
  return first + (last - first) / 2;
}

int argmax_first(std::span<const int> scores) {
  if (scores.empty()) return -1;
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

int argmax(std::span<const int> scores, TieBreak rule) {
  return rule == TieBreak::Smallest ? argmax_first(scores) : argmax_plateau_centre(scores);
}

AnchorResult anchor_scan(const Mask& mask, const ScanConfig& cfg) {
  cfg.validate();
  const int W = mask.width();
  const int H = mask.height();
  const int h = roi_height(cfg, H);
  const int x_lo = floor_px(cfg.anchor_x_min_frac * W);
  const int x_hi = std::min(W - 1, floor_px(cfg.anchor_x_max_frac * W));
  const double threshold = cfg.anchor_threshold_frac * h;

  AnchorResult result;
  result.h = h;
  std::vector<int> sums(static_cast<std::size_t>(x_hi - x_lo + 1));
  for (int n = 0; n <= cfg.n_max; ++n) {
    const int y0 = std::min(n * h, H);
    const int y1 = std::min((n + 1) * h, H);
    std::fill(sums.begin(), sums.end(), 0);
    for (int y = y0; y < y1; ++y) {
      auto row = mask.row(y);
      for (int x = x_lo; x <= x_hi; ++x) sums[static_cast<std::size_t>(x - x_lo)] += row[static_cast<std::size_t>(x)];
    }
    const int best = argmax(sums, cfg.tie_break);
    result.a_x = x_lo + best;
    result.score = sums[static_cast<std::size_t>(best)];
    result.n = n;
    if (result.score > 0 && result.score >= threshold) {
      result.valid = true;
      return result;
    }
  }
  result.valid = false;
  return result;
}

std::vector<ImagePoint> rasterize_segment(ImagePoint p0, ImagePoint p1) {
  if (p1.y < p0.y) throw std::invalid_argument("rasterize_segment requires p0.y <= p1.y");
  const long long dy = p1.y - p0.y;
  if (dy == 0) return {p0};
  std::vector<ImagePoint> pts;
  pts.reserve(static_cast<std::size_t>(dy + 1));
  const long long dx = p1.x - p0.x;
  for (long long k = 0; k <= dy; ++k) {
    // round_half_up(x0 + dx * k / dy) == floor((2 * (x0 * dy + dx * k) + dy) / (2 * dy))
    const long long x = floor_div(2 * (p0.x * dy + dx * k) + dy, 2 * dy);
    pts.push_back({static_cast<int>(x), static_cast<int>(p0.y + k)});
  }
  return pts;
}

std::pair<int, int> compute_bc(int a_x, int extent, const ScanConfig& cfg) {
  const double A = a_x;
  const double offset = cfg.pr_offset_frac * extent;
  const double lo = cfg.pr_min_frac * extent;
  const double hi = cfg.pr_max_frac * extent;
  // B = lo while A <= lo + offset, else A - offset; C = hi while A >= hi - offset, else A + offset.
  int b = A <= lo + offset ? floor_px(lo) : floor_px(A - offset);
  int c = A >= hi - offset ? floor_px(hi) : floor_px(A + offset);
  b = std::clamp(b, 0, extent - 1);
  c = std::clamp(c, 0, extent - 1);
  if (b > c) std::swap(b, c);
  return {b, c};
}

int line_score(const Mask& mask, const AnchorResult& anchor, int p) {
  const int H = mask.height();
  const int top = std::min(anchor.n * anchor.h, H - 1);
  int sum = 0;
  for (int y = 0; y < top; ++y) sum += mask.at(anchor.a_x, y);
  // Walk the segment in place rather than materialising the point list.
  const long long dy = (H - 1) - top;
  if (dy == 0) return sum + mask.at(anchor.a_x, top);
  const long long dx = p - anchor.a_x;
  for (long long k = 0; k <= dy; ++k) {
    const long long x = floor_div(2 * (anchor.a_x * dy + dx * k) + dy, 2 * dy);
    sum += mask.at(static_cast<int>(x), static_cast<int>(top + k));
  }
  return sum;
}

CentralRow line_scan(const Mask& mask, const AnchorResult& anchor, const ScanConfig& cfg) {
  if (!anchor.valid) throw std::invalid_argument("line_scan requires a valid anchor");
  const auto [b, c] = compute_bc(anchor.a_x, mask.width(), cfg);
  std::vector<int> scores(static_cast<std::size_t>(c - b + 1));
  for (int p = b; p <= c; ++p) scores[static_cast<std::size_t>(p - b)] = line_score(mask, anchor, p);
  const int best = argmax(scores, cfg.tie_break);

  CentralRow row;
  row.anchor = {anchor.a_x, 0};
  row.p_r = {b + best, mask.height() - 1};
  row.b_x = b;
  row.c_x = c;
  row.line_score = scores[static_cast<std::size_t>(best)];
  return row;
}

TrackingError tracking_error(const CentralRow& row, int image_width, std::optional<double> desired_x) {
  TrackingError err;
  const double dx = row.p_r.x - row.anchor.x;
  const double dy = row.p_r.y - row.anchor.y;
  err.delta_theta = (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dx, dy) * 180.0 / std::numbers::pi;
  err.delta_p = row.p_r.x - desired_x.value_or(image_width / 2.0);
  return err;
}

Detection detect(const Mask& mask, const ScanConfig& cfg, std::optional<double> desired_x) {
  Detection det;
  det.anchor = anchor_scan(mask, cfg);
  if (!det.anchor.valid) return det;
  det.row = line_scan(mask, det.anchor, cfg);
  det.error = tracking_error(*det.row, mask.width(), desired_x);
  return det;
}

}  // namespace croprow
