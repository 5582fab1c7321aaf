#include "croprow/synth_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace croprow {

namespace {

constexpr double kSampleStep = 0.05;  // m between centerline samples
constexpr double kNearPlane = 0.05;   // m
constexpr double kExtension = 100.0;  // m of tangent extension used for ground truth

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// Independent stream per purpose so that, for example, adding weeds never
// changes the sampled row widths.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

struct ReferenceArc {
  double kappa;

  Vec2 point(double s) const {
    if (kappa == 0.0) return {s, 0.0};
    return {std::sin(kappa * s) / kappa, (1.0 - std::cos(kappa * s)) / kappa};
  }
  Vec2 tangent(double s) const { return {std::cos(kappa * s), std::sin(kappa * s)}; }
  Vec2 normal(double s) const { return {-std::sin(kappa * s), std::cos(kappa * s)}; }
  Vec2 at(double s, double lateral) const { return point(s) + lateral * normal(s); }
};

double row_offset(const FieldSpec& spec, int k) { return (k - (spec.num_rows - 1) / 2.0) * spec.row_spacing; }

std::vector<std::pair<double, double>> merged(std::vector<std::pair<double, double>> gaps) {
  std::sort(gaps.begin(), gaps.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& g : gaps) {
    if (!out.empty() && g.first <= out.back().second)
      out.back().second = std::max(out.back().second, g.second);
    else
      out.push_back(g);
  }
  return out;
}

std::vector<Vec2> extended(const FieldRow& row) {
  const auto& c = row.centerline;
  std::vector<Vec2> poly;
  poly.reserve(c.size() + 2);
  auto dir = [](Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double n = std::hypot(d.x, d.y);
    return n > 0 ? (1.0 / n) * d : Vec2{1.0, 0.0};
  };
  poly.push_back(c.front() - kExtension * dir(c[0], c[1]));
  poly.insert(poly.end(), c.begin(), c.end());
  poly.push_back(c.back() + kExtension * dir(c[c.size() - 2], c.back()));
  return poly;
}

// Liang-Barsky clip of segment a-b to [lo_x, hi_x] x [lo_y, hi_y].
bool clip_segment(Vec2& a, Vec2& b, double lo_x, double hi_x, double lo_y, double hi_y) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - lo_x, hi_x - a.x, a.y - lo_y, hi_y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, r);
    else
      t1 = std::min(t1, r);
    if (t0 > t1) return false;
  }
  const Vec2 a0 = a;
  a = {a0.x + t0 * dx, a0.y + t0 * dy};
  b = {a0.x + t1 * dx, a0.y + t1 * dy};
  return true;
}

void draw_thick_segment(Mask& mask, Vec2 a, Vec2 b, double width) {
  const double r = width / 2.0;
  const double margin = r + 2.0;
  if (!clip_segment(a, b, -margin, mask.width() - 1 + margin, -margin, mask.height() - 1 + margin)) return;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r)));
  const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r)));
  const Vec2 d = b - a;
  const double len2 = d.x * d.x + d.y * d.y;
  const double r2 = r * r + 1e-9;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 p{x - a.x, y - a.y};
      double t = len2 > 0 ? (p.x * d.x + p.y * d.y) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = p.x - t * d.x, ey = p.y - t * d.y;
      if (ex * ex + ey * ey <= r2) mask.set(x, y, true);
    }
  }
}

void draw_disc(Mask& mask, Vec2 c, double radius) {
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x - radius)));
  const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(c.x + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y - radius)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(c.y + radius)));
  const double r2 = radius * radius + 1e-9;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) <= r2) mask.set(x, y, true);
}

}  // namespace

void FieldSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid field spec: " + what); };
  if (num_rows < 1) fail("num_rows must be >= 1");
  if (!(row_spacing > 0.0)) fail("row_spacing must be positive");
  if (!(row_length > 0.0)) fail("row_length must be positive");
  if (!std::isfinite(curvature)) fail("curvature must be finite");
  if (curvature != 0.0 && std::abs(curvature) * (num_rows / 2.0) * row_spacing >= 1.0)
    fail("curvature too tight for the outer rows");
  if (!(gap_rate >= 0.0)) fail("gap_rate must be non-negative");
  if (!(gap_length >= 0.0)) fail("gap_length must be non-negative");
  if (!(weed_density >= 0.0)) fail("weed_density must be non-negative");
  if (!(width_min >= 1.0 && width_min <= width_max && width_max <= 16.0)) fail("width range must lie in [1, 16]");
  if (!(width_chunk > 0.0)) fail("width_chunk must be positive");
  if (!(weed_radius_min > 0.0 && weed_radius_min <= weed_radius_max)) fail("weed radius range invalid");
}

void CameraSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid camera spec: " + what); };
  if (!(height_m > 0.0)) fail("camera height must be above ground");
  if (!(tilt_deg > 0.0 && tilt_deg < 90.0)) fail("tilt_deg must lie in (0, 90)");
  if (!(focal_px > 0.0)) fail("focal_px must be positive");
  if (image_w < Mask::kMinSize || image_h < Mask::kMinSize) fail("image must be at least 16x16");
}

int Field::middle_row() const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(rows.size()); ++i)
    if (std::abs(rows[i].offset) < std::abs(rows[best].offset)) best = i;
  return best;
}

std::pair<double, double> Field::offset_from_row(int row, const RobotPose& pose) const {
  const auto poly = extended(rows.at(static_cast<std::size_t>(row)));
  const Vec2 p{pose.x, pose.y};
  double best_d2 = std::numeric_limits<double>::infinity();
  double lateral = 0.0, heading = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 d = poly[i + 1] - poly[i];
    const double len2 = d.x * d.x + d.y * d.y;
    if (len2 == 0.0) continue;
    const double t = std::clamp(((p.x - poly[i].x) * d.x + (p.y - poly[i].y) * d.y) / len2, 0.0, 1.0);
    const Vec2 q = poly[i] + t * d;
    const double d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double len = std::sqrt(len2);
      lateral = cross(d, p - q) / len;
      heading = wrap_angle(pose.theta - std::atan2(d.y, d.x));
    }
  }
  return {lateral, heading};
}

Field generate_field(const FieldSpec& spec) {
  spec.validate();
  Field field;
  field.spec = spec;
  const ReferenceArc arc{spec.curvature};
  const double L = spec.row_length;

  auto width_rng = stream(spec.seed, 1);
  auto gap_rng = stream(spec.seed, 2);
  auto weed_rng = stream(spec.seed, 3);
  std::uniform_real_distribution<double> width_dist(spec.width_min, spec.width_max);

  for (int k = 0; k < spec.num_rows; ++k) {
    FieldRow row;
    row.index = k;
    row.offset = row_offset(spec, k);

    const int samples = static_cast<int>(std::ceil(L / kSampleStep));
    for (int i = 0; i <= samples; ++i) row.centerline.push_back(arc.at(std::min(i * kSampleStep, L), row.offset));

    const int chunks = static_cast<int>(std::ceil(L / spec.width_chunk)) + 1;
    std::vector<double> widths(static_cast<std::size_t>(chunks));
    for (auto& w : widths) w = spec.width_min == spec.width_max ? spec.width_min : width_dist(width_rng);

    if (spec.gap_rate > 0.0) {
      std::exponential_distribution<double> next_gap(spec.gap_rate);
      for (double s = next_gap(gap_rng); s < L; s += next_gap(gap_rng))
        row.gaps.emplace_back(s, std::min(s + spec.gap_length, L));
    }

    double cursor = 0.0;
    auto emit_piece = [&](double a, double b) {
      if (b - a <= 1e-9) return;
      FieldRow::Piece piece;
      std::vector<double> s_values{a};
      for (double s = (std::floor(a / kSampleStep) + 1) * kSampleStep; s < b - 1e-9; s += kSampleStep)
        s_values.push_back(s);
      s_values.push_back(b);
      for (double s : s_values) piece.points.push_back(arc.at(s, row.offset));
      for (std::size_t i = 0; i + 1 < s_values.size(); ++i) {
        const double mid = 0.5 * (s_values[i] + s_values[i + 1]);
        const auto chunk = std::min(static_cast<std::size_t>(mid / spec.width_chunk), widths.size() - 1);
        piece.widths.push_back(widths[chunk]);
      }
      row.pieces.push_back(std::move(piece));
    };
    for (const auto& [g0, g1] : merged(row.gaps)) {
      emit_piece(cursor, g0);
      cursor = std::max(cursor, g1);
    }
    emit_piece(cursor, L);
    field.rows.push_back(std::move(row));
  }

  if (spec.weed_density > 0.0) {
    const double half_span = spec.num_rows * spec.row_spacing / 2.0;
    const double area = (L + 2.0) * (2.0 * half_span);
    std::poisson_distribution<int> count(spec.weed_density * area);
    std::uniform_real_distribution<double> along(-1.0, L + 1.0);
    std::uniform_real_distribution<double> across(-half_span, half_span);
    std::uniform_real_distribution<double> radius(spec.weed_radius_min, spec.weed_radius_max);
    const int n = count(weed_rng);
    for (int i = 0; i < n; ++i) {
      const double s = along(weed_rng);
      const double l = across(weed_rng);
      const double r = radius(weed_rng);
      field.weeds.push_back({arc.at(s, l), r});
    }
  }
  return field;
}

Camera::Camera(const CameraSpec& spec, const RobotPose& pose) : spec_(spec) {
  spec.validate();
  cx_ = (spec.image_w - 1) / 2.0;
  cy_ = (spec.image_h - 1) / 2.0;
  const double t = spec.tilt_deg * std::numbers::pi / 180.0;
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  pos_[0] = pose.x;
  pos_[1] = pose.y;
  pos_[2] = spec.height_m;
  fwd_[0] = std::cos(t) * c;
  fwd_[1] = std::cos(t) * s;
  fwd_[2] = -std::sin(t);
  right_[0] = s;
  right_[1] = -c;
  right_[2] = 0.0;
  down_[0] = -std::sin(t) * c;
  down_[1] = -std::sin(t) * s;
  down_[2] = -std::cos(t);
}

double Camera::depth(Vec2 g) const {
  return (g.x - pos_[0]) * fwd_[0] + (g.y - pos_[1]) * fwd_[1] - pos_[2] * fwd_[2];
}

std::optional<Vec2> Camera::project(Vec2 g) const {
  const double v[3] = {g.x - pos_[0], g.y - pos_[1], -pos_[2]};
  const double z = v[0] * fwd_[0] + v[1] * fwd_[1] + v[2] * fwd_[2];
  if (z < kNearPlane) return std::nullopt;
  const double xr = v[0] * right_[0] + v[1] * right_[1];
  const double yd = v[0] * down_[0] + v[1] * down_[1] + v[2] * down_[2];
  return Vec2{cx_ + spec_.focal_px * xr / z, cy_ + spec_.focal_px * yd / z};
}

std::optional<double> Camera::column_at_row(const std::vector<Vec2>& poly, double y) const {
  // Every pixel of image row y sees the ground along one horizontal line:
  // base + a * right, at ray parameter t_ray.
  const double m = (y - cy_) / spec_.focal_px;
  const double t_ray_den = -(fwd_[2] + m * down_[2]);
  if (t_ray_den <= 1e-9) return std::nullopt;
  const double t_ray = pos_[2] / t_ray_den;
  const Vec2 base{pos_[0] + t_ray * (fwd_[0] + m * down_[0]), pos_[1] + t_ray * (fwd_[1] + m * down_[1])};
  const Vec2 r{right_[0], right_[1]};

  std::optional<double> best;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 e = poly[i + 1] - poly[i];
    const double den = cross(r, e);
    if (std::abs(den) < 1e-12) continue;
    const Vec2 w = poly[i] - base;
    const double b = cross(w, r) / den;
    if (b < 0.0 || b > 1.0) continue;
    const double a = cross(w, e) / den;
    if (!best || std::abs(a) < std::abs(*best)) best = a;
  }
  if (!best) return std::nullopt;
  return cx_ + spec_.focal_px * *best / t_ray;
}

GroundTruthRow ground_truth(const Field& field, const RobotPose& pose, const CameraSpec& cam) {
  const Camera camera(cam, pose);
  const int W = cam.image_w, H = cam.image_h;
  GroundTruthRow gt;

  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<Vec2> best_poly;
  for (std::size_t i = 0; i < field.rows.size(); ++i) {
    auto poly = extended(field.rows[i]);
    const auto bottom = camera.column_at_row(poly, H - 1);
    if (!bottom) continue;
    const double dist = std::abs(*bottom - W / 2.0);
    if (dist < best_dist) {
      best_dist = dist;
      gt.row = static_cast<int>(i);
      gt.pr_x_gt = *bottom;
      best_poly = std::move(poly);
    }
  }
  if (gt.row < 0) return gt;

  const auto top = camera.column_at_row(best_poly, 0);
  if (!top) return gt;
  gt.anchor_x_gt = *top;
  gt.visible = gt.anchor_x_gt >= 0 && gt.anchor_x_gt <= W - 1 && gt.pr_x_gt >= 0 && gt.pr_x_gt <= W - 1;
  gt.delta_theta_gt = std::atan2(gt.pr_x_gt - gt.anchor_x_gt, H - 1.0) * 180.0 / std::numbers::pi;
  gt.delta_p_gt = gt.pr_x_gt - W / 2.0;

  const auto end = camera.project(field.rows[static_cast<std::size_t>(gt.row)].centerline.back());
  if (end && end->x >= 0 && end->x <= W - 1 && end->y >= 0 && end->y <= H - 1) gt.eor_y_gt = end->y;
  return gt;
}

Render render_mask(const Field& field, const RobotPose& pose, const CameraSpec& cam) {
  const Camera camera(cam, pose);
  Render out{Mask(cam.image_w, cam.image_h), {}};

  for (const auto& row : field.rows) {
    for (const auto& piece : row.pieces) {
      for (std::size_t i = 0; i + 1 < piece.points.size(); ++i) {
        Vec2 a = piece.points[i], b = piece.points[i + 1];
        const double za = camera.depth(a), zb = camera.depth(b);
        if (za < kNearPlane * 1.001 && zb < kNearPlane * 1.001) continue;
        // Clip a hair inside the near plane so project() accepts the new endpoint.
        constexpr double kClip = kNearPlane * 1.001;
        if (za < kClip) a = a + ((kClip - za) / (zb - za)) * (b - a);
        if (zb < kClip) b = b + ((kClip - zb) / (za - zb)) * (a - b);
        const auto pa = camera.project(a), pb = camera.project(b);
        if (!pa || !pb) continue;
        draw_thick_segment(out.mask, *pa, *pb, piece.widths[i]);
      }
    }
  }
  for (const auto& weed : field.weeds) {
    const auto c = camera.project(weed.position);
    if (c) draw_disc(out.mask, *c, weed.radius_px);
  }
  out.truth = ground_truth(field, pose, cam);
  return out;
}

}  // namespace croprow
