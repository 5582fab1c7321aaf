#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "croprow/synth_field.hpp"
#include "croprow/triangle_scan.hpp"

using namespace croprow;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double dist_to_polyline(Vec2 p, const std::vector<Vec2>& poly) {
  double best = 1e18;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const double dx = poly[i + 1].x - poly[i].x, dy = poly[i + 1].y - poly[i].y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - poly[i].x) * dx + (p.y - poly[i].y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(p.x - poly[i].x - t * dx, p.y - poly[i].y - t * dy));
  }
  return best;
}

}  // namespace

TEST(FieldSpec, Validation) {
  EXPECT_NO_THROW(FieldSpec{}.validate());
  FieldSpec f;
  f.num_rows = 0;
  EXPECT_THROW(f.validate(), std::invalid_argument);
  f = {};
  f.width_min = 9;
  EXPECT_THROW(f.validate(), std::invalid_argument);
  f = {};
  f.width_max = 17;
  EXPECT_THROW(f.validate(), std::invalid_argument);
  CameraSpec c;
  c.height_m = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.tilt_deg = 90;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(render_mask(generate_field(FieldSpec{}), {}, c), std::invalid_argument);
}

TEST(GenerateField, DegenerateSpecGivesStraightParallelRows) {
  const auto field = generate_field(FieldSpec{});
  ASSERT_EQ(field.rows.size(), 7u);
  EXPECT_TRUE(field.weeds.empty());
  for (const auto& row : field.rows) {
    EXPECT_TRUE(row.gaps.empty());
    ASSERT_EQ(row.pieces.size(), 1u);
    EXPECT_NEAR(row.centerline.front().x, 0.0, 1e-12);
    EXPECT_NEAR(row.centerline.back().x, 6.0, 1e-12);
    for (const auto& p : row.centerline) EXPECT_NEAR(p.y, row.offset, 1e-12);
    for (double w : row.pieces[0].widths) {
      EXPECT_GE(w, 3.0);
      EXPECT_LE(w, 8.0);
    }
  }
  EXPECT_NEAR(field.rows[1].offset - field.rows[0].offset, 0.5, 1e-12);
  EXPECT_EQ(field.middle_row(), 3);
  EXPECT_EQ(field.rows[3].offset, 0.0);
}

TEST(GenerateField, CurvedRowsStayParallel) {
  FieldSpec spec;
  spec.curvature = 0.1;
  const auto field = generate_field(spec);
  for (const auto& p : field.rows[4].centerline)
    EXPECT_NEAR(dist_to_polyline(p, field.rows[3].centerline), 0.5, 2e-3);
  EXPECT_GT(field.rows[3].centerline.back().y, 1.0);  // bends left
}

TEST(GenerateField, Deterministic) {
  FieldSpec spec;
  spec.gap_rate = 0.7;
  spec.weed_density = 3;
  const auto a = generate_field(spec), b = generate_field(spec);
  ASSERT_EQ(a.weeds.size(), b.weeds.size());
  for (std::size_t i = 0; i < a.weeds.size(); ++i) EXPECT_EQ(a.weeds[i].position.x, b.weeds[i].position.x);
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    ASSERT_EQ(a.rows[r].gaps, b.rows[r].gaps);
    ASSERT_EQ(a.rows[r].pieces.size(), b.rows[r].pieces.size());
  }
  const auto ma = render_mask(a, {1.0, 0.02, 0.05}, CameraSpec{}).mask;
  EXPECT_EQ(ma, render_mask(b, {1.0, 0.02, 0.05}, CameraSpec{}).mask);
}

TEST(GenerateField, GapCountMonteCarlo) {
  FieldSpec spec;
  spec.gap_rate = 0.5;
  double total = 0;
  int rows = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    spec.seed = seed;
    for (const auto& row : generate_field(spec).rows) {
      total += static_cast<double>(row.gaps.size());
      ++rows;
    }
  }
  EXPECT_NEAR(total / rows, 3.0, 0.3);
}

TEST(RenderMask, CentredRobotSeesCentredRow) {
  const auto r = render_mask(generate_field(FieldSpec{}), {0.0, 0.0, 0.0}, CameraSpec{});
  EXPECT_TRUE(r.truth.visible);
  EXPECT_NEAR(r.truth.anchor_x_gt, 256, 1);
  EXPECT_NEAR(r.truth.pr_x_gt, 256, 1);
  EXPECT_EQ(r.truth.row, 3);
}

TEST(RenderMask, HeadingClosedForm) {
  // A straight row through the camera footprint, seen with heading psi from a
  // camera pitched by t, appears tilted by -atan(tan(psi) * sin(t)).
  for (double psi : {10.0, -10.0, 4.0}) {
    const auto gt = ground_truth(generate_field(FieldSpec{}), {0.0, 0.0, psi * kDeg}, CameraSpec{});
    const double expect = -std::atan(std::tan(psi * kDeg) * std::sin(35 * kDeg)) / kDeg;
    EXPECT_NEAR(gt.delta_theta_gt, expect, 1e-6) << psi;
  }
}

TEST(RenderMask, EndOfRowInLowerHalf) {
  const auto gt = ground_truth(generate_field(FieldSpec{}), {5.5, 0.0, 0.0}, CameraSpec{});
  ASSERT_TRUE(gt.eor_y_gt.has_value());
  EXPECT_GT(*gt.eor_y_gt, 256);
  EXPECT_LT(*gt.eor_y_gt, 512);
  const auto far = ground_truth(generate_field(FieldSpec{}), {-20.0, 0.0, 0.0}, CameraSpec{});
  EXPECT_FALSE(far.eor_y_gt.has_value());
}

TEST(RenderMask, PixelsNearProjectedCenterlines) {
  const auto field = generate_field(FieldSpec{});
  const RobotPose pose{1.0, 0.03, 4 * kDeg};
  const CameraSpec cam;
  const Camera camera(cam, pose);
  const auto mask = render_mask(field, pose, cam).mask;
  std::vector<std::vector<Vec2>> projected;
  for (const auto& row : field.rows) {
    std::vector<Vec2> poly;
    for (const auto& p : row.centerline)
      if (auto q = camera.project(p)) poly.push_back(*q);
    projected.push_back(poly);
  }
  for (int y = 0; y < mask.height(); y += 3)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      double d = 1e18;
      for (const auto& poly : projected) d = std::min(d, dist_to_polyline({double(x), double(y)}, poly));
      ASSERT_LE(d, 8.0 / 2 + 1) << x << "," << y;
    }
}

TEST(RenderMask, GapsRemovePixelsKeepTruth) {
  FieldSpec clean, gappy;
  gappy.gap_rate = 1.0;
  gappy.gap_length = 0.4;
  const RobotPose pose{0.5, 0.0, 0.0};
  const auto a = render_mask(generate_field(clean), pose, CameraSpec{});
  const auto b = render_mask(generate_field(gappy), pose, CameraSpec{});
  EXPECT_LT(b.mask.count(), a.mask.count());
  EXPECT_EQ(a.truth.pr_x_gt, b.truth.pr_x_gt);
  EXPECT_EQ(a.truth.anchor_x_gt, b.truth.anchor_x_gt);
  for (std::size_t i = 0; i < b.mask.pixels().size(); ++i)
    if (b.mask.pixels()[i]) ASSERT_EQ(a.mask.pixels()[i], 1);
}

TEST(RenderMask, WeedsOnlyAddPixels) {
  FieldSpec clean, weedy;
  weedy.weed_density = 5;
  const RobotPose pose{0.5, 0.0, 0.0};
  const auto a = render_mask(generate_field(clean), pose, CameraSpec{});
  const auto b = render_mask(generate_field(weedy), pose, CameraSpec{});
  EXPECT_GT(b.mask.count(), a.mask.count());
  for (std::size_t i = 0; i < a.mask.pixels().size(); ++i)
    if (a.mask.pixels()[i]) ASSERT_EQ(b.mask.pixels()[i], 1);
  EXPECT_EQ(a.truth.pr_x_gt, b.truth.pr_x_gt);
}

TEST(RenderMask, MirrorSymmetry) {
  FieldSpec spec;
  spec.width_min = spec.width_max = 5;
  const auto field = generate_field(spec);
  const auto a = render_mask(field, {1.2, 0.04, 6 * kDeg}, CameraSpec{});
  const auto b = render_mask(field, {1.2, -0.04, -6 * kDeg}, CameraSpec{});
  const auto m = b.mask.mirrored();
  std::size_t diff = 0;
  for (std::size_t i = 0; i < m.pixels().size(); ++i) diff += m.pixels()[i] != a.mask.pixels()[i];
  EXPECT_LE(diff, a.mask.count() / 200);
  EXPECT_NEAR(a.truth.pr_x_gt, 511 - b.truth.pr_x_gt, 1e-6);
  EXPECT_NEAR(a.truth.delta_theta_gt, -b.truth.delta_theta_gt, 1e-6);
}

TEST(RenderMask, CleanDetectionMatchesTruth) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FieldSpec spec;
    spec.seed = seed;
    const auto field = generate_field(spec);
    for (double x = 0.0; x < 5.0; x += 0.5) {
      const auto r = render_mask(field, {x, 0.0, 0.0}, CameraSpec{});
      const auto det = detect(r.mask, ScanConfig{});
      ASSERT_TRUE(det.found());
      EXPECT_LE(std::abs(det.row->anchor.x - r.truth.anchor_x_gt), 2.0) << seed << " " << x;
      EXPECT_LE(std::abs(det.row->p_r.x - r.truth.pr_x_gt), 2.0) << seed << " " << x;
    }
  }
}

TEST(RenderMask, NothingAboveHorizon) {
  CameraSpec cam;
  cam.tilt_deg = 5;  // horizon at y = cy - f * tan(5 deg), about 219
  const auto r = render_mask(generate_field(FieldSpec{}), {-3.0, 0.0, 0.0}, cam);
  const int horizon = static_cast<int>(std::floor(cam.image_h / 2.0 - 420 * std::tan(5 * kDeg)));
  for (int y = 0; y < horizon - 1; ++y)
    for (int x = 0; x < cam.image_w; ++x) ASSERT_EQ(r.mask.at(x, y), 0) << x << "," << y;
  EXPECT_GT(r.mask.count(), 0u);
}

TEST(FieldOffset, SignedLateralAndHeading) {
  const auto field = generate_field(FieldSpec{});
  const auto [lat, head] = field.offset_from_row(3, {10.0, 0.05, 2 * kDeg});
  EXPECT_NEAR(lat, 0.05, 1e-12);  // beyond the row end, on the extension
  EXPECT_NEAR(head, 2 * kDeg, 1e-12);
  const auto [lat2, head2] = field.offset_from_row(2, {3.0, 0.0, 0.0});
  EXPECT_NEAR(lat2, 0.5, 1e-12);
  EXPECT_NEAR(head2, 0.0, 1e-12);
}
