#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "croprow/mask.hpp"

namespace croprow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Planar robot pose in field coordinates. theta is measured from the
/// along-row (+x) axis, counter-clockwise; +y is to the left of a robot
/// driving down the rows.
struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< radians
};

/// Parametric crop field. Rows are parallel curves offset from a reference
/// arc through the origin that starts along +x; the middle row (odd counts)
/// lies on the arc itself.
struct FieldSpec {
  int num_rows = 7;
  double row_spacing = 0.5;    ///< m
  double row_length = 6.0;     ///< m
  double curvature = 0.0;      ///< 1/m, positive bends left
  double gap_rate = 0.0;       ///< gaps per metre of row
  double gap_length = 0.3;     ///< m
  double weed_density = 0.0;   ///< blobs per square metre
  double width_min = 3.0;      ///< rendered row width range, px
  double width_max = 8.0;
  double width_chunk = 0.5;    ///< m of row sharing one sampled width
  double weed_radius_min = 2.0;  ///< px
  double weed_radius_max = 10.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct CameraSpec {
  double height_m = 0.7;
  double tilt_deg = 35.0;  ///< downward pitch
  double focal_px = 420.0;
  int image_w = 512;
  int image_h = 512;

  void validate() const;
};

struct FieldRow {
  int index = 0;
  double offset = 0.0;  ///< lateral offset from the reference arc, m
  std::vector<Vec2> centerline;  ///< full row, gaps included
  /// Drawn pieces after gap removal; widths[i] belongs to segment i -> i+1.
  struct Piece {
    std::vector<Vec2> points;
    std::vector<double> widths;
  };
  std::vector<Piece> pieces;
  std::vector<std::pair<double, double>> gaps;  ///< [start, end] arclength
};

struct Weed {
  Vec2 position;
  double radius_px = 0.0;
};

struct Field {
  FieldSpec spec;
  std::vector<FieldRow> rows;
  std::vector<Weed> weeds;

  /// Index into rows of the row lying on the reference arc (or nearest it).
  int middle_row() const;

  /// Signed lateral distance (m, left positive) and heading difference (rad)
  /// of a pose relative to a row centerline extended along its end tangents.
  std::pair<double, double> offset_from_row(int row, const RobotPose& pose) const;
};

struct GroundTruthRow {
  double anchor_x_gt = 0.0;  ///< central row at the top edge, px
  double pr_x_gt = 0.0;      ///< central row at the bottom edge, px
  bool visible = false;
  std::optional<double> eor_y_gt;  ///< image row of the central row's far end
  int row = -1;                    ///< index into Field::rows
  double delta_theta_gt = 0.0;     ///< degrees, same convention as TrackingError
  double delta_p_gt = 0.0;         ///< px from W/2
};

struct Render {
  Mask mask;
  GroundTruthRow truth;
};

/// Deterministic given spec.seed.
Field generate_field(const FieldSpec& spec);

/// Pinhole camera at (pose.x, pose.y, height_m) pitched down by tilt_deg,
/// principal point at the image centre ((W-1)/2, (H-1)/2).
class Camera {
 public:
  Camera(const CameraSpec& spec, const RobotPose& pose);

  /// Image coordinates of a ground point, or nullopt when it lies behind
  /// the near plane.
  std::optional<Vec2> project(Vec2 ground) const;

  /// Depth along the optical axis.
  double depth(Vec2 ground) const;

  /// Column at which image row y meets the ground polyline, choosing the
  /// crossing nearest the image centre. nullopt above the horizon or when
  /// the polyline does not cross that row's ground line.
  std::optional<double> column_at_row(const std::vector<Vec2>& polyline, double y) const;

  const CameraSpec& spec() const { return spec_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

 private:
  CameraSpec spec_;
  double cx_, cy_;
  double pos_[3];
  double fwd_[3], right_[3], down_[3];
};

/// Renders the field into a binary mask and computes the analytic ground
/// truth of the central row (the row whose bottom-edge crossing is nearest
/// W/2). Throws std::invalid_argument for an invalid camera.
Render render_mask(const Field& field, const RobotPose& pose, const CameraSpec& cam);

/// Ground truth alone, without rasterizing.
GroundTruthRow ground_truth(const Field& field, const RobotPose& pose, const CameraSpec& cam);

}  // namespace croprow
