#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "croprow/mask.hpp"

namespace croprow {

/// Parameters of the two-step (anchor + line) central row scan.
///
/// Horizontal fractions are applied to the image width (equal to the
/// height on square frames).
/// Rule for equal column sums / line scores.
enum class TieBreak {
  PlateauCentre,  ///< centre of the first maximal run (lower middle when even)
  Smallest,       ///< first maximal index
};

struct ScanConfig {
  double s = 0.2;                      ///< anchor ROI height as a fraction of H
  double anchor_x_min_frac = 0.2;
  double anchor_x_max_frac = 0.7;
  double anchor_threshold_frac = 0.16; ///< minimum column sum, as a fraction of the ROI height
  int n_max = 2;                       ///< maximum ROI down-shifts
  double pr_offset_frac = 0.2;         ///< half-width of the B..C window around A
  double pr_min_frac = 0.4;
  double pr_max_frac = 0.9;
  TieBreak tie_break = TieBreak::PlateauCentre;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// floor(s * H), the anchor ROI height in rows.
int roi_height(const ScanConfig& cfg, int image_height);

struct AnchorResult {
  int a_x = -1;     ///< anchor column A
  int n = 0;        ///< ROI shifts applied
  bool valid = false;
  int score = 0;    ///< winning column sum
  int h = 0;        ///< ROI height used
};

struct CentralRow {
  ImagePoint anchor;  ///< A on the top edge (y = 0)
  ImagePoint p_r;     ///< P_r on the bottom edge (y = H - 1)
  int b_x = 0;
  int c_x = 0;
  int line_score = 0;
};

struct TrackingError {
  double delta_theta = 0.0;  ///< degrees from vertical, positive when P_r is right of A
  double delta_p = 0.0;      ///< pixels, P_r column minus desired column
};

struct Detection {
  AnchorResult anchor;
  std::optional<CentralRow> row;
  std::optional<TrackingError> error;

  bool found() const { return row.has_value(); }
};

/// Index of the centre of the first run of maximal values (lower middle
/// for even-length runs). Empty input returns -1.
int argmax_plateau_centre(std::span<const int> scores);

/// Index of the first maximal value. Empty input returns -1.
int argmax_first(std::span<const int> scores);

int argmax(std::span<const int> scores, TieBreak rule);

/// Column-sum argmax over the anchor range of ROI rows [n*h, (n+1)*h),
/// shifting the ROI down until the winning sum reaches the threshold.
AnchorResult anchor_scan(const Mask& mask, const ScanConfig& cfg);

/// One pixel per row from p0 to p1 (p0.y <= p1.y), x rounded half up.
std::vector<ImagePoint> rasterize_segment(ImagePoint p0, ImagePoint p1);

/// Begin/cease columns of the bottom-edge search window for anchor column a_x.
std::pair<int, int> compute_bc(int a_x, int extent, const ScanConfig& cfg);

/// Pixel sum along the scan line for candidate bottom column p: the vertical
/// continuation above the anchor ROI plus the segment (a_x, n*h) -> (p, H-1).
int line_score(const Mask& mask, const AnchorResult& anchor, int p);

/// Best bottom-edge point P_r in [B, C]. Requires anchor.valid.
CentralRow line_scan(const Mask& mask, const AnchorResult& anchor, const ScanConfig& cfg);

/// desired_x defaults to W/2.
TrackingError tracking_error(const CentralRow& row, int image_width, std::optional<double> desired_x = {});

/// anchor_scan -> compute_bc -> line_scan -> tracking_error. No detection is
/// reported through Detection::found(), never by throwing.
Detection detect(const Mask& mask, const ScanConfig& cfg, std::optional<double> desired_x = {});

}  // namespace croprow
