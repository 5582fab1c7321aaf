#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace croprow {

/// Absolute detection errors of one frame plus its field-variation labels.
struct FrameError {
  double delta_theta_abs = 0.0;  ///< degrees
  double delta_p_abs = 0.0;      ///< pixels
  bool failed = false;           ///< no detection: scored at both maxima
  std::vector<std::string> categories;
  std::optional<int> class_id;
};

/// How the per-term normalizers are chosen.
struct EpsilonMode {
  enum class Kind { DatasetMax, Fixed };
  Kind kind = Kind::DatasetMax;
  double theta_max = 20.0;
  double p_max = 256.0;

  static EpsilonMode dataset_max() { return {}; }
  static EpsilonMode fixed(double theta_max, double p_max) { return {Kind::Fixed, theta_max, p_max}; }
  std::string name() const { return kind == Kind::Fixed ? "fixed" : "dataset-max"; }
};

struct EpsilonReport {
  double epsilon = 1.0;
  std::size_t n = 0;
  double theta_max_used = 1.0;
  double p_max_used = 1.0;
  std::string mode;
  std::map<std::string, double> per_category;
  std::map<std::string, double> per_class;
};

/// eps = 1 - sum_i (dtheta_i / theta_max + dp_i / p_max) / (2N).
///
/// Dataset-max mode takes the maxima over successful frames (a zero maximum
/// is replaced by 1). Each normalized term is capped at 1 so eps stays in
/// [0, 1] when fixed normalizers are exceeded. Terms are summed in sorted
/// order, making the result independent of frame order bit for bit.
/// Throws std::invalid_argument on empty input.
EpsilonReport epsilon(const std::vector<FrameError>& frames, const EpsilonMode& mode);

/// Convenience for a single frame in fixed mode.
double frame_epsilon(double delta_theta_abs, double delta_p_abs, double theta_max, double p_max);

struct ClassScore {
  std::string key;
  std::size_t frames = 0;
  double epsilon = 0.0;
  std::vector<std::string> categories;
};

struct CategoryScore {
  std::string category;
  std::size_t classes = 0;
  double epsilon = 0.0;
};

struct CategoryTable {
  EpsilonReport overall;
  std::vector<ClassScore> classes;       ///< sorted by key
  std::vector<CategoryScore> categories; ///< sorted by category
};

/// Class-level eps first (shared dataset normalizers), then the mean of class
/// eps per category. A class counts toward every category any of its frames
/// carries. Frames without class_id are grouped by their label set. In strict
/// mode a frame without category labels is an error; otherwise it only counts
/// toward the overall score.
CategoryTable per_category_report(const std::vector<FrameError>& frames, const EpsilonMode& mode,
                                  bool strict = true);

}  // namespace croprow
