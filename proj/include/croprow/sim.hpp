#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "croprow/control.hpp"
#include "croprow/eor.hpp"
#include "croprow/synth_field.hpp"
#include "croprow/triangle_scan.hpp"

namespace croprow {

struct TrialConfig {
  int frames_max = 200;                    ///< cap on row-following frames; exit frames come on top
  double dt = 0.2;                         ///< control period, s
  double initial_heading_range_deg = 20.0; ///< heading drawn uniformly from +-range
  std::optional<double> initial_heading_deg;  ///< overrides the random draw
  double start_x = 0.0;                    ///< along-row start position, m
  double start_y = 0.0;
  int trials = 20;
  std::uint64_t seed = 1;
  int abort_after = 10;                    ///< consecutive no-detection frames that abort a trial
  double eor_beta = 0.8;
  double eps_theta_max = 20.0;             ///< fixed eps normalizers for live scoring
  std::optional<double> eps_p_max;         ///< defaults to W/2
  bool exit_enabled = true;
  bool vary_field_seed = true;             ///< batch trials each get their own field

  void validate() const;
};

/// Unicycle step; theta wrapped to (-pi, pi].
RobotPose step_kinematics(const RobotPose& pose, double v, double omega, double dt);

enum class Phase { Track, Exit, Halt };
const char* phase_name(Phase p);

struct FrameRecord {
  int frame = 0;
  Phase phase = Phase::Track;
  double t = 0.0;            ///< trial time, s
  double t_exit = 0.0;       ///< time since the exit trigger, s
  RobotPose pose;
  bool detected = false;
  AnchorResult anchor;
  std::optional<CentralRow> row;
  TrackingError error;
  GroundTruthRow truth;
  double eps_track = 0.0;    ///< eps of the detected tracking error, fixed normalizers
  double eps_detect = 0.0;   ///< eps of detection against ground truth, fixed normalizers
  double omega = 0.0;        ///< commanded angular velocity (controller sign convention)
  double v = 0.0;
  std::optional<int> eor_measurement;
  std::optional<double> eor_filtered;
  bool eor_triggered = false;
};

struct TrialLog {
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t field_seed = 0;
  double initial_heading_deg = 0.0;
  std::vector<FrameRecord> frames;
  bool exit_executed = false;
  bool aborted = false;
  std::string failure;
  int followed_row = -1;
  double omega_eor = 0.0;
  std::optional<double> halt_time;
  std::optional<double> terminal_heading_deg;       ///< signed, from the row direction
  std::optional<double> terminal_displacement_cm;   ///< signed, left of the row centerline extension

  /// Tracking-phase records only.
  std::vector<const FrameRecord*> tracking() const;
};

struct SimSetup {
  FieldSpec field;
  CameraSpec camera;
  ScanConfig scan;
  ControllerConfig controller;
  ExitConfig exit;
  TrialConfig trial;
};

/// Render -> detect -> score -> steer -> step until the end-of-row trigger,
/// then the timed exit manoeuvre until halt. The commanded yaw rate is
/// -omega: a row seen right of centre turns the robot clockwise.
TrialLog run_trial(const SimSetup& setup, int trial_index = 0);

struct BatchSummary {
  int trials = 0;
  int aborted = 0;
  int exits = 0;
  double mean_start_eps = 0.0;  ///< mean over trials of the first-10-frame eps_track mean
  double mean_end_eps = 0.0;    ///< same over the last 10 tracking frames
  int settled = 0;              ///< trials holding eps_track >= settle_eps from some frame < settle_frames on
  double settle_eps = 0.8;
  int settle_frames = 80;
  double mean_heading_offset_deg = 0.0;  ///< over trials with an exit, absolute values
  double max_heading_offset_deg = 0.0;
  double mean_displacement_cm = 0.0;
  double max_displacement_cm = 0.0;
};

struct BatchResult {
  std::vector<TrialLog> logs;
  BatchSummary summary;
};

/// Per-trial seeds derived from trial.seed; trials run on worker threads and
/// results are stored in trial order.
BatchResult run_batch(const SimSetup& setup, unsigned threads = 0);

/// Mean eps_track over the first (or last) `count` tracking frames.
double window_eps(const TrialLog& log, int count, bool from_end);

/// First tracking frame from which eps_track stays >= threshold, or -1.
int settle_frame(const TrialLog& log, double threshold);

BatchSummary summarize(const std::vector<TrialLog>& logs, double settle_eps = 0.8, int settle_frames = 80);

/// One row per frame; header documented in the README.
std::string trial_csv(const TrialLog& log);

/// Versioned JSON summary of a batch.
std::string summary_json(const BatchResult& batch, const SimSetup& setup);

}  // namespace croprow
