#pragma once

#include <limits>

#include "croprow/triangle_scan.hpp"

namespace croprow {

/// Proportional row-following law: omega = alpha * (w1 * dtheta + w2 * dp).
///
/// dtheta is in degrees and dp in pixels; the weights carry the units.
/// A positive output steers toward a row that appears right of centre.
struct ControllerConfig {
  double alpha = 0.01;
  double w1 = 0.01;         ///< per degree
  double w2 = 0.25;         ///< per pixel
  double v = 0.2;           ///< forward speed, m/s
  double omega_limit = 1.0; ///< |omega| clamp, rad/s; infinity disables it

  void validate() const;
};

struct ExitConfig {
  double lambda = 0.01;    ///< decay constant, 1/s
  double t_e = 20.0;       ///< manoeuvre duration, s
  double omega_eor = 0.0;  ///< controller output captured at the trigger

  void validate() const;
};

/// Angular velocity command, rad/s.
double steer(const TrackingError& err, const ControllerConfig& cfg);

struct ExitCommand {
  double omega = 0.0;
  bool halt = false;  ///< when set, both angular and linear velocity are zero
};

/// omega_eor * exp(-lambda * t) for t < t_e, halt from t_e on.
ExitCommand exit_omega(double t, const ExitConfig& cfg);

}  // namespace croprow
