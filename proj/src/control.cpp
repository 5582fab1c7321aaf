#include "croprow/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace croprow {

void ControllerConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("controller alpha must be positive");
  if (!(w1 >= 0.0 && w2 >= 0.0 && w1 + w2 > 0.0))
    throw std::invalid_argument("controller weights must be non-negative with a positive sum");
  if (!(v > 0.0)) throw std::invalid_argument("controller speed v must be positive");
  if (!(omega_limit > 0.0)) throw std::invalid_argument("controller omega_limit must be positive");
}

void ExitConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("exit lambda must be non-negative");
  if (!(t_e > 0.0)) throw std::invalid_argument("exit t_e must be positive");
  if (!std::isfinite(omega_eor)) throw std::invalid_argument("exit omega_eor must be finite");
}

double steer(const TrackingError& err, const ControllerConfig& cfg) {
  const double omega = cfg.alpha * (cfg.w1 * err.delta_theta + cfg.w2 * err.delta_p);
  return std::clamp(omega, -cfg.omega_limit, cfg.omega_limit);
}

ExitCommand exit_omega(double t, const ExitConfig& cfg) {
  if (t < 0.0) throw std::invalid_argument("exit_omega requires t >= 0");
  if (t >= cfg.t_e) return {0.0, true};
  return {cfg.omega_eor * std::exp(-cfg.lambda * t), false};
}

}  // namespace croprow
