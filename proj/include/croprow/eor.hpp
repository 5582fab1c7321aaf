#pragma once

#include <optional>

#include "croprow/mask.hpp"

namespace croprow {

/// Filtered end-of-row estimate. Reset by assigning a fresh EorState.
struct EorState {
  std::optional<double> filtered_y;
  double beta = 0.8;   ///< weight on the previous estimate
  bool triggered = false;
  int last_n = 0;
};

/// Row-sum argmax over ROI rows [(n-1)h, nh), ties to the smallest row.
/// Returns nullopt when every row in the ROI is empty. Requires n >= 1.
std::optional<int> eor_scan(const Mask& mask, int n, int h);

/// Complementary filter step. The trigger latches once the filtered value
/// falls inside [2h, 3h).
EorState update(EorState state, double measurement, int h);

}  // namespace croprow
