#include "croprow/eor.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "croprow/triangle_scan.hpp"

namespace croprow {

std::optional<int> eor_scan(const Mask& mask, int n, int h) {
  if (n < 1) throw std::invalid_argument("eor_scan requires n >= 1");
  if (h < 1) throw std::invalid_argument("eor_scan requires h >= 1");
  const int y0 = std::min((n - 1) * h, mask.height());
  const int y1 = std::min(n * h, mask.height());
  if (y0 >= y1) return std::nullopt;

  std::vector<int> sums;
  sums.reserve(static_cast<std::size_t>(y1 - y0));
  for (int y = y0; y < y1; ++y) sums.push_back(row_sum(mask, y, 0, mask.width()));
  const int best = argmax_first(sums);
  if (sums[static_cast<std::size_t>(best)] == 0) return std::nullopt;
  return y0 + best;
}

EorState update(EorState state, double measurement, int h) {
  if (!state.filtered_y)
    state.filtered_y = measurement;
  else
    state.filtered_y = state.beta * *state.filtered_y + (1.0 - state.beta) * measurement;
  const double y = *state.filtered_y;
  if (y >= 2.0 * h && y < 3.0 * h) state.triggered = true;
  return state;
}

}  // namespace croprow
