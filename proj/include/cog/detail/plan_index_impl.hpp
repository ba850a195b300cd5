#pragma once

#include <algorithm>
#include <cmath>

namespace cog {

template <typename Fn>
void PlanIndex::for_each_in(const Vec2& lo, const Vec2& hi, Fn&& fn) const {
  if (order_.empty()) return;
  const auto cx0 = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(lo.x() / cell_)) - x0_, 0);
  const auto cy0 = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(lo.y() / cell_)) - y0_, 0);
  const auto cx1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(hi.x() / cell_)) - x0_, nx_ - 1);
  const auto cy1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(hi.y() / cell_)) - y0_, ny_ - 1);
  for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
      const auto id = static_cast<std::size_t>(cy * nx_ + cx);
      for (std::size_t s = start_[id]; s < start_[id + 1]; ++s) fn(order_[s]);
    }
  }
}

}  // namespace cog
