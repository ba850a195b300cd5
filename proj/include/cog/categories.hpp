#pragma once

#include <string>
#include <vector>

#include "cog/descriptors.hpp"

namespace cog {

struct CategoryInfo {
  std::string name;
  VoxelGridSpec grid;
  bool small = false;           // searched on support surfaces, not on the floor
  bool half_circle_yaw = false;  // 16 orientations over [0, pi) instead of [0, 2 pi)
};

const std::vector<CategoryInfo>& known_categories();
// Unknown names get the default large-object settings.
CategoryInfo category_info(const std::string& name);

}  // namespace cog
