#include "cog/categories.hpp"

namespace cog {

const std::vector<CategoryInfo>& known_categories() {
  static const std::vector<CategoryInfo> table = {
      {"bed", {5, 5, 5}, false, false},     {"nightstand", {5, 5, 5}, false, false},
      {"cabinet", {5, 5, 5}, false, false}, {"chair", {5, 5, 5}, false, false},
      {"sofa", {5, 5, 5}, false, false},    {"table", {5, 5, 5}, false, true},
      {"desk", {5, 5, 5}, false, false},    {"pillow", {3, 3, 3}, true, true},
      {"lamp", {3, 3, 3}, true, true},      {"monitor", {3, 1, 3}, true, false},
      {"tv", {3, 1, 3}, true, false},
  };
  return table;
}

CategoryInfo category_info(const std::string& name) {
  for (const auto& c : known_categories()) {
    if (c.name == name) return c;
  }
  return CategoryInfo{name, {5, 5, 5}, false, false};
}

}  // namespace cog
