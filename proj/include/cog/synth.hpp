#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cog/scene.hpp"

namespace cog {

struct TextureSpec {
  enum class Kind { kPlain, kStripes, kChecker };
  Kind kind = Kind::kStripes;
  Vec3 color_a{200, 60, 40};
  Vec3 color_b{60, 50, 40};
  double period = 0.1;  // meters
  double angle = 0.0;   // stripe direction on the face, radians
  double phase = 0.0;   // fraction of a period
};

struct SyntheticObject {
  std::string category;
  Vec2 position = Vec2::Zero();  // plan-view centroid
  double yaw = 0.0;
  Vec3 size = Vec3::Ones();
  int surface_slice = 0;   // slice (1..7) of this object's support surface; 0 = none
  std::string style;       // optional shape variant
  bool has_texture = false;
  TextureSpec texture;     // used when has_texture, else a category default
  bool annotate = true;
  std::vector<SyntheticObject> children;  // rest on this object's support surface
};

struct SyntheticSceneSpec {
  std::string id = "scene";
  std::uint64_t seed = 0;
  Vec3 room{6.0, 5.5, 2.6};  // spans [0, W] x [0, D] x [0, H]
  Vec3 camera_position{3.0, 0.4, 1.4};
  double camera_yaw = kPi / 2;
  double camera_pitch = 0.3;
  int width = 160;
  int height = 120;
  double fx = 130.0;
  double fy = 130.0;
  std::vector<SyntheticObject> objects;

  void validate() const;  // InvalidSpec on violations
};

SceneRecord synthesize_scene(const SyntheticSceneSpec& spec);

// Scene families used by the benchmarks and tests: "bedroom", "ablation",
// "context", "planted_height", "single_box".
std::vector<SyntheticSceneSpec> template_scenes(const std::string& name, int count,
                                                std::uint64_t seed);

// Canonical fixed sizes of the synthetic categories.
Vec3 synthetic_size(const std::string& category);

}  // namespace cog
