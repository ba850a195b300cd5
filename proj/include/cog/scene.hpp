#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cog/geometry.hpp"
#include "cog/layout.hpp"
#include "cog/pointcloud.hpp"

namespace cog {

struct Annotation {
  std::string category;
  OrientedCuboid box;
  int surface_slice = 0;  // planted support-surface slice (1..7), 0 when unknown
};

struct Depth16Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> mm;  // 0 = invalid

  DepthImage to_meters() const;
};

struct SceneRecord {
  std::string id;
  RgbImage color;
  Depth16Image depth;
  CameraIntrinsics K;
  CameraPose pose;                      // world-to-camera, world already gravity aligned
  Mat3 gravity = Mat3::Identity();      // applied to the stored pose at load
  std::vector<Annotation> objects;
  LayoutAnnotation layout;

  void validate() const;
};

inline constexpr std::uint32_t kSceneVersion = 1;

void save_scene(const SceneRecord& scene, const std::filesystem::path& path);
SceneRecord load_scene(const std::filesystem::path& path);

struct ManifestEntry {
  std::string split;  // train, val, or test
  std::filesystem::path path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<std::filesystem::path> split(const std::string& name) const;
};

// Tab-separated "split<TAB>path" lines; relative paths resolve against the manifest directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
// `header` lines are written first, each prefixed with "# ".
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path,
                   const std::vector<std::string>& header = {});

}  // namespace cog
