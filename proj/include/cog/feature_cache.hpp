#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>

#include "cog/descriptors.hpp"

namespace cog {

// Hash of a cuboid's exact parameters (bit patterns of centre, yaw and size).
std::uint64_t cuboid_hash(const OrientedCuboid& box);

struct FeatureCacheKey {
  std::string scene;
  std::uint64_t cuboid = 0;
  VoxelGridSpec grid;
  int pad = 0;

  auto tie() const { return std::tie(scene, cuboid, grid.nx, grid.ny, grid.nz, pad); }
  bool operator<(const FeatureCacheKey& o) const { return tie() < o.tie(); }
};

// Cuboid features keyed by (scene, cuboid, grid). On disk: an 8-byte magic, a
// version, a block table (key plus offset and length of each block) and the
// little-endian float32 payload. Values round-trip at float precision.
class FeatureCache {
 public:
  void put(const std::string& scene, const OrientedCuboid& box, const CuboidFeatures& features);
  const CuboidFeatures* find(const std::string& scene, const OrientedCuboid& box, const VoxelGridSpec& grid,
                             int pad) const;
  std::size_t size() const { return entries_.size(); }

  void write(std::ostream& out) const;
  static FeatureCache read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static FeatureCache load(const std::filesystem::path& path);

 private:
  std::map<FeatureCacheKey, CuboidFeatures> entries_;
};

}  // namespace cog
