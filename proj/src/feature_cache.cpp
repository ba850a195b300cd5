#include "cog/feature_cache.hpp"

#include <bit>
#include <fstream>
#include <vector>

#include "cog/binary_io.hpp"
#include "cog/error.hpp"

namespace cog {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'G', 'F', 'C', 'A', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

// Payload order of one entry: density, normals, cog, view.
std::size_t payload_length(const CuboidFeatures& f) {
  return f.density.size() + f.normals.size() + f.cog.size() + f.view.size();
}

}  // namespace

std::uint64_t cuboid_hash(const OrientedCuboid& box) {
  std::string bytes;
  for (double v : {box.center.x(), box.center.y(), box.center.z(), box.yaw, box.size.x(), box.size.y(), box.size.z()}) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>(u >> (8 * i)));
  }
  return fnv1a(bytes);
}

void FeatureCache::put(const std::string& scene, const OrientedCuboid& box, const CuboidFeatures& features) {
  entries_[{scene, cuboid_hash(box), features.grid, features.pad}] = features;
}

const CuboidFeatures* FeatureCache::find(const std::string& scene, const OrientedCuboid& box,
                                         const VoxelGridSpec& grid, int pad) const {
  const auto it = entries_.find({scene, cuboid_hash(box), grid, pad});
  return it == entries_.end() ? nullptr : &it->second;
}

void FeatureCache::write(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u64(out, entries_.size());
  std::uint64_t offset = 0;
  for (const auto& [key, f] : entries_) {
    write_string(out, key.scene);
    write_u64(out, key.cuboid);
    write_u32(out, static_cast<std::uint32_t>(key.grid.nx));
    write_u32(out, static_cast<std::uint32_t>(key.grid.ny));
    write_u32(out, static_cast<std::uint32_t>(key.grid.nz));
    write_u32(out, static_cast<std::uint32_t>(key.pad));
    write_u32(out, static_cast<std::uint32_t>(f.flagged_voxels));
    write_u32(out, f.view_degenerate ? 1 : 0);
    write_u64(out, offset);
    write_u64(out, payload_length(f));
    offset += payload_length(f);
  }
  for (const auto& [key, f] : entries_) {
    for (const auto* block : {&f.density, &f.normals, &f.cog}) {
      for (double v : *block) write_f32(out, static_cast<float>(v));
    }
    for (double v : f.view) write_f32(out, static_cast<float>(v));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing feature cache");
}

FeatureCache FeatureCache::read(std::istream& in) {
  char magic[8];
  read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw Error(ErrorCode::kMalformed, "not a feature cache");
  if (read_u32(in) != kVersion) throw Error(ErrorCode::kVersionMismatch, "unsupported feature cache version");
  const std::uint64_t n = read_u64(in);
  if (n > (1u << 24)) throw Error(ErrorCode::kMalformed, "feature cache entry count out of range");
  struct Row {
    FeatureCacheKey key;
    int flagged;
    bool degenerate;
    std::uint64_t offset, length;
  };
  std::vector<Row> table;
  std::uint64_t expected = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    Row r;
    r.key.scene = read_string(in);
    r.key.cuboid = read_u64(in);
    r.key.grid.nx = static_cast<int>(read_u32(in));
    r.key.grid.ny = static_cast<int>(read_u32(in));
    r.key.grid.nz = static_cast<int>(read_u32(in));
    r.key.pad = static_cast<int>(read_u32(in));
    r.flagged = static_cast<int>(read_u32(in));
    r.degenerate = read_u32(in) != 0;
    r.offset = read_u64(in);
    r.length = read_u64(in);
    try {
      r.key.grid.validate();
    } catch (const Error&) {
      throw Error(ErrorCode::kMalformed, "bad grid in feature cache");
    }
    if (r.key.pad < 0 || r.key.pad > 8) throw Error(ErrorCode::kMalformed, "bad padding in feature cache");
    const auto voxels = static_cast<std::uint64_t>((r.key.grid.nx + 2 * r.key.pad) * (r.key.grid.ny + 2 * r.key.pad) *
                                                   (r.key.grid.nz + 2 * r.key.pad));
    if (r.offset != expected || r.length != voxels * (1 + kNormalBins + kCogBins) + kViewBins) {
      throw Error(ErrorCode::kMalformed, "inconsistent feature cache block table");
    }
    expected += r.length;
    table.push_back(std::move(r));
  }
  FeatureCache cache;
  for (const auto& r : table) {
    CuboidFeatures f;
    f.grid = r.key.grid;
    f.pad = r.key.pad;
    f.flagged_voxels = r.flagged;
    f.view_degenerate = r.degenerate;
    const std::size_t voxels = (r.length - kViewBins) / (1 + kNormalBins + kCogBins);
    f.density.resize(voxels);
    f.normals.resize(voxels * kNormalBins);
    f.cog.resize(voxels * kCogBins);
    for (auto* block : {&f.density, &f.normals, &f.cog}) {
      for (auto& v : *block) v = read_f32(in);
    }
    for (auto& v : f.view) v = read_f32(in);
    cache.entries_[r.key] = std::move(f);
  }
  return cache;
}

void FeatureCache::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

FeatureCache FeatureCache::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open feature cache " + path.string());
  return read(in);
}

}  // namespace cog
