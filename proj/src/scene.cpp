#include "cog/scene.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cog/binary_io.hpp"
#include "cog/error.hpp"

namespace cog {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'G', 'S', 'C', 'E', 'N', 'E'};
constexpr std::uint32_t kMaxHeader = 1u << 24;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Block {
  std::string tag;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

std::string header_text(const SceneRecord& s) {
  std::ostringstream h;
  h << "id " << s.id << '\n';
  h << "size " << s.color.width << ' ' << s.color.height << '\n';
  h << "intrinsics " << fmt(s.K.fx) << ' ' << fmt(s.K.fy) << ' ' << fmt(s.K.cx) << ' ' << fmt(s.K.cy) << '\n';
  h << "rotation";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) h << ' ' << fmt(s.pose.rotation(r, c));
  }
  h << "\ntranslation " << fmt(s.pose.translation.x()) << ' ' << fmt(s.pose.translation.y()) << ' '
    << fmt(s.pose.translation.z()) << '\n';
  h << "gravity";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) h << ' ' << fmt(s.gravity(r, c));
  }
  h << "\nlayout " << fmt(s.layout.floor_z) << ' ' << fmt(s.layout.ceil_z) << ' '
    << s.layout.polygon.size();
  for (const auto& p : s.layout.polygon) h << ' ' << fmt(p.x()) << ' ' << fmt(p.y());
  h << '\n';
  for (const auto& o : s.objects) {
    h << "object " << o.category << ' ' << fmt(o.box.center.x()) << ' ' << fmt(o.box.center.y()) << ' '
      << fmt(o.box.center.z()) << ' ' << fmt(o.box.yaw) << ' ' << fmt(o.box.size.x()) << ' '
      << fmt(o.box.size.y()) << ' ' << fmt(o.box.size.z()) << ' ' << o.surface_slice << '\n';
  }
  return h.str();
}

void parse_header(const std::string& text, SceneRecord& s, int& width, int& height) {
  std::istringstream lines(text);
  std::string line;
  bool have_size = false;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string key;
    in >> key;
    if (key == "id") {
      in >> s.id;
    } else if (key == "size") {
      in >> width >> height;
      have_size = true;
    } else if (key == "intrinsics") {
      in >> s.K.fx >> s.K.fy >> s.K.cx >> s.K.cy;
    } else if (key == "rotation") {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) in >> s.pose.rotation(r, c);
      }
    } else if (key == "translation") {
      in >> s.pose.translation.x() >> s.pose.translation.y() >> s.pose.translation.z();
    } else if (key == "gravity") {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) in >> s.gravity(r, c);
      }
    } else if (key == "layout") {
      std::size_t n = 0;
      in >> s.layout.floor_z >> s.layout.ceil_z >> n;
      if (n > 4096) throw Error(ErrorCode::kMalformed, "layout polygon too large");
      s.layout.polygon.resize(n);
      for (auto& p : s.layout.polygon) in >> p.x() >> p.y();
    } else if (key == "object") {
      Annotation a;
      in >> a.category >> a.box.center.x() >> a.box.center.y() >> a.box.center.z() >> a.box.yaw >>
          a.box.size.x() >> a.box.size.y() >> a.box.size.z() >> a.surface_slice;
      s.objects.push_back(a);
    } else {
      throw Error(ErrorCode::kMalformed, "unknown header key '" + key + "'");
    }
    if (in.fail()) throw Error(ErrorCode::kMalformed, "bad header line: " + line);
  }
  if (!have_size) throw Error(ErrorCode::kMalformed, "header lacks image size");
}

}  // namespace

DepthImage Depth16Image::to_meters() const {
  DepthImage d(width, height);
  for (std::size_t i = 0; i < mm.size(); ++i) d.depth[i] = static_cast<float>(mm[i]) / 1000.0f;
  return d;
}

void SceneRecord::validate() const {
  if (color.width != depth.width || color.height != depth.height) {
    throw Error(ErrorCode::kInvalidArgument, "color and depth dimensions differ");
  }
  if (color.width <= 0 || color.height <= 0) throw Error(ErrorCode::kInvalidArgument, "empty image");
  for (const auto& o : objects) {
    o.box.validate();
    if (o.category.empty() || o.category.find_first_of(" \t\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "category names must be non-empty single tokens");
    }
  }
  if (id.empty() || id.find_first_of(" \t\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "scene id must be a non-empty single token");
  }
}

void save_scene(const SceneRecord& scene, const std::filesystem::path& path) {
  scene.validate();
  const std::string header = header_text(scene);
  std::ostringstream rgb, depth;
  rgb.write(reinterpret_cast<const char*>(scene.color.data.data()),
            static_cast<std::streamsize>(scene.color.data.size()));
  for (auto v : scene.depth.mm) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
    depth.write(reinterpret_cast<const char*>(b), 2);
  }
  const std::string blobs[2] = {rgb.str(), depth.str()};
  const char* tags[2] = {"RGB8", "DP16"};
  const std::uint64_t table_start = 8 + 4 + 4 + header.size() + 4;
  std::uint64_t offset = table_start + 2 * (4 + 8 + 8);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kMagic, 8);
  write_u32(out, kSceneVersion);
  write_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_u32(out, 2);
  for (int b = 0; b < 2; ++b) {
    out.write(tags[b], 4);
    write_u64(out, offset);
    write_u64(out, blobs[b].size());
    offset += blobs[b].size();
  }
  for (const auto& blob : blobs) out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

SceneRecord load_scene(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  std::istringstream in(bytes);
  char magic[8];
  read_exact(in, magic, 8);
  if (!std::equal(magic, magic + 8, kMagic)) throw Error(ErrorCode::kMalformed, "not a scene container");
  const std::uint32_t version = read_u32(in);
  if (version != kSceneVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported scene version " + std::to_string(version));
  }
  const std::uint32_t header_len = read_u32(in);
  if (header_len > kMaxHeader) throw Error(ErrorCode::kMalformed, "header too large");
  std::string header(header_len, '\0');
  read_exact(in, header.data(), header_len);
  SceneRecord s;
  int width = 0, height = 0;
  parse_header(header, s, width, height);
  if (width <= 0 || height <= 0 || width > 100000 || height > 100000) {
    throw Error(ErrorCode::kMalformed, "bad image size");
  }
  const std::uint32_t nblocks = read_u32(in);
  if (nblocks > 64) throw Error(ErrorCode::kMalformed, "too many blocks");
  std::vector<Block> blocks(nblocks);
  for (auto& b : blocks) {
    char tag[4];
    read_exact(in, tag, 4);
    b.tag.assign(tag, 4);
    b.offset = read_u64(in);
    b.length = read_u64(in);
    if (b.offset > bytes.size() || b.length > bytes.size() - b.offset) {
      throw Error(ErrorCode::kMalformed, "block extends past end of file");
    }
  }
  const auto pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  bool have_rgb = false, have_depth = false;
  for (const auto& b : blocks) {
    if (b.tag == "RGB8") {
      if (b.length != pixels * 3) throw Error(ErrorCode::kMalformed, "color block size mismatch");
      s.color = RgbImage(width, height);
      std::copy_n(bytes.data() + b.offset, b.length, reinterpret_cast<char*>(s.color.data.data()));
      have_rgb = true;
    } else if (b.tag == "DP16") {
      if (b.length != pixels * 2) throw Error(ErrorCode::kMalformed, "depth block size mismatch");
      s.depth.width = width;
      s.depth.height = height;
      s.depth.mm.resize(pixels);
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + b.offset);
      for (std::size_t i = 0; i < pixels; ++i) {
        s.depth.mm[i] = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
      }
      have_depth = true;
    }
  }
  if (!have_rgb || !have_depth) throw Error(ErrorCode::kMalformed, "missing image blocks");
  // Bring the camera into the gravity-aligned world frame.
  if (!s.gravity.isIdentity(0.0)) {
    s.pose.rotation = s.pose.rotation * s.gravity.transpose();
    s.gravity = Mat3::Identity();
  }
  return s;
}

std::vector<std::filesystem::path> DatasetManifest::split(const std::string& name) const {
  std::vector<std::filesystem::path> out;
  for (const auto& e : entries) {
    if (name.empty() || e.split == name) out.push_back(e.path);
  }
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  DatasetManifest m;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kMalformed, "manifest line lacks a tab: " + line);
    ManifestEntry e;
    e.split = line.substr(0, tab);
    e.path = line.substr(tab + 1);
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    if (!seen.insert(e.path.lexically_normal().string()).second) {
      throw Error(ErrorCode::kMalformed, "duplicate manifest entry " + e.path.string());
    }
    m.entries.push_back(e);
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path,
                   const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest " + path.string());
  for (const auto& h : header) out << "# " << h << '\n';
  for (const auto& e : manifest.entries) out << e.split << '\t' << e.path.generic_string() << '\n';
}

}  // namespace cog
