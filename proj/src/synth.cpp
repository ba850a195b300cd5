#include "cog/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cog/error.hpp"
#include "cog/random.hpp"

namespace cog {

namespace {

constexpr int kSlices = 7;

using Rng = Random;

struct Part {
  Vec3 lo, hi;  // object-local, relative to the centroid
  int material = 0;
};

struct RenderBox {
  Vec3 center;  // world
  double c = 1.0, s = 0.0;
  Vec3 half;
  Vec3 tex_offset;  // part center in object-local coordinates
  const TextureSpec* texture = nullptr;
};

Vec3 box_size_of(const Part& p) { return p.hi - p.lo; }

std::vector<Part> build_parts(const SyntheticObject& o) {
  const double w = o.size.x(), d = o.size.y(), h = o.size.z();
  const double x0 = -w / 2, x1 = w / 2, y0 = -d / 2, y1 = d / 2, z0 = -h / 2, z1 = h / 2;
  std::vector<Part> parts;
  auto add = [&](double ax, double ay, double az, double bx, double by, double bz, int m) {
    parts.push_back({Vec3(ax, ay, az), Vec3(bx, by, bz), m});
  };
  const std::string& c = o.category;
  if (c == "bed") {
    const int slice = o.surface_slice > 0 ? o.surface_slice : 4;
    const double top = z0 + (slice - 0.5) * h / kSlices;
    add(x0, y0, z0, x1, y1 - 0.08, z0 + 0.25 * h, 1);
    add(x0 + 0.03, y0 + 0.03, z0 + 0.25 * h, x1 - 0.03, y1 - 0.1, top, 0);
    add(x0, y1 - 0.08, z0, x1, y1, z1, 1);
  } else if (c == "nightstand" || c == "cabinet") {
    add(x0 + 0.03, y0 + 0.03, z0, x1 - 0.03, y1 - 0.03, z0 + 0.06, 1);
    add(x0, y0, z0 + 0.06, x1, y1, z1, 0);
  } else if (c == "chair") {
    const double seat = z0 + 0.5 * h;
    const double leg = 0.05;
    add(x0, y0, seat - 0.05, x1, y1, seat, 0);
    add(x0, y1 - 0.06, seat, x1, y1, z1, 0);
    for (int k = 0; k < 4; ++k) {
      const double lx = (k & 1) ? x1 - leg : x0;
      const double ly = (k & 2) ? y1 - leg : y0;
      add(lx, ly, z0, lx + leg, ly + leg, seat - 0.05, 1);
    }
  } else if (c == "sofa") {
    const double arm = 0.15, back = 0.2;
    add(x0 + arm, y0, z0, x1 - arm, y1 - back, z0 + 0.25, 1);
    const int sections = std::max(1, static_cast<int>(std::round((w - 2 * arm) / 0.6)));
    const double sec = (w - 2 * arm) / sections;
    for (int k = 0; k < sections; ++k) {
      const double a = x0 + arm + k * sec;
      add(a + 0.01, y0, z0 + 0.25, a + sec - 0.01, y1 - back, z0 + 0.47, 0);
    }
    add(x0, y1 - back, z0, x1, y1, z1, 0);
    add(x0, y0, z0, x0 + arm, y1 - back, z0 + 0.62, 1);
    add(x1 - arm, y0, z0, x1, y1 - back, z0 + 0.62, 1);
  } else if (c == "table") {
    const double leg = 0.06;
    add(x0, y0, z1 - 0.04, x1, y1, z1, 0);
    for (int k = 0; k < 4; ++k) {
      const double lx = (k & 1) ? x1 - leg : x0;
      const double ly = (k & 2) ? y1 - leg : y0;
      add(lx, ly, z0, lx + leg, ly + leg, z1 - 0.04, 1);
    }
  } else if (c == "desk") {
    const int slice = o.surface_slice > 0 ? o.surface_slice : 4;
    const double top = z0 + (slice - 0.5) * h / kSlices;
    add(x0, y0, z0, x0 + 0.04, y1, z1, 1);
    add(x1 - 0.04, y0, z0, x1, y1, z1, 1);
    add(x0 + 0.04, y0, top - 0.04, x1 - 0.04, y1, top, 0);
  } else if (c == "lamp") {
    add(-0.4 * w, -0.4 * d, z0, 0.4 * w, 0.4 * d, z0 + 0.05, 1);
    add(-0.03, -0.03, z0 + 0.05, 0.03, 0.03, z0 + 0.6 * h, 1);
    add(x0, y0, z0 + 0.6 * h, x1, y1, z1, 0);
  } else if (c == "monitor" || c == "tv") {
    add(x0, y0, z0 + 0.2 * h, x1, y0 + 0.03, z1, 0);
    add(-0.1 * w, y0 + 0.03, z0, 0.1 * w, y1, z0 + 0.2 * h, 1);
  } else {
    add(x0, y0, z0, x1, y1, z1, 0);
  }
  return parts;
}

TextureSpec default_texture(const std::string& c) {
  TextureSpec t;
  using K = TextureSpec::Kind;
  if (c == "bed") {
    t = {K::kStripes, {70, 90, 170}, {200, 200, 225}, 0.15, 0.0, 0.0};
  } else if (c == "nightstand") {
    t = {K::kStripes, {170, 115, 65}, {85, 55, 30}, 0.18, kPi / 2, 0.0};
  } else if (c == "cabinet") {
    t = {K::kChecker, {125, 135, 145}, {55, 65, 75}, 0.12, 0.0, 0.0};
  } else if (c == "chair" || c == "sofa") {
    t = {K::kStripes, {165, 60, 60}, {90, 30, 30}, 0.1, kPi / 4, 0.0};
  } else if (c == "table" || c == "desk") {
    t = {K::kStripes, {175, 125, 75}, {125, 85, 50}, 0.05, 0.0, 0.0};
  } else if (c == "pillow") {
    t = {K::kChecker, {235, 230, 200}, {170, 160, 130}, 0.08, 0.0, 0.0};
  } else if (c == "lamp") {
    t = {K::kPlain, {240, 220, 150}, {240, 220, 150}, 1.0, 0.0, 0.0};
  } else if (c == "monitor" || c == "tv") {
    t = {K::kStripes, {30, 30, 35}, {70, 70, 80}, 0.3, 0.0, 0.0};
  } else {
    t = {K::kStripes, {150, 150, 150}, {90, 90, 90}, 0.1, 0.0, 0.0};
  }
  return t;
}

const TextureSpec& secondary_texture() {
  static const TextureSpec t{TextureSpec::Kind::kPlain, {80, 55, 35}, {80, 55, 35}, 1.0, 0.0, 0.0};
  return t;
}

Vec3 texture_color(const TextureSpec& t, double s, double u) {
  switch (t.kind) {
    case TextureSpec::Kind::kPlain:
      return t.color_a;
    case TextureSpec::Kind::kStripes: {
      const double v = (s * std::cos(t.angle) + u * std::sin(t.angle)) / t.period + t.phase;
      return (v - std::floor(v)) < 0.5 ? t.color_a : t.color_b;
    }
    case TextureSpec::Kind::kChecker: {
      const auto a = static_cast<long>(std::floor(s / t.period + t.phase));
      const auto b = static_cast<long>(std::floor(u / t.period + t.phase));
      return ((a + b) & 1) == 0 ? t.color_a : t.color_b;
    }
  }
  return t.color_a;
}

// Texture coordinates on the face whose normal is along `axis`.
void face_coords(const Vec3& p, int axis, double& s, double& u) {
  if (axis == 0) {
    s = p.y();
    u = p.z();
  } else if (axis == 1) {
    s = p.x();
    u = p.z();
  } else {
    s = p.x();
    u = p.y();
  }
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal = Vec3::Zero();
  Vec3 color = Vec3::Zero();
};

void intersect_box(const RenderBox& b, const Vec3& origin, const Vec3& dir, Hit& best) {
  const Vec3 rel = origin - b.center;
  const Vec3 o(b.c * rel.x() + b.s * rel.y(), -b.s * rel.x() + b.c * rel.y(), rel.z());
  const Vec3 d(b.c * dir.x() + b.s * dir.y(), -b.s * dir.x() + b.c * dir.y(), dir.z());
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = -1;
  double sign = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d(a)) < 1e-15) {
      if (o(a) < -b.half(a) || o(a) > b.half(a)) return;
      continue;
    }
    double t1 = (-b.half(a) - o(a)) / d(a);
    double t2 = (b.half(a) - o(a)) / d(a);
    double s1 = -1.0;
    if (t1 > t2) {
      std::swap(t1, t2);
      s1 = 1.0;
    }
    if (t1 > t_near) {
      t_near = t1;
      axis = a;
      sign = s1;
    }
    t_far = std::min(t_far, t2);
  }
  if (axis < 0 || t_near > t_far || t_near <= 1e-9 || t_near >= best.t) return;
  best.t = t_near;
  Vec3 nl = Vec3::Zero();
  nl(axis) = sign;
  best.normal = Vec3(b.c * nl.x() - b.s * nl.y(), b.s * nl.x() + b.c * nl.y(), nl.z());
  const Vec3 p = o + t_near * d + b.tex_offset;
  double s, u;
  face_coords(p, axis, s, u);
  best.color = texture_color(*b.texture, s, u);
}

void validate_object(const SyntheticObject& o, const Vec3& room, const OrientedCuboid* parent) {
  if (o.category.empty() || o.category.find_first_of(" \t\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidSpec, "object category must be a non-empty token");
  }
  if (!(o.size.x() > 0 && o.size.y() > 0 && o.size.z() > 0)) {
    throw Error(ErrorCode::kInvalidSpec, "object sizes must be positive");
  }
  if (o.surface_slice < 0 || o.surface_slice > kSlices) {
    throw Error(ErrorCode::kInvalidSpec, "surface slice must be in 0..7");
  }
  if (o.has_texture && !(o.texture.period > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "texture period must be positive");
  }
  OrientedCuboid box;
  box.center = Vec3(o.position.x(), o.position.y(), 0.5 * o.size.z());
  box.yaw = o.yaw;
  box.size = o.size;
  for (const auto& v : plan_view_footprint(box).vertices) {
    if (v.x() < -1e-9 || v.y() < -1e-9 || v.x() > room.x() + 1e-9 || v.y() > room.y() + 1e-9) {
      throw Error(ErrorCode::kInvalidSpec, "object '" + o.category + "' leaves the room");
    }
  }
  if (parent) {
    if (!plan_view_footprint(*parent).contains(o.position)) {
      throw Error(ErrorCode::kInvalidSpec, "child object is not above its supporter");
    }
  }
  if (!o.children.empty() && o.surface_slice == 0) {
    throw Error(ErrorCode::kInvalidSpec, "objects with children need a surface slice");
  }
}

struct Placed {
  const SyntheticObject* object;
  OrientedCuboid box;
  TextureSpec texture;
};

void place_recursive(const SyntheticObject& o, double base_z, std::vector<Placed>& out,
                     std::uint64_t seed, std::size_t& counter) {
  Placed p;
  p.object = &o;
  p.box.center = Vec3(o.position.x(), o.position.y(), base_z + 0.5 * o.size.z());
  p.box.yaw = o.yaw;
  p.box.size = o.size;
  p.texture = o.has_texture ? o.texture : default_texture(o.category);
  if (!o.has_texture) {
    Rng rng(seed * 1000003ULL + counter);
    p.texture.phase = rng.uniform();
    const Vec3 jitter(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
    p.texture.color_a += jitter;
    p.texture.color_b += jitter;
  }
  ++counter;
  out.push_back(p);
  const OrientedCuboid parent = p.box;
  for (const auto& child : o.children) {
    place_recursive(child, support_surface_z(parent.bottom(), parent.size.z(), o.surface_slice), out,
                    seed, counter);
  }
}

}  // namespace

Vec3 synthetic_size(const std::string& c) {
  if (c == "bed") return {1.5, 2.0, 1.0};
  if (c == "nightstand" || c == "cabinet") return {0.5, 0.5, 0.6};
  if (c == "chair") return {0.5, 0.5, 0.9};
  if (c == "sofa") return {2.1, 0.9, 0.85};
  if (c == "table") return {1.2, 0.8, 0.75};
  if (c == "desk") return {1.2, 0.6, 1.0};
  if (c == "pillow") return {0.5, 0.35, 0.15};
  if (c == "lamp") return {0.3, 0.3, 0.5};
  if (c == "monitor") return {0.55, 0.15, 0.45};
  if (c == "tv") return {1.0, 0.2, 0.65};
  return {0.5, 0.5, 0.5};
}

void SyntheticSceneSpec::validate() const {
  if (!(room.x() > 0 && room.y() > 0 && room.z() > 0)) {
    throw Error(ErrorCode::kInvalidSpec, "room dimensions must be positive");
  }
  if (width < 3 || height < 3 || !(fx > 0) || !(fy > 0)) {
    throw Error(ErrorCode::kInvalidSpec, "image must be at least 3x3 with positive focal lengths");
  }
  const Vec3& c = camera_position;
  if (!(c.x() > 0 && c.y() > 0 && c.z() > 0 && c.x() < room.x() && c.y() < room.y() && c.z() < room.z())) {
    throw Error(ErrorCode::kInvalidSpec, "camera must be inside the room");
  }
  if (id.empty() || id.find_first_of(" \t\n/") != std::string::npos) {
    throw Error(ErrorCode::kInvalidSpec, "scene id must be a non-empty token without '/'");
  }
  for (const auto& o : objects) {
    validate_object(o, room, nullptr);
    if (o.size.z() > room.z()) throw Error(ErrorCode::kInvalidSpec, "object taller than the room");
    OrientedCuboid pb;
    pb.center = Vec3(o.position.x(), o.position.y(), 0.5 * o.size.z());
    pb.yaw = o.yaw;
    pb.size = o.size;
    for (const auto& ch : o.children) {
      validate_object(ch, room, &pb);
      if (!ch.children.empty()) throw Error(ErrorCode::kInvalidSpec, "nested children are not supported");
    }
  }
}

SceneRecord synthesize_scene(const SyntheticSceneSpec& spec) {
  spec.validate();
  SceneRecord rec;
  rec.id = spec.id;
  rec.K = CameraIntrinsics{spec.fx, spec.fy, (spec.width - 1) / 2.0, (spec.height - 1) / 2.0};
  rec.pose = CameraPose::look(spec.camera_position, spec.camera_yaw, spec.camera_pitch);
  rec.color = RgbImage(spec.width, spec.height);
  rec.depth.width = spec.width;
  rec.depth.height = spec.height;
  rec.depth.mm.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
  const double W = spec.room.x(), D = spec.room.y(), H = spec.room.z();
  rec.layout.polygon = {Vec2(0, 0), Vec2(W, 0), Vec2(W, D), Vec2(0, D)};
  rec.layout.floor_z = 0.0;
  rec.layout.ceil_z = H;

  std::vector<Placed> placed;
  std::size_t counter = 0;
  for (const auto& o : spec.objects) place_recursive(o, 0.0, placed, spec.seed, counter);

  std::vector<RenderBox> boxes;
  for (const auto& p : placed) {
    if (p.object->annotate) rec.objects.push_back({p.object->category, p.box, p.object->surface_slice});
    for (const auto& part : build_parts(*p.object)) {
      RenderBox rb;
      const Vec3 mid = 0.5 * (part.lo + part.hi);
      rb.center = p.box.to_world(mid);
      rb.c = std::cos(p.box.yaw);
      rb.s = std::sin(p.box.yaw);
      rb.half = 0.5 * box_size_of(part);
      rb.tex_offset = mid;
      rb.texture = part.material == 0 ? &p.texture : &secondary_texture();
      boxes.push_back(rb);
    }
  }

  Rng rng(spec.seed);
  const TextureSpec floor_tex{TextureSpec::Kind::kChecker, {150, 140, 120}, {120, 110, 95}, 0.5,
                              0.0, rng.uniform()};
  const TextureSpec wall_tex{TextureSpec::Kind::kStripes, {205, 200, 190}, {190, 185, 175}, 0.4,
                             0.0, rng.uniform()};
  const TextureSpec ceil_tex{TextureSpec::Kind::kPlain, {225, 225, 225}, {225, 225, 225}, 1.0, 0.0, 0.0};
  const Vec3 light = Vec3(0.4, -0.3, 1.0).normalized();
  const Vec3 origin = spec.camera_position;
  const Mat3 rt = rec.pose.rotation.transpose();

  const auto trace = [&](const Vec3& dir) {
    Hit hit;
    // Room interior: the exit face of the axis-aligned room box.
    for (int a = 0; a < 3; ++a) {
      if (std::abs(dir(a)) < 1e-15) continue;
      const double bound = dir(a) > 0 ? spec.room(a) : 0.0;
      const double t = (bound - origin(a)) / dir(a);
      if (t > 1e-9 && t < hit.t) {
        hit.t = t;
        hit.normal = Vec3::Zero();
        hit.normal(a) = dir(a) > 0 ? -1.0 : 1.0;
        const Vec3 p = origin + t * dir;
        double s, u;
        face_coords(p, a, s, u);
        const TextureSpec& tex = a == 2 ? (dir(a) > 0 ? ceil_tex : floor_tex) : wall_tex;
        hit.color = texture_color(tex, s, u);
      }
    }
    for (const auto& b : boxes) intersect_box(b, origin, dir, hit);
    return hit;
  };
  const auto shaded = [&](const Hit& hit, const Vec3& dir) -> Vec3 {
    const double shade = 0.35 + 0.45 * std::max(0.0, hit.normal.dot(light)) +
                         0.2 * std::max(0.0, -hit.normal.dot(dir.normalized()));
    return hit.color * shade;
  };
  const auto ray = [&](double u, double v) -> Vec3 {
    return rt * Vec3((u - rec.K.cx) / rec.K.fx, (v - rec.K.cy) / rec.K.fy, 1.0);
  };

  // Depth comes from the pixel-centre ray; colour is averaged over a 3x3
  // subpixel grid so texture edges carry their true orientation.
  constexpr int kSub = 3;
  for (int r = 0; r < spec.height; ++r) {
    for (int col = 0; col < spec.width; ++col) {
      const auto idx = static_cast<std::size_t>(r) * spec.width + col;
      const Vec3 centre = ray(col, r);
      const double mm = std::round(trace(centre).t * 1000.0);
      rec.depth.mm[idx] = (std::isfinite(mm) && mm > 0 && mm <= 65535) ? static_cast<std::uint16_t>(mm) : 0;
      Vec3 color = Vec3::Zero();
      for (int sv = 0; sv < kSub; ++sv) {
        for (int su = 0; su < kSub; ++su) {
          const Vec3 dir = ray(col + (su + 0.5) / kSub - 0.5, r + (sv + 0.5) / kSub - 0.5);
          color += shaded(trace(dir), dir);
        }
      }
      color /= kSub * kSub;
      for (int ch = 0; ch < 3; ++ch) {
        rec.color.at(r, col, ch) = static_cast<std::uint8_t>(std::clamp(std::round(color(ch)), 0.0, 255.0));
      }
    }
  }
  return rec;
}

namespace {

OrientedCuboid footprint_box(const SyntheticObject& o, double margin) {
  OrientedCuboid b;
  b.center = Vec3(o.position.x(), o.position.y(), 0.5 * o.size.z());
  b.yaw = o.yaw;
  b.size = o.size + Vec3(2 * margin, 2 * margin, 0.0);
  return b;
}

bool fits(const SyntheticObject& o, const std::vector<SyntheticObject>& placed, const Vec3& room,
          double margin = 0.05) {
  const auto fp = plan_view_footprint(footprint_box(o, 0.0));
  for (const auto& v : fp.vertices) {
    if (v.x() < 0.0 || v.y() < 0.0 || v.x() > room.x() || v.y() > room.y()) return false;
  }
  for (const auto& p : placed) {
    if (footprint_overlap_area(footprint_box(o, margin), footprint_box(p, 0.0)) > 1e-9) return false;
  }
  return true;
}

double lattice(double v) { return std::round(v * 4.0) / 4.0; }

SyntheticObject make(const std::string& cat, double x, double y, double yaw) {
  SyntheticObject o;
  o.category = cat;
  o.position = Vec2(x, y);
  o.yaw = yaw;
  o.size = synthetic_size(cat);
  return o;
}

// Places `o` at a random lattice position and yaw inside the visible floor area.
bool place_random(SyntheticObject o, std::vector<SyntheticObject>& objs, const Vec3& room, Rng& rng,
                  double y_min, double y_max, bool random_yaw = true, double x_half_range = 1.75) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    o.position = Vec2(lattice(rng.uniform(room.x() / 2 - x_half_range, room.x() / 2 + x_half_range)),
                      lattice(rng.uniform(y_min, y_max)));
    if (random_yaw) o.yaw = rng.integer(0, 15) * kPi / 8;
    if (fits(o, objs, room)) {
      objs.push_back(o);
      return true;
    }
  }
  return false;
}

SyntheticSceneSpec base_room(const std::string& name, int index, Rng& rng, std::uint64_t seed) {
  SyntheticSceneSpec s;
  char id[64];
  std::snprintf(id, sizeof id, "%s_%04d", name.c_str(), index);
  s.id = id;
  s.seed = seed * 7919ULL + static_cast<std::uint64_t>(index);
  s.room = Vec3(rng.chance(0.5) ? 5.5 : 6.0, rng.chance(0.5) ? 5.0 : 5.5, 2.6);
  s.camera_position = Vec3(s.room.x() / 2 + rng.uniform(-0.4, 0.4), 0.35, rng.uniform(1.3, 1.5));
  s.camera_yaw = kPi / 2 + rng.uniform(-0.2, 0.2);
  s.camera_pitch = rng.uniform(0.32, 0.4);
  return s;
}

SyntheticObject bed_with_pillows(const Vec3& room, Rng& rng) {
  SyntheticObject bed = make("bed", lattice(room.x() / 2 + rng.integer(-2, 2) * 0.25), room.y() - 1.0, 0.0);
  bed.surface_slice = 4;
  const int pillows = rng.integer(1, 2);
  for (int k = 0; k < pillows; ++k) {
    const double lx = pillows == 1 ? rng.uniform(-0.3, 0.3) : (k == 0 ? -0.37 : 0.37);
    SyntheticObject p = make("pillow", bed.position.x() + lx, bed.position.y() + rng.uniform(0.5, 0.65),
                             rng.chance(0.8) ? 0.0 : kPi / 2);
    bed.children.push_back(p);
  }
  return bed;
}

}  // namespace

std::vector<SyntheticSceneSpec> template_scenes(const std::string& name, int count, std::uint64_t seed) {
  if (count < 0) throw Error(ErrorCode::kInvalidSpec, "scene count must be non-negative");
  std::vector<SyntheticSceneSpec> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(seed * 1315423911ULL + static_cast<std::uint64_t>(i) * 2654435761ULL + 17);
    SyntheticSceneSpec s = base_room(name, i, rng, seed);
    auto& objs = s.objects;
    const Vec3 room = s.room;
    if (name == "bedroom" || name == "ablation") {
      SyntheticObject bed = bed_with_pillows(room, rng);
      objs.push_back(bed);
      const int sides = rng.integer(1, 3);  // 1: left, 2: right, 3: both
      for (int side = 0; side < 2; ++side) {
        if (!((sides >> side) & 1)) continue;
        const double x = bed.position.x() + (side == 0 ? -1.0 : 1.0);
        SyntheticObject n = make("nightstand", x, room.y() - 0.25, 0.0);
        if (fits(n, objs, room, 0.0)) objs.push_back(n);
      }
      if (name == "ablation") {
        // Same texture as a nightstand but away from the bed, and a same-shape cabinet.
        SyntheticObject a = make("cabinet", 0, 0, 0);
        a.has_texture = true;
        a.texture = default_texture("nightstand");
        a.texture.phase = rng.uniform();
        place_random(a, objs, room, rng, 1.75, room.y() - 2.5);
        SyntheticObject b = make("cabinet", 0, 0, 0);
        place_random(b, objs, room, rng, 1.75, room.y() - 2.5);
      } else {
        if (rng.chance(0.5)) place_random(make("chair", 0, 0, 0), objs, room, rng, 1.75, room.y() - 2.5);
        if (rng.chance(0.3)) place_random(make("cabinet", 0, 0, 0), objs, room, rng, 1.75, room.y() - 2.5);
      }
    } else if (name == "context") {
      SyntheticObject sofa = make("sofa", lattice(room.x() / 2 + rng.integer(-2, 2) * 0.25), room.y() - 0.5, 0.0);
      objs.push_back(sofa);
      const int chairs = rng.integer(1, 2);
      for (int k = 0; k < chairs; ++k) {
        place_random(make("chair", 0, 0, 0), objs, room, rng, 1.75, room.y() - 1.5);
      }
      if (rng.chance(0.5)) place_random(make("table", 0, 0, 0), objs, room, rng, 1.75, room.y() - 1.5);
    } else if (name == "planted_height") {
      // One unoccluded desk near the optical axis so its board is always in view.
      SyntheticObject d = make("desk", 0, 0, 0);
      d.surface_slice = rng.chance(0.5) ? 4 : 6;
      place_random(d, objs, room, rng, 3.0, room.y() - 0.5, false, 0.5);
      if (!objs.empty()) {
        objs.back().yaw = rng.integer(-2, 2) * kPi / 8;
        if (!fits(objs.back(), {}, room)) objs.back().yaw = 0.0;
      }
    } else if (name == "single_box") {
      objs.push_back(make("nightstand", lattice(room.x() / 2), lattice(room.y() / 2), 0.0));
    } else {
      throw Error(ErrorCode::kInvalidSpec, "unknown scene template '" + name + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cog
