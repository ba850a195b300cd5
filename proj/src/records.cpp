#include "cog/records.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cog/error.hpp"

namespace cog {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string cuboid_fields(const OrientedCuboid& b) {
  return num(b.center.x()) + "," + num(b.center.y()) + "," + num(b.center.z()) + "," + num(b.yaw) + "," +
         num(b.size.x()) + "," + num(b.size.y()) + "," + num(b.size.z());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kMalformed, "bad number '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::kMalformed, "bad number '" + s + "'");
  return v;
}

OrientedCuboid parse_cuboid(const std::vector<std::string>& f, std::size_t at) {
  OrientedCuboid b;
  b.center = Vec3(parse_double(f[at]), parse_double(f[at + 1]), parse_double(f[at + 2]));
  b.yaw = parse_double(f[at + 3]);
  b.size = Vec3(parse_double(f[at + 4]), parse_double(f[at + 5]), parse_double(f[at + 6]));
  if (!(b.size.minCoeff() > 0.0)) throw Error(ErrorCode::kMalformed, "non-positive cuboid size");
  return b;
}

}  // namespace

std::vector<std::string> Provenance::lines() const {
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(config_digest));
  std::vector<std::string> out = {std::string("tool: cogdet ") + kToolVersion, "command: " + command,
                                  std::string("config-digest: ") + digest, "seed: " + std::to_string(seed)};
  if (!config.empty()) out.push_back("config: " + config);
  return out;
}

void write_provenance(std::ostream& out, const Provenance& p) {
  for (const auto& l : p.lines()) out << "# " << l << '\n';
}

void write_detection_records(std::ostream& out, const Provenance& p, const DetectionRecords& records) {
  write_provenance(out, p);
  for (const auto& c : records.categories) out << "category," << c << '\n';
  for (const auto& s : records.scenes) {
    out << "scene," << s.scene << '\n';
    for (const auto& d : s.detections) {
      out << "detection," << s.scene << ',' << d.category << ',' << cuboid_fields(d.box) << ',' << d.surface << ','
          << num(d.z) << ',' << num(d.z_prime) << ',' << num(d.score()) << '\n';
    }
    if (s.has_layout) out << "layout," << s.scene << ',' << cuboid_fields(s.layout) << ',' << num(s.layout_score) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing detection records");
}

DetectionRecords read_detection_records(std::istream& in) {
  DetectionRecords records;
  auto& out = records.scenes;
  std::map<std::string, std::size_t> index;
  std::string line;
  auto scene = [&](const std::string& id) -> SceneDetections& {
    const auto it = index.find(id);
    if (it != index.end()) return out[it->second];
    index[id] = out.size();
    out.push_back({id, {}, false, {}, 0.0});
    return out.back();
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.empty()) throw Error(ErrorCode::kMalformed, "empty detection record");
    if (f[0] == "category" && f.size() == 2) {
      records.categories.push_back(f[1]);
    } else if (f[0] == "scene" && f.size() == 2) {
      scene(f[1]);
    } else if (f[0] == "detection" && f.size() == 14) {
      Detection d;
      d.category = f[2];
      d.box = parse_cuboid(f, 3);
      d.surface = static_cast<int>(parse_double(f[10]));
      d.z = parse_double(f[11]);
      d.z_prime = parse_double(f[12]);
      scene(f[1]).detections.push_back(d);
    } else if (f[0] == "layout" && f.size() == 10) {
      auto& s = scene(f[1]);
      s.has_layout = true;
      s.layout = parse_cuboid(f, 2);
      s.layout_score = parse_double(f[9]);
    } else {
      throw Error(ErrorCode::kMalformed, "unrecognised detection record: " + line);
    }
  }
  return records;
}

void write_layout_records(std::ostream& out, const std::vector<LayoutCuboid>& layouts,
                          const std::vector<double>& scores) {
  if (layouts.size() != scores.size()) throw Error(ErrorCode::kCountMismatch, "one score per layout needed");
  for (std::size_t i = 0; i < layouts.size(); ++i) out << cuboid_fields(layouts[i]) << ',' << num(scores[i]) << '\n';
}

void write_evaluation_records(std::ostream& out, const Provenance& p, const std::vector<CategoryEvaluation>& evals,
                              const double* layout_mean) {
  write_provenance(out, p);
  for (const auto& e : evals) {
    out << "ap," << e.category << ',' << num(e.ap) << ',' << e.truths << ',' << e.detections << '\n';
  }
  for (const auto& e : evals) {
    for (const auto& pt : e.curve) {
      out << "pr," << e.category << ',' << num(pt.recall) << ',' << num(pt.precision) << ',' << num(pt.score) << '\n';
    }
  }
  if (layout_mean) out << "layout_fsiou," << num(*layout_mean) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing evaluation records");
}

}  // namespace cog
