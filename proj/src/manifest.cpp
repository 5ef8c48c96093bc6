#include "splatgen/manifest.hpp"

#include <json.hpp>

#include <fstream>

#include "splatgen/assets.hpp"

namespace splatgen {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("manifest: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose_json(const CameraPose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(p.rotation(i, k));
  }
  return {{"rotation", r}, {"translation", vec_json(p.translation)}};
}

CameraPose pose_from(const json& j) {
  const json& r = j.at("rotation");
  if (!r.is_array() || r.size() != 9) throw FormatError("manifest: rotation needs 9 values");
  CameraPose p;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) p.rotation(i, k) = r[3 * i + k].get<double>();
  }
  p.translation = vec_from(j.at("translation"));
  // Poses pass through JSON at full double precision; re-check invariants.
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return p;
}

json shape_json(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return {{"type", "sphere"}, {"center", vec_json(s.center)}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, Plane>) {
          return {{"type", "plane"}, {"point", vec_json(s.point)}, {"normal", vec_json(s.normal)}};
        } else {
          return {{"type", "box"}, {"center", vec_json(s.center)},
                  {"half_size", vec_json(s.half_size)}};
        }
      },
      shape);
}

Shape shape_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere") return Sphere{vec_from(j.at("center")), j.at("radius").get<double>()};
  if (type == "plane") return Plane{vec_from(j.at("point")), vec_from(j.at("normal"))};
  if (type == "box") return Box{vec_from(j.at("center")), vec_from(j.at("half_size"))};
  throw FormatError("manifest: unknown primitive type " + type);
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const SceneManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["seed"] = m.seed;
  j["up"] = vec_json(m.up);
  j["background"] = vec_json(m.background);
  j["normalization"] = {{"scale", m.normalization.scale},
                        {"reference", pose_json(m.normalization.reference)}};
  j["views"] = json::array();
  for (const auto& v : m.views) {
    const auto& k = v.camera.intrinsics;
    j["views"].push_back({{"intrinsics",
                           {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
                            {"width", k.width}, {"height", k.height}}},
                          {"pose", pose_json(v.camera.pose)},
                          {"image", v.image},
                          {"pointmap", v.pointmap},
                          {"depth", v.depth},
                          {"role", v.role}});
  }
  j["assets"] = {{"splat", m.splat_asset}};
  j["path"] = {{"kind", m.path.kind}, {"num_views", m.path.num_views}};
  if (m.scene) {
    json prims = json::array();
    for (const auto& p : m.scene->primitives) {
      json pj = shape_json(p.shape);
      pj["albedo"] = vec_json(p.albedo);
      prims.push_back(pj);
    }
    j["scene"] = {{"primitives", prims},
                  {"background", vec_json(m.scene->background)},
                  {"light_direction", vec_json(m.scene->light_direction)}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SceneManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  SceneManifest m;
  try {
    const json j = json::parse(in);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestVersion) {
      throw FormatError("manifest: unsupported format_version " +
                        std::to_string(m.format_version));
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.up = vec_from(j.at("up"));
    m.background = vec_from(j.at("background"));
    m.normalization.scale = j.at("normalization").at("scale").get<double>();
    m.normalization.reference = pose_from(j.at("normalization").at("reference"));
    for (const auto& vj : j.at("views")) {
      ViewRecord v;
      const auto& kj = vj.at("intrinsics");
      auto& k = v.camera.intrinsics;
      k.fx = kj.at("fx").get<double>();
      k.fy = kj.at("fy").get<double>();
      k.cx = kj.at("cx").get<double>();
      k.cy = kj.at("cy").get<double>();
      k.width = kj.at("width").get<int>();
      k.height = kj.at("height").get<int>();
      k.validate();
      v.camera.pose = pose_from(vj.at("pose"));
      v.image = vj.value("image", "");
      v.pointmap = vj.value("pointmap", "");
      v.depth = vj.value("depth", "");
      v.role = vj.value("role", "source");
      m.views.push_back(v);
    }
    m.splat_asset = j.value("assets", json::object()).value("splat", "");
    if (j.contains("path")) {
      m.path.kind = j["path"].value("kind", "circular");
      m.path.num_views = j["path"].value("num_views", 16);
    }
    if (j.contains("scene")) {
      SyntheticScene s;
      s.background = vec_from(j["scene"].at("background"));
      s.light_direction = vec_from(j["scene"].at("light_direction"));
      for (const auto& pj : j["scene"].at("primitives")) {
        s.primitives.push_back({shape_from(pj), vec_from(pj.at("albedo"))});
      }
      s.validate();
      m.scene = std::move(s);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }

  const auto dir = path.parent_path();
  auto require = [&](const std::string& rel) {
    if (!rel.empty() && !std::filesystem::exists(dir / rel)) {
      throw FormatError("manifest: referenced file missing: " + rel);
    }
  };
  for (const auto& v : m.views) {
    require(v.image);
    require(v.pointmap);
    require(v.depth);
  }
  require(m.splat_asset);
  return m;
}

}  // namespace splatgen
