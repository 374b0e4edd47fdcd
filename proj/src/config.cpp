#include "symlight/config.hpp"

#include <fstream>
#include <initializer_list>
#include <numbers>

#include "symlight/image_io.hpp"

namespace symlight {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
}

void reject_unknown(const Json& j, const std::string& what, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(what + ": unknown key '" + key + "'");
  }
}

const Json& required(const Json& j, const std::string& what, const char* key) {
  if (!j.contains(key)) throw ConfigError(what + ": missing key '" + key + "'");
  return j.at(key);
}

double number(const Json& v, const std::string& what, const std::string& key) {
  if (!v.is_number()) throw ConfigError(what + ": key '" + key + "' must be a number");
  return v.get<double>();
}

int integer(const Json& v, const std::string& what, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(what + ": key '" + key + "' must be an integer");
  return v.get<int>();
}

std::string text(const Json& v, const std::string& what, const std::string& key) {
  if (!v.is_string()) throw ConfigError(what + ": key '" + key + "' must be a string");
  return v.get<std::string>();
}

Vector3<double> vec3(const Json& v, const std::string& what, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(what + ": key '" + key + "' must be an array of 3 numbers");
  return {number(v[0], what, key), number(v[1], what, key), number(v[2], what, key)};
}

Json vec3_json(const Vector3<double>& v) { return Json::array({v.x(), v.y(), v.z()}); }

template <typename F>
auto rethrow_as_config(const std::string& what, F f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

SymmetricRig<double> rig_from_json(const Json& j) {
  const std::string what = "rig";
  require_object(j, what);
  reject_unknown(j, what, {"pairs", "offset_mode", "absolute_radius", "offset_truth"});

  SymmetricRig<double> rig;
  const Json& pairs = required(j, what, "pairs");
  if (!pairs.is_array()) throw ConfigError("rig: key 'pairs' must be an array");
  for (const Json& p : pairs) {
    require_object(p, "rig pair");
    reject_unknown(p, "rig pair", {"radius_ratio", "angle_deg"});
    SymmetricPair<double> pair;
    pair.radius_ratio = number(required(p, "rig pair", "radius_ratio"), "rig pair", "radius_ratio");
    pair.angle = number(required(p, "rig pair", "angle_deg"), "rig pair", "angle_deg") * kDeg;
    rig.pairs.push_back(pair);
  }

  const std::string mode = text(required(j, what, "offset_mode"), what, "offset_mode");
  if (mode == "none")
    rig.offset_mode = OffsetMode::none;
  else if (mode == "z")
    rig.offset_mode = OffsetMode::z_only;
  else if (mode == "xyz")
    rig.offset_mode = OffsetMode::xyz;
  else
    throw ConfigError("rig: key 'offset_mode' must be \"none\", \"z\" or \"xyz\"");

  if (j.contains("absolute_radius")) rig.absolute_radius = number(j["absolute_radius"], what, "absolute_radius");
  if (j.contains("offset_truth")) rig.offset_truth = vec3(j["offset_truth"], what, "offset_truth");

  rethrow_as_config(what, [&] {
    validate(rig);
    return 0;
  });
  return rig;
}

Json to_json(const SymmetricRig<double>& rig) {
  Json pairs = Json::array();
  for (const auto& p : rig.pairs) pairs.push_back({{"radius_ratio", p.radius_ratio}, {"angle_deg", p.angle / kDeg}});
  Json j = {{"pairs", pairs}, {"offset_mode", to_string(rig.offset_mode)}};
  if (rig.absolute_radius) j["absolute_radius"] = *rig.absolute_radius;
  if (rig.offset_truth) j["offset_truth"] = vec3_json(*rig.offset_truth);
  return j;
}

CameraIntrinsics<double> camera_from_json(const Json& j) {
  const std::string what = "camera";
  require_object(j, what);
  reject_unknown(j, what, {"fx", "fy", "cx", "cy", "width", "height"});
  CameraIntrinsics<double> c;
  c.fx = number(required(j, what, "fx"), what, "fx");
  c.fy = number(required(j, what, "fy"), what, "fy");
  c.cx = number(required(j, what, "cx"), what, "cx");
  c.cy = number(required(j, what, "cy"), what, "cy");
  c.width = integer(required(j, what, "width"), what, "width");
  c.height = integer(required(j, what, "height"), what, "height");
  rethrow_as_config(what, [&] {
    validate(c);
    return 0;
  });
  return c;
}

Json to_json(const CameraIntrinsics<double>& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

Scene scene_from_json(const Json& j, const std::filesystem::path& base_dir) {
  const std::string what = "scene";
  require_object(j, what);
  reject_unknown(j, what,
                 {"kind", "albedo", "albedo_map", "plane_depth", "plane_normal", "sphere_center", "sphere_radius",
                  "heightfield"});
  Scene s;
  const std::string kind = text(required(j, what, "kind"), what, "kind");
  if (kind == "plane")
    s.kind = SceneKind::plane;
  else if (kind == "sphere")
    s.kind = SceneKind::sphere;
  else if (kind == "heightfield")
    s.kind = SceneKind::heightfield;
  else
    throw ConfigError("scene: key 'kind' must be \"plane\", \"sphere\" or \"heightfield\"");

  if (j.contains("albedo")) s.albedo = number(j["albedo"], what, "albedo");
  if (j.contains("plane_depth")) s.plane_depth = number(j["plane_depth"], what, "plane_depth");
  if (j.contains("plane_normal")) s.plane_normal = vec3(j["plane_normal"], what, "plane_normal");
  if (j.contains("sphere_center")) s.sphere_center = vec3(j["sphere_center"], what, "sphere_center");
  if (j.contains("sphere_radius")) s.sphere_radius = number(j["sphere_radius"], what, "sphere_radius");
  if (j.contains("heightfield"))
    s.heightfield = read_pfm(base_dir / text(j["heightfield"], what, "heightfield")).cast<double>();
  else if (s.kind == SceneKind::heightfield)
    throw ConfigError("scene: missing key 'heightfield'");
  if (j.contains("albedo_map"))
    s.albedo_map = read_pfm(base_dir / text(j["albedo_map"], what, "albedo_map")).cast<double>();
  return s;
}

Manifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir) {
  const std::string what = "manifest";
  require_object(j, what);
  reject_unknown(j, what,
                 {"images", "camera", "mask", "gt_normal", "gt_depth", "provenance", "normal_convention",
                  "nominal_distance"});
  Manifest m;
  m.base_dir = base_dir;
  const Json& images = required(j, what, "images");
  if (!images.is_array()) throw ConfigError("manifest: key 'images' must be an array");
  for (const Json& im : images) {
    require_object(im, "manifest image");
    reject_unknown(im, "manifest image", {"pair", "sign", "path"});
    ManifestImage entry;
    entry.pair = integer(required(im, "manifest image", "pair"), "manifest image", "pair");
    const std::string sign = text(required(im, "manifest image", "sign"), "manifest image", "sign");
    if (sign != "+" && sign != "-") throw ConfigError("manifest image: key 'sign' must be \"+\" or \"-\"");
    entry.sign = sign == "+" ? LightSign::plus : LightSign::minus;
    entry.path = text(required(im, "manifest image", "path"), "manifest image", "path");
    m.images.push_back(entry);
  }
  // Light order must be 0+, 0-, 1+, 1-, ...
  for (std::size_t i = 0; i < m.images.size(); ++i) {
    const auto& im = m.images[i];
    if (im.pair != static_cast<int>(i / 2) || (im.sign == LightSign::plus) != (i % 2 == 0))
      throw ConfigError("manifest: key 'images' must list pairs in order, '+' before '-'");
  }
  if (m.images.size() % 2 != 0) throw ConfigError("manifest: key 'images' must hold complete pairs");

  m.camera = camera_from_json(required(j, what, "camera"));
  if (j.contains("mask")) m.mask = text(j["mask"], what, "mask");
  if (j.contains("gt_normal")) m.gt_normal = text(j["gt_normal"], what, "gt_normal");
  if (j.contains("gt_depth")) m.gt_depth = text(j["gt_depth"], what, "gt_depth");
  if (j.contains("provenance")) m.provenance = j["provenance"];
  if (j.contains("normal_convention")) m.normal_convention = text(j["normal_convention"], what, "normal_convention");
  if (j.contains("nominal_distance")) m.nominal_distance = number(j["nominal_distance"], what, "nominal_distance");
  return m;
}

Json to_json(const Manifest& m) {
  Json images = Json::array();
  for (const auto& im : m.images)
    images.push_back({{"pair", im.pair}, {"sign", im.sign == LightSign::plus ? "+" : "-"}, {"path", im.path}});
  Json j = {{"images", images}, {"camera", to_json(m.camera)}, {"provenance", m.provenance}};
  if (m.mask) j["mask"] = *m.mask;
  if (m.gt_normal) j["gt_normal"] = *m.gt_normal;
  if (m.gt_depth) j["gt_depth"] = *m.gt_depth;
  if (!m.normal_convention.empty()) j["normal_convention"] = m.normal_convention;
  if (m.nominal_distance) j["nominal_distance"] = *m.nominal_distance;
  return j;
}

void check_files(const Manifest& m) {
  auto check = [&](const std::string& rel) {
    if (!std::filesystem::is_regular_file(m.resolve(rel)))
      throw IoError("manifest references a missing file: " + m.resolve(rel).string());
  };
  for (const auto& im : m.images) check(im.path);
  for (const auto* opt : {&m.mask, &m.gt_normal, &m.gt_depth})
    if (*opt) check(**opt);
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

SymmetricRig<double> load_rig(const std::filesystem::path& path) { return rig_from_json(load_json(path)); }

CameraIntrinsics<double> load_camera(const std::filesystem::path& path) { return camera_from_json(load_json(path)); }

Scene load_scene(const std::filesystem::path& path) { return scene_from_json(load_json(path), path.parent_path()); }

Manifest load_manifest(const std::filesystem::path& path) {
  Manifest m = manifest_from_json(load_json(path), path.parent_path());
  check_files(m);
  return m;
}

}  // namespace symlight
