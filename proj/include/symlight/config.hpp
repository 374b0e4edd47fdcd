#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symlight/geometry.hpp"
#include "symlight/render.hpp"

namespace symlight {

using Json = nlohmann::json;

// Rig JSON: {"pairs": [{"radius_ratio", "angle_deg"}], "offset_mode": "none"|"z"|"xyz",
//            "absolute_radius"?, "offset_truth"?: [x, y, z]}. Unknown keys are rejected.
SymmetricRig<double> rig_from_json(const Json& j);
Json to_json(const SymmetricRig<double>& rig);

// Camera JSON: {"fx", "fy", "cx", "cy", "width", "height"}.
CameraIntrinsics<double> camera_from_json(const Json& j);
Json to_json(const CameraIntrinsics<double>& camera);

// Scene JSON: {"kind": "plane"|"sphere"|"heightfield", "albedo"?, "albedo_map"?,
//              "plane_depth"?, "plane_normal"?, "sphere_center"?, "sphere_radius"?, "heightfield"?}.
// Map entries are PFM paths, resolved against `base_dir`.
Scene scene_from_json(const Json& j, const std::filesystem::path& base_dir = {});

struct ManifestImage {
  int pair = 0;
  LightSign sign = LightSign::plus;
  std::string path;
};

/// Dataset description. Paths are stored as written; `resolve` joins them with the manifest directory.
struct Manifest {
  std::vector<ManifestImage> images;  // pair order, + before -
  CameraIntrinsics<double> camera;
  std::optional<std::string> mask;
  std::optional<std::string> gt_normal;
  std::optional<std::string> gt_depth;
  Json provenance = "captured";
  std::string normal_convention;
  std::optional<double> nominal_distance;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
};

Manifest manifest_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const Manifest& manifest);

/// Throws IoError when a referenced file is missing.
void check_files(const Manifest& manifest);

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);

SymmetricRig<double> load_rig(const std::filesystem::path& path);
CameraIntrinsics<double> load_camera(const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);
/// Parses, resolves paths against the manifest directory and checks that every file exists.
Manifest load_manifest(const std::filesystem::path& path);

inline constexpr const char* kNormalConvention =
    "camera frame, +z along the optical axis; camera-facing normals have negative z; "
    "normal_vis.png stores ((nx+1)/2, (ny+1)/2, (-nz+1)/2)";

}  // namespace symlight
