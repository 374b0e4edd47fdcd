#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "symlight/geometry.hpp"
#include "symlight/image.hpp"

namespace symlight {

enum class Falloff { cubic, relaxed };

enum class SceneKind { plane, sphere, heightfield };

/// Parametric scene in the camera frame (camera at the origin looking toward +z).
struct Scene {
  SceneKind kind = SceneKind::plane;

  // plane: passes through [0, 0, plane_depth] with the given normal (oriented toward the camera)
  double plane_depth = 6.0;
  Vector3<double> plane_normal{0.0, 0.0, -1.0};

  Vector3<double> sphere_center{0.0, 0.0, 6.0};
  double sphere_radius = 1.0;

  // heightfield: per-pixel depth z(v, u); non-positive or non-finite entries are empty
  Image<double> heightfield;

  double albedo = 1.0;
  Image<double> albedo_map;  // overrides `albedo` when non-empty

  double albedo_at(int u, int v) const { return albedo_map.size() ? albedo_map(v, u) : albedo; }
};

/// Throws ConfigError on non-positive depths or albedos.
void validate(const Scene& scene, const CameraIntrinsics<double>& camera);

struct SurfaceHit {
  Vector3<double> x;
  Vector3<double> n;  // unit, facing the camera
};

/// Nearest intersection of the ray through pixel (u, v) with the scene, or nullopt.
std::optional<SurfaceHit> ray_surface_point(const CameraIntrinsics<double>& camera, int u, int v, const Scene& scene);

template <typename Scalar>
struct RenderedStack {
  std::vector<Image<Scalar>> images;  // (pair 0 +, pair 0 -, pair 1 +, ...)
  Image3<Scalar> gt_normal;
  Image<Scalar> gt_depth;
  Image<bool> mask;  // surface hit and lit by every light
};

/// Lambertian rendering without cast shadows or inter-reflections.
/// cubic:   m = rho (s - x)^T n / |s - x|^3
/// relaxed: m = rho (s - x)^T n / |s - x|^2
/// Throws RigNotMetric when the rig lacks absolute_radius or offset_truth.
template <typename Scalar>
RenderedStack<Scalar> render(const Scene& scene, const SymmetricRig<double>& rig, const CameraIntrinsics<double>& camera,
                             Falloff falloff);

extern template RenderedStack<float> render<float>(const Scene&, const SymmetricRig<double>&,
                                                   const CameraIntrinsics<double>&, Falloff);
extern template RenderedStack<double> render<double>(const Scene&, const SymmetricRig<double>&,
                                                     const CameraIntrinsics<double>&, Falloff);

/// Median light-to-surface distance over every (masked pixel, light) combination.
/// Throws ConfigError when the mask is empty.
double median_light_distance(const Image<double>& depth, const Image<bool>& mask, const SymmetricRig<double>& rig,
                             const CameraIntrinsics<double>& camera);

/// Sensor simulation: Gaussian shot noise (variance shot_gain * m), Gaussian read noise,
/// then quantization to `bits` over [0, full_scale]. No defaults for the noise levels.
struct SensorNoise {
  double full_scale = 1.0;
  double shot_gain = 0.0;
  double read_sigma = 0.0;
  int bits = 12;
  std::uint64_t seed = 0;
};

void apply_sensor_noise(std::vector<Image<float>>& images, const SensorNoise& noise);

}  // namespace symlight
