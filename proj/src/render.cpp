#include "symlight/render.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace symlight {

void validate(const Scene& scene, const CameraIntrinsics<double>& camera) {
  switch (scene.kind) {
    case SceneKind::plane:
      if (!(scene.plane_depth > 0)) throw ConfigError("scene: plane depth must be positive");
      if (!(scene.plane_normal.norm() > 0)) throw ConfigError("scene: plane normal must be non-zero");
      break;
    case SceneKind::sphere:
      if (!(scene.sphere_radius > 0)) throw ConfigError("scene: sphere radius must be positive");
      if (!(scene.sphere_center.z() - scene.sphere_radius > 0))
        throw ConfigError("scene: sphere must lie entirely in front of the camera");
      break;
    case SceneKind::heightfield:
      if (scene.heightfield.rows() != camera.height || scene.heightfield.cols() != camera.width)
        throw ConfigError("scene: heightfield size must match the camera");
      break;
  }
  if (scene.albedo_map.size()) {
    if (scene.albedo_map.rows() != camera.height || scene.albedo_map.cols() != camera.width)
      throw ConfigError("scene: albedo map size must match the camera");
    if (!(scene.albedo_map > 0).all() || !(scene.albedo_map <= 1).all())
      throw ConfigError("scene: albedo map values must lie in (0, 1]");
  } else if (!(scene.albedo > 0)) {
    throw ConfigError("scene: albedo must be positive");
  }
}

namespace {

Vector3<double> facing_camera(Vector3<double> n, const Vector3<double>& x) {
  n.normalize();
  return n.dot(x) > 0 ? Vector3<double>(-n) : n;
}

std::optional<SurfaceHit> hit_plane(const Vector3<double>& p, const Scene& scene) {
  const Vector3<double> n = scene.plane_normal.normalized();
  const double denom = n.dot(p);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = n.z() * scene.plane_depth / denom;
  if (!(t > 0)) return std::nullopt;
  const Vector3<double> x = t * p;
  return SurfaceHit{x, facing_camera(n, x)};
}

std::optional<SurfaceHit> hit_sphere(const Vector3<double>& p, const Scene& scene) {
  const Vector3<double>& c = scene.sphere_center;
  const double a = p.squaredNorm();
  const double b = -2.0 * p.dot(c);
  const double k = c.squaredNorm() - scene.sphere_radius * scene.sphere_radius;
  const double disc = b * b - 4.0 * a * k;
  if (disc < 0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (!(t > 0)) return std::nullopt;
  const Vector3<double> x = t * p;
  return SurfaceHit{x, (x - c) / scene.sphere_radius};
}

bool height_ok(const Scene& scene, int u, int v) {
  if (u < 0 || v < 0 || v >= scene.heightfield.rows() || u >= scene.heightfield.cols()) return false;
  const double z = scene.heightfield(v, u);
  return std::isfinite(z) && z > 0;
}

// Normal from central differences of back-projected neighbours (one-sided at holes and borders).
std::optional<SurfaceHit> hit_heightfield(const CameraIntrinsics<double>& camera, int u, int v, const Scene& scene) {
  if (!height_ok(scene, u, v)) return std::nullopt;
  auto point = [&](int uu, int vv) { return Vector3<double>(scene.heightfield(vv, uu) * camera.normalized(uu, vv)); };
  auto derivative = [&](int du, int dv) -> std::optional<Vector3<double>> {
    const bool fwd = height_ok(scene, u + du, v + dv);
    const bool back = height_ok(scene, u - du, v - dv);
    if (fwd && back) return (point(u + du, v + dv) - point(u - du, v - dv)) / 2.0;
    if (fwd) return point(u + du, v + dv) - point(u, v);
    if (back) return point(u, v) - point(u - du, v - dv);
    return std::nullopt;
  };
  const auto du = derivative(1, 0);
  const auto dv = derivative(0, 1);
  if (!du || !dv) return std::nullopt;
  const Vector3<double> n = du->cross(*dv);
  if (!(n.norm() > 0)) return std::nullopt;
  const Vector3<double> x = point(u, v);
  return SurfaceHit{x, facing_camera(n, x)};
}

}  // namespace

std::optional<SurfaceHit> ray_surface_point(const CameraIntrinsics<double>& camera, int u, int v, const Scene& scene) {
  const Vector3<double> p = camera.normalized(u, v);
  switch (scene.kind) {
    case SceneKind::plane: return hit_plane(p, scene);
    case SceneKind::sphere: return hit_sphere(p, scene);
    case SceneKind::heightfield: return hit_heightfield(camera, u, v, scene);
  }
  return std::nullopt;
}

template <typename Scalar>
RenderedStack<Scalar> render(const Scene& scene, const SymmetricRig<double>& rig, const CameraIntrinsics<double>& camera,
                             Falloff falloff) {
  if (!rig.is_metric()) throw RigNotMetric();
  validate(rig);
  validate(camera);
  validate(scene, camera);

  const int h = camera.height;
  const int w = camera.width;
  const int lights = rig.n_lights();
  std::vector<Vector3<double>> positions;
  for (int i = 0; i < lights; ++i) positions.push_back(rig.metric_light(i));
  const double power = falloff == Falloff::cubic ? 3.0 : 2.0;

  RenderedStack<Scalar> out;
  out.images.assign(static_cast<std::size_t>(lights), Image<Scalar>::Zero(h, w));
  out.gt_normal = make_image3<Scalar>(h, w);
  out.gt_depth = Image<Scalar>::Zero(h, w);
  out.mask = Image<bool>::Constant(h, w, false);

#pragma omp parallel for schedule(dynamic, 4)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const auto hit = ray_surface_point(camera, u, v, scene);
      if (!hit) continue;
      const double rho = scene.albedo_at(u, v);
      bool lit = true;
      for (int i = 0; i < lights; ++i) {
        const Vector3<double> to_light = positions[static_cast<std::size_t>(i)] - hit->x;
        const double shading = to_light.dot(hit->n);
        if (!(shading > 0)) {
          lit = false;
          continue;
        }
        out.images[static_cast<std::size_t>(i)](v, u) =
            static_cast<Scalar>(rho * shading / std::pow(to_light.norm(), power));
      }
      for (int c = 0; c < 3; ++c) out.gt_normal[static_cast<std::size_t>(c)](v, u) = static_cast<Scalar>(hit->n(c));
      out.gt_depth(v, u) = static_cast<Scalar>(hit->x.z());
      out.mask(v, u) = lit;
    }
  }
  return out;
}

template RenderedStack<float> render<float>(const Scene&, const SymmetricRig<double>&, const CameraIntrinsics<double>&,
                                            Falloff);
template RenderedStack<double> render<double>(const Scene&, const SymmetricRig<double>&,
                                              const CameraIntrinsics<double>&, Falloff);

double median_light_distance(const Image<double>& depth, const Image<bool>& mask, const SymmetricRig<double>& rig,
                             const CameraIntrinsics<double>& camera) {
  std::vector<double> dist;
  for (int v = 0; v < mask.rows(); ++v)
    for (int u = 0; u < mask.cols(); ++u) {
      if (!mask(v, u)) continue;
      const Vector3<double> x = depth(v, u) * camera.normalized(u, v);
      for (int i = 0; i < rig.n_lights(); ++i) dist.push_back((rig.metric_light(i) - x).norm());
    }
  if (dist.empty()) throw ConfigError("median distance: empty mask");
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid;
}

void apply_sensor_noise(std::vector<Image<float>>& images, const SensorNoise& noise) {
  if (!(noise.full_scale > 0)) throw ConfigError("noise: full_scale must be positive");
  if (noise.bits < 1 || noise.bits > 24) throw ConfigError("noise: bits must lie in [1, 24]");
  if (noise.shot_gain < 0 || noise.read_sigma < 0) throw ConfigError("noise: levels must be non-negative");
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double levels = std::ldexp(1.0, noise.bits) - 1.0;
  for (auto& img : images) {
    for (Eigen::Index i = 0; i < img.size(); ++i) {
      double m = img.data()[i];
      m += std::sqrt(noise.shot_gain * std::max(m, 0.0)) * gauss(rng);
      m += noise.read_sigma * gauss(rng);
      const double q = std::round(std::clamp(m / noise.full_scale, 0.0, 1.0) * levels);
      img.data()[i] = static_cast<float>(q / levels * noise.full_scale);
    }
  }
}

}  // namespace symlight
