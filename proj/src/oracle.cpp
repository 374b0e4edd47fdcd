#include "symlight/oracle.hpp"

#include <cmath>
#include <limits>

namespace symlight {

void validate(const DepthGrid& grid) {
  if (!(grid.z_min > 0)) throw ConfigError("grid: z_min must be positive");
  if (!(grid.z_min < grid.z_max)) throw ConfigError("grid: z_min must be below z_max");
  if (grid.steps < 2) throw ConfigError("grid: at least two steps are required");
}

OracleResult brute_force_pixel(const VectorX<double>& intensities, const SymmetricRig<double>& rig,
                               const CameraIntrinsics<double>& camera, double u, double v, const DepthGrid& grid,
                               Falloff falloff) {
  if (!rig.is_metric()) throw RigNotMetric();
  validate(grid);
  const int lights = rig.n_lights();
  if (intensities.size() != lights) throw ConfigError("intensity count does not match the rig");

  std::vector<Vector3<double>> positions;
  for (int i = 0; i < lights; ++i) positions.push_back(rig.metric_light(i));
  const Vector3<double> ray = camera.normalized(u, v);
  const double power = falloff == Falloff::cubic ? 3.0 : 2.0;

  OracleResult best;
  best.residual = std::numeric_limits<double>::infinity();
  Eigen::Matrix<double, Eigen::Dynamic, 3> shading(lights, 3);
  for (int step = 0; step < grid.steps; ++step) {
    const double z = grid.at(step);
    const Vector3<double> x = z * ray;
    for (int i = 0; i < lights; ++i) {
      const Vector3<double> d = positions[static_cast<std::size_t>(i)] - x;
      shading.row(i) = d.transpose() / std::pow(d.norm(), power);
    }
    const Eigen::Matrix3d normal_matrix = shading.transpose() * shading;
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(normal_matrix);
    const Vector3<double> b = ldlt.solve(shading.transpose() * intensities);
    const double residual = (shading * b - intensities).squaredNorm();
    if (residual < best.residual) {
      best.residual = residual;
      best.depth = z;
      best.albedo = b.norm();
      best.normal = best.albedo > 0 ? Vector3<double>(b / best.albedo) : Vector3<double>::Zero();
    }
  }
  return best;
}

OracleMaps brute_force_image(const std::vector<Image<float>>& images, const Image<bool>& mask,
                             const SymmetricRig<double>& rig, const CameraIntrinsics<double>& camera,
                             const DepthGrid& grid, Falloff falloff, double shadow_threshold) {
  if (!rig.is_metric()) throw RigNotMetric();
  validate(grid);
  if (static_cast<int>(images.size()) != rig.n_lights()) throw ConfigError("image count does not match the rig");
  const int h = camera.height;
  const int w = camera.width;
  OracleMaps out{Image<float>::Zero(h, w), make_image3<float>(h, w), Image<float>::Zero(h, w),
                 Image<bool>::Constant(h, w, false)};

#pragma omp parallel for schedule(dynamic, 2)
  for (int v = 0; v < h; ++v) {
    VectorX<double> m(rig.n_lights());
    for (int u = 0; u < w; ++u) {
      if (mask.size() != 0 && !mask(v, u)) continue;
      for (int i = 0; i < rig.n_lights(); ++i) m(i) = images[static_cast<std::size_t>(i)](v, u);
      const double peak = m.maxCoeff();
      if (!(peak > 0) || (m.array() < shadow_threshold * peak).any()) continue;
      const OracleResult r = brute_force_pixel(m, rig, camera, u, v, grid, falloff);
      out.depth(v, u) = static_cast<float>(r.depth);
      for (int c = 0; c < 3; ++c) out.normal[static_cast<std::size_t>(c)](v, u) = static_cast<float>(r.normal(c));
      out.residual(v, u) = static_cast<float>(r.residual);
      out.valid(v, u) = true;
    }
  }
  return out;
}

}  // namespace symlight
