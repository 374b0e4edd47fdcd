#pragma once

#include <filesystem>
#include <numbers>
#include <random>

#include "symlight/constraints.hpp"
#include "symlight/geometry.hpp"

namespace symlight::testing {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline SymmetricRig<double> make_rig(std::initializer_list<std::pair<double, double>> ratio_deg, OffsetMode mode,
                                     Vector3<double> offset = Vector3<double>::Zero(), double radius = 1.0) {
  SymmetricRig<double> rig;
  for (const auto& [ratio, angle] : ratio_deg) rig.pairs.push_back({ratio, deg(angle)});
  rig.offset_mode = mode;
  rig.absolute_radius = radius;
  rig.offset_truth = offset;
  return rig;
}

// Two rings of two pairs at 45 and 135 degrees, radii 1 and 2.
inline SymmetricRig<double> double_o45(OffsetMode mode = OffsetMode::z_only,
                                       Vector3<double> offset = Vector3<double>(0, 0, 0.5)) {
  return make_rig({{1, 45}, {1, 135}, {2, 45}, {2, 135}}, mode, offset);
}

inline CameraIntrinsics<double> camera(int size = 128, double f = 300.0) {
  return {f, f, size / 2.0, size / 2.0, size, size};
}

// Relaxed-model scaled distances |s'_i - x'_r|^2 / rho (unit radius frame).
inline VectorX<double> relaxed_e(const SymmetricRig<double>& rig, const Vector3<double>& x_r, double rho = 1.0) {
  VectorX<double> e(rig.n_lights());
  for (int i = 0; i < rig.n_lights(); ++i) e(i) = (rig.relative_light(i) - x_r).squaredNorm() / rho;
  return e;
}

// m_i = rho (s'_i - x'_r)^T n / |s'_i - x'_r|^power.
inline VectorX<double> shade(const SymmetricRig<double>& rig, const Vector3<double>& x_r, const Vector3<double>& n,
                             double rho, double power) {
  VectorX<double> m(rig.n_lights());
  for (int i = 0; i < rig.n_lights(); ++i) {
    const Vector3<double> d = rig.relative_light(i) - x_r;
    m(i) = rho * d.dot(n) / std::pow(d.norm(), power);
  }
  return m;
}

struct Probe {
  PixelStack<double> stack;
  Vector3<double> x_r;
  Vector3<double> normal;
  double rho;
};

// Random surface point in front of the rig, lit by every light, with the viewing ray matching `offset`.
inline Probe random_probe(const SymmetricRig<double>& rig, std::mt19937_64& rng, double power,
                          const Vector3<double>& offset) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (;;) {
    Probe p;
    p.x_r = {0.6 * uni(rng), 0.6 * uni(rng), 4.0 + 2.0 * uni(rng)};
    p.normal = Vector3<double>(0.3 * uni(rng), 0.3 * uni(rng), -1.0).normalized();
    p.rho = 0.6 + 0.4 * uni(rng);
    const VectorX<double> m = shade(rig, p.x_r, p.normal, p.rho, power);
    if ((m.array() <= 0).any()) continue;
    const Vector3<double> x = p.x_r + offset;
    p.stack.intensities = m;
    p.stack.normalized = x.head<2>() / x.z();
    return p;
  }
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("symlight_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace symlight::testing
