#pragma once

#include <vector>

#include "symlight/geometry.hpp"
#include "symlight/image.hpp"
#include "symlight/render.hpp"

namespace symlight {

/// Uniform depth samples z_min, ..., z_max (inclusive).
struct DepthGrid {
  double z_min = 0.5;
  double z_max = 12.0;
  int steps = 10000;

  double step() const { return (z_max - z_min) / (steps - 1); }
  double at(int i) const { return z_min + step() * i; }

  /// [0.25 l, 2 l] around a nominal distance l.
  static DepthGrid around(double nominal, int steps = 10000) { return {0.25 * nominal, 2.0 * nominal, steps}; }
};

void validate(const DepthGrid& grid);

struct OracleResult {
  double depth = 0;
  Vector3<double> normal = Vector3<double>::Zero();
  double albedo = 0;
  double residual = 0;
};

/// Exhaustive depth search along the viewing ray of pixel (u, v) with fully calibrated
/// lights. At each depth the shading vector rho * n is fit by least squares under the
/// chosen fall-off; the depth with the smallest intensity residual wins.
OracleResult brute_force_pixel(const VectorX<double>& intensities, const SymmetricRig<double>& rig,
                               const CameraIntrinsics<double>& camera, double u, double v, const DepthGrid& grid,
                               Falloff falloff);

struct OracleMaps {
  Image<float> depth;
  Image3<float> normal;
  Image<float> residual;
  Image<bool> valid;
};

/// brute_force_pixel over every pixel inside `mask` (empty mask: all pixels) whose
/// intensities clear the shadow threshold.
OracleMaps brute_force_image(const std::vector<Image<float>>& images, const Image<bool>& mask,
                             const SymmetricRig<double>& rig, const CameraIntrinsics<double>& camera,
                             const DepthGrid& grid, Falloff falloff, double shadow_threshold = 1e-4);

}  // namespace symlight
