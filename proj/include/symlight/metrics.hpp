#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "symlight/geometry.hpp"
#include "symlight/image.hpp"

namespace symlight {

/// Angle between two directions in degrees. Inputs are renormalized; atan2 keeps
/// precision near 0 and 180 degrees where acos does not.
template <typename DerivedA, typename DerivedB>
double angular_error_deg(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const Vector3<double> na = a.template cast<double>().normalized();
  const Vector3<double> nb = b.template cast<double>().normalized();
  return std::atan2(na.cross(nb).norm(), na.dot(nb)) * 180.0 / std::numbers::pi;
}

/// Deterministic pairwise (tree) summation; the result does not depend on thread count.
double pairwise_sum(std::span<const double> values);

struct DepthAlignment {
  double scale = 1;
  double shift = 0;
};

/// Least-squares a, b minimizing sum over mask of (a z_est + b - z_gt)^2.
/// Throws DegenerateFit when z_est is constant over the mask or fewer than two pixels remain.
DepthAlignment align_depth(const Image<double>& z_est, const Image<double>& z_gt, const Image<bool>& mask);

/// Shift-only variant (a = 1) for setups where the metric scale is known.
DepthAlignment align_depth_shift(const Image<double>& z_est, const Image<double>& z_gt, const Image<bool>& mask);

Image<double> apply_alignment(const DepthAlignment& alignment, const Image<double>& z_est);

/// Mean over mask of |z_aligned - z_gt| / z_gt; `map` receives per-pixel values (NaN off-mask).
double rel_abs_depth_error(const Image<double>& z_aligned, const Image<double>& z_gt, const Image<bool>& mask,
                           Image<double>* map = nullptr);

/// Mean angular error over mask; `map` receives per-pixel degrees (NaN off-mask).
double mean_angular_error(const Image3<double>& n_est, const Image3<double>& n_gt, const Image<bool>& mask,
                          Image<double>* map = nullptr);

enum class AlignmentMode { affine, shift };

struct EvalReport {
  double mean_angular_error_deg = 0;
  double mean_rel_abs_depth_error = 0;
  double scale = 1;
  double shift = 0;
  long pixel_count = 0;
  Image<double> angular_error_map;
  Image<double> depth_error_map;
};

/// Full evaluation over the intersection of `valid_est` and `valid_gt`.
EvalReport evaluate(const Image3<double>& n_est, const Image<double>& z_est, const Image<bool>& valid_est,
                    const Image3<double>& n_gt, const Image<double>& z_gt, const Image<bool>& valid_gt,
                    AlignmentMode mode = AlignmentMode::affine);

/// JSON text with keys mean_angular_error_deg, mean_rel_abs_depth_error, scale, shift, pixel_count.
std::string to_json(const EvalReport& report);

}  // namespace symlight
