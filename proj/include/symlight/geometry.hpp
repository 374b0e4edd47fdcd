#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "symlight/errors.hpp"

namespace symlight {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Assumed structure of the unknown global offset of the light plane.
// `none` means the pair centers coincide with the optical center.
enum class OffsetMode { none, z_only, xyz };

enum class LightSign { plus, minus };

/// Two point lights placed at +/- radius_ratio * [sin angle, cos angle, 0]
/// around the rig center. radius_ratio is in units of the first pair's radius.
template <typename Scalar>
struct SymmetricPair {
  Scalar radius_ratio{1};
  Scalar angle{0};  // radians

  /// In-plane direction of the `+` light, scaled by the radius ratio.
  Vector2<Scalar> direction() const {
    using std::cos;
    using std::sin;
    return {radius_ratio * sin(angle), radius_ratio * cos(angle)};
  }
};

/// Full light arrangement. Lights are indexed 2k (pair k, +) and 2k+1 (pair k, -).
template <typename Scalar>
struct SymmetricRig {
  std::vector<SymmetricPair<Scalar>> pairs;
  OffsetMode offset_mode = OffsetMode::xyz;
  std::optional<Scalar> absolute_radius;
  // Only the renderer and the calibrated oracle read this.
  std::optional<Vector3<Scalar>> offset_truth;

  int n_pairs() const { return static_cast<int>(pairs.size()); }
  int n_lights() const { return 2 * n_pairs(); }
  bool is_metric() const { return absolute_radius.has_value() && offset_truth.has_value(); }

  /// Light position relative to the rig center, in units of the first radius (s'_r).
  Vector3<Scalar> relative_light(int light) const {
    const auto& pair = pairs[static_cast<std::size_t>(light / 2)];
    const Scalar sign = (light % 2 == 0) ? Scalar(1) : Scalar(-1);
    const Vector2<Scalar> d = pair.direction();
    return {sign * d.x(), sign * d.y(), Scalar(0)};
  }

  /// Absolute light position in scene units.
  Vector3<Scalar> metric_light(int light) const {
    if (!is_metric()) throw RigNotMetric();
    return relative_light(light) * *absolute_radius + *offset_truth;
  }
};

/// Pinhole intrinsics. Pixel (u, v) = (column, row), integer coordinates at pixel centers.
template <typename Scalar>
struct CameraIntrinsics {
  Scalar fx{1}, fy{1};
  Scalar cx{0}, cy{0};
  int width{1}, height{1};

  /// Viewing-ray direction p = [u', v', 1].
  Vector3<Scalar> normalized(Scalar u, Scalar v) const {
    return {(u - cx) / fx, (v - cy) / fy, Scalar(1)};
  }
};

template <typename Scalar>
void validate(const CameraIntrinsics<Scalar>& camera) {
  if (!(camera.fx > 0) || !(camera.fy > 0)) throw ConfigError("camera: focal lengths must be positive");
  if (camera.width <= 0 || camera.height <= 0) throw ConfigError("camera: image size must be positive");
  if (!(camera.cx >= 0 && camera.cx < camera.width) || !(camera.cy >= 0 && camera.cy < camera.height))
    throw ConfigError("camera: principal point outside the image");
}

namespace detail {

template <typename Scalar>
Scalar wrap_angle(Scalar a, Scalar period) {
  using std::fmod;
  a = fmod(a, period);
  if (a < 0) a += period;
  return a;
}

// Distance between two angles on a circle of the given period.
template <typename Scalar>
Scalar angle_gap(Scalar a, Scalar b, Scalar period) {
  using std::abs;
  using std::min;
  const Scalar d = wrap_angle(a - b, period);
  return min(d, period - d);
}

}  // namespace detail

/// True when every pair lies on one line through the rig center.
template <typename Scalar>
bool is_collinear(const SymmetricRig<Scalar>& rig, Scalar tol = Scalar(1e-9)) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (const auto& pair : rig.pairs) {
    if (detail::angle_gap(pair.angle, rig.pairs.front().angle, pi) > tol) return false;
  }
  return true;
}

/// Throws ConfigError when the rig violates its structural invariants.
template <typename Scalar>
void validate(const SymmetricRig<Scalar>& rig, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  using std::isfinite;
  if (rig.n_pairs() < 2) throw ConfigError("rig: at least two pairs are required");
  for (const auto& pair : rig.pairs) {
    if (!isfinite(pair.radius_ratio) || !(pair.radius_ratio > 0))
      throw ConfigError("rig: radius_ratio must be positive");
    if (!isfinite(pair.angle)) throw ConfigError("rig: angle must be finite");
  }
  if (abs(rig.pairs.front().radius_ratio - Scalar(1)) > Scalar(1e-12))
    throw ConfigError("rig: the first pair must have radius_ratio 1");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < rig.n_pairs(); ++i) {
    for (int j = i + 1; j < rig.n_pairs(); ++j) {
      const auto& a = rig.pairs[static_cast<std::size_t>(i)];
      const auto& b = rig.pairs[static_cast<std::size_t>(j)];
      if (abs(a.radius_ratio - b.radius_ratio) <= Scalar(1e-12) && detail::angle_gap(a.angle, b.angle, pi) <= tol)
        throw ConfigError("rig: pairs " + std::to_string(i) + " and " + std::to_string(j) + " place lights at the same positions");
    }
  }
  if (rig.absolute_radius && !(*rig.absolute_radius > 0)) throw ConfigError("rig: absolute_radius must be positive");
}

/// Absolute light position: +/-(ratio * radius_unit) [sin a, cos a, 0] + offset.
template <typename Scalar>
Vector3<Scalar> light_position(const SymmetricPair<Scalar>& pair, LightSign sign, Scalar radius_unit,
                               const Vector3<Scalar>& offset) {
  const Scalar s = sign == LightSign::plus ? Scalar(1) : Scalar(-1);
  const Vector2<Scalar> d = pair.direction() * (s * radius_unit);
  return Vector3<Scalar>(d.x(), d.y(), Scalar(0)) + offset;
}

template <typename Scalar>
struct BasisCoefficients {
  Scalar s;
  Scalar t;
};

/// Coefficients (s, t) with target = s * basis1 + t * basis2 for the in-plane
/// relative positions of the `+` lights.
template <typename Scalar>
BasisCoefficients<Scalar> basis_coefficients(const SymmetricPair<Scalar>& basis1, const SymmetricPair<Scalar>& basis2,
                                             const SymmetricPair<Scalar>& target, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  using std::sin;
  const Scalar sin_12 = sin(basis1.angle - basis2.angle);
  if (abs(sin_12) < tol) throw DegenerateBasis("basis pairs are parallel");
  // Cramer's rule on [d1 d2] [s t]^T = d_target, written with angle differences.
  const Scalar s = target.radius_ratio * sin(target.angle - basis2.angle) / (basis1.radius_ratio * sin_12);
  const Scalar t = target.radius_ratio * sin(basis1.angle - target.angle) / (basis2.radius_ratio * sin_12);
  return {s, t};
}

enum class ArrangementKind { FullGeneral, FullGeneralZOnly, RingScaledDistOnly, CollinearDepthOnly, Insufficient };

struct ArrangementClass {
  ArrangementKind kind;
  std::string diagnostic;

  /// Surface position is recoverable for this class.
  bool solvable() const {
    return kind == ArrangementKind::FullGeneral || kind == ArrangementKind::FullGeneralZOnly ||
           kind == ArrangementKind::CollinearDepthOnly;
  }
};

inline const char* to_string(ArrangementKind kind) {
  switch (kind) {
    case ArrangementKind::FullGeneral: return "FullGeneral";
    case ArrangementKind::FullGeneralZOnly: return "FullGeneralZOnly";
    case ArrangementKind::RingScaledDistOnly: return "RingScaledDistOnly";
    case ArrangementKind::CollinearDepthOnly: return "CollinearDepthOnly";
    case ArrangementKind::Insufficient: return "Insufficient";
  }
  return "?";
}

inline const char* to_string(OffsetMode mode) {
  switch (mode) {
    case OffsetMode::none: return "none";
    case OffsetMode::z_only: return "z";
    case OffsetMode::xyz: return "xyz";
  }
  return "?";
}

// The condition text is part of the CLI contract (exit code 4 message).
inline constexpr const char* kDistinctRadiiCondition =
    "at least two pairs with different radii must exist for surface position estimation";

/// Solvability class of a rig. Pure function of the pairs and the offset mode.
template <typename Scalar>
ArrangementClass classify_arrangement(const SymmetricRig<Scalar>& rig, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  const int n = rig.n_pairs();
  const bool z_offset = rig.offset_mode != OffsetMode::xyz;

  int distinct_radii = 0;
  std::vector<Scalar> seen;
  for (const auto& pair : rig.pairs) {
    bool found = false;
    for (Scalar r : seen) found = found || abs(r - pair.radius_ratio) <= Scalar(1e-12);
    if (!found) seen.push_back(pair.radius_ratio);
  }
  distinct_radii = static_cast<int>(seen.size());

  if (n < 2) return {ArrangementKind::Insufficient, "at least two pairs are required"};

  if (is_collinear(rig, tol)) {
    if (!z_offset)
      return {ArrangementKind::Insufficient,
              "all lights lie on one line: position recovery needs an offset restricted to the z axis"};
    return {ArrangementKind::CollinearDepthOnly,
            "all lights lie on one line: depth only, using the viewing-ray direction"};
  }

  if (distinct_radii < 2) {
    // Scaled distances: 1B + 2A needs three pairs, 1B + 2B needs two.
    const int needed = z_offset ? 2 : 3;
    if (n >= needed)
      return {ArrangementKind::RingScaledDistOnly,
              std::string("scaled distances are estimable but position is not: ") + kDistinctRadiiCondition};
    return {ArrangementKind::Insufficient, std::string("too few pairs, and ") + kDistinctRadiiCondition};
  }

  if (n < 3)
    return {ArrangementKind::Insufficient,
            "scaled-distance estimation needs at least three pairs when the lights are not collinear"};

  if (z_offset) return {ArrangementKind::FullGeneralZOnly, "general arrangement, offset along z only"};
  return {ArrangementKind::FullGeneral, "general arrangement, offset along x, y and z"};
}

}  // namespace symlight
