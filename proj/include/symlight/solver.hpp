#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "symlight/constraints.hpp"
#include "symlight/geometry.hpp"
#include "symlight/image.hpp"

namespace symlight {

enum class PixelStatus : std::uint8_t { ok = 0, shadowed = 1, sign_conflict = 2, degenerate = 3 };

inline const char* to_string(PixelStatus status) {
  switch (status) {
    case PixelStatus::ok: return "ok";
    case PixelStatus::shadowed: return "shadowed";
    case PixelStatus::sign_conflict: return "sign_conflict";
    case PixelStatus::degenerate: return "degenerate";
  }
  return "?";
}

/// Unit-norm vector of per-light scaled distances (rho^-1 d^2 under the relaxed model).
template <typename Scalar>
struct ScaledDistances {
  VectorX<Scalar> e;
  bool sign_fixed = false;     // the SVD vector was negated
  bool sign_conflict = false;  // mixed signs survived the flip
  Scalar residual{0};          // smallest singular value of [A; A']
};

/// Per-pixel result. x_r is (x - s_o) / r.
template <typename Scalar>
struct Surfel {
  Vector3<Scalar> x_r = Vector3<Scalar>::Zero();
  Vector3<Scalar> normal = Vector3<Scalar>::Zero();
  Scalar scaled_albedo{0};  // rho / r
  Scalar rho_inv_r2{0};
  PixelStatus status = PixelStatus::shadowed;
  bool has_normal = false;  // false on the collinear depth-only path
};

struct SolveOptions {
  double shadow_threshold = 1e-4;
  double rank_tol = 1e-8;
  double basis_tol = 1e-9;
  double sign_tol = 1e-6;
};

/// Right singular vector of the smallest singular value of [A; A'], sign-fixed to a positive sum.
/// Throws DegenerateSystem when the null space is not one-dimensional.
template <typename Scalar>
ScaledDistances<Scalar> solve_scaled_distances(const ConstraintSystem<Scalar>& system, Scalar rank_tol = Scalar(1e-8),
                                               Scalar sign_tol = Scalar(1e-6)) {
  const MatrixX<Scalar> m = system.stacked();
  const Eigen::Index cols = m.cols();
  if (m.rows() < cols - 1) throw DegenerateSystem("fewer independent rows than unknowns minus one");

  MatrixX<Scalar> square = m;
  if (m.rows() < cols) {
    // Pad so that V is complete; zero rows do not change the right singular vectors.
    square = MatrixX<Scalar>::Zero(cols, cols);
    square.topRows(m.rows()) = m;
  }
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(square, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  if (!(sigma(0) > 0)) throw DegenerateSystem("constraint matrix is zero");
  if (sigma(cols - 2) <= rank_tol * sigma(0)) throw DegenerateSystem("null space has dimension greater than one");

  ScaledDistances<Scalar> out;
  out.e = svd.matrixV().col(cols - 1);
  out.residual = sigma(cols - 1);
  if (out.e.sum() < 0) {
    out.e = -out.e;
    out.sign_fixed = true;
  }
  out.sign_conflict = (out.e.array() < -sign_tol).any();
  return out;
}

/// rho^-1 r^2 from differences of pair sums, averaged over all pairs of distinct radii.
/// Linear in e, so it carries the (arbitrary) scale of e.
template <typename Scalar>
Scalar recover_rho_inv_r2(const Eigen::Ref<const VectorX<Scalar>>& e, const SymmetricRig<Scalar>& rig) {
  using std::abs;
  const int n = rig.n_pairs();
  Scalar total = 0;
  int count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Scalar bi = rig.pairs[static_cast<std::size_t>(i)].radius_ratio;
      const Scalar bj = rig.pairs[static_cast<std::size_t>(j)].radius_ratio;
      const Scalar denom = 2 * (bj * bj - bi * bi);
      if (abs(bj - bi) <= Scalar(1e-12)) continue;
      const Scalar sum_i = e(2 * i) + e(2 * i + 1);
      const Scalar sum_j = e(2 * j) + e(2 * j + 1);
      total += (sum_j - sum_i) / denom;
      ++count;
    }
  if (count == 0) throw EqualRadii(kDistinctRadiiCondition);
  return total / Scalar(count);
}

namespace detail {

// z'_r from each light's relaxed distance identity, averaged over non-negative radicands:
//   e_i / K = |s'_i|^2 + |x'_r|^2 - 2 x'_r . s'_i
template <typename Scalar>
Scalar depth_from_distances(const Eigen::Ref<const VectorX<Scalar>>& e, const SymmetricRig<Scalar>& rig,
                            Scalar rho_inv_r2, Scalar x, Scalar y) {
  using std::sqrt;
  Scalar total = 0;
  int count = 0;
  for (int i = 0; i < rig.n_lights(); ++i) {
    const Vector3<Scalar> s = rig.relative_light(i);
    const Scalar radicand = e(i) / rho_inv_r2 - s.squaredNorm() - x * x - y * y + 2 * (x * s.x() + y * s.y());
    if (!(radicand >= 0)) continue;
    total += sqrt(radicand);
    ++count;
  }
  if (count == 0) throw NegativeRadicand("no light gives a non-negative depth radicand");
  return total / Scalar(count);
}

}  // namespace detail

/// Scaled and shifted surface point x'_r. In-plane coordinates come from 2x2 solves on the
/// pair differences of e, averaged over every non-parallel pair of pairs; depth from the
/// relaxed distance identity of every light. Invariant to the scale of e.
template <typename Scalar>
Vector3<Scalar> recover_position(const Eigen::Ref<const VectorX<Scalar>>& e, const SymmetricRig<Scalar>& rig,
                                 Scalar rho_inv_r2, Scalar basis_tol = Scalar(1e-9)) {
  using std::abs;
  using std::sin;
  if (!(rho_inv_r2 > 0)) throw NegativeRadicand("rho^-1 r^2 must be positive");
  const int n = rig.n_pairs();
  // beta_k (x sin + y cos) = w_k
  VectorX<Scalar> w(n);
  for (int k = 0; k < n; ++k) w(k) = -(e(2 * k) - e(2 * k + 1)) / (4 * rho_inv_r2);

  Scalar x = 0, y = 0;
  int count = 0;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const auto& pj = rig.pairs[static_cast<std::size_t>(j)];
      const auto& pk = rig.pairs[static_cast<std::size_t>(k)];
      if (abs(sin(pj.angle - pk.angle)) < basis_tol) continue;
      const Vector2<Scalar> dj = pj.direction();
      const Vector2<Scalar> dk = pk.direction();
      const Scalar det = dj.x() * dk.y() - dj.y() * dk.x();
      x += (w(j) * dk.y() - w(k) * dj.y()) / det;
      y += (dj.x() * w(k) - dk.x() * w(j)) / det;
      ++count;
    }
  if (count == 0) throw DegenerateBasis("no non-parallel pair of pairs");
  x /= Scalar(count);
  y /= Scalar(count);
  return {x, y, detail::depth_from_distances<Scalar>(e, rig, rho_inv_r2, x, y)};
}

template <typename Scalar>
struct NormalEstimate {
  Vector3<Scalar> normal;
  Scalar scaled_albedo;
};

/// Calibrated least squares under the relaxed model with lights at s'_r and the point at x_r:
///   m_i |s'_i - x_r|^2 = (s'_i - x_r)^T b,   b = (rho / r) n.
template <typename Scalar>
NormalEstimate<Scalar> recover_normal(const Eigen::Ref<const VectorX<Scalar>>& intensities,
                                      const SymmetricRig<Scalar>& rig, const Vector3<Scalar>& x_r,
                                      Scalar rank_tol = Scalar(1e-8)) {
  const int lights = rig.n_lights();
  MatrixX<Scalar> dirs(lights, 3);
  VectorX<Scalar> rhs(lights);
  for (int i = 0; i < lights; ++i) {
    const Vector3<Scalar> d = rig.relative_light(i) - x_r;
    dirs.row(i) = d.transpose();
    rhs(i) = intensities(i) * d.squaredNorm();
  }
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(dirs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  if (!(sigma(2) > rank_tol * sigma(0))) throw RankDeficient("light directions span fewer than three dimensions");
  const Vector3<Scalar> b = svd.solve(rhs);
  const Scalar norm = b.norm();
  if (!(norm > 0)) throw RankDeficient("zero shading vector");
  return {b / norm, norm};
}

namespace detail {

template <typename Scalar>
bool is_shadowed(const PixelStack<Scalar>& stack, Scalar threshold) {
  using std::isfinite;
  if (!stack.valid || stack.intensities.size() == 0) return true;
  const Scalar peak = stack.intensities.maxCoeff();
  if (!(peak > 0) || !isfinite(peak)) return true;
  return (stack.intensities.array() < threshold * peak).any();
}

}  // namespace detail

/// Full per-pixel path for general arrangements. Never throws on per-pixel failures;
/// the status records them.
template <typename Scalar>
Surfel<Scalar> solve_pixel(const ConstraintLayout<Scalar>& layout, const SymmetricRig<Scalar>& rig,
                           const PixelStack<Scalar>& stack, const SolveOptions& options = {}) {
  Surfel<Scalar> out;
  if (detail::is_shadowed(stack, Scalar(options.shadow_threshold))) {
    out.status = PixelStatus::shadowed;
    return out;
  }
  try {
    const auto system = build_system(layout, stack);
    const auto sd = solve_scaled_distances(system, Scalar(options.rank_tol), Scalar(options.sign_tol));
    if (sd.sign_conflict) {
      out.status = PixelStatus::sign_conflict;
      return out;
    }
    out.rho_inv_r2 = recover_rho_inv_r2<Scalar>(sd.e, rig);
    out.x_r = recover_position<Scalar>(sd.e, rig, out.rho_inv_r2, Scalar(options.basis_tol));
    const auto ne = recover_normal<Scalar>(stack.intensities, rig, out.x_r, Scalar(options.rank_tol));
    out.normal = ne.normal;
    out.scaled_albedo = ne.scaled_albedo;
    out.has_normal = true;
    out.status = out.x_r.z() > 0 ? PixelStatus::ok : PixelStatus::degenerate;
  } catch (const Error&) {
    out.status = PixelStatus::degenerate;
  }
  return out;
}

/// Depth-only path for rigs whose lights all lie on one line (z-only offset).
/// In-plane position comes from the single pair-difference constraint plus y'/x' = v'/u'.
template <typename Scalar>
Surfel<Scalar> solve_collinear(const PixelStack<Scalar>& stack, const SymmetricRig<Scalar>& rig,
                               const CameraIntrinsics<Scalar>& camera, Scalar u, Scalar v,
                               const SolveOptions& options = {}) {
  using std::abs;
  const Vector3<Scalar> p = camera.normalized(u, v);
  if (p.x() * p.x() + p.y() * p.y() < Scalar(1e-12))
    throw PrincipalPointDegenerate("pixel at the principal point: in-plane direction undefined");
  if (rig.offset_mode == OffsetMode::xyz) throw UnsupportedArrangement("collinear rigs need a z-only offset");
  const auto layout = make_layout(rig, Scalar(options.basis_tol));
  if (!layout.collinear) throw UnsupportedArrangement("rig is not collinear");

  const auto system = build_system(layout, stack);
  const auto sd = solve_scaled_distances(system, Scalar(options.rank_tol), Scalar(options.sign_tol));
  Surfel<Scalar> out;
  if (sd.sign_conflict) {
    out.status = PixelStatus::sign_conflict;
    return out;
  }
  out.rho_inv_r2 = recover_rho_inv_r2<Scalar>(sd.e, rig);
  const Scalar k = out.rho_inv_r2;

  // Pair k's direction is lambda_k * u0 with u0 = [sin t0, cos t0]; least squares for w = x'_r . u0.
  const auto& first = rig.pairs.front();
  const Vector2<Scalar> u0 = first.direction() / first.radius_ratio;
  Scalar num = 0, den = 0;
  for (int i = 0; i < rig.n_pairs(); ++i) {
    const Scalar lambda = rig.pairs[static_cast<std::size_t>(i)].direction().dot(u0);
    num += lambda * (-(sd.e(2 * i) - sd.e(2 * i + 1)) / (4 * k));
    den += lambda * lambda;
  }
  const Scalar w = num / den;
  const Vector2<Scalar> pxy = p.template head<2>();
  const Scalar along = pxy.dot(u0);
  if (abs(along) < Scalar(1e-12) * pxy.norm())
    throw DegenerateBasis("viewing ray is perpendicular to the light line");
  const Vector2<Scalar> xy = pxy * (w / along);
  out.x_r = {xy.x(), xy.y(), detail::depth_from_distances<Scalar>(sd.e, rig, k, xy.x(), xy.y())};
  out.status = out.x_r.z() > 0 ? PixelStatus::ok : PixelStatus::degenerate;
  out.has_normal = false;
  return out;
}

/// Per-pixel results for a whole image.
template <typename Scalar>
struct SurfelMap {
  int width = 0;
  int height = 0;
  std::vector<Surfel<Scalar>> pixels;

  const Surfel<Scalar>& at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
  Surfel<Scalar>& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

/// Solve every pixel independently. `mask` may be empty (all pixels considered).
/// Throws UnsupportedArrangement for rigs whose position is not recoverable.
template <typename Scalar, typename ImageScalar>
SurfelMap<Scalar> solve_image(const std::vector<Image<ImageScalar>>& images, const Image<bool>& mask,
                              const SymmetricRig<Scalar>& rig, const CameraIntrinsics<Scalar>& camera,
                              const SolveOptions& options = {}) {
  const ArrangementClass cls = classify_arrangement(rig, Scalar(options.basis_tol));
  if (!cls.solvable()) throw UnsupportedArrangement(std::string(to_string(cls.kind)) + ": " + cls.diagnostic);
  if (static_cast<int>(images.size()) != rig.n_lights())
    throw ConfigError("image count " + std::to_string(images.size()) + " does not match 2 * n_pairs = " +
                      std::to_string(rig.n_lights()));
  const int height = camera.height;
  const int width = camera.width;
  for (const auto& img : images)
    if (img.rows() != height || img.cols() != width) throw ConfigError("image size does not match the camera");
  if (mask.size() != 0 && (mask.rows() != height || mask.cols() != width))
    throw ConfigError("mask size does not match the camera");

  const bool collinear = cls.kind == ArrangementKind::CollinearDepthOnly;
  const auto layout = make_layout(rig, Scalar(options.basis_tol));

  SurfelMap<Scalar> out;
  out.width = width;
  out.height = height;
  out.pixels.resize(static_cast<std::size_t>(width) * height);

#pragma omp parallel for schedule(dynamic, 4)
  for (int v = 0; v < height; ++v) {
    VectorX<Scalar> m(rig.n_lights());
    for (int u = 0; u < width; ++u) {
      for (int i = 0; i < rig.n_lights(); ++i) m(i) = static_cast<Scalar>(images[static_cast<std::size_t>(i)](v, u));
      const bool valid = mask.size() == 0 || mask(v, u);
      auto stack = make_pixel_stack<Scalar>(m, camera, Scalar(u), Scalar(v), valid);
      Surfel<Scalar>& result = out.at(u, v);
      if (!collinear) {
        result = solve_pixel(layout, rig, stack, options);
        continue;
      }
      if (detail::is_shadowed(stack, Scalar(options.shadow_threshold))) {
        result.status = PixelStatus::shadowed;
        continue;
      }
      try {
        result = solve_collinear(stack, rig, camera, Scalar(u), Scalar(v), options);
      } catch (const Error&) {
        result = Surfel<Scalar>{};
        result.status = PixelStatus::degenerate;
      }
    }
  }
  return out;
}

}  // namespace symlight
