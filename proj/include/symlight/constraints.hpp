#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "symlight/geometry.hpp"

namespace symlight {

/// Origin of a constraint row.
///   diff, sum: exact symmetric-light rows (matrix A), linear in m * e.
///   relax_*:   fall-off relaxation rows (matrix A'), linear in e alone.
enum class RowFamily { diff, sum, relax_1a, relax_1b, relax_2a, relax_2b };

inline const char* to_string(RowFamily family) {
  switch (family) {
    case RowFamily::diff: return "diff";
    case RowFamily::sum: return "sum";
    case RowFamily::relax_1a: return "1A";
    case RowFamily::relax_1b: return "1B";
    case RowFamily::relax_2a: return "2A";
    case RowFamily::relax_2b: return "2B";
  }
  return "?";
}

/// Intensities of one pixel, ordered (pair 0 +, pair 0 -, pair 1 +, ...).
template <typename Scalar>
struct PixelStack {
  VectorX<Scalar> intensities;
  Scalar u{0}, v{0};            // pixel coordinate
  Vector2<Scalar> normalized{0, 0};  // (u', v')
  bool valid = true;

  Vector3<Scalar> ray() const { return {normalized.x(), normalized.y(), Scalar(1)}; }
};

template <typename Scalar>
PixelStack<Scalar> make_pixel_stack(VectorX<Scalar> intensities, const CameraIntrinsics<Scalar>& camera, Scalar u,
                                    Scalar v, bool valid = true) {
  PixelStack<Scalar> stack;
  stack.intensities = std::move(intensities);
  stack.u = u;
  stack.v = v;
  stack.normalized = camera.normalized(u, v).template head<2>();
  stack.valid = valid;
  return stack;
}

/// A block of constraint rows with their provenance.
template <typename Scalar>
struct RowBlock {
  MatrixX<Scalar> rows;
  std::vector<RowFamily> tags;

  int size() const { return static_cast<int>(tags.size()); }
};

template <typename Scalar>
struct ConstraintSystem {
  RowBlock<Scalar> A;
  RowBlock<Scalar> A_prime;

  int cols() const { return static_cast<int>(A.rows.cols()); }

  /// [A; A'].
  MatrixX<Scalar> stacked() const {
    MatrixX<Scalar> m(A.rows.rows() + A_prime.rows.rows(), A.rows.cols());
    m << A.rows, A_prime.rows;
    return m;
  }
};

/// Rig-dependent structure of the constraint rows, computed once and shared by all pixels.
template <typename Scalar>
struct ConstraintLayout {
  struct Target {
    int pair;
    Scalar s, t;  // relative position = s * basis1 + t * basis2
  };
  struct Triple {
    int ref, j, k;
    Scalar cj, ck;  // 1 / (2 (beta_j^2 - beta_ref^2)), same for k
  };

  int n_pairs = 0;
  bool collinear = false;
  OffsetMode offset_mode = OffsetMode::xyz;
  int basis1 = 0;
  int basis2 = -1;  // -1 on collinear rigs: every pair is a multiple of basis1
  std::vector<Target> targets;
  std::vector<Triple> triples;
  std::vector<std::pair<int, int>> equal_radius;
  std::vector<Vector2<Scalar>> directions;  // beta_k [sin, cos] per pair
};

/// Choose the basis pairs and enumerate the combinatorial row patterns.
/// Bases maximize |beta_i beta_j sin(theta_i - theta_j)|.
template <typename Scalar>
ConstraintLayout<Scalar> make_layout(const SymmetricRig<Scalar>& rig, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  using std::cos;
  using std::sin;
  ConstraintLayout<Scalar> layout;
  const int n = rig.n_pairs();
  layout.n_pairs = n;
  layout.offset_mode = rig.offset_mode;
  layout.collinear = is_collinear(rig, tol);
  for (const auto& pair : rig.pairs) layout.directions.push_back(pair.direction());

  auto beta = [&](int k) { return rig.pairs[static_cast<std::size_t>(k)].radius_ratio; };
  auto theta = [&](int k) { return rig.pairs[static_cast<std::size_t>(k)].angle; };

  if (layout.collinear) {
    layout.basis1 = 0;
    for (int k = 1; k < n; ++k) {
      const Scalar lambda = beta(k) * cos(theta(k) - theta(0)) / beta(0);
      layout.targets.push_back({k, lambda, Scalar(0)});
    }
  } else {
    Scalar best = -1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Scalar det = abs(beta(i) * beta(j) * sin(theta(i) - theta(j)));
        if (det > best + Scalar(1e-12)) {
          best = det;
          layout.basis1 = i;
          layout.basis2 = j;
        }
      }
    const auto& b1 = rig.pairs[static_cast<std::size_t>(layout.basis1)];
    const auto& b2 = rig.pairs[static_cast<std::size_t>(layout.basis2)];
    for (int k = 0; k < n; ++k) {
      if (k == layout.basis1 || k == layout.basis2) continue;
      const auto c = basis_coefficients(b1, b2, rig.pairs[static_cast<std::size_t>(k)], tol);
      layout.targets.push_back({k, c.s, c.t});
    }
  }

  const Scalar same = Scalar(1e-12);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (abs(beta(i) - beta(j)) <= same) layout.equal_radius.emplace_back(i, j);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        if (abs(beta(i) - beta(j)) <= same || abs(beta(i) - beta(k)) <= same || abs(beta(j) - beta(k)) <= same)
          continue;
        const Scalar bi2 = beta(i) * beta(i);
        layout.triples.push_back({i, j, k, Scalar(1) / (2 * (beta(j) * beta(j) - bi2)),
                                  Scalar(1) / (2 * (beta(k) * beta(k) - bi2))});
      }
  return layout;
}

namespace detail {

template <typename Scalar>
class RowWriter {
 public:
  explicit RowWriter(int cols) : cols_(cols) {}

  RowWriter& begin() {
    row_ = VectorX<Scalar>::Zero(cols_);
    return *this;
  }
  VectorX<Scalar>& row() { return row_; }

  // Appends the current row normalized to unit length. Zero rows carry no information and are dropped.
  void commit(RowFamily family) {
    using std::isfinite;
    const Scalar norm = row_.norm();
    if (!(norm > std::numeric_limits<Scalar>::min()) || !isfinite(norm)) return;
    rows_.push_back(row_ / norm);
    tags_.push_back(family);
  }

  RowBlock<Scalar> finish() const {
    RowBlock<Scalar> block;
    block.rows.resize(static_cast<Eigen::Index>(rows_.size()), cols_);
    for (std::size_t i = 0; i < rows_.size(); ++i) block.rows.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
    block.tags = tags_;
    return block;
  }

 private:
  int cols_;
  VectorX<Scalar> row_;
  std::vector<VectorX<Scalar>> rows_;
  std::vector<RowFamily> tags_;
};

}  // namespace detail

/// Exact symmetric-light rows: pair differences expanded through the basis,
/// and equality of all pair sums.
template <typename Scalar>
RowBlock<Scalar> build_A(const ConstraintLayout<Scalar>& layout, const PixelStack<Scalar>& stack) {
  const int n = layout.n_pairs;
  const auto& m = stack.intensities;
  detail::RowWriter<Scalar> w(2 * n);

  // c * (m+ e+ - m- e-) for pair k
  auto add_diff = [&](VectorX<Scalar>& row, int k, Scalar c) {
    row(2 * k) += c * m(2 * k);
    row(2 * k + 1) -= c * m(2 * k + 1);
  };
  auto add_sum = [&](VectorX<Scalar>& row, int k, Scalar c) {
    row(2 * k) += c * m(2 * k);
    row(2 * k + 1) += c * m(2 * k + 1);
  };

  for (const auto& target : layout.targets) {
    auto& row = w.begin().row();
    add_diff(row, layout.basis1, target.s);
    if (layout.basis2 >= 0) add_diff(row, layout.basis2, target.t);
    add_diff(row, target.pair, Scalar(-1));
    w.commit(RowFamily::diff);
  }
  for (int k = 1; k < n; ++k) {
    auto& row = w.begin().row();
    add_sum(row, 0, Scalar(1));
    add_sum(row, k, Scalar(-1));
    w.commit(RowFamily::sum);
  }
  return w.finish();
}

/// Relaxation rows: 1A (distinct-radius triples), 1B (equal-radius pairs), and
/// 2A (xyz offset) or 2B (z-only offset) on the pair differences of e.
template <typename Scalar>
RowBlock<Scalar> build_A_prime(const ConstraintLayout<Scalar>& layout, const PixelStack<Scalar>& stack) {
  using std::abs;
  using std::max;
  const int n = layout.n_pairs;
  detail::RowWriter<Scalar> w(2 * n);

  auto add_sum = [](VectorX<Scalar>& row, int k, Scalar c) {
    row(2 * k) += c;
    row(2 * k + 1) += c;
  };
  auto add_diff = [](VectorX<Scalar>& row, int k, Scalar c) {
    row(2 * k) += c;
    row(2 * k + 1) -= c;
  };

  for (const auto& tr : layout.triples) {
    auto& row = w.begin().row();
    add_sum(row, tr.j, tr.cj);
    add_sum(row, tr.ref, -tr.cj);
    add_sum(row, tr.k, -tr.ck);
    add_sum(row, tr.ref, tr.ck);
    w.commit(RowFamily::relax_1a);
  }
  for (const auto& [i, j] : layout.equal_radius) {
    auto& row = w.begin().row();
    add_sum(row, i, Scalar(1));
    add_sum(row, j, Scalar(-1));
    w.commit(RowFamily::relax_1b);
  }

  const bool z_offset = layout.offset_mode != OffsetMode::xyz;
  if (!z_offset || layout.collinear) {
    // On collinear rigs this row is the single-basis form and holds for any offset.
    const RowFamily family = z_offset ? RowFamily::relax_2b : RowFamily::relax_2a;
    for (const auto& target : layout.targets) {
      auto& row = w.begin().row();
      add_diff(row, layout.basis1, target.s);
      if (layout.basis2 >= 0) add_diff(row, layout.basis2, target.t);
      add_diff(row, target.pair, Scalar(-1));
      w.commit(family);
    }
  } else {
    // p^T s'_k, with s'_k = beta_k [sin, cos, 0].
    VectorX<Scalar> proj(n);
    Scalar scale = 0;
    for (int k = 0; k < n; ++k) {
      proj(k) = stack.normalized.dot(layout.directions[static_cast<std::size_t>(k)]);
      scale = max(scale, layout.directions[static_cast<std::size_t>(k)].norm());
    }
    scale *= max(Scalar(1), stack.normalized.norm());
    if (stack.normalized.norm() <= Scalar(1e-12)) {
      // Principal point: p^T s'_k = 0 for every pair, so each pair difference vanishes on its own.
      for (int k = 0; k < n; ++k) {
        auto& row = w.begin().row();
        add_diff(row, k, Scalar(1));
        w.commit(RowFamily::relax_2b);
      }
      return w.finish();
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (max(abs(proj(i)), abs(proj(j))) <= Scalar(1e-12) * scale) continue;
        auto& row = w.begin().row();
        add_diff(row, j, proj(i));
        add_diff(row, i, -proj(j));
        w.commit(RowFamily::relax_2b);
      }
  }
  return w.finish();
}

template <typename Scalar>
RowBlock<Scalar> build_A(const SymmetricRig<Scalar>& rig, const PixelStack<Scalar>& stack) {
  return build_A(make_layout(rig), stack);
}

template <typename Scalar>
RowBlock<Scalar> build_A_prime(const SymmetricRig<Scalar>& rig, const PixelStack<Scalar>& stack) {
  return build_A_prime(make_layout(rig), stack);
}

template <typename Scalar>
ConstraintSystem<Scalar> build_system(const ConstraintLayout<Scalar>& layout, const PixelStack<Scalar>& stack) {
  return {build_A(layout, stack), build_A_prime(layout, stack)};
}

/// Number of singular values above rel_tol * sigma_max.
template <typename Derived>
int numeric_rank(const Eigen::MatrixBase<Derived>& m, typename Derived::RealScalar rel_tol = 1e-8) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return 0;
  const MatrixX<Scalar> dense = m;
  const Eigen::JacobiSVD<MatrixX<Scalar>> svd(dense);
  const auto& sigma = svd.singularValues();
  if (sigma.size() == 0 || !(sigma(0) > 0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > rel_tol * sigma(0)) ++rank;
  return rank;
}

}  // namespace symlight
