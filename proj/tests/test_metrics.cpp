#include <doctest.h>

#include <random>

#include <json.hpp>

#include "symlight/metrics.hpp"

using namespace symlight;

TEST_CASE("angular_error examples") {
  const Vector3<double> z(0, 0, 1), y(0, 1, 0), x(1, 0, 0);
  CHECK(angular_error_deg(z, z) == 0.0);
  CHECK(angular_error_deg(z, y) == doctest::Approx(90.0).epsilon(1e-14));
  CHECK(angular_error_deg(x, Vector3<double>(1, 1, 0).normalized()) == doctest::Approx(45.0).epsilon(1e-14));
  // Unnormalized inputs are renormalized.
  CHECK(angular_error_deg(Vector3<double>(3, 0, 0), Vector3<double>(2, 2, 0)) == doctest::Approx(45.0));
  // Tiny angles keep full precision.
  CHECK(angular_error_deg(z, Vector3<double>(1e-9, 0, 1)) == doctest::Approx(1e-9 * 180 / std::numbers::pi));
}

TEST_CASE("angular_error symmetry and rotation invariance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const Vector3<double> a = Vector3<double>(g(rng), g(rng), g(rng)).normalized();
    const Vector3<double> b = Vector3<double>(g(rng), g(rng), g(rng)).normalized();
    const Eigen::Matrix3d rot = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
    const double e = angular_error_deg(a, b);
    CHECK(angular_error_deg(b, a) == doctest::Approx(e).epsilon(1e-13));
    CHECK(angular_error_deg(rot * a, rot * b) == doctest::Approx(e).epsilon(1e-9));
  }
}

namespace {

Image<double> ramp(int h, int w) {
  Image<double> z(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) z(v, u) = 3.0 + 0.1 * u + 0.05 * v;
  return z;
}

}  // namespace

TEST_CASE("align_depth examples") {
  const Image<double> gt = ramp(6, 7);
  const Image<bool> all = Image<bool>::Constant(6, 7, true);

  const auto inv = align_depth(2.0 * gt + 3.0, gt, all);
  CHECK(inv.scale == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(inv.shift == doctest::Approx(-1.5).epsilon(1e-13));
  CHECK((apply_alignment(inv, 2.0 * gt + 3.0) - gt).abs().maxCoeff() < 1e-12);

  const auto id = align_depth(gt, gt, all);
  CHECK(id.scale == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(id.shift) < 1e-12);

  CHECK_THROWS_AS(align_depth(Image<double>::Constant(6, 7, 2.0), gt, all), DegenerateFit);
  Image<bool> one = Image<bool>::Constant(6, 7, false);
  one(2, 2) = true;
  CHECK_THROWS_AS(align_depth(gt, gt, one), DegenerateFit);
}

TEST_CASE("align_depth matches the normal equations on noisy data") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.05);
  const Image<double> gt = ramp(10, 12);
  Image<double> est = 1.7 * gt - 0.4;
  for (int i = 0; i < est.size(); ++i) est.data()[i] += g(rng);
  Image<bool> mask = Image<bool>::Constant(10, 12, true);
  mask(0, 0) = mask(3, 4) = false;

  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d atb = Eigen::Vector2d::Zero();
  for (int v = 0; v < 10; ++v)
    for (int u = 0; u < 12; ++u) {
      if (!mask(v, u)) continue;
      const Eigen::Vector2d row(est(v, u), 1.0);
      ata += row * row.transpose();
      atb += row * gt(v, u);
    }
  const Eigen::Vector2d ab = ata.ldlt().solve(atb);
  const auto fit = align_depth(est, gt, mask);
  CHECK(fit.scale == doctest::Approx(ab(0)).epsilon(1e-10));
  CHECK(fit.shift == doctest::Approx(ab(1)).epsilon(1e-10));

  SUBCASE("idempotent") {
    const Image<double> aligned = apply_alignment(fit, est);
    const auto again = align_depth(aligned, gt, mask);
    CHECK(std::abs(again.scale - 1.0) < 1e-10);
    CHECK(std::abs(again.shift) < 1e-10);
  }
}

TEST_CASE("shift-only alignment") {
  const Image<double> gt = ramp(4, 4);
  const Image<bool> all = Image<bool>::Constant(4, 4, true);
  const auto al = align_depth_shift(gt - 0.75, gt, all);
  CHECK(al.scale == 1.0);
  CHECK(al.shift == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("rel_abs_depth_error examples") {
  const Image<double> gt = ramp(5, 5);
  Image<bool> mask = Image<bool>::Constant(5, 5, true);
  CHECK(rel_abs_depth_error(gt, gt, mask) == 0.0);
  CHECK(rel_abs_depth_error(1.01 * gt, gt, mask) == doctest::Approx(0.01).epsilon(1e-12));

  SUBCASE("3x3 crop by hand") {
    Image<double> est = gt;
    est(0, 0) += 0.3;
    est(1, 2) -= 0.2;
    Image<bool> crop = Image<bool>::Constant(5, 5, false);
    crop.block(0, 0, 3, 3).setConstant(true);
    Image<double> map;
    const double err = rel_abs_depth_error(est, gt, crop, &map);
    const double by_hand = (0.3 / gt(0, 0) + 0.2 / gt(1, 2)) / 9.0;
    CHECK(err == doctest::Approx(by_hand).epsilon(1e-12));
    CHECK(std::isnan(map(4, 4)));
    CHECK(map(0, 0) == doctest::Approx(0.3 / gt(0, 0)));
  }
  SUBCASE("invariant to a common rescaling") {
    const Image<double> est = gt * 1.03 + 0.01;
    CHECK(rel_abs_depth_error(7.0 * est, 7.0 * gt, mask) ==
          doctest::Approx(rel_abs_depth_error(est, gt, mask)).epsilon(1e-12));
  }
}

TEST_CASE("pairwise_sum") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i % 7);
  double naive = 0;
  for (double x : v) naive += x;
  CHECK(pairwise_sum(v) == doctest::Approx(naive).epsilon(1e-13));
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
  std::vector<double> ones(1 << 20, 1.0);
  CHECK(pairwise_sum(ones) == static_cast<double>(1 << 20));
}

TEST_CASE("evaluate and the JSON report") {
  const int h = 6, w = 6;
  const Image<double> gt = ramp(h, w);
  Image3<double> n_gt{Image<double>::Zero(h, w), Image<double>::Zero(h, w), Image<double>::Constant(h, w, -1.0)};
  Image3<double> n_est = n_gt;
  n_est[0](0, 0) = 1.0;
  n_est[2](0, 0) = 0.0;  // 90 degrees off at one pixel
  const Image<bool> all = Image<bool>::Constant(h, w, true);
  Image<bool> est_valid = all;
  est_valid(5, 5) = false;
  const auto report = evaluate(n_est, gt + 5.0, est_valid, n_gt, gt, all);
  CHECK(report.pixel_count == 35);
  CHECK(report.mean_angular_error_deg == doctest::Approx(90.0 / 35.0));
  CHECK(report.mean_rel_abs_depth_error < 1e-12);
  CHECK(report.shift == doctest::Approx(-5.0 * report.scale));

  const auto j = nlohmann::json::parse(to_json(report));
  CHECK(j.size() == 5);
  for (const char* key : {"mean_angular_error_deg", "mean_rel_abs_depth_error", "scale", "shift", "pixel_count"})
    CHECK(j.contains(key));
  CHECK(j["pixel_count"].get<long>() == 35);
}
