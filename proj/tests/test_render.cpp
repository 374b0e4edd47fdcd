#include <doctest.h>

#include "support.hpp"
#include "symlight/render.hpp"

using namespace symlight;

namespace {

Scene plane(double depth = 6.0, Vector3<double> normal = {0, 0, -1}) {
  Scene s;
  s.kind = SceneKind::plane;
  s.plane_depth = depth;
  s.plane_normal = normal;
  return s;
}

Scene sphere() {
  Scene s;
  s.kind = SceneKind::sphere;
  return s;
}

}  // namespace

TEST_CASE("center pixel intensity of a fronto-parallel plane") {
  const auto rig = testing::double_o45(OffsetMode::z_only, Vector3<double>::Zero());
  const auto cam = testing::camera();
  const auto cubic = render<double>(plane(), rig, cam, Falloff::cubic);
  const auto relaxed = render<double>(plane(), rig, cam, Falloff::relaxed);
  // Inner lights: d^2 = 1 + 36, shading (s - x)^T n = 6.
  for (int i = 0; i < 4; ++i) {
    CHECK(cubic.images[i](64, 64) == doctest::Approx(6.0 / std::pow(37.0, 1.5)).epsilon(1e-14));
    CHECK(relaxed.images[i](64, 64) == doctest::Approx(6.0 / 37.0).epsilon(1e-14));
  }
  CHECK(cubic.images[0](64, 64) == doctest::Approx(0.026660).epsilon(1e-4));
  CHECK(relaxed.images[0](64, 64) == doctest::Approx(0.162162).epsilon(1e-5));
  // Outer lights: d^2 = 4 + 36.
  CHECK(relaxed.images[4](64, 64) == doctest::Approx(6.0 / 40.0).epsilon(1e-14));
  CHECK(cubic.mask(64, 64));
  CHECK(cubic.gt_depth(64, 64) == doctest::Approx(6.0));
}

TEST_CASE("grazing lights are masked") {
  // Light plane coincides with the surface: every shading term is exactly zero.
  const auto rig = testing::double_o45(OffsetMode::z_only, Vector3<double>(0, 0, 6));
  const auto out = render<double>(plane(), rig, testing::camera(32, 80), Falloff::cubic);
  CHECK(out.mask.count() == 0);
  CHECK((out.images[0] == 0).all());
}

TEST_CASE("ray_surface_point") {
  const auto cam = testing::camera();
  const auto hit = ray_surface_point(cam, 64, 64, plane());
  REQUIRE(hit);
  CHECK((hit->x - Vector3<double>(0, 0, 6)).norm() < 1e-15);
  CHECK((hit->n - Vector3<double>(0, 0, -1)).norm() < 1e-15);

  const auto pole = ray_surface_point(cam, 64, 64, sphere());
  REQUIRE(pole);
  CHECK((pole->x - Vector3<double>(0, 0, 5)).norm() < 1e-15);
  CHECK((pole->n - Vector3<double>(0, 0, -1)).norm() < 1e-15);

  const auto off = ray_surface_point(cam, 10, 100, plane(4.5));
  REQUIRE(off);
  CHECK((off->x - 4.5 * cam.normalized(10, 100)).norm() < 1e-14);

  CHECK(!ray_surface_point(cam, 0, 0, sphere()));
}

TEST_CASE("tilted plane normal faces the camera") {
  const auto cam = testing::camera();
  const auto hit = ray_surface_point(cam, 30, 90, plane(6.0, {0.3, -0.2, 1.0}));
  REQUIRE(hit);
  CHECK(hit->n.dot(hit->x) < 0);
  CHECK(std::abs(hit->n.normalized().dot(Vector3<double>(0.3, -0.2, 1.0).normalized())) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // The hit lies on the plane through [0, 0, 6].
  CHECK(std::abs((hit->x - Vector3<double>(0, 0, 6)).dot(hit->n)) < 1e-12);
}

TEST_CASE("relaxed intensity equals cubic intensity times distance") {
  const auto rig = testing::double_o45(OffsetMode::xyz, {0.3, 0.4, 0.5});
  const auto cam = testing::camera(64, 150);
  const auto cubic = render<double>(sphere(), rig, cam, Falloff::cubic);
  const auto relaxed = render<double>(sphere(), rig, cam, Falloff::relaxed);
  int checked = 0;
  for (int v = 0; v < 64; ++v)
    for (int u = 0; u < 64; ++u) {
      if (!cubic.mask(v, u)) continue;
      const Vector3<double> x = cubic.gt_depth(v, u) * cam.normalized(u, v);
      for (int i = 0; i < rig.n_lights(); ++i) {
        const double d = (rig.metric_light(i) - x).norm();
        CHECK(relaxed.images[i](v, u) == doctest::Approx(cubic.images[i](v, u) * d).epsilon(1e-12));
      }
      ++checked;
    }
  CHECK(checked > 500);
}

TEST_CASE("ring light on a fronto-parallel plane renders mirror-image pairs") {
  const auto rig = testing::make_rig({{1, 0}, {1, 50}, {1, 100}}, OffsetMode::z_only);
  const auto cam = testing::camera(64, 90);
  const auto out = render<double>(plane(3.0), rig, cam, Falloff::cubic);
  for (int k = 0; k < rig.n_pairs(); ++k)
    for (int v = 1; v < 64; ++v)
      for (int u = 1; u < 64; ++u)
        CHECK(out.images[2 * k](v, u) == doctest::Approx(out.images[2 * k + 1](64 - v, 64 - u)).epsilon(1e-12));
}

TEST_CASE("heightfield of a plane reproduces the plane normal") {
  const auto cam = testing::camera(32, 60);
  const Scene reference = plane(5.0, {0.2, 0.1, -1.0});
  Scene hf;
  hf.kind = SceneKind::heightfield;
  hf.heightfield = Image<double>::Zero(32, 32);
  for (int v = 0; v < 32; ++v)
    for (int u = 0; u < 32; ++u) hf.heightfield(v, u) = ray_surface_point(cam, u, v, reference)->x.z();
  for (int v = 0; v < 32; v += 5)
    for (int u = 0; u < 32; u += 5) {
      const auto a = ray_surface_point(cam, u, v, hf);
      const auto b = ray_surface_point(cam, u, v, reference);
      REQUIRE(a);
      CHECK((a->n - b->n).norm() < 1e-9);
      CHECK((a->x - b->x).norm() < 1e-12);
    }
}

TEST_CASE("render requires a metric rig") {
  auto rig = testing::double_o45();
  rig.absolute_radius.reset();
  CHECK_THROWS_AS(render<float>(sphere(), rig, testing::camera(16, 30), Falloff::cubic), RigNotMetric);
}

TEST_CASE("scene validation") {
  const auto cam = testing::camera(16, 30);
  Scene s = sphere();
  s.sphere_center.z() = 0.5;
  CHECK_THROWS_AS(validate(s, cam), ConfigError);
  s = plane(-1.0);
  CHECK_THROWS_AS(validate(s, cam), ConfigError);
  s = plane();
  s.albedo = 0;
  CHECK_THROWS_AS(validate(s, cam), ConfigError);
}

TEST_CASE("median light distance") {
  // Plane at depth 6 seen only at the center pixel: distances sqrt(37) (x4) and sqrt(40) (x4).
  const auto rig = testing::double_o45(OffsetMode::z_only, Vector3<double>::Zero());
  const auto cam = testing::camera(8, 10);
  Image<double> depth = Image<double>::Constant(8, 8, 6.0);
  Image<bool> mask = Image<bool>::Constant(8, 8, false);
  mask(4, 4) = true;
  CHECK(median_light_distance(depth, mask, rig, cam) == doctest::Approx(std::sqrt(40.0)));
  mask(4, 4) = false;
  CHECK_THROWS_AS(median_light_distance(depth, mask, rig, cam), ConfigError);
}

TEST_CASE("sensor noise is seeded and quantized") {
  std::vector<Image<float>> a{Image<float>::Constant(8, 8, 0.25f)};
  auto b = a;
  SensorNoise noise;
  noise.read_sigma = 0.01;
  noise.bits = 8;
  noise.seed = 11;
  apply_sensor_noise(a, noise);
  apply_sensor_noise(b, noise);
  CHECK((a[0] == b[0]).all());
  for (int i = 0; i < a[0].size(); ++i) {
    const double level = a[0].data()[i] * 255.0;
    CHECK(std::abs(level - std::round(level)) < 1e-4);
  }
  CHECK((a[0] != 0.25f).any());
}
