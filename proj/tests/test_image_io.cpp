#include <doctest.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <random>

#include "support.hpp"
#include "symlight/errors.hpp"
#include "symlight/image_io.hpp"

using namespace symlight;

namespace {

Image<float> random_map(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(-1e3f, 1e3f);
  Image<float> img(h, w);
  for (int i = 0; i < img.size(); ++i) img.data()[i] = uni(rng);
  // Negative values, signed zeros, denormals and extremes.
  img(0, 0) = -0.0f;
  img(0, 1) = std::numeric_limits<float>::denorm_min();
  img(0, 2) = -std::numeric_limits<float>::denorm_min() * 37;
  img(1, 0) = std::numeric_limits<float>::max();
  img(1, 1) = std::numeric_limits<float>::lowest();
  img(1, 2) = std::numeric_limits<float>::min() / 3;
  return img;
}

bool bit_equal(const Image<float>& a, const Image<float>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(float)) == 0;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("pfm gray round trip is bit exact") {
  const auto dir = testing::scratch_dir("pfm_gray");
  const Image<float> img = random_map(13, 17, 1);
  write_pfm(dir / "a.pfm", img);
  CHECK(bit_equal(read_pfm(dir / "a.pfm"), img));
  CHECK(read_all(dir / "a.pfm").rfind("Pf\n17 13\n-1.0\n", 0) == 0);
}

TEST_CASE("pfm color round trip is bit exact") {
  const auto dir = testing::scratch_dir("pfm_rgb");
  const Image3<float> img{random_map(9, 5, 2), random_map(9, 5, 3), random_map(9, 5, 4)};
  write_pfm(dir / "c.pfm", img);
  const auto back = read_pfm3(dir / "c.pfm");
  for (int c = 0; c < 3; ++c) CHECK(bit_equal(back[c], img[c]));
  CHECK_THROWS_AS(read_pfm(dir / "c.pfm"), IoError);
}

TEST_CASE("pfm rows are stored bottom to top") {
  const auto dir = testing::scratch_dir("pfm_order");
  Image<float> img(2, 1);
  img << 1.0f, 2.0f;  // row 0 = 1, row 1 = 2
  write_pfm(dir / "o.pfm", img);
  const std::string bytes = read_all(dir / "o.pfm");
  const std::string body = bytes.substr(bytes.size() - 8);
  float first;
  std::memcpy(&first, body.data(), 4);
  if constexpr (std::endian::native == std::endian::little) CHECK(first == 2.0f);
}

TEST_CASE("big-endian pfm files are accepted") {
  const auto dir = testing::scratch_dir("pfm_be");
  const float values[2][3] = {{1.5f, -2.25f, 3e-40f}, {4.0f, 0.125f, -7.0f}};  // top row first
  std::ofstream os(dir / "be.pfm", std::ios::binary);
  os << "Pf\n3 2\n2.5\n";
  for (int v = 1; v >= 0; --v)
    for (int u = 0; u < 3; ++u) {
      const auto bits = std::bit_cast<std::uint32_t>(values[v][u]);
      const char be[4] = {char(bits >> 24), char(bits >> 16), char(bits >> 8), char(bits)};
      os.write(be, 4);
    }
  os.close();
  const auto img = read_pfm(dir / "be.pfm");
  for (int v = 0; v < 2; ++v)
    for (int u = 0; u < 3; ++u) CHECK(std::bit_cast<std::uint32_t>(img(v, u)) == std::bit_cast<std::uint32_t>(values[v][u]));
}

TEST_CASE("malformed pfm files") {
  const auto dir = testing::scratch_dir("pfm_bad");
  CHECK_THROWS_AS(read_pfm(dir / "missing.pfm"), IoError);
  std::ofstream(dir / "magic.pfm") << "P6\n1 1\n255\n";
  CHECK_THROWS_AS(read_pfm(dir / "magic.pfm"), IoError);
  std::ofstream(dir / "short.pfm") << "Pf\n4 4\n-1.0\nabc";
  CHECK_THROWS_AS(read_pfm(dir / "short.pfm"), IoError);
}

TEST_CASE("png round trip") {
  const auto dir = testing::scratch_dir("png");
  Image<std::uint8_t> gray(5, 7);
  for (int i = 0; i < gray.size(); ++i) gray.data()[i] = static_cast<std::uint8_t>(i * 7);
  write_png(dir / "g.png", gray);
  CHECK((read_png_gray(dir / "g.png") == gray).all());

  Image3<std::uint8_t> rgb = make_image3<std::uint8_t>(4, 3, 0);
  rgb[2].setConstant(200);
  write_png(dir / "c.png", rgb);
  CHECK(read_png_gray(dir / "c.png").rows() == 4);
  CHECK_THROWS_AS(read_png_gray(dir / "none.png"), IoError);
}
