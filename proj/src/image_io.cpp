#include "symlight/image_io.hpp"

#include <png.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "symlight/errors.hpp"

namespace symlight {

namespace {

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0x0000ff00u) | ((x << 8) & 0x00ff0000u) | (x << 24);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

void write_pfm_channels(const std::filesystem::path& path, const std::vector<const Image<float>*>& channels) {
  const auto rows = channels.front()->rows();
  const auto cols = channels.front()->cols();
  for (const auto* c : channels)
    if (c->rows() != rows || c->cols() != cols) throw IoError("pfm: channels differ in size");
  auto os = open_out(path);
  os << (channels.size() == 3 ? "PF" : "Pf") << '\n' << cols << ' ' << rows << '\n' << "-1.0" << '\n';

  const std::size_t nc = channels.size();
  std::vector<std::uint32_t> line(static_cast<std::size_t>(cols) * nc);
  for (Eigen::Index v = rows - 1; v >= 0; --v) {
    for (Eigen::Index u = 0; u < cols; ++u)
      for (std::size_t c = 0; c < nc; ++c) {
        auto bits = std::bit_cast<std::uint32_t>((*channels[c])(v, u));
        if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
        line[static_cast<std::size_t>(u) * nc + c] = bits;
      }
    os.write(reinterpret_cast<const char*>(line.data()), static_cast<std::streamsize>(line.size() * 4));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const Image<float>& image) { write_pfm_channels(path, {&image}); }

void write_pfm(const std::filesystem::path& path, const Image3<float>& image) {
  write_pfm_channels(path, {&image[0], &image[1], &image[2]});
}

std::vector<Image<float>> read_pfm_channels(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string magic;
  long width = 0, height = 0;
  std::string scale_text;
  is >> magic >> width >> height >> scale_text;
  if (!is || (magic != "PF" && magic != "Pf")) throw IoError("not a PFM file: " + path.string());
  if (width <= 0 || height <= 0) throw IoError("pfm: bad dimensions in " + path.string());
  double scale = 0;
  try {
    scale = std::stod(scale_text);
  } catch (const std::exception&) {
    throw IoError("pfm: bad scale in " + path.string());
  }
  if (scale == 0) throw IoError("pfm: zero scale in " + path.string());
  is.get();  // the single whitespace byte ending the header

  const std::size_t nc = magic == "PF" ? 3 : 1;
  const bool file_little = scale < 0;
  const bool swap = file_little != (std::endian::native == std::endian::little);

  std::vector<Image<float>> channels(nc, Image<float>(height, width));
  std::vector<std::uint32_t> line(static_cast<std::size_t>(width) * nc);
  for (long v = height - 1; v >= 0; --v) {
    is.read(reinterpret_cast<char*>(line.data()), static_cast<std::streamsize>(line.size() * 4));
    if (!is) throw IoError("pfm: truncated data in " + path.string());
    for (long u = 0; u < width; ++u)
      for (std::size_t c = 0; c < nc; ++c) {
        std::uint32_t bits = line[static_cast<std::size_t>(u) * nc + c];
        if (swap) bits = byteswap32(bits);
        channels[c](v, u) = std::bit_cast<float>(bits);
      }
  }
  return channels;
}

Image<float> read_pfm(const std::filesystem::path& path) {
  auto channels = read_pfm_channels(path);
  if (channels.size() != 1) throw IoError("expected a single-channel PFM: " + path.string());
  return std::move(channels.front());
}

Image3<float> read_pfm3(const std::filesystem::path& path) {
  auto channels = read_pfm_channels(path);
  if (channels.size() != 3) throw IoError("expected a three-channel PFM: " + path.string());
  return {std::move(channels[0]), std::move(channels[1]), std::move(channels[2])};
}

namespace {

void write_png_buffer(const std::filesystem::path& path, int width, int height, png_uint_32 format,
                      const std::vector<std::uint8_t>& buffer) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw IoError("png write failed for " + path.string() + ": " + img.message);
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image<std::uint8_t>& gray) {
  std::vector<std::uint8_t> buffer(gray.data(), gray.data() + gray.size());
  write_png_buffer(path, static_cast<int>(gray.cols()), static_cast<int>(gray.rows()), PNG_FORMAT_GRAY, buffer);
}

void write_png(const std::filesystem::path& path, const Image3<std::uint8_t>& rgb) {
  const auto rows = rgb[0].rows();
  const auto cols = rgb[0].cols();
  std::vector<std::uint8_t> buffer(static_cast<std::size_t>(rows * cols * 3));
  for (Eigen::Index i = 0; i < rows * cols; ++i)
    for (int c = 0; c < 3; ++c) buffer[static_cast<std::size_t>(i * 3 + c)] = rgb[c].data()[i];
  write_png_buffer(path, static_cast<int>(cols), static_cast<int>(rows), PNG_FORMAT_RGB, buffer);
}

Image<std::uint8_t> read_png_gray(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str()))
    throw IoError("cannot read png " + path.string() + ": " + img.message);
  img.format = PNG_FORMAT_GRAY;
  Image<std::uint8_t> out(static_cast<Eigen::Index>(img.height), static_cast<Eigen::Index>(img.width));
  if (!png_image_finish_read(&img, nullptr, out.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode png " + path.string() + ": " + img.message);
  }
  return out;
}

}  // namespace symlight
