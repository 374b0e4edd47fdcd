#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "symlight/image.hpp"

namespace symlight {

// Portable float map: "Pf" (gray) or "PF" (RGB), rows stored bottom to top,
// sign of the scale field gives the byte order. Writes little-endian, scale -1.
void write_pfm(const std::filesystem::path& path, const Image<float>& image);
void write_pfm(const std::filesystem::path& path, const Image3<float>& image);

/// Channels of any PFM (1 or 3 entries). Accepts both byte orders.
std::vector<Image<float>> read_pfm_channels(const std::filesystem::path& path);
Image<float> read_pfm(const std::filesystem::path& path);
Image3<float> read_pfm3(const std::filesystem::path& path);

// 8-bit PNG for masks, status maps and visualizations.
void write_png(const std::filesystem::path& path, const Image<std::uint8_t>& gray);
void write_png(const std::filesystem::path& path, const Image3<std::uint8_t>& rgb);

/// Any PNG, converted to 8-bit gray.
Image<std::uint8_t> read_png_gray(const std::filesystem::path& path);

}  // namespace symlight
