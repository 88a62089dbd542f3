#pragma once

// Grayscale rendering of nodal scalar fields as binary PPM (P6) images.

#include "tihom/lattice.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tihom {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// Places node j at its Smith coordinates: the last Smith factor runs along
/// the columns, the remaining coordinates (slowest first) along the rows.
/// Values are scaled to [0, 255] by the maximum over the field; an all-zero
/// field renders black.
GrayImage render_smith_grid(const PatternMatrix& M, const std::vector<double>& values);

/// Writes a P6 image with identical red, green and blue channels.
void write_ppm(const std::filesystem::path& path, const GrayImage& image);
/// Reads a P6 image written by write_ppm (gray channel of each pixel).
GrayImage read_ppm(const std::filesystem::path& path);

}  // namespace tihom
