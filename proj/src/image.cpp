#include "tihom/image.hpp"

#include "tihom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace tihom {

GrayImage render_smith_grid(const PatternMatrix& M, const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(M.size())) {
    throw ShapeError("image needs one value per pattern node");
  }
  GrayImage img;
  const IVec& f = M.factors();
  img.width = static_cast<int>(f(f.size() - 1));
  img.height = static_cast<int>(M.size() / f(f.size() - 1));
  double top = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("image values must be finite and nonnegative");
    top = std::max(top, v);
  }
  // Smith order is row-major with the last coordinate fastest, so the
  // linear node index is already the raster position
  img.pixels.resize(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    img.pixels[j] = top > 0.0 ? static_cast<std::uint8_t>(std::lround(255.0 * values[j] / top)) : 0;
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IngestionError("cannot open '" + path.string() + "' for writing");
  os << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (std::uint8_t p : image.pixels) {
    const char rgb[3] = {static_cast<char>(p), static_cast<char>(p), static_cast<char>(p)};
    os.write(rgb, 3);
  }
  if (!os) throw IngestionError("failed writing '" + path.string() + "'");
}

GrayImage read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestionError("cannot open image '" + path.string() + "'");
  std::string magic;
  int maxval = 0;
  GrayImage img;
  is >> magic >> img.width >> img.height >> maxval;
  if (magic != "P6" || img.width <= 0 || img.height <= 0 || maxval != 255) {
    throw IngestionError("'" + path.string() + "' is not an 8-bit P6 image");
  }
  is.get();
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  std::vector<char> raw(3 * n);
  if (!is.read(raw.data(), static_cast<std::streamsize>(raw.size()))) throw IngestionError("truncated image");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[3 * i] != raw[3 * i + 1] || raw[3 * i] != raw[3 * i + 2]) throw IngestionError("image is not grayscale");
    img.pixels[i] = static_cast<std::uint8_t>(raw[3 * i]);
  }
  return img;
}

}  // namespace tihom
