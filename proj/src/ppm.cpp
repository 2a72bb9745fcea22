#include "semreid/data/ppm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "semreid/core/errors.hpp"

namespace semreid::data {

Tensor read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open image: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0)
    throw LoadError("unsupported image format (need binary P6, maxval 255): " + path);
  in.get();  // single whitespace after header
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw LoadError("truncated image: " + path);
  Tensor img{3, h, w};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img[(static_cast<std::size_t>(c) * h + y) * w + x] =
            buf[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 127.5 - 1.0;
  return img;
}

void write_ppm(const std::string& path, const Tensor& image) {
  const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (c != 3) throw ShapeError("write_ppm expects a (3, H, W) image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write image: " + path);
  out << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = image[(static_cast<std::size_t>(ch) * h + y) * w + x];
        const double b = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
        buf[(static_cast<std::size_t>(y) * w + x) * 3 + ch] = static_cast<unsigned char>(b);
      }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

}  // namespace semreid::data
