#pragma once

#include <string>

#include "semreid/core/tensor.hpp"

namespace semreid::data {

// Binary PPM (P6), 8-bit. Pixel values map linearly between [0,255] bytes
// and the library's [-1, 1] convention.
Tensor read_ppm(const std::string& path);                // -> (3, H, W) in [-1, 1]
void write_ppm(const std::string& path, const Tensor& image);

}  // namespace semreid::data
