#pragma once

#include <string>

#include "genomotif/rasterizer.hpp"
#include "genomotif/susan.hpp"

namespace genomotif {

/// 8-bit RGB, no alpha, no timestamp chunk: identical images give identical files.
void write_png(const MotifImage& image, const std::string& path);
/// 8-bit grayscale PNG.
void write_png(const GrayArray& gray, const std::string& path);

/// Decodes any 8-bit PNG to RGB (grayscale is expanded, alpha dropped).
MotifImage read_png(const std::string& path);

}  // namespace genomotif
