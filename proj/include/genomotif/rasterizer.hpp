#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace genomotif {

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 255;
  std::uint8_t b = 255;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

enum class FillMode { Rings, Disk };

std::string_view to_string(FillMode mode);
FillMode parse_fill_mode(std::string_view s);

struct MotifGeometry {
  int width = 200;
  int height = 200;
  Pixel center{100, 100};
  int max_radius = 99;
  FillMode fill_mode = FillMode::Rings;

  /// Square geometry of side `size` centred at (size/2, size/2) with the largest radius
  /// that still fits.
  static MotifGeometry square(int size, FillMode mode = FillMode::Rings);

  /// Throws Usage if the circle does not fit inside the image.
  void validate() const;

  friend bool operator==(const MotifGeometry&, const MotifGeometry&) = default;
};

/// Pixels stored row-major, RGB interleaved.
class MotifImage {
 public:
  MotifImage() = default;
  MotifImage(int width, int height, Rgb fill = kWhite);

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  bool contains(Pixel p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

  MotifGeometry geometry;
  std::string source_accession;

  friend bool operator==(const MotifImage& a, const MotifImage& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.bytes_ == b.bytes_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Table of nucleobase colours: A yellow, C blue, G green, T/U red, anything else black.
Rgb base_color(char base);

/// Midpoint-circle perimeter for `radius` around `center`, sorted counter-clockwise by
/// angle starting at the east point (center.x + radius, center.y).
std::vector<Pixel> circle_points(int radius, Pixel center);

/// Total, deterministic fill order for the geometry. Its length is the capacity.
std::vector<Pixel> disk_fill_order(const MotifGeometry& geometry);

struct RasterResult {
  MotifImage image;
  std::size_t capacity = 0;
  std::size_t truncated = 0;  // bases beyond capacity that were dropped
};

RasterResult rasterize(std::string_view bases, const MotifGeometry& geometry);
/// Same as above with a precomputed fill order (shared across a batch).
RasterResult rasterize(std::string_view bases, const MotifGeometry& geometry,
                       const std::vector<Pixel>& fill_order);

/// Orders pixel offsets counter-clockwise from the +x axis, exact in integers.
bool angle_less(Pixel a, Pixel b);

}  // namespace genomotif
