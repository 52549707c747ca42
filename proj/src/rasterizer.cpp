#include "genomotif/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "genomotif/errors.hpp"

namespace genomotif {

std::string_view to_string(FillMode mode) { return mode == FillMode::Rings ? "rings" : "disk"; }

FillMode parse_fill_mode(std::string_view s) {
  if (s == "rings" || s == "Rings") return FillMode::Rings;
  if (s == "disk" || s == "Disk") return FillMode::Disk;
  throw Error(ErrorCode::Usage, "fill mode must be 'rings' or 'disk', got '" + std::string(s) + "'");
}

MotifGeometry MotifGeometry::square(int size, FillMode mode) {
  MotifGeometry g;
  g.width = size;
  g.height = size;
  g.center = {size / 2, size / 2};
  g.max_radius = std::min(g.center.x, size - 1 - g.center.x);
  g.fill_mode = mode;
  return g;
}

void MotifGeometry::validate() const {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Usage, "image size must be positive");
  if (max_radius < 0) throw Error(ErrorCode::Usage, "max_radius must be non-negative");
  if (center.x - max_radius < 0 || center.y - max_radius < 0 || center.x + max_radius >= width ||
      center.y + max_radius >= height)
    throw Error(ErrorCode::Usage, "circle of radius " + std::to_string(max_radius) +
                                      " does not fit the " + std::to_string(width) + "x" +
                                      std::to_string(height) + " image");
}

MotifImage::MotifImage(int width, int height, Rgb fill)
    : width_(width), height_(height), bytes_(static_cast<std::size_t>(width) * height * 3) {
  for (std::size_t i = 0; i < bytes_.size(); i += 3) {
    bytes_[i] = fill.r;
    bytes_[i + 1] = fill.g;
    bytes_[i + 2] = fill.b;
  }
}

Rgb MotifImage::at(int x, int y) const {
  const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {bytes_[i], bytes_[i + 1], bytes_[i + 2]};
}

void MotifImage::set(int x, int y, Rgb c) {
  const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  bytes_[i] = c.r;
  bytes_[i + 1] = c.g;
  bytes_[i + 2] = c.b;
}

Rgb base_color(char base) {
  switch (base) {
    case 'A': return {255, 255, 0};
    case 'C': return {0, 0, 255};
    case 'G': return {0, 255, 0};
    case 'T':
    case 'U': return {255, 0, 0};
    default: return kBlack;
  }
}

bool angle_less(Pixel a, Pixel b) {
  // Half 0 covers angles in [0, pi), half 1 covers [pi, 2pi).
  const auto half = [](Pixel p) { return (p.y > 0 || (p.y == 0 && p.x > 0)) ? 0 : 1; };
  const int ha = half(a), hb = half(b);
  if (ha != hb) return ha < hb;
  const std::int64_t cross = std::int64_t{a.x} * b.y - std::int64_t{a.y} * b.x;
  if (cross != 0) return cross > 0;
  return std::int64_t{a.x} * a.x + std::int64_t{a.y} * a.y <
         std::int64_t{b.x} * b.x + std::int64_t{b.y} * b.y;
}

std::vector<Pixel> circle_points(int radius, Pixel center) {
  if (radius <= 0) return {center};

  // First octant, walking from (r, 0) while x >= y. The step goes to (x, y+1) or
  // (x-1, y+1); the decision tests the midpoint (x - 1/2, y + 1) against the circle,
  // scaled by 4 to stay in integers.
  std::vector<Pixel> octant;
  const std::int64_t r2 = std::int64_t{radius} * radius;
  int x = radius;
  int y = 0;
  while (x >= y) {
    octant.push_back({x, y});
    ++y;
    const std::int64_t mid = 4 * (std::int64_t{x} * x - x + std::int64_t{y} * y - r2) + 1;
    if (mid > 0) --x;
  }

  std::vector<Pixel> offsets;
  offsets.reserve(octant.size() * 8);
  for (auto [px, py] : octant) {
    for (Pixel p : {Pixel{px, py}, Pixel{py, px}, Pixel{-py, px}, Pixel{-px, py},
                    Pixel{-px, -py}, Pixel{-py, -px}, Pixel{py, -px}, Pixel{px, -py}})
      offsets.push_back(p);
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  std::sort(offsets.begin(), offsets.end(), angle_less);

  for (auto& p : offsets) p = {center.x + p.x, center.y + p.y};
  return offsets;
}

namespace {

// Index k with (k - 1/2)^2 <= d2 < (k + 1/2)^2, i.e. round(sqrt(d2)) with halves up.
int rounded_radius(std::int64_t d2) {
  int k = static_cast<int>(std::sqrt(static_cast<double>(d2)));
  while (4 * d2 >= (2 * std::int64_t{k} + 1) * (2 * std::int64_t{k} + 1)) ++k;
  while (k > 0 && 4 * d2 < (2 * std::int64_t{k} - 1) * (2 * std::int64_t{k} - 1)) --k;
  return k;
}

}  // namespace

std::vector<Pixel> disk_fill_order(const MotifGeometry& geometry) {
  geometry.validate();
  const Pixel c = geometry.center;
  std::vector<Pixel> order;

  if (geometry.fill_mode == FillMode::Rings) {
    std::set<Pixel> seen;
    for (int r = 0; r <= geometry.max_radius; ++r)
      for (Pixel p : circle_points(r, c))
        if (seen.insert(p).second) order.push_back(p);
    return order;
  }

  // Disk: every lattice point within max_radius + 1/2, ordered by rounded distance then angle.
  const std::int64_t limit = (2 * std::int64_t{geometry.max_radius} + 1) *
                             (2 * std::int64_t{geometry.max_radius} + 1);
  struct Keyed {
    int ring;
    Pixel offset;
  };
  std::vector<Keyed> keyed;
  for (int dy = -geometry.max_radius; dy <= geometry.max_radius; ++dy)
    for (int dx = -geometry.max_radius; dx <= geometry.max_radius; ++dx) {
      const std::int64_t d2 = std::int64_t{dx} * dx + std::int64_t{dy} * dy;
      if (4 * d2 <= limit) keyed.push_back({rounded_radius(d2), {dx, dy}});
    }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.ring != b.ring) return a.ring < b.ring;
    return angle_less(a.offset, b.offset);
  });
  order.reserve(keyed.size());
  for (const auto& k : keyed) order.push_back({c.x + k.offset.x, c.y + k.offset.y});
  return order;
}

RasterResult rasterize(std::string_view bases, const MotifGeometry& geometry) {
  return rasterize(bases, geometry, disk_fill_order(geometry));
}

RasterResult rasterize(std::string_view bases, const MotifGeometry& geometry,
                       const std::vector<Pixel>& fill_order) {
  RasterResult out;
  out.image = MotifImage(geometry.width, geometry.height);
  out.image.geometry = geometry;
  out.capacity = fill_order.size();
  const std::size_t n = std::min(bases.size(), fill_order.size());
  for (std::size_t i = 0; i < n; ++i)
    out.image.set(fill_order[i].x, fill_order[i].y, base_color(bases[i]));
  out.truncated = bases.size() - n;
  return out;
}

}  // namespace genomotif
