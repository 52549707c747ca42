#pragma once

// Straightforward reference implementations the optimised code is checked against.
// They share no code with the library beyond its public value types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "genomotif/rasterizer.hpp"
#include "genomotif/susan.hpp"

namespace oracle {

using genomotif::Pixel;

// Midpoint circle by brute force: in the first octant the chosen x for each row is the
// largest x whose half-pixel midpoint (x - 1/2, y) is not outside the circle.
inline std::set<Pixel> circle_set(int r) {
  std::set<Pixel> out;
  if (r == 0) {
    out.insert({0, 0});
    return out;
  }
  const std::int64_t r4 = 4LL * r * r;
  for (int y = 0;; ++y) {
    int best = -1;
    for (int x = 0; x <= r; ++x)
      if ((2LL * x - 1) * (2LL * x - 1) + 4LL * y * y <= r4) best = x;
    if (best < y) break;
    const int x = best;
    for (Pixel p : {Pixel{x, y}, Pixel{y, x}, Pixel{-y, x}, Pixel{-x, y}, Pixel{-x, -y}, Pixel{-y, -x},
                    Pixel{y, -x}, Pixel{x, -y}})
      out.insert(p);
  }
  return out;
}

inline double angle_of(Pixel p) {
  double a = std::atan2(static_cast<double>(p.y), static_cast<double>(p.x));
  return a < 0 ? a + 2.0 * std::acos(-1.0) : a;
}

// Lattice points with distance <= radius + 1/2 from the origin.
inline std::size_t disk_capacity(int radius) {
  std::size_t n = 0;
  const double limit = radius + 0.5;
  for (int y = -radius - 1; y <= radius + 1; ++y)
    for (int x = -radius - 1; x <= radius + 1; ++x)
      if (std::hypot(x, y) <= limit) ++n;
  return n;
}

// Ring-mode capacity: union of all circles up to the radius.
inline std::size_t rings_capacity(int radius) {
  std::set<Pixel> all;
  for (int r = 0; r <= radius; ++r) {
    auto s = circle_set(r);
    all.insert(s.begin(), s.end());
  }
  return all.size();
}

// SUSAN edge response by the textbook double loop over a 7x7 window.
inline double naive_usan(const genomotif::GrayImage& img, int x, int y, double t, int* inside = nullptr) {
  const int nucleus = img.pixels(y, x);
  double n = 0.0;
  if (inside) *inside = 0;
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) {
      if ((dx * dx + dy * dy) * 100 > 1156) continue;
      const int xx = x + dx, yy = y + dy;
      if (xx < 0 || yy < 0 || xx >= img.width() || yy >= img.height()) continue;
      const double d = (img.pixels(yy, xx) - nucleus) / t;
      const double d2 = d * d;
      n += std::exp(-(d2 * d2 * d2));
      if (inside) ++*inside;
    }
  return n;
}

// The threshold shrinks with the share of the mask that lies inside the image.
inline double naive_response(const genomotif::GrayImage& img, int x, int y, double t, double g) {
  int inside = 0;
  const double n = naive_usan(img, x, y, t, &inside);
  const double local = g * inside / 37.0;
  return n < local ? local - n : 0.0;
}

inline std::uint8_t naive_graded(double response, double g) {
  if (response <= 0.0) return 0;
  const double v = std::round(255.0 * response / g);
  return static_cast<std::uint8_t>(std::clamp(v, 1.0, 255.0));
}

// Probability that a random positive outscores a random negative, ties counting one half.
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace oracle
