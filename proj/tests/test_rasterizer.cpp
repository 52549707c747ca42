#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "genomotif/image_io.hpp"
#include "genomotif/rasterizer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace genomotif;

namespace {

const Rgb kYellow{255, 255, 0}, kBlue{0, 0, 255}, kGreen{0, 255, 0}, kRed{255, 0, 0};

std::size_t non_white(const MotifImage& img) {
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y) != kWhite) ++n;
  return n;
}

MotifGeometry small(int radius, FillMode mode) {
  MotifGeometry g;
  g.width = g.height = 2 * radius + 3;
  g.center = {radius + 1, radius + 1};
  g.max_radius = radius;
  g.fill_mode = mode;
  return g;
}

}  // namespace

TEST_CASE("base colours") {
  CHECK(base_color('A') == kYellow);
  CHECK(base_color('C') == kBlue);
  CHECK(base_color('G') == kGreen);
  CHECK(base_color('T') == kRed);
  CHECK(base_color('U') == kRed);
  CHECK(base_color('N') == kBlack);
  for (char c : std::string("RYKMSWBDHV-*")) CHECK(base_color(c) == kBlack);
}

TEST_CASE("circle_points: radius 0 and radius 1") {
  CHECK(circle_points(0, {7, 9}) == std::vector<Pixel>{{7, 9}});
  CHECK(circle_points(1, {0, 0}) == std::vector<Pixel>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
}

TEST_CASE("circle_points: matches the brute-force midpoint oracle for every radius up to 99") {
  for (int r = 0; r <= 99; ++r) {
    const auto pts = circle_points(r, {0, 0});
    const std::set<Pixel> got(pts.begin(), pts.end());
    REQUIRE(got.size() == pts.size());
    CHECK(got == oracle::circle_set(r));
  }
}

TEST_CASE("circle_points: distance band, 8-fold symmetry, ccw order from east") {
  for (int r : {1, 2, 3, 5, 17, 50, 99}) {
    const auto pts = circle_points(r, {0, 0});
    const std::set<Pixel> s(pts.begin(), pts.end());
    CHECK(pts.front() == Pixel{r, 0});
    for (const auto& p : pts) {
      CHECK(std::abs(std::hypot(p.x, p.y) - r) <= 0.5);
      for (Pixel q : {Pixel{-p.x, p.y}, Pixel{p.x, -p.y}, Pixel{p.y, p.x}, Pixel{-p.y, -p.x}})
        CHECK(s.count(q) == 1);
    }
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(oracle::angle_of(pts[i - 1]) < oracle::angle_of(pts[i]));
  }
}

TEST_CASE("circle_points: translated by the centre") {
  const auto a = circle_points(6, {0, 0});
  const auto b = circle_points(6, {40, -3});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Pixel{a[i].x + 40, a[i].y - 3});
}

TEST_CASE("disk_fill_order: rings with radius 1") {
  const auto g = small(1, FillMode::Rings);
  const Pixel c = g.center;
  const auto order = disk_fill_order(g);
  CHECK(order == std::vector<Pixel>{c, {c.x + 1, c.y}, {c.x, c.y + 1}, {c.x - 1, c.y}, {c.x, c.y - 1}});
}

TEST_CASE("disk_fill_order: capacities against lattice oracles") {
  for (int r : {0, 1, 2, 5, 10, 33}) {
    const auto rings = disk_fill_order(small(r, FillMode::Rings));
    const auto disk = disk_fill_order(small(r, FillMode::Disk));
    CHECK(rings.size() == oracle::rings_capacity(r));
    CHECK(disk.size() == oracle::disk_capacity(r));
    CHECK(rings.size() <= disk.size());
    CHECK(std::set<Pixel>(disk.begin(), disk.end()).size() == disk.size());
  }
  CHECK(disk_fill_order(MotifGeometry::square(200, FillMode::Disk)).size() == oracle::disk_capacity(99));
}

TEST_CASE("disk_fill_order: disk mode is ordered by rounded distance then angle") {
  const auto g = small(8, FillMode::Disk);
  const auto order = disk_fill_order(g);
  auto key = [&](Pixel p) {
    const Pixel o{p.x - g.center.x, p.y - g.center.y};
    return std::make_pair(std::floor(std::hypot(o.x, o.y) + 0.5), (o.x == 0 && o.y == 0) ? 0.0 : oracle::angle_of(o));
  };
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(key(order[i - 1]) < key(order[i]));
}

TEST_CASE("geometry validation") {
  auto g = MotifGeometry::square(200);
  CHECK(g.center == Pixel{100, 100});
  CHECK(g.max_radius == 99);
  g.max_radius = 100;
  CHECK(testing::error_code([&] { g.validate(); }) == ErrorCode::Usage);
}

TEST_CASE("rasterize: ACGT on radius 1") {
  const auto g = small(1, FillMode::Rings);
  const auto res = rasterize("ACGT", g);
  const Pixel c = g.center;
  CHECK(res.capacity == 5);
  CHECK(res.truncated == 0);
  CHECK(res.image.at(c.x, c.y) == kYellow);
  CHECK(res.image.at(c.x + 1, c.y) == kBlue);
  CHECK(res.image.at(c.x, c.y + 1) == kGreen);
  CHECK(res.image.at(c.x - 1, c.y) == kRed);
  CHECK(res.image.at(c.x, c.y - 1) == kWhite);
  CHECK(non_white(res.image) == 4);
}

TEST_CASE("rasterize: empty sequence is all white") {
  const auto res = rasterize("", MotifGeometry::square(200));
  CHECK(non_white(res.image) == 0);
  CHECK(res.image.width() == 200);
  CHECK(res.image.height() == 200);
}

TEST_CASE("rasterize: truncation of a long genome") {
  const auto g = MotifGeometry::square(200);
  const auto cap = oracle::rings_capacity(99);
  const std::string bases(29900, 'G');
  const auto res = rasterize(bases, g);
  CHECK(res.capacity == cap);
  CHECK(res.truncated == (29900 > cap ? 29900 - cap : 0));
  CHECK(non_white(res.image) == std::min<std::size_t>(29900, cap));
}

TEST_CASE("rasterize: pixel conservation, determinism, ring gaps stay white") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ACGTUN";
  for (auto mode : {FillMode::Rings, FillMode::Disk}) {
    const auto g = small(20, mode);
    const auto order = disk_fill_order(g);
    const std::set<Pixel> filled(order.begin(), order.end());
    for (int trial = 0; trial < 20; ++trial) {
      std::string s(rng() % (order.size() + 200), 'A');
      for (auto& ch : s) ch = alphabet[rng() % alphabet.size()];
      const auto a = rasterize(s, g);
      CHECK(non_white(a.image) == std::min(s.size(), order.size()));
      CHECK(a.image == rasterize(s, g).image);
      for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
          if (!filled.count({x, y})) CHECK(a.image.at(x, y) == kWhite);
    }
  }
}

TEST_CASE("png: round trip is bit exact, unwritable path is an I/O error") {
  testing::TempDir dir("png");
  const auto white = MotifImage(200, 200);
  write_png(white, dir.file("white.png"));
  CHECK(read_png(dir.file("white.png")) == white);

  const auto motif = rasterize("ACGTNNACGU", MotifGeometry::square(200)).image;
  write_png(motif, dir.file("motif.png"));
  CHECK(read_png(dir.file("motif.png")) == motif);

  std::mt19937_64 rng(9);
  MotifImage noise(37, 23);
  for (auto& b : noise.bytes()) b = static_cast<std::uint8_t>(rng());
  write_png(noise, dir.file("noise.png"));
  CHECK(read_png(dir.file("noise.png")) == noise);

  write_png(motif, dir.file("again.png"));
  CHECK(testing::slurp(dir.file("motif.png")) == testing::slurp(dir.file("again.png")));

  CHECK(testing::error_code([&] { write_png(motif, dir.file("missing/dir/x.png")); }) == ErrorCode::Io);
  CHECK(testing::error_code([&] { read_png(dir.file("nope.png")); }) == ErrorCode::Io);
}
