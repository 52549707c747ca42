#include "genomotif/susan.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "genomotif/errors.hpp"

namespace genomotif {

const std::array<MaskOffset, kSusanMaskSize>& susan_mask() {
  static const auto mask = [] {
    std::array<MaskOffset, kSusanMaskSize> m{};
    std::size_t i = 0;
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        if (100 * (dx * dx + dy * dy) <= 1156) m[i++] = {dx, dy};  // radius 3.4
    return m;
  }();
  return mask;
}

std::string_view to_string(SusanOutput mode) {
  return mode == SusanOutput::Graded ? "graded" : "binary";
}

SusanOutput parse_susan_output(std::string_view s) {
  if (s == "graded") return SusanOutput::Graded;
  if (s == "binary") return SusanOutput::Binary;
  throw Error(ErrorCode::Usage, "SUSAN output must be 'graded' or 'binary'");
}

void SusanParams::validate() const {
  if (!(brightness_threshold > 0.0))
    throw Error(ErrorCode::Usage, "brightness threshold must be positive");
  if (!(geometric_threshold > 0.0 && geometric_threshold <= double(kSusanMaskSize)))
    throw Error(ErrorCode::Usage, "geometric threshold must lie in (0, 37]");
}

std::uint8_t luma(Rgb c) {
  const int scaled = 299 * c.r + 587 * c.g + 114 * c.b;  // x1000
  return static_cast<std::uint8_t>((scaled + 500) / 1000);
}

GrayImage to_grayscale(const MotifImage& image) {
  GrayImage gray;
  gray.pixels.resize(image.height(), image.width());
  gray.provenance = image.source_accession;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) gray.pixels(y, x) = luma(image.at(x, y));
  return gray;
}

double similarity(int brightness, int nucleus, const SusanParams& params) {
  const double diff = static_cast<double>(brightness - nucleus);
  if (params.similarity == Similarity::Hard)
    return std::abs(diff) <= params.brightness_threshold ? 1.0 : 0.0;
  const double d = diff / params.brightness_threshold;
  const double d2 = d * d;
  return std::exp(-(d2 * d2 * d2));
}

double usan_area(const GrayImage& gray, int x, int y, const SusanParams& params) {
  const int nucleus = gray.pixels(y, x);
  double n = 0.0;
  for (const auto& o : susan_mask()) {
    const int xx = x + o.dx, yy = y + o.dy;
    if (xx < 0 || yy < 0 || xx >= gray.width() || yy >= gray.height()) continue;
    n += similarity(gray.pixels(yy, xx), nucleus, params);
  }
  return n;
}

double border_threshold(double g, int inside) { return g * inside / static_cast<double>(kSusanMaskSize); }

namespace {

// Similarity for every brightness difference in [-255, 255], index diff + 255.
std::array<double, 511> similarity_table(const SusanParams& params) {
  std::array<double, 511> lut{};
  for (int diff = -255; diff <= 255; ++diff) lut[diff + 255] = similarity(diff, 0, params);
  return lut;
}

void response_rows(const GrayImage& gray, const SusanParams& params,
                   const std::array<double, 511>& lut, int row_begin, int row_end,
                   Eigen::ArrayXXd& out) {
  const int w = gray.width(), h = gray.height();
  const auto& mask = susan_mask();
  const std::uint8_t* data = gray.pixels.data();
  std::array<std::ptrdiff_t, kSusanMaskSize> linear{};
  for (std::size_t k = 0; k < kSusanMaskSize; ++k)
    linear[k] = std::ptrdiff_t{mask[k].dy} * w + mask[k].dx;
  const double g = params.geometric_threshold;

  for (int y = row_begin; y < row_end; ++y) {
    const bool row_interior = y >= 3 && y + 3 < h;
    for (int x = 0; x < w; ++x) {
      const std::ptrdiff_t centre = std::ptrdiff_t{y} * w + x;
      const int nucleus = data[centre];
      const double* row_lut = lut.data() + 255 - nucleus;
      double n = 0.0;
      if (row_interior && x >= 3 && x + 3 < w) {
        for (std::size_t k = 0; k < kSusanMaskSize; ++k) n += row_lut[data[centre + linear[k]]];
        out(y, x) = n < g ? g - n : 0.0;
        continue;
      }
      int inside = 0;
      for (std::size_t k = 0; k < kSusanMaskSize; ++k) {
        const int xx = x + mask[k].dx, yy = y + mask[k].dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        n += row_lut[data[centre + linear[k]]];
        ++inside;
      }
      const double local_g = border_threshold(g, inside);
      out(y, x) = n < local_g ? local_g - n : 0.0;
    }
  }
}

}  // namespace

Eigen::ArrayXXd susan_response(const GrayImage& gray, const SusanParams& params, int threads) {
  params.validate();
  const int h = gray.height();
  Eigen::ArrayXXd out(h, gray.width());
  const auto lut = similarity_table(params);
  threads = std::clamp(threads, 1, std::max(1, h));
  if (threads == 1) {
    response_rows(gray, params, lut, 0, h, out);
    return out;
  }
  std::vector<std::thread> pool;
  const int chunk = (h + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk, end = std::min(h, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] { response_rows(gray, params, lut, begin, end, out); });
  }
  for (auto& th : pool) th.join();
  return out;
}

std::uint8_t quantize_response(double response, const SusanParams& params) {
  if (!(response > 0.0)) return 0;
  if (params.output == SusanOutput::Binary) return 255;
  const double scaled = std::round(255.0 * response / params.geometric_threshold);
  return static_cast<std::uint8_t>(std::clamp(scaled, 1.0, 255.0));
}

FilteredImage susan_edges(const GrayImage& gray, const SusanParams& params, int threads) {
  const auto response = susan_response(gray, params, threads);
  FilteredImage out;
  out.provenance = gray.provenance;
  out.pixels = response.unaryExpr([&](double r) { return quantize_response(r, params); });
  return out;
}

MotifImage replicate_channels(const FilteredImage& filtered) {
  MotifImage image(filtered.width(), filtered.height());
  image.source_accession = filtered.provenance;
  for (int y = 0; y < filtered.height(); ++y)
    for (int x = 0; x < filtered.width(); ++x) {
      const auto v = filtered.pixels(y, x);
      image.set(x, y, {v, v, v});
    }
  return image;
}

}  // namespace genomotif
