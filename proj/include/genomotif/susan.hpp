#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "genomotif/rasterizer.hpp"

namespace genomotif {

using GrayArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 8-bit single-channel image; rows index y, columns index x.
struct GrayImage {
  GrayArray pixels;
  std::string provenance;

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels.rows() == b.pixels.rows() && a.pixels.cols() == b.pixels.cols() &&
           (a.pixels == b.pixels).all();
  }
};

/// SUSAN edge map. Exported to the dataset as three identical channels.
struct FilteredImage {
  GrayArray pixels;
  std::string provenance;

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
};

struct MaskOffset {
  int dx;
  int dy;
};

inline constexpr std::size_t kSusanMaskSize = 37;

/// The 37-pixel circular mask (radius 3.4), row by row from dy = -3 to 3.
const std::array<MaskOffset, kSusanMaskSize>& susan_mask();

enum class SusanOutput { Graded, Binary };
enum class Similarity { Smooth, Hard };

std::string_view to_string(SusanOutput mode);
SusanOutput parse_susan_output(std::string_view s);

struct SusanParams {
  double brightness_threshold = 27.0;
  double geometric_threshold = 0.75 * kSusanMaskSize;
  SusanOutput output = SusanOutput::Graded;
  Similarity similarity = Similarity::Smooth;

  void validate() const;
};

/// Luma with weights 0.299/0.587/0.114, rounded half up in exact integer arithmetic.
std::uint8_t luma(Rgb c);
GrayImage to_grayscale(const MotifImage& image);

/// Similarity of a mask pixel to the nucleus: exp(-((b - b0)/t)^6), or the 0/1 threshold.
double similarity(int brightness, int nucleus, const SusanParams& params);

/// USAN area at (x, y); mask offsets outside the image are skipped.
double usan_area(const GrayImage& gray, int x, int y, const SusanParams& params);

/// Geometric threshold for a pixel whose mask has `inside` in-bounds offsets: g scaled by
/// inside / 37, so a flat region gives no response at the image border either.
double border_threshold(double g, int inside);

/// Raw responses g' - n (or 0) before quantization, g' from border_threshold.
Eigen::ArrayXXd susan_response(const GrayImage& gray, const SusanParams& params,
                               int threads = 1);

/// Maps a raw response to 8 bits. Graded: round(255 R / g) but never 0 when R > 0, so the
/// binary map is always the graded map thresholded at > 0.
std::uint8_t quantize_response(double response, const SusanParams& params);

FilteredImage susan_edges(const GrayImage& gray, const SusanParams& params, int threads = 1);

/// Three identical channels, RGB interleaved.
MotifImage replicate_channels(const FilteredImage& filtered);

}  // namespace genomotif
