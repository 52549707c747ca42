#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genomotif/rasterizer.hpp"
#include "genomotif/seqio.hpp"
#include "genomotif/susan.hpp"

namespace genomotif {

using RegionHistogram = std::array<std::size_t, kRegionCount>;

/// Post-SUSAN images with labels. Images are H*W*C bytes, row-major, channel-interleaved.
struct Dataset {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<std::vector<std::uint8_t>> images;
  std::vector<Region> labels;
  std::vector<std::string> accessions;
  std::string provenance;  // free text carried into the sidecar manifest

  std::size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }
  std::size_t image_bytes() const { return static_cast<std::size_t>(height) * width * channels; }
  RegionHistogram histogram() const;

  void push_back(std::vector<std::uint8_t> image, Region label, std::string accession);
  /// Throws ShapeMismatch if lengths or image sizes disagree.
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Binary layout: "GMD1", u32 count, u32 height, u32 width, u32 channels, then per record
/// u8 label followed by the image bytes. All integers little-endian.
void write_gmd1(const Dataset& ds, const std::string& path);
Dataset read_gmd1(const std::string& path);

/// JSON sidecar next to a GMD1 file: accessions, provenance and region histogram.
std::string manifest_path(const std::string& gmd1_path);
void write_dataset_manifest(const Dataset& ds, const std::string& path);
/// Fills accessions/provenance from a sidecar, if the file exists.
void read_dataset_manifest(Dataset& ds, const std::string& path);

Dataset load_dataset(const std::string& gmd1_path);
void save_dataset(const Dataset& ds, const std::string& gmd1_path);

/// rasterize -> grayscale -> SUSAN edges -> three identical channels.
struct EncodedMotif {
  std::vector<std::uint8_t> pixels;  // H*W*3
  std::size_t capacity = 0;
  std::size_t truncated = 0;
};

EncodedMotif encode_sequence(std::string_view bases, const MotifGeometry& geometry,
                             const std::vector<Pixel>& fill_order, const SusanParams& susan);

struct BuildInfo {
  std::string accession;
  std::size_t capacity = 0;
  std::size_t truncated = 0;
};

/// Every record must carry a region (UnlabeledRecord otherwise). Records are encoded in
/// parallel across `threads`; output order equals input order.
Dataset build_dataset(const std::vector<SequenceRecord>& records, const MotifGeometry& geometry,
                      const SusanParams& susan, int threads = 1,
                      std::vector<BuildInfo>* info = nullptr);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Stratified by region: each class is shuffled with the seeded generator and
/// max(1, round(fraction * n_c)) of it (at most n_c - 1) is held out.
SplitIndices stratified_split(const Dataset& ds, double fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed);

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace genomotif
