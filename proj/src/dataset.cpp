#include "genomotif/pipeline/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "genomotif/binary_io.hpp"
#include "genomotif/errors.hpp"
#include "genomotif/nn/random.hpp"
#include "json.hpp"

namespace genomotif {

RegionHistogram Dataset::histogram() const {
  RegionHistogram h{};
  for (auto r : labels) ++h[static_cast<std::size_t>(r)];
  return h;
}

void Dataset::push_back(std::vector<std::uint8_t> image, Region label, std::string accession) {
  if (image.size() != image_bytes())
    throw Error(ErrorCode::ShapeMismatch, "image of " + std::to_string(image.size()) + " bytes, dataset expects " +
                                              std::to_string(image_bytes()));
  images.push_back(std::move(image));
  labels.push_back(label);
  accessions.push_back(std::move(accession));
}

void Dataset::validate() const {
  if (labels.size() != images.size() || accessions.size() != images.size())
    throw Error(ErrorCode::ShapeMismatch, "dataset columns have different lengths");
  for (const auto& img : images)
    if (img.size() != image_bytes()) throw Error(ErrorCode::ShapeMismatch, "dataset images differ in size");
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.height = height;
  out.width = width;
  out.channels = channels;
  out.provenance = provenance;
  for (auto i : indices) out.push_back(images.at(i), labels.at(i), accessions.at(i));
  return out;
}

// ---------------------------------------------------------------------------
// GMD1

void write_gmd1(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write("GMD1", 4);
  write_u32(out, static_cast<std::uint32_t>(ds.size()));
  write_u32(out, static_cast<std::uint32_t>(ds.height));
  write_u32(out, static_cast<std::uint32_t>(ds.width));
  write_u32(out, static_cast<std::uint32_t>(ds.channels));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.put(static_cast<char>(ds.labels[i]));
    out.write(reinterpret_cast<const char*>(ds.images[i].data()), static_cast<std::streamsize>(ds.images[i].size()));
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

Dataset read_gmd1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GMD1", 4) != 0)
    throw Error(ErrorCode::BadFormat, "'" + path + "' is not a GMD1 dataset");
  Dataset ds;
  const auto count = read_u32(in);
  ds.height = static_cast<int>(read_u32(in));
  ds.width = static_cast<int>(read_u32(in));
  ds.channels = static_cast<int>(read_u32(in));
  if (ds.height <= 0 || ds.width <= 0 || ds.channels <= 0 || ds.image_bytes() > (1u << 28))
    throw Error(ErrorCode::BadFormat, "'" + path + "' has implausible image dimensions");
  for (std::uint32_t i = 0; i < count; ++i) {
    const int label = in.get();
    if (label == std::char_traits<char>::eof()) throw Error(ErrorCode::BadFormat, "'" + path + "' is truncated");
    std::vector<std::uint8_t> img(ds.image_bytes());
    if (!in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size())))
      throw Error(ErrorCode::BadFormat, "'" + path + "' is truncated");
    ds.push_back(std::move(img), region_from_index(label), "record" + std::to_string(i));
  }
  return ds;
}

std::string manifest_path(const std::string& gmd1_path) { return gmd1_path + ".json"; }

void write_dataset_manifest(const Dataset& ds, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "GMD1";
  j["count"] = ds.size();
  j["height"] = ds.height;
  j["width"] = ds.width;
  j["channels"] = ds.channels;
  j["provenance"] = ds.provenance;
  const auto hist = ds.histogram();
  nlohmann::ordered_json h;
  for (auto r : kAllRegions) h[std::string(region_name(r))] = hist[static_cast<std::size_t>(r)];
  j["region_histogram"] = h;
  j["accessions"] = ds.accessions;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

void read_dataset_manifest(Dataset& ds, const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path + ": " + e.what());
  }
  if (j.contains("accessions")) {
    auto acc = j["accessions"].get<std::vector<std::string>>();
    if (acc.size() != ds.size())
      throw Error(ErrorCode::BadFormat, path + ": accession count does not match the dataset");
    ds.accessions = std::move(acc);
  }
  if (j.contains("provenance")) ds.provenance = j["provenance"].get<std::string>();
}

Dataset load_dataset(const std::string& gmd1_path) {
  auto ds = read_gmd1(gmd1_path);
  read_dataset_manifest(ds, manifest_path(gmd1_path));
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& gmd1_path) {
  write_gmd1(ds, gmd1_path);
  write_dataset_manifest(ds, manifest_path(gmd1_path));
}

// ---------------------------------------------------------------------------
// Building

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

EncodedMotif encode_sequence(std::string_view bases, const MotifGeometry& geometry,
                             const std::vector<Pixel>& fill_order, const SusanParams& susan) {
  auto raster = rasterize(bases, geometry, fill_order);
  const auto edges = susan_edges(to_grayscale(raster.image), susan);
  return {replicate_channels(edges).bytes(), raster.capacity, raster.truncated};
}

Dataset build_dataset(const std::vector<SequenceRecord>& records, const MotifGeometry& geometry,
                      const SusanParams& susan, int threads, std::vector<BuildInfo>* info) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no accepted records to build a dataset from");
  for (const auto& r : records)
    if (!r.region) throw Error(ErrorCode::UnlabeledRecord, r.accession + " has no region label");
  susan.validate();
  const auto order = disk_fill_order(geometry);

  std::vector<EncodedMotif> encoded(records.size());
  parallel_for(records.size(), threads,
               [&](std::size_t i) { encoded[i] = encode_sequence(records[i].bases, geometry, order, susan); });

  Dataset ds;
  ds.height = geometry.height;
  ds.width = geometry.width;
  ds.channels = 3;
  if (info) info->clear();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (info) info->push_back({records[i].accession, encoded[i].capacity, encoded[i].truncated});
    ds.push_back(std::move(encoded[i].pixels), *records[i].region, records[i].accession);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Splitting

SplitIndices stratified_split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (ds.empty()) throw Error(ErrorCode::EmptyDataset, "cannot split an empty dataset");
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::Usage, "validation fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kRegionCount> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  SplitIndices out;
  for (std::size_t c = 0; c < kRegionCount; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2)
      throw Error(ErrorCode::ClassTooSmall, std::string(region_name(static_cast<Region>(c))) +
                                                " has fewer than 2 samples");
    nn::Rng rng(nn::mix_seed(seed, c));
    rng.shuffle(members);
    const auto n = members.size();
    auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    held = std::clamp<std::size_t>(held, 1, n - 1);
    out.validation.insert(out.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(held));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(held), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  const auto idx = stratified_split(ds, fraction, seed);
  return {ds.subset(idx.train), ds.subset(idx.validation)};
}

}  // namespace genomotif
