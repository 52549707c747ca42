#include "genomotif/synthetic.hpp"

#include <cstdio>

#include "genomotif/errors.hpp"
#include "genomotif/nn/random.hpp"

namespace genomotif {

const std::array<BaseProfile, kRegionCount>& synthetic_profiles() {
  static const std::array<BaseProfile, kRegionCount> profiles = {{
      {0.85, 0.05, 0.05, 0.05},
      {0.10, 0.65, 0.15, 0.10},
      {0.20, 0.15, 0.45, 0.20},
      {0.25, 0.25, 0.25, 0.25},
  }};
  return profiles;
}

std::vector<SequenceRecord> synthetic_corpus(const SyntheticOptions& options) {
  if (options.min_length == 0 || options.max_length < options.min_length)
    throw Error(ErrorCode::Usage, "synthetic length range is empty");
  static constexpr char kBases[] = "ACGT";
  nn::Rng rng(options.seed);
  std::vector<SequenceRecord> out;
  for (auto region : kAllRegions) {
    const auto& p = synthetic_profiles()[static_cast<std::size_t>(region)];
    for (std::size_t i = 0; i < options.per_region; ++i) {
      SequenceRecord r;
      char name[64];
      std::snprintf(name, sizeof name, "SYN_%s_%03zu", std::string(region_name(region)).c_str(), i);
      r.accession = name;
      r.header = r.accession + " synthetic";
      r.location = std::string(region_name(region));
      r.region = region;
      const auto len = options.min_length + rng.below(options.max_length - options.min_length + 1);
      r.bases.resize(len);
      for (auto& b : r.bases) {
        const double u = rng.uniform();
        double acc = 0.0;
        int k = 0;
        for (; k < 3; ++k) {
          acc += p[static_cast<std::size_t>(k)];
          if (u < acc) break;
        }
        b = kBases[k];
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string synthetic_metadata_csv(const std::vector<SequenceRecord>& records) {
  std::string csv = "accession,region,location,date\n";
  for (const auto& r : records) {
    if (!r.region) throw Error(ErrorCode::UnlabeledRecord, r.accession + " has no region");
    csv += r.accession + "," + std::string(region_name(*r.region)) + "," + r.location + ",\n";
  }
  return csv;
}

}  // namespace genomotif
