#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "genomotif/seqio.hpp"

namespace genomotif {

/// Base probabilities in A, C, G, T order.
using BaseProfile = std::array<double, 4>;

/// One profile per region. Each region has its own dominant base and its own
/// concentration, so both colour and texture statistics separate the classes.
const std::array<BaseProfile, kRegionCount>& synthetic_profiles();

struct SyntheticOptions {
  std::size_t per_region = 100;
  std::size_t min_length = 29000;
  std::size_t max_length = 29900;
  std::uint64_t seed = 2020;
};

/// Labelled random sequences drawn i.i.d. from the region profiles, accessions
/// "SYN_<REGION>_<n>".
std::vector<SequenceRecord> synthetic_corpus(const SyntheticOptions& options);

/// CSV in the metadata format understood by parse_metadata.
std::string synthetic_metadata_csv(const std::vector<SequenceRecord>& records);

}  // namespace genomotif
