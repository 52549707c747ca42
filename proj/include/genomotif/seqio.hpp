#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace genomotif {

enum class Region : std::uint8_t { Asia = 0, Europe = 1, America = 2, Oceania = 3 };

inline constexpr std::size_t kRegionCount = 4;
inline constexpr std::array<Region, kRegionCount> kAllRegions = {Region::Asia, Region::Europe,
                                                                 Region::America, Region::Oceania};

std::string_view region_name(Region r);
/// Parses "Asia", "Europe", "America", "Oceania" (case-insensitive; "Australia" is
/// accepted as Oceania). Throws UnknownRegion.
Region parse_region(std::string_view token);
Region region_from_index(int index);

struct SequenceRecord {
  std::string accession;
  std::string header;  // description line without the leading '>'
  std::string bases;   // uppercased, whitespace stripped
  std::string location;
  std::optional<std::string> collection_date;
  std::optional<Region> region;
};

struct QualityConfig {
  std::size_t min_length = 29000;
  double max_ambiguous_fraction = 0.05;

  void validate() const;
};

enum class RejectReason { TooShort, TooAmbiguous };
std::string_view to_string(RejectReason reason);

struct Accept {};
struct Reject {
  RejectReason reason;
};
using QualityVerdict = std::variant<Accept, Reject>;

inline bool accepted(const QualityVerdict& v) { return std::holds_alternative<Accept>(v); }

struct MetadataEntry {
  Region region;
  std::string location;
  std::string date;
};
using Metadata = std::map<std::string, MetadataEntry>;

// Lowercased location -> region.
class CountryTable {
 public:
  CountryTable() = default;
  static CountryTable load(std::istream& in);
  static CountryTable load_file(const std::string& path);

  void add(std::string_view location, Region region);
  std::optional<Region> find(std::string_view location) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Region, std::less<>> entries_;
};

std::vector<SequenceRecord> parse_fasta(std::istream& in);
std::vector<SequenceRecord> parse_fasta_file(const std::string& path);
void write_fasta(std::ostream& out, const std::vector<SequenceRecord>& records,
                 std::size_t line_width = 60);

std::string accession_from_header(std::string_view header);

/// Expects the exact header "accession,region,location,date". An empty region cell is
/// resolved through `table` when one is supplied.
Metadata parse_metadata(std::istream& in, const CountryTable* table = nullptr);
Metadata parse_metadata_file(const std::string& path, const CountryTable* table = nullptr);

Region region_of(std::string_view location, const CountryTable& table);

double ambiguous_fraction(std::string_view bases);
QualityVerdict quality_filter(const SequenceRecord& record, const QualityConfig& cfg);

/// Attaches region/location/date from metadata. Returns false when the accession has
/// no metadata row.
bool attach_metadata(SequenceRecord& record, const Metadata& metadata);

}  // namespace genomotif
