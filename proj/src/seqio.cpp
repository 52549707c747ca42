#include "genomotif/seqio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "genomotif/errors.hpp"

namespace genomotif {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool is_unambiguous(char c) {
  return c == 'A' || c == 'C' || c == 'G' || c == 'T' || c == 'U';
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string_view region_name(Region r) {
  switch (r) {
    case Region::Asia: return "Asia";
    case Region::Europe: return "Europe";
    case Region::America: return "America";
    case Region::Oceania: return "Oceania";
  }
  return "?";
}

Region parse_region(std::string_view token) {
  const auto t = lower(trim(token));
  if (t == "asia") return Region::Asia;
  if (t == "europe") return Region::Europe;
  if (t == "america") return Region::America;
  if (t == "oceania" || t == "australia") return Region::Oceania;
  throw Error(ErrorCode::UnknownRegion, "'" + std::string(token) + "'");
}

Region region_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kRegionCount))
    throw Error(ErrorCode::UnknownRegion, "label index " + std::to_string(index));
  return static_cast<Region>(index);
}

void QualityConfig::validate() const {
  if (min_length == 0) throw Error(ErrorCode::Usage, "min_length must be positive");
  if (!(max_ambiguous_fraction >= 0.0 && max_ambiguous_fraction <= 1.0))
    throw Error(ErrorCode::Usage, "max_ambiguous_fraction must lie in [0,1]");
}

std::string_view to_string(RejectReason reason) {
  return reason == RejectReason::TooShort ? "TooShort" : "TooAmbiguous";
}

// ---------------------------------------------------------------------------
// FASTA

std::string accession_from_header(std::string_view header) {
  for (auto token : split(header, '|')) {
    token = trim(token);
    if (token.starts_with("EPI_ISL_")) return std::string(token);
  }
  const auto t = trim(header);
  const auto end = t.find_first_of(" \t");
  return std::string(t.substr(0, end));
}

std::vector<SequenceRecord> parse_fasta(std::istream& in) {
  std::vector<SequenceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.front() == '>') {
      SequenceRecord rec;
      rec.header = std::string(trim(std::string_view(line).substr(1)));
      rec.accession = accession_from_header(rec.header);
      if (rec.accession.empty())
        throw Error(ErrorCode::MalformedFasta, "empty header at line " + std::to_string(line_no));
      records.push_back(std::move(rec));
      continue;
    }
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (records.empty())
        throw Error(ErrorCode::MalformedFasta,
                    "sequence data before first header at line " + std::to_string(line_no));
      records.back().bases.push_back(
          static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure");
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no FASTA records");
  return records;
}

std::vector<SequenceRecord> parse_fasta_file(const std::string& path) {
  auto in = open_or_throw(path);
  try {
    return parse_fasta(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_fasta(std::ostream& out, const std::vector<SequenceRecord>& records,
                 std::size_t line_width) {
  for (const auto& rec : records) {
    out << '>' << rec.header << '\n';
    for (std::size_t i = 0; i < rec.bases.size(); i += line_width)
      out << std::string_view(rec.bases).substr(i, line_width) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Metadata and location tables

CountryTable CountryTable::load(std::istream& in) {
  CountryTable table;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.rfind(',');
    if (comma == std::string_view::npos)
      throw Error(ErrorCode::BadFormat, "country table line without ',': " + std::string(t));
    const auto key = trim(t.substr(0, comma));
    if (lower(key) == "location") continue;  // header
    table.add(key, parse_region(t.substr(comma + 1)));
  }
  return table;
}

CountryTable CountryTable::load_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load(in);
}

void CountryTable::add(std::string_view location, Region region) {
  entries_[lower(trim(location))] = region;
}

std::optional<Region> CountryTable::find(std::string_view location) const {
  const auto it = entries_.find(lower(trim(location)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Region region_of(std::string_view location, const CountryTable& table) {
  // Candidates: the whole string and every token delimited by '/', ',', '|' or ';'.
  std::vector<std::string_view> candidates{trim(location)};
  std::size_t start = 0;
  for (std::size_t i = 0; i <= location.size(); ++i) {
    if (i == location.size() || std::string_view("/,|;").find(location[i]) != std::string_view::npos) {
      candidates.push_back(trim(location.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::optional<Region> best;
  std::size_t best_len = 0;
  for (auto c : candidates) {
    if (c.empty() || c.size() <= best_len) continue;
    if (auto r = table.find(c)) {
      best = r;
      best_len = c.size();
    }
  }
  if (!best) throw Error(ErrorCode::UnmappedLocation, "'" + std::string(location) + "'");
  return *best;
}

Metadata parse_metadata(std::istream& in, const CountryTable* table) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "empty metadata file");
  const auto header = split(trim(line), ',');
  const std::array<std::string_view, 4> expected{"accession", "region", "location", "date"};
  if (header.size() != expected.size())
    throw Error(ErrorCode::MissingColumn, "expected header 'accession,region,location,date'");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (trim(header[i]) != expected[i])
      throw Error(ErrorCode::MissingColumn,
                  "column " + std::to_string(i + 1) + " must be '" + std::string(expected[i]) + "'");

  Metadata out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != expected.size())
      throw Error(ErrorCode::MissingColumn, "line " + std::to_string(line_no) + " has " +
                                                std::to_string(cells.size()) + " columns");
    const std::string accession(trim(cells[0]));
    if (accession.empty())
      throw Error(ErrorCode::MissingColumn, "line " + std::to_string(line_no) + ": empty accession");
    MetadataEntry entry;
    entry.location = std::string(trim(cells[2]));
    entry.date = std::string(trim(cells[3]));
    if (trim(cells[1]).empty() && table != nullptr)
      entry.region = region_of(entry.location, *table);
    else
      entry.region = parse_region(cells[1]);
    if (!out.emplace(accession, std::move(entry)).second)
      throw Error(ErrorCode::DuplicateAccession, accession);
  }
  return out;
}

Metadata parse_metadata_file(const std::string& path, const CountryTable* table) {
  auto in = open_or_throw(path);
  try {
    return parse_metadata(in, table);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

bool attach_metadata(SequenceRecord& record, const Metadata& metadata) {
  const auto it = metadata.find(record.accession);
  if (it == metadata.end()) return false;
  record.region = it->second.region;
  record.location = it->second.location;
  if (!it->second.date.empty()) record.collection_date = it->second.date;
  return true;
}

// ---------------------------------------------------------------------------
// Quality gates

double ambiguous_fraction(std::string_view bases) {
  if (bases.empty()) return 0.0;
  const auto ambiguous = std::count_if(bases.begin(), bases.end(),
                                       [](char c) { return !is_unambiguous(c); });
  return static_cast<double>(ambiguous) / static_cast<double>(bases.size());
}

QualityVerdict quality_filter(const SequenceRecord& record, const QualityConfig& cfg) {
  if (record.bases.size() < cfg.min_length) return Reject{RejectReason::TooShort};
  if (!(ambiguous_fraction(record.bases) < cfg.max_ambiguous_fraction))
    return Reject{RejectReason::TooAmbiguous};
  return Accept{};
}

}  // namespace genomotif
