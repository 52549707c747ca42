#include <random>
#include <sstream>

#include "doctest.h"
#include "genomotif/seqio.hpp"
#include "test_util.hpp"

using namespace genomotif;
using testing::error_code;

namespace {

std::vector<SequenceRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_fasta(in);
}

CountryTable shipped_table() { return CountryTable::load_file(GENOMOTIF_DATA_DIR "/country_regions.csv"); }

std::string random_bases(std::mt19937_64& rng, std::size_t n, const std::string& alphabet) {
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(n, 'A');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

}  // namespace

TEST_CASE("fasta: accession from an EPI_ISL token") {
  const auto recs = parse(">s1|EPI_ISL_1\nACGT\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].accession == "EPI_ISL_1");
  CHECK(recs[0].bases == "ACGT");
}

TEST_CASE("fasta: wrapped lines are joined and uppercased") {
  const auto recs = parse(">a\nac\ngt\n>b\nTTTT\n");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].accession == "a");
  CHECK(recs[0].bases == "ACGT");
  CHECK(recs[1].bases == "TTTT");
}

TEST_CASE("fasta: whitespace and CRLF inside sequences are stripped") {
  const auto recs = parse(">x desc here\r\nAC GT\r\n\tnn\r\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].accession == "x");
  CHECK(recs[0].header == "x desc here");
  CHECK(recs[0].bases == "ACGTNN");
}

TEST_CASE("fasta: malformed and empty inputs") {
  CHECK(error_code([] { parse("ACGT\n>a\nACGT"); }) == ErrorCode::MalformedFasta);
  CHECK(error_code([] { parse(""); }) == ErrorCode::EmptyInput);
  CHECK(error_code([] { parse("\n\n"); }) == ErrorCode::EmptyInput);
}

TEST_CASE("fasta: record count equals headers at line starts, and write/parse round-trips") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<SequenceRecord> recs;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      SequenceRecord r;
      r.accession = "EPI_ISL_" + std::to_string(trial * 10 + i);
      r.header = "hCoV-19/x/" + std::to_string(i) + "|" + r.accession + "|2020";
      r.bases = random_bases(rng, rng() % 300, "ACGTUNRYK");
      recs.push_back(r);
    }
    std::ostringstream out;
    write_fasta(out, recs, 1 + rng() % 80);
    const std::string text = out.str();
    std::size_t headers = 0;
    for (std::size_t i = 0; i < text.size(); ++i)
      if (text[i] == '>' && (i == 0 || text[i - 1] == '\n')) ++headers;

    const auto back = parse(text);
    REQUIRE(back.size() == headers);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].accession == recs[i].accession);
      CHECK(back[i].header == recs[i].header);
      CHECK(back[i].bases == recs[i].bases);
    }
  }
}

TEST_CASE("metadata: single row, unknown region, duplicates, missing columns") {
  std::istringstream ok("accession,region,location,date\nEPI_ISL_1,Europe,Scotland,2020-03-01\n");
  const auto md = parse_metadata(ok);
  REQUIRE(md.size() == 1);
  const auto& e = md.at("EPI_ISL_1");
  CHECK(e.region == Region::Europe);
  CHECK(e.location == "Scotland");
  CHECK(e.date == "2020-03-01");

  CHECK(error_code([] {
          std::istringstream in("accession,region,location,date\nEPI_ISL_1,Antarctica,Base,2020-01-01\n");
          parse_metadata(in);
        }) == ErrorCode::UnknownRegion);
  CHECK(error_code([] {
          std::istringstream in(
              "accession,region,location,date\nEPI_ISL_1,Asia,China,2020-01-01\nEPI_ISL_1,Asia,China,2020-01-02\n");
          parse_metadata(in);
        }) == ErrorCode::DuplicateAccession);
  CHECK(error_code([] {
          std::istringstream in("accession,region,date\nEPI_ISL_1,Asia,2020-01-01\n");
          parse_metadata(in);
        }) == ErrorCode::MissingColumn);
}

TEST_CASE("metadata: empty region cell resolved through the country table") {
  const auto table = shipped_table();
  std::istringstream in("accession,region,location,date\nEPI_ISL_9,,Turkey,2020-04-01\n");
  CHECK(parse_metadata(in, &table).at("EPI_ISL_9").region == Region::Asia);
}

TEST_CASE("region_of: shipped table lookups") {
  const auto table = shipped_table();
  CHECK(region_of("Turkey", table) == Region::Asia);
  CHECK(region_of("Scotland", table) == Region::Europe);
  CHECK(region_of("scotland", table) == Region::Europe);
  CHECK(region_of("Europe / United Kingdom / Scotland", table) == Region::Europe);
  CHECK(error_code([&] { region_of("Atlantis", table); }) == ErrorCode::UnmappedLocation);
}

TEST_CASE("region names parse case-insensitively and Australia aliases Oceania") {
  CHECK(parse_region("asia") == Region::Asia);
  CHECK(parse_region("OCEANIA") == Region::Oceania);
  CHECK(parse_region("Australia") == Region::Oceania);
  for (auto r : kAllRegions) CHECK(parse_region(region_name(r)) == r);
}

TEST_CASE("quality_filter: thresholds and reason order") {
  QualityConfig cfg;
  SequenceRecord r;
  r.accession = "x";
  r.bases.assign(29500, 'A');
  CHECK(accepted(quality_filter(r, cfg)));

  r.bases.assign(12000, 'A');
  auto v = quality_filter(r, cfg);
  REQUIRE(std::holds_alternative<Reject>(v));
  CHECK(std::get<Reject>(v).reason == RejectReason::TooShort);

  r.bases.assign(29500, 'A');
  std::fill_n(r.bases.begin(), 29500 * 7 / 100, 'N');
  v = quality_filter(r, cfg);
  REQUIRE(std::holds_alternative<Reject>(v));
  CHECK(std::get<Reject>(v).reason == RejectReason::TooAmbiguous);

  r.bases.assign(100, 'N');  // short and ambiguous: length is reported first
  CHECK(std::get<Reject>(quality_filter(r, cfg)).reason == RejectReason::TooShort);

  r.bases.assign(29000, 'U');  // boundary is inclusive; U is unambiguous
  CHECK(accepted(quality_filter(r, cfg)));
}

TEST_CASE("quality_filter: ambiguity matches a character-count oracle") {
  std::mt19937_64 rng(5);
  QualityConfig cfg{50, 0.05};
  for (int trial = 0; trial < 500; ++trial) {
    SequenceRecord r;
    r.accession = "x";
    r.bases = random_bases(rng, 50 + rng() % 200, rng() % 2 ? "ACGTU" : "ACGTUACGTUACGTUACGTUNRYWS");
    std::size_t bad = 0;
    for (char c : r.bases)
      if (c != 'A' && c != 'C' && c != 'G' && c != 'T' && c != 'U') ++bad;
    const double frac = static_cast<double>(bad) / static_cast<double>(r.bases.size());
    CHECK(ambiguous_fraction(r.bases) == doctest::Approx(frac).epsilon(1e-15));
    CHECK(accepted(quality_filter(r, cfg)) == (frac < cfg.max_ambiguous_fraction));
  }
}

TEST_CASE("quality_filter: lengthening with unambiguous bases never fails the length gate") {
  std::mt19937_64 rng(6);
  QualityConfig cfg{120, 0.5};
  for (int trial = 0; trial < 200; ++trial) {
    SequenceRecord r;
    r.accession = "x";
    r.bases = random_bases(rng, 60 + rng() % 120, "ACGTN");
    const bool long_enough = r.bases.size() >= cfg.min_length;
    r.bases += random_bases(rng, rng() % 100, "ACGT");
    const auto v = quality_filter(r, cfg);
    if (long_enough) CHECK(!(std::holds_alternative<Reject>(v) && std::get<Reject>(v).reason == RejectReason::TooShort));
  }
}

TEST_CASE("quality config validation") {
  CHECK(error_code([] { QualityConfig{0, 0.05}.validate(); }).has_value());
  CHECK(error_code([] { QualityConfig{10, 1.5}.validate(); }).has_value());
  CHECK_FALSE(error_code([] { QualityConfig{}.validate(); }).has_value());
}
