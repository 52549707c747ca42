#include "genomotif/pipeline/predict.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "genomotif/errors.hpp"

namespace genomotif {

namespace {

constexpr std::array<const char*, kRegionCount> kReportTags = {"ASIA", "EUR", "AME", "AUSTR"};

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Region PredictionReport::predicted() const {
  const auto it = std::max_element(percentages.begin(), percentages.end());
  return region_from_index(static_cast<int>(it - percentages.begin()));
}

PredictionReport make_report(std::string accession, const Eigen::Ref<const Eigen::RowVectorXd>& probabilities) {
  if (probabilities.size() != static_cast<Eigen::Index>(kRegionCount))
    throw Error(ErrorCode::ShapeMismatch, "expected one probability per region");
  PredictionReport r;
  r.accession = std::move(accession);
  for (std::size_t c = 0; c < kRegionCount; ++c) r.percentages[c] = 100.0 * probabilities(static_cast<Eigen::Index>(c));
  return r;
}

std::string format_percentages(const PredictionReport& report) {
  std::string out;
  for (std::size_t c = 0; c < kRegionCount; ++c) {
    if (c) out += ' ';
    out += kReportTags[c];
    out += ": " + percent(report.percentages[c]) + "%";
  }
  return out;
}

std::string format_line(const PredictionReport& report) {
  return report.accession + '\t' + format_percentages(report);
}

std::vector<PredictionReport> predict(const nn::Checkpoint& ckpt, const std::vector<SequenceRecord>& records,
                                      const PredictOptions& options) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records to predict");
  options.geometry.validate();
  options.susan.validate();
  if (ckpt.spec.input_height != options.geometry.height || ckpt.spec.input_width != options.geometry.width)
    throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(ckpt.spec.input_height) + "x" +
                                              std::to_string(ckpt.spec.input_width) + " motifs, geometry gives " +
                                              std::to_string(options.geometry.height) + "x" +
                                              std::to_string(options.geometry.width));
  const auto order = disk_fill_order(options.geometry);
  std::vector<EncodedMotif> encoded(records.size());
  parallel_for(records.size(), options.threads, [&](std::size_t i) {
    encoded[i] = encode_sequence(records[i].bases, options.geometry, order, options.susan);
  });

  Dataset ds;
  ds.height = options.geometry.height;
  ds.width = options.geometry.width;
  ds.channels = 3;
  for (std::size_t i = 0; i < records.size(); ++i)
    ds.push_back(std::move(encoded[i].pixels), records[i].region.value_or(Region::Asia), records[i].accession);

  const auto probs = predict_probabilities(ckpt, ds, options.precision);
  std::vector<PredictionReport> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto r = make_report(records[i].accession, probs.row(static_cast<Eigen::Index>(i)));
    if (const auto verdict = quality_filter(records[i], options.quality); !accepted(verdict))
      r.quality_warning = std::get<Reject>(verdict).reason;
    out.push_back(std::move(r));
  }
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<PredictionReport>& reports) {
  out << "accession,asia,europe,america,oceania,predicted,quality\n";
  for (const auto& r : reports) {
    out << r.accession;
    for (double p : r.percentages) out << ',' << percent(p);
    out << ',' << region_name(r.predicted()) << ','
        << (r.quality_warning ? std::string(to_string(*r.quality_warning)) : std::string("ok")) << '\n';
  }
}

std::vector<PredictionReport> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("accession,asia,", 0) != 0)
    throw Error(ErrorCode::BadFormat, "prediction CSV header missing");
  std::vector<PredictionReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 5) throw Error(ErrorCode::BadFormat, "bad prediction row: " + line);
    PredictionReport r;
    r.accession = cells[0];
    try {
      for (std::size_t c = 0; c < kRegionCount; ++c) r.percentages[c] = std::stod(cells[c + 1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadFormat, "bad prediction row: " + line);
    }
    if (cells.size() > 6 && cells[6] != "ok")
      r.quality_warning = cells[6] == "TooShort" ? RejectReason::TooShort : RejectReason::TooAmbiguous;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace genomotif
