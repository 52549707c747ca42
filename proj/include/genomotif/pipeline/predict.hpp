#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "genomotif/nn/checkpoint.hpp"
#include "genomotif/pipeline/train.hpp"

namespace genomotif {

struct PredictionReport {
  std::string accession;
  std::array<double, kRegionCount> percentages{};  // region order Asia, Europe, America, Oceania
  std::optional<RejectReason> quality_warning;

  Region predicted() const;
};

PredictionReport make_report(std::string accession, const Eigen::Ref<const Eigen::RowVectorXd>& probabilities);

/// "ASIA: 98.826% EUR: 0.051% AME: 0.001% AUSTR: 1.121%"
std::string format_percentages(const PredictionReport& report);
/// Accession followed by the percentage fields, tab separated.
std::string format_line(const PredictionReport& report);

struct PredictOptions {
  MotifGeometry geometry;
  SusanParams susan;
  QualityConfig quality;
  Precision precision = Precision::Float32;
  int threads = 1;
};

/// Records failing the quality gates are still scored; the verdict is kept on the report.
std::vector<PredictionReport> predict(const nn::Checkpoint& ckpt, const std::vector<SequenceRecord>& records,
                                      const PredictOptions& options);

/// accession,asia,europe,america,oceania,predicted,quality
void write_report_csv(std::ostream& out, const std::vector<PredictionReport>& reports);
std::vector<PredictionReport> read_report_csv(std::istream& in);

}  // namespace genomotif
