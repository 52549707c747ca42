#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace genomotif {

using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows are true classes, columns predicted classes.
ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the value is 0 only because its denominator was 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);
/// Pooled TP / (TP + FN) over all classes.
double micro_recall(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold;  // +inf for the (0, 0) anchor
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// One-vs-rest ROC: thresholds sweep the distinct scores in descending order, tied scores
/// share one threshold, AUC by the trapezoidal rule. Throws DegenerateClass when there
/// are no positives or no negatives.
RocCurve roc_curve(std::span<const double> scores, std::span<const bool> positive);

struct MetricsReport {
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  std::vector<std::optional<RocCurve>> roc;  // nullopt: AUC undefined for that class
  std::vector<std::string> class_names;
};

/// `probabilities` is samples x classes; the predicted class is the row argmax.
MetricsReport evaluate_scores(std::span<const int> truth, const Eigen::MatrixXd& probabilities,
                              std::vector<std::string> class_names);

std::string metrics_json(const MetricsReport& report);
void write_roc_csv(std::ostream& out, const MetricsReport& report);
std::string render_confusion(const MetricsReport& report);

}  // namespace genomotif
