#include "genomotif/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "genomotif/errors.hpp"
#include "json.hpp"

namespace genomotif {

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int classes) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::ShapeMismatch, "truth and prediction lengths differ");
  ConfusionMatrix cm = ConfusionMatrix::Zero(classes, classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes)
      throw Error(ErrorCode::ShapeMismatch, "class index out of range");
    ++cm(truth[i], predicted[i]);
  }
  return cm;
}

namespace {

double ratio(std::int64_t num, std::int64_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out(static_cast<std::size_t>(cm.rows()));
  for (Eigen::Index c = 0; c < cm.rows(); ++c) {
    auto& m = out[static_cast<std::size_t>(c)];
    const auto tp = cm(c, c);
    m.precision = ratio(tp, cm.col(c).sum(), m.precision_undefined);
    m.recall = ratio(tp, cm.row(c).sum(), m.recall_undefined);
    m.f1_undefined = m.precision + m.recall == 0.0;
    m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return out;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.sum();
  if (total == 0) throw Error(ErrorCode::EmptyDataset, "accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double micro_recall(const ConfusionMatrix& cm) {
  std::int64_t tp = 0, fn = 0;
  for (Eigen::Index c = 0; c < cm.rows(); ++c) {
    tp += cm(c, c);
    fn += cm.row(c).sum() - cm(c, c);
  }
  if (tp + fn == 0) throw Error(ErrorCode::EmptyDataset, "micro recall of an empty confusion matrix");
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

RocCurve roc_curve(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw Error(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  const auto pos = std::count(positive.begin(), positive.end(), true);
  const auto neg = static_cast<std::int64_t>(positive.size()) - pos;
  if (pos == 0 || neg == 0)
    throw Error(ErrorCode::DegenerateClass, "ROC needs at least one positive and one negative sample");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (positive[order[i]] ? tp : fp)++;
    const RocPoint p{threshold, static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)};
    const auto& prev = curve.points.back();
    curve.auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
    curve.points.push_back(p);
  }
  return curve;
}

MetricsReport evaluate_scores(std::span<const int> truth, const Eigen::MatrixXd& probabilities,
                              std::vector<std::string> class_names) {
  if (truth.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to evaluate");
  if (static_cast<Eigen::Index>(truth.size()) != probabilities.rows())
    throw Error(ErrorCode::ShapeMismatch, "probability rows do not match the labels");
  const int classes = static_cast<int>(probabilities.cols());
  if (static_cast<int>(class_names.size()) != classes)
    throw Error(ErrorCode::ShapeMismatch, "class name count does not match probability columns");

  std::vector<int> predicted(truth.size());
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    Eigen::Index arg;
    probabilities.row(i).maxCoeff(&arg);
    predicted[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }

  MetricsReport r;
  r.class_names = std::move(class_names);
  r.confusion = confusion_matrix(truth, predicted, classes);
  r.classes = per_class_metrics(r.confusion);
  r.accuracy = accuracy(r.confusion);
  std::vector<double> scores(truth.size());
  std::unique_ptr<bool[]> positive(new bool[truth.size()]);
  for (int c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      scores[i] = probabilities(static_cast<Eigen::Index>(i), c);
      positive[i] = truth[i] == c;
    }
    try {
      r.roc.emplace_back(roc_curve(scores, std::span<const bool>(positive.get(), truth.size())));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateClass) throw;
      r.roc.emplace_back(std::nullopt);
    }
  }
  return r;
}

std::string metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["samples"] = r.confusion.sum();
  j["accuracy"] = r.accuracy;
  j["classes"] = r.class_names;
  auto& cm = j["confusion_matrix"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    std::vector<std::int64_t> row(r.confusion.cols());
    for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) row[static_cast<std::size_t>(k)] = r.confusion(i, k);
    cm.push_back(row);
  }
  auto& per = j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.classes[c];
    nlohmann::ordered_json e;
    e["class"] = r.class_names[c];
    e["support"] = r.confusion.row(static_cast<Eigen::Index>(c)).sum();
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["f1"] = m.f1;
    std::vector<std::string> flags;
    if (m.precision_undefined) flags.emplace_back("precision_zero_denominator");
    if (m.recall_undefined) flags.emplace_back("recall_zero_denominator");
    if (m.f1_undefined) flags.emplace_back("f1_zero_denominator");
    e["flags"] = flags;
    if (r.roc[c])
      e["auc"] = r.roc[c]->auc;
    else
      e["auc"] = nullptr;
    per.push_back(e);
  }
  return j.dump(2) + "\n";
}

void write_roc_csv(std::ostream& out, const MetricsReport& r) {
  out << "class,threshold,fpr,tpr\n";
  out << std::setprecision(17);
  for (std::size_t c = 0; c < r.roc.size(); ++c) {
    if (!r.roc[c]) continue;
    for (const auto& p : r.roc[c]->points) {
      out << r.class_names[c] << ',';
      if (std::isinf(p.threshold))
        out << "inf";
      else
        out << p.threshold;
      out << ',' << p.fpr << ',' << p.tpr << '\n';
    }
  }
}

std::string render_confusion(const MetricsReport& r) {
  std::ostringstream os;
  std::size_t width = 8;
  for (const auto& n : r.class_names) width = std::max(width, n.size() + 2);
  os << std::setw(static_cast<int>(width)) << "true\\pred";
  for (const auto& n : r.class_names) os << std::setw(static_cast<int>(width)) << n;
  os << '\n';
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    os << std::setw(static_cast<int>(width)) << r.class_names[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) os << std::setw(static_cast<int>(width)) << r.confusion(i, k);
    os << '\n';
  }
  os << std::fixed << std::setprecision(4);
  os << "\nclass        precision  recall  f1      auc\n";
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.classes[c];
    os << std::left << std::setw(13) << r.class_names[c] << std::right << std::setw(9) << m.precision
       << std::setw(8) << m.recall << std::setw(8) << m.f1;
    if (r.roc[c])
      os << std::setw(8) << r.roc[c]->auc;
    else
      os << std::setw(8) << "n/a";
    os << '\n';
  }
  os << "accuracy " << r.accuracy << '\n';
  return os.str();
}

}  // namespace genomotif
