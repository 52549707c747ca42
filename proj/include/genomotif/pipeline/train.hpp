#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "genomotif/nn/checkpoint.hpp"
#include "genomotif/nn/network.hpp"
#include "genomotif/nn/optim.hpp"
#include "genomotif/pipeline/dataset.hpp"

namespace genomotif {

enum class Precision { Float32, Float64 };
std::string_view to_string(Precision p);
Precision parse_precision(std::string_view s);

struct TrainConfig {
  int epochs = 75;
  int batch_size = 32;
  double learning_rate = 0.001;
  std::uint64_t seed = 7;
  double validation_fraction = 0.2;
  Precision precision = Precision::Float32;
  /// When set, best.ckpt / last.ckpt / history.csv are (re)written after every epoch.
  std::string output_dir;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  nn::Checkpoint best;  // highest validation accuracy seen (first one on ties)
  nn::Checkpoint last;
};

void write_history_csv(std::ostream& out, const std::vector<EpochStats>& history);
std::vector<EpochStats> read_history_csv(std::istream& in);
void write_history_file(const std::string& path, const std::vector<EpochStats>& history);

/// Pixels / 255 into [0, 1], HWC bytes -> NCHW.
template <typename Scalar>
nn::Tensor<Scalar> make_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  const nn::Index n = static_cast<nn::Index>(indices.size());
  nn::Tensor<Scalar> x({n, ds.channels, ds.height, ds.width});
  const Scalar scale = Scalar(1) / Scalar(255);
  const nn::Index plane = nn::Index{ds.height} * ds.width;
  for (nn::Index i = 0; i < n; ++i) {
    const auto& img = ds.images[indices[static_cast<std::size_t>(i)]];
    Scalar* dst = x.data() + i * ds.channels * plane;
    for (nn::Index p = 0; p < plane; ++p)
      for (nn::Index c = 0; c < ds.channels; ++c)
        dst[c * plane + p] = static_cast<Scalar>(img[static_cast<std::size_t>(p * ds.channels + c)]) * scale;
  }
  return x;
}

/// Mini-batches of one epoch. A trailing batch of one sample is folded into its
/// predecessor because batch normalisation cannot train on it.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t samples, int batch_size, std::uint64_t seed,
                                                     int epoch);

nn::NetworkSpec spec_for(const Dataset& ds, nn::NetworkSpec base);

/// Keeps large freed blocks in the heap (glibc only). Called by train and predict.
void reuse_large_allocations();

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  Eigen::MatrixXd probabilities;  // samples x classes
};

/// Eval-mode forward pass over the whole dataset.
template <typename Scalar>
Evaluation run_inference(nn::MiniDenseNet<Scalar>& model, const Dataset& ds, int batch_size) {
  Evaluation ev;
  const auto classes = model.spec().classes;
  ev.probabilities.resize(static_cast<Eigen::Index>(ds.size()), classes);
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < ds.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(ds.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    std::vector<int> labels;
    for (auto i : idx) labels.push_back(static_cast<int>(ds.labels[i]));
    const auto probs = nn::softmax(model.forward(make_batch<Scalar>(ds, idx), nn::Mode::Eval));
    const auto targets = nn::one_hot<Scalar>(labels, classes);
    loss_sum += static_cast<double>(nn::cross_entropy(probs, targets)) * static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Eigen::Index arg;
      probs.matrix().row(static_cast<Eigen::Index>(k)).maxCoeff(&arg);
      if (arg == labels[k]) ++correct;
      ev.probabilities.row(static_cast<Eigen::Index>(start + k)) =
          probs.matrix().row(static_cast<Eigen::Index>(k)).template cast<double>();
    }
  }
  if (!ds.empty()) {
    ev.loss = loss_sum / static_cast<double>(ds.size());
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  }
  return ev;
}

template <typename Scalar>
class Trainer {
 public:
  Trainer(const nn::NetworkSpec& spec, const TrainConfig& cfg)
      : cfg_(cfg),
        model_(spec, cfg.seed),
        optimizer_(model_.params(), nn::RmsPropConfig{cfg.learning_rate, 0.9, 1e-8}) {
    cfg_.validate();
  }

  nn::MiniDenseNet<Scalar>& model() { return model_; }
  nn::RmsProp<Scalar>& optimizer() { return optimizer_; }
  const nn::TrainingState& state() const { return state_; }

  /// Continue from a checkpoint: parameters, running statistics, optimizer state and the
  /// epoch/step counters that drive shuffling and dropout.
  void resume(const nn::Checkpoint& ckpt) {
    nn::restore(ckpt, model_, &optimizer_);
    state_ = ckpt.state;
    state_.optimizer = optimizer_.config();
  }

  /// One optimisation step; returns (summed loss, correct predictions) for the batch.
  std::pair<double, std::size_t> step(const Dataset& ds, std::span<const std::size_t> idx) {
    std::vector<int> labels;
    for (auto i : idx) labels.push_back(static_cast<int>(ds.labels[i]));
    const auto logits = model_.forward(make_batch<Scalar>(ds, idx), nn::Mode::Train, state_.step);
    const auto probs = nn::softmax(logits);
    const auto targets = nn::one_hot<Scalar>(labels, model_.spec().classes);
    const double loss = static_cast<double>(nn::cross_entropy(probs, targets));
    if (!std::isfinite(loss))
      throw Error(ErrorCode::NonFiniteLoss, "loss " + std::to_string(loss) + " at epoch " +
                                                std::to_string(state_.epoch + 1) + ", step " +
                                                std::to_string(state_.step));
    model_.backward(nn::softmax_cross_entropy_grad(probs, targets));
    optimizer_.step(model_.params());
    ++state_.step;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Eigen::Index arg;
      probs.matrix().row(static_cast<Eigen::Index>(k)).maxCoeff(&arg);
      if (arg == labels[k]) ++correct;
    }
    return {loss * static_cast<double>(idx.size()), correct};
  }

  TrainResult fit(const Dataset& train, const Dataset& validation, std::ostream* log = nullptr) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
    TrainResult result;
    result.best = nn::capture(model_, &optimizer_, state_);
    bool have_best = state_.epoch > 0;  // resumed runs keep their recorded best
    earlier_.clear();
    if (have_best && !cfg_.output_dir.empty()) {
      std::ifstream in(std::filesystem::path(cfg_.output_dir) / "history.csv");
      if (in)
        for (const auto& e : read_history_csv(in))
          if (e.epoch <= static_cast<int>(state_.epoch)) earlier_.push_back(e);
    }
    while (static_cast<int>(state_.epoch) < cfg_.epochs) {
      EpochStats stats;
      stats.epoch = static_cast<int>(state_.epoch) + 1;
      double loss_sum = 0.0;
      std::size_t correct = 0;
      for (const auto& batch : epoch_batches(train.size(), cfg_.batch_size, cfg_.seed, stats.epoch)) {
        const auto [l, c] = step(train, batch);
        loss_sum += l;
        correct += c;
      }
      stats.train_loss = loss_sum / static_cast<double>(train.size());
      stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
      if (!validation.empty()) {
        const auto ev = run_inference(model_, validation, cfg_.batch_size);
        stats.val_loss = ev.loss;
        stats.val_accuracy = ev.accuracy;
      }
      ++state_.epoch;
      result.history.push_back(stats);

      const bool improved = !have_best || static_cast<float>(stats.val_accuracy) > state_.best_val_accuracy;
      if (improved) {
        state_.best_val_accuracy = static_cast<float>(stats.val_accuracy);
        have_best = true;
      }
      result.last = nn::capture(model_, &optimizer_, state_);
      if (improved) result.best = result.last;
      persist(result, improved);
      if (log)
        *log << "epoch " << stats.epoch << "/" << cfg_.epochs << " loss " << stats.train_loss << " acc "
             << stats.train_accuracy << " val_loss " << stats.val_loss << " val_acc " << stats.val_accuracy
             << (improved ? " *" : "") << '\n';
    }
    if (!have_best) result.last = result.best;
    return result;
  }

 private:
  void persist(const TrainResult& result, bool improved) const {
    if (cfg_.output_dir.empty()) return;
    const std::filesystem::path dir(cfg_.output_dir);
    std::filesystem::create_directories(dir);
    if (improved) nn::write_checkpoint((dir / "best.ckpt").string(), result.best);
    nn::write_checkpoint((dir / "last.ckpt").string(), result.last);
    auto rows = earlier_;
    rows.insert(rows.end(), result.history.begin(), result.history.end());
    write_history_file((dir / "history.csv").string(), rows);
  }

  std::vector<EpochStats> earlier_;  // rows from before a resume, kept in history.csv

  TrainConfig cfg_;
  nn::MiniDenseNet<Scalar> model_;
  nn::RmsProp<Scalar> optimizer_;
  nn::TrainingState state_;
};

/// Precision-dispatched entry point used by the CLI.
TrainResult train(const Dataset& train_set, const Dataset& validation, const nn::NetworkSpec& spec,
                  const TrainConfig& cfg, const nn::Checkpoint* resume = nullptr, std::ostream* log = nullptr);

/// Class probabilities for every sample of `ds` under the checkpointed model.
Eigen::MatrixXd predict_probabilities(const nn::Checkpoint& ckpt, const Dataset& ds,
                                      Precision precision = Precision::Float32, int batch_size = 32);

}  // namespace genomotif
