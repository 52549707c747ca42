#include "genomotif/pipeline/train.hpp"

#include <cstdio>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <fstream>
#include <sstream>

#include "genomotif/nn/random.hpp"

namespace genomotif {

std::string_view to_string(Precision p) { return p == Precision::Float32 ? "32" : "64"; }

Precision parse_precision(std::string_view s) {
  if (s == "32" || s == "float" || s == "f32") return Precision::Float32;
  if (s == "64" || s == "double" || s == "f64") return Precision::Float64;
  throw Error(ErrorCode::Usage, "precision must be 32 or 64");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::Usage, "epochs must be >= 1");
  if (batch_size < 2) throw Error(ErrorCode::Usage, "batch size must be >= 2 (batch normalisation)");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::Usage, "learning rate must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error(ErrorCode::Usage, "validation fraction must lie in (0, 1)");
}

void write_history_csv(std::ostream& out, const std::vector<EpochStats>& history) {
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char line[160];
  for (const auto& e : history) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%.6f\n", e.epoch, e.train_loss, e.train_accuracy,
                  e.val_loss, e.val_accuracy);
    out << line;
  }
}

std::vector<EpochStats> read_history_csv(std::istream& in) {
  std::vector<EpochStats> history;
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch,", 0) != 0)
    throw Error(ErrorCode::BadFormat, "history CSV header missing");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochStats e;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &e.epoch, &e.train_loss, &e.train_accuracy, &e.val_loss,
                    &e.val_accuracy) != 5)
      throw Error(ErrorCode::BadFormat, "bad history row: " + line);
    history.push_back(e);
  }
  return history;
}

void write_history_file(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_history_csv(out, history);
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t samples, int batch_size, std::uint64_t seed,
                                                     int epoch) {
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), 0);
  nn::Rng rng(nn::mix_seed(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < samples; start += bs)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(samples, start + bs)));
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

void reuse_large_allocations() {
#if defined(__GLIBC__)
  // Activations are tens of megabytes and are freed and reallocated every step; served by
  // mmap each time, every step would page-fault its working set back in.
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)done;
#endif
}

nn::NetworkSpec spec_for(const Dataset& ds, nn::NetworkSpec base) {
  base.input_channels = ds.channels;
  base.input_height = ds.height;
  base.input_width = ds.width;
  base.classes = static_cast<int>(kRegionCount);
  return base;
}

namespace {

template <typename Scalar>
TrainResult train_as(const Dataset& train_set, const Dataset& validation, const nn::NetworkSpec& spec,
                     const TrainConfig& cfg, const nn::Checkpoint* resume, std::ostream* log) {
  Trainer<Scalar> trainer(resume ? resume->spec : spec, cfg);
  if (resume) trainer.resume(*resume);
  return trainer.fit(train_set, validation, log);
}

template <typename Scalar>
Eigen::MatrixXd probabilities_as(const nn::Checkpoint& ckpt, const Dataset& ds, int batch_size) {
  nn::MiniDenseNet<Scalar> model(ckpt.spec, ckpt.state.model_seed);
  nn::restore<Scalar>(ckpt, model, nullptr);
  return run_inference(model, ds, batch_size).probabilities;
}

}  // namespace

TrainResult train(const Dataset& train_set, const Dataset& validation, const nn::NetworkSpec& spec,
                  const TrainConfig& cfg, const nn::Checkpoint* resume, std::ostream* log) {
  train_set.validate();
  validation.validate();
  reuse_large_allocations();
  if (cfg.precision == Precision::Float64) return train_as<double>(train_set, validation, spec, cfg, resume, log);
  return train_as<float>(train_set, validation, spec, cfg, resume, log);
}

Eigen::MatrixXd predict_probabilities(const nn::Checkpoint& ckpt, const Dataset& ds, Precision precision,
                                      int batch_size) {
  if (ds.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to predict");
  reuse_large_allocations();
  if (precision == Precision::Float64) return probabilities_as<double>(ckpt, ds, batch_size);
  return probabilities_as<float>(ckpt, ds, batch_size);
}

}  // namespace genomotif
