// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genomotif/cli.hpp"
#include "genomotif/image_io.hpp"
#include "genomotif/nn/checkpoint.hpp"
#include "genomotif/nn/optim.hpp"
#include "genomotif/pipeline/dataset.hpp"
#include "genomotif/pipeline/metrics.hpp"
#include "genomotif/pipeline/train.hpp"
#include "genomotif/rasterizer.hpp"
#include "genomotif/susan.hpp"
#include "genomotif/synthetic.hpp"
#include "grad_fixtures.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace genomotif;

namespace {

// Collects the first few failures of one criterion.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (++failures_ <= 5) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const {
    return failures_ > 5 ? detail_ + "; ... " + std::to_string(failures_) + " failures" : detail_;
  }
  std::string note;

 private:
  int failures_ = 0;
  std::string detail_;
};

// A limit of 1e9 s means the criterion sets no runtime bound.
bool run_criterion(int number, const std::string& title, double limit_seconds, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(secs < limit_seconds, "runtime " + std::to_string(secs) + " s exceeds " +
                                      std::to_string(static_cast<int>(limit_seconds)) + " s");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s", secs);
  std::cout << "criterion " << number << " " << (v.ok() ? "PASS" : "FAIL") << " [" << title << "] (" << buf << ")";
  if (!v.note.empty()) std::cout << " " << v.note;
  if (!v.ok()) std::cout << " :: " << v.detail();
  std::cout << std::endl;
  return v.ok();
}

std::string random_bases(std::mt19937_64& rng, std::size_t n) {
  static const char alphabet[] = "ACGTACGTACGTN";
  std::string s(n, 'A');
  for (auto& c : s) c = alphabet[rng() % 13];
  return s;
}

void rasterizer(Verdict& v) {
  std::mt19937_64 rng(1);
  for (int r = 1; r <= 99; ++r) {
    const std::string at = "radius " + std::to_string(r) + ": ";
    MotifGeometry geo;
    geo.max_radius = r;
    const auto order = disk_fill_order(geo);
    std::set<std::pair<int, int>> seen;
    for (auto p : order) seen.insert({p.x, p.y});
    v.require(seen.size() == order.size(), at + "duplicate pixel in fill order");

    for (std::size_t len : {std::size_t{0}, order.size() / 3, order.size(), order.size() + 17,
                            std::size_t{100} + rng() % 30000}) {
      const auto raster = rasterize(random_bases(rng, len), geo, order);
      std::size_t painted = 0;
      for (int y = 0; y < raster.image.height(); ++y)
        for (int x = 0; x < raster.image.width(); ++x) painted += !(raster.image.at(x, y) == kWhite);
      v.require(painted == std::min(len, order.size()), at + "painted pixel count");
    }

    const auto pts = circle_points(r, {0, 0});
    std::set<std::pair<int, int>> circle;
    for (auto p : pts) circle.insert({p.x, p.y});
    for (auto p : pts) {
      for (auto q : {Pixel{p.y, p.x}, Pixel{-p.x, p.y}, Pixel{p.x, -p.y}})
        v.require(circle.count({q.x, q.y}) == 1, at + "circle not 8-fold symmetric");
      v.require(std::abs(std::hypot(p.x, p.y) - r) <= 0.5, at + "circle point outside the distance band");
    }
    v.require(circle == [&] {
      std::set<std::pair<int, int>> o;
      for (auto p : oracle::circle_set(r)) o.insert({p.x, p.y});
      return o;
    }(), at + "circle differs from the brute-force midpoint oracle");
  }
}

void susan(Verdict& v) {
  std::mt19937_64 rng(2);
  const SusanParams params;
  for (int i = 0; i < 50; ++i) {
    GrayImage img;
    img.pixels.resize(64, 64);
    const int levels = i % 2 ? 256 : 2 + i % 5;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        img.pixels(y, x) = static_cast<std::uint8_t>((rng() % levels) * (255 / (levels - 1)));
    const auto out = susan_edges(img, params);
    bool same = true;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double r = oracle::naive_response(img, x, y, params.brightness_threshold, params.geometric_threshold);
        same = same && out.pixels(y, x) == oracle::naive_graded(r, params.geometric_threshold);
      }
    v.require(same, "image " + std::to_string(i) + " differs from the direct sum");
  }
  for (int level : {0, 1, 77, 128, 254, 255}) {
    GrayImage img;
    img.pixels = GrayArray::Constant(64, 64, static_cast<std::uint8_t>(level));
    v.require((susan_edges(img, params).pixels == 0).all(), "uniform image " + std::to_string(level) + " responds");
    v.require((susan_response(img, params) == 0.0).all(), "uniform raw response " + std::to_string(level));
  }
}

void gradients(Verdict& v) {
  nn::Rng rng(3);
  const auto pick = [&](int lo, int hi) { return static_cast<nn::Index>(lo + static_cast<int>(rng.below(hi - lo + 1))); };
  constexpr int kShapes = 20;
  constexpr double kLinear = 1e-6, kNonlinear = 1e-4;
  double worst_linear = 0, worst_other = 0;
  const auto record = [&](const std::string& layer, const nn::GradCheckResult& r, double tol, double& worst) {
    worst = std::max(worst, r.max_relative_error);
    v.require(r.passed(tol), layer + " " + r.worst + " rel err " + std::to_string(r.max_relative_error));
    v.require(r.checked > 0, layer + " checked nothing");
  };
  for (int s = 0; s < kShapes; ++s) {
    const auto k = pick(0, 2) * 2 + 1;
    const auto stride = pick(1, 2);
    record("conv2d", fixtures::conv(rng, pick(1, 3), pick(1, 4), pick(k, 8), pick(k, 8), pick(1, 4), k, stride, pick(0, k / 2)),
           kLinear, worst_linear);
    record("dense", fixtures::linear(rng, pick(1, 4), pick(1, 12), pick(1, 6)), kLinear, worst_linear);
    record("avg_pool", fixtures::avg_pool(rng, pick(1, 3), pick(1, 4), pick(1, 4), pick(1, 4)), kLinear, worst_linear);
    record("global_pool", fixtures::global_pool(rng, pick(1, 3), pick(1, 4), pick(1, 5), pick(1, 5)), kLinear,
           worst_linear);
    record("batchnorm", fixtures::batchnorm(rng, pick(2, 4), pick(1, 4), pick(1, 4), pick(1, 4)), kNonlinear,
           worst_other);
    record("dense_block", fixtures::dense_block(rng, pick(2, 3), pick(1, 3), pick(2, 4), static_cast<int>(pick(1, 3)), pick(1, 3)),
           kNonlinear, worst_other);
    record("transition", fixtures::transition(rng, pick(2, 3), pick(2, 6), pick(1, 3), 0.5), kNonlinear, worst_other);
    record("softmax+cross_entropy", fixtures::softmax_cross_entropy(rng, pick(1, 6), pick(2, 6)), kNonlinear,
           worst_other);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d shapes per layer; worst linear %.2e, worst other %.2e", kShapes, worst_linear,
                worst_other);
  v.note = buf;
}

void analytic(Verdict& v) {
  const nn::Tensor<double> zeros({1, 4});
  const auto p = nn::softmax(zeros);
  for (int i = 0; i < 4; ++i) v.require(std::abs(p[i] - 0.25) <= 1e-12, "softmax(0) != 0.25");
  const auto target = nn::one_hot<double>({2}, 4);
  v.require(std::abs(nn::cross_entropy(p, target) - std::log(4.0)) <= 1e-12, "uniform cross-entropy != ln 4");

  nn::Tensor<double> param({1}, {0.0}), grad({1}, {1.0}), acc({1});
  nn::RmsPropConfig cfg;
  cfg.learning_rate = 0.001;
  cfg.rho = 0.9;
  nn::rmsprop_step(param, grad, acc, cfg);
  v.require(std::abs(std::abs(param[0]) - 0.00316228) <= 1e-8, "RMSProp step " + std::to_string(param[0]));
  v.require(param[0] < 0, "RMSProp step has the wrong sign");
}

void metric_oracles(Verdict& v) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> scores(n);
    std::vector<bool> pos(n);
    std::unique_ptr<bool[]> flags(new bool[n]);
    const int grid = 1 + static_cast<int>(rng() % 10);
    for (std::size_t k = 0; k < n; ++k) {
      scores[k] = static_cast<double>(rng() % (grid + 1)) / grid;
      pos[k] = flags[k] = (rng() & 1) != 0;
    }
    pos[rng() % n] = true;
    for (std::size_t k = 0; k < n; ++k) flags[k] = pos[k];
    std::size_t neg = rng() % n;
    while (pos[neg] && std::count(pos.begin(), pos.end(), true) == static_cast<long>(n)) {
      pos[neg] = flags[neg] = false;
      neg = rng() % n;
    }
    if (std::count(pos.begin(), pos.end(), false) == 0) continue;
    const double auc = roc_curve(scores, std::span<const bool>(flags.get(), n)).auc;
    v.require(std::abs(auc - oracle::mann_whitney_auc(scores, pos)) <= 1e-12,
              "instance " + std::to_string(i) + ": trapezoid AUC differs from Mann-Whitney");

    std::vector<int> truth(n), pred(n);
    for (std::size_t k = 0; k < n; ++k) {
      truth[k] = static_cast<int>(rng() % 4);
      pred[k] = static_cast<int>(rng() % 4);
    }
    const auto cm = confusion_matrix(truth, pred, 4);
    v.require(micro_recall(cm) == accuracy(cm), "micro recall != accuracy on instance " + std::to_string(i));
  }

  std::vector<int> truth;
  for (int c = 0; c < 4; ++c) truth.insert(truth.end(), 25, c);
  Eigen::MatrixXd probs = Eigen::MatrixXd::Constant(100, 4, 0.05);
  for (int i = 0; i < 100; ++i) probs(i, truth[static_cast<std::size_t>(i)]) = 0.85;
  const auto report = evaluate_scores(truth, probs, {"Asia", "Europe", "America", "Oceania"});
  ConfusionMatrix diag = ConfusionMatrix::Zero(4, 4);
  diag.diagonal().setConstant(25);
  v.require(report.confusion == diag, "perfect classifier confusion matrix is not diagonal");
  for (const auto& roc : report.roc) v.require(roc && roc->auc == 1.0, "perfect classifier AUC != 1");
}

struct EndToEnd {
  std::string dir;
  double accuracy = 0;
  std::vector<double> aucs;
};

// Synthetic corpus -> build-dataset -> train -> evaluate, all through the command line.
EndToEnd end_to_end(const std::string& dir, const std::string& fasta, const std::string& metadata) {
  const auto call = [](std::vector<std::string> args) {
    args.insert(args.begin(), "genomotif");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) throw std::runtime_error(args[1] + " exited " + std::to_string(code) + ": " + err.str());
  };
  call({"build-dataset", fasta, "--metadata", metadata, "--threads", "1", "-q", "-o", dir + "/corpus.gmd1"});
  call({"train", dir + "/corpus.gmd1", "--epochs", "20", "--seed", "7", "--threads", "1", "-q", "-o", dir + "/train"});
  call({"evaluate", dir + "/corpus.gmd1", "--checkpoint", dir + "/train/best.ckpt", "--split",
        dir + "/train/split.json", "--threads", "1", "-q", "-o", dir + "/eval"});
  const auto j = nlohmann::json::parse(testing::slurp(dir + "/eval/metrics.json"));
  EndToEnd r{dir, j.at("accuracy").get<double>(), {}};
  for (const auto& c : j.at("per_class")) r.aucs.push_back(c.at("auc").is_null() ? -1.0 : c.at("auc").get<double>());
  return r;
}

struct Corpus {
  testing::TempDir tmp{"acceptance"};
  std::string fasta = tmp.file("corpus.fasta");
  std::string metadata = tmp.file("corpus.csv");

  Corpus() {
    SyntheticOptions opt;
    opt.per_region = 100;
    const auto records = synthetic_corpus(opt);
    std::ostringstream fa;
    write_fasta(fa, records);
    testing::spit(fasta, fa.str());
    testing::spit(metadata, synthetic_metadata_csv(records));
  }
};

void synthetic_run(Verdict& v, Corpus& corpus, std::optional<EndToEnd>& first) {
  const auto& prof = synthetic_profiles();
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) {
      double widest = 0;
      for (std::size_t k = 0; k < 4; ++k) widest = std::max(widest, std::abs(prof[a][k] - prof[b][k]));
      v.require(widest >= 0.15 - 1e-12, "two region profiles differ by less than 15 points");
    }
  first = end_to_end(corpus.tmp.file("run1"), corpus.fasta, corpus.metadata);
  v.require(first->accuracy >= 0.95, "validation accuracy " + std::to_string(first->accuracy));
  v.require(first->aucs.size() == 4, "expected four one-vs-rest AUCs");
  for (double auc : first->aucs) v.require(auc >= 0.98, "AUC " + std::to_string(auc));
  std::ostringstream note;
  note << "val acc " << first->accuracy << ", AUC";
  for (double auc : first->aucs) note << " " << auc;
  v.note = note.str();
}

void determinism(Verdict& v, Corpus& corpus, const std::optional<EndToEnd>& first) {
  v.require(first.has_value(), "criterion 6 produced no run to compare");
  if (!first) return;
  const auto second = end_to_end(corpus.tmp.file("run2"), corpus.fasta, corpus.metadata);
  for (const char* rel : {"/corpus.gmd1", "/train/best.ckpt", "/train/last.ckpt", "/train/history.csv",
                          "/eval/metrics.json", "/eval/roc.csv"}) {
    const auto a = testing::slurp(first->dir + rel), b = testing::slurp(second.dir + rel);
    v.require(!a.empty(), std::string(rel) + " missing");
    v.require(a == b, std::string(rel) + " differs between runs");
  }
}

void round_trips(Verdict& v) {
  testing::TempDir tmp("roundtrip");
  std::mt19937_64 rng(8);
  SyntheticOptions opt;
  opt.per_region = 3;
  opt.min_length = 600;
  opt.max_length = 900;
  const auto ds = build_dataset(synthetic_corpus(opt), MotifGeometry::square(32), SusanParams{});
  save_dataset(ds, tmp.file("d.gmd1"));
  const auto back = load_dataset(tmp.file("d.gmd1"));
  v.require(back.images == ds.images, "GMD1 pixels changed");
  v.require(back.labels == ds.labels, "GMD1 labels changed");
  v.require(back.accessions == ds.accessions, "GMD1 accessions changed");

  for (int i = 0; i < 5; ++i) {
    const auto motif = rasterize(random_bases(rng, 20000 + rng() % 10000), MotifGeometry{}).image;
    write_png(motif, tmp.file("m.png"));
    v.require(read_png(tmp.file("m.png")) == motif, "PNG round trip changed pixels");
  }

  nn::NetworkSpec spec;
  spec.input_height = spec.input_width = 32;
  spec.stem_channels = 4;
  spec.blocks = {{2, 4}, {2, 4}};
  const auto [train_set, val_set] = split(ds, 0.34, 3);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seed = 9;
  cfg.epochs = 4;
  const auto full = train(train_set, val_set, spec, cfg);

  nn::write_checkpoint(tmp.file("full.ckpt"), full.last);
  const auto loaded = nn::read_checkpoint(tmp.file("full.ckpt"));
  v.require(loaded.params == full.last.params, "checkpoint parameters changed");
  v.require(loaded.buffers == full.last.buffers, "checkpoint buffers changed");
  v.require(loaded.optimizer == full.last.optimizer, "checkpoint optimizer state changed");
  nn::write_checkpoint(tmp.file("again.ckpt"), loaded);
  v.require(testing::slurp(tmp.file("full.ckpt")) == testing::slurp(tmp.file("again.ckpt")),
            "checkpoint bytes changed after load and save");

  cfg.epochs = 2;
  const auto half = train(train_set, val_set, spec, cfg);
  nn::write_checkpoint(tmp.file("half.ckpt"), half.last);
  const auto resume_from = nn::read_checkpoint(tmp.file("half.ckpt"));
  cfg.epochs = 4;
  const auto resumed = train(train_set, val_set, spec, cfg, &resume_from);
  std::ostringstream a, b;
  nn::write_checkpoint(a, full.last);
  nn::write_checkpoint(b, resumed.last);
  v.require(a.str() == b.str(), "resumed training diverges from the uninterrupted run");
  v.require(resumed.history.size() == 2 && resumed.history.back().train_loss == full.history.back().train_loss,
            "resumed history differs");
}

}  // namespace

int main() {
  std::cout << "genomotif acceptance" << std::endl;
  bool ok = true;
  ok &= run_criterion(1, "rasterizer oracle equivalence", 5, rasterizer);
  ok &= run_criterion(2, "SUSAN brute-force equivalence", 10, susan);
  ok &= run_criterion(3, "gradient suite", 60, gradients);
  ok &= run_criterion(4, "analytic values", 1e9, analytic);
  ok &= run_criterion(5, "metric oracles", 1e9, metric_oracles);
  Corpus corpus;
  std::optional<EndToEnd> first;
  ok &= run_criterion(6, "synthetic end-to-end", 600, [&](Verdict& v) { synthetic_run(v, corpus, first); });
  ok &= run_criterion(7, "determinism", 1e9, [&](Verdict& v) { determinism(v, corpus, first); });
  ok &= run_criterion(8, "format round trips", 1e9, round_trips);
  std::cout << (ok ? "all criteria PASS" : "some criteria FAIL") << std::endl;
  return ok ? 0 : 1;
}
