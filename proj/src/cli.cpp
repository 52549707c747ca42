#include "genomotif/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

#include "genomotif/errors.hpp"
#include "genomotif/image_io.hpp"
#include "genomotif/nn/checkpoint.hpp"
#include "genomotif/pipeline/dataset.hpp"
#include "genomotif/pipeline/metrics.hpp"
#include "genomotif/pipeline/predict.hpp"
#include "genomotif/pipeline/train.hpp"
#include "genomotif/rasterizer.hpp"
#include "genomotif/seqio.hpp"
#include "genomotif/susan.hpp"
#include "json.hpp"

#ifndef GENOMOTIF_VERSION
#define GENOMOTIF_VERSION "dev"
#endif
#ifndef GENOMOTIF_DATA_DIR
#define GENOMOTIF_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace genomotif::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeyValues parse_config(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Usage, source + ":" + std::to_string(line_no) + ": expected key=value");
    auto key = trim(std::string_view(text).substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::Usage, source + ":" + std::to_string(line_no) + ": empty key");
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = trim(std::string_view(text).substr(eq + 1));
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Usage, "cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "SHA-256 unavailable");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

int default_threads() {
  const char* env = std::getenv("GENOMOTIF_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024)
    throw Error(ErrorCode::Usage, "GENOMOTIF_THREADS must be an integer in [1, 1024], got '" + std::string(env) + "'");
  return static_cast<int>(v);
}

namespace {

struct Common {
  std::string config;
  std::string manifest;
  int threads = 0;
  bool quiet = false;
};

struct GeometryFlags {
  int size = 200;
  int max_radius = -1;
  std::string fill = "rings";

  MotifGeometry resolve() const {
    auto g = MotifGeometry::square(size, parse_fill_mode(fill));
    if (max_radius >= 0) g.max_radius = max_radius;
    g.validate();
    return g;
  }
};

struct SusanFlags {
  double t = 27.0;
  double g = 0.75 * kSusanMaskSize;
  std::string output = "graded";

  SusanParams resolve() const {
    SusanParams p;
    p.brightness_threshold = t;
    p.geometric_threshold = g;
    p.output = parse_susan_output(output);
    p.validate();
    return p;
  }
};

struct QualityFlags {
  std::size_t min_length = 29000;
  double max_ambiguous = 0.05;

  QualityConfig resolve() const {
    QualityConfig q{min_length, max_ambiguous};
    q.validate();
    return q;
  }
};

struct NetworkFlags {
  int stem_channels = 16;
  int blocks = 2;
  int block_layers = 4;
  int growth = 8;
  double compression = 0.5;
  double dropout = 0.5;

  nn::NetworkSpec resolve() const {
    nn::NetworkSpec s;
    s.stem_channels = stem_channels;
    s.blocks.assign(static_cast<std::size_t>(std::max(blocks, 0)), nn::BlockSpec{block_layers, growth});
    s.compression = compression;
    s.dropout = dropout;
    return s;
  }
};

struct Options {
  Common common;
  std::vector<std::string> inputs;
  std::string output;
  std::string metadata;
  std::string countries = std::string(GENOMOTIF_DATA_DIR) + "/country_regions.csv";
  std::string fasta_out;
  std::string checkpoint;
  std::string resume;
  std::string split_file;
  std::string subset = "auto";
  std::string precision = "32";
  GeometryFlags geometry;
  SusanFlags susan;
  QualityFlags quality;
  NetworkFlags network;
  int epochs = 75;
  int batch = 32;
  double lr = 0.001;
  std::uint64_t seed = 7;
  double val_fraction = 0.2;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Flat key=value file; keys are long flag names (flags win)");
  sub->add_option("--threads", c.threads, "Worker threads (default: $GENOMOTIF_THREADS, else 1)")
      ->check(CLI::Range(1, 1024));
  sub->add_option("--manifest", c.manifest, "Run-manifest JSON path (default: next to the primary output)");
  sub->add_flag("-q,--quiet", c.quiet, "Suppress progress output on stderr");
}

void add_geometry(CLI::App* sub, GeometryFlags& g) {
  sub->add_option("--size", g.size, "Motif image side in pixels")->check(CLI::Range(3, 4096));
  sub->add_option("--max-radius", g.max_radius, "Outermost ring radius (-1: largest that fits)");
  sub->add_option("--fill", g.fill, "Fill order: rings or disk")->check(CLI::IsMember({"rings", "disk"}));
}

void add_susan(CLI::App* sub, SusanFlags& s) {
  sub->add_option("--susan-t", s.t, "SUSAN brightness threshold t");
  sub->add_option("--susan-g", s.g, "SUSAN geometric threshold g (USAN area)");
  sub->add_option("--susan-output", s.output, "graded or binary")->check(CLI::IsMember({"graded", "binary"}));
}

void add_quality(CLI::App* sub, QualityFlags& q) {
  sub->add_option("--min-length", q.min_length, "Minimum number of bases");
  sub->add_option("--max-ambiguous", q.max_ambiguous, "Ambiguous-symbol fraction must stay below this");
}

void add_countries(CLI::App* sub, Options& o) {
  sub->add_option("--countries", o.countries, "Location -> region table (CSV)");
}

// Fills options that were not given on the command line from the config file.
void apply_config(CLI::App* sub, const std::string& path, std::ostream& err) {
  for (const auto& [key, value] : parse_config_file(path)) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
    }
    if (!opt) {
      err << "genomotif " << sub->get_name() << ": config key '" << key << "' does not apply here, ignored\n";
      continue;
    }
    if (key == "config") throw Error(ErrorCode::Usage, path + ": config files cannot include other config files");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::string option_value(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  std::string joined;
  for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
  return joined;
}

class Run {
 public:
  Run(CLI::App* sub, const Options& o, std::ostream& err) : sub_(sub), o_(o), err_(err) {}

  void input(const std::string& path) { inputs_.push_back(path); }
  void artifact(const std::string& path) { artifacts_.push_back(path); }
  std::ostream& log() { return o_.common.quiet ? null_ : err_; }

  void write_manifest(const std::string& default_path) const {
    const std::string path = o_.common.manifest.empty() ? default_path : o_.common.manifest;
    if (path.empty()) return;
    nlohmann::ordered_json j;
    j["tool"] = "genomotif";
    j["version"] = GENOMOTIF_VERSION;
    j["command"] = sub_->get_name();
    nlohmann::ordered_json cfg;
    for (const auto* opt : sub_->get_options()) {
      const auto name = opt->get_name(false, true);
      if (name == "--help" || name == "-h,--help" || opt->get_lnames().empty()) continue;
      const auto& lname = opt->get_lnames().front();
      if (lname == "help" || lname == "manifest" || lname == "quiet") continue;
      cfg[lname] = option_value(opt);
    }
    cfg["threads"] = std::to_string(o_.common.threads);
    cfg["inputs"] = o_.inputs;
    j["config"] = cfg;
    auto& ins = j["inputs"] = nlohmann::ordered_json::array();
    for (const auto& p : inputs_) {
      nlohmann::ordered_json e;
      e["path"] = p;
      e["bytes"] = fs::file_size(p);
      e["sha256"] = sha256_file(p);
      ins.push_back(e);
    }
    j["artifacts"] = artifacts_;
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
  }

 private:
  struct NullBuf : std::streambuf {
    int overflow(int c) override { return c; }
  };

  CLI::App* sub_;
  const Options& o_;
  std::ostream& err_;
  std::vector<std::string> inputs_;
  std::vector<std::string> artifacts_;
  NullBuf null_buf_;
  mutable std::ostream null_{&null_buf_};
};

std::string safe_file_stem(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out.empty() ? std::string("record") : out;
}

void ensure_parent(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
}

std::vector<SequenceRecord> read_all_fasta(const std::vector<std::string>& paths, Run& run) {
  std::vector<SequenceRecord> all;
  for (const auto& p : paths) {
    run.input(p);
    auto records = parse_fasta_file(p);
    std::move(records.begin(), records.end(), std::back_inserter(all));
  }
  return all;
}

void label_records(std::vector<SequenceRecord>& records, const Options& o, Run& run) {
  const auto table = CountryTable::load_file(o.countries);
  if (o.metadata.empty()) return;
  run.input(o.metadata);
  const auto metadata = parse_metadata_file(o.metadata, &table);
  for (auto& r : records)
    if (!attach_metadata(r, metadata)) run.log() << "warning: " << r.accession << " has no metadata row\n";
}

nlohmann::ordered_json histogram_json(const RegionHistogram& h) {
  nlohmann::ordered_json j;
  for (auto r : kAllRegions) j[std::string(region_name(r))] = h[static_cast<std::size_t>(r)];
  return j;
}

// ---------------------------------------------------------------------------

void cmd_ingest(CLI::App* sub, const Options& o, std::ostream& err) {
  Run run(sub, o, err);
  auto records = read_all_fasta(o.inputs, run);
  label_records(records, o, run);
  const auto quality = o.quality.resolve();

  nlohmann::ordered_json j;
  auto& accepted_json = j["accepted"] = nlohmann::ordered_json::array();
  auto& rejected_json = j["rejected"] = nlohmann::ordered_json::array();
  std::vector<SequenceRecord> accepted_records;
  RegionHistogram hist{};
  std::size_t unlabeled = 0;
  for (const auto& r : records) {
    const auto verdict = quality_filter(r, quality);
    nlohmann::ordered_json e;
    e["accession"] = r.accession;
    e["length"] = r.bases.size();
    e["ambiguous_fraction"] = ambiguous_fraction(r.bases);
    if (!accepted(verdict)) {
      e["reason"] = to_string(std::get<Reject>(verdict).reason);
      rejected_json.push_back(e);
      continue;
    }
    if (r.region) {
      e["region"] = region_name(*r.region);
      ++hist[static_cast<std::size_t>(*r.region)];
    } else {
      e["region"] = nullptr;
      ++unlabeled;
    }
    e["location"] = r.location;
    e["date"] = r.collection_date.value_or("");
    accepted_json.push_back(e);
    accepted_records.push_back(r);
  }
  j["counts"] = {{"records", records.size()},
                 {"accepted", accepted_records.size()},
                 {"rejected", records.size() - accepted_records.size()},
                 {"unlabeled", unlabeled}};
  j["region_histogram"] = histogram_json(hist);

  ensure_parent(o.output);
  std::ofstream out(o.output, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + o.output + "' for writing");
  out << j.dump(2) << '\n';
  run.artifact(o.output);
  if (!o.fasta_out.empty()) {
    ensure_parent(o.fasta_out);
    std::ofstream fa(o.fasta_out, std::ios::trunc);
    if (!fa) throw Error(ErrorCode::Io, "cannot open '" + o.fasta_out + "' for writing");
    write_fasta(fa, accepted_records);
    run.artifact(o.fasta_out);
  }
  run.log() << "ingest: " << records.size() << " records, " << accepted_records.size() << " accepted, "
            << unlabeled << " accepted without a region\n";
  run.write_manifest(o.output + ".run.json");
}

void cmd_rasterize(CLI::App* sub, const Options& o, std::ostream& err) {
  Run run(sub, o, err);
  const auto records = read_all_fasta(o.inputs, run);
  const auto geometry = o.geometry.resolve();
  const auto order = disk_fill_order(geometry);
  fs::create_directories(o.output);
  std::vector<std::string> paths(records.size());
  std::vector<std::size_t> truncated(records.size());
  parallel_for(records.size(), o.common.threads, [&](std::size_t i) {
    auto raster = rasterize(records[i].bases, geometry, order);
    paths[i] = (fs::path(o.output) / (safe_file_stem(records[i].accession) + ".png")).string();
    write_png(raster.image, paths[i]);
    truncated[i] = raster.truncated;
  });
  for (const auto& p : paths) run.artifact(p);
  if (const auto over = std::count_if(truncated.begin(), truncated.end(), [](std::size_t t) { return t > 0; }))
    run.log() << "note: " << over << " of " << records.size() << " sequences exceed the motif capacity of "
              << order.size() << " pixels; their tails are not drawn\n";
  run.log() << "rasterize: wrote " << records.size() << " motifs to " << o.output << '\n';
  run.write_manifest((fs::path(o.output) / "run_manifest.json").string());
}

void cmd_filter(CLI::App* sub, const Options& o, std::ostream& err) {
  Run run(sub, o, err);
  const auto params = o.susan.resolve();
  fs::create_directories(o.output);
  std::vector<std::string> outputs(o.inputs.size());
  for (const auto& p : o.inputs) run.input(p);
  parallel_for(o.inputs.size(), o.common.threads, [&](std::size_t i) {
    const auto image = read_png(o.inputs[i]);
    const auto edges = susan_edges(to_grayscale(image), params);
    outputs[i] = (fs::path(o.output) / fs::path(o.inputs[i]).filename()).replace_extension(".png").string();
    if (fs::exists(outputs[i]) && fs::equivalent(outputs[i], o.inputs[i]))
      throw Error(ErrorCode::Usage, "output would overwrite input '" + o.inputs[i] + "'");
    write_png(edges.pixels, outputs[i]);
  });
  for (const auto& p : outputs) run.artifact(p);
  run.log() << "filter: wrote " << outputs.size() << " edge maps to " << o.output << '\n';
  run.write_manifest((fs::path(o.output) / "run_manifest.json").string());
}

void cmd_build_dataset(CLI::App* sub, const Options& o, std::ostream& err) {
  Run run(sub, o, err);
  auto records = read_all_fasta(o.inputs, run);
  label_records(records, o, run);
  const auto quality = o.quality.resolve();
  const auto geometry = o.geometry.resolve();
  const auto susan = o.susan.resolve();

  std::vector<SequenceRecord> accepted_records;
  for (auto& r : records) {
    const auto verdict = quality_filter(r, quality);
    if (accepted(verdict))
      accepted_records.push_back(std::move(r));
    else
      run.log() << "skip " << r.accession << ": " << to_string(std::get<Reject>(verdict).reason) << '\n';
  }
  std::vector<BuildInfo> info;
  auto ds = build_dataset(accepted_records, geometry, susan, o.common.threads, &info);
  std::ostringstream prov;
  prov << "motif " << geometry.width << "x" << geometry.height << " radius " << geometry.max_radius << " fill "
       << to_string(geometry.fill_mode) << "; susan t " << susan.brightness_threshold << " g "
       << susan.geometric_threshold << " " << to_string(susan.output) << "; quality min_length "
       << quality.min_length << " max_ambiguous " << quality.max_ambiguous_fraction;
  ds.provenance = prov.str();
  const auto over = std::count_if(info.begin(), info.end(), [](const BuildInfo& i) { return i.truncated > 0; });
  if (over > 0)
    run.log() << "note: " << over << " of " << info.size() << " sequences exceed the motif capacity of "
              << info.front().capacity << " pixels; their tails are not drawn\n";

  ensure_parent(o.output);
  save_dataset(ds, o.output);
  run.artifact(o.output);
  run.artifact(manifest_path(o.output));
  const auto h = ds.histogram();
  run.log() << "build-dataset: " << ds.size() << " images (";
  for (auto r : kAllRegions)
    run.log() << (r == Region::Asia ? "" : ", ") << region_name(r) << " " << h[static_cast<std::size_t>(r)];
  run.log() << ")\n";
  run.write_manifest(o.output + ".run.json");
}

void write_split(const std::string& path, const SplitIndices& s, std::uint64_t seed, double fraction) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["validation_fraction"] = fraction;
  j["train"] = s.train;
  j["validation"] = s.validation;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
}

SplitIndices read_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    return {j.at("train").get<std::vector<std::size_t>>(), j.at("validation").get<std::vector<std::size_t>>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path + ": " + e.what());
  }
}

TrainConfig train_config(const Options& o) {
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.seed = o.seed;
  cfg.validation_fraction = o.val_fraction;
  cfg.precision = parse_precision(o.precision);
  cfg.output_dir = o.output;
  cfg.validate();
  return cfg;
}

void cmd_train(CLI::App* sub, const Options& o, std::ostream& err) {
  Run run(sub, o, err);
  const auto cfg = train_config(o);
  run.input(o.inputs.front());
  const auto ds = load_dataset(o.inputs.front());
  std::optional<nn::Checkpoint> resume;
  if (!o.resume.empty()) {
    run.input(o.resume);
    resume = nn::read_checkpoint(o.resume);
  }
  const auto spec = spec_for(ds, o.network.resolve());
  spec.validate();

  const auto idx = stratified_split(ds, cfg.validation_fraction, cfg.seed);
  fs::create_directories(o.output);
  const auto split_path = (fs::path(o.output) / "split.json").string();
  write_split(split_path, idx, cfg.seed, cfg.validation_fraction);
  const auto train_set = ds.subset(idx.train);
  const auto val_set = ds.subset(idx.validation);
  run.log() << "train: " << train_set.size() << " training / " << val_set.size() << " validation images, "
            << cfg.epochs << " epochs, precision " << to_string(cfg.precision) << '\n';

  const auto result = train(train_set, val_set, spec, cfg, resume ? &*resume : nullptr, &run.log());
  for (const char* name : {"best.ckpt", "last.ckpt", "history.csv"})
    run.artifact((fs::path(o.output) / name).string());
  run.artifact(split_path);
  if (!result.history.empty())
    run.log() << "train: best validation accuracy " << result.best.state.best_val_accuracy << '\n';
  run.write_manifest((fs::path(o.output) / "run_manifest.json").string());
}

void cmd_evaluate(CLI::App* sub, const Options& o, std::ostream& out, std::ostream& err) {
  Run run(sub, o, err);
  run.input(o.inputs.front());
  run.input(o.checkpoint);
  auto ds = load_dataset(o.inputs.front());
  const auto ckpt = nn::read_checkpoint(o.checkpoint);

  std::string subset = o.subset;
  if (subset == "auto") subset = o.split_file.empty() ? "all" : "validation";
  if (subset != "all") {
    if (o.split_file.empty()) throw Error(ErrorCode::Usage, "--subset " + subset + " needs --split");
    run.input(o.split_file);
    const auto idx = read_split(o.split_file);
    const auto& chosen = subset == "train" ? idx.train : idx.validation;
    for (auto i : chosen)
      if (i >= ds.size()) throw Error(ErrorCode::BadFormat, o.split_file + ": index out of range for the dataset");
    ds = ds.subset(chosen);
  }
  const auto probs = predict_probabilities(ckpt, ds, parse_precision(o.precision), o.batch);
  std::vector<int> truth;
  for (auto r : ds.labels) truth.push_back(static_cast<int>(r));
  std::vector<std::string> names;
  for (auto r : kAllRegions) names.emplace_back(region_name(r));
  const auto report = evaluate_scores(truth, probs, names);

  fs::create_directories(o.output);
  const auto dir = fs::path(o.output);
  {
    std::ofstream f(dir / "metrics.json", std::ios::trunc);
    f << metrics_json(report);
  }
  {
    std::ofstream f(dir / "roc.csv", std::ios::trunc);
    write_roc_csv(f, report);
  }
  const auto table = render_confusion(report);
  {
    std::ofstream f(dir / "confusion.txt", std::ios::trunc);
    f << table;
  }
  for (const char* name : {"metrics.json", "roc.csv", "confusion.txt"}) {
    const auto p = (dir / name).string();
    if (!fs::exists(p)) throw Error(ErrorCode::Io, "failed to write '" + p + "'");
    run.artifact(p);
  }
  out << table;
  run.write_manifest((dir / "run_manifest.json").string());
}

void cmd_predict(CLI::App* sub, const Options& o, std::ostream& out, std::ostream& err) {
  Run run(sub, o, err);
  run.input(o.checkpoint);
  const auto ckpt = nn::read_checkpoint(o.checkpoint);
  const auto records = read_all_fasta(o.inputs, run);
  PredictOptions opts;
  opts.geometry = o.geometry.resolve();
  opts.susan = o.susan.resolve();
  opts.quality = o.quality.resolve();
  opts.precision = parse_precision(o.precision);
  opts.threads = o.common.threads;
  const auto reports = predict(ckpt, records, opts);
  for (const auto& r : reports) {
    if (r.quality_warning)
      err << "warning: " << r.accession << " fails the quality gate (" << to_string(*r.quality_warning)
          << "), predicting anyway\n";
    out << format_line(r) << '\n';
  }
  if (!o.output.empty()) {
    ensure_parent(o.output);
    std::ofstream f(o.output, std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot open '" + o.output + "' for writing");
    write_report_csv(f, reports);
    run.artifact(o.output);
  }
  run.write_manifest(o.output.empty() ? std::string() : o.output + ".run.json");
}

void cmd_report(CLI::App* sub, const Options& o, std::ostream& err) {
  Run run(sub, o, err);
  std::vector<PredictionReport> reports;
  for (const auto& p : o.inputs) {
    run.input(p);
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + p + "'");
    try {
      auto part = read_report_csv(in);
      std::move(part.begin(), part.end(), std::back_inserter(reports));
    } catch (const Error& e) {
      throw Error(e.code(), p + ": " + e.what());
    }
  }
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to aggregate");
  std::optional<Metadata> metadata;
  if (!o.metadata.empty()) {
    run.input(o.metadata);
    const auto table = CountryTable::load_file(o.countries);
    metadata = parse_metadata_file(o.metadata, &table);
  }

  struct Row {
    std::size_t predicted = 0;
    std::array<double, kRegionCount> sums{};
    std::size_t labeled = 0;
    std::size_t correct = 0;
  };
  std::array<Row, kRegionCount> rows{};
  for (const auto& r : reports) {
    auto& row = rows[static_cast<std::size_t>(r.predicted())];
    ++row.predicted;
    for (std::size_t c = 0; c < kRegionCount; ++c) row.sums[c] += r.percentages[c];
    if (metadata) {
      const auto it = metadata->find(r.accession);
      if (it == metadata->end()) continue;
      auto& truth = rows[static_cast<std::size_t>(it->second.region)];
      ++truth.labeled;
      if (it->second.region == r.predicted()) ++truth.correct;
    }
  }

  ensure_parent(o.output);
  std::ofstream f(o.output, std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + o.output + "' for writing");
  f << "region,predicted,share_percent,mean_asia,mean_europe,mean_america,mean_oceania,labeled,correct\n";
  f << std::fixed << std::setprecision(3);
  for (auto region : kAllRegions) {
    const auto& row = rows[static_cast<std::size_t>(region)];
    f << region_name(region) << ',' << row.predicted << ','
      << 100.0 * static_cast<double>(row.predicted) / static_cast<double>(reports.size());
    for (double s : row.sums) f << ',' << (row.predicted ? s / static_cast<double>(row.predicted) : 0.0);
    f << ',' << row.labeled << ',' << row.correct << '\n';
  }
  f.close();
  run.artifact(o.output);
  run.log() << "report: aggregated " << reports.size() << " predictions into " << o.output << '\n';
  run.write_manifest(o.output + ".run.json");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Circular colour motifs of RNA sequences, SUSAN edge maps and a dense CNN region classifier.",
               "genomotif"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", GENOMOTIF_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  Options o;
  std::vector<CLI::App*> subs;
  auto add_sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, o.common);
    subs.push_back(s);
    return s;
  };

  auto* ingest = add_sub("ingest", "Parse FASTA, apply quality gates and attach region labels");
  ingest->add_option("fasta", o.inputs, "FASTA files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--metadata", o.metadata, "CSV with header accession,region,location,date")
      ->check(CLI::ExistingFile);
  add_countries(ingest, o);
  add_quality(ingest, o.quality);
  ingest->add_option("-o,--out", o.output, "Accepted-records manifest (JSON)")->required();
  ingest->add_option("--fasta-out", o.fasta_out, "Also write the accepted records as FASTA");

  auto* raster = add_sub("rasterize", "Write one circular motif PNG per FASTA record");
  raster->add_option("fasta", o.inputs, "FASTA files")->required()->check(CLI::ExistingFile);
  add_geometry(raster, o.geometry);
  raster->add_option("-o,--out-dir", o.output, "Output directory")->required();

  auto* filter = add_sub("filter", "Apply the SUSAN edge filter to motif PNGs");
  filter->add_option("images", o.inputs, "PNG images")->required()->check(CLI::ExistingFile);
  add_susan(filter, o.susan);
  filter->add_option("-o,--out-dir", o.output, "Output directory")->required();

  auto* build = add_sub("build-dataset", "Encode labelled, accepted records into a GMD1 dataset");
  build->add_option("fasta", o.inputs, "FASTA files")->required()->check(CLI::ExistingFile);
  build->add_option("--metadata", o.metadata, "CSV with header accession,region,location,date")
      ->required()
      ->check(CLI::ExistingFile);
  add_countries(build, o);
  add_quality(build, o.quality);
  add_geometry(build, o.geometry);
  add_susan(build, o.susan);
  build->add_option("-o,--out", o.output, "Dataset file (GMD1); a .json sidecar is written next to it")->required();

  auto* train_cmd = add_sub("train", "Train the dense CNN on a GMD1 dataset");
  train_cmd->add_option("dataset", o.inputs, "GMD1 dataset")->required()->expected(1)->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", o.batch, "Mini-batch size")->check(CLI::Range(2, 1 << 16));
  train_cmd->add_option("--lr", o.lr, "RMSProp learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", o.seed, "Seed for initialisation, split, shuffling and dropout");
  train_cmd->add_option("--val-fraction", o.val_fraction, "Stratified validation fraction");
  train_cmd->add_option("--precision", o.precision, "Arithmetic width: 32 or 64")
      ->check(CLI::IsMember({"32", "64"}));
  train_cmd->add_option("--resume", o.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  train_cmd->add_option("--stem-channels", o.network.stem_channels, "Channels of the stem convolution");
  train_cmd->add_option("--blocks", o.network.blocks, "Number of dense blocks")->check(CLI::Range(1, 8));
  train_cmd->add_option("--block-layers", o.network.block_layers, "Layers per dense block")
      ->check(CLI::Range(1, 64));
  train_cmd->add_option("--growth", o.network.growth, "Dense block growth rate")->check(CLI::Range(1, 256));
  train_cmd->add_option("--compression", o.network.compression, "Transition compression factor");
  train_cmd->add_option("--dropout", o.network.dropout, "Dropout rate before the classifier");
  train_cmd->add_option("-o,--out-dir", o.output, "Directory for checkpoints, history and split")->required();

  auto* eval = add_sub("evaluate", "Confusion matrix, precision/recall/F1 and ROC/AUC of a checkpoint");
  eval->add_option("dataset", o.inputs, "GMD1 dataset")->required()->expected(1)->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", o.split_file, "split.json written by train")->check(CLI::ExistingFile);
  eval->add_option("--subset", o.subset, "all, train or validation (auto: validation with --split)")
      ->check(CLI::IsMember({"auto", "all", "train", "validation"}));
  eval->add_option("--precision", o.precision, "Arithmetic width: 32 or 64")->check(CLI::IsMember({"32", "64"}));
  eval->add_option("--batch", o.batch, "Inference batch size")->check(CLI::PositiveNumber);
  eval->add_option("-o,--out-dir", o.output, "Directory for metrics.json, roc.csv, confusion.txt")->required();

  auto* pred = add_sub("predict", "Print per-region percentages for each FASTA record");
  pred->add_option("fasta", o.inputs, "FASTA files")->required()->check(CLI::ExistingFile);
  pred->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  add_quality(pred, o.quality);
  add_geometry(pred, o.geometry);
  add_susan(pred, o.susan);
  pred->add_option("--precision", o.precision, "Arithmetic width: 32 or 64")->check(CLI::IsMember({"32", "64"}));
  pred->add_option("-o,--out", o.output, "Also write predictions as CSV (input for report)");

  auto* report = add_sub("report", "Aggregate prediction CSVs per region");
  report->add_option("predictions", o.inputs, "CSV files written by predict --out")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--metadata", o.metadata, "Optional true labels for agreement counts")
      ->check(CLI::ExistingFile);
  add_countries(report, o);
  report->add_option("-o,--out", o.output, "Aggregate CSV")->required();

  CLI::App* active = nullptr;
  try {
    app.parse(argc, argv);
    for (auto* s : subs)
      if (s->parsed()) active = s;
    if (!o.common.config.empty()) apply_config(active, o.common.config, err);
    if (active->get_option("--threads")->count() == 0) o.common.threads = default_threads();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "genomotif: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto name = active->get_name();
    if (name == "ingest") cmd_ingest(active, o, err);
    else if (name == "rasterize") cmd_rasterize(active, o, err);
    else if (name == "filter") cmd_filter(active, o, err);
    else if (name == "build-dataset") cmd_build_dataset(active, o, err);
    else if (name == "train") cmd_train(active, o, err);
    else if (name == "evaluate") cmd_evaluate(active, o, out, err);
    else if (name == "predict") cmd_predict(active, o, out, err);
    else if (name == "report") cmd_report(active, o, err);
  } catch (const Error& e) {
    err << "genomotif " << active->get_name() << ": " << e.what() << '\n';
    return e.code() == ErrorCode::Usage ? 1 : 2;
  } catch (const std::exception& e) {
    err << "genomotif " << active->get_name() << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace genomotif::cli
