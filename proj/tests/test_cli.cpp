#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "genomotif/cli.hpp"
#include "genomotif/errors.hpp"
#include "genomotif/synthetic.hpp"
#include "test_util.hpp"

using namespace genomotif;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "genomotif");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Short synthetic sequences keep every command fast; quality and geometry flags are
// relaxed to match.
struct Corpus {
  testing::TempDir dir{"cli"};
  std::string fasta = dir.file("seqs.fasta");
  std::string metadata = dir.file("meta.csv");

  explicit Corpus(int per_region = 4) {
    SyntheticOptions opt;
    opt.per_region = per_region;
    opt.min_length = 300;
    opt.max_length = 400;
    const auto records = synthetic_corpus(opt);
    std::ostringstream fa;
    write_fasta(fa, records);
    testing::spit(fasta, fa.str());
    testing::spit(metadata, synthetic_metadata_csv(records));
  }

  std::vector<std::string> build_args(const std::string& out) const {
    return {"build-dataset", fasta, "--metadata", metadata, "--min-length", "100", "--size", "24", "-q", "-o", out};
  }
};

}  // namespace

TEST_CASE("cli: usage errors exit 1, help exits 0 and lists defaults") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"train"}).code == 1);
  CHECK(invoke({"train", "x.gmd1", "--epochs", "-3", "-o", "out"}).code == 1);

  const auto help = invoke({"train", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("75") != std::string::npos);
  CHECK(help.out.find("0.001") != std::string::npos);
  CHECK(help.out.find("GENOMOTIF_THREADS") != std::string::npos);
  const auto build_help = invoke({"build-dataset", "--help"});
  CHECK(build_help.out.find("200") != std::string::npos);
  CHECK(build_help.out.find("29000") != std::string::npos);
  CHECK(build_help.out.find("27") != std::string::npos);
}

TEST_CASE("cli: malformed data exits 2") {
  testing::TempDir dir("cli_bad");
  testing::spit(dir.file("bad.fasta"), "ACGT\n>x\nACGT\n");
  CHECK(invoke({"rasterize", dir.file("bad.fasta"), "-q", "-o", dir.file("out")}).code == 2);
  testing::spit(dir.file("bad.gmd1"), "not a dataset");
  CHECK(invoke({"train", dir.file("bad.gmd1"), "-q", "-o", dir.file("t")}).code == 2);
}

TEST_CASE("cli: config file fills options, flags override it") {
  const auto kv = [] {
    std::istringstream in("# comment\nepochs = 3\nval_fraction=0.5 # trailing\n\n");
    return cli::parse_config(in);
  }();
  CHECK(kv.at("epochs") == "3");
  CHECK(kv.at("val-fraction") == "0.5");
  std::istringstream bad("epochs 3\n");
  CHECK(testing::error_code([&] { cli::parse_config(bad); }) == ErrorCode::Usage);

  Corpus c;
  const auto ds = c.dir.file("d.gmd1");
  REQUIRE(invoke(c.build_args(ds)).code == 0);
  testing::spit(c.dir.file("run.cfg"), "epochs = 2\nbatch = 4\nstem-channels = 4\ngrowth = 4\nblock_layers = 1\n");

  const auto from_config = c.dir.file("a");
  REQUIRE(invoke({"train", ds, "--config", c.dir.file("run.cfg"), "-q", "-o", from_config}).code == 0);
  const auto manifest = nlohmann::json::parse(testing::slurp(from_config + "/run_manifest.json"));
  CHECK(manifest["config"]["epochs"] == "2");
  CHECK(manifest["config"]["batch"] == "4");
  CHECK(manifest["config"]["lr"] == "0.001");

  const auto flag_wins = c.dir.file("b");
  REQUIRE(invoke({"train", ds, "--config", c.dir.file("run.cfg"), "--epochs", "1", "-q", "-o", flag_wins}).code == 0);
  const auto m2 = nlohmann::json::parse(testing::slurp(flag_wins + "/run_manifest.json"));
  CHECK(m2["config"]["epochs"] == "1");

  testing::spit(c.dir.file("broken.cfg"), "epochs\n");
  CHECK(invoke({"train", ds, "--config", c.dir.file("broken.cfg"), "-o", c.dir.file("c")}).code == 1);
  CHECK(invoke({"train", ds, "--config", c.dir.file("missing.cfg"), "-o", c.dir.file("c")}).code == 1);
}

TEST_CASE("cli: thread count from flag, environment, default") {
  Corpus c(1);
  const auto read_threads = [&](const std::string& out) {
    return nlohmann::json::parse(testing::slurp(out + "/run_manifest.json"))["config"]["threads"].get<std::string>();
  };
  ::unsetenv("GENOMOTIF_THREADS");
  CHECK(cli::default_threads() == 1);
  REQUIRE(invoke({"rasterize", c.fasta, "--size", "24", "-q", "-o", c.dir.file("r1")}).code == 0);
  CHECK(read_threads(c.dir.file("r1")) == "1");

  ::setenv("GENOMOTIF_THREADS", "3", 1);
  CHECK(cli::default_threads() == 3);
  REQUIRE(invoke({"rasterize", c.fasta, "--size", "24", "-q", "-o", c.dir.file("r2")}).code == 0);
  CHECK(read_threads(c.dir.file("r2")) == "3");
  REQUIRE(invoke({"rasterize", c.fasta, "--size", "24", "--threads", "2", "-q", "-o", c.dir.file("r3")}).code == 0);
  CHECK(read_threads(c.dir.file("r3")) == "2");

  ::setenv("GENOMOTIF_THREADS", "many", 1);
  CHECK(invoke({"rasterize", c.fasta, "-q", "-o", c.dir.file("r4")}).code == 1);
  ::unsetenv("GENOMOTIF_THREADS");
}

TEST_CASE("cli: full pipeline is idempotent and manifests carry no timestamps") {
  Corpus c;
  const auto run_all = [&](const std::string& tag) {
    const auto base = c.dir.file(tag);
    const auto ds = base + "/d.gmd1";
    REQUIRE(invoke(c.build_args(ds)).code == 0);
    REQUIRE(invoke({"train", ds, "--epochs", "3", "--batch", "4", "--stem-channels", "4", "--growth", "4",
                    "--block-layers", "1", "-q", "-o", base + "/train"})
                .code == 0);
    const auto eval = invoke({"evaluate", ds, "--checkpoint", base + "/train/best.ckpt", "--split",
                              base + "/train/split.json", "-q", "-o", base + "/eval"});
    REQUIRE(eval.code == 0);
    CHECK(eval.out.find("Asia") != std::string::npos);
    const auto pred = invoke({"predict", c.fasta, "--checkpoint", base + "/train/last.ckpt", "--size", "24",
                              "--min-length", "100", "-q", "-o", base + "/pred.csv"});
    REQUIRE(pred.code == 0);
    CHECK(pred.out.find("\tASIA: ") != std::string::npos);
    REQUIRE(invoke({"report", base + "/pred.csv", "--metadata", c.metadata, "-q", "-o", base + "/report.csv"})
                .code == 0);
    return base;
  };
  const auto a = run_all("one");
  const auto b = run_all("two");

  const auto history = testing::slurp(a + "/train/history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') == 4);

  for (const char* rel : {"/d.gmd1", "/d.gmd1.json", "/train/best.ckpt", "/train/last.ckpt", "/train/history.csv",
                          "/train/split.json", "/eval/metrics.json", "/eval/roc.csv", "/eval/confusion.txt",
                          "/pred.csv", "/report.csv"}) {
    CAPTURE(rel);
    REQUIRE(fs::exists(a + rel));
    CHECK(testing::slurp(a + rel) == testing::slurp(b + rel));
  }

  for (const char* rel : {"/d.gmd1.run.json", "/train/run_manifest.json", "/eval/run_manifest.json",
                          "/pred.csv.run.json", "/report.csv.run.json"}) {
    CAPTURE(rel);
    const auto text = testing::slurp(a + rel);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["tool"] == "genomotif");
    CHECK(j["inputs"].size() >= 1);
    CHECK(j["inputs"][0]["sha256"].get<std::string>().size() == 64);
    for (const char* word : {"time", "date\"", "created", "timestamp"}) CHECK(text.find(word) == std::string::npos);
  }

  const auto rerun = invoke({"train", a + "/d.gmd1", "--epochs", "3", "--batch", "4", "--stem-channels", "4",
                             "--growth", "4", "--block-layers", "1", "-q", "-o", a + "/train"});
  CHECK(rerun.code == 0);
  CHECK(testing::slurp(a + "/train/last.ckpt") == testing::slurp(b + "/train/last.ckpt"));
}

TEST_CASE("cli: train --epochs N writes N history rows; resume continues the count") {
  Corpus c;
  const auto ds = c.dir.file("d.gmd1");
  REQUIRE(invoke(c.build_args(ds)).code == 0);
  const std::vector<std::string> net{"--batch", "4", "--stem-channels", "4", "--growth", "4", "--block-layers", "1",
                                     "-q"};
  auto args = std::vector<std::string>{"train", ds, "--epochs", "2", "-o", c.dir.file("t")};
  args.insert(args.end(), net.begin(), net.end());
  REQUIRE(invoke(args).code == 0);
  auto h = testing::slurp(c.dir.file("t/history.csv"));
  CHECK(std::count(h.begin(), h.end(), '\n') == 3);

  args = {"train", ds, "--epochs", "4", "--resume", c.dir.file("t/last.ckpt"), "-o", c.dir.file("t")};
  args.insert(args.end(), net.begin(), net.end());
  REQUIRE(invoke(args).code == 0);
  h = testing::slurp(c.dir.file("t/history.csv"));
  CHECK(std::count(h.begin(), h.end(), '\n') == 5);
}
