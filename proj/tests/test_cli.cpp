#include "doctest.h"

#include "cli.hpp"
#include "mlcd/graph.hpp"
#include "mlcd/harness.hpp"
#include "mlcd/metrics.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mlcd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mlcd_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

Partition read_labels_file(const fs::path& p) {
  std::ifstream in(p);
  return read_labels(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(call({}).code == cli::kUsageError);
  CHECK(call({"transmogrify"}).code == cli::kUsageError);
  CHECK(call({"detect", "--k", "3"}).code == cli::kUsageError);
  CHECK(call({"generate", "--out", scratch("x").string(), "--scenario", "galaxy"}).code == cli::kUsageError);
  const auto r = call({"simulate", "--config", "/nonexistent/config.json"});
  CHECK(r.code == cli::kUsageError);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("help exits with 0") {
  const auto r = call({"--help"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("simulate") != std::string::npos);
}

TEST_CASE("generate then detect recovers a strong instance") {
  const fs::path prefix = scratch("strong");
  const auto gen = call({"generate", "--scenario", "strong", "--n", "300", "--k", "3", "--layers", "5", "--degree", "15",
                         "--seed", "21", "--out", prefix.string()});
  REQUIRE(gen.code == cli::kOk);
  const fs::path edges = prefix.string() + ".edges", truth = prefix.string() + ".labels";
  REQUIRE(fs::exists(edges));
  const auto g = read_edge_list_file(edges);
  CHECK(g.num_nodes() == 300);
  CHECK(g.num_layers() == 5);

  const fs::path labels = scratch("strong.detected");
  const auto det = call({"detect", "--input", edges.string(), "--method", "mean_adj", "--k", "3", "--seed", "4",
                         "--out", labels.string(), "--truth", truth.string()});
  REQUIRE(det.code == cli::kOk);
  CHECK(det.out.find("nmi=") != std::string::npos);
  const Partition est = read_labels_file(labels);
  CHECK(est.size() == 300);
  CHECK(nmi(read_labels_file(truth), est) > 0.9);

  const auto again = call({"generate", "--scenario", "strong", "--n", "300", "--k", "3", "--layers", "5", "--degree",
                           "15", "--seed", "21", "--out", scratch("strong2").string()});
  REQUIRE(again.code == cli::kOk);
  CHECK(slurp(edges) == slurp(scratch("strong2").string() + ".edges"));
}

TEST_CASE("detect runtime errors") {
  const fs::path bad = scratch("bad.edges");
  std::ofstream(bad) << "3 1\n0 1 1\n";
  const auto r = call({"detect", "--input", bad.string(), "--k", "2", "--out", scratch("bad.labels").string()});
  CHECK(r.code == cli::kRuntimeError);
  CHECK(r.err.find("line 2") != std::string::npos);

  const fs::path ok = scratch("ok.edges");
  std::ofstream(ok) << "3 1\n0 0 1\n";
  const auto too_many = call({"detect", "--input", ok.string(), "--k", "5", "--out", scratch("ok.labels").string()});
  CHECK(too_many.code != cli::kOk);
  const auto unwritable = call({"detect", "--input", ok.string(), "--k", "2", "--method", "mean_adj", "--out",
                                "/nonexistent/dir/labels"});
  CHECK(unwritable.code == cli::kRuntimeError);
}

TEST_CASE("simulate with the shipped hetero config") {
  const fs::path csv = scratch("hetero.csv"), svg = scratch("hetero.svg");
  const auto r = call({"simulate", "--config", MLCD_CONFIG_DIR "/hetero.json", "--out", csv.string(), "--svg",
                       svg.string(), "--no-timing", "--threads", "0"});
  REQUIRE(r.code == cli::kOk);
  const auto cfg = load_config(MLCD_CONFIG_DIR "/hetero.json");
  const std::string text = slurp(csv);
  const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  CHECK(lines == 1 + cfg.sweep.size() * static_cast<std::size_t>(cfg.replications) * cfg.methods.size());
  CHECK(text.rfind(std::string(kCsvHeader), 0) == 0);
  CHECK(slurp(svg).find("<svg") != std::string::npos);
}

TEST_CASE("simulate to stdout with a seed override is deterministic") {
  const fs::path cfg = scratch("tiny.json");
  std::ofstream(cfg) << R"({"scenario": "mixed", "n": 45, "k": 3, "layers": 5, "replications": 2,
    "methods": ["mean_adj", "module_allegiance"], "sweep": {"axis": "avg_degree", "values": [8]}})";
  const auto a = call({"simulate", "--config", cfg.string(), "--seed", "9", "--no-timing", "--threads", "1"});
  const auto b = call({"simulate", "--config", cfg.string(), "--seed", "9", "--no-timing", "--threads", "2"});
  const auto c = call({"simulate", "--config", cfg.string(), "--seed", "10", "--no-timing"});
  REQUIRE(a.code == cli::kOk);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 1 + 2 * 2);
}

TEST_CASE("verify prints a report") {
  const auto r = call({"verify", "--n", "120", "--k", "3", "--layers", "4", "--degree", "15", "--reps", "5"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("mean_deviation: bound=") != std::string::npos);
  CHECK(r.out.find("miscluster_bound:") != std::string::npos);
  CHECK(call({"verify", "--n", "100", "--k", "3"}).code == cli::kUsageError);
}
