#include "doctest.h"

#include "mlcd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <sstream>

using namespace mlcd;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small_config() {
  return parse_config(R"({
    "scenario": "strong", "n": 60, "k": 3, "layers": 3,
    "sweep": {"axis": "avg_degree", "values": [6, 12]},
    "replications": 3, "seed": 5, "record_runtime": false,
    "methods": ["mean_adj", "spectral_kernel", "module_allegiance", "olmf"]
  })");
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("every shipped config validates") {
  int count = 0;
  for (const char* dir : {MLCD_CONFIG_DIR, MLCD_CONFIG_DIR "/full"}) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_config(entry.path()));
      ++count;
    }
  }
  CHECK(count == 14);
}

TEST_CASE("config parsing") {
  const auto c = small_config();
  CHECK(c.n == 60);
  CHECK(c.num_layers == 3);
  CHECK(c.sweep == std::vector<double>{6, 12});
  CHECK(c.methods.size() == 4);
  CHECK(c.mode == EigenOrder::algebraic);
  CHECK(c.gamma_multiplier == 4.0);

  const auto round = parse_config(config_to_json(c));
  CHECK(round.n == c.n);
  CHECK(round.sweep == c.sweep);
  CHECK(round.methods == c.methods);
  CHECK(round.seed == c.seed);
  CHECK(round.record_runtime == c.record_runtime);

  auto bad = [](std::string_view text) {
    try {
      parse_config(text);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what()).rfind("config: ", 0) == 0 || std::string(e.what()).find("unknown") != std::string::npos;
    }
    return false;
  };
  CHECK(bad(R"({"scenario": "strong", "sweep": {"axis": "avg_degree", "values": [6]}, "colour": 1})"));
  CHECK(bad(R"({"scenario": "strong"})"));
  CHECK(bad(R"({"scenario": "strong", "sweep": {"axis": "layer_count", "values": [3]}})"));
  CHECK(bad(R"({"scenario": "strong", "sweep": {"axis": "avg_degree", "values": []}})"));
  CHECK(bad(R"({"scenario": "strong", "n": "big", "sweep": {"axis": "avg_degree", "values": [6]}})"));
  CHECK(bad(R"({"scenario": "strong", "replications": 0, "sweep": {"axis": "avg_degree", "values": [6]}})"));
  CHECK(bad(R"({"scenario": "layers", "sweep": {"axis": "layer_count", "values": [4]}})"));
  CHECK(bad(R"({"scenario": "strong", "methods": ["olmf", "olmf"], "sweep": {"axis": "avg_degree", "values": [6]}})"));
  CHECK(bad(R"([1, 2])"));
  CHECK(bad(R"({"scenario": )"));
  CHECK_THROWS_AS(parse_config(R"({"scenario": "galaxy", "sweep": {"axis": "avg_degree", "values": [6]}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "strong", "methods": ["louvain"], "sweep": {"axis": "avg_degree", "values": [6]}})"),
                  std::invalid_argument);
}

TEST_CASE("sweep axis names") {
  for (auto a : {SweepAxis::avg_degree, SweepAxis::layer_count, SweepAxis::uninformative_layers,
                 SweepAxis::uninformative_density})
    CHECK(parse_sweep_axis(sweep_axis_name(a)) == a);
  CHECK_THROWS_AS(parse_sweep_axis("time"), std::invalid_argument);
}

TEST_CASE("run_scenario rows, ranges and ordering") {
  const auto cfg = small_config();
  const auto result = run_scenario(cfg, 1);
  REQUIRE(result.rows.size() == 2u * 3u * 4u);
  std::size_t i = 0;
  for (double sweep : cfg.sweep)
    for (int rep = 0; rep < 3; ++rep)
      for (Method m : cfg.methods) {
        const auto& row = result.rows[i++];
        CHECK(row.sweep == sweep);
        CHECK(row.rep == rep);
        CHECK(row.method == m);
        CHECK(row.scenario == "strong");
        CHECK(row.nmi >= 0.0);
        CHECK(row.nmi <= 1.0);
        CHECK(row.miscluster >= 0.0);
        CHECK(row.miscluster <= 1.0);
        CHECK(row.runtime_ms == 0.0);
      }
}

TEST_CASE("CSV is byte-identical across thread counts") {
  const auto cfg = small_config();
  const std::string one = to_csv(run_scenario(cfg, 1));
  const std::string three = to_csv(run_scenario(cfg, 3));
  CHECK(one == three);
  CHECK(one.substr(0, kCsvHeader.size()) == kCsvHeader);
  CHECK(std::count(one.begin(), one.end(), '\n') == 1 + 24);
}

TEST_CASE("seed changes the output") {
  auto cfg = small_config();
  const std::string a = to_csv(run_scenario(cfg));
  cfg.seed = 6;
  CHECK(to_csv(run_scenario(cfg)) != a);
}

TEST_CASE("summary and SVG") {
  const auto result = run_scenario(small_config());
  const auto s = summarize(result);
  CHECK(s.sweep == std::vector<double>{6, 12});
  for (const auto& [method, means] : s.mean_nmi) {
    REQUIRE(means.size() == 2);
    double direct = 0.0;
    int count = 0;
    for (const auto& row : result.rows)
      if (row.method == method && row.sweep == 6) {
        direct += row.nmi;
        ++count;
      }
    CHECK(means[0] == doctest::Approx(direct / count));
  }
  std::ostringstream svg;
  write_svg(svg, result, "strong");
  const std::string text = svg.str();
  CHECK(text.find("<svg") != std::string::npos);
  std::size_t lines = 0;
  for (std::size_t pos = text.find("<polyline"); pos != std::string::npos; pos = text.find("<polyline", pos + 1)) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("robustness instances") {
  auto cfg = parse_config(R"({
    "scenario": "robust_layers", "n": 60, "k": 3, "population": true,
    "informative_layers": 3, "uninformative_density": 0.2,
    "sweep": {"axis": "uninformative_layers", "values": [0, 2, 4]}, "seed": 3
  })");
  for (std::size_t si = 0; si < 3; ++si) {
    const auto inst = scenario_instance(cfg, si, 0);
    CHECK(inst.layers.size() == 3 + 2 * si);
    for (std::size_t m = 3; m < inst.layers.size(); ++m) CHECK((inst.layers[m].array() == 0.2).all());
    // Informative layers do not depend on the sweep point.
    CHECK(inst.layers[0] == scenario_instance(cfg, 0, 0).layers[0]);
  }
  CHECK(scenario_instance(cfg, 1, 0).layers[0] != scenario_instance(cfg, 1, 1).layers[0]);
}

TEST_CASE("sampled instances share the model across sweep points") {
  const auto cfg = small_config();
  const auto a = scenario_instance(cfg, 0, 1);
  const auto b = scenario_instance(cfg, 1, 1);
  CHECK(a.truth == b.truth);
  CHECK(a.layers[0] != b.layers[0]);
  CHECK(scenario_instance(cfg, 0, 1).layers[0] == a.layers[0]);
}

TEST_CASE("strong scenario: mean NMI rises with degree for every method") {
  const auto cfg = parse_config(R"({
    "scenario": "strong", "n": 300, "k": 3, "layers": 5,
    "sweep": {"axis": "avg_degree", "values": [6, 7, 8, 9, 10, 11, 12, 13, 14, 15]},
    "replications": 10, "seed": 11, "record_runtime": false
  })");
  const auto s = summarize(run_scenario(cfg, 0));
  for (const auto& [method, means] : s.mean_nmi) {
    CAPTURE(method_name(method));
    CHECK(spearman(s.sweep, means) > 0.0);
  }
}

TEST_CASE("hetero scenario: mean adjacency is the weakest method at degree 32") {
  const auto cfg = parse_config(R"({
    "scenario": "hetero", "n": 300, "k": 3, "layers": 5, "mode": "absolute",
    "sweep": {"axis": "avg_degree", "values": [32]},
    "replications": 5, "seed": 15, "record_runtime": false
  })");
  const auto s = summarize(run_scenario(cfg, 0));
  const double mean_adj = s.mean_nmi.at(Method::mean_adj)[0];
  for (const auto& [method, means] : s.mean_nmi) {
    CAPTURE(method_name(method));
    if (method != Method::mean_adj) CHECK(means[0] > mean_adj);
  }
}
