#pragma once

#include "mlcd/methods.hpp"
#include "mlcd/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mlcd {

enum class SweepAxis { avg_degree, layer_count, uninformative_layers, uninformative_density };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view sweep_axis_name(SweepAxis axis);

// Scenario ids: strong, mixed, complementary, layers, hetero (sampled block
// models) and robust_layers, robust_density (population tensors with rank-one
// uninformative layers appended to `informative_layers` informative ones).
struct ScenarioConfig {
  std::string scenario = "strong";
  int n = 300;
  int k = 3;
  int num_layers = 5;
  double avg_degree = 10.0;
  bool population = false;
  SweepAxis axis = SweepAxis::avg_degree;
  std::vector<double> sweep;
  int replications = 10;
  std::uint64_t seed = 1;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  EigenOrder mode = EigenOrder::algebraic;
  double gamma_multiplier = 4.0;
  int kmeans_restarts = 20;
  int informative_layers = 3;
  int uninformative_layers = 2;
  double uninformative_density = 0.1;
  bool record_runtime = true;

  // Throws std::invalid_argument describing the first violated rule.
  void validate() const;
};

// Parses and validates a JSON config; unknown keys are rejected.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ScenarioConfig& cfg);

struct ResultRow {
  std::string scenario;
  int rep = 0;
  double sweep = 0.0;
  Method method = Method::olmf;
  double nmi = 0.0;
  double miscluster = 0.0;
  double runtime_ms = 0.0;
  bool converged = true;
  double objective = 0.0;
};

struct ScenarioResult {
  std::vector<ResultRow> rows;  // ordered by sweep index, then rep, then method
};

// Layers and ground truth for one (sweep value, replication).
struct ScenarioInstance {
  std::vector<Matrix> layers;
  Partition truth;
};

ScenarioInstance scenario_instance(const ScenarioConfig& cfg, std::size_t sweep_index, int rep);

// threads <= 0 uses the hardware concurrency. Output does not depend on it.
ScenarioResult run_scenario(const ScenarioConfig& cfg, int threads = 1);

inline constexpr std::string_view kCsvHeader =
    "scenario,rep,sweep,method,nmi,miscluster,runtime_ms,converged,objective";

void write_csv(std::ostream& out, const ScenarioResult& result);
std::string to_csv(const ScenarioResult& result);

struct SweepSummary {
  std::vector<double> sweep;
  std::map<Method, std::vector<double>> mean_nmi;
  std::map<Method, std::vector<double>> mean_miscluster;
};

SweepSummary summarize(const ScenarioResult& result);

// Line chart of mean NMI per method against the sweep value.
void write_svg(std::ostream& out, const ScenarioResult& result, std::string_view title);

}  // namespace mlcd
