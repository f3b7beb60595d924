#include "mlcd/harness.hpp"

#include "mlcd/errors.hpp"
#include "mlcd/metrics.hpp"
#include "mlcd/mlsbm.hpp"
#include "mlcd/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mlcd {

using nlohmann::json;

namespace {

constexpr std::string_view kRobustLayers = "robust_layers";
constexpr std::string_view kRobustDensity = "robust_density";

bool is_robust(std::string_view s) { return s == kRobustLayers || s == kRobustDensity; }

SweepAxis expected_axis(std::string_view scenario) {
  if (scenario == kRobustLayers) return SweepAxis::uninformative_layers;
  if (scenario == kRobustDensity) return SweepAxis::uninformative_density;
  if (parse_scenario(scenario) == Scenario::layers) return SweepAxis::layer_count;
  return SweepAxis::avg_degree;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config: field '") + key + "' has the wrong type");
  }
}

}  // namespace

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "avg_degree") return SweepAxis::avg_degree;
  if (name == "layer_count") return SweepAxis::layer_count;
  if (name == "uninformative_layers") return SweepAxis::uninformative_layers;
  if (name == "uninformative_density") return SweepAxis::uninformative_density;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

std::string_view sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::avg_degree: return "avg_degree";
    case SweepAxis::layer_count: return "layer_count";
    case SweepAxis::uninformative_layers: return "uninformative_layers";
    case SweepAxis::uninformative_density: return "uninformative_density";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  const SweepAxis want = expected_axis(scenario);  // throws on unknown scenario
  if (axis != want)
    throw std::invalid_argument("config: scenario '" + scenario + "' sweeps " + std::string(sweep_axis_name(want)));
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (n < k) throw std::invalid_argument("config: n must be >= k");
  if (num_layers < 1) throw std::invalid_argument("config: layers must be >= 1");
  if (!(avg_degree > 0.0)) throw std::invalid_argument("config: avg_degree must be positive");
  if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (sweep.empty()) throw std::invalid_argument("config: sweep must be nonempty");
  if (methods.empty()) throw std::invalid_argument("config: methods must be nonempty");
  if (!(gamma_multiplier > 0.0)) throw std::invalid_argument("config: gamma_multiplier must be positive");
  if (kmeans_restarts < 1) throw std::invalid_argument("config: kmeans_restarts must be >= 1");
  if (informative_layers < 1) throw std::invalid_argument("config: informative_layers must be >= 1");
  if (uninformative_layers < 0) throw std::invalid_argument("config: uninformative_layers must be >= 0");
  if (!(uninformative_density > 0.0 && uninformative_density <= 1.0))
    throw std::invalid_argument("config: uninformative_density must lie in (0, 1]");
  for (double v : sweep) {
    switch (axis) {
      case SweepAxis::avg_degree:
        if (!(v > 0.0)) throw std::invalid_argument("config: sweep degrees must be positive");
        break;
      case SweepAxis::layer_count:
        if (v < 3 || v != std::floor(v) || static_cast<long>(v) % 3 != 0)
          throw std::invalid_argument("config: layer counts must be positive multiples of 3");
        break;
      case SweepAxis::uninformative_layers:
        if (v < 0 || v != std::floor(v)) throw std::invalid_argument("config: layer counts must be integers >= 0");
        break;
      case SweepAxis::uninformative_density:
        if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("config: densities must lie in (0, 1]");
        break;
    }
  }
  if (!is_robust(scenario)) {
    const Scenario s = parse_scenario(scenario);
    if (s == Scenario::complementary && (num_layers < 3 || k < 2))
      throw std::invalid_argument("config: complementary needs layers >= 3 and k >= 2");
  }
}

ScenarioConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  static const std::set<std::string> known = {
      "scenario",    "n",           "k",
      "layers",      "avg_degree",  "population",
      "sweep",       "replications", "seed",
      "methods",     "mode",        "gamma_multiplier",
      "kmeans_restarts", "informative_layers", "uninformative_layers",
      "uninformative_density", "record_runtime", "description"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw std::invalid_argument("config: unknown field '" + key + "'");
  for (const char* req : {"scenario", "sweep"})
    if (!j.contains(req)) throw std::invalid_argument(std::string("config: missing field '") + req + "'");

  ScenarioConfig c;
  c.scenario = get_field<std::string>(j, "scenario");
  if (j.contains("n")) c.n = get_field<int>(j, "n");
  if (j.contains("k")) c.k = get_field<int>(j, "k");
  if (j.contains("layers")) c.num_layers = get_field<int>(j, "layers");
  if (j.contains("avg_degree")) c.avg_degree = get_field<double>(j, "avg_degree");
  if (j.contains("population")) c.population = get_field<bool>(j, "population");
  if (j.contains("replications")) c.replications = get_field<int>(j, "replications");
  if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("mode")) c.mode = parse_mode(get_field<std::string>(j, "mode"));
  if (j.contains("gamma_multiplier")) c.gamma_multiplier = get_field<double>(j, "gamma_multiplier");
  if (j.contains("kmeans_restarts")) c.kmeans_restarts = get_field<int>(j, "kmeans_restarts");
  if (j.contains("informative_layers")) c.informative_layers = get_field<int>(j, "informative_layers");
  if (j.contains("uninformative_layers")) c.uninformative_layers = get_field<int>(j, "uninformative_layers");
  if (j.contains("uninformative_density")) c.uninformative_density = get_field<double>(j, "uninformative_density");
  if (j.contains("record_runtime")) c.record_runtime = get_field<bool>(j, "record_runtime");
  if (j.contains("description")) (void)get_field<std::string>(j, "description");

  const json& sw = j.at("sweep");
  if (!sw.is_object() || !sw.contains("axis") || !sw.contains("values") || sw.size() != 2)
    throw std::invalid_argument("config: sweep must be {\"axis\": ..., \"values\": [...]}");
  c.axis = parse_sweep_axis(get_field<std::string>(sw, "axis"));
  c.sweep = get_field<std::vector<double>>(sw, "values");

  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : get_field<std::vector<std::string>>(j, "methods")) {
      const Method m = parse_method(name);
      if (std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end())
        throw std::invalid_argument("config: duplicate method '" + name + "'");
      c.methods.push_back(m);
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["n"] = c.n;
  j["k"] = c.k;
  j["layers"] = c.num_layers;
  j["avg_degree"] = c.avg_degree;
  j["population"] = c.population;
  j["sweep"] = {{"axis", std::string(sweep_axis_name(c.axis))}, {"values", c.sweep}};
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  std::vector<std::string> names;
  for (Method m : c.methods) names.emplace_back(method_name(m));
  j["methods"] = names;
  j["mode"] = std::string(mode_name(c.mode));
  j["gamma_multiplier"] = c.gamma_multiplier;
  j["kmeans_restarts"] = c.kmeans_restarts;
  j["informative_layers"] = c.informative_layers;
  j["uninformative_layers"] = c.uninformative_layers;
  j["uninformative_density"] = c.uninformative_density;
  j["record_runtime"] = c.record_runtime;
  return j.dump(2);
}

namespace {

// Informative layers: random full-rank blocks with diagonal boost in [2, 3],
// scaled to the target degree, as population matrices.
BlockModel robust_informative_model(const ScenarioConfig& cfg, std::uint64_t seed) {
  Partition z = multinomial_assignments(cfg.n, cfg.k, derive_seed(seed, 1));
  Rng rng(derive_seed(seed, 2));
  std::vector<Matrix> blocks;
  std::vector<double> rho(static_cast<std::size_t>(cfg.k));
  for (int m = 0; m < cfg.informative_layers; ++m) {
    for (double& r : rho) r = rng.uniform(kStrongSnrLo, kStrongSnrHi);
    blocks.push_back(random_blocks(cfg.k, kBandLo, kBandHi, rho, rng));
  }
  return scale_to_average_degree(BlockModel(std::move(z), std::move(blocks)), cfg.avg_degree);
}

}  // namespace

ScenarioInstance scenario_instance(const ScenarioConfig& cfg, std::size_t sweep_index, int rep) {
  if (sweep_index >= cfg.sweep.size()) throw std::out_of_range("sweep index out of range");
  const double value = cfg.sweep[sweep_index];
  const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  const std::uint64_t model_seed = derive_seed(rep_seed, 0);
  const std::uint64_t sample_seed = derive_seed(derive_seed(rep_seed, 1), sweep_index);

  if (is_robust(cfg.scenario)) {
    const BlockModel model = robust_informative_model(cfg, model_seed);
    ScenarioInstance inst{population_tensor(model).layers, model.membership()};
    int extra = cfg.uninformative_layers;
    double density = cfg.uninformative_density;
    if (cfg.axis == SweepAxis::uninformative_layers) extra = static_cast<int>(value);
    else density = value;
    for (int i = 0; i < extra; ++i) inst.layers.push_back(Matrix::Constant(cfg.n, cfg.n, density));
    return inst;
  }

  ScenarioShape shape;
  shape.n = cfg.n;
  shape.k = cfg.k;
  shape.num_layers = cfg.num_layers;
  shape.avg_degree = cfg.avg_degree;
  const BlockModel model = scenario_blocks(parse_scenario(cfg.scenario), shape, value, model_seed);
  if (cfg.population) return {population_tensor(model).layers, model.membership()};
  MultiLayerGraph g = sample(model, sample_seed);
  return {std::vector<Matrix>(g.layers().begin(), g.layers().end()), model.membership()};
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t num_sweep = cfg.sweep.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t jobs = num_sweep * reps;
  std::vector<std::vector<ResultRow>> slots(jobs);

  MethodOptions base;
  base.mode = cfg.mode;
  base.gamma_multiplier = cfg.gamma_multiplier;
  base.kmeans.restarts = cfg.kmeans_restarts;

  auto run_job = [&](std::size_t job) {
    const std::size_t si = job / reps;
    const int rep = static_cast<int>(job % reps);
    const ScenarioInstance inst = scenario_instance(cfg, si, rep);
    MethodOptions opts = base;
    opts.seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)), 2);
    for (Method method : cfg.methods) {
      const auto t0 = std::chrono::steady_clock::now();
      const MethodResult res = run_method(method, inst.layers, cfg.k, opts);
      const auto t1 = std::chrono::steady_clock::now();
      ResultRow row;
      row.scenario = cfg.scenario;
      row.rep = rep;
      row.sweep = cfg.sweep[si];
      row.method = method;
      row.nmi = nmi(inst.truth, res.partition);
      row.miscluster = misclustering_rate(inst.truth, res.partition);
      row.runtime_ms = cfg.record_runtime ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
      row.converged = res.converged;
      row.objective = res.objective;
      slots[job].push_back(std::move(row));
    }
  };

  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      try {
        run_job(job);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ScenarioResult out;
  out.rows.reserve(jobs * cfg.methods.size());
  for (auto& slot : slots)
    for (auto& row : slot) out.rows.push_back(std::move(row));
  return out;
}

void write_csv(std::ostream& out, const ScenarioResult& result) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : result.rows) {
    out << r.scenario << ',' << r.rep << ',' << fmt(r.sweep) << ',' << method_name(r.method) << ',' << fmt(r.nmi)
        << ',' << fmt(r.miscluster) << ',' << fmt(r.runtime_ms) << ',' << (r.converged ? 1 : 0) << ','
        << fmt(r.objective) << '\n';
  }
}

std::string to_csv(const ScenarioResult& result) {
  std::ostringstream ss;
  write_csv(ss, result);
  return ss.str();
}

SweepSummary summarize(const ScenarioResult& result) {
  SweepSummary s;
  for (const ResultRow& r : result.rows)
    if (std::find(s.sweep.begin(), s.sweep.end(), r.sweep) == s.sweep.end()) s.sweep.push_back(r.sweep);
  std::map<Method, std::vector<int>> counts;
  for (const ResultRow& r : result.rows) {
    auto& nm = s.mean_nmi[r.method];
    auto& mc = s.mean_miscluster[r.method];
    auto& ct = counts[r.method];
    if (nm.empty()) {
      nm.assign(s.sweep.size(), 0.0);
      mc.assign(s.sweep.size(), 0.0);
      ct.assign(s.sweep.size(), 0);
    }
    const auto i = static_cast<std::size_t>(std::find(s.sweep.begin(), s.sweep.end(), r.sweep) - s.sweep.begin());
    nm[i] += r.nmi;
    mc[i] += r.miscluster;
    ++ct[i];
  }
  for (auto& [m, ct] : counts) {
    for (std::size_t i = 0; i < ct.size(); ++i) {
      if (ct[i] == 0) continue;
      s.mean_nmi[m][i] /= ct[i];
      s.mean_miscluster[m][i] /= ct[i];
    }
  }
  return s;
}

void write_svg(std::ostream& out, const ScenarioResult& result, std::string_view title) {
  const SweepSummary s = summarize(result);
  constexpr double width = 640, height = 400, left = 60, right = 150, top = 40, bottom = 50;
  constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  double xmin = 0.0, xmax = 1.0;
  if (!s.sweep.empty()) {
    xmin = *std::min_element(s.sweep.begin(), s.sweep.end());
    xmax = *std::max_element(s.sweep.begin(), s.sweep.end());
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.0 - y) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left + pw << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  for (double y : {0.0, 0.5, 1.0})
    out << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "text-anchor=\"end\">" << fmt(y) << "</text>\n";
  for (double x : s.sweep)
    out << "<text x=\"" << px(x) << "\" y=\"" << py(0) + 16 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">sweep</text>\n";
  out << "<text x=\"14\" y=\"" << top + ph / 2 << "\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 14 " << top + ph / 2 << ")\" text-anchor=\"middle\">mean NMI</text>\n";

  std::size_t idx = 0;
  for (const auto& [method, values] : s.mean_nmi) {
    const char* color = colors[idx % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << px(s.sweep[i]) << ',' << py(values[i]);
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(idx);
    out << "<text x=\"" << left + pw + 10 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"" << color << "\">" << method_name(method) << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace mlcd
