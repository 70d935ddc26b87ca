#include "switchlab/config.hpp"

#include <cstdio>
#include <fstream>

#include "switchlab/random.hpp"
#include "switchlab/simulator.hpp"

namespace switchlab {

using nlohmann::json;

namespace {

std::vector<double> read_square(const json& rows, int n, const char* what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
    throw ConfigError(std::string(what) + " must be an array of " + std::to_string(n) + " rows");
  }
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (!r.is_array() || static_cast<int>(r.size()) != n) {
      throw ConfigError(std::string(what) + " rows must have " + std::to_string(n) + " entries");
    }
    for (const auto& v : r) {
      if (!v.is_number()) throw ConfigError(std::string(what) + " entries must be numbers");
      flat.push_back(v.get<double>());
    }
  }
  return flat;
}

json write_square(const std::vector<double>& flat, int n) {
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    json r = json::array();
    for (int j = 0; j < n; ++j) r.push_back(flat[static_cast<std::size_t>(i * n + j)]);
    rows.push_back(std::move(r));
  }
  return rows;
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

std::vector<double> expand_cost_preset(const json& spec, int n) {
  const auto preset = get_or<std::string>(spec, "preset", "ones");
  const auto m = static_cast<std::size_t>(n * n);
  if (preset == "ones") return std::vector<double>(m, 1.0);
  if (preset == "checker") {
    const double a = get_or<double>(spec, "a", 1.0);
    const double b = get_or<double>(spec, "b", 2.0);
    std::vector<double> c(m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i * n + j)] = (i + j) % 2 == 0 ? a : b;
    }
    return c;
  }
  if (preset == "random") {
    const auto seed = get_or<std::uint64_t>(spec, "seed", 1);
    const double lo = get_or<double>(spec, "lo", 0.1);
    const double hi = get_or<double>(spec, "hi", 10.0);
    if (!(lo > 0.0 && hi >= lo)) throw ConfigError("random cost preset needs 0 < lo <= hi");
    Rng rng(derive_seed(seed, 0, "cost-preset"));
    std::vector<double> c(m);
    for (double& v : c) v = lo + (hi - lo) * uniform01(rng);
    return c;
  }
  throw ConfigError("unknown cost preset '" + preset + "'");
}

CostMatrix ExperimentConfig::cost_matrix() const { return CostMatrix(n, cost); }

FlatVector ExperimentConfig::nu_vector() const { return FlatVector(n, nu); }

ArrivalModel ExperimentConfig::model(double epsilon) const {
  return ArrivalModel(arrival_kind, nu_vector(), epsilon, a_max);
}

std::int64_t ExperimentConfig::warmup_for(double epsilon) const {
  return warmup ? *warmup : default_warmup(epsilon);
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.n = get_or<int>(doc, "n", 2);
  if (cfg.n < 2) throw ConfigError("n must be >= 2");

  if (doc.contains("cost")) {
    const json& cost = doc.at("cost");
    if (cost.is_array()) {
      cfg.cost_preset = "explicit";
      cfg.cost = read_square(cost, cfg.n, "cost");
    } else if (cost.is_object()) {
      cfg.cost_preset = get_or<std::string>(cost, "preset", "explicit");
      cfg.cost = cost.contains("matrix") ? read_square(cost.at("matrix"), cfg.n, "cost.matrix")
                                         : expand_cost_preset(cost, cfg.n);
    } else {
      throw ConfigError("cost must be a matrix or a preset object");
    }
  } else {
    cfg.cost = expand_cost_preset(json::object(), cfg.n);
  }

  const json arrivals = doc.value("arrivals", json::object());
  try {
    cfg.arrival_kind = arrival_kind_from_string(get_or<std::string>(arrivals, "kind", "bernoulli"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.a_max = get_or<int>(arrivals, "a_max", cfg.arrival_kind == ArrivalKind::truncated_poisson ? 10 : 1);
  if (cfg.arrival_kind == ArrivalKind::bernoulli) cfg.a_max = 1;
  if (!arrivals.contains("nu") || (arrivals.at("nu").is_string() && arrivals.at("nu") == "uniform")) {
    cfg.nu.assign(static_cast<std::size_t>(cfg.n * cfg.n), 1.0 / cfg.n);
  } else {
    cfg.nu = read_square(arrivals.at("nu"), cfg.n, "arrivals.nu");
  }

  cfg.epsilon_grid = get_or<std::vector<double>>(doc, "epsilon_grid", cfg.epsilon_grid);
  cfg.slots = get_or<std::int64_t>(doc, "slots", cfg.slots);
  if (doc.contains("warmup") && !doc.at("warmup").is_null()) cfg.warmup = get_or<std::int64_t>(doc, "warmup", 0);
  cfg.replications = get_or<int>(doc, "replications", cfg.replications);
  cfg.batch_count = get_or<int>(doc, "batch_count", cfg.batch_count);
  cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
  cfg.ssc_sampling_stride = get_or<std::int64_t>(doc, "ssc_sampling_stride", cfg.ssc_sampling_stride);
  cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir);

  const json matcher = doc.value("matcher", json::object());
  try {
    cfg.matcher.mode = matcher_mode_from_string(get_or<std::string>(matcher, "mode", "auto"));
    cfg.matcher.exact_threshold = get_or<int>(matcher, "exact_threshold", 7);
    cfg.matcher.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (cfg.epsilon_grid.empty()) throw ConfigError("epsilon_grid must not be empty");
  for (double e : cfg.epsilon_grid) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("every epsilon must lie in (0, 1); got " + std::to_string(e));
  }
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.batch_count < 20) throw ConfigError("batch_count must be >= 20");
  if (cfg.slots < cfg.batch_count) throw ConfigError("slots must be >= batch_count");
  if (cfg.warmup && *cfg.warmup < 0) throw ConfigError("warmup must be >= 0");
  if (cfg.ssc_sampling_stride < 0) throw ConfigError("ssc_sampling_stride must be >= 0");

  try {
    (void)cfg.cost_matrix();
    if (!face_check(cfg.nu_vector(), cfg.cost_matrix())) {
      throw ConfigError("arrivals.nu must have unit row and column sums");
    }
    for (double e : cfg.epsilon_grid) (void)cfg.model(e);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["n"] = cfg.n;
  doc["cost"] = {{"preset", cfg.cost_preset}, {"matrix", write_square(cfg.cost, cfg.n)}};
  doc["arrivals"] = {{"kind", std::string(to_string(cfg.arrival_kind))},
                     {"a_max", cfg.a_max},
                     {"nu", write_square(cfg.nu, cfg.n)}};
  doc["epsilon_grid"] = cfg.epsilon_grid;
  doc["slots"] = cfg.slots;
  doc["warmup"] = cfg.warmup ? json(*cfg.warmup) : json(nullptr);
  doc["replications"] = cfg.replications;
  doc["batch_count"] = cfg.batch_count;
  doc["seed"] = cfg.seed;
  doc["matcher"] = {{"mode", std::string(to_string(cfg.matcher.mode))},
                    {"exact_threshold", cfg.matcher.exact_threshold}};
  doc["ssc_sampling_stride"] = cfg.ssc_sampling_stride;
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
  return buf;
}

}  // namespace switchlab
