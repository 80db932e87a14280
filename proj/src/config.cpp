#include "domp/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#ifndef DOMP_VERSION
#define DOMP_VERSION "0.1.0"
#endif

namespace domp {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& key, const std::string& msg) {
  throw Error(ErrorCode::Config, key + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.contains(key)) config_error(prefix.empty() ? key : prefix + "." + key, "unknown key");
  }
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) config_error(key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  config_error(key, "expected a non-negative integer");
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) config_error(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) config_error(key, "expected a string");
  return v.get<std::string>();
}

const json& array_at(const json& v, const std::string& key) {
  if (!v.is_array()) config_error(key, "expected an array");
  return v;
}

void parse_gen(const json& g, GenConfig& out) {
  reject_unknown(g, "gen", {"d", "n", "M", "K", "alpha", "sigma", "theta_min", "pattern",
                            "support", "master_seed"});
  if (g.contains("d")) out.d = get_unsigned(g["d"], "gen.d");
  if (g.contains("n")) out.n = get_unsigned(g["n"], "gen.n");
  if (g.contains("M")) out.M = get_unsigned(g["M"], "gen.M");
  if (g.contains("K")) out.K = get_unsigned(g["K"], "gen.K");
  if (g.contains("alpha")) out.alpha = get_number(g["alpha"], "gen.alpha");
  if (g.contains("sigma")) out.sigma = get_number(g["sigma"], "gen.sigma");
  if (g.contains("theta_min")) out.theta_min = get_number(g["theta_min"], "gen.theta_min");
  if (g.contains("pattern")) {
    const json& p = g["pattern"];
    if (p.is_string()) {
      if (p.get<std::string>() != "paper") config_error("gen.pattern", "expected \"paper\" or an array");
      out.pattern = ThetaPattern::Paper;
      out.custom_values.clear();
    } else if (p.is_array()) {
      out.pattern = ThetaPattern::Custom;
      out.custom_values.clear();
      for (const auto& v : p) out.custom_values.push_back(get_number(v, "gen.pattern[]"));
    } else {
      config_error("gen.pattern", "expected \"paper\" or an array");
    }
  }
  if (g.contains("support")) {
    out.support.clear();
    for (const auto& v : array_at(g["support"], "gen.support")) {
      out.support.push_back(get_unsigned(v, "gen.support[]"));
    }
  }
  if (g.contains("master_seed")) out.master_seed = get_unsigned(g["master_seed"], "gen.master_seed");
}

void parse_experiment(const json& e, ExperimentConfig& out) {
  reject_unknown(e, "experiment", {"theta_min_grid", "trials", "algorithms", "fixed_design",
                                   "on_error", "threads"});
  if (e.contains("theta_min_grid")) {
    out.theta_min_grid.clear();
    for (const auto& v : array_at(e["theta_min_grid"], "experiment.theta_min_grid")) {
      out.theta_min_grid.push_back(get_number(v, "experiment.theta_min_grid[]"));
    }
  }
  if (e.contains("trials")) out.trials = get_unsigned(e["trials"], "experiment.trials");
  if (e.contains("algorithms")) {
    out.algorithms.clear();
    for (const auto& v : array_at(e["algorithms"], "experiment.algorithms")) {
      const std::string name = get_string(v, "experiment.algorithms[]");
      try {
        out.algorithms.push_back(AlgorithmSpec::parse(name));
      } catch (const Error& err) {
        config_error("experiment.algorithms", err.what());
      }
    }
  }
  if (e.contains("fixed_design")) out.fixed_design = get_bool(e["fixed_design"], "experiment.fixed_design");
  if (e.contains("on_error")) {
    const std::string mode = get_string(e["on_error"], "experiment.on_error");
    if (mode == "abort") {
      out.abort_on_error = true;
    } else if (mode == "skip") {
      out.abort_on_error = false;
    } else {
      config_error("experiment.on_error", "expected \"abort\" or \"skip\"");
    }
  }
  if (e.contains("threads")) {
    const auto t = get_unsigned(e["threads"], "experiment.threads");
    if (t < 1 || t > 1024) config_error("experiment.threads", "expected 1..1024");
    out.threads = static_cast<unsigned>(t);
  }
}

void parse_theory(const json& t, TheoryConfig& out) {
  reject_unknown(t, "theory", {"mu_max", "theta_min_scaled", "epsilon", "machines_available"});
  if (t.contains("mu_max")) out.mu_max = get_number(t["mu_max"], "theory.mu_max");
  if (t.contains("theta_min_scaled")) {
    out.theta_min_scaled = get_number(t["theta_min_scaled"], "theory.theta_min_scaled");
  }
  if (t.contains("epsilon")) out.epsilon = get_number(t["epsilon"], "theory.epsilon");
  if (t.contains("machines_available")) {
    out.machines_available =
        static_cast<std::int64_t>(get_unsigned(t["machines_available"], "theory.machines_available"));
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("<document>: ") + e.what());
  }
  reject_unknown(doc, "", {"gen", "experiment", "theory", "linalg"});
  RunConfig cfg;
  if (doc.contains("gen")) parse_gen(doc["gen"], cfg.experiment.gen);
  if (doc.contains("experiment")) parse_experiment(doc["experiment"], cfg.experiment);
  if (doc.contains("theory")) parse_theory(doc["theory"], cfg.theory);
  if (doc.contains("linalg")) {
    reject_unknown(doc["linalg"], "linalg", {"singular_tol"});
    if (doc["linalg"].contains("singular_tol")) {
      const double tol = get_number(doc["linalg"]["singular_tol"], "linalg.singular_tol");
      if (!(tol > 0.0 && tol < 1.0)) config_error("linalg.singular_tol", "expected a value in (0, 1)");
      cfg.experiment.linalg.singular_tol = tol;
    }
  }

  // Semantic checks, reported against the config section they came from.
  try {
    cfg.experiment.gen.validate();
    if (cfg.experiment.gen.pattern == ThetaPattern::Custom) make_sparse_theta(cfg.experiment.gen);
  } catch (const Error& e) {
    config_error("gen", e.what());
  }
  const auto& ex = cfg.experiment;
  if (!ex.theta_min_grid.empty() || !ex.algorithms.empty()) {
    try {
      ex.validate();
    } catch (const Error& e) {
      config_error("experiment", e.what());
    }
  }
  if (cfg.theory.mu_max && !(*cfg.theory.mu_max >= 0.0 && *cfg.theory.mu_max < 1.0)) {
    config_error("theory.mu_max", "expected a value in [0, 1)");
  }
  if (cfg.theory.theta_min_scaled && !(*cfg.theory.theta_min_scaled > 0.0)) {
    config_error("theory.theta_min_scaled", "expected a positive value");
  }
  if (!(cfg.theory.epsilon > 0.0 && cfg.theory.epsilon < 1.0)) {
    config_error("theory.epsilon", "expected a value in (0, 1)");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, path.string() + ": cannot open");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

namespace {

json to_json(const RunConfig& cfg) {
  const GenConfig& g = cfg.experiment.gen;
  json gen = {{"d", g.d},         {"n", g.n},         {"M", g.M},
              {"K", g.K},         {"alpha", g.alpha}, {"sigma", g.sigma},
              {"theta_min", g.theta_min}, {"master_seed", g.master_seed}};
  if (g.pattern == ThetaPattern::Paper) {
    gen["pattern"] = "paper";
  } else {
    gen["pattern"] = g.custom_values;
  }
  if (!g.support.empty()) gen["support"] = g.support;

  const ExperimentConfig& e = cfg.experiment;
  json algos = json::array();
  for (const auto& a : e.algorithms) {
    switch (a.kind) {
      case AlgorithmKind::SingleOMP: algos.push_back("single"); break;
      case AlgorithmKind::Centralized: algos.push_back("centralized"); break;
      case AlgorithmKind::DS: algos.push_back("ds:" + std::to_string(a.param)); break;
      case AlgorithmKind::DJ: algos.push_back("dj"); break;
      case AlgorithmKind::DJF:
        algos.push_back(a.param == 0 ? std::string("djf") : "djf:" + std::to_string(a.param));
        break;
      case AlgorithmKind::DC: algos.push_back("dc"); break;
    }
  }
  json exp = {{"theta_min_grid", e.theta_min_grid},
              {"trials", e.trials},
              {"algorithms", algos},
              {"fixed_design", e.fixed_design},
              {"on_error", e.abort_on_error ? "abort" : "skip"},
              {"threads", e.threads}};

  json th = {{"epsilon", cfg.theory.epsilon}};
  if (cfg.theory.mu_max) th["mu_max"] = *cfg.theory.mu_max;
  if (cfg.theory.theta_min_scaled) th["theta_min_scaled"] = *cfg.theory.theta_min_scaled;
  if (cfg.theory.machines_available) th["machines_available"] = *cfg.theory.machines_available;

  return {{"gen", gen},
          {"experiment", exp},
          {"theory", th},
          {"linalg", {{"singular_tol", e.linalg.singular_tol}}}};
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) { return to_json(cfg).dump(2); }

theory::TheoryParams resolve_theory_params(const RunConfig& cfg) {
  const GenConfig& g = cfg.experiment.gen;
  theory::TheoryParams p;
  p.d = g.d;
  p.K = g.K;
  p.n = g.n;
  p.sigma = g.sigma;
  p.epsilon = cfg.theory.epsilon;
  if (cfg.theory.mu_max && cfg.theory.theta_min_scaled) {
    p.mu_max = *cfg.theory.mu_max;
    p.theta_min_scaled = *cfg.theory.theta_min_scaled;
    return p;
  }
  const CovarianceFactor factor = toeplitz_covariance(g.d, g.alpha);
  const TrialData data = generate_trial(g, factor, 0, g.M, cfg.experiment.fixed_design);
  p.mu_max = cfg.theory.mu_max ? *cfg.theory.mu_max : max_coherence(std::span<const DesignPtr>(data.designs));
  if (cfg.theory.theta_min_scaled) {
    p.theta_min_scaled = *cfg.theory.theta_min_scaled;
  } else {
    const SparseVector theta = make_sparse_theta(g);
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& X : data.designs) {
      for (Index k = 0; k < theta.support.size(); ++k) {
        lo = std::min(lo, std::abs(theta.values[k]) *
                              X->column_norm(theta.support[k]));
      }
    }
    p.theta_min_scaled = lo;
  }
  return p;
}

std::string version_string() { return DOMP_VERSION; }

void write_manifest(const RunConfig& cfg, const std::filesystem::path& csv_path) {
  std::filesystem::path path = csv_path;
  path += ".manifest.json";
  const json manifest = {{"version", version_string()},
                         {"master_seed", cfg.experiment.gen.master_seed},
                         {"csv", csv_path.filename().string()},
                         {"config", to_json(cfg)}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
  os << manifest.dump(2) << '\n';
  if (!os) throw Error(ErrorCode::Io, path.string() + ": write failed");
}

}  // namespace domp
