#include "domp/domp.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "domp/config.hpp"

struct domp_config {
  domp::RunConfig run;
};

namespace {

thread_local std::string last_error;

domp_status status_of(domp::ErrorCode code) {
  switch (code) {
    case domp::ErrorCode::Config: return DOMP_ERR_CONFIG;
    case domp::ErrorCode::Io: return DOMP_ERR_IO;
    case domp::ErrorCode::InvalidArgument: return DOMP_ERR_INVALID_ARGUMENT;
    default: return DOMP_ERR_RUNTIME;
  }
}

template <class F>
domp_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return DOMP_OK;
  } catch (const domp::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DOMP_ERR_RUNTIME;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DOMP_ERR_RUNTIME;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw domp::Error(domp::ErrorCode::InvalidArgument, what);
}

std::string format_indices(const domp::SupportSet& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

struct PreparedTrial {
  domp::SparseVector theta;
  std::vector<domp::RegressionShard> shards;
};

PreparedTrial prepare_trial(const domp::ExperimentConfig& ex) {
  const domp::CovarianceFactor factor = domp::toeplitz_covariance(ex.gen.d, ex.gen.alpha);
  const domp::TrialData data =
      domp::generate_trial(ex.gen, factor, 0, ex.machines_per_trial(), ex.fixed_design);
  PreparedTrial t{domp::make_sparse_theta(ex.gen), {}};
  t.shards = domp::make_shards(data, t.theta, ex.gen.sigma);
  return t;
}

}  // namespace

extern "C" {

const char* domp_version(void) {
  static const std::string v = domp::version_string();
  return v.c_str();
}

const char* domp_last_error(void) { return last_error.c_str(); }

domp_status domp_config_from_json(const char* json_text, domp_config** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = nullptr;
    auto* cfg = new domp_config{domp::parse_config(json_text)};
    *out = cfg;
  });
}

domp_status domp_config_load(const char* path, domp_config** out) {
  const domp_status st = guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    auto* cfg = new domp_config{domp::load_config(path)};
    *out = cfg;
  });
  return st == DOMP_ERR_IO ? DOMP_ERR_CONFIG : st;
}

void domp_config_free(domp_config* cfg) { delete cfg; }

domp_status domp_config_set_seed(domp_config* cfg, uint64_t master_seed) {
  return guarded([&] {
    require(cfg, "null config");
    cfg->run.experiment.gen.master_seed = master_seed;
  });
}

domp_status domp_config_set_verbose(domp_config* cfg, int verbose) {
  return guarded([&] {
    require(cfg, "null config");
    cfg->run.experiment.verbose = verbose != 0;
  });
}

domp_status domp_config_to_json(const domp_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = dup_string(domp::config_to_json(cfg->run) + "\n");
  });
}

domp_status domp_simulate(const domp_config* cfg, const char* algo, char** out) {
  return guarded([&] {
    require(cfg && algo && out, "null argument");
    *out = nullptr;
    domp::ExperimentConfig ex = cfg->run.experiment;
    ex.algorithms = {domp::AlgorithmSpec::parse(algo)};
    if (ex.theta_min_grid.empty()) ex.theta_min_grid = {ex.gen.theta_min};
    ex.validate();
    const PreparedTrial t = prepare_trial(ex);
    const domp::RunDetail r = domp::execute_algorithm(ex.algorithms.front(), t.shards, ex, 0);

    std::ostringstream os;
    os.precision(17);
    os << "algorithm      " << ex.algorithms.front().label() << '\n'
       << "master_seed    " << ex.gen.master_seed << '\n'
       << "theta_min      " << ex.gen.theta_min << '\n'
       << "support        " << format_indices(t.theta.support) << '\n'
       << "estimate       " << format_indices(r.estimate) << '\n'
       << "success        " << (r.estimate.same_set(t.theta.support) ? "true" : "false") << '\n'
       << "rounds         " << r.rounds << '\n'
       << "machines_used  " << r.machines_used << '\n'
       << "bits           " << r.bits << '\n';
    if (r.ledger) {
      os << "bytes          " << r.ledger->total_bytes() << '\n';
      for (const auto& round : r.ledger->rounds()) {
        os << "round " << round.round << "  uplink_bits " << round.uplink_bits
           << "  downlink_bits " << round.downlink_bits << "  uplink_bytes " << round.uplink_bytes
           << "  downlink_bytes " << round.downlink_bytes << '\n';
      }
    }
    *out = dup_string(os.str());
  });
}

domp_status domp_sweep(const domp_config* cfg, const char* csv_path, char** out) {
  return guarded([&] {
    require(cfg && csv_path, "null argument");
    if (out) *out = nullptr;
    const domp::ExperimentConfig& ex = cfg->run.experiment;
    if (ex.theta_min_grid.empty() || ex.algorithms.empty()) {
      throw domp::Error(domp::ErrorCode::Config,
                        "experiment: theta_min_grid and algorithms are required for a sweep");
    }
    const domp::SweepResult res = domp::sweep(ex);
    domp::write_csv(res.points, ex.gen, csv_path);
    domp::write_manifest(cfg->run, csv_path);
    if (out) {
      std::ostringstream os;
      os << "wrote " << res.points.size() << " rows to " << csv_path << '\n';
      for (const auto& e : res.errors) os << "error: " << e << '\n';
      *out = dup_string(os.str());
    }
  });
}

domp_status domp_theory(const domp_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = nullptr;
    const domp::theory::TheoryParams p = domp::resolve_theory_params(cfg->run);
    const std::int64_t available =
        cfg->run.theory.machines_available
            ? *cfg->run.theory.machines_available
            : static_cast<std::int64_t>(cfg->run.experiment.machines_per_trial());
    const auto report = domp::theory::check_theorem(p, available);
    *out = dup_string(domp::theory::format_report(report) +
                      domp::theory::format_report_record(report) + "\n");
  });
}

domp_status domp_datagen(const domp_config* cfg, const char* path, uint32_t machine) {
  return guarded([&] {
    require(cfg && path, "null argument");
    const domp::ExperimentConfig& ex = cfg->run.experiment;
    if (machine >= ex.machines_per_trial()) {
      throw domp::Error(domp::ErrorCode::InvalidArgument,
                        "machine " + std::to_string(machine) + " out of range (have " +
                            std::to_string(ex.machines_per_trial()) + ")");
    }
    const PreparedTrial t = prepare_trial(ex);
    domp::write_shard(path, t.shards[machine], ex.gen.master_seed);
  });
}

void domp_string_free(char* s) { std::free(s); }

}  // extern "C"
