#include "domp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace domp {

AlgorithmSpec AlgorithmSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  Index param = 0;
  if (colon != std::string::npos) {
    const std::string arg = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), param);
    if (ec != std::errc{} || ptr != arg.data() + arg.size() || param == 0) {
      throw Error(ErrorCode::InvalidArgument, "bad algorithm parameter in '" + text + "'");
    }
  }
  auto no_param = [&](AlgorithmKind kind) {
    if (colon != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "algorithm '" + name + "' takes no parameter");
    }
    return AlgorithmSpec{kind, 0};
  };
  if (name == "single") return no_param(AlgorithmKind::SingleOMP);
  if (name == "centralized") return no_param(AlgorithmKind::Centralized);
  if (name == "dj") return no_param(AlgorithmKind::DJ);
  if (name == "dc") return no_param(AlgorithmKind::DC);
  if (name == "djf") return AlgorithmSpec{AlgorithmKind::DJF, param};
  if (name == "ds") {
    if (param == 0) throw Error(ErrorCode::InvalidArgument, "ds needs a step count, e.g. ds:6");
    return AlgorithmSpec{AlgorithmKind::DS, param};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + text + "'");
}

std::string AlgorithmSpec::label() const {
  switch (kind) {
    case AlgorithmKind::SingleOMP: return "SingleOMP";
    case AlgorithmKind::Centralized: return "Centralized";
    case AlgorithmKind::DS: return "DS(L=" + std::to_string(param) + ")";
    case AlgorithmKind::DJ: return "DJ";
    case AlgorithmKind::DJF:
      return param == 0 ? std::string("DJF") : "DJF(per_round=" + std::to_string(param) + ")";
    case AlgorithmKind::DC: return "DC";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  gen.validate();
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (trials < 1) fail("trials must be at least 1");
  if (theta_min_grid.empty()) fail("theta_min_grid must be nonempty");
  for (Index g = 0; g < theta_min_grid.size(); ++g) {
    if (!(theta_min_grid[g] > 0.0)) fail("theta_min_grid entries must be positive");
    if (g > 0 && !(theta_min_grid[g] > theta_min_grid[g - 1])) {
      fail("theta_min_grid must be strictly increasing");
    }
  }
  if (algorithms.empty()) fail("at least one algorithm is required");
  const Index steps = std::min(gen.n, gen.d);
  for (const auto& a : algorithms) {
    if (gen.K > steps) fail("K exceeds min(n, d)");
    if (a.kind == AlgorithmKind::DS && (a.param < gen.K || a.param > steps)) {
      fail("DS steps must satisfy K <= L <= min(n, d)");
    }
  }
  if (gen.pattern == ThetaPattern::Paper && gen.K != 3) fail("pattern \"paper\" needs K = 3");
}

Index ExperimentConfig::machines_per_trial() const {
  Index machines = gen.M;
  for (const auto& a : algorithms) {
    if (a.kind == AlgorithmKind::DJF) {
      machines = std::max(machines, gen.K * (a.param == 0 ? gen.M : a.param));
    }
  }
  return machines;
}

RunDetail execute_algorithm(const AlgorithmSpec& algo, std::span<const RegressionShard> pool,
                            const ExperimentConfig& cfg, std::uint64_t trial) {
  const GenConfig& g = cfg.gen;
  if (pool.empty()) throw Error(ErrorCode::InvalidArgument, "no shards");
  const auto machines = pool.first(std::min(g.M, pool.size()));
  const ProtocolOptions opts{cfg.linalg, 1};
  RunDetail out;
  auto take = [&](ProtocolResult r) {
    out.estimate = std::move(r.estimate);
    out.bits = r.ledger.total_bits();
    out.rounds = r.rounds;
    out.machines_used = r.machines_used;
    out.ledger = std::move(r.ledger);
  };
  switch (algo.kind) {
    case AlgorithmKind::SingleOMP:
      out.estimate = run_omp(pool.front(), g.K, cfg.linalg).chosen;
      out.bits = g.K * bits_per_index(g.d);
      out.rounds = 1;
      out.machines_used = 1;
      break;
    case AlgorithmKind::Centralized:
      out.estimate = centralized_omp(machines, g.K, cfg.linalg);
      // Shipping every sample: M n (d + 1) doubles.
      out.bits = static_cast<std::uint64_t>(machines.size()) * g.n * (g.d + 1) * 64;
      out.rounds = 1;
      out.machines_used = machines.size();
      break;
    case AlgorithmKind::DS:
      take(ds_omp(machines, algo.param, g.K, opts));
      break;
    case AlgorithmKind::DJ:
      take(dj_omp(machines, g.K, opts));
      break;
    case AlgorithmKind::DJF:
      take(djf_omp(pool, g.K, algo.param == 0 ? g.M : algo.param, opts));
      break;
    case AlgorithmKind::DC:
      take(dc_omp(machines, g.K, derive_seed(g.master_seed, trial, 0, StreamPurpose::Fusion), opts));
      break;
  }
  return out;
}

AlgorithmOutcome run_algorithm(const AlgorithmSpec& algo, std::span<const RegressionShard> pool,
                               const ExperimentConfig& cfg, const SparseVector& theta,
                               std::uint64_t trial) {
  AlgorithmOutcome out;
  out.algorithm = algo;
  try {
    const RunDetail r = execute_algorithm(algo, pool, cfg, trial);
    out.bits = r.bits;
    out.success = r.estimate.same_set(theta.support);
  } catch (const Error& e) {
    out.error = true;
    out.error_code = e.code();
    out.error_message = e.what();
  }
  return out;
}

namespace {

SparseVector theta_at(const GenConfig& gen, double theta_min) {
  GenConfig g = gen;
  g.theta_min = theta_min;
  return make_sparse_theta(g);
}

std::vector<AlgorithmOutcome> evaluate(const ExperimentConfig& cfg, const TrialData& data,
                                       double theta_min, std::uint64_t trial) {
  const SparseVector theta = theta_at(cfg.gen, theta_min);
  const std::vector<RegressionShard> pool = make_shards(data, theta, cfg.gen.sigma);
  std::vector<AlgorithmOutcome> outcomes;
  outcomes.reserve(cfg.algorithms.size());
  for (const auto& algo : cfg.algorithms) {
    outcomes.push_back(run_algorithm(algo, pool, cfg, theta, trial));
  }
  return outcomes;
}

}  // namespace

std::vector<AlgorithmOutcome> run_trial(const ExperimentConfig& cfg, double theta_min,
                                        std::uint64_t trial_index) {
  cfg.validate();
  const CovarianceFactor factor = toeplitz_covariance(cfg.gen.d, cfg.gen.alpha);
  const TrialData data =
      generate_trial(cfg.gen, factor, trial_index, cfg.machines_per_trial(), cfg.fixed_design);
  return evaluate(cfg, data, theta_min, trial_index);
}

SweepResult sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const CovarianceFactor factor = toeplitz_covariance(cfg.gen.d, cfg.gen.alpha);
  const Index grid = cfg.theta_min_grid.size();
  const Index algos = cfg.algorithms.size();
  const Index machines = cfg.machines_per_trial();

  // outcomes[trial][grid point][algorithm]. Designs and noise depend only on
  // the trial, so they are drawn once and reused across the grid.
  std::vector<std::vector<std::vector<AlgorithmOutcome>>> outcomes(cfg.trials);
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (Index j = next++; j < cfg.trials && !failed; j = next++) {
      const TrialData data = generate_trial(cfg.gen, factor, j, machines, cfg.fixed_design);
      auto& row = outcomes[j];
      row.reserve(grid);
      for (double theta_min : cfg.theta_min_grid) {
        row.push_back(evaluate(cfg, data, theta_min, j));
        if (cfg.abort_on_error) {
          for (const auto& o : row.back()) {
            if (o.error) failed = true;
          }
        }
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.trials)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  for (Index j = 0; j < cfg.trials; ++j) {
    for (Index g = 0; g < outcomes[j].size(); ++g) {
      for (const auto& o : outcomes[j][g]) {
        if (!o.error) continue;
        std::string msg = "trial " + std::to_string(j) + ", theta_min " +
                          std::to_string(cfg.theta_min_grid[g]) + ", " + o.algorithm.label() +
                          ": " + o.error_message;
        if (cfg.abort_on_error) throw Error(o.error_code, "sweep aborted: " + msg);
        result.errors.push_back(std::move(msg));
      }
    }
  }

  for (Index g = 0; g < grid; ++g) {
    for (Index a = 0; a < algos; ++a) {
      CurvePoint p;
      p.algorithm = cfg.algorithms[a].label();
      p.theta_min = cfg.theta_min_grid[g];
      std::uint64_t bit_sum = 0;
      for (Index j = 0; j < cfg.trials; ++j) {
        const AlgorithmOutcome& o = outcomes[j][g][a];
        if (o.error) {
          ++p.errors;
          continue;
        }
        ++p.trials;
        p.successes += o.success ? 1 : 0;
        bit_sum += o.bits;
      }
      if (p.trials > 0) {
        p.success_rate = static_cast<double>(p.successes) / static_cast<double>(p.trials);
        p.mean_total_bits = static_cast<double>(bit_sum) / static_cast<double>(p.trials);
      }
      result.points.push_back(p);
    }
    if (cfg.verbose) {
      std::cerr << "theta_min=" << cfg.theta_min_grid[g];
      for (Index a = 0; a < algos; ++a) {
        const CurvePoint& p = result.points[g * algos + a];
        std::cerr << ' ' << p.algorithm << '=' << p.success_rate;
      }
      std::cerr << '\n';
    }
  }
  return result;
}

std::string format_csv(const std::vector<CurvePoint>& points, const GenConfig& gen) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[512];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%zu,%zu,%zu,%zu,%.17g,%zu,%zu,%.17g,%.17g\n",
                  p.algorithm.c_str(), p.theta_min, gen.alpha, gen.d, gen.n, gen.M, gen.K,
                  gen.sigma, p.trials, p.successes, p.success_rate, p.mean_total_bits);
    out += buf;
  }
  return out;
}

void write_csv(const std::vector<CurvePoint>& points, const GenConfig& gen,
               const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
  os << format_csv(points, gen);
  if (!os) throw Error(ErrorCode::Io, path.string() + ": write failed");
}

}  // namespace domp
