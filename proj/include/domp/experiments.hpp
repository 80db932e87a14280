#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "domp/datagen.hpp"
#include "domp/protocol.hpp"

namespace domp {

enum class AlgorithmKind { SingleOMP, Centralized, DS, DJ, DJF, DC };

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::DJ;
  /// DS: steps L per machine. DJF: machines per round (0 means M).
  Index param = 0;

  /// "single", "centralized", "ds:<L>", "dj", "djf" / "djf:<per_round>", "dc".
  static AlgorithmSpec parse(const std::string& text);
  /// CSV label, e.g. "DS(L=6)".
  std::string label() const;
  bool operator==(const AlgorithmSpec&) const = default;
};

struct ExperimentConfig {
  GenConfig gen;
  std::vector<double> theta_min_grid;
  Index trials = 1;
  std::vector<AlgorithmSpec> algorithms;
  bool fixed_design = false;
  /// Abort on the first failed trial; otherwise count and report it.
  bool abort_on_error = true;
  unsigned threads = 1;
  LinalgOptions linalg;
  /// One summary line per grid point on stderr.
  bool verbose = false;

  void validate() const;
  /// Shards drawn per trial: M, or K * per_round when DJF needs more.
  Index machines_per_trial() const;
};

struct AlgorithmOutcome {
  AlgorithmSpec algorithm;
  bool success = false;
  std::uint64_t bits = 0;
  bool error = false;
  ErrorCode error_code = ErrorCode::InvalidArgument;
  std::string error_message;
};

struct CurvePoint {
  std::string algorithm;
  double theta_min = 0;
  Index successes = 0;
  Index trials = 0;
  double success_rate = 0;
  double mean_total_bits = 0;
  Index errors = 0;
};

struct SweepResult {
  std::vector<CurvePoint> points;   // grid-major, algorithms in config order
  std::vector<std::string> errors;  // "trial j, theta t, algo: message"
};

struct RunDetail {
  SupportSet estimate;
  std::uint64_t bits = 0;
  int rounds = 0;
  Index machines_used = 0;
  /// Absent for SingleOMP and Centralized, which exchange no protocol frames.
  std::optional<CommLedger> ledger;
};

/// Runs one algorithm and keeps the protocol details; throws on error.
RunDetail execute_algorithm(const AlgorithmSpec& algo, std::span<const RegressionShard> pool,
                            const ExperimentConfig& cfg, std::uint64_t trial);

/// Runs one algorithm on prepared shards. `pool` holds all shards of the
/// trial; non-DJF algorithms use its first M entries.
AlgorithmOutcome run_algorithm(const AlgorithmSpec& algo, std::span<const RegressionShard> pool,
                               const ExperimentConfig& cfg, const SparseVector& theta,
                               std::uint64_t trial);

/// One noise realization at one theta_min, every configured algorithm.
std::vector<AlgorithmOutcome> run_trial(const ExperimentConfig& cfg, double theta_min,
                                        std::uint64_t trial_index);

SweepResult sweep(const ExperimentConfig& cfg);

inline constexpr const char* kCsvHeader =
    "algorithm,theta_min,alpha,d,n,M,K,sigma,trials,successes,success_rate,mean_bits";

std::string format_csv(const std::vector<CurvePoint>& points, const GenConfig& gen);
void write_csv(const std::vector<CurvePoint>& points, const GenConfig& gen,
               const std::filesystem::path& path);

}  // namespace domp
