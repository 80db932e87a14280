#pragma once

#include <span>
#include <vector>

#include "domp/core.hpp"

namespace domp {

struct StepResult {
  Index index = 0;
  /// |<x_i, r>| / ||x_i|| of the winning column.
  double correlation = 0.0;
};

struct OmpTrace {
  SupportSet chosen;
  std::vector<double> correlations;
};

/// One greedy OMP iteration against the current support S: restricted
/// least squares, residual, then the column most correlated with the
/// residual. Columns already in S are not candidates; ties go to the
/// smallest index.
StepResult omp_step(const RegressionShard& shard, const SupportSet& S,
                    const LinalgOptions& opts = {});

OmpTrace run_omp(const RegressionShard& shard, Index steps,
                 const LinalgOptions& opts = {});

/// OMP on the row-stacked problem built from all shards.
SupportSet centralized_omp(std::span<const RegressionShard> shards, Index K,
                           const LinalgOptions& opts = {});

/// Row-stacks the shards into a single shard (machine_id 0).
RegressionShard stack_shards(std::span<const RegressionShard> shards);

}  // namespace domp
