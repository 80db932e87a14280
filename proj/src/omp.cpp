#include "domp/omp.hpp"

#include <cmath>
#include <string>

namespace domp {

StepResult omp_step(const RegressionShard& shard, const SupportSet& S,
                    const LinalgOptions& opts) {
  const DesignMatrix& X = shard.X();
  const Index d = X.cols();
  if (S.size() >= d) {
    throw Error(ErrorCode::FullSupport, "support already spans all " + std::to_string(d) + " columns");
  }

  const SparseVector fit = least_squares_on_support(X, shard.response, S, opts);
  const Vector r = residual(X, shard.response, fit);
  const Vector corr = X.entries().transpose() * r;
  const Vector& norms = X.column_norms();

  StepResult best{d, -1.0};
  for (Index i = 0; i < d; ++i) {
    if (S.contains(i)) continue;
    const auto e = static_cast<Eigen::Index>(i);
    const double c = std::abs(corr(e)) / norms(e);
    // Strict comparison keeps the smallest index on ties.
    if (c > best.correlation) best = {i, c};
  }
  return best;
}

OmpTrace run_omp(const RegressionShard& shard, Index steps, const LinalgOptions& opts) {
  const Index limit = std::min(shard.X().rows(), shard.X().cols());
  if (steps > limit) {
    throw Error(ErrorCode::InvalidArgument, "steps " + std::to_string(steps) +
                                                " exceed min(n, d) = " + std::to_string(limit));
  }
  OmpTrace trace;
  trace.correlations.reserve(steps);
  for (Index t = 0; t < steps; ++t) {
    const StepResult step = omp_step(shard, trace.chosen, opts);
    trace.chosen.insert(step.index);
    trace.correlations.push_back(step.correlation);
  }
  return trace;
}

RegressionShard stack_shards(std::span<const RegressionShard> shards) {
  if (shards.empty()) throw Error(ErrorCode::EmptyList, "no shards to stack");
  const Index d = shards.front().X().cols();
  Eigen::Index rows = 0;
  for (const auto& s : shards) {
    if (s.X().cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "shards differ in column count");
    }
    rows += static_cast<Eigen::Index>(s.X().rows());
  }
  Matrix X(rows, static_cast<Eigen::Index>(d));
  Vector y(rows);
  Eigen::Index at = 0;
  for (const auto& s : shards) {
    const auto n = static_cast<Eigen::Index>(s.X().rows());
    X.middleRows(at, n) = s.X().entries();
    y.segment(at, n) = s.response;
    at += n;
  }
  return RegressionShard(std::make_shared<const DesignMatrix>(std::move(X)), std::move(y), 0);
}

SupportSet centralized_omp(std::span<const RegressionShard> shards, Index K,
                           const LinalgOptions& opts) {
  return run_omp(stack_shards(shards), K, opts).chosen;
}

}  // namespace domp
