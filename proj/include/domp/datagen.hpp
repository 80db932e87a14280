#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "domp/core.hpp"
#include "domp/rng.hpp"

namespace domp {

enum class ThetaPattern { Paper, Custom };

struct GenConfig {
  Index d = 200;
  Index n = 180;
  Index M = 20;
  Index K = 3;
  double alpha = 0.0;
  double sigma = 1.0;
  double theta_min = 1.0;
  ThetaPattern pattern = ThetaPattern::Paper;
  /// Coefficients for ThetaPattern::Custom (length K).
  std::vector<double> custom_values;
  /// Support positions; defaults to 0..K-1.
  std::vector<Index> support;
  std::uint64_t master_seed = 0;

  /// Throws InvalidArgument on violated invariants.
  void validate() const;
};

/// Lower-triangular L with L L^T equal to the Toeplitz matrix
/// Sigma_ij = alpha^|i-j|.
class CovarianceFactor {
 public:
  CovarianceFactor(Index d, double alpha);

  Index dim() const noexcept { return d_; }
  double alpha() const noexcept { return alpha_; }
  const Matrix& lower() const noexcept { return lower_; }

  /// Writes L z into `out`. For this covariance the product reduces to the
  /// recursion x_0 = z_0, x_i = alpha x_{i-1} + sqrt(1 - alpha^2) z_i.
  void apply(const double* z, double* out) const;

 private:
  Index d_;
  double alpha_;
  Matrix lower_;
};

CovarianceFactor toeplitz_covariance(Index d, double alpha);

/// n rows, each L z with z drawn from the normal stream seeded by `seed`
/// (row-major consumption of the stream).
DesignMatrix sample_design(Index n, Index d, const CovarianceFactor& factor, std::uint64_t seed);

SparseVector make_sparse_theta(const GenConfig& cfg);

/// First n variates of the normal stream seeded by `seed`.
Vector noise_vector(Index n, std::uint64_t seed);

/// X theta + sigma xi for a precomputed noise vector xi.
Vector responses_from_noise(const DesignMatrix& X, const SparseVector& theta, double sigma,
                            const Vector& xi);

Vector sample_responses(const DesignMatrix& X, const SparseVector& theta, double sigma,
                        std::uint64_t seed);

/// Designs and noise for one trial; responses are formed per theta_min.
struct TrialData {
  std::vector<DesignPtr> designs;
  std::vector<Vector> noise;
};

/// Draws `machines` designs and noise vectors for trial `trial`. With
/// fixed_design the design streams ignore the trial index.
TrialData generate_trial(const GenConfig& cfg, const CovarianceFactor& factor,
                         std::uint64_t trial, Index machines, bool fixed_design = false);

std::vector<RegressionShard> make_shards(const TrialData& data, const SparseVector& theta,
                                         double sigma);

// Binary shard file: "DOMP" | version u16 | n u32 | d u32 | seed u64, then
// X row-major as f64 and y as f64, all little-endian.
inline constexpr std::uint16_t kShardFileVersion = 1;

void write_shard(const std::filesystem::path& path, const RegressionShard& shard,
                 std::uint64_t seed);

struct ShardFile {
  std::uint64_t seed = 0;
  Matrix X;
  Vector y;
};

ShardFile read_shard(const std::filesystem::path& path);

}  // namespace domp
