#include "domp/datagen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

namespace domp {

void GenConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (d < 2) fail("d must be at least 2");
  if (n < 1) fail("n must be at least 1");
  if (M < 1) fail("M must be at least 1");
  if (K < 1 || K > d) fail("K must lie in [1, d]");
  if (!(alpha >= 0.0 && alpha < 1.0)) fail("alpha must lie in [0, 1)");
  if (!(sigma >= 0.0)) fail("sigma must be non-negative");
  if (!(theta_min > 0.0)) fail("theta_min must be positive");
  if (!support.empty()) {
    if (support.size() != K) fail("support must list K indices");
    std::set<Index> seen(support.begin(), support.end());
    if (seen.size() != K || *seen.rbegin() >= d) fail("support indices must be distinct and < d");
  }
}

CovarianceFactor::CovarianceFactor(Index d, double alpha) : d_(d), alpha_(alpha) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
  }
  const auto dd = static_cast<Eigen::Index>(d);
  if (alpha == 0.0) {
    lower_ = Matrix::Identity(dd, dd);
    return;
  }
  Matrix sigma(dd, dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    for (Eigen::Index j = 0; j < dd; ++j) {
      sigma(i, j) = std::pow(alpha, static_cast<double>(std::abs(i - j)));
    }
  }
  lower_ = sigma.llt().matrixL();
}

void CovarianceFactor::apply(const double* z, double* out) const {
  if (alpha_ == 0.0) {
    std::copy(z, z + d_, out);
    return;
  }
  const double c = std::sqrt(1.0 - alpha_ * alpha_);
  out[0] = z[0];
  for (Index i = 1; i < d_; ++i) out[i] = alpha_ * out[i - 1] + c * z[i];
}

CovarianceFactor toeplitz_covariance(Index d, double alpha) { return CovarianceFactor(d, alpha); }

DesignMatrix sample_design(Index n, Index d, const CovarianceFactor& factor, std::uint64_t seed) {
  if (factor.dim() != d) throw Error(ErrorCode::DimensionMismatch, "factor dimension != d");
  NormalStream normal(seed);
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> z(d), row(d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) z[j] = normal.next();
    factor.apply(z.data(), row.data());
    for (Index j = 0; j < d; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return DesignMatrix(std::move(X));
}

SparseVector make_sparse_theta(const GenConfig& cfg) {
  if (!(cfg.theta_min > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta_min must be positive");
  }
  std::vector<double> values;
  if (cfg.pattern == ThetaPattern::Paper) {
    if (cfg.K != 3) throw Error(ErrorCode::PatternMismatch, "pattern \"paper\" needs K = 3");
    values = {cfg.theta_min, -2.0 * cfg.theta_min, 3.0 * cfg.theta_min};
  } else {
    if (cfg.custom_values.size() != cfg.K) {
      throw Error(ErrorCode::PatternMismatch, "custom pattern needs exactly K values");
    }
    // Custom values are multiples of theta_min, as with pattern "paper".
    for (double v : cfg.custom_values) {
      if (v == 0.0) throw Error(ErrorCode::PatternMismatch, "custom values must be nonzero");
      values.push_back(v * cfg.theta_min);
    }
  }
  std::vector<Index> positions = cfg.support;
  if (positions.empty()) {
    for (Index j = 0; j < cfg.K; ++j) positions.push_back(j);
  }
  if (positions.size() != cfg.K) {
    throw Error(ErrorCode::PatternMismatch, "support must list K indices");
  }
  for (Index j : positions) {
    if (j >= cfg.d) throw Error(ErrorCode::InvalidArgument, "support index >= d");
  }
  return SparseVector{cfg.d, SupportSet(positions), std::move(values)};
}

Vector noise_vector(Index n, std::uint64_t seed) {
  NormalStream normal(seed);
  Vector xi(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal.next();
  return xi;
}

Vector responses_from_noise(const DesignMatrix& X, const SparseVector& theta, double sigma,
                            const Vector& xi) {
  if (theta.dim != X.cols() || static_cast<Index>(xi.size()) != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "theta/noise dimensions do not match the design");
  }
  Vector y = Vector::Zero(xi.size());
  for (Index p = 0; p < theta.support.size(); ++p) {
    y += theta.values[p] * X.column(theta.support[p]);
  }
  if (sigma != 0.0) y += sigma * xi;
  return y;
}

Vector sample_responses(const DesignMatrix& X, const SparseVector& theta, double sigma,
                        std::uint64_t seed) {
  return responses_from_noise(X, theta, sigma, noise_vector(X.rows(), seed));
}

TrialData generate_trial(const GenConfig& cfg, const CovarianceFactor& factor,
                         std::uint64_t trial, Index machines, bool fixed_design) {
  TrialData data;
  data.designs.reserve(machines);
  data.noise.reserve(machines);
  const std::uint64_t design_trial = fixed_design ? 0 : trial;
  for (Index m = 0; m < machines; ++m) {
    data.designs.push_back(std::make_shared<const DesignMatrix>(sample_design(
        cfg.n, cfg.d, factor, derive_seed(cfg.master_seed, design_trial, m, StreamPurpose::Design))));
    data.noise.push_back(
        noise_vector(cfg.n, derive_seed(cfg.master_seed, trial, m, StreamPurpose::Noise)));
  }
  return data;
}

std::vector<RegressionShard> make_shards(const TrialData& data, const SparseVector& theta,
                                         double sigma) {
  std::vector<RegressionShard> shards;
  shards.reserve(data.designs.size());
  for (Index m = 0; m < data.designs.size(); ++m) {
    shards.emplace_back(data.designs[m],
                        responses_from_noise(*data.designs[m], theta, sigma, data.noise[m]),
                        static_cast<int>(m));
  }
  return shards;
}

namespace {

void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_le(std::istream& is, int bytes, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = is.get();
    if (c == EOF) throw Error(ErrorCode::Io, path.string() + ": truncated shard file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

}  // namespace

void write_shard(const std::filesystem::path& path, const RegressionShard& shard,
                 std::uint64_t seed) {
  const Index n = shard.X().rows();
  const Index d = shard.X().cols();
  if (n > 0xFFFFFFFFu || d > 0xFFFFFFFFu) {
    throw Error(ErrorCode::InvalidArgument, "shard too large for u32 header fields");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
  os.write("DOMP", 4);
  put_le(os, kShardFileVersion, 2);
  put_le(os, n, 4);
  put_le(os, d, 4);
  put_le(os, seed, 8);
  const Matrix& X = shard.X().entries();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) put_le(os, std::bit_cast<std::uint64_t>(X(i, j)), 8);
  }
  for (Eigen::Index i = 0; i < shard.response.size(); ++i) {
    put_le(os, std::bit_cast<std::uint64_t>(shard.response(i)), 8);
  }
  if (!os) throw Error(ErrorCode::Io, path.string() + ": write failed");
}

ShardFile read_shard(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, path.string() + ": cannot open for reading");
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "DOMP") {
    throw Error(ErrorCode::Io, path.string() + ": bad magic");
  }
  const auto version = get_le(is, 2, path);
  if (version != kShardFileVersion) {
    throw Error(ErrorCode::Io, path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto n = static_cast<Eigen::Index>(get_le(is, 4, path));
  const auto d = static_cast<Eigen::Index>(get_le(is, 4, path));
  ShardFile out;
  out.seed = get_le(is, 8, path);
  out.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out.X(i, j) = std::bit_cast<double>(get_le(is, 8, path));
  }
  out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.y(i) = std::bit_cast<double>(get_le(is, 8, path));
  return out;
}

}  // namespace domp
