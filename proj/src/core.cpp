#include "domp/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace domp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::FullSupport: return "FullSupport";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::NoVotes: return "NoVotes";
    case ErrorCode::InsufficientMachines: return "InsufficientMachines";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::MipViolated: return "MipViolated";
    case ErrorCode::EmptyResidualSupport: return "EmptyResidualSupport";
    case ErrorCode::DegenerateDimension: return "DegenerateDimension";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::RhoBelowR: return "RhoBelowR";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

DesignMatrix::DesignMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw Error(ErrorCode::InvalidArgument, "design matrix must be non-empty");
  }
  norms_ = entries_.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < norms_.size(); ++j) {
    if (!(norms_(j) > 0.0)) {
      throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j));
    }
  }
}

SupportSet::SupportSet(std::initializer_list<Index> indices) {
  for (Index j : indices) insert(j);
}

SupportSet::SupportSet(std::vector<Index> indices) {
  for (Index j : indices) insert(j);
}

void SupportSet::insert(Index j) {
  if (contains(j)) {
    throw Error(ErrorCode::InvalidArgument,
                "duplicate support index " + std::to_string(j));
  }
  indices_.push_back(j);
}

bool SupportSet::contains(Index j) const noexcept {
  return std::find(indices_.begin(), indices_.end(), j) != indices_.end();
}

std::vector<Index> SupportSet::sorted() const {
  auto out = indices_;
  std::sort(out.begin(), out.end());
  return out;
}

bool SupportSet::same_set(const SupportSet& other) const {
  return size() == other.size() && sorted() == other.sorted();
}

Vector SparseVector::dense() const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (Index p = 0; p < support.size(); ++p) {
    out(static_cast<Eigen::Index>(support[p])) = values[p];
  }
  return out;
}

double SparseVector::at(Index j) const {
  for (Index p = 0; p < support.size(); ++p) {
    if (support[p] == j) return values[p];
  }
  return 0.0;
}

RegressionShard::RegressionShard(DesignPtr d, Vector y, int id)
    : design(std::move(d)), response(std::move(y)), machine_id(id) {
  if (!design) throw Error(ErrorCode::InvalidArgument, "null design");
  if (static_cast<Index>(response.size()) != design->rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "response length " + std::to_string(response.size()) +
                    " != design rows " + std::to_string(design->rows()));
  }
}

NormalizedDesign column_normalize(const DesignMatrix& X) {
  Matrix scaled = X.entries();
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    scaled.col(j) /= X.column_norms()(j);
  }
  return {DesignMatrix(std::move(scaled)), X.column_norms()};
}

double coherence(const DesignMatrix& X) {
  if (X.cols() < 2) {
    throw Error(ErrorCode::Degenerate, "coherence needs at least two columns");
  }
  const Matrix gram = X.entries().transpose() * X.entries();
  const Vector& norms = X.column_norms();
  double mu = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j) {
      mu = std::max(mu, std::abs(gram(i, j)) / (norms(i) * norms(j)));
    }
  }
  // Rounding can push parallel columns a hair above one.
  return std::min(mu, 1.0);
}

namespace {

template <typename Range, typename Get>
double max_coherence_impl(const Range& designs, Get get) {
  if (designs.empty()) throw Error(ErrorCode::EmptyList, "no designs");
  const Index d = get(designs.front()).cols();
  double mu = 0.0;
  for (const auto& item : designs) {
    const DesignMatrix& X = get(item);
    if (X.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "designs differ in column count");
    }
    mu = std::max(mu, coherence(X));
  }
  return mu;
}

}  // namespace

double max_coherence(std::span<const DesignMatrix> designs) {
  return max_coherence_impl(designs, [](const DesignMatrix& X) -> const DesignMatrix& { return X; });
}

double max_coherence(std::span<const DesignPtr> designs) {
  return max_coherence_impl(designs, [](const DesignPtr& p) -> const DesignMatrix& { return *p; });
}

SparseVector least_squares_on_support(const DesignMatrix& X, const Vector& y,
                                      const SupportSet& S,
                                      const LinalgOptions& opts) {
  if (static_cast<Index>(y.size()) != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "response length != design rows");
  }
  SparseVector out{X.cols(), S, std::vector<double>(S.size(), 0.0)};
  if (S.empty()) return out;
  if (S.size() > X.rows()) {
    throw Error(ErrorCode::SupportTooLarge,
                "|S| = " + std::to_string(S.size()) + " > n = " + std::to_string(X.rows()));
  }

  const auto k = static_cast<Eigen::Index>(S.size());
  Matrix sub(X.entries().rows(), k);
  for (Eigen::Index p = 0; p < k; ++p) {
    const Index j = S[static_cast<Index>(p)];
    if (j >= X.cols()) {
      throw Error(ErrorCode::InvalidArgument, "support index " + std::to_string(j) + " out of range");
    }
    sub.col(p) = X.column(j);
  }

  const Matrix gram = sub.transpose() * sub;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > opts.singular_tol * hi)) {
    throw Error(ErrorCode::SingularGram, "restricted Gram eigenvalue ratio " +
                                             std::to_string(lo / hi) + " on |S| = " +
                                             std::to_string(S.size()));
  }

  const Vector coef = sub.householderQr().solve(y);
  for (Eigen::Index p = 0; p < k; ++p) out.values[static_cast<Index>(p)] = coef(p);
  return out;
}

Vector residual(const DesignMatrix& X, const Vector& y, const SparseVector& theta) {
  Vector r = y;
  for (Index p = 0; p < theta.support.size(); ++p) {
    r -= theta.values[p] * X.column(theta.support[p]);
  }
  return r;
}

}  // namespace domp
