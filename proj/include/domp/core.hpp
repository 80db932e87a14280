#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "domp/error.hpp"

namespace domp {

using Index = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold on the restricted Gram spectrum below which a least
/// squares problem is reported as singular.
struct LinalgOptions {
  double singular_tol = 1e-10;
};

/// Immutable n x d design with cached Euclidean column norms. Zero columns
/// are rejected at construction.
class DesignMatrix {
 public:
  explicit DesignMatrix(Matrix entries);

  Index rows() const noexcept { return static_cast<Index>(entries_.rows()); }
  Index cols() const noexcept { return static_cast<Index>(entries_.cols()); }
  const Matrix& entries() const noexcept { return entries_; }
  const Vector& column_norms() const noexcept { return norms_; }
  double column_norm(Index j) const { return norms_(static_cast<Eigen::Index>(j)); }
  auto column(Index j) const { return entries_.col(static_cast<Eigen::Index>(j)); }

 private:
  Matrix entries_;
  Vector norms_;
};

using DesignPtr = std::shared_ptr<const DesignMatrix>;

/// Ordered set of distinct column indices; insertion order is preserved.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::initializer_list<Index> indices);
  explicit SupportSet(std::vector<Index> indices);

  /// Appends `j`; throws InvalidArgument if already present.
  void insert(Index j);
  bool contains(Index j) const noexcept;
  Index size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index operator[](Index pos) const { return indices_[pos]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  /// Indices in ascending order.
  std::vector<Index> sorted() const;
  bool same_set(const SupportSet& other) const;
  /// Exact equality including order.
  bool operator==(const SupportSet& other) const = default;

 private:
  std::vector<Index> indices_;
};

/// Vector of dimension d with explicit entries on `support` and zeros
/// elsewhere.
struct SparseVector {
  Index dim = 0;
  SupportSet support;
  std::vector<double> values;

  Vector dense() const;
  /// Value at coordinate j (zero off-support).
  double at(Index j) const;
};

/// One machine's data: design, response and identity.
struct RegressionShard {
  RegressionShard(DesignPtr design, Vector response, int machine_id = 0);

  DesignPtr design;
  Vector response;
  int machine_id = 0;

  const DesignMatrix& X() const noexcept { return *design; }
};

struct NormalizedDesign {
  DesignMatrix matrix;
  Vector norms;
};

NormalizedDesign column_normalize(const DesignMatrix& X);

/// Largest absolute normalized inner product between distinct columns.
double coherence(const DesignMatrix& X);

double max_coherence(std::span<const DesignMatrix> designs);
double max_coherence(std::span<const DesignPtr> designs);

/// Minimizer of ||y - X z|| over z supported on S.
SparseVector least_squares_on_support(const DesignMatrix& X, const Vector& y,
                                      const SupportSet& S,
                                      const LinalgOptions& opts = {});

/// y - X * theta, evaluated only over theta's support.
Vector residual(const DesignMatrix& X, const Vector& y, const SparseVector& theta);

}  // namespace domp
