// Shared helpers and independent oracles for the unit tests. Random test
// instances come from the standard library generators, not from domp::rng.
#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "domp/core.hpp"
#include "domp/omp.hpp"

namespace testing {

using domp::Index;
using domp::Matrix;
using domp::Vector;

inline Matrix gaussian_matrix(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = z(gen);
  return X;
}

inline Vector gaussian_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(gen);
  return v;
}

inline domp::DesignPtr design_ptr(Matrix X) {
  return std::make_shared<const domp::DesignMatrix>(std::move(X));
}

// Plain loop column norm.
inline double naive_norm(const Matrix& X, Eigen::Index j) {
  double s = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) s += X(i, j) * X(i, j);
  return std::sqrt(s);
}

inline double naive_coherence(const Matrix& X) {
  double best = 0;
  for (Eigen::Index a = 0; a < X.cols(); ++a)
    for (Eigen::Index b = a + 1; b < X.cols(); ++b) {
      double dot = 0;
      for (Eigen::Index i = 0; i < X.rows(); ++i) dot += X(i, a) * X(i, b);
      best = std::max(best, std::abs(dot) / (naive_norm(X, a) * naive_norm(X, b)));
    }
  return best;
}

// Gaussian elimination with partial pivoting on a copy of A.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

// Normal equations X_S^T X_S z = X_S^T y solved by elimination.
inline std::vector<double> normal_equations(const Matrix& X, const Vector& y,
                                            const std::vector<Index>& S) {
  const std::size_t k = S.size();
  std::vector<std::vector<double>> G(k, std::vector<double>(k));
  std::vector<double> rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double s = 0;
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        s += X(i, static_cast<Eigen::Index>(S[a])) * X(i, static_cast<Eigen::Index>(S[b]));
      G[a][b] = s;
    }
    double s = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) s += X(i, static_cast<Eigen::Index>(S[a])) * y(i);
    rhs[a] = s;
  }
  return gauss_solve(G, rhs);
}

// argmax_i |<x_i, r>| / ||x_i|| over i not in S, first index on ties, with
// r from the normal-equations oracle.
inline Index exhaustive_step(const Matrix& X, const Vector& y, const std::vector<Index>& S) {
  Vector r = y;
  if (!S.empty()) {
    const auto z = normal_equations(X, y, S);
    for (std::size_t a = 0; a < S.size(); ++a) r -= z[a] * X.col(static_cast<Eigen::Index>(S[a]));
  }
  Index best = X.cols();
  double best_val = -1;
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    bool in_s = false;
    for (Index s : S) in_s = in_s || s == static_cast<Index>(i);
    if (in_s) continue;
    double dot = 0;
    for (Eigen::Index t = 0; t < X.rows(); ++t) dot += X(t, i) * r(t);
    const double v = std::abs(dot) / naive_norm(X, i);
    if (v > best_val) {
      best_val = v;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

// Gaussian design with coherence below 1/(2K-1), redrawn until it qualifies.
inline Matrix mip_design(Index n, Index d, Index K, std::uint64_t seed) {
  const double bound = 1.0 / (2.0 * static_cast<double>(K) - 1.0);
  for (std::uint64_t attempt = 0;; ++attempt) {
    Matrix X = gaussian_matrix(n, d, seed * 1000003ULL + attempt);
    if (naive_coherence(X) < bound) return X;
  }
}

// Design under max-MIP for a random K in 1..4, a random support S of size K,
// S_hat a random proper subset of S, and distinct i, k outside S_hat.
struct ProjectionInstance {
  Matrix X;
  domp::SupportSet S_hat;
  Index i = 0, k = 0;
  Index K = 1;
};

inline ProjectionInstance projection_instance(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  ProjectionInstance out;
  out.K = 1 + gen() % 4;
  const Index d = out.K + 2 + gen() % 8;
  out.X = mip_design(1000, d, out.K, gen());
  std::vector<Index> perm(d);
  for (Index j = 0; j < d; ++j) perm[j] = j;
  std::shuffle(perm.begin(), perm.end(), gen);
  // perm[0..K) is S; its first |S_hat| entries form S_hat.
  const Index kd = gen() % out.K;
  for (Index j = 0; j < kd; ++j) out.S_hat.insert(perm[j]);
  std::vector<Index> rest(perm.begin() + static_cast<long>(kd), perm.end());
  std::shuffle(rest.begin(), rest.end(), gen);
  out.i = rest[0];
  out.k = rest[1];
  return out;
}

}  // namespace testing
