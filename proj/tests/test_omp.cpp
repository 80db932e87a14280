#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "domp/omp.hpp"
#include "support.hpp"

using namespace domp;
using testing::design_ptr;
using testing::gaussian_matrix;
using testing::gaussian_vector;

namespace {

// Noiseless y = X theta with theta_S = (1, -2, 3, ...) on the first K indices
// of a shuffled support.
struct NoiselessInstance {
  RegressionShard shard;
  SupportSet support;
};

NoiselessInstance noiseless(Index n, Index d, Index K, std::uint64_t seed) {
  Matrix X = testing::mip_design(n, d, K, seed);
  std::mt19937_64 gen(seed);
  std::vector<Index> perm(d);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(d));
  SupportSet S;
  for (Index k = 0; k < K; ++k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    theta(static_cast<Eigen::Index>(perm[k])) = sign * static_cast<double>(k + 1);
    S.insert(perm[k]);
  }
  Vector y = X * theta;
  return {RegressionShard(design_ptr(std::move(X)), std::move(y)), S};
}

}  // namespace

TEST_CASE("omp_step examples") {
  SUBCASE("identity design, y = e3") {
    Vector y = Vector::Zero(6);
    y(3) = 1;
    const RegressionShard s(design_ptr(Matrix::Identity(6, 6)), y);
    CHECK(omp_step(s, {}).index == 3);
  }
  SUBCASE("noiseless K = 1 with unit columns") {
    Matrix X = gaussian_matrix(30, 8, 5);
    for (Eigen::Index j = 0; j < 8; ++j) X.col(j).normalize();
    const Vector y = 5.0 * X.col(1);
    const RegressionShard s(design_ptr(X), y);
    const auto step = omp_step(s, {});
    CHECK(step.index == 1);
    CHECK(step.correlation == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("10x6 with S = {2} against the exhaustive scan") {
    const Matrix X = gaussian_matrix(10, 6, 9);
    const Vector y = gaussian_vector(10, 10);
    const RegressionShard s(design_ptr(X), y);
    CHECK(omp_step(s, SupportSet{2}).index == testing::exhaustive_step(X, y, {2}));
  }
}

TEST_CASE("omp_step ties go to the smallest index") {
  Matrix X = Matrix::Identity(4, 4);
  Vector y(4);
  y << 0, 2, 0, -2;
  const RegressionShard s(design_ptr(X), y);
  CHECK(omp_step(s, {}).index == 1);
  CHECK(omp_step(s, SupportSet{1}).index == 3);
}

TEST_CASE("omp_step refuses a full support") {
  const RegressionShard s(design_ptr(Matrix::Identity(3, 3)), Vector::Ones(3));
  try {
    omp_step(s, SupportSet{0, 1, 2});
    FAIL("full support accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FullSupport);
  }
}

TEST_CASE("omp_step equals the exhaustive scan on 1000 instances") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 6 + gen() % 20;
    const Index d = 3 + gen() % 20;
    const Matrix X = gaussian_matrix(n, d, gen());
    const Vector y = gaussian_vector(n, gen());
    std::vector<Index> perm(d);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    const Index k = gen() % std::min(n, d);
    std::vector<Index> S(perm.begin(), perm.begin() + static_cast<long>(k));
    const RegressionShard s(design_ptr(X), y);
    CHECK(omp_step(s, SupportSet(S)).index == testing::exhaustive_step(X, y, S));
  }
}

TEST_CASE("run_omp") {
  const RegressionShard s(design_ptr(gaussian_matrix(12, 9, 1)), gaussian_vector(12, 2));
  CHECK(run_omp(s, 0).chosen.empty());

  const auto a = run_omp(s, 5);
  const auto b = run_omp(s, 5);
  CHECK(a.chosen == b.chosen);
  CHECK(a.correlations == b.correlations);
  CHECK(a.chosen.size() == 5);
  CHECK(a.correlations.size() == 5);

  CHECK_THROWS_AS(run_omp(s, 10), Error);
}

TEST_CASE("traces never repeat an index") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Index n = 15, d = 12;
    const RegressionShard s(design_ptr(gaussian_matrix(n, d, seed)), gaussian_vector(n, seed + 1));
    const auto trace = run_omp(s, 12);
    std::vector<Index> sorted = trace.chosen.sorted();
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK(sorted.size() == 12);
  }
}

TEST_CASE("noiseless exact recovery under MIP, K = 1..3") {
  for (Index K = 1; K <= 3; ++K) {
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto inst = noiseless(400, 16, K, 1000 * K + seed);
      recovered += run_omp(inst.shard, K).chosen.same_set(inst.support) ? 1 : 0;
    }
    CHECK(recovered == 100);
  }
}

TEST_CASE("permuting columns permutes the chosen indices") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 20, d = 10;
    const Matrix X = gaussian_matrix(n, d, gen());
    const Vector y = gaussian_vector(n, gen());
    std::vector<Index> perm(d);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    // Column j of Xp is column perm[j] of X.
    Matrix Xp(X.rows(), X.cols());
    for (Index j = 0; j < d; ++j) Xp.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(perm[j]));
    const auto a = run_omp(RegressionShard(design_ptr(X), y), 4).chosen;
    const auto b = run_omp(RegressionShard(design_ptr(Xp), y), 4).chosen;
    for (Index t = 0; t < 4; ++t) CHECK(perm[b[t]] == a[t]);
  }
}

TEST_CASE("centralized OMP") {
  const RegressionShard one(design_ptr(gaussian_matrix(10, 8, 4)), gaussian_vector(10, 5));
  const std::vector<RegressionShard> single{one};
  CHECK(centralized_omp(single, 3) == run_omp(one, 3).chosen);

  const auto inst = noiseless(50, 12, 2, 8);
  const std::vector<RegressionShard> twice{inst.shard, inst.shard};
  CHECK(centralized_omp(twice, 2).same_set(run_omp(inst.shard, 2).chosen));

  const RegressionShard other(design_ptr(gaussian_matrix(10, 9, 6)), gaussian_vector(10, 7));
  const std::vector<RegressionShard> mixed{one, other};
  try {
    centralized_omp(mixed, 2);
    FAIL("dimension mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }

  const auto stacked = stack_shards(twice);
  CHECK(stacked.X().rows() == 100);
  CHECK(stacked.response.head(50) == inst.shard.response);
}

TEST_CASE("stacking ten noisy machines beats one") {
  // Unit-variance noise, K = 1, d = 50, n = 20. At theta = 0.55 one machine
  // succeeds about a third of the time; the stack almost always.
  const Index n = 20, d = 50, M = 10;
  const double theta = 0.55;
  int single_ok = 0, stacked_ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<RegressionShard> shards;
    for (Index m = 0; m < M; ++m) {
      Matrix X = gaussian_matrix(n, d, seed * 100 + m);
      Vector y = theta * X.col(7) + gaussian_vector(n, 77777 + seed * 100 + m);
      shards.emplace_back(design_ptr(std::move(X)), std::move(y), static_cast<int>(m));
    }
    single_ok += run_omp(shards[0], 1).chosen == SupportSet{7} ? 1 : 0;
    stacked_ok += centralized_omp(shards, 1) == SupportSet{7} ? 1 : 0;
  }
  MESSAGE("single " << single_ok << "/100, stacked " << stacked_ok << "/100");
  CHECK(single_ok < 95);
  CHECK(stacked_ok >= 95);
}
