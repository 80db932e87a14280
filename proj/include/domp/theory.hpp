#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domp/core.hpp"

// All "log d" terms below are natural logarithms. Communication budgets use
// ceil(log2 d) bits per index (see protocol.hpp).

namespace domp::theory {

struct TheoryParams {
  Index d = 2;
  Index K = 1;
  Index n = 1;
  double sigma = 1.0;
  double mu_max = 0.0;
  double theta_min_scaled = 1.0;
  double epsilon = 0.5;
};

/// P[Z > t] for standard normal Z.
double phi_c(double t);
/// log P[Z > t]; finite for every finite t (continued fraction above t = 8).
double log_phi_c(double t);

double theta_crit(double mu, Index n, Index d, Index K, double sigma);
double snr_r(const TheoryParams& p);

/// Per-machine SNR over the undetected support S \ S_hat.
double rho_m(const RegressionShard& shard, const SparseVector& theta,
             const SupportSet& S_hat, const TheoryParams& p);

double nu_a(Index K, double mu);
double nu_b(Index K, double mu);
/// Worst-case projection leakage over |S_hat| = K_d.
double mu_d(Index K_d, double mu);

/// Lower bound on the probability that a machine votes for an undetected
/// support index.
double f_prob(Index d, Index K, double mu, double r);
double log_f_prob(Index d, Index K, double mu, double r);
/// Dedicated sparsity-one form.
double f_prob_k1(Index d, double mu, double r);

struct MachineCountOptions {
  double cap = 1e12;
};

/// ceil(8 ln d / F). Throws Infeasible (with the log value in the message)
/// above the cap.
std::int64_t machines_needed(Index d, Index K, double mu, double r,
                             const MachineCountOptions& opts = {});
/// log(8 ln d) - log F, finite even when the count itself would overflow.
double log_machines_needed(Index d, Index K, double mu, double r);

struct QQuantities {
  double Q0 = 0, Q1 = 0, Q2 = 0, nu_a = 1, nu_b = 1, mu_d_max = 0;
};

/// K = 1 evaluates the dedicated sparsity-one displays; K >= 2 the general
/// ones.
QQuantities q_quantities(Index d, Index K, double mu, double epsilon);
/// General-K displays evaluated at any K, including K = 1.
QQuantities q_quantities_general(Index d, Index K, double mu, double epsilon);

struct EpsilonBounds {
  double lower = 0;
  double upper = 1;
};

/// Open interval for epsilon: sqrt(mu)/(1+sqrt(mu)) at K = 1 and the looser
/// sqrt(2 mu)/(1+sqrt(2 mu)) for K >= 2.
EpsilonBounds epsilon_bounds(double mu, Index K);
/// Tighter K-dependent lower bound sqrt(mu+1-nu_a)/(1+sqrt(mu+1-nu_a)).
EpsilonBounds epsilon_bounds_tight(double mu, Index K);

/// Vote threshold used to separate support from non-support indices.
double threshold_tc(std::span<const double> rhos, Index d, Index K, double mu, double r);

struct TheoryReport {
  TheoryParams params;
  std::int64_t machines_available = 0;

  double theta_crit = 0, r = 0, F = 0;
  double M_tilde = 0;       // ceil(8 ln d / F) or +inf when infeasible
  double log_M_tilde = 0;
  double Q0 = 0, Q1 = 0, Q2 = 0, nu_a = 0, nu_b = 0, mu_d_max = 0;
  double eps_lower_bound = 0;
  double r_threshold = 0;   // min{Q1, Q2}^2

  bool max_mip_ok = false;   // (2K-1) mu < 1
  bool coherence_ok = false; // K = 1: mu < 1/2; else (4K-1) mu - 2K mu^2 < 1
  bool eps_ok = false;
  bool snr_ok = false;
  bool machines_ok = false;
  bool feasible = false;     // M_tilde below the cap
  std::int64_t machines_needed = 0;   // M_tilde (K = 1) or K^2 M_tilde
  std::int64_t machines_per_round = 0;
  std::uint64_t comm_bits_predicted = 0;
  std::vector<std::string> notes;

  bool all_ok() const { return coherence_ok && eps_ok && snr_ok && machines_ok; }
};

TheoryReport check_theorem(const TheoryParams& p, std::int64_t machines_available);

/// Phi^c(a+b) < sqrt(2) exp(-b^2/2) Phi^c(a), compared in the log domain.
bool tail_lemma_check(double a, double b);

struct ProjectionDiagnostics {
  double residual_norm_sq = 0;   // ||(I - P_S) x_i||^2
  double cross = 0;              // |<x_k, (I - P_S) x_i>|
  double double_proj_sq = 0;     // ||(I - P_S)(I - P_k) x_i||^2
  double mu = 0;
  double mu_d = 0;
  double norm_lower = 0, norm_upper = 1;
  double cross_upper = 0;
  double double_proj_lower = 0;

  /// Smallest signed slack across the three inequalities.
  double min_slack() const;
};

/// Projection quantities on the unit-normalized columns of X.
ProjectionDiagnostics projection_bounds_check(const DesignMatrix& X, const SupportSet& S_hat,
                                              Index i, Index k, const LinalgOptions& opts = {});

std::string format_report(const TheoryReport& report);
std::string format_report_record(const TheoryReport& report);

}  // namespace domp::theory
