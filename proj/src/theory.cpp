#include "domp/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace domp::theory {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_d(Index d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "d must be at least 2");
  return std::log(static_cast<double>(d));
}

void require_mu(double mu) {
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "coherence must lie in [0, 1)");
  }
}

void require_max_mip(Index K, double mu) {
  require_mu(mu);
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (!((2.0 * static_cast<double>(K) - 1.0) * mu < 1.0)) {
    throw Error(ErrorCode::MipViolated,
                "(2K-1) mu = " + std::to_string((2.0 * K - 1.0) * mu) + " is not below 1");
  }
}

/// 1 - sqrt(nu_b / (pi ln d)) d^(1 - 1/nu_b): the union-bound factor of F.
double union_factor(double ln_d, double nb) {
  return 1.0 - std::sqrt(nb / (std::numbers::pi * ln_d)) * std::exp((1.0 - 1.0 / nb) * ln_d);
}

double union_factor_k1(double ln_d, double mu) {
  const double g = 1.0 - mu * mu;
  return 1.0 - std::sqrt(g) / std::sqrt(std::numbers::pi * ln_d) * std::exp(-mu * mu / g * ln_d);
}

double positive_factor(double value, Index d) {
  if (!(value > 0.0)) {
    throw Error(ErrorCode::DegenerateDimension,
                "union-bound factor non-positive at d = " + std::to_string(d));
  }
  return value;
}

double tail_argument(double ln_d, double na, double mu, double r) {
  return (1.0 - std::sqrt(r)) / (std::sqrt(na) * (1.0 - mu)) * std::sqrt(2.0 * ln_d);
}

}  // namespace

double phi_c(double t) {
  if (t > 8.0) return std::exp(log_phi_c(t));
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

double log_phi_c(double t) {
  if (t <= 8.0) return std::log(0.5 * std::erfc(t / std::numbers::sqrt2));
  // Mills ratio R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))), evaluated from
  // the tail; 80 levels are far past convergence for t > 8.
  double tail = t;
  for (int k = 80; k >= 1; --k) tail = t + k / tail;
  return -0.5 * t * t - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(tail);
}

double theta_crit(double mu, Index n, Index d, Index K, double sigma) {
  (void)n;  // the threshold depends on n only through unit-norm scaling
  require_max_mip(K, mu);
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  return sigma * std::sqrt(2.0 * log_d(d)) / (1.0 - (2.0 * static_cast<double>(K) - 1.0) * mu);
}

double snr_r(const TheoryParams& p) {
  const double tc = theta_crit(p.mu_max, p.n, p.d, p.K, p.sigma);
  const double ratio = p.theta_min_scaled / tc;
  return ratio * ratio;
}

double rho_m(const RegressionShard& shard, const SparseVector& theta, const SupportSet& S_hat,
             const TheoryParams& p) {
  double best = -1.0;
  for (Index pos = 0; pos < theta.support.size(); ++pos) {
    const Index k = theta.support[pos];
    if (S_hat.contains(k) || theta.values[pos] == 0.0) continue;
    best = std::max(best, shard.X().column_norm(k) * std::abs(theta.values[pos]));
  }
  if (best < 0.0) throw Error(ErrorCode::EmptyResidualSupport, "S \\ S_hat is empty");
  const double ratio = best / theta_crit(p.mu_max, p.n, p.d, p.K, p.sigma);
  return ratio * ratio;
}

double mu_d(Index K_d, double mu) {
  if (K_d == 0) return 0.0;
  const double kd = static_cast<double>(K_d);
  return kd * mu * mu / (1.0 - (kd - 1.0) * mu);
}

double nu_a(Index K, double mu) {
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  return 1.0 - mu_d(K - 1, mu);
}

double nu_b(Index K, double mu) {
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  return 1.0 - mu * mu - mu_d(K - 1, mu) * (1.0 + mu) * (1.0 + mu);
}

double f_prob(Index d, Index K, double mu, double r) {
  require_max_mip(K, mu);
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive");
  const double ln_d = log_d(d);
  const double first = positive_factor(union_factor(ln_d, nu_b(K, mu)), d);
  return first * phi_c(tail_argument(ln_d, nu_a(K, mu), mu, r));
}

double log_f_prob(Index d, Index K, double mu, double r) {
  require_max_mip(K, mu);
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive");
  const double ln_d = log_d(d);
  const double first = positive_factor(union_factor(ln_d, nu_b(K, mu)), d);
  return std::log(first) + log_phi_c(tail_argument(ln_d, nu_a(K, mu), mu, r));
}

double f_prob_k1(Index d, double mu, double r) {
  require_max_mip(1, mu);
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive");
  const double ln_d = log_d(d);
  const double first = positive_factor(union_factor_k1(ln_d, mu), d);
  return first * phi_c((1.0 - std::sqrt(r)) / (1.0 - mu) * std::sqrt(2.0 * ln_d));
}

double log_machines_needed(Index d, Index K, double mu, double r) {
  return std::log(8.0 * log_d(d)) - log_f_prob(d, K, mu, r);
}

std::int64_t machines_needed(Index d, Index K, double mu, double r,
                             const MachineCountOptions& opts) {
  const double log_value = log_machines_needed(d, K, mu, r);
  // The integer range is a hard ceiling whatever the configured cap.
  const double cap = std::min(opts.cap, 9.0e18);
  if (log_value > std::log(cap)) {
    throw Error(ErrorCode::Infeasible, "log M = " + std::to_string(log_value));
  }
  return static_cast<std::int64_t>(std::ceil(8.0 * log_d(d) / f_prob(d, K, mu, r)));
}

QQuantities q_quantities_general(Index d, Index K, double mu, double epsilon) {
  require_mu(mu);
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  const double k = static_cast<double>(K);
  if (!((4.0 * k - 1.0) * mu - 2.0 * k * mu * mu < 1.0)) {
    throw Error(ErrorCode::HypothesisViolated, "(4K-1) mu - 2K mu^2 < 1 fails");
  }
  const double ln_d = log_d(d);
  QQuantities q;
  q.nu_a = nu_a(K, mu);
  q.nu_b = nu_b(K, mu);
  q.mu_d_max = mu_d(K - 1, mu);
  const double first = positive_factor(union_factor(ln_d, q.nu_b), d);
  q.Q0 = (std::log(44.0 * std::numbers::sqrt2 * k) - std::log(first)) / ln_d;

  const double sa = std::sqrt(q.nu_a);
  const double sq0 = std::sqrt(q.Q0);
  q.Q1 = (1.0 - (1.0 - mu) * sa * ((1.0 - epsilon) * std::sqrt(1.0 - mu) - sq0)) /
         (1.0 - 2.0 * mu * k * sa * (1.0 - mu) / (1.0 - (2.0 * k - 1.0) * mu));
  const double s = std::sqrt(2.0 + 4.0 * mu);
  q.Q2 = s * (1.0 + sa * (1.0 - mu) * sq0) / (sa * (1.0 - mu) + s);
  return q;
}

QQuantities q_quantities(Index d, Index K, double mu, double epsilon) {
  if (K != 1) return q_quantities_general(d, K, mu, epsilon);
  require_mu(mu);
  if (!(mu < 0.5)) throw Error(ErrorCode::HypothesisViolated, "mu < 1/2 fails");
  const double ln_d = log_d(d);
  QQuantities q;
  q.nu_a = 1.0;
  q.nu_b = 1.0 - mu * mu;
  q.mu_d_max = 0.0;
  const double first = positive_factor(union_factor_k1(ln_d, mu), d);
  q.Q0 = (std::log(44.0 * std::numbers::sqrt2) - std::log(first)) / ln_d;
  const double sq0 = std::sqrt(q.Q0);
  q.Q1 = (1.0 - (1.0 - mu) * ((1.0 - epsilon) * std::sqrt(1.0 - mu) - sq0)) / (1.0 - 2.0 * mu);
  const double s = std::sqrt(2.0 + 2.0 * mu);
  q.Q2 = s * (1.0 + (1.0 - mu) * sq0) / (1.0 - mu + s);
  return q;
}

EpsilonBounds epsilon_bounds(double mu, Index K) {
  require_mu(mu);
  const double s = std::sqrt(K <= 1 ? mu : 2.0 * mu);
  return {s / (1.0 + s), 1.0};
}

EpsilonBounds epsilon_bounds_tight(double mu, Index K) {
  require_mu(mu);
  const double s = std::sqrt(mu + 1.0 - nu_a(K, mu));
  return {s / (1.0 + s), 1.0};
}

double threshold_tc(std::span<const double> rhos, Index d, Index K, double mu, double r) {
  const std::int64_t count = machines_needed(d, K, mu, r);
  if (static_cast<std::int64_t>(rhos.size()) != count) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(count) +
                                                " per-machine SNRs, got " +
                                                std::to_string(rhos.size()));
  }
  const double base = f_prob(d, K, mu, r);
  double sum = 0.0;
  for (Index m = 0; m < rhos.size(); ++m) {
    if (rhos[m] < r) {
      throw Error(ErrorCode::RhoBelowR, "machine " + std::to_string(m));
    }
    sum += f_prob(d, K, mu, rhos[m]) / base;
  }
  const double four_log_d = 4.0 * log_d(d);
  const double tc = sum / static_cast<double>(count) * four_log_d;
  if (tc < four_log_d) throw std::logic_error("threshold fell below 4 ln d");
  return tc;
}

TheoryReport check_theorem(const TheoryParams& p, std::int64_t machines_available) {
  TheoryReport rep;
  rep.params = p;
  rep.machines_available = machines_available;
  const double k = static_cast<double>(p.K);
  const double mu = p.mu_max;

  rep.max_mip_ok = p.K >= 1 && mu >= 0.0 && (2.0 * k - 1.0) * mu < 1.0;
  rep.coherence_ok =
      p.K == 1 ? mu < 0.5 : (4.0 * k - 1.0) * mu - 2.0 * k * mu * mu < 1.0;
  if (mu >= 0.0 && mu < 1.0) {
    rep.eps_lower_bound = epsilon_bounds(mu, p.K).lower;
    rep.eps_ok = rep.eps_lower_bound < p.epsilon && p.epsilon < 1.0;
  } else {
    rep.notes.push_back("coherence outside [0, 1)");
  }

  if (!rep.max_mip_ok) {
    rep.notes.push_back("max-MIP fails: theta_crit, r and F are undefined");
    return rep;
  }

  try {
    rep.theta_crit = theta_crit(mu, p.n, p.d, p.K, p.sigma);
    rep.r = snr_r(p);
    rep.nu_a = nu_a(p.K, mu);
    rep.nu_b = nu_b(p.K, mu);
    rep.mu_d_max = mu_d(p.K - 1, mu);
  } catch (const Error& e) {
    rep.notes.push_back(e.what());
    return rep;
  }

  if (rep.coherence_ok) {
    try {
      const QQuantities q = q_quantities(p.d, p.K, mu, p.epsilon);
      rep.Q0 = q.Q0;
      rep.Q1 = q.Q1;
      rep.Q2 = q.Q2;
      rep.r_threshold = std::pow(std::min(q.Q1, q.Q2), 2);
      rep.snr_ok = rep.r > rep.r_threshold;
    } catch (const Error& e) {
      rep.notes.push_back(e.what());
    }
  }

  try {
    rep.F = f_prob(p.d, p.K, mu, rep.r);
    rep.log_M_tilde = log_machines_needed(p.d, p.K, mu, rep.r);
    const MachineCountOptions caps;
    rep.feasible = rep.log_M_tilde <= std::log(caps.cap);
    if (rep.feasible) {
      const std::int64_t m_tilde = machines_needed(p.d, p.K, mu, rep.r, caps);
      const auto kk = static_cast<std::int64_t>(p.K);
      rep.M_tilde = static_cast<double>(m_tilde);
      rep.machines_per_round = kk == 1 ? m_tilde : kk * m_tilde;
      rep.machines_needed = kk * rep.machines_per_round;
      rep.machines_ok = machines_available >= rep.machines_needed;
      // Fresh-machine ledger: round t moves t indices per contacted machine.
      const std::uint64_t bits = std::bit_width(p.d - 1);
      rep.comm_bits_predicted = static_cast<std::uint64_t>(rep.machines_per_round) * bits *
                                (p.K * (p.K + 1) / 2);
    } else {
      rep.M_tilde = kInf;
      rep.notes.push_back("machine count exceeds cap: log M = " + std::to_string(rep.log_M_tilde));
    }
  } catch (const Error& e) {
    rep.notes.push_back(e.what());
  }
  rep.notes.push_back("'sufficiently large d = d(eps)' has no explicit constant; eps verdict checks only the interval");
  return rep;
}

bool tail_lemma_check(double a, double b) {
  return log_phi_c(a + b) < 0.5 * std::log(2.0) - 0.5 * b * b + log_phi_c(a);
}

double ProjectionDiagnostics::min_slack() const {
  return std::min({residual_norm_sq - norm_lower, norm_upper - residual_norm_sq,
                   cross_upper - cross, double_proj_sq - double_proj_lower});
}

ProjectionDiagnostics projection_bounds_check(const DesignMatrix& X, const SupportSet& S_hat,
                                              Index i, Index k, const LinalgOptions& opts) {
  if (i == k || i >= X.cols() || k >= X.cols() || S_hat.contains(i) || S_hat.contains(k)) {
    throw Error(ErrorCode::InvalidArgument, "need distinct i, k outside S_hat");
  }
  const NormalizedDesign unit = column_normalize(X);
  const DesignMatrix& Xn = unit.matrix;
  const Vector xi = Xn.column(i);
  const Vector xk = Xn.column(k);

  // (I - P_S) v is the least-squares residual of v on the columns in S_hat.
  auto project_out = [&](const Vector& v) {
    return residual(Xn, v, least_squares_on_support(Xn, v, S_hat, opts));
  };

  ProjectionDiagnostics out;
  const Vector ri = project_out(xi);
  out.residual_norm_sq = ri.squaredNorm();
  out.cross = std::abs(xk.dot(ri));
  const Vector w = xi - xk * xk.dot(xi);
  out.double_proj_sq = project_out(w).squaredNorm();

  out.mu = X.cols() >= 2 ? coherence(X) : 0.0;
  out.mu_d = mu_d(S_hat.size(), out.mu);
  out.norm_lower = 1.0 - out.mu_d;
  out.norm_upper = 1.0;
  out.cross_upper = out.mu + out.mu_d;
  out.double_proj_lower = 1.0 - out.mu * out.mu - out.mu_d * (1.0 + out.mu) * (1.0 + out.mu);
  return out;
}

namespace {

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

nlohmann::json report_json(const TheoryReport& r) {
  auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return nlohmann::json{
      {"d", r.params.d},
      {"K", r.params.K},
      {"n", r.params.n},
      {"sigma", r.params.sigma},
      {"mu_max", r.params.mu_max},
      {"theta_min_scaled", r.params.theta_min_scaled},
      {"epsilon", r.params.epsilon},
      {"machines_available", r.machines_available},
      {"theta_crit", r.theta_crit},
      {"r", r.r},
      {"F", r.F},
      {"M_tilde", finite_or_null(r.M_tilde)},
      {"log_M_tilde", r.log_M_tilde},
      {"Q0", r.Q0},
      {"Q1", r.Q1},
      {"Q2", r.Q2},
      {"nu_a", r.nu_a},
      {"nu_b", r.nu_b},
      {"mu_d_max", r.mu_d_max},
      {"eps_lower_bound", r.eps_lower_bound},
      {"r_threshold", r.r_threshold},
      {"max_mip_ok", r.max_mip_ok},
      {"coherence_ok", r.coherence_ok},
      {"eps_ok", r.eps_ok},
      {"snr_ok", r.snr_ok},
      {"machines_ok", r.machines_ok},
      {"feasible", r.feasible},
      {"machines_needed", r.machines_needed},
      {"machines_per_round", r.machines_per_round},
      {"comm_bits_predicted", r.comm_bits_predicted},
      {"all_ok", r.all_ok()},
  };
}

}  // namespace

std::string format_report(const TheoryReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  auto row = [&](const std::string& key, const auto& value) {
    os << "  " << std::left << std::setw(22) << key << value << '\n';
  };
  os << "parameters\n";
  row("d", r.params.d);
  row("K", r.params.K);
  row("n", r.params.n);
  row("sigma", r.params.sigma);
  row("mu_max", r.params.mu_max);
  row("theta_min_scaled", r.params.theta_min_scaled);
  row("epsilon", r.params.epsilon);
  row("machines_available", r.machines_available);
  os << "quantities\n";
  row("theta_crit", r.theta_crit);
  row("r", r.r);
  row("nu_a", r.nu_a);
  row("nu_b", r.nu_b);
  row("mu_d_max", r.mu_d_max);
  row("Q0", r.Q0);
  row("Q1", r.Q1);
  row("Q2", r.Q2);
  row("r_threshold", r.r_threshold);
  row("eps_lower_bound", r.eps_lower_bound);
  row("F", r.F);
  row("M_tilde", r.feasible ? std::to_string(static_cast<std::int64_t>(r.M_tilde)) : std::string("infeasible"));
  row("log_M_tilde", r.log_M_tilde);
  row("machines_per_round", r.machines_per_round);
  row("machines_needed", r.machines_needed);
  row("comm_bits_predicted", r.comm_bits_predicted);
  os << "verdicts\n";
  row("max_mip", verdict(r.max_mip_ok));
  row("coherence", verdict(r.coherence_ok));
  row("epsilon", verdict(r.eps_ok));
  row("snr", verdict(r.snr_ok));
  row("machines", verdict(r.machines_ok));
  row("all", verdict(r.all_ok()));
  for (const auto& note : r.notes) os << "note: " << note << '\n';
  return os.str();
}

std::string format_report_record(const TheoryReport& r) { return report_json(r).dump(); }

}  // namespace domp::theory
