#include "qpq/planner.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "qpq/errors.hpp"
#include "qpq/qubit.hpp"

namespace qpq {

namespace {

void check_counts(double n, double p, int k) {
  if (!(n >= 1.0)) throw DomainError("N must be >= 1");
  if (!(p > 0.0 && p <= 0.5)) throw DomainError("p must lie in (0, 1/2]");
  if (k < 1) throw DomainError("k must be >= 1");
}

}  // namespace

double conclusive_probability(double theta) {
  check_theta(theta);
  const double s = std::sin(theta);
  return s * s / 2.0;
}

double expected_known_bits(double n, double p, int k) {
  check_counts(n, p, k);
  return n * std::pow(p, k);
}

double failure_probability(double n, double p, int k) {
  check_counts(n, p, k);
  return std::exp(n * std::log1p(-std::pow(p, k)));
}

double solve_theta(double n, int k, double n_bar) {
  if (!(n >= 1.0)) throw DomainError("N must be >= 1");
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(n_bar > 0.0)) throw DomainError("target n_bar must be positive");
  const double p = std::pow(n_bar / n, 1.0 / k);
  if (p > 0.5) {
    std::ostringstream msg;
    msg << "no theta exists: target exceeds p≤1/2 bound (N=" << n << ", k=" << k << ", n_bar=" << n_bar
        << " needs p=" << p << ")";
    throw PlanningError(msg.str());
  }
  return std::asin(std::sqrt(2.0 * p));
}

PlanResult make_plan(std::size_t n, int k, double theta) {
  PlanResult r;
  r.database_size = n;
  r.substrings = k;
  r.theta = theta;
  r.p = conclusive_probability(theta);
  r.n_bar = expected_known_bits(static_cast<double>(n), r.p, k);
  r.p_fail = failure_probability(static_cast<double>(n), r.p, k);
  return r;
}

PlanResult plan_min_k(std::size_t n, double n_bar, double theta_min, double theta_max) {
  if (!(theta_min > 0.0 && theta_min <= theta_max)) throw DomainError("theta_min must lie in (0, theta_max]");
  // Solutions land on pi/4 exactly in exact arithmetic (e.g. N=12, n_bar=3).
  constexpr double kEdge = 1e-12;
  for (int k = 1; k <= kMaxPlanSubstrings; ++k) {
    double theta = 0.0;
    try {
      theta = solve_theta(static_cast<double>(n), k, n_bar);
    } catch (const PlanningError&) {
      continue;
    }
    if (theta >= theta_min - kEdge && theta <= theta_max + kEdge) return make_plan(n, k, theta);
  }
  std::ostringstream msg;
  msg << "no k <= " << kMaxPlanSubstrings << " puts theta in [" << theta_min << ", " << theta_max << "] for N=" << n
      << ", n_bar=" << n_bar;
  throw PlanningError(msg.str());
}

PlanResult plan_max_k_within_restart_budget(std::size_t n, double p, double p_fail_max) {
  const double theta = std::asin(std::sqrt(2.0 * p));
  int best = 0;
  for (int k = 1; k <= kMaxPlanSubstrings; ++k) {
    if (failure_probability(static_cast<double>(n), p, k) <= p_fail_max) best = k;
  }
  if (best == 0) throw PlanningError("no k keeps the restart probability within budget");
  PlanResult r = make_plan(n, best, theta);
  r.p = p;
  r.n_bar = expected_known_bits(static_cast<double>(n), p, best);
  r.p_fail = failure_probability(static_cast<double>(n), p, best);
  return r;
}

KnownCountDistribution known_count_distribution(std::size_t n, double p, int k) {
  check_counts(static_cast<double>(n), p, k);
  const double q = std::pow(p, k);
  const double mean = static_cast<double>(n) * q;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  KnownCountDistribution d;
  double cumulative = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    const double md = static_cast<double>(m);
    const double log_binom = lg_n1 - std::lgamma(md + 1.0) - std::lgamma(static_cast<double>(n - m) + 1.0);
    const double b = std::exp(log_binom + md * log_q + static_cast<double>(n - m) * log_1mq);
    const double pois = std::exp(md * std::log(mean) - mean - std::lgamma(md + 1.0));
    d.binomial.push_back(b);
    d.poisson.push_back(pois);
    cumulative += b;
    if (cumulative >= 1.0 - 1e-12) break;
  }
  return d;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  const std::size_t len = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < len; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum += std::abs(x - y);
  }
  return sum / 2.0;
}

}  // namespace qpq
