#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

namespace qpq {

inline constexpr int kMaxPlanSubstrings = 64;

struct PlanResult {
  std::size_t database_size = 0;  // N
  int substrings = 1;             // k
  double theta = 0.0;
  double p = 0.0;       // conclusive probability sin^2(theta)/2
  double n_bar = 0.0;   // N p^k
  double p_fail = 0.0;  // (1 - p^k)^N
};

// sin^2(theta) / 2.
double conclusive_probability(double theta);

// N p^k.
double expected_known_bits(double n, double p, int k);

// (1 - p^k)^N evaluated as exp(N log1p(-p^k)).
double failure_probability(double n, double p, int k);

// Theta with N p(theta)^k = n_bar. Throws PlanningError naming the p <= 1/2
// bound when the target is infeasible.
double solve_theta(double n, int k, double n_bar);

PlanResult make_plan(std::size_t n, int k, double theta);

// Smallest k in [1, 64] whose solved theta lies in [theta_min, theta_max].
// theta_max defaults to pi/4; pass a larger value to lift the cap.
PlanResult plan_min_k(std::size_t n, double n_bar, double theta_min, double theta_max = std::numbers::pi / 4);

// Largest k whose restart probability stays within p_fail_max at fixed p.
// This is the rule behind the k row of the p = 0.15 table.
PlanResult plan_max_k_within_restart_budget(std::size_t n, double p, double p_fail_max);

struct KnownCountDistribution {
  std::vector<double> binomial;  // P(n = m), m = 0..size-1
  std::vector<double> poisson;   // Poisson(N p^k) on the same support
};

// Binomial(N, p^k) mass function, truncated once the cumulative mass reaches
// 1 - 1e-12, with the Poisson(N p^k) companion.
KnownCountDistribution known_count_distribution(std::size_t n, double p, int k);

// Half the L1 distance of two mass vectors (shorter one zero-extended).
double total_variation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace qpq
