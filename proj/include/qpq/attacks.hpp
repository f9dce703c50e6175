#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpq/qubit.hpp"
#include "qpq/series.hpp"

namespace qpq {

inline constexpr int kMaxParitySubstrings = 10;
inline constexpr std::uint64_t kDefaultAttackTrials = 1'000'000;

// Equal-prior optimal unambiguous discrimination of {|0>, |0'>}.
// e0 fires only on |0>, e1 only on |0'>.
struct UsdPovm {
  Eigen::Matrix2cd e0;
  Eigen::Matrix2cd e1;
  Eigen::Matrix2cd e_fail;
};

UsdPovm usd_povm(double theta);

// <psi|E|psi>.
double povm_probability(const Eigen::Matrix2cd& element, const StateVector& state);

enum class AttackKind { IndividualUsd, HonestProjective, Helstrom, JointUsd, BobConclusiveness };

std::string attack_name(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);

struct AttackReport {
  AttackKind kind = AttackKind::IndividualUsd;
  double theta = 0.0;
  int substrings = 1;
  std::size_t database_size = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  double analytic = 0.0;
  std::optional<double> estimate;
  std::optional<double> sigma;

  // Per raw bit (Alice's attacks) or per photon (Bob's attack).
  std::optional<double> per_bit_analytic;
  std::optional<double> per_bit_estimate;
  std::optional<double> per_bit_sigma;

  std::uint64_t wrong_identifications = 0;
  std::uint64_t conclusive_bit0 = 0;
  std::uint64_t conclusive_bit1 = 0;
};

// Alice reads raw bits one at a time with usd_povm (or, for the honest
// strategy, with the protocol's own measurement and sift) and learns a final
// bit when all k contributors are identified. `raw_bits` is rounded up to
// whole k-bit blocks. Analytic value: N (1 - cos t)^k, resp. N (sin^2 t / 2)^k.
AttackReport alice_individual_attack(AttackKind kind, std::size_t n, double theta, int k, std::uint64_t raw_bits,
                                     std::uint64_t seed);

struct ParityPair {
  DensityMatrix rho_even;
  DensityMatrix rho_odd;
};

// Uniform mixtures over the k-fold products of {|0> -> 0, |0'> -> 1} with even
// resp. odd parity. Throws CapacityError for k > 10.
ParityPair parity_mixtures(double theta, int k);

// 1/2 + 1/2 sin^k t.
double helstrom_guess(double theta, int k);

// 1/2 + 1/2 D(rho_even, rho_odd).
double helstrom_guess_numeric(double theta, int k);

// 1 - F(rho_even, rho_odd), the per-final-bit upper bound for unambiguous
// parity discrimination.
double joint_usd_bound(double theta, int k);

// Exact probabilities of Alice's sift result under Bob's |0''>/|1''> attack.
struct BobAttackDistribution {
  double inconclusive = 0.0;
  double bit0 = 0.0;
  double bit1 = 0.0;
};

BobAttackDistribution bob_attack_distribution(double theta, bool want_conclusive);

// Bob sends |0''> or |1''> uniformly and announces the letter that makes
// Alice's result conclusive (want_conclusive) or inconclusive. Analytic
// conclusive rate: cos^2(t/2), resp. sin^2(t/2).
AttackReport bob_conclusiveness_attack(double theta, bool want_conclusive, std::uint64_t trials, std::uint64_t seed);

enum class FigureId { F1, F2, F3, F4, F5 };

std::string figure_name(FigureId id);
FigureId parse_figure_id(const std::string& name);

struct FigureGrid {
  int theta_steps = 90;  // theta = i * (pi/2) / steps, i = 1..steps-1
  std::vector<double> thetas{0.1, 0.2, 0.3, 0.5, 0.7853981633974483};
  int max_k = 8;
  double database_size = 5e4;
};

// F3: 1 - cos t and sin^2 t / 2 over theta.
// F4: joint_usd_bound against k for several theta, with N * bound.
// F5: cos^2(t/2) over theta with the theta = pi/4 reference.
// F1 and F2 come from the planner (tables.hpp).
Series fig_data(FigureId id, const FigureGrid& grid = {});

}  // namespace qpq
